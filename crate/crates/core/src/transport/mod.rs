//! Transport observables built on the density-of-states hierarchy.
//!
//! Conductances are in units of `e²/h` and emittances in units of
//! `e² × density of states`; `e` itself never enters numerically.

use num_complex::Complex64;
use thiserror::Error;

use crate::dos::{self, DosError};
use crate::potential::{PotentialProfile, ProfileError, Window};
use crate::scatter1d::{Contact, ScatterError};

mod absorb;
mod bardeen;
mod emittance;
mod saddle;

pub use absorb::{
    absorption_probabilities, current_balance, optical_potential, source_currents,
    AbsorptionReport, CurrentBalance, SourceReport,
};
pub use bardeen::{
    bardeen_transmissions, optical_dephasing_conductance, voltage_probe_conductance,
    BardeenReport, DephasingConductance, ProbeConductance, TipCoupling,
};
pub use emittance::{emittance_local_screening, ChannelEmittance, EmittanceReport};
pub use saddle::{saddle_emittance, saddle_pdos, SaddleModel, SaddlePoint, SaddleSweep, SemiclassicalPdos};

/// First-order treatments are refused past this absorbed or emitted flux.
pub const FIRST_ORDER_LIMIT: f64 = 0.1;
/// Local densities below this count as zero.
pub const LDOS_FLOOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("flux change {value:e} is outside the first-order regime")]
    FirstOrderViolated { value: f64 },
    #[error("tip coupling 4π²|t|²ν_tip ν(x) = {value:e} is not small")]
    ValidityFlagViolated { value: f64 },
    #[error("local density of states {ldos:e} at the tip vanishes")]
    DivisionByZeroLdos { ldos: f64 },
    #[error("window {index} has vanishing local density of states {ldos:e}")]
    ZeroLdosWindow { index: usize, ldos: f64 },
    #[error("transmission {t} is outside [0, 1]")]
    TransmissionOutOfRange { t: f64 },
    #[error("emittance rows or columns fail to sum to zero (defect {defect:e})")]
    EmittanceSumViolated { defect: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Dos(#[from] DosError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// PDOS matrix and its reductions on one window, indexed `[α][β]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDos {
    pub window: Window,
    pub pdos: [[f64; 2]; 2],
    pub inj: [f64; 2],
    pub emis: [f64; 2],
    pub ldos: f64,
    pub transmission: f64,
}

impl LocalDos {
    /// Uses the extended-window derivative, so `window` can be of any width.
    pub fn on_window(profile: &PotentialProfile, e: f64, window: &Window) -> Result<Self, TransportError> {
        let d = dos::window_derivative(profile, e, window)?;
        let mut pdos = [[0.0; 2]; 2];
        for a in Contact::ALL {
            for b in Contact::ALL {
                pdos[a.index()][b.index()] = d.pdos(a, b)?;
            }
        }
        let inj = [pdos[0][0] + pdos[1][0], pdos[0][1] + pdos[1][1]];
        let emis = [pdos[0][0] + pdos[0][1], pdos[1][0] + pdos[1][1]];
        Ok(LocalDos {
            window: *window,
            pdos,
            inj,
            emis,
            ldos: inj[0] + inj[1],
            transmission: d.s.transmission(),
        })
    }

    pub fn pdos(&self, alpha: Contact, beta: Contact) -> f64 {
        self.pdos[alpha.index()][beta.index()]
    }
}

pub(crate) fn prob_matrix(s: &crate::scatter1d::SMatrix) -> [[f64; 2]; 2] {
    let p = |a: usize, b: usize| Complex64::norm_sqr(&s.0[(a, b)]);
    [[p(0, 0), p(0, 1)], [p(1, 0), p(1, 1)]]
}
