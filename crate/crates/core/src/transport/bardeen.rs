//! Weakly coupled tip: Bardeen transmissions, voltage probe and the
//! optical-potential model of dephasing.

use super::absorb::optical_potential;
use super::{prob_matrix, LocalDos, TransportError, FIRST_ORDER_LIMIT, LDOS_FLOOR};
use crate::dos::min_wavelength;
use crate::potential::{PotentialProfile, Window};
use crate::scatter1d::{self, Contact};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipCoupling {
    pub x: f64,
    /// `|t|²`.
    pub t2: f64,
    pub nu_tip: f64,
    /// Width of the contact region; `None` uses a hundredth of the
    /// shortest wavelength.
    pub width: Option<f64>,
}

impl TipCoupling {
    pub fn new(x: f64, t2: f64, nu_tip: f64) -> Self {
        TipCoupling {
            x,
            t2,
            nu_tip,
            width: None,
        }
    }

    /// `4π² |t|² ν_tip`.
    pub fn strength(&self) -> f64 {
        4.0 * PI * PI * self.t2 * self.nu_tip
    }

    pub fn window(&self, profile: &PotentialProfile, e: f64) -> Result<Window, TransportError> {
        let width = self.width.unwrap_or_else(|| min_wavelength(profile, e) / 100.0);
        Ok(Window::centered(self.x, width)?)
    }

    fn validate(&self) -> Result<(), TransportError> {
        if !(self.t2 >= 0.0 && self.t2.is_finite()) {
            return Err(TransportError::InvalidParameter(format!("|t|² = {}", self.t2)));
        }
        if !(self.nu_tip > 0.0 && self.nu_tip.is_finite()) {
            return Err(TransportError::InvalidParameter(format!("ν_tip = {}", self.nu_tip)));
        }
        Ok(())
    }

    fn local(&self, profile: &PotentialProfile, e: f64) -> Result<LocalDos, TransportError> {
        self.validate()?;
        let local = LocalDos::on_window(profile, e, &self.window(profile, e)?)?;
        let value = self.strength() * local.ldos;
        if value >= FIRST_ORDER_LIMIT {
            return Err(TransportError::ValidityFlagViolated { value });
        }
        Ok(local)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BardeenReport {
    /// `T_tip,α = 4π² ν_tip |t|² ν(x,α)`.
    pub into_tip: [f64; 2],
    /// `T_α,tip = 4π² ν(α,x) |t|² ν_tip`.
    pub from_tip: [f64; 2],
    /// `|S_αβ|² − 4π² ν(α,x,β) |t|² ν_tip`, indexed `[α][β]`.
    pub corrected: [[f64; 2]; 2],
    /// `4π² |t|² ν_tip ν(x)`.
    pub validity: f64,
    pub local: LocalDos,
}

pub fn bardeen_transmissions(
    profile: &PotentialProfile,
    e: f64,
    tip: &TipCoupling,
) -> Result<BardeenReport, TransportError> {
    let local = tip.local(profile, e)?;
    let c = tip.strength();
    let probs = prob_matrix(&scatter1d::smatrix(profile, e)?);
    let mut corrected = probs;
    for a in 0..2 {
        for b in 0..2 {
            corrected[a][b] -= c * local.pdos[a][b];
        }
    }
    Ok(BardeenReport {
        into_tip: local.inj.map(|n| c * n),
        from_tip: local.emis.map(|n| c * n),
        corrected,
        validity: c * local.ldos,
        local,
    })
}

/// `G = −G₂₁ − G₂₃G₃₁/(G₃₁ + G₃₂)` with `G_αβ = −(probability β → α)`.
fn three_terminal(t21: f64, t2_tip: f64, t_tip1: f64, t_tip2: f64) -> f64 {
    let denom = t_tip1 + t_tip2;
    if denom == 0.0 {
        t21
    } else {
        t21 + t2_tip * t_tip1 / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConductance {
    pub transmission: f64,
    /// `T − 4π²|t|²ν_tip [ν(2,x,1) − ν(2,x)ν(x,1)/ν(x)]`.
    pub closed_form: f64,
    /// Three-terminal formula with the exact probabilities of a tip
    /// modelled as a local absorber with the wide-band self-energy.
    pub three_terminal: f64,
    /// Three-terminal formula fed with the first-order Bardeen values.
    pub first_order_assembly: f64,
    pub local: LocalDos,
}

pub fn voltage_probe_conductance(
    profile: &PotentialProfile,
    e: f64,
    tip: &TipCoupling,
) -> Result<ProbeConductance, TransportError> {
    let bardeen = bardeen_transmissions(profile, e, tip)?;
    let local = bardeen.local;
    if local.ldos < LDOS_FLOOR {
        return Err(TransportError::DivisionByZeroLdos { ldos: local.ldos });
    }
    let (l, r) = (Contact::Left.index(), Contact::Right.index());
    let c = tip.strength();
    let t = local.transmission;
    let closed_form = t - c * (local.pdos[r][l] - local.emis[r] * local.inj[l] / local.ldos);
    let first_order_assembly = three_terminal(
        bardeen.corrected[r][l],
        bardeen.from_tip[r],
        bardeen.into_tip[l],
        bardeen.into_tip[r],
    );

    // Tip self-energy −iπ|t|²ν_tip spread over the contact window.
    let window = local.window;
    let v = num_complex::Complex64::new(0.0, -PI * tip.t2 * tip.nu_tip / window.width());
    let p = prob_matrix(&scatter1d::smatrix(&profile.perturb(&window, v)?, e)?);
    let into_tip = [1.0 - p[0][l] - p[1][l], 1.0 - p[0][r] - p[1][r]];
    let from_tip_r = 1.0 - p[r][0] - p[r][1];
    let three = three_terminal(p[r][l], from_tip_r, into_tip[l], into_tip[r]);
    Ok(ProbeConductance {
        transmission: t,
        closed_form,
        three_terminal: three,
        first_order_assembly,
        local,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingConductance {
    pub transmission: f64,
    /// Coherent `|S^Γ₂₁|²` plus the absorbed flux from contact 1
    /// re-emitted in the proportion `ν(2,w)/ν(w)`.
    pub exact: f64,
    /// `T − Γ w [ν(2,w,1) − ν(2,w)ν(w,1)/ν(w)]`.
    pub first_order: f64,
    /// Flux absorbed from contact 1.
    pub absorbed: f64,
    pub local: LocalDos,
}

pub fn optical_dephasing_conductance(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    gamma: f64,
) -> Result<DephasingConductance, TransportError> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(TransportError::InvalidParameter(format!("rate {gamma}")));
    }
    let local = LocalDos::on_window(profile, e, window)?;
    if local.ldos < LDOS_FLOOR {
        return Err(TransportError::DivisionByZeroLdos { ldos: local.ldos });
    }
    let (l, r) = (Contact::Left.index(), Contact::Right.index());
    let p = prob_matrix(&scatter1d::smatrix(
        &profile.perturb(window, optical_potential(gamma))?,
        e,
    )?);
    let absorbed = 1.0 - p[0][l] - p[1][l];
    if absorbed.abs() > FIRST_ORDER_LIMIT {
        return Err(TransportError::FirstOrderViolated { value: absorbed });
    }
    let forward = local.emis[r] / local.ldos;
    let gw = gamma * window.width();
    Ok(DephasingConductance {
        transmission: local.transmission,
        exact: p[r][l] + absorbed * forward,
        first_order: local.transmission
            - gw * (local.pdos[r][l] - local.emis[r] * local.inj[l] / local.ldos),
        absorbed,
        local,
    })
}
