//! Local Larmor clock.
//!
//! A weak Zeeman field on a window splits the potential into `V ∓ ħω_L/2`
//! for the two spin species. An x-polarized incident spin precesses in the
//! x-y plane and rotates toward the field axis; for small `ω_L` the two
//! angles per unit frequency are `τ_y = h ν(α,w,β) w / |S_αβ|²` and
//! `τ_z = h η(α,w,β) w / |S_αβ|²`.
//!
//! Spins are reported in the field-aligned frame: `sz > 0` means rotation
//! toward the spin state with the higher Zeeman energy on the window
//! (the spin-down state), `sy > 0` means precession in the positive
//! sense for that frame. With this orientation both ratios `sy/ω_L` and
//! `sz/ω_L` tend to the perturbative times with a plus sign.

use num_complex::Complex64;
use thiserror::Error;

use crate::dos::{self, DosError, SDerivative};
use crate::numerics::{fit_order, H};
use crate::potential::{PotentialProfile, Window};
use crate::scatter1d::{self, Contact, ScatterError};

/// Channels with `|S_αβ|²` at or below this are refused.
pub const BLOCKED_PROBABILITY: f64 = 1e-12;
/// Minimum accepted convergence order of the direct clock.
pub const MIN_ORDER: f64 = 1.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error("a spin channel is evanescent: {0}")]
    SpinChannelEvanescent(ScatterError),
    #[error("channel ({alpha:?}, {beta:?}) is blocked: |S|² = {probability:e}")]
    ChannelBlocked {
        alpha: Contact,
        beta: Contact,
        probability: f64,
    },
    #[error("direct clock converges with order {order:.3} < {MIN_ORDER}")]
    NonConvergent { order: f64 },
    #[error("at least three Larmor frequencies are required")]
    TooFewFrequencies,
    #[error(transparent)]
    Scatter(ScatterError),
    #[error(transparent)]
    Dos(#[from] DosError),
}

impl From<ScatterError> for ClockError {
    fn from(e: ScatterError) -> Self {
        match e {
            ScatterError::EvanescentChannel { .. } => ClockError::SpinChannelEvanescent(e),
            other => ClockError::Scatter(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LarmorClockReading {
    pub alpha: Contact,
    pub beta: Contact,
    pub window: Window,
    /// Zero for perturbative readings.
    pub omega_l: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub tau_y: f64,
    pub tau_z: f64,
    pub tau_x: f64,
}

/// Direct reading from the two spin-resolved S-matrices.
pub fn spin_direct(
    profile: &PotentialProfile,
    window: &Window,
    omega_l: f64,
    e: f64,
    alpha: Contact,
    beta: Contact,
) -> Result<LarmorClockReading, ClockError> {
    let sp = scatter1d::solve_spinor(profile, window, omega_l, e).map_err(|err| match err {
        ScatterError::Profile(p) => ClockError::Dos(DosError::Profile(p)),
        other => other.into(),
    })?;
    let up = sp.s_plus.get(alpha, beta);
    let down = sp.s_minus.get(alpha, beta);
    let norm = up.norm_sqr() + down.norm_sqr();
    if 0.5 * norm <= BLOCKED_PROBABILITY {
        return Err(ClockError::ChannelBlocked {
            alpha,
            beta,
            probability: 0.5 * norm,
        });
    }
    let cross = down.conj() * up;
    let sx = 2.0 * cross.re / norm;
    let sy = 2.0 * cross.im / norm;
    let sz = (down.norm_sqr() - up.norm_sqr()) / norm;
    let (tau_y, tau_z) = if omega_l == 0.0 {
        (0.0, 0.0)
    } else {
        (sy / omega_l, sz / omega_l)
    };
    Ok(LarmorClockReading {
        alpha,
        beta,
        window: *window,
        omega_l,
        sx,
        sy,
        sz,
        tau_y,
        tau_z,
        tau_x: tau_y.hypot(tau_z),
    })
}

/// Perturbative times from an already computed functional derivative.
pub fn times_from_derivative(
    deriv: &SDerivative,
    alpha: Contact,
    beta: Contact,
) -> Result<LarmorClockReading, ClockError> {
    let s: Complex64 = deriv.s.get(alpha, beta);
    let prob = s.norm_sqr();
    if prob <= BLOCKED_PROBABILITY {
        return Err(ClockError::ChannelBlocked {
            alpha,
            beta,
            probability: prob,
        });
    }
    let w = deriv.window.width();
    let d = deriv.d[(alpha.index(), beta.index())];
    Ok(LarmorClockReading {
        alpha,
        beta,
        window: deriv.window,
        omega_l: 0.0,
        sx: 1.0,
        sy: 0.0,
        sz: 0.0,
        tau_y: H * deriv.pdos(alpha, beta)? * w / prob,
        tau_z: H * deriv.eta(alpha, beta) * w / prob,
        tau_x: w * d.norm() / prob.sqrt(),
    })
}

pub fn times_perturbative(
    profile: &PotentialProfile,
    window: &Window,
    e: f64,
    alpha: Contact,
    beta: Contact,
) -> Result<LarmorClockReading, ClockError> {
    let deriv = dos::window_derivative(profile, e, window)?;
    times_from_derivative(&deriv, alpha, beta)
}

/// `ħω_L/2 ∈ {1e-2, 5e-3, 2.5e-3}·E`, large enough for the residuals to
/// clear the finite-difference floor of the perturbative times.
pub fn default_omegas(e: f64) -> Vec<f64> {
    [1e-2, 5e-3, 2.5e-3].iter().map(|f| 2.0 * f * e.abs()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConsistency {
    pub alpha: Contact,
    pub beta: Contact,
    pub perturbative: LarmorClockReading,
    pub direct: Vec<LarmorClockReading>,
    pub residual_y: Vec<f64>,
    pub residual_z: Vec<f64>,
    /// `None` when every residual is at rounding level.
    pub order_y: Option<f64>,
    pub order_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockConsistency {
    pub omegas: Vec<f64>,
    /// Open channels only.
    pub channels: Vec<ChannelConsistency>,
}

impl ClockConsistency {
    pub fn min_order(&self) -> Option<f64> {
        self.channels
            .iter()
            .flat_map(|c| [c.order_y, c.order_z])
            .flatten()
            .reduce(f64::min)
    }
}

// Residuals below this (relative to the time scale) are taken as exact.
const RESIDUAL_FLOOR: f64 = 1e-7;

fn order_above_floor(omegas: &[f64], residuals: &[f64], scale: f64) -> Option<f64> {
    if residuals.iter().all(|r| *r <= RESIDUAL_FLOOR * scale) {
        None
    } else {
        fit_order(omegas, residuals)
    }
}

/// Compares direct readings over a decreasing frequency sequence with the
/// perturbative times for every open channel.
pub fn clock_consistency(
    profile: &PotentialProfile,
    window: &Window,
    e: f64,
    omegas: &[f64],
) -> Result<ClockConsistency, ClockError> {
    if omegas.len() < 3 {
        return Err(ClockError::TooFewFrequencies);
    }
    let deriv = dos::window_derivative(profile, e, window)?;
    let mut channels = Vec::new();
    for alpha in Contact::ALL {
        for beta in Contact::ALL {
            let pert = match times_from_derivative(&deriv, alpha, beta) {
                Ok(r) => r,
                Err(ClockError::ChannelBlocked { .. }) => continue,
                Err(err) => return Err(err),
            };
            let direct: Vec<LarmorClockReading> = omegas
                .iter()
                .map(|&w| spin_direct(profile, window, w, e, alpha, beta))
                .collect::<Result<_, _>>()?;
            let residual_y: Vec<f64> =
                direct.iter().map(|r| (r.tau_y - pert.tau_y).abs()).collect();
            let residual_z: Vec<f64> =
                direct.iter().map(|r| (r.tau_z - pert.tau_z).abs()).collect();
            let scale = pert.tau_x.max(f64::MIN_POSITIVE);
            let order_y = order_above_floor(omegas, &residual_y, scale);
            let order_z = order_above_floor(omegas, &residual_z, scale);
            for order in [order_y, order_z].into_iter().flatten() {
                if order < MIN_ORDER {
                    return Err(ClockError::NonConvergent { order });
                }
            }
            channels.push(ChannelConsistency {
                alpha,
                beta,
                perturbative: pert,
                direct,
                residual_y,
                residual_z,
                order_y,
                order_z,
            });
        }
    }
    Ok(ClockConsistency {
        omegas: omegas.to_vec(),
        channels,
    })
}
