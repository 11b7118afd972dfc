//! Absorbing and emitting optical potentials on a window.
//!
//! The rate `Γ` is normalized so that the absorbed flux of carriers
//! incident from `β` is `Γ ν(w,β) w` to first order: the window carries
//! `Im V = ∓Γ/4π` (absorber / source).

use num_complex::Complex64;

use super::{prob_matrix, LocalDos, TransportError, FIRST_ORDER_LIMIT};
use crate::numerics::{fit_order, rel_diff};
use crate::potential::{PotentialProfile, Window};
use crate::scatter1d;

/// Imaginary window potential for rate `gamma`; negative `gamma` emits.
pub fn optical_potential(gamma: f64) -> Complex64 {
    Complex64::new(0.0, -gamma / (4.0 * std::f64::consts::PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionReport {
    /// `|S^Γ_αβ|²`, indexed `[α][β]`.
    pub probabilities: [[f64; 2]; 2],
    /// `1 − Σ_α |S^Γ_αβ|²` per incident `β`.
    pub absorbed: [f64; 2],
    /// First-order prediction `Γ ν(w,β) w`.
    pub predicted: [f64; 2],
    pub local: LocalDos,
}

impl AbsorptionReport {
    pub fn relative_error(&self) -> [f64; 2] {
        [0, 1].map(|b| rel_diff(self.absorbed[b], self.predicted[b], f64::MIN_POSITIVE))
    }
}

fn check_rate(gamma: f64) -> Result<(), TransportError> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(TransportError::InvalidParameter(format!(
            "rate must be finite and non-negative, got {gamma}"
        )))
    }
}

fn optical_solve(
    profile: &PotentialProfile,
    window: &Window,
    v: Complex64,
    e: f64,
) -> Result<[[f64; 2]; 2], TransportError> {
    let perturbed = profile.perturb(window, v)?;
    Ok(prob_matrix(&scatter1d::smatrix(&perturbed, e)?))
}

pub fn absorption_probabilities(
    profile: &PotentialProfile,
    window: &Window,
    gamma: f64,
    e: f64,
) -> Result<AbsorptionReport, TransportError> {
    check_rate(gamma)?;
    let local = LocalDos::on_window(profile, e, window)?;
    let probabilities = optical_solve(profile, window, optical_potential(gamma), e)?;
    let absorbed = [0, 1].map(|b| 1.0 - probabilities[0][b] - probabilities[1][b]);
    if let Some(&value) = absorbed.iter().find(|a| a.abs() > FIRST_ORDER_LIMIT) {
        return Err(TransportError::FirstOrderViolated { value });
    }
    let w = window.width();
    Ok(AbsorptionReport {
        probabilities,
        absorbed,
        predicted: local.inj.map(|n| gamma * n * w),
        local,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceReport {
    /// `|S^Γ_αβ|²`, indexed `[α][β]`.
    pub probabilities: [[f64; 2]; 2],
    /// Emitted current into contact `α`, `Σ_β |S^Γ_αβ|² − 1`.
    pub emitted: [f64; 2],
    /// First-order prediction `Γ ν(α,w) w`.
    pub predicted: [f64; 2],
    pub total: f64,
    /// `Γ ν(w) w`.
    pub predicted_total: f64,
    pub local: LocalDos,
}

impl SourceReport {
    pub fn relative_error(&self) -> [f64; 2] {
        [0, 1].map(|a| rel_diff(self.emitted[a], self.predicted[a], f64::MIN_POSITIVE))
    }
}

pub fn source_currents(
    profile: &PotentialProfile,
    window: &Window,
    gamma: f64,
    e: f64,
) -> Result<SourceReport, TransportError> {
    check_rate(gamma)?;
    let local = LocalDos::on_window(profile, e, window)?;
    let probabilities = optical_solve(profile, window, optical_potential(-gamma), e)?;
    let emitted = [0, 1].map(|a| probabilities[a][0] + probabilities[a][1] - 1.0);
    if let Some(&value) = emitted.iter().find(|j| j.abs() > FIRST_ORDER_LIMIT) {
        return Err(TransportError::FirstOrderViolated { value });
    }
    let w = window.width();
    Ok(SourceReport {
        probabilities,
        emitted,
        predicted: local.emis.map(|n| gamma * n * w),
        total: emitted[0] + emitted[1],
        predicted_total: gamma * local.ldos * w,
        local,
    })
}

/// Residual of `j_in − j_T − j_R − j_Γ` (first-order `j_Γ`) over a rate
/// sequence, for incidence from each contact.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentBalance {
    pub gammas: Vec<f64>,
    /// `residuals[i][β]`.
    pub residuals: Vec<[f64; 2]>,
    pub order: [Option<f64>; 2],
}

pub fn current_balance(
    profile: &PotentialProfile,
    window: &Window,
    e: f64,
    gammas: &[f64],
) -> Result<CurrentBalance, TransportError> {
    let local = LocalDos::on_window(profile, e, window)?;
    let w = window.width();
    let mut residuals = Vec::with_capacity(gammas.len());
    for &g in gammas {
        check_rate(g)?;
        let p = optical_solve(profile, window, optical_potential(g), e)?;
        residuals.push([0, 1].map(|b| (1.0 - p[0][b] - p[1][b] - g * local.inj[b] * w).abs()));
    }
    let order = [0, 1].map(|b| {
        let r: Vec<f64> = residuals.iter().map(|r| r[b]).collect();
        fit_order(gammas, &r)
    });
    Ok(CurrentBalance {
        gammas: gammas.to_vec(),
        residuals,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scatter1d::Contact;
    use std::f64::consts::PI;

    #[test]
    fn zero_rate_is_unperturbed() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let w = Window::new(0.5, 1.0).unwrap();
        let r = absorption_probabilities(&p, &w, 0.0, 0.5).unwrap();
        assert!(r.absorbed.iter().all(|a| a.abs() < 1e-14));
        let s = scatter1d::smatrix(&p, 0.5).unwrap();
        assert!((r.probabilities[1][0] - s.transmission()).abs() < 1e-15);
        let src = source_currents(&p, &w, 0.0, 0.5).unwrap();
        assert!(src.emitted.iter().all(|j| j.abs() < 1e-14));
    }

    #[test]
    fn free_absorption() {
        let p = PotentialProfile::flat(0.0, 1.0, 0.0).unwrap();
        let w = Window::new(0.3, 0.4).unwrap();
        let r = absorption_probabilities(&p, &w, 1e-3, 1.0).unwrap();
        let expected = 1e-3 * 0.1 / (4.0 * PI);
        for b in 0..2 {
            assert!((r.absorbed[b] - expected).abs() / expected < 1e-3);
        }
        let src = source_currents(&p, &w, 1e-3, 1.0).unwrap();
        assert!((src.emitted[0] - src.emitted[1]).abs() / src.emitted[0] < 1e-3);
        assert!((src.emitted[0] - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn barrier_absorption_follows_wavefunction() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let w = Window::new(0.5, 0.6).unwrap();
        let e = 0.5;
        let r = absorption_probabilities(&p, &w, 1e-4, e).unwrap();
        let sol = scatter1d::solve(&p, e, &Default::default()).unwrap();
        for b in Contact::ALL {
            let wf = 1e-4 * w.width() * sol.window_density(b, &w).unwrap();
            assert!((r.absorbed[b.index()] - wf).abs() / wf < 1e-3);
        }
    }

    #[test]
    fn asymmetric_emission_ratio() {
        let p = PotentialProfile::new([(0.0, 1.0, 0.4), (1.0, 2.0, 0.0), (2.0, 2.5, 1.5)], 0.0, 0.0)
            .unwrap();
        let w = Window::new(1.2, 1.3).unwrap();
        let src = source_currents(&p, &w, 1e-4, 0.9).unwrap();
        let ratio = src.emitted[0] / src.emitted[1];
        let expected = src.local.emis[0] / src.local.emis[1];
        assert!((ratio - expected).abs() / expected < 1e-3);
        assert!((src.total - src.predicted_total).abs() / src.predicted_total < 1e-3);
    }

    #[test]
    fn balance_residual_is_second_order() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let w = Window::new(0.5, 1.0).unwrap();
        let cb = current_balance(&p, &w, 0.5, &[4e-3, 2e-3, 1e-3]).unwrap();
        for o in cb.order {
            assert!(o.unwrap() > 1.8, "{cb:?}");
        }
    }

    #[test]
    fn strong_absorber_rejected() {
        let p = PotentialProfile::flat(0.0, 5.0, 0.0).unwrap();
        let w = Window::new(0.0, 5.0).unwrap();
        assert!(matches!(
            absorption_probabilities(&p, &w, 10.0, 1.0),
            Err(TransportError::FirstOrderViolated { .. })
        ));
    }
}
