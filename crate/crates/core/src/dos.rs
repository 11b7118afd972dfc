//! Functional derivatives of the S-matrix and the density-of-states
//! hierarchy built from them.
//!
//! `δS/δV(y)` is approximated by a symmetric finite difference of a uniform
//! shift `±δV` on a narrow window, divided by `2 δV · width`, with one level
//! of Richardson extrapolation in `δV`. Every derivative is checked against
//! the wavefunction form of the injectivity, `Σ_α ν(α,w,β) = ⟨|ψ_β|²⟩_w/(h v_β)`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::{rel_diff, richardson, H};
use crate::potential::{PotentialProfile, ProfileError, Window};
use crate::scatter1d::{
    self, symmetrize, Contact, GridSpec, SMatrix, ScatterError, ScatteringSolution,
};

/// Largest accepted relative mismatch of the injectivity identity.
pub const ORACLE_TOLERANCE: f64 = 1e-4;
/// Windows wider than `λ_min / WINDOW_RESOLUTION` are rejected.
pub const WINDOW_RESOLUTION: f64 = 50.0;
/// Default potential step relative to the energy scale.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Energy step of the Wigner-Smith derivative relative to the energy scale.
pub const ENERGY_STEP: f64 = 1e-6;
/// Largest accepted relative anti-Hermitian part of the Wigner-Smith matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

const NON_REAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DosError {
    #[error("window width {width} exceeds the resolution limit {limit}")]
    WindowTooWide { width: f64, limit: f64 },
    #[error("finite-difference step {step:e} is below {min:e}")]
    StepUnderflow { step: f64, min: f64 },
    #[error("injectivity identity defect {defect:e} exceeds {ORACLE_TOLERANCE:e}")]
    OracleDefectExceeded { defect: f64 },
    #[error("imaginary residue {residue:e} on a real density")]
    NonRealResult { residue: f64 },
    #[error("energy {energy} is within two finite-difference steps of the band edge {edge}")]
    BandEdgeTooClose { energy: f64, edge: f64 },
    #[error("Wigner-Smith anti-Hermitian residue {defect:e} exceeds {SYMMETRY_TOLERANCE:e}")]
    SymmetryDefect { defect: f64 },
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Energy scale used to size finite-difference steps.
pub fn energy_scale(profile: &PotentialProfile, e: f64) -> f64 {
    e.abs().max(e - profile.v_left().min(profile.v_right()))
}

/// Shortest local wavelength over the domain and both leads.
pub fn min_wavelength(profile: &PotentialProfile, e: f64) -> f64 {
    let k_max = profile
        .segments()
        .iter()
        .map(|s| (Complex64::new(e, 0.0) - s.value()).norm().sqrt())
        .chain([profile.v_left(), profile.v_right()].map(|v| (e - v).abs().sqrt()))
        .fold(0.0, f64::max);
    2.0 * std::f64::consts::PI / k_max
}

/// Window-averaged functional derivative `δS_αβ/δV` with its oracle check.
///
/// `s` and `d` are symmetrized (there is no vector potential), which makes
/// reciprocity relations such as `ν(2,w,1) = ν(1,w,2)` hold exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDerivative {
    pub s: SMatrix,
    pub d: Matrix2<Complex64>,
    pub window: Window,
    pub fd_step: f64,
    /// Largest relative mismatch of the injectivity identity over `β`.
    pub defect: f64,
}

impl SDerivative {
    fn pair(&self, out: Contact, inc: Contact) -> (Complex64, Complex64) {
        (self.s.get(out, inc), self.d[(out.index(), inc.index())])
    }

    /// `ν(α,w,β,γ) = −(1/4πi)(S*_αβ d_αγ − d*_αβ S_αγ)`.
    pub fn offdiagonal(&self, alpha: Contact, beta: Contact, gamma: Contact) -> Complex64 {
        let (s_b, d_b) = self.pair(alpha, beta);
        let (s_g, d_g) = self.pair(alpha, gamma);
        -(s_b.conj() * d_g - d_b.conj() * s_g) / Complex64::new(0.0, 4.0 * std::f64::consts::PI)
    }

    /// Partial density of states `ν(α,w,β)`.
    pub fn pdos(&self, alpha: Contact, beta: Contact) -> Result<f64, DosError> {
        let z = self.offdiagonal(alpha, beta, beta);
        if z.im.abs() > NON_REAL_TOLERANCE * z.re.abs().max(1.0) {
            return Err(DosError::NonRealResult { residue: z.im });
        }
        Ok(z.re)
    }

    /// Sensitivity `η(α,w,β) = (1/4π) d|S_αβ|²/dV`.
    pub fn eta(&self, alpha: Contact, beta: Contact) -> f64 {
        let (s, d) = self.pair(alpha, beta);
        (s.conj() * d).re / (2.0 * std::f64::consts::PI)
    }

    pub fn injectivity(&self, beta: Contact) -> f64 {
        Contact::ALL.iter().map(|&a| self.offdiagonal(a, beta, beta).re).sum()
    }

    pub fn emissivity(&self, alpha: Contact) -> f64 {
        Contact::ALL.iter().map(|&b| self.offdiagonal(alpha, b, b).re).sum()
    }
}

fn check_contained(profile: &PotentialProfile, window: &Window) -> Result<(), DosError> {
    if !profile.contains_window(window) {
        let (domain_lo, domain_hi) = profile.domain();
        return Err(ProfileError::WindowOutOfDomain {
            lo: window.y_lo,
            hi: window.y_hi,
            domain_lo,
            domain_hi,
        }
        .into());
    }
    Ok(())
}

fn check_window(profile: &PotentialProfile, e: f64, window: &Window) -> Result<(), DosError> {
    check_contained(profile, window)?;
    let limit = min_wavelength(profile, e) / WINDOW_RESOLUTION;
    if window.width() > limit * (1.0 + 1e-12) {
        return Err(DosError::WindowTooWide {
            width: window.width(),
            limit,
        });
    }
    Ok(())
}

/// Central difference of S under a window shift, normalized per unit energy
/// and length.
fn central_difference(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    step: f64,
) -> Result<Matrix2<Complex64>, DosError> {
    let delta = Complex64::new(step, 0.0);
    let plus = scatter1d::smatrix(&profile.perturb(window, delta)?, e)?;
    let minus = scatter1d::smatrix(&profile.perturb(window, -delta)?, e)?;
    Ok((plus.0 - minus.0) / Complex64::new(2.0 * step * window.width(), 0.0))
}

/// Injectivity-identity defect of a derivative against a wavefunction solve.
fn oracle_defect(deriv: &SDerivative, sol: &ScatteringSolution) -> Result<f64, DosError> {
    let mut worst: f64 = 0.0;
    for beta in Contact::ALL {
        let lhs = deriv.injectivity(beta);
        let rhs = sol.window_density(beta, &deriv.window)?;
        worst = worst.max(rel_diff(lhs, rhs, f64::MIN_POSITIVE));
    }
    Ok(worst)
}

fn derivative_at_step(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    step: f64,
    s: SMatrix,
    sol: &ScatteringSolution,
) -> Result<SDerivative, DosError> {
    let coarse = central_difference(profile, e, window, step)?;
    let fine = central_difference(profile, e, window, 0.5 * step)?;
    let mut deriv = SDerivative {
        s: s.symmetrized(),
        d: symmetrize(&coarse.zip_map(&fine, richardson)),
        window: *window,
        fd_step: step,
        defect: 0.0,
    };
    deriv.defect = oracle_defect(&deriv, sol)?;
    Ok(deriv)
}

/// Derivative with an explicit step and no step adaptation.
pub fn s_derivative_with_step(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    step: f64,
) -> Result<SDerivative, DosError> {
    let min = 1e3 * f64::EPSILON * energy_scale(profile, e);
    if !(step >= min) {
        return Err(DosError::StepUnderflow { step, min });
    }
    check_window(profile, e, window)?;
    let sol = scatter1d::solve(profile, e, &GridSpec::default())?;
    let deriv = derivative_at_step(profile, e, window, step, sol.smatrix, &sol)?;
    if deriv.defect > ORACLE_TOLERANCE {
        return Err(DosError::OracleDefectExceeded {
            defect: deriv.defect,
        });
    }
    Ok(deriv)
}

fn adaptive(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    sol: &ScatteringSolution,
) -> Result<SDerivative, DosError> {
    let base = DEFAULT_STEP * energy_scale(profile, e);
    let mut best: Option<SDerivative> = None;
    for factor in [1.0, 0.1, 10.0] {
        let deriv = derivative_at_step(profile, e, window, base * factor, sol.smatrix, sol)?;
        if deriv.defect <= ORACLE_TOLERANCE {
            return Ok(deriv);
        }
        if best.is_none_or(|b| deriv.defect < b.defect) {
            best = Some(deriv);
        }
    }
    Err(DosError::OracleDefectExceeded {
        defect: best.map_or(f64::INFINITY, |b| b.defect),
    })
}

/// Functional derivative on `window`, step chosen from `1e-5·E` and
/// validated by the injectivity identity.
pub fn s_derivative(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
) -> Result<SDerivative, DosError> {
    check_window(profile, e, window)?;
    let sol = scatter1d::solve(profile, e, &GridSpec::default())?;
    adaptive(profile, e, window, &sol)
}

/// Response to a uniform shift on an extended window (a field region, say)
/// with no resolution limit: the window mean of a linear response is exact
/// at any width, and so is the injectivity identity it is checked against.
pub fn window_derivative(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
) -> Result<SDerivative, DosError> {
    check_contained(profile, window)?;
    let sol = scatter1d::solve(profile, e, &GridSpec::default())?;
    adaptive(profile, e, window, &sol)
}

pub fn pdos(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    alpha: Contact,
    beta: Contact,
) -> Result<f64, DosError> {
    s_derivative(profile, e, window)?.pdos(alpha, beta)
}

pub fn sensitivity(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    alpha: Contact,
    beta: Contact,
) -> Result<f64, DosError> {
    Ok(s_derivative(profile, e, window)?.eta(alpha, beta))
}

pub fn pdos_offdiagonal(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    alpha: Contact,
    beta: Contact,
    gamma: Contact,
) -> Result<Complex64, DosError> {
    Ok(s_derivative(profile, e, window)?.offdiagonal(alpha, beta, gamma))
}

/// Both sides of `Σ_α ν(α,w,β,γ) = (v_β v_γ)^{-1/2} ⟨ψ*_β ψ_γ⟩_w / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffdiagonalSumRule {
    pub from_derivative: Complex64,
    pub from_wavefunctions: Complex64,
    /// Mismatch relative to `(ν(w,β) ν(w,γ))^{1/2}`.
    pub defect: f64,
}

pub fn offdiagonal_sum_rule(
    profile: &PotentialProfile,
    e: f64,
    window: &Window,
    beta: Contact,
    gamma: Contact,
) -> Result<OffdiagonalSumRule, DosError> {
    check_window(profile, e, window)?;
    let sol = scatter1d::solve(profile, e, &GridSpec::default())?;
    let deriv = adaptive(profile, e, window, &sol)?;
    let lhs: Complex64 = Contact::ALL
        .iter()
        .map(|&a| deriv.offdiagonal(a, beta, gamma))
        .sum();
    let ch = sol.channels;
    let rhs = sol.window_overlap(beta, gamma, window)? / (H * (ch.v(beta) * ch.v(gamma)).sqrt());
    let scale = (deriv.injectivity(beta) * deriv.injectivity(gamma))
        .abs()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    Ok(OffdiagonalSumRule {
        from_derivative: lhs,
        from_wavefunctions: rhs,
        defect: (lhs - rhs).norm() / scale,
    })
}

/// Density-of-states hierarchy on a set of windows. Indices are
/// `[α][β]` with `Contact::index()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DosHierarchy {
    pub energy: f64,
    pub windows: Vec<Window>,
    pub pdos: Vec<[[f64; 2]; 2]>,
    pub eta: Vec<[[f64; 2]; 2]>,
    pub inj: Vec<[f64; 2]>,
    pub emis: Vec<[f64; 2]>,
    pub ldos: Vec<f64>,
    /// Per-window injectivity-identity defect (worst `β`).
    pub defect: Vec<f64>,
    pub smatrix: SMatrix,
}

impl DosHierarchy {
    /// `∫ ν(y) dy` over the windows.
    pub fn integrated_ldos(&self) -> f64 {
        self.windows
            .iter()
            .zip(&self.ldos)
            .map(|(w, n)| w.width() * n)
            .sum()
    }

    pub fn max_defect(&self) -> f64 {
        self.defect.iter().copied().fold(0.0, f64::max)
    }

    /// Uniform windows of the largest count that satisfies the resolution
    /// limit, covering `[lo, hi]`.
    pub fn resolved_tiling(
        profile: &PotentialProfile,
        e: f64,
        lo: f64,
        hi: f64,
    ) -> Result<Vec<Window>, ProfileError> {
        let limit = min_wavelength(profile, e) / WINDOW_RESOLUTION;
        let count = ((hi - lo) / limit).ceil().max(1.0) as usize;
        Window::tiling(lo, hi, count)
    }
}

pub fn hierarchy(
    profile: &PotentialProfile,
    e: f64,
    windows: &[Window],
) -> Result<DosHierarchy, DosError> {
    for w in windows {
        check_window(profile, e, w)?;
    }
    let sol = scatter1d::solve(profile, e, &GridSpec::default())?;
    let derivs: Vec<SDerivative> = windows
        .par_iter()
        .map(|w| adaptive(profile, e, w, &sol))
        .collect::<Result<_, _>>()?;
    let mut h = DosHierarchy {
        energy: e,
        windows: windows.to_vec(),
        pdos: Vec::with_capacity(windows.len()),
        eta: Vec::with_capacity(windows.len()),
        inj: Vec::with_capacity(windows.len()),
        emis: Vec::with_capacity(windows.len()),
        ldos: Vec::with_capacity(windows.len()),
        defect: Vec::with_capacity(windows.len()),
        smatrix: sol.smatrix.symmetrized(),
    };
    for d in &derivs {
        let mut p = [[0.0; 2]; 2];
        let mut eta = [[0.0; 2]; 2];
        for a in Contact::ALL {
            for b in Contact::ALL {
                p[a.index()][b.index()] = d.pdos(a, b)?;
                eta[a.index()][b.index()] = d.eta(a, b);
            }
        }
        let inj = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
        let emis = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
        h.pdos.push(p);
        h.eta.push(eta);
        h.inj.push(inj);
        h.emis.push(emis);
        h.ldos.push(inj[0] + inj[1]);
        h.defect.push(d.defect);
    }
    Ok(h)
}

/// Wigner-Smith matrix `D = (1/2πi) S† dS/dE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSmithMatrix {
    pub d: Matrix2<Complex64>,
    /// `‖D − D†‖_F / ‖D‖_F` before the Hermitian part was taken.
    pub hermiticity_defect: f64,
}

impl WignerSmithMatrix {
    pub fn get(&self, beta: Contact, gamma: Contact) -> Complex64 {
        self.d[(beta.index(), gamma.index())]
    }

    pub fn trace(&self) -> Complex64 {
        self.d[(0, 0)] + self.d[(1, 1)]
    }
}

/// For real profiles the matrix is checked and projected to its Hermitian
/// part; for absorbing profiles it is returned as computed.
pub fn wigner_smith(profile: &PotentialProfile, e: f64) -> Result<WignerSmithMatrix, DosError> {
    let h = ENERGY_STEP * energy_scale(profile, e);
    let edge = profile.v_left().max(profile.v_right());
    if e - 2.0 * h <= edge {
        return Err(DosError::BandEdgeTooClose { energy: e, edge });
    }
    let diff = |step: f64| -> Result<Matrix2<Complex64>, DosError> {
        let plus = scatter1d::smatrix(profile, e + step)?;
        let minus = scatter1d::smatrix(profile, e - step)?;
        Ok((plus.0 - minus.0) / Complex64::new(2.0 * step, 0.0))
    };
    let ds = diff(h)?.zip_map(&diff(0.5 * h)?, richardson);
    let s = scatter1d::smatrix(profile, e)?;
    let d = s.0.adjoint() * ds / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let defect = (d - d.adjoint()).norm() / d.norm().max(f64::MIN_POSITIVE);
    if !profile.is_real() {
        return Ok(WignerSmithMatrix {
            d,
            hermiticity_defect: defect,
        });
    }
    if defect > SYMMETRY_TOLERANCE {
        return Err(DosError::SymmetryDefect { defect });
    }
    Ok(WignerSmithMatrix {
        d: (d + d.adjoint()) * Complex64::new(0.5, 0.0),
        hermiticity_defect: defect,
    })
}

/// Semiclassical traversal time `∫ m/|p| dy` over the classically
/// forbidden part of the domain.
pub fn traversal_time(profile: &PotentialProfile, e: f64) -> f64 {
    profile
        .segments()
        .iter()
        .filter(|s| s.value().re > e)
        .map(|s| s.width() / (2.0 * (s.value().re - e).sqrt()))
        .sum()
}

/// WKB action `∫ κ dy` (in units of ħ) over the classically forbidden part.
pub fn tunneling_action(profile: &PotentialProfile, e: f64) -> f64 {
    profile
        .segments()
        .iter()
        .filter(|s| s.value().re > e)
        .map(|s| s.width() * (s.value().re - e).sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Segment;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const L: Contact = Contact::Left;
    const R: Contact = Contact::Right;

    fn narrow(y: f64) -> Window {
        Window::centered(y, 0.01).unwrap()
    }

    fn double_barrier() -> PotentialProfile {
        PotentialProfile::new([(0.0, 0.5, 3.0), (0.5, 2.5, 0.0), (2.5, 3.0, 3.0)], 0.0, 0.0)
            .unwrap()
    }

    #[test]
    fn free_transmitted_density() {
        let p = PotentialProfile::flat(0.0, 2.0, 0.0).unwrap();
        let d = s_derivative(&p, 1.0, &narrow(0.7)).unwrap();
        // phase response δS₂₁/δV = −i S₂₁/(ħv)
        let expected = -Complex64::i() * d.s.get(R, L) / 2.0;
        assert!((d.d[(1, 0)] - expected).norm() < 1e-8);
        assert!((d.pdos(R, L).unwrap() * 4.0 * PI - 1.0).abs() < 1e-7);
        assert!(d.pdos(L, L).unwrap().abs() < 1e-12);
        // Born reflection off a bump of width w: |δS₁₁/δV| = sinc(kw)/(ħv)
        let kw: f64 = 0.01;
        assert!((d.d[(0, 0)].norm() - 0.5 * kw.sin() / kw).abs() < 1e-8);
        assert!(d.eta(R, L).abs() < 1e-8);
    }

    #[test]
    fn zero_step_underflows() {
        let p = PotentialProfile::flat(0.0, 2.0, 0.0).unwrap();
        assert!(matches!(
            s_derivative_with_step(&p, 1.0, &narrow(0.7), 0.0),
            Err(DosError::StepUnderflow { .. })
        ));
    }

    #[test]
    fn wide_window_rejected() {
        let p = PotentialProfile::flat(0.0, 2.0, 0.0).unwrap();
        let w = Window::new(0.0, 1.0).unwrap();
        assert!(matches!(s_derivative(&p, 1.0, &w), Err(DosError::WindowTooWide { .. })));
    }

    #[test]
    fn free_hierarchy() {
        let p = PotentialProfile::flat(0.0, 1.0, 0.0).unwrap();
        let ws = DosHierarchy::resolved_tiling(&p, 1.0, 0.0, 1.0).unwrap();
        let h = hierarchy(&p, 1.0, &ws).unwrap();
        for n in &h.ldos {
            assert!((n - 1.0 / (2.0 * PI)).abs() < 1e-10);
        }
        assert!(h.max_defect() < 1e-8);
    }

    #[test]
    fn barrier_sensitivity_signs() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let d = s_derivative(&p, 0.5, &narrow(1.0)).unwrap();
        assert!(d.eta(R, L) < 0.0);
        assert!((d.eta(R, L) + d.eta(L, L)).abs() < 1e-8);
    }

    #[test]
    fn barrier_injectivity_matches_wavefunction() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let ws = DosHierarchy::resolved_tiling(&p, 0.5, 0.0, 2.0).unwrap();
        let h = hierarchy(&p, 0.5, &ws).unwrap();
        assert!(h.max_defect() < 1e-4);
        // reciprocity holds exactly on the symmetrized derivative
        assert_eq!(h.inj, h.emis);
    }

    #[test]
    fn double_barrier_has_negative_reflection_pdos() {
        let p = double_barrier();
        // off the symmetry point of the well
        let w = narrow(1.0);
        let found = (1..200).any(|i| {
            let e = 0.01 * i as f64;
            s_derivative(&p, e, &w).map(|d| d.pdos(L, L).unwrap() < 0.0).unwrap_or(false)
        });
        assert!(found);
    }

    #[test]
    fn probability_derivative_consistency() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let w = narrow(0.8);
        let e = 0.5;
        let d = s_derivative(&p, e, &w).unwrap();
        let t0 = d.s.transmission();
        let dv: f64 = 1e-3;
        let mut errs = Vec::new();
        for scale in [1.0, 0.5] {
            let pert = p.perturb(&w, Complex64::new(dv * scale, 0.0)).unwrap();
            let t1 = scatter1d::smatrix(&pert, e).unwrap().transmission();
            let linear = 4.0 * PI * d.eta(R, L) * dv * scale * w.width();
            errs.push((t1 - t0 - linear).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn offdiagonal_reduces_and_is_hermitian() {
        let p = double_barrier();
        let d = s_derivative(&p, 1.3, &narrow(1.1)).unwrap();
        for a in Contact::ALL {
            for b in Contact::ALL {
                assert!((d.offdiagonal(a, b, b).re - d.pdos(a, b).unwrap()).abs() < 1e-15);
                assert!(
                    (d.offdiagonal(a, b, b.other()) - d.offdiagonal(a, b.other(), b).conj()).norm()
                        < 1e-15
                );
            }
        }
        let rule = offdiagonal_sum_rule(&p, 1.3, &narrow(1.1), L, R).unwrap();
        assert!(rule.defect < 1e-4, "{rule:?}");
    }

    #[test]
    fn free_wigner_smith() {
        let len = 3.0;
        let p = PotentialProfile::flat(0.0, len, 0.0).unwrap();
        let ws = wigner_smith(&p, 1.0).unwrap();
        let expected = len / (2.0 * PI * 2.0);
        assert!((ws.get(L, L).re - expected).abs() < 1e-8);
        assert!((ws.get(R, R).re - expected).abs() < 1e-8);
        assert!(ws.get(L, R).norm() < 1e-8);
        assert!(ws.hermiticity_defect < 1e-6);
    }

    #[test]
    fn wigner_smith_band_edge() {
        let p = PotentialProfile::new([(0.0, 1.0, 0.0)], 0.0, 0.5).unwrap();
        assert!(matches!(
            wigner_smith(&p, 0.5 + 1e-8),
            Err(DosError::BandEdgeTooClose { .. })
        ));
    }

    #[test]
    fn wigner_smith_trace_matches_integrated_ldos() {
        let p = double_barrier();
        let e = 1.3;
        let ws = wigner_smith(&p, e).unwrap();
        let (lo, hi) = p.domain();
        let tiles = DosHierarchy::resolved_tiling(&p, e, lo, hi).unwrap();
        let h = hierarchy(&p, e, &tiles).unwrap();
        let tr = ws.trace();
        assert!(tr.im.abs() < 1e-10);
        // delay and dwell differ by the reflection interference term
        let edge = -(h.smatrix.get(L, L).im + h.smatrix.get(R, R).im) / (4.0 * PI * e);
        assert!(
            (tr.re - h.integrated_ldos() - edge).abs() < 1e-6 * tr.re.abs(),
            "{} vs {} + {}",
            tr.re,
            h.integrated_ldos(),
            edge
        );
    }

    fn arb_profile() -> impl Strategy<Value = (PotentialProfile, f64, f64)> {
        (0.5f64..2.0, prop::collection::vec((0.1f64..0.8, 0.0f64..0.9), 1..=4), 0.05f64..0.95)
            .prop_map(|(e, specs, frac)| {
                let mut y = 0.0;
                let segs: Vec<Segment> = specs
                    .into_iter()
                    .map(|(w, f)| {
                        let s = Segment::new(y, y + w, Complex64::new(f * e, 0.0));
                        y += w;
                        s
                    })
                    .collect();
                (PotentialProfile::new(segs, 0.0, 0.0).unwrap(), e, frac * y)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sum_rules_on_random_profiles((p, e, y) in arb_profile()) {
            let (lo, hi) = p.domain();
            let w = Window::centered(y.clamp(lo + 0.005, hi - 0.005), 0.01).unwrap();
            let d = s_derivative(&p, e, &w).unwrap();
            prop_assert!(d.defect < 1e-4);
            prop_assert!((d.eta(R, L) + d.eta(L, L)).abs() < 1e-8);
            for b in Contact::ALL {
                prop_assert!(d.injectivity(b) >= -1e-8);
                prop_assert!((d.injectivity(b) - d.emissivity(b)).abs() < 1e-8);
            }
            let rule = offdiagonal_sum_rule(&p, e, &w, L, R).unwrap();
            prop_assert!(rule.defect < 1e-4);
        }
    }
}
