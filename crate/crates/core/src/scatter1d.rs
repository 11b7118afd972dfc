//! Stationary scattering on a piecewise-constant potential.
//!
//! Within a segment of constant `V` the Schrödinger equation `-ψ'' + Vψ = Eψ`
//! is solved exactly, so the only errors are rounding errors. The scattering
//! states are built by shooting from the transmitted side (backwards for
//! incidence from the left, forwards for incidence from the right), which
//! always propagates the solution in its growing direction.
//!
//! Plane waves are referenced to the domain edges: for incidence from the
//! left `ψ₁ = e^{ik₁(y-y_L)} + S₁₁ e^{-ik₁(y-y_L)}` for `y < y_L` and
//! `ψ₁ = (v₁/v₂)^{1/2} S₂₁ e^{ik₂(y-y_R)}` for `y > y_R`; incidence from the
//! right is the mirror image (incoming `e^{-ik₂(y-y_R)}`, transmitted
//! `e^{-ik₁(y-y_L)}`).

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{integrate, H};
use crate::potential::{PotentialProfile, ProfileError, Window};

/// Transfer-matrix condition estimate above which a solve is refused.
pub const MAX_CONDITION: f64 = 1e14;

/// Minimum resolution of the wavefunction grid.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 20.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("channel {contact:?} is not propagating at E = {energy} (lead level {level})")]
    EvanescentChannel {
        contact: Contact,
        energy: f64,
        level: f64,
    },
    #[error("grid resolution {points_per_wavelength} points per wavelength is below the minimum of 20")]
    ResolutionTooCoarse { points_per_wavelength: f64 },
    #[error("transfer-matrix condition estimate {condition:e} exceeds {MAX_CONDITION:e}")]
    NumericalInstability { condition: f64 },
    #[error("position {y} lies outside the solution grid [{lo}, {hi}]")]
    OutOfGrid { y: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Contact (lead) label. `Left` is contact 1, `Right` is contact 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Contact {
    Left,
    Right,
}

impl Contact {
    pub const ALL: [Contact; 2] = [Contact::Left, Contact::Right];

    pub fn index(self) -> usize {
        match self {
            Contact::Left => 0,
            Contact::Right => 1,
        }
    }

    /// Contact number as used in transport notation (1 or 2).
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn other(self) -> Contact {
        match self {
            Contact::Left => Contact::Right,
            Contact::Right => Contact::Left,
        }
    }
}

/// Asymptotic wavevectors and velocities at energy `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channels {
    pub e: f64,
    pub k1: f64,
    pub k2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Channels {
    pub fn new(profile: &PotentialProfile, e: f64) -> Result<Self, ScatterError> {
        let k = |level: f64, contact| {
            if e > level {
                Ok((e - level).sqrt())
            } else {
                Err(ScatterError::EvanescentChannel {
                    contact,
                    energy: e,
                    level,
                })
            }
        };
        let k1 = k(profile.v_left(), Contact::Left)?;
        let k2 = k(profile.v_right(), Contact::Right)?;
        Ok(Channels {
            e,
            k1,
            k2,
            v1: 2.0 * k1,
            v2: 2.0 * k2,
        })
    }

    pub fn k(&self, c: Contact) -> f64 {
        match c {
            Contact::Left => self.k1,
            Contact::Right => self.k2,
        }
    }

    pub fn v(&self, c: Contact) -> f64 {
        match c {
            Contact::Left => self.v1,
            Contact::Right => self.v2,
        }
    }
}

/// 2×2 scattering matrix, entry `(α, β)` = amplitude from `β` into `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix(pub Matrix2<Complex64>);

impl SMatrix {
    pub fn get(&self, out: Contact, inc: Contact) -> Complex64 {
        self.0[(out.index(), inc.index())]
    }

    pub fn probability(&self, out: Contact, inc: Contact) -> f64 {
        self.get(out, inc).norm_sqr()
    }

    pub fn transmission(&self) -> f64 {
        self.probability(Contact::Right, Contact::Left)
    }

    pub fn reflection(&self) -> f64 {
        self.probability(Contact::Left, Contact::Left)
    }

    /// `max |(S†S − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.0.adjoint() * self.0 - Matrix2::identity();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `|S₁₂ − S₂₁|`.
    pub fn symmetry_defect(&self) -> f64 {
        (self.0[(0, 1)] - self.0[(1, 0)]).norm()
    }

    /// Off-diagonal entries replaced by their mean. Without a vector
    /// potential `S` is symmetric, so this only removes rounding asymmetry.
    pub fn symmetrized(&self) -> SMatrix {
        SMatrix(symmetrize(&self.0))
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> [f64; 2] {
        let g = self.0.adjoint() * self.0;
        let tr = (g[(0, 0)].re + g[(1, 1)].re) * 0.5;
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        let disc = (tr * tr - det).max(0.0).sqrt();
        [(tr + disc).max(0.0).sqrt(), (tr - disc).max(0.0).sqrt()]
    }
}

pub(crate) fn symmetrize(m: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let off = (m[(0, 1)] + m[(1, 0)]) * 0.5;
    Matrix2::new(m[(0, 0)], off, off, m[(1, 1)])
}

/// Evaluation grid for wavefunction dumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_wavelength: f64,
    /// Extra lead length included on each side of the domain.
    pub padding: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_wavelength: 40.0,
            padding: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    start: f64,
    end: f64,
    q2: Complex64,
    q: Complex64,
}

impl Layer {
    fn width(&self) -> f64 {
        self.end - self.start
    }
}

/// `(cos(q l), sin(q l)/q)` as entire functions of `q²`.
fn cos_sinc(q2: Complex64, q: Complex64, l: f64) -> (Complex64, Complex64) {
    let z2 = q2 * (l * l);
    if z2.norm() < 1e-6 {
        let c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
        let s = (1.0 - z2 / 6.0 + z2 * z2 / 120.0) * l;
        (c, s)
    } else {
        let z = q * l;
        (z.cos(), z.sin() / q)
    }
}

/// Advances `(ψ, ψ')` by `l` (negative `l` propagates backwards).
fn propagate(state: [Complex64; 2], q2: Complex64, q: Complex64, l: f64) -> [Complex64; 2] {
    let (c, s) = cos_sinc(q2, q, l);
    [c * state[0] + s * state[1], -q2 * s * state[0] + c * state[1]]
}

fn layers(profile: &PotentialProfile, e: f64) -> Vec<Layer> {
    profile
        .segments()
        .iter()
        .map(|seg| {
            let q2 = Complex64::new(e, 0.0) - seg.value();
            Layer {
                start: seg.start,
                end: seg.end,
                q2,
                q: q2.sqrt(),
            }
        })
        .collect()
}

/// Condition estimate `σ_max/σ_min` of the full transfer matrix in the
/// dimensionless basis `(ψ, ψ'/k₁)`, accumulated in scaled form.
fn condition_estimate(layers: &[Layer], k_ref: f64) -> f64 {
    let mut m = Matrix2::<Complex64>::identity();
    let mut log_scale = 0.0;
    for layer in layers {
        if layer.q.im.abs() * layer.width() > 700.0 {
            return f64::INFINITY;
        }
        let (c, s) = cos_sinc(layer.q2, layer.q, layer.width());
        let step = Matrix2::new(c, s * k_ref, -layer.q2 * s / k_ref, c);
        m = step * m;
        let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(norm.is_finite() && norm > 0.0) {
            return f64::INFINITY;
        }
        m /= Complex64::new(norm, 0.0);
        log_scale += norm.ln();
    }
    let f: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let d = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    if d == 0.0 || log_scale > 350.0 {
        return f64::INFINITY;
    }
    (f + (f * f - 4.0 * d * d).max(0.0).sqrt()) / (2.0 * d)
}

/// Boundary states of the normalized scattering states, one entry per
/// segment boundary.
#[derive(Debug, Clone)]
struct BoundaryStates {
    layers: Vec<Layer>,
    states: [Vec<[Complex64; 2]>; 2],
}

/// Shoots both scattering states. Returns the S-matrix and the normalized
/// boundary states.
fn shoot(layers: Vec<Layer>, ch: &Channels) -> Result<(SMatrix, BoundaryStates), ScatterError> {
    let n = layers.len();
    let (k1, k2) = (ch.k1, ch.k2);

    let run = |forward: bool| -> Result<(Vec<[Complex64; 2]>, Vec<f64>), ScatterError> {
        let mut states = vec![[Complex64::new(0.0, 0.0); 2]; n + 1];
        let mut scales = vec![0.0; n + 1];
        let mut log_scale = 0.0;
        let mut state;
        if forward {
            state = [Complex64::new(1.0, 0.0), -I * k1];
            states[0] = state;
            for j in 0..n {
                let l = &layers[j];
                state = propagate(state, l.q2, l.q, l.width());
                let norm = state[0].norm().max(state[1].norm() / k1);
                if !norm.is_finite() {
                    return Err(ScatterError::NumericalInstability {
                        condition: f64::INFINITY,
                    });
                }
                if norm > 1e100 {
                    state = [state[0] / norm, state[1] / norm];
                    log_scale += norm.ln();
                }
                states[j + 1] = state;
                scales[j + 1] = log_scale;
            }
        } else {
            state = [Complex64::new(1.0, 0.0), I * k2];
            states[n] = state;
            for j in (0..n).rev() {
                let l = &layers[j];
                state = propagate(state, l.q2, l.q, -l.width());
                let norm = state[0].norm().max(state[1].norm() / k1);
                if !norm.is_finite() {
                    return Err(ScatterError::NumericalInstability {
                        condition: f64::INFINITY,
                    });
                }
                if norm > 1e100 {
                    state = [state[0] / norm, state[1] / norm];
                    log_scale += norm.ln();
                }
                states[j] = state;
                scales[j] = log_scale;
            }
        }
        Ok((states, scales))
    };

    // Incidence from the left: transmitted wave e^{ik₂(y-y_R)} at the right edge.
    let (mut s1, sc1) = run(false)?;
    let left = s1[0];
    let a = (left[0] + left[1] / (I * k1)) * 0.5;
    let b = (left[0] - left[1] / (I * k1)) * 0.5;
    for (st, sc) in s1.iter_mut().zip(&sc1) {
        let f = (sc - sc1[0]).exp();
        *st = [st[0] / a * f, st[1] / a * f];
    }
    let s11 = b / a;
    let s21 = s1[n][0] * (k2 / k1).sqrt();

    // Incidence from the right: transmitted wave e^{-ik₁(y-y_L)} at the left edge.
    let (mut s2, sc2) = run(true)?;
    let right = s2[n];
    let c_in = (right[0] - right[1] / (I * k2)) * 0.5;
    let d_out = (right[0] + right[1] / (I * k2)) * 0.5;
    for (st, sc) in s2.iter_mut().zip(&sc2) {
        let f = (sc - sc2[n]).exp();
        *st = [st[0] / c_in * f, st[1] / c_in * f];
    }
    let s22 = d_out / c_in;
    let s12 = s2[0][0] * (k1 / k2).sqrt();

    let s = SMatrix(Matrix2::new(s11, s12, s21, s22));
    if s.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(ScatterError::NumericalInstability {
            condition: f64::INFINITY,
        });
    }
    Ok((
        s,
        BoundaryStates {
            layers,
            states: [s1, s2],
        },
    ))
}

fn prepare(profile: &PotentialProfile, e: f64) -> Result<(Channels, Vec<Layer>), ScatterError> {
    let ch = Channels::new(profile, e)?;
    let layers = layers(profile, e);
    let condition = condition_estimate(&layers, ch.k1);
    if !(condition <= MAX_CONDITION) {
        return Err(ScatterError::NumericalInstability { condition });
    }
    Ok((ch, layers))
}

/// S-matrix only (no wavefunctions).
pub fn smatrix(profile: &PotentialProfile, e: f64) -> Result<SMatrix, ScatterError> {
    let (ch, layers) = prepare(profile, e)?;
    shoot(layers, &ch).map(|(s, _)| s)
}

/// Scattering solution at energy `e`: S-matrix, both scattering states and
/// their values on a grid.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub smatrix: SMatrix,
    pub channels: Channels,
    pub grid: Vec<f64>,
    /// `psi[β]` holds the state incident from contact `β` on `grid`.
    pub psi: [Vec<Complex64>; 2],
    pub unitarity_defect: f64,
    states: BoundaryStates,
}

pub fn solve(
    profile: &PotentialProfile,
    e: f64,
    grid_spec: &GridSpec,
) -> Result<ScatteringSolution, ScatterError> {
    if !(grid_spec.points_per_wavelength >= MIN_POINTS_PER_WAVELENGTH) {
        return Err(ScatterError::ResolutionTooCoarse {
            points_per_wavelength: grid_spec.points_per_wavelength,
        });
    }
    let (ch, layers) = prepare(profile, e)?;
    let k_max = layers
        .iter()
        .map(|l| l.q.norm())
        .fold(ch.k1.max(ch.k2), f64::max);
    let spacing = 2.0 * std::f64::consts::PI / k_max / grid_spec.points_per_wavelength;
    let grid = build_grid(&profile.boundaries(), grid_spec.padding.max(0.0), spacing);
    let (smatrix, states) = shoot(layers, &ch)?;
    let mut sol = ScatteringSolution {
        smatrix,
        channels: ch,
        grid,
        psi: [Vec::new(), Vec::new()],
        unitarity_defect: smatrix.unitarity_defect(),
        states,
    };
    for c in Contact::ALL {
        sol.psi[c.index()] = sol.grid.iter().map(|&y| sol.psi_at(c, y).0).collect();
    }
    Ok(sol)
}

fn build_grid(boundaries: &[f64], padding: f64, spacing: f64) -> Vec<f64> {
    let mut knots = Vec::with_capacity(boundaries.len() + 2);
    if padding > 0.0 {
        knots.push(boundaries[0] - padding);
    }
    knots.extend_from_slice(boundaries);
    if padding > 0.0 {
        knots.push(boundaries[boundaries.len() - 1] + padding);
    }
    let mut grid = vec![knots[0]];
    for pair in knots.windows(2) {
        let n = ((pair[1] - pair[0]) / spacing).ceil().max(1.0) as usize;
        let h = (pair[1] - pair[0]) / n as f64;
        for i in 1..n {
            grid.push(pair[0] + h * i as f64);
        }
        grid.push(pair[1]);
    }
    grid
}

impl ScatteringSolution {
    pub fn domain(&self) -> (f64, f64) {
        let l = &self.states.layers;
        (l[0].start, l[l.len() - 1].end)
    }

    /// `(ψ_β(y), ψ_β'(y))`, evaluated exactly at any `y`.
    pub fn psi_at(&self, beta: Contact, y: f64) -> (Complex64, Complex64) {
        let layers = &self.states.layers;
        let (y_l, y_r) = self.domain();
        let (k1, k2) = (self.channels.k1, self.channels.k2);
        let s = &self.smatrix;
        if y < y_l {
            let t = y - y_l;
            let fwd = (I * k1 * t).exp();
            let bwd = (-I * k1 * t).exp();
            return match beta {
                Contact::Left => {
                    let r = s.get(Contact::Left, Contact::Left);
                    (fwd + r * bwd, I * k1 * (fwd - r * bwd))
                }
                Contact::Right => {
                    let amp = s.get(Contact::Left, Contact::Right) * (k2 / k1).sqrt();
                    (amp * bwd, -I * k1 * amp * bwd)
                }
            };
        }
        if y > y_r {
            let t = y - y_r;
            let fwd = (I * k2 * t).exp();
            let bwd = (-I * k2 * t).exp();
            return match beta {
                Contact::Left => {
                    let amp = s.get(Contact::Right, Contact::Left) * (k1 / k2).sqrt();
                    (amp * fwd, I * k2 * amp * fwd)
                }
                Contact::Right => {
                    let r = s.get(Contact::Right, Contact::Right);
                    (bwd + r * fwd, I * k2 * (r * fwd - bwd))
                }
            };
        }
        let j = layers.partition_point(|l| l.end <= y).min(layers.len() - 1);
        let layer = &layers[j];
        let states = &self.states.states[beta.index()];
        let (left, right) = (states[j], states[j + 1]);
        // Start from whichever boundary amplifies rounding least.
        let scale = layer.q.norm().max(k1);
        let growth = layer.q.im.abs();
        let cost = |st: [Complex64; 2], dist: f64| {
            (st[0].norm() + st[1].norm() / scale) * (growth * dist).exp()
        };
        let st = if cost(left, y - layer.start) <= cost(right, layer.end - y) {
            propagate(left, layer.q2, layer.q, y - layer.start)
        } else {
            propagate(right, layer.q2, layer.q, y - layer.end)
        };
        (st[0], st[1])
    }

    /// Probability current `2 Im(ψ* ψ')` of state `beta` at `y`.
    pub fn current(&self, beta: Contact, y: f64) -> f64 {
        let (p, dp) = self.psi_at(beta, y);
        2.0 * (p.conj() * dp).im
    }

    fn check_in_grid(&self, lo: f64, hi: f64) -> Result<(), ScatterError> {
        let (g0, g1) = (self.grid[0], self.grid[self.grid.len() - 1]);
        for y in [lo, hi] {
            if !(y >= g0 && y <= g1) {
                return Err(ScatterError::OutOfGrid { y, lo: g0, hi: g1 });
            }
        }
        Ok(())
    }

    /// Window mean of `ψ_β*(y) ψ_γ(y)` by composite Gauss-Legendre
    /// quadrature over the segment pieces of the window.
    pub fn window_overlap(
        &self,
        beta: Contact,
        gamma: Contact,
        window: &Window,
    ) -> Result<Complex64, ScatterError> {
        self.check_in_grid(window.y_lo, window.y_hi)?;
        let mut cuts = vec![window.y_lo];
        for l in &self.states.layers {
            if l.start > window.y_lo && l.start < window.y_hi {
                cuts.push(l.start);
            }
        }
        let (_, y_r) = self.domain();
        if y_r > window.y_lo && y_r < window.y_hi {
            cuts.push(y_r);
        }
        cuts.push(window.y_hi);
        let mut total = Complex64::new(0.0, 0.0);
        for pair in cuts.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let q = self.local_wavevector(mid);
            let len = pair[1] - pair[0];
            let pieces = (len * (q.re.abs() + q.im.abs()) / 2.0).ceil() as usize + 1;
            total += integrate(
                |y| self.psi_at(beta, y).0.conj() * self.psi_at(gamma, y).0,
                pair[0],
                pair[1],
                pieces,
            );
        }
        Ok(total / window.width())
    }

    fn local_wavevector(&self, y: f64) -> Complex64 {
        let (y_l, y_r) = self.domain();
        if y < y_l {
            return Complex64::new(self.channels.k1, 0.0);
        }
        if y > y_r {
            return Complex64::new(self.channels.k2, 0.0);
        }
        let layers = &self.states.layers;
        layers[layers.partition_point(|l| l.end <= y).min(layers.len() - 1)].q
    }

    /// Window mean of `|ψ_β|²/(h v_β)`, the wavefunction side of the
    /// injectivity identity.
    pub fn window_density(&self, beta: Contact, window: &Window) -> Result<f64, ScatterError> {
        let m = self.window_overlap(beta, beta, window)?;
        Ok(m.re / (H * self.channels.v(beta)))
    }
}

/// `|ψ_β(y)|² / (h v_β)` at a point of the grid range.
pub fn density(sol: &ScatteringSolution, beta: Contact, y: f64) -> Result<f64, ScatterError> {
    sol.check_in_grid(y, y)?;
    Ok(sol.psi_at(beta, y).0.norm_sqr() / (H * sol.channels.v(beta)))
}

/// S-matrices for the two spin species with a Zeeman shift on `window`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorSolution {
    /// Spin up: potential lowered by ħω_L/2 on the window.
    pub s_plus: SMatrix,
    /// Spin down: potential raised by ħω_L/2 on the window.
    pub s_minus: SMatrix,
    pub omega_l: f64,
}

pub fn solve_spinor(
    profile: &PotentialProfile,
    window: &Window,
    omega_l: f64,
    e: f64,
) -> Result<SpinorSolution, ScatterError> {
    let shift = Complex64::new(0.5 * omega_l, 0.0);
    let up = profile.perturb(window, -shift)?;
    let down = profile.perturb(window, shift)?;
    Ok(SpinorSolution {
        s_plus: smatrix(&up, e)?,
        s_minus: smatrix(&down, e)?,
        omega_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Segment;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Closed-form rectangular-barrier transmission.
    fn barrier_transmission(v0: f64, d: f64, e: f64) -> f64 {
        if e < v0 {
            let kappa = (v0 - e).sqrt();
            1.0 / (1.0 + v0 * v0 * (kappa * d).sinh().powi(2) / (4.0 * e * (v0 - e)))
        } else if e > v0 {
            let q = (e - v0).sqrt();
            1.0 / (1.0 + v0 * v0 * (q * d).sin().powi(2) / (4.0 * e * (e - v0)))
        } else {
            1.0 / (1.0 + v0 * d * d / 4.0)
        }
    }

    #[test]
    fn free_propagation_phase() {
        let p = PotentialProfile::flat(0.0, PI, 0.0).unwrap();
        let s = smatrix(&p, 1.0).unwrap();
        assert!((s.get(Contact::Right, Contact::Left) - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(s.get(Contact::Left, Contact::Left).norm() < 1e-14);
    }

    #[test]
    fn barrier_matches_closed_form() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let t = smatrix(&p, 0.5).unwrap().transmission();
        let exact = barrier_transmission(1.0, 2.0, 0.5);
        assert!((t - exact).abs() / exact < 1e-13, "{t} vs {exact}");
        // at the barrier top the segment solution degenerates to a line
        let t_top = smatrix(&p, 1.0).unwrap().transmission();
        assert!((t_top - barrier_transmission(1.0, 2.0, 1.0)).abs() < 1e-12);
    }

    fn double_barrier() -> PotentialProfile {
        PotentialProfile::new([(0.0, 0.5, 3.0), (0.5, 2.5, 0.0), (2.5, 3.0, 3.0)], 0.0, 0.0)
            .unwrap()
    }

    /// Golden-section maximizer on a bracket.
    fn maximize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let x1 = b - g * (b - a);
            let x2 = a + g * (b - a);
            if f(x1) > f(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn symmetric_double_barrier_resonance_is_unit() {
        let p = double_barrier();
        let t = |e: f64| smatrix(&p, e).unwrap().transmission();
        let grid: Vec<f64> = (1..400).map(|i| 0.005 * i as f64).collect();
        let (i_best, _) = grid
            .iter()
            .enumerate()
            .map(|(i, &e)| (i, t(e)))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let e_res = maximize(t, grid[i_best - 1], grid[i_best + 1]);
        assert!((t(e_res) - 1.0).abs() < 1e-9, "peak {}", t(e_res));
    }

    #[test]
    fn evanescent_channel_rejected() {
        let p = PotentialProfile::new([(0.0, 1.0, 0.0)], 0.0, 0.5).unwrap();
        assert!(matches!(
            smatrix(&p, 0.3),
            Err(ScatterError::EvanescentChannel { contact: Contact::Right, .. })
        ));
        // exactly at the band edge
        assert!(smatrix(&p, 0.5).is_err());
    }

    #[test]
    fn deep_tunneling_is_refused() {
        let p = PotentialProfile::barrier(0.0, 40.0, 1.0).unwrap();
        assert!(matches!(
            smatrix(&p, 0.5),
            Err(ScatterError::NumericalInstability { .. })
        ));
    }

    #[test]
    fn coarse_grid_rejected() {
        let p = PotentialProfile::barrier(0.0, 1.0, 1.0).unwrap();
        let spec = GridSpec {
            points_per_wavelength: 10.0,
            padding: 0.0,
        };
        assert!(matches!(
            solve(&p, 0.5, &spec),
            Err(ScatterError::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn grid_contains_boundaries() {
        let p = double_barrier();
        let sol = solve(&p, 1.0, &GridSpec { points_per_wavelength: 25.0, padding: 1.0 }).unwrap();
        for b in p.boundaries() {
            assert!(sol.grid.contains(&b));
        }
        assert_eq!(sol.grid[0], -1.0);
        assert_eq!(sol.psi[0].len(), sol.grid.len());
        let h_max = sol.grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let k_max = 2f64.sqrt();
        assert!(h_max <= 2.0 * PI / k_max / 25.0 + 1e-12);
    }

    #[test]
    fn free_density_is_one_over_hv() {
        let p = PotentialProfile::flat(0.0, 5.0, 0.0).unwrap();
        let sol = solve(&p, 1.0, &GridSpec::default()).unwrap();
        for &y in &[0.0, 1.3, 4.9] {
            for b in Contact::ALL {
                let d = density(&sol, b, y).unwrap();
                assert!((d - 1.0 / (4.0 * PI)).abs() < 1e-14);
            }
        }
        assert!(matches!(density(&sol, Contact::Left, 7.0), Err(ScatterError::OutOfGrid { .. })));
    }

    #[test]
    fn evanescent_decay_inside_barrier() {
        let p = PotentialProfile::barrier(0.0, 6.0, 4.0).unwrap();
        let sol = solve(&p, 0.25, &GridSpec::default()).unwrap();
        let kappa = 3.75f64.sqrt();
        let d1 = density(&sol, Contact::Left, 1.0).unwrap();
        let d2 = density(&sol, Contact::Left, 2.0).unwrap();
        assert!(((d1 / d2).ln() - 2.0 * kappa).abs() < 1e-3);
    }

    #[test]
    fn resonant_pile_up_in_well() {
        let p = PotentialProfile::new([(0.0, 1.0, 5.0), (1.0, 3.0, 0.0), (3.0, 4.0, 5.0)], 0.0, 0.0)
            .unwrap();
        let t = |e: f64| smatrix(&p, e).unwrap().transmission();
        let grid: Vec<f64> = (1..400).map(|i| 0.005 * i as f64).collect();
        let i_best = (0..grid.len()).max_by(|&a, &b| t(grid[a]).total_cmp(&t(grid[b]))).unwrap();
        let e_res = maximize(t, grid[i_best - 1], grid[i_best + 1]);
        let on = solve(&p, e_res, &GridSpec::default()).unwrap();
        let off = solve(&p, 0.6 * e_res, &GridSpec::default()).unwrap();
        let free = 1.0 / (H * on.channels.v1);
        let d_on = density(&on, Contact::Left, 2.0).unwrap();
        let d_off = density(&off, Contact::Left, 2.0).unwrap();
        assert!(d_on > 10.0 * free, "{d_on} vs {free}");
        assert!(d_on > 10.0 * d_off);
    }

    #[test]
    fn spinor_without_field_matches_scalar() {
        let p = PotentialProfile::barrier(0.0, 2.0, 1.0).unwrap();
        let w = Window::new(0.5, 1.0).unwrap();
        let sp = solve_spinor(&p, &w, 0.0, 0.5).unwrap();
        let s = smatrix(&p, 0.5).unwrap();
        assert!((sp.s_plus.0 - s.0).norm() < 1e-14);
        assert!((sp.s_minus.0 - s.0).norm() < 1e-14);
    }

    #[test]
    fn spinor_free_phase_shift() {
        let p = PotentialProfile::flat(0.0, 2.0, 0.0).unwrap();
        let w = Window::new(0.5, 1.0).unwrap();
        let omega = 1e-4;
        let e = 1.0;
        let sp = solve_spinor(&p, &w, omega, e).unwrap();
        let s0 = smatrix(&p, e).unwrap().get(Contact::Right, Contact::Left);
        let v = 2.0;
        let expected = 0.5 * omega * w.width() / v;
        let up = (sp.s_plus.get(Contact::Right, Contact::Left) / s0).arg();
        let down = (sp.s_minus.get(Contact::Right, Contact::Left) / s0).arg();
        // exact to first order in ω
        assert!((up - expected).abs() < 1e-3 * expected);
        assert!((down + expected).abs() < 1e-3 * expected);
    }

    #[test]
    fn spin_up_tunnels_more() {
        let p = PotentialProfile::barrier(0.0, 3.0, 2.0).unwrap();
        let w = Window::new(0.0, 3.0).unwrap();
        let sp = solve_spinor(&p, &w, 1e-2, 0.5).unwrap();
        assert!(
            sp.s_plus.get(Contact::Right, Contact::Left).norm()
                > sp.s_minus.get(Contact::Right, Contact::Left).norm()
        );
    }

    #[test]
    fn asymptotic_fit_matches_smatrix() {
        let p = PotentialProfile::new([(0.0, 1.0, 0.8), (1.0, 2.2, -0.3), (2.2, 3.0, 0.4)], 0.1, -0.2)
            .unwrap();
        let sol = solve(&p, 0.9, &GridSpec { points_per_wavelength: 30.0, padding: 2.0 }).unwrap();
        let (k1, k2) = (sol.channels.k1, sol.channels.k2);
        let (y_l, y_r) = sol.domain();
        // two-point fit of A e^{ik t} + B e^{-ik t}
        let fit = |f: &dyn Fn(f64) -> Complex64, k: f64, t1: f64, t2: f64| {
            let (e1p, e1m) = ((I * k * t1).exp(), (-I * k * t1).exp());
            let (e2p, e2m) = ((I * k * t2).exp(), (-I * k * t2).exp());
            let det = e1p * e2m - e1m * e2p;
            let (f1, f2) = (f(t1), f(t2));
            ((f1 * e2m - e1m * f2) / det, (e1p * f2 - f1 * e2p) / det)
        };
        let s = sol.smatrix;
        let (a, b) = fit(&|t| sol.psi_at(Contact::Left, y_l + t).0, k1, -1.3, -0.4);
        assert!((a - 1.0).norm() < 1e-8);
        assert!((b - s.get(Contact::Left, Contact::Left)).norm() < 1e-8);
        let (a, b) = fit(&|t| sol.psi_at(Contact::Left, y_r + t).0, k2, 0.4, 1.3);
        assert!((a - s.get(Contact::Right, Contact::Left) * (k1 / k2).sqrt()).norm() < 1e-8);
        assert!(b.norm() < 1e-8);
        let (a, b) = fit(&|t| sol.psi_at(Contact::Right, y_r + t).0, k2, 0.4, 1.3);
        assert!((b - 1.0).norm() < 1e-8);
        assert!((a - s.get(Contact::Right, Contact::Right)).norm() < 1e-8);
        let (a, b) = fit(&|t| sol.psi_at(Contact::Right, y_l + t).0, k1, -1.3, -0.4);
        assert!(a.norm() < 1e-8);
        assert!((b - s.get(Contact::Left, Contact::Right) * (k2 / k1).sqrt()).norm() < 1e-8);
    }

    #[test]
    fn current_is_conserved_and_matches_smatrix() {
        let p = PotentialProfile::new([(0.0, 1.0, 0.8), (1.0, 2.2, -0.3), (2.2, 3.0, 0.4)], 0.1, -0.2)
            .unwrap();
        let sol = solve(&p, 0.9, &GridSpec { points_per_wavelength: 30.0, padding: 1.0 }).unwrap();
        let v1 = sol.channels.v1;
        let expected = v1 * (1.0 - sol.smatrix.reflection());
        assert!((expected - v1 * sol.smatrix.transmission()).abs() < 1e-12);
        for &y in &sol.grid {
            assert!((sol.current(Contact::Left, y) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn window_density_by_quadrature_matches_pointwise_mean() {
        let p = double_barrier();
        let sol = solve(&p, 1.1, &GridSpec::default()).unwrap();
        let w = Window::new(0.3, 1.0).unwrap();
        let n = 20000;
        let h = w.width() / n as f64;
        let trap: f64 = (0..=n)
            .map(|i| {
                let y = w.y_lo + h * i as f64;
                let f = density(&sol, Contact::Left, y).unwrap();
                if i == 0 || i == n { 0.5 * f } else { f }
            })
            .sum::<f64>()
            * h
            / w.width();
        let gl = sol.window_density(Contact::Left, &w).unwrap();
        assert!((trap - gl).abs() / gl < 1e-8);
    }

    #[test]
    fn absorber_is_subunitary() {
        let p = PotentialProfile::new([(0.0, 1.0, c(0.5, -0.2)), (1.0, 2.0, c(0.0, 0.0))], 0.0, 0.0)
            .unwrap();
        let s = smatrix(&p, 0.7).unwrap();
        let sv = s.singular_values();
        assert!(sv[0] <= 1.0 + 1e-12);
        assert!(1.0 - s.reflection() - s.transmission() > 0.0);
    }

    fn arb_real_profile() -> impl Strategy<Value = (PotentialProfile, f64)> {
        (0.5f64..3.0, prop::collection::vec((0.05f64..1.5, 0.0f64..0.9), 1..=8)).prop_map(
            |(e, specs)| {
                let mut y = 0.0;
                let segs: Vec<Segment> = specs
                    .into_iter()
                    .map(|(w, f)| {
                        let s = Segment::new(y, y + w, c(f * e, 0.0));
                        y += w;
                        s
                    })
                    .collect();
                (PotentialProfile::new(segs, 0.0, 0.0).unwrap(), e)
            },
        )
    }

    fn arb_absorbing_profile() -> impl Strategy<Value = (PotentialProfile, f64)> {
        (0.5f64..3.0, prop::collection::vec((0.05f64..1.5, -1.0f64..1.5, 0.0f64..0.5), 1..=8))
            .prop_map(|(e, specs)| {
                let mut y = 0.0;
                let segs: Vec<Segment> = specs
                    .into_iter()
                    .map(|(w, re, im)| {
                        let s = Segment::new(y, y + w, c(re, -im));
                        y += w;
                        s
                    })
                    .collect();
                (PotentialProfile::new(segs, 0.0, 0.0).unwrap(), e)
            })
    }

    proptest! {
        #[test]
        fn unitary_symmetric_current_conserving((p, e) in arb_real_profile()) {
            let s = smatrix(&p, e).unwrap();
            prop_assert!(s.unitarity_defect() < 1e-10);
            prop_assert!(s.symmetry_defect() < 1e-10);
            prop_assert!((s.reflection() + s.transmission() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn absorption_never_creates_flux((p, e) in arb_absorbing_profile()) {
            let s = smatrix(&p, e).unwrap();
            for inc in Contact::ALL {
                let out: f64 = Contact::ALL.iter().map(|&a| s.probability(a, inc)).sum();
                prop_assert!(1.0 - out >= -1e-12);
            }
            prop_assert!(s.singular_values()[0] <= 1.0 + 1e-12);
        }
    }
}
