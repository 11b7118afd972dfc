//! Small numerical helpers shared by the physics modules.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Planck constant in units with ħ = 1.
pub const H: f64 = 2.0 * PI;

/// One level of Richardson extrapolation for a second-order central
/// difference evaluated at steps `h` and `h/2`.
pub fn richardson<T>(coarse: T, fine: T) -> T
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
}

/// Least-squares slope of `ln(residual)` against `ln(x)`.
///
/// Returns `None` when fewer than two usable points remain (non-positive
/// residuals are skipped).
pub fn fit_order(xs: &[f64], residuals: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(residuals)
        .filter(|(x, r)| **x > 0.0 && **r > 0.0 && r.is_finite())
        .map(|(x, r)| (x.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

const GL_ORDER: usize = 16;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_ORDER))
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

/// Integrates `f` over `[a, b]` with `pieces` equal Gauss-Legendre panels.
pub fn integrate<T, F>(f: F, a: f64, b: f64, pieces: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(f64) -> T,
{
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut acc = T::default();
    for p in 0..pieces {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(x, w) in gauss_legendre() {
            acc = acc + f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let sum_w: f64 = gauss_legendre().iter().map(|p| p.1).sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
        // exact for degree 31
        let v: f64 = integrate(|x: f64| x.powi(30), -1.0, 1.0, 1);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_oscillation() {
        let v: f64 = integrate(|x: f64| x.cos(), 0.0, 10.0, 8);
        assert!((v - 10f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let d = |h: f64| 3.0 + 2.0 * h * h;
        assert!((richardson(d(0.1), d(0.05)) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn order_fit_recovers_power() {
        let xs = [1e-3, 5e-4, 2.5e-4];
        let rs: Vec<f64> = xs.iter().map(|x| 7.0 * x * x).collect();
        assert!((fit_order(&xs, &rs).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_order(&xs, &[0.0, 0.0, 0.0]), None);
    }
}
