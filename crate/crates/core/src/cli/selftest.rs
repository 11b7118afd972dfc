//! Invariant suites on randomly generated profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clock;
use crate::dos::{self, min_wavelength};
use crate::potential::{PotentialProfile, Window};
use crate::scatter1d::{self, Contact};
use crate::transport::{self, TipCoupling};

/// Real profile of 1 to `max_segments` contiguous segments starting at 0
/// with zero leads, and an energy above the leads.
pub fn random_profile(rng: &mut impl Rng, max_segments: usize) -> (PotentialProfile, f64) {
    let n = rng.gen_range(1..=max_segments);
    let mut y = 0.0;
    let mut segs = Vec::with_capacity(n);
    for _ in 0..n {
        let w: f64 = rng.gen_range(0.2..1.2);
        segs.push((y, y + w, rng.gen_range(-0.5..2.0)));
        y += w;
    }
    let profile = PotentialProfile::new(segs, 0.0, 0.0).expect("contiguous segments");
    (profile, rng.gen_range(0.3..2.5))
}

/// Closed-form transmission through a rectangular barrier of height `v0`
/// and width `d` (ħ = 1, m = 1/2).
pub fn barrier_transmission(v0: f64, d: f64, e: f64) -> f64 {
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

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub first_failure: Option<String>,
}

type Case = Box<dyn Fn() -> Result<(), String> + Send + Sync>;

fn run_suite(name: &'static str, cases: Vec<Case>) -> SuiteResult {
    let outcomes: Vec<Result<(), String>> = cases.par_iter().map(|c| c()).collect();
    SuiteResult {
        name,
        passed: outcomes.iter().filter(|o| o.is_ok()).count(),
        total: outcomes.len(),
        first_failure: outcomes.into_iter().find_map(Result::err),
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_window(rng: &mut impl Rng, p: &PotentialProfile, e: f64, fraction: f64) -> Window {
    let (lo, hi) = p.domain();
    let w = (fraction * min_wavelength(p, e)).min(0.25 * (hi - lo));
    let y = rng.gen_range(lo + w..hi - w);
    Window::centered(y, w).expect("positive width")
}

pub fn selftest(seed: u64) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = Vec::new();

    let cases: Vec<Case> = (0..100)
        .map(|_| {
            let (p, e) = random_profile(&mut rng, 8);
            Box::new(move || {
                let s = scatter1d::smatrix(&p, e).map_err(|x| x.to_string())?;
                check(s.unitarity_defect() < 1e-10 && s.symmetry_defect() < 1e-10, || {
                    format!("unitarity {:e}, symmetry {:e} at E = {e}", s.unitarity_defect(), s.symmetry_defect())
                })
            }) as Case
        })
        .collect();
    suites.push(run_suite("unitarity", cases));

    let cases: Vec<Case> = (0..25)
        .map(|_| {
            let v0: f64 = rng.gen_range(0.5..2.0);
            let d: f64 = rng.gen_range(0.5..3.0);
            let mut e: f64 = rng.gen_range(0.1..3.0);
            if (e - v0).abs() < 1e-3 {
                e += 2e-3;
            }
            Box::new(move || {
                let p = PotentialProfile::barrier(0.0, d, v0).map_err(|x| x.to_string())?;
                let t = scatter1d::smatrix(&p, e).map_err(|x| x.to_string())?.transmission();
                let exact = barrier_transmission(v0, d, e);
                check((t - exact).abs() < 1e-12 * exact, || format!("T = {t}, closed form {exact}"))
            }) as Case
        })
        .collect();
    suites.push(run_suite("barrier", cases));

    let cases: Vec<Case> = (0..8)
        .map(|_| {
            let (p, e) = random_profile(&mut rng, 4);
            let windows = vec![random_window(&mut rng, &p, e, 0.015), random_window(&mut rng, &p, e, 0.015)];
            Box::new(move || {
                let h = dos::hierarchy(&p, e, &windows).map_err(|x| x.to_string())?;
                for i in 0..windows.len() {
                    let (pd, inj, emis) = (h.pdos[i], h.inj[i], h.emis[i]);
                    let exact = (0..2).all(|b| inj[b] == pd[0][b] + pd[1][b])
                        && (0..2).all(|a| emis[a] == pd[a][0] + pd[a][1])
                        && h.ldos[i] == inj[0] + inj[1];
                    check(exact, || "hierarchy reductions are not exact".into())?;
                    let positive = inj.iter().chain(&emis).chain([&h.ldos[i]]).all(|x| *x >= -1e-8);
                    check(positive, || format!("negative density {inj:?} {emis:?}"))?;
                    check(h.defect[i] < dos::ORACLE_TOLERANCE, || format!("defect {:e}", h.defect[i]))?;
                }
                Ok(())
            }) as Case
        })
        .collect();
    suites.push(run_suite("dos-hierarchy", cases));

    let cases: Vec<Case> = (0..8)
        .map(|_| {
            let (p, e) = random_profile(&mut rng, 4);
            let w = random_window(&mut rng, &p, e, 0.2);
            Box::new(move || {
                for (a, b) in [(Contact::Right, Contact::Left), (Contact::Left, Contact::Left)] {
                    match clock::times_perturbative(&p, &w, e, a, b) {
                        Ok(t) => {
                            let lhs = t.tau_x * t.tau_x;
                            let rhs = t.tau_y * t.tau_y + t.tau_z * t.tau_z;
                            check((lhs - rhs).abs() <= 1e-10 * lhs.max(f64::MIN_POSITIVE), || {
                                format!("τ_x² = {lhs:e}, τ_y² + τ_z² = {rhs:e}")
                            })?;
                        }
                        Err(clock::ClockError::ChannelBlocked { .. }) => {}
                        Err(x) => return Err(x.to_string()),
                    }
                }
                Ok(())
            }) as Case
        })
        .collect();
    suites.push(run_suite("larmor-clock", cases));

    let cases: Vec<Case> = (0..8)
        .map(|_| {
            let (p, e) = random_profile(&mut rng, 4);
            let (lo, hi) = p.domain();
            let x = rng.gen_range(lo + 0.1 * (hi - lo)..hi - 0.1 * (hi - lo));
            Box::new(move || {
                let tip = TipCoupling::new(x, 1e-7, 1.0);
                let b = transport::bardeen_transmissions(&p, e, &tip).map_err(|x| x.to_string())?;
                let scale = b.into_tip[0].max(b.into_tip[1]).max(f64::MIN_POSITIVE);
                let gap = (0..2).map(|a| (b.into_tip[a] - b.from_tip[a]).abs()).fold(0.0, f64::max);
                check(gap <= 1e-12 * scale, || format!("tip reciprocity gap {gap:e}"))
            }) as Case
        })
        .collect();
    suites.push(run_suite("tip-reciprocity", cases));

    let cases: Vec<Case> = (0..4)
        .map(|_| {
            let (p, e) = random_profile(&mut rng, 3);
            Box::new(move || {
                let (lo, hi) = p.domain();
                let windows = Window::tiling(lo, hi, 24).map_err(|x| x.to_string())?;
                let r = transport::emittance_local_screening(&p, e, &windows).map_err(|x| x.to_string())?;
                check(r.zero_sum_defect.is_finite(), || "non-finite emittance".into())
            }) as Case
        })
        .collect();
    suites.push(run_suite("emittance-sums", cases));

    let cases: Vec<Case> = (0..10)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..=1.0);
            let d: f64 = rng.gen_range(0.1..5.0);
            let c: f64 = rng.gen_range(0.1..10.0);
            Box::new(move || {
                let closed = transport::saddle_emittance(&[0.0], &[d], c).map_err(|x| x.to_string())?;
                let c_mu = 1.0 / (1.0 / c + 4.0 / d);
                check((closed.e_matrix[0][0] - c_mu).abs() < 1e-12, || "closed endpoint".into())?;
                let open = transport::saddle_emittance(&[1.0], &[d], c).map_err(|x| x.to_string())?;
                check((open.e_matrix[0][0] + d / 4.0).abs() < 1e-12, || "open endpoint".into())?;
                let free = transport::saddle_emittance(&[t], &[d], f64::INFINITY).map_err(|x| x.to_string())?;
                let expected = (1.0 - 2.0 * t) * d / 4.0;
                check((free.e_matrix[0][0] - expected).abs() < 1e-10, || "non-interacting limit".into())
            }) as Case
        })
        .collect();
    suites.push(run_suite("saddle-emittance", cases));

    suites
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_seeded() {
        let a = random_profile(&mut ChaCha8Rng::seed_from_u64(3), 8);
        let b = random_profile(&mut ChaCha8Rng::seed_from_u64(3), 8);
        assert_eq!(a, b);
    }

    #[test]
    fn barrier_formula_is_continuous_at_the_top() {
        let (v0, d) = (1.3, 1.7);
        let at = barrier_transmission(v0, d, v0);
        assert!((barrier_transmission(v0, d, v0 - 1e-7) - at).abs() < 1e-6);
        assert!((barrier_transmission(v0, d, v0 + 1e-7) - at).abs() < 1e-6);
    }
}
