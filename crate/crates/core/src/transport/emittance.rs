//! Low-frequency emittance with local screening.

use super::{LocalDos, TransportError, LDOS_FLOOR};
use crate::potential::{PotentialProfile, Window};

/// Emittance matrix `E_αβ` (units of `e²` × density of states) with,
/// for the saddle model, the capacitances behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittanceReport {
    pub e_matrix: [[f64; 2]; 2],
    /// Total effective capacitance; `None` under local screening.
    pub c_mu: Option<f64>,
    pub c_geom: Option<f64>,
    pub d_total: f64,
    pub channels: Vec<ChannelEmittance>,
    /// Largest absolute row or column sum of `e_matrix`.
    pub zero_sum_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEmittance {
    pub transmission: f64,
    pub dos: f64,
    pub c_mu: f64,
    pub emittance: f64,
}

pub(crate) fn zero_sum_defect(m: &[[f64; 2]; 2]) -> f64 {
    let rows = [m[0][0] + m[0][1], m[1][0] + m[1][1]];
    let cols = [m[0][0] + m[1][0], m[0][1] + m[1][1]];
    rows.iter().chain(&cols).map(|x| x.abs()).fold(0.0, f64::max)
}

/// `E_αβ = Σ_w w [ν(α,w,β) − ν(α,w) ν(w,β)/ν(w)]`.
pub fn emittance_local_screening(
    profile: &PotentialProfile,
    e: f64,
    windows: &[Window],
) -> Result<EmittanceReport, TransportError> {
    let mut m = [[0.0; 2]; 2];
    let mut d_total = 0.0;
    let mut scale: f64 = 0.0;
    for (index, w) in windows.iter().enumerate() {
        let local = LocalDos::on_window(profile, e, w)?;
        if local.ldos <= LDOS_FLOOR {
            return Err(TransportError::ZeroLdosWindow {
                index,
                ldos: local.ldos,
            });
        }
        let width = w.width();
        for a in 0..2 {
            for b in 0..2 {
                let term = width * (local.pdos[a][b] - local.emis[a] * local.inj[b] / local.ldos);
                m[a][b] += term;
                scale = scale.max(term.abs());
            }
        }
        d_total += width * local.ldos;
    }
    let defect = zero_sum_defect(&m);
    if defect > 1e-10 * scale.max(1.0) {
        return Err(TransportError::EmittanceSumViolated { defect });
    }
    Ok(EmittanceReport {
        e_matrix: m,
        c_mu: None,
        c_geom: None,
        d_total,
        channels: Vec::new(),
        zero_sum_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dos::DosHierarchy;
    use crate::numerics::H;

    fn tiled(p: &PotentialProfile, e: f64) -> Vec<Window> {
        let (lo, hi) = p.domain();
        DosHierarchy::resolved_tiling(p, e, lo, hi).unwrap()
    }

    #[test]
    fn free_particle_is_inductive() {
        let len = 1.0;
        let p = PotentialProfile::flat(0.0, len, 0.0).unwrap();
        let r = emittance_local_screening(&p, 1.0, &tiled(&p, 1.0)).unwrap();
        let expected = -len / (2.0 * H * 2.0);
        assert!((r.e_matrix[0][0] - expected).abs() < 1e-8 * expected.abs());
        assert!((r.e_matrix[0][1] + expected).abs() < 1e-8 * expected.abs());
        assert!(r.zero_sum_defect < 1e-10);
    }

    #[test]
    fn tunneling_is_capacitive() {
        let p = PotentialProfile::new([(0.0, 1.0, 0.0), (1.0, 3.0, 2.0), (3.0, 4.0, 0.0)], 0.0, 0.0)
            .unwrap();
        let r = emittance_local_screening(&p, 0.6, &tiled(&p, 0.6)).unwrap();
        assert!(r.e_matrix[0][0] > 0.0, "{:?}", r.e_matrix);
    }
}
