//! Semiclassical saddle-point (quantum point contact) model: region PDOS
//! and the emittance of a contact with a geometric capacitance.

use super::emittance::{ChannelEmittance, EmittanceReport};
use super::TransportError;

/// Region-integrated PDOS of a left-right symmetric contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalPdos {
    /// `d[α][k][β] = D_{αkβ}` with region `k` left (0) or right (1).
    pub d: [[[f64; 2]; 2]; 2],
    pub t: f64,
    pub r: f64,
    pub d_region: [f64; 2],
}

impl SemiclassicalPdos {
    /// `D^i[k][β] = Σ_α D_{αkβ}`.
    pub fn injectivity(&self) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for k in 0..2 {
            for b in 0..2 {
                out[k][b] = self.d[0][k][b] + self.d[1][k][b];
            }
        }
        out
    }

    /// `D^e[α][k] = Σ_β D_{αkβ}`.
    pub fn emissivity(&self) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for a in 0..2 {
            for k in 0..2 {
                out[a][k] = self.d[a][k][0] + self.d[a][k][1];
            }
        }
        out
    }
}

fn check_transmission(t: f64) -> Result<(), TransportError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(TransportError::TransmissionOutOfRange { t })
    }
}

/// `D_{αkβ} = D_k (T/2 + δ_αβ (R δ_αk − T/2))` with `D_1 = D_2 = D/2`.
pub fn saddle_pdos(t: f64, d_total: f64) -> Result<SemiclassicalPdos, TransportError> {
    check_transmission(t)?;
    if !(d_total > 0.0 && d_total.is_finite()) {
        return Err(TransportError::InvalidParameter(format!("D = {d_total}")));
    }
    let r = 1.0 - t;
    let dk = 0.5 * d_total;
    let mut d = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for k in 0..2 {
            for b in 0..2 {
                let diag = if a == b {
                    (if a == k { r } else { 0.0 }) - 0.5 * t
                } else {
                    0.0
                };
                d[a][k][b] = dk * (0.5 * t + diag);
            }
        }
    }
    Ok(SemiclassicalPdos {
        d,
        t,
        r,
        d_region: [dk, dk],
    })
}

/// Per-channel `E_n = R_n C_μ,n − D_n T_n²/4`, summed over channels, with
/// `C_μ,n = R_n (C⁻¹ + (D_n/4)⁻¹)⁻¹`. An infinite `c_geom` is the
/// non-interacting limit.
pub fn saddle_emittance(
    t_channels: &[f64],
    d_per_channel: &[f64],
    c_geom: f64,
) -> Result<EmittanceReport, TransportError> {
    if t_channels.len() != d_per_channel.len() {
        return Err(TransportError::InvalidParameter(format!(
            "{} transmissions for {} densities",
            t_channels.len(),
            d_per_channel.len()
        )));
    }
    if !(c_geom > 0.0) {
        return Err(TransportError::InvalidParameter(format!("C = {c_geom}")));
    }
    let mut channels = Vec::with_capacity(t_channels.len());
    for (&t, &d) in t_channels.iter().zip(d_per_channel) {
        check_transmission(t)?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(TransportError::InvalidParameter(format!("D_n = {d}")));
        }
        let r = 1.0 - t;
        let quantum = 0.25 * d;
        let series = if c_geom.is_infinite() {
            quantum
        } else {
            c_geom * quantum / (c_geom + quantum)
        };
        let c_mu = r * series;
        channels.push(ChannelEmittance {
            transmission: t,
            dos: d,
            c_mu,
            emittance: r * c_mu - d * t * t / 4.0,
        });
    }
    let e: f64 = channels.iter().map(|c| c.emittance).sum();
    Ok(EmittanceReport {
        e_matrix: [[e, -e], [-e, e]],
        c_mu: Some(channels.iter().map(|c| c.c_mu).sum()),
        c_geom: Some(c_geom),
        d_total: d_per_channel.iter().sum(),
        channels,
        zero_sum_defect: 0.0,
    })
}

/// Smooth-step saddle with a density of states that peaks at each
/// channel opening.
///
/// For channel `n` with `ε_n = E − offset_n − U₀`:
/// `T_n = 1/(1 + exp(−ε_n/s))` and
/// `D_n = dos_scale · asinh(√(E_Ω / √(ε_n² + s²)))`,
/// the region density of a 1D subband of band width `E_Ω` with its
/// `ε^{-1/2}` edge singularity smoothed on the scale `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleModel {
    pub energy: f64,
    pub offsets: Vec<f64>,
    pub smoothness: f64,
    pub region_energy: f64,
    pub dos_scale: f64,
    pub c_geom: f64,
}

impl Default for SaddleModel {
    fn default() -> Self {
        SaddleModel {
            energy: 0.0,
            offsets: vec![0.0, 1.0, 2.0],
            smoothness: 0.01,
            region_energy: 0.1,
            dos_scale: 1.0,
            c_geom: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePoint {
    pub u0: f64,
    /// `Σ_n T_n` (conductance in units of `e²/h` per spin).
    pub conductance: f64,
    pub report: EmittanceReport,
}

impl SaddlePoint {
    pub fn emittance(&self) -> f64 {
        self.report.e_matrix[0][0]
    }
}

impl SaddleModel {
    pub fn validate(&self) -> Result<(), TransportError> {
        let ok = self.smoothness > 0.0
            && self.region_energy > 0.0
            && self.dos_scale > 0.0
            && self.c_geom > 0.0
            && !self.offsets.is_empty();
        if ok {
            Ok(())
        } else {
            Err(TransportError::InvalidParameter(format!("{self:?}")))
        }
    }

    /// `(T_n, D_n)` at saddle height `u0`.
    pub fn channel(&self, n: usize, u0: f64) -> (f64, f64) {
        let eps = self.energy - self.offsets[n] - u0;
        let s = self.smoothness;
        let t = 1.0 / (1.0 + (-eps / s).exp());
        let d = self.dos_scale * (self.region_energy / eps.hypot(s)).sqrt().asinh();
        (t, d)
    }

    /// Saddle height at which channel `n` is half open.
    pub fn opening(&self, n: usize) -> f64 {
        self.energy - self.offsets[n]
    }

    pub fn point(&self, u0: f64) -> Result<SaddlePoint, TransportError> {
        self.validate()?;
        let (ts, ds): (Vec<f64>, Vec<f64>) =
            (0..self.offsets.len()).map(|n| self.channel(n, u0)).unzip();
        Ok(SaddlePoint {
            u0,
            conductance: ts.iter().sum(),
            report: saddle_emittance(&ts, &ds, self.c_geom)?,
        })
    }

    pub fn sweep(&self, u0s: &[f64]) -> Result<SaddleSweep, TransportError> {
        Ok(SaddleSweep {
            points: u0s.iter().map(|&u| self.point(u)).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSweep {
    pub points: Vec<SaddlePoint>,
}

impl SaddleSweep {
    /// Saddle heights where the emittance changes sign, by linear
    /// interpolation between sweep points.
    pub fn zero_crossings(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .filter_map(|pair| {
                let (a, b) = (pair[0].emittance(), pair[1].emittance());
                if a == 0.0 {
                    Some(pair[0].u0)
                } else if a * b < 0.0 {
                    Some(pair[0].u0 + (pair[1].u0 - pair[0].u0) * a / (a - b))
                } else {
                    None
                }
            })
            .collect()
    }
}
