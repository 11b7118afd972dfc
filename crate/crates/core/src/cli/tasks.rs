//! Per-task evaluation of a single sweep point.

use std::fmt;

use crate::clock::{self, ClockError};
use crate::dos::{self, min_wavelength, DosError, DosHierarchy};
use crate::numerics::H;
use crate::potential::{PotentialProfile, ProfileError, Window};
use crate::scatter1d::{self, Contact, ScatterError};
use crate::transport::{self, TipCoupling, TransportError};

use super::config::{RunConfig, SweepParam, Task, WindowSpec};

/// A failed sweep point, split by exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Numerical(String),
    Oracle(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Oracle(m) => write!(f, "oracle defect: {m}"),
        }
    }
}

fn dos_is_oracle(e: &DosError) -> bool {
    matches!(e, DosError::OracleDefectExceeded { .. } | DosError::SymmetryDefect { .. })
}

impl From<ProfileError> for Failure {
    fn from(e: ProfileError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<ScatterError> for Failure {
    fn from(e: ScatterError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<DosError> for Failure {
    fn from(e: DosError) -> Self {
        if dos_is_oracle(&e) {
            Failure::Oracle(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<ClockError> for Failure {
    fn from(e: ClockError) -> Self {
        match &e {
            ClockError::NonConvergent { .. } => Failure::Oracle(e.to_string()),
            ClockError::Dos(d) if dos_is_oracle(d) => Failure::Oracle(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<TransportError> for Failure {
    fn from(e: TransportError) -> Self {
        match &e {
            TransportError::EmittanceSumViolated { .. } => Failure::Oracle(e.to_string()),
            TransportError::Dos(d) if dos_is_oracle(d) => Failure::Oracle(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: &'static str,
}

fn col(name: &str, unit: &'static str) -> Column {
    Column {
        name: name.to_string(),
        unit,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub defect: f64,
    pub ok: bool,
}

const DOS: &str = "1/(energy*length)";
const CHANNELS: [(Contact, Contact, &str); 4] = [
    (Contact::Left, Contact::Left, "11"),
    (Contact::Right, Contact::Left, "21"),
    (Contact::Left, Contact::Right, "12"),
    (Contact::Right, Contact::Right, "22"),
];

const CLOCK_QUANTITIES: [(&str, &str); 7] = [
    ("sy_over_omega", "time"),
    ("sz_over_omega", "time"),
    ("tau_y", "time"),
    ("tau_z", "time"),
    ("tau_x", "time"),
    ("order_y", "1"),
    ("order_z", "1"),
];

fn sweep_column(param: SweepParam) -> Column {
    match param {
        SweepParam::Energy => col("E", "energy"),
        SweepParam::U0 => col("U0", "energy"),
        other => col(other.name(), other.unit()),
    }
}

/// The swept parameter first, then the fixed parameters worth tabulating.
fn shown_parameters(cfg: &RunConfig) -> Vec<SweepParam> {
    use SweepParam::*;
    let mut params = vec![cfg.sweep.param];
    let fixed: &[SweepParam] = match cfg.task {
        Task::Saddle => &[],
        Task::Absorb | Task::Dephase => &[Energy, Gamma],
        Task::Bardeen => &[Energy, Y, T2],
        _ => &[Energy],
    };
    params.extend(fixed.iter().filter(|p| **p != cfg.sweep.param));
    params
}

/// Parameter columns followed by the task columns. `defect` and `ok` are
/// appended by the writer.
pub fn columns(cfg: &RunConfig) -> Vec<Column> {
    let mut cols: Vec<Column> = shown_parameters(cfg)
        .into_iter()
        .map(sweep_column)
        .collect();
    match cfg.task {
        Task::Scatter => cols.extend([
            col("T", "1"),
            col("R", "1"),
            col("re_S11", "1"),
            col("im_S11", "1"),
            col("re_S21", "1"),
            col("im_S21", "1"),
            col("re_S22", "1"),
            col("im_S22", "1"),
            col("unitarity_defect", "1"),
        ]),
        Task::Hierarchy => cols.extend([
            col("y_lo", "length"),
            col("y_hi", "length"),
            col("pdos_11", DOS),
            col("pdos_21", DOS),
            col("pdos_12", DOS),
            col("pdos_22", DOS),
            col("inj_1", DOS),
            col("inj_2", DOS),
            col("emis_1", DOS),
            col("emis_2", DOS),
            col("ldos", DOS),
            col("eta_11", DOS),
            col("eta_21", DOS),
            col("eta_12", DOS),
            col("eta_22", DOS),
            col("density_1", "1/length"),
            col("density_2", "1/length"),
        ]),
        Task::Clock => {
            cols.extend([col("y_lo", "length"), col("y_hi", "length")]);
            for (_, _, label) in CHANNELS {
                for (kind, unit) in CLOCK_QUANTITIES {
                    cols.push(col(&format!("{kind}_{label}"), unit));
                }
            }
        }
        Task::Absorb => cols.extend([
            col("absorbed_1", "1"),
            col("absorbed_2", "1"),
            col("absorbed_pred_1", "1"),
            col("absorbed_pred_2", "1"),
            col("emitted_1", "1"),
            col("emitted_2", "1"),
            col("emitted_pred_1", "1"),
            col("emitted_pred_2", "1"),
            col("ldos", DOS),
        ]),
        Task::Bardeen => cols.extend([
            col("T_tip_1", "1"),
            col("T_tip_2", "1"),
            col("T_1_tip", "1"),
            col("T_2_tip", "1"),
            col("P_11", "1"),
            col("P_21", "1"),
            col("P_12", "1"),
            col("P_22", "1"),
            col("validity", "1"),
            col("T", "1"),
            col("G_closed_form", "e^2/h"),
            col("G_three_terminal", "e^2/h"),
            col("G_first_order_assembly", "e^2/h"),
        ]),
        Task::Dephase => cols.extend([
            col("T", "1"),
            col("G_optical", "e^2/h"),
            col("G_optical_first_order", "e^2/h"),
            col("G_probe", "e^2/h"),
            col("G_probe_closed_form", "e^2/h"),
            col("absorbed", "1"),
        ]),
        Task::Emittance => cols.extend([
            col("E_11", "e^2/energy"),
            col("E_12", "e^2/energy"),
            col("E_21", "e^2/energy"),
            col("E_22", "e^2/energy"),
            col("D_total", "1/energy"),
            col("windows", "1"),
        ]),
        Task::Saddle => {
            cols.extend([
                col("T_total", "e^2/h"),
                col("C_mu", "e^2/energy"),
                col("Emittance", "e^2/energy"),
            ]);
            for n in 0..cfg.saddle.offsets.len() {
                for (kind, unit) in [("T", "1"), ("D", "1/energy"), ("E", "e^2/energy")] {
                    cols.push(col(&format!("{kind}_{}", n + 1), unit));
                }
            }
        }
        Task::WignerSmith => cols.extend([
            col("re_D11", "1/energy"),
            col("re_D12", "1/energy"),
            col("im_D12", "1/energy"),
            col("re_D22", "1/energy"),
            col("trace", "1/energy"),
            col("T", "1"),
            col("tau_T", "time"),
            col("action", "hbar"),
            col("D12_semiclassical", "1/energy"),
            col("hermiticity_defect", "1"),
        ]),
    }
    cols
}

/// Values of the swept quantity and everything derived from it at one point.
struct Point {
    profile: PotentialProfile,
    e: f64,
    y: Option<f64>,
    gamma: Option<f64>,
    t2: Option<f64>,
    u0: Option<f64>,
}

fn point(cfg: &RunConfig, value: f64) -> Point {
    let mut p = Point {
        profile: cfg
            .profile
            .clone()
            .unwrap_or_else(|| PotentialProfile::flat(0.0, 1.0, 0.0).unwrap()),
        e: cfg.energy.unwrap_or(f64::NAN),
        y: match cfg.window {
            WindowSpec::Centered { center, .. } if cfg.task != Task::Bardeen => center,
            _ => cfg.tip_x,
        },
        gamma: cfg.gamma,
        t2: cfg.tip_t2,
        u0: cfg.saddle_u0,
    };
    match cfg.sweep.param {
        SweepParam::Energy => p.e = value,
        SweepParam::Height => {
            let factor = value / p.profile.max_real();
            p.profile = p.profile.scaled(factor);
        }
        SweepParam::Y => p.y = Some(value),
        SweepParam::Gamma => p.gamma = Some(value),
        SweepParam::T2 => p.t2 = Some(value),
        SweepParam::U0 => p.u0 = Some(value),
    }
    p
}

fn window(cfg: &RunConfig, p: &Point) -> Result<Window, Failure> {
    Ok(match cfg.window {
        WindowSpec::Edges { lo, hi } => Window::new(lo, hi)?,
        WindowSpec::Centered { width, .. } => {
            let width = width.unwrap_or_else(|| min_wavelength(&p.profile, p.e) / 100.0);
            Window::centered(p.y.expect("window centre resolved by the parser"), width)?
        }
    })
}

/// Relative mismatch of two routes, measured against the size of the
/// correction they both describe.
fn route_defect(a: f64, b: f64, correction: f64) -> f64 {
    let diff = (a - b).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / correction.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn evaluate(cfg: &RunConfig, value: f64) -> Result<Row, Failure> {
    let p = point(cfg, value);
    let mut values: Vec<f64> = shown_parameters(cfg)
        .into_iter()
        .map(|param| match param {
            _ if param == cfg.sweep.param => value,
            SweepParam::Energy => p.e,
            SweepParam::Y => p.y.unwrap_or(f64::NAN),
            SweepParam::Gamma => p.gamma.unwrap_or(f64::NAN),
            SweepParam::T2 => p.t2.unwrap_or(f64::NAN),
            SweepParam::Height | SweepParam::U0 => f64::NAN,
        })
        .collect();
    let tol = cfg.tol;
    let (defect, ok) = match cfg.task {
        Task::Scatter => {
            let s = scatter1d::smatrix(&p.profile, p.e)?;
            let (l, r) = (Contact::Left, Contact::Right);
            let unitarity = if p.profile.is_real() {
                s.unitarity_defect()
            } else {
                (s.singular_values()[0] - 1.0).max(0.0)
            };
            values.extend([
                s.transmission(),
                s.reflection(),
                s.get(l, l).re,
                s.get(l, l).im,
                s.get(r, l).re,
                s.get(r, l).im,
                s.get(r, r).re,
                s.get(r, r).im,
                unitarity,
            ]);
            let defect = unitarity.max(s.symmetry_defect());
            (defect, defect < tol.unitarity)
        }
        Task::Hierarchy => {
            let w = window(cfg, &p)?;
            let h = dos::hierarchy(&p.profile, p.e, &[w])?;
            let sol = scatter1d::solve(&p.profile, p.e, &Default::default())?;
            let pd = h.pdos[0];
            let eta = h.eta[0];
            values.extend([w.y_lo, w.y_hi]);
            values.extend([pd[0][0], pd[1][0], pd[0][1], pd[1][1]]);
            values.extend(h.inj[0]);
            values.extend(h.emis[0]);
            values.push(h.ldos[0]);
            values.extend([eta[0][0], eta[1][0], eta[0][1], eta[1][1]]);
            for b in Contact::ALL {
                values.push(sol.window_density(b, &w)?);
            }
            let defect = h.max_defect();
            (defect, defect <= tol.oracle)
        }
        Task::Clock => {
            let w = window(cfg, &p)?;
            let omegas = cfg.omegas.clone().unwrap_or_else(|| clock::default_omegas(p.e));
            let cc = clock::clock_consistency(&p.profile, &w, p.e, &omegas)?;
            values.extend([w.y_lo, w.y_hi]);
            let mut defect: f64 = 0.0;
            for (a, b, _) in CHANNELS {
                match cc.channels.iter().find(|c| c.alpha == a && c.beta == b) {
                    None => values.extend([f64::NAN; 7]),
                    Some(c) => {
                        let last = c.direct.last().unwrap();
                        let t = &c.perturbative;
                        values.extend([
                            last.sy / last.omega_l,
                            last.sz / last.omega_l,
                            t.tau_y,
                            t.tau_z,
                            t.tau_x,
                            c.order_y.unwrap_or(f64::INFINITY),
                            c.order_z.unwrap_or(f64::INFINITY),
                        ]);
                        let scale = t.tau_x.max(f64::MIN_POSITIVE);
                        let worst = c.residual_y.last().unwrap().max(*c.residual_z.last().unwrap());
                        defect = defect.max(worst / scale);
                    }
                }
            }
            // clock_consistency already rejects orders below the threshold
            (defect, true)
        }
        Task::Absorb => {
            let w = window(cfg, &p)?;
            let gamma = p.gamma.expect("rate resolved by the parser");
            let a = transport::absorption_probabilities(&p.profile, &w, gamma, p.e)?;
            let s = transport::source_currents(&p.profile, &w, gamma, p.e)?;
            values.extend(a.absorbed);
            values.extend(a.predicted);
            values.extend(s.emitted);
            values.extend(s.predicted);
            values.push(a.local.ldos);
            let defect = a
                .relative_error()
                .into_iter()
                .chain(s.relative_error())
                .fold(0.0, f64::max);
            (defect, defect <= tol.first_order)
        }
        Task::Bardeen => {
            let mut tip = TipCoupling::new(
                p.y.expect("tip position resolved by the parser"),
                p.t2.expect("coupling resolved by the parser"),
                cfg.tip_nu,
            );
            tip.width = cfg.tip_width;
            let b = transport::bardeen_transmissions(&p.profile, p.e, &tip)?;
            let g = transport::voltage_probe_conductance(&p.profile, p.e, &tip)?;
            values.extend(b.into_tip);
            values.extend(b.from_tip);
            values.extend([b.corrected[0][0], b.corrected[1][0], b.corrected[0][1], b.corrected[1][1]]);
            values.extend([
                b.validity,
                g.transmission,
                g.closed_form,
                g.three_terminal,
                g.first_order_assembly,
            ]);
            let defect = route_defect(g.three_terminal, g.closed_form, g.closed_form - g.transmission);
            (defect, defect <= tol.first_order)
        }
        Task::Dephase => {
            let w = window(cfg, &p)?;
            let gamma = p.gamma.expect("rate resolved by the parser");
            let o = transport::optical_dephasing_conductance(&p.profile, p.e, &w, gamma)?;
            // unit tip density; Γ = 4π²|t|²ν_tip / w
            let mut tip = TipCoupling::new(w.midpoint(), gamma * w.width() / (4.0 * std::f64::consts::PI.powi(2)), 1.0);
            tip.width = Some(w.width());
            let g = transport::voltage_probe_conductance(&p.profile, p.e, &tip)?;
            values.extend([
                o.transmission,
                o.exact,
                o.first_order,
                g.three_terminal,
                g.closed_form,
                o.absorbed,
            ]);
            let defect = route_defect(o.exact, g.three_terminal, o.first_order - o.transmission);
            (defect, defect <= tol.first_order)
        }
        Task::Emittance => {
            let (lo, hi) = cfg.emit_range.unwrap_or_else(|| p.profile.domain());
            let windows = match cfg.emit_count {
                Some(n) => Window::tiling(lo, hi, n)?,
                None => DosHierarchy::resolved_tiling(&p.profile, p.e, lo, hi)?,
            };
            let r = transport::emittance_local_screening(&p.profile, p.e, &windows)?;
            let m = r.e_matrix;
            values.extend([m[0][0], m[0][1], m[1][0], m[1][1], r.d_total, windows.len() as f64]);
            let scale = m.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
            (r.zero_sum_defect, r.zero_sum_defect <= tol.zero_sum * scale)
        }
        Task::Saddle => {
            let mut model = cfg.saddle.clone();
            let u0 = if cfg.sweep.param == SweepParam::Energy {
                model.energy = value;
                p.u0.expect("saddle height resolved by the parser")
            } else {
                p.u0.unwrap()
            };
            let sp = model.point(u0)?;
            values.extend([sp.conductance, sp.report.c_mu.unwrap(), sp.emittance()]);
            for c in &sp.report.channels {
                values.extend([c.transmission, c.dos, c.emittance]);
            }
            (sp.report.zero_sum_defect, true)
        }
        Task::WignerSmith => {
            let ws = dos::wigner_smith(&p.profile, p.e)?;
            let (l, r) = (Contact::Left, Contact::Right);
            let t = scatter1d::smatrix(&p.profile, p.e)?.transmission();
            let tau = dos::traversal_time(&p.profile, p.e);
            values.extend([
                ws.get(l, l).re,
                ws.get(l, r).re,
                ws.get(l, r).im,
                ws.get(r, r).re,
                ws.trace().re,
                t,
                tau,
                dos::tunneling_action(&p.profile, p.e),
                tau * t.sqrt() / H,
                ws.hermiticity_defect,
            ]);
            (ws.hermiticity_defect, ws.hermiticity_defect <= tol.hermiticity)
        }
    };
    Ok(Row { values, defect, ok })
}
