//! Batch front-end: configuration parsing, sweep execution and CSV output.
//!
//! Output is comma-separated with a `#` metadata header (tool version,
//! resolved configuration, column units). Values use 17 significant
//! digits so that they round-trip. Every row carries a `defect` and an
//! `ok` column.

mod config;
mod selftest;
mod tasks;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use config::{parse_config, ConfigError, RunConfig, Sweep, SweepParam, Task, Tolerances, WindowSpec};
pub use selftest::{barrier_transmission, random_profile, selftest, SuiteResult};
pub use tasks::{columns, evaluate, Column, Failure, Row};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process status, in order of severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success = 0,
    ConfigError = 2,
    NumericalFailure = 3,
    OracleFailure = 4,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    /// Rows in sweep order, up to the first failed point.
    pub rows: Vec<Row>,
    pub error: Option<(usize, Failure)>,
    pub echo: Vec<(String, String)>,
}

impl ResultTable {
    pub fn status(&self) -> Status {
        match &self.error {
            Some((_, Failure::Numerical(_))) => Status::NumericalFailure,
            Some((_, Failure::Oracle(_))) => Status::OracleFailure,
            None if self.rows.iter().any(|r| !r.ok) => Status::OracleFailure,
            None => Status::Success,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# pdoslab {VERSION}").unwrap();
        for (k, v) in &self.echo {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}[{}]", c.name, c.unit))
            .chain(["defect[1]".to_string(), "ok[1]".to_string()])
            .collect();
        writeln!(out, "# units: {}", units.join(",")).unwrap();
        let names: Vec<&str> = self
            .columns
            .iter()
            .map(|c| c.name.as_str())
            .chain(["defect", "ok"])
            .collect();
        writeln!(out, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            let mut fields: Vec<String> = row.values.iter().map(|v| format_value(*v)).collect();
            fields.push(format_value(row.defect));
            fields.push(if row.ok { "1" } else { "0" }.to_string());
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        if let Some((i, failure)) = &self.error {
            writeln!(out, "# ERROR at sweep index {i}: {failure}").unwrap();
        }
        out
    }
}

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Evaluates every sweep point on the current rayon pool. Output order is
/// sweep order regardless of scheduling.
pub fn run(cfg: &RunConfig) -> ResultTable {
    let values = cfg.sweep.values();
    let results: Vec<Result<Row, Failure>> = values.par_iter().map(|&v| evaluate(cfg, v)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut error = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => {
                error = Some((i, f));
                break;
            }
        }
    }
    ResultTable {
        columns: columns(cfg),
        rows,
        error,
        echo: cfg.echo.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "pdoslab", version, about = "Partial densities of states and transport in 1D scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep described by a configuration file.
    Run {
        config: PathBuf,
        /// Output file; overrides the `output` key. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Accepted for symmetry with `selftest`; runs are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant suites on random profiles.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())
}

fn run_command(config: &Path, out: Option<PathBuf>, threads: usize) -> Status {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return Status::ConfigError;
        }
    };
    let cfg = match parse_config(&text, config.parent()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return Status::ConfigError;
        }
    };
    let pool = match pool(threads) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::ConfigError;
        }
    };
    let table = pool.install(|| run(&cfg));
    let rendered = table.render();
    let target = out.or_else(|| {
        cfg.output.as_ref().map(|o| match config.parent() {
            Some(base) if o.is_relative() => base.join(o),
            _ => o.clone(),
        })
    });
    let written = match &target {
        Some(path) => std::fs::write(path, rendered.as_bytes()),
        None => std::io::stdout().write_all(rendered.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return Status::ConfigError;
    }
    if let Some((i, f)) = &table.error {
        eprintln!("error at sweep index {i}: {f}");
    } else if table.status() == Status::OracleFailure {
        eprintln!("error: rows flagged ok = 0");
    }
    table.status()
}

fn selftest_command(seed: u64, threads: usize) -> Status {
    let pool = match pool(threads) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::ConfigError;
        }
    };
    let suites = pool.install(|| selftest(seed));
    let (mut passed, mut failed) = (0, 0);
    for s in &suites {
        println!("{:<18} {}/{}", s.name, s.passed, s.total);
        if let Some(f) = &s.first_failure {
            println!("  first failure: {f}");
        }
        passed += s.passed;
        failed += s.total - s.passed;
    }
    println!("selftest seed {seed}: {passed} passed, {failed} failed");
    if failed == 0 {
        Status::Success
    } else {
        Status::OracleFailure
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::ConfigError.into()
            } else {
                Status::Success.into()
            };
        }
    };
    match cli.command {
        Command::Run {
            config, out, threads, ..
        } => run_command(&config, out, threads),
        Command::Selftest { seed, threads } => selftest_command(seed, threads),
    }
    .into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> ResultTable {
        run(&parse_config(text, None).unwrap())
    }

    #[test]
    fn barrier_sweep_matches_closed_form() {
        let t = table(
            "task = scatter\nprofile.inline = 0 2 1 0\nsweep.param = energy\n\
             sweep.start = 0.2\nsweep.stop = 2.0\nsweep.count = 7\n",
        );
        assert_eq!(t.status(), Status::Success);
        assert_eq!(t.rows.len(), 7);
        for (e, tr) in t.column("E").unwrap().iter().zip(t.column("T").unwrap()) {
            let exact = barrier_transmission(1.0, 2.0, *e);
            assert!((tr - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn failure_marker_and_partial_rows() {
        // the second point sits below the right lead
        let t = table(
            "task = scatter\nprofile.inline = 0 1 0 0\nprofile.vright = 1\nsweep.param = energy\n\
             sweep.start = 2\nsweep.stop = 0.5\nsweep.count = 2\n",
        );
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.status(), Status::NumericalFailure);
        assert!(t.render().contains("# ERROR at sweep index 1:"));
    }

    #[test]
    fn saddle_sweep_crosses_zero_per_channel() {
        let t = table(
            "task = saddle\nsaddle.offsets = 0, 1, 2\nsweep.param = u0\nsweep.start = 1\n\
             sweep.stop = -3\nsweep.count = 400\n",
        );
        assert_eq!(t.status(), Status::Success);
        let e = t.column("Emittance").unwrap();
        let crossings = e.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert!(crossings >= 3, "{crossings}");
    }

    #[test]
    fn clock_rows_report_orders() {
        let t = table(
            "task = clock\nprofile.inline = 0 2 1 0\nenergy = 0.5\nwindow.lo = 0.5\nwindow.hi = 1.5\n",
        );
        assert_eq!(t.status(), Status::Success, "{}", t.render());
        for ch in ["21", "11"] {
            let order = t.column(&format!("order_y_{ch}")).unwrap()[0];
            assert!(order >= 1.8, "{ch}: {order}");
        }
    }

    #[test]
    fn render_is_deterministic_across_pools() {
        let cfg = parse_config(
            "task = hierarchy\nprofile.inline = 0 1 0.5 0; 1 2 0 0\nenergy = 1\n\
             window.width = 0.01\nsweep.param = y\nsweep.start = 0.1\nsweep.stop = 1.9\nsweep.count = 6\n",
            None,
        )
        .unwrap();
        let one = pool(1).unwrap().install(|| run(&cfg)).render();
        let four = pool(4).unwrap().install(|| run(&cfg)).render();
        assert_eq!(one, four);
        assert!(one.lines().any(|l| l.starts_with("# units: y[length],E[energy]")));
    }

    fn status_of(config: &str) -> (Status, Option<String>) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, config).unwrap();
        std::fs::write(dir.path().join("b.profile"), "0 2 1 0\n").unwrap();
        let status = run_command(&path, None, 1);
        (status, std::fs::read_to_string(dir.path().join("out.csv")).ok())
    }

    #[test]
    fn exit_statuses() {
        let (s, out) = status_of("task = scatter\nprofile.file = b.profile\nenergy = 0.5\noutput = out.csv\n");
        assert_eq!(s, Status::Success);
        assert!(out.unwrap().contains("ok\n"));
        assert_eq!(status_of("task = scatter\nprofile.file = missing\nenergy = 0.5\n").0, Status::ConfigError);
        assert_eq!(status_of("task = scatter\nprofile.colour = 1\n").0, Status::ConfigError);
        assert_eq!(
            status_of("task = scatter\nprofile.file = b.profile\nenergy = -1\noutput = out.csv\n").0,
            Status::NumericalFailure
        );
        let (s, out) = status_of(
            "task = hierarchy\nprofile.file = b.profile\nenergy = 0.5\nwindow.center = 1\n\
             tol.oracle = 1e-300\noutput = out.csv\n",
        );
        assert_eq!(s, Status::OracleFailure);
        assert!(out.unwrap().trim_end().ends_with(",0"));
        assert_eq!(run_command(Path::new("/nonexistent/run.cfg"), None, 1), Status::ConfigError);
    }

    #[test]
    fn values_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }
}
