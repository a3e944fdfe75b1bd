//! Command-line front end for `layerfem`. [`run`] holds the whole program so
//! that it can be driven from tests.

mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use layerfem::analysis::{convergence_study, interpolation_study, ReferenceKind};
use layerfem::fem::galerkin_solve;
use layerfem::mesh::build_layer_mesh;
use layerfem::problem::{scenario, ScenarioKind};
use layerfem::verify::{run_suite, Suite, DEFAULT_SEED};
use layerfem::Error;

pub use table::{real, Cell, Table};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "layerfem", version, about = "Layer-adapted FEM for singularly perturbed convection-diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the nodes of the layer-adapted mesh.
    Mesh(ProblemArgs),
    /// Solve and print the nodal values of the Galerkin solution.
    Solve(ProblemArgs),
    /// Energy-norm errors and observed rates over an (eps0, h) sweep.
    Converge(ProblemArgs),
    /// Interpolation errors of the smooth and layer exemplars.
    Interp(ProblemArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct ProblemArgs {
    /// eps-const, eps-linear, eps-exp or manufactured
    #[arg(long, default_value = "manufactured")]
    pub scenario: ScenarioKind,
    /// Diffusion scale(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1e-6", value_parser = parse_eps0)]
    pub eps0: Vec<f64>,
    /// Mesh parameter(s) in (0, 1), comma separated; fractions like 1/64 are accepted.
    #[arg(long, value_delimiter = ',', default_value = "1/16", value_parser = parse_h)]
    pub h: Vec<f64>,
    /// Scale of the first graded step.
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub delta: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Pretty => "pretty",
        }
    }
}

/// Decimal or `p/q`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("'{s}' is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn parse_eps0(s: &str) -> Result<f64, String> {
    let v = parse_positive(s)?;
    if v <= 0.1 {
        Ok(v)
    } else {
        Err(format!("eps0 = {v} must lie in (0, 0.1]"))
    }
}

fn parse_h(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("h = {v} must lie in (0, 1)"))
    }
}

struct Outcome {
    table: Table,
    meta: Value,
    output: OutputArgs,
    failed: bool,
}

fn reals(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| table::real_json(x)).collect())
}

fn problem_meta(name: &str, a: &ProblemArgs) -> Value {
    json!({
        "config": {
            "subcommand": name,
            "scenario": a.scenario.name(),
            "eps0": reals(&a.eps0),
            "h": reals(&a.h),
            "delta": table::real_json(a.delta),
            "format": a.output.format.name(),
        },
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn mesh_table(a: &ProblemArgs) -> layerfem::Result<Table> {
    let mut t = Table::new(&["eps0", "h", "i", "x", "region"]);
    for &eps0 in &a.eps0 {
        let s = scenario(a.scenario, eps0)?;
        for &h in &a.h {
            let mesh = build_layer_mesh(&s.coeffs, h, a.delta)?;
            for (i, &x) in mesh.nodes().iter().enumerate() {
                t.push(vec![eps0.into(), h.into(), i.into(), x.into(), mesh.region(i).name().into()]);
            }
        }
    }
    Ok(t)
}

fn solve_table(a: &ProblemArgs) -> layerfem::Result<Table> {
    let mut t = Table::new(&["eps0", "h", "i", "x", "u_h", "u_exact"]);
    for &eps0 in &a.eps0 {
        let s = scenario(a.scenario, eps0)?;
        for &h in &a.h {
            let mesh = build_layer_mesh(&s.coeffs, h, a.delta)?;
            let u = galerkin_solve(&s, &mesh)?;
            for (i, (&x, &v)) in u.nodes().iter().zip(&u.coefficients).enumerate() {
                let exact = s.exact.as_ref().map(|e| e.eval(x));
                t.push(vec![eps0.into(), h.into(), i.into(), x.into(), v.into(), exact.into()]);
            }
        }
    }
    Ok(t)
}

fn converge_table(a: &ProblemArgs, err: &mut dyn Write) -> layerfem::Result<Table> {
    let kind = a.scenario;
    let study = convergence_study(|e| scenario(kind, e), &a.h, &a.eps0, a.delta)?;
    for c in &study.skipped {
        let _ = writeln!(err, "skipped eps0={} h={}: {}", real(c.eps0), real(c.h), c.reason);
    }
    if study.rows.is_empty() && !study.skipped.is_empty() {
        return Err(Error::DegenerateRegime("every (eps0, h) cell was skipped".into()));
    }
    let mut t = Table::new(&[
        "eps0",
        "h",
        "nodes",
        "energy_error",
        "l2_error",
        "weighted_grad_error",
        "rate",
        "reference",
    ]);
    for r in &study.rows {
        let reference = match r.report.reference_kind {
            ReferenceKind::ClosedForm => "closed-form",
            ReferenceKind::FineMesh => "fine-mesh",
        };
        t.push(vec![
            r.eps0.into(),
            r.h.into(),
            r.report.node_count.into(),
            r.report.energy_error.into(),
            r.report.l2_error.into(),
            r.report.weighted_grad_error.into(),
            r.rate.into(),
            reference.into(),
        ]);
    }
    Ok(t)
}

fn interp_table(a: &ProblemArgs) -> layerfem::Result<Table> {
    let mut t = Table::new(&[
        "eps0",
        "h",
        "nodes",
        "tau",
        "smooth_l2",
        "smooth_h1",
        "layer_l2_coarse",
        "layer_max_coarse",
        "layer_weighted_l2_fine",
        "layer_weighted_grad_fine",
        "rate_smooth_l2",
        "rate_smooth_h1",
        "rate_layer_l2_coarse",
        "rate_layer_max_coarse",
        "rate_layer_weighted_l2_fine",
        "rate_layer_weighted_grad_fine",
    ]);
    for &eps0 in &a.eps0 {
        let study = interpolation_study(&scenario(a.scenario, eps0)?, &a.h, a.delta)?;
        for (k, r) in study.rows.iter().enumerate() {
            let mut row: Vec<Cell> = vec![
                eps0.into(),
                r.h.into(),
                r.node_count.into(),
                r.tau.into(),
                r.smooth_l2.into(),
                r.smooth_h1.into(),
                r.layer_l2_coarse.into(),
                r.layer_max_coarse.into(),
                r.layer_weighted_l2_fine.into(),
                r.layer_weighted_grad_fine.into(),
            ];
            // Rates belong to the finer of the two rows they compare.
            match k.checked_sub(1).and_then(|j| study.rates.get(j)) {
                Some(q) => row.extend([
                    q.smooth_l2,
                    q.smooth_h1,
                    q.layer_l2_coarse,
                    q.layer_max_coarse,
                    q.layer_weighted_l2_fine,
                    q.layer_weighted_grad_fine,
                ]
                .map(Cell::from)),
                None => row.extend(std::iter::repeat_n(Cell::Empty, 6)),
            }
            t.push(row);
        }
    }
    Ok(t)
}

fn verify_table(a: &VerifyArgs) -> layerfem::Result<(Table, bool)> {
    let reports = run_suite(a.suite, a.seed)?;
    let mut t = Table::new(&["name", "worst_margin", "worst_point", "statistic", "samples", "status"]);
    let mut failed = false;
    for r in &reports {
        failed |= !r.passed;
        t.push(vec![
            r.name.clone().into(),
            r.worst_margin.into(),
            r.worst_point.into(),
            r.statistic.into(),
            r.sample_count.into(),
            (if r.passed { "PASS" } else { "FAIL" }).into(),
        ]);
    }
    Ok((t, failed))
}

fn execute(command: Command, err: &mut dyn Write) -> layerfem::Result<Outcome> {
    let plain = |table, meta, output| Outcome { table, meta, output, failed: false };
    Ok(match command {
        Command::Mesh(a) => plain(mesh_table(&a)?, problem_meta("mesh", &a), a.output),
        Command::Solve(a) => plain(solve_table(&a)?, problem_meta("solve", &a), a.output),
        Command::Converge(a) => plain(converge_table(&a, err)?, problem_meta("converge", &a), a.output),
        Command::Interp(a) => plain(interp_table(&a)?, problem_meta("interp", &a), a.output),
        Command::Verify(a) => {
            let (table, failed) = verify_table(&a)?;
            let meta = json!({
                "config": {
                    "subcommand": "verify",
                    "suite": a.suite.name(),
                    "seed": a.seed,
                    "format": a.output.format.name(),
                },
                "version": env!("CARGO_PKG_VERSION"),
            });
            Outcome { table, meta, output: a.output, failed }
        }
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegenerateRegime(_) => EXIT_DEGENERATE,
        Error::Parameter(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let outcome = match execute(cli.command, err) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let text = match outcome.output.format {
        Format::Csv => outcome.table.csv(),
        Format::Json => outcome.table.json(outcome.meta),
        Format::Pretty => outcome.table.pretty(),
    };
    let written = match &outcome.output.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_FAILURE;
    }
    if outcome.failed {
        let _ = writeln!(err, "verification failed");
        EXIT_FAILURE
    } else {
        0
    }
}
