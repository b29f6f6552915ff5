#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use shapeopt::fem::{build_mesh, solve_state, DiskMesh};
use shapeopt::geometry::area_perimeter;
use shapeopt::shapecalc::{fd_validate, write_derivative_csv, Method};
use shapeopt::verify::{coercivity_probe, ratio_sweep, ProbeOptions};
use shapeopt::Gauge;

mod config;
mod defaults;
mod manifest;

use config::Config;
use manifest::{RunManifest, Stage};

#[derive(Parser)]
#[command(name = "shapeopt", version, about = "Shape derivatives, Sobolev growth checks and convex shape optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the state equation; writes state.csv and energy.csv.
    Solve(Args),
    /// Shape derivatives along one direction with a finite-difference check.
    Derive(Args),
    /// Ratio sweep over cosine modes, optionally with the coercivity probe.
    Verify(Args),
    /// Projected-gradient minimization over convex domains in an annulus.
    Optimize(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Mesh level override.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad config or violated precondition; exit 2.
    Validation(String),
    /// A solver failed; exit 3.
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn message(&self) -> String {
        let m = match self {
            CliError::Validation(m) | CliError::Solver(m) => m,
        };
        m.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

impl From<shapeopt::Error> for CliError {
    fn from(e: shapeopt::Error) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Per-run state: output directory, manifest and stage timer.
struct Run {
    out: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let r = f();
        self.manifest.stages.push(Stage { name: name.to_string(), seconds: t0.elapsed().as_secs_f64() });
        r
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        std::fs::write(self.out.join(name), bytes)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> shapeopt::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, buf)
    }
}

fn report_csv(schema: &str, rows: &[(&str, String)]) -> String {
    let mut s = format!("# {schema} v1\nquantity,value\n");
    for (k, v) in rows {
        writeln!(s, "{k},{v}").unwrap();
    }
    s
}

fn opt_string(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn solve(run: &mut Run, cfg: &Config, u: &Gauge, mesh: &DiskMesh<f64>) -> Result<()> {
    let prob = cfg.problem.build()?;
    let krylov = cfg.solver.krylov()?;
    let state = run.stage("solve", || Ok(solve_state(&prob, u, mesh, &krylov)?))?;
    run.write_with("state.csv", |w| state.mesh.write_csv(Some(&state.u), w))?;
    let rows = [
        ("level", mesh.level().to_string()),
        ("nodes", mesh.n_nodes().to_string()),
        ("energy", state.energy.to_string()),
        ("relative_residual", state.residual.to_string()),
        ("iterations", state.stats.iterations.to_string()),
        ("area", state.mesh.area().to_string()),
    ];
    run.write("energy.csv", report_csv("energy", &rows))
}

fn derive(run: &mut Run, cfg: &Config, u: &Gauge, mesh: &DiskMesh<f64>) -> Result<()> {
    let prob = cfg.problem.build()?;
    let shape = cfg.solver.shape(Method::Direct)?;
    let dc = &cfg.derive;
    let steps = dc.steps.clone().unwrap_or_else(|| defaults::FD_STEPS.to_vec());
    let v = dc.direction.samples(u.n());
    let report = run.stage("derive", || Ok(fd_validate(&prob, u, mesh, &v, &steps, shape)?))?;
    let d = report.derivatives;
    let rows = vec![(cfg.domain.name().to_string(), dc.direction.label(), d)];
    run.write_with("derivatives.csv", |w| write_derivative_csv(&rows, w))?;
    run.write_with("fd_validate.csv", |w| report.write_csv(w))?;
    let rows = [
        ("energy", d.energy.to_string()),
        ("e_prime", d.de.to_string()),
        ("e_second", d.d2e.to_string()),
        ("e2_xi1", d.e2_xi1.to_string()),
        ("e1_xi2", d.e1_xi2.to_string()),
        ("md_residual", d.md_residual.to_string()),
        ("xi_w1inf", d.xi_w1inf.to_string()),
        ("slope_first_order", opt_string(report.slope1)),
        ("slope_second_order", opt_string(report.slope2)),
        ("floor", report.floor.to_string()),
        ("plateau", report.plateau.to_string()),
    ];
    run.write("derive_report.csv", report_csv("derive_report", &rows))
}

fn verify(run: &mut Run, cfg: &Config, u: &Gauge, mesh: &DiskMesh<f64>) -> Result<()> {
    let prob = cfg.problem.build()?;
    let shape = cfg.solver.shape(Method::Adjoint)?;
    let vc = &cfg.verify;
    let opts = vc.sweep(cfg.domain.name(), shape)?;
    run.manifest.seeds.extend(vc.seed);
    let report = run.stage("sweep", || Ok(ratio_sweep(&prob, u, mesh, &opts)?))?;
    run.write_with("sweep.csv", |w| report.write_csv(w))?;
    run.write_with("sweep_slopes.csv", |w| report.write_slopes_csv(w))?;
    for (i, s) in report.s_grid.iter().enumerate() {
        run.write(&format!("sweep_s{s:.2}.svg"), report.svg(i))?;
    }
    if vc.coercivity {
        let k_max = vc.coercivity_k_max.unwrap_or(defaults::COERCIVITY_K_MAX);
        let popts = ProbeOptions { norm: vc.norm(), shape, ..ProbeOptions::default() };
        let c = run.stage("coercivity", || Ok(coercivity_probe(&prob, u, mesh, k_max, popts)?))?;
        run.write_with("coercivity.csv", |w| c.write_csv(w))?;
    }
    Ok(())
}

fn optimize(run: &mut Run, cfg: &Config, u0: &Gauge, mesh: &DiskMesh<f64>) -> Result<()> {
    let oc = cfg
        .optimize
        .as_ref()
        .ok_or_else(|| CliError::Validation("optimize: missing [optimize] table".into()))?;
    let prob = cfg.problem.build()?;
    let spec = oc.spec(&prob)?;
    let opts = oc.minimize(cfg.solver.krylov()?);
    let r = run.stage("minimize", || Ok(shapeopt::optimize::minimize(&spec, u0, mesh, &opts)?))?;
    run.write_with("trace.csv", |w| r.write_trace_csv(w))?;
    run.write_with("gauge.csv", |w| r.u.write_csv(w))?;
    run.write("boundary.svg", r.boundary_svg())?;
    let last = r.trace.last().expect("trace has the initial row");
    let ap = area_perimeter(&r.u, None, shapeopt::geometry::Order::Zero)?;
    let mut rows = vec![
        ("termination", format!("{:?}", r.termination)),
        ("iterations", last.iter.to_string()),
        ("j", last.j.to_string()),
        ("e", opt_string(last.e)),
        ("area", ap.m.to_string()),
        ("perimeter", ap.p.to_string()),
        ("kkt", r.kkt.to_string()),
        ("active_inner", r.active.inner.len().to_string()),
        ("active_outer", r.active.outer.len().to_string()),
        ("active_cone", r.active.cone.len().to_string()),
    ];
    match r.arc_concentration(&oc.polygon()) {
        Ok(c) => rows.extend([
            ("arc_nodes", c.arc_nodes.to_string()),
            ("arc_mass", c.arc_mass.to_string()),
            ("vertices", c.vertices.to_string()),
            ("captured_fraction", c.captured_fraction.to_string()),
            ("arc_coverage", c.arc_coverage.to_string()),
        ]),
        Err(_) => rows.push(("arc_nodes", "0".into())),
    }
    run.write("optimize_report.csv", report_csv("optimize_report", &rows))
}

fn execute(run: &mut Run, cmd: &Command, args: &Args, bytes: &[u8]) -> Result<()> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::Validation("config: not valid UTF-8".into()))?;
    let cfg = config::parse(text)?;
    let threads = args.threads.or(cfg.threads).unwrap_or(defaults::THREADS);
    if threads == 0 {
        return Err(CliError::Validation("threads must be at least 1".into()));
    }
    run.manifest.threads = threads;
    // The global pool can only be built once per process; a failure here means
    // it already exists.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let level = args.level.or(cfg.level).unwrap_or(defaults::LEVEL);
    run.manifest.level = Some(level);
    let mesh = run.stage("mesh", || Ok(build_mesh::<f64>(level)?))?;
    let u = cfg.domain.gauge()?;
    match cmd {
        Command::Solve(_) => solve(run, &cfg, &u, &mesh),
        Command::Derive(_) => derive(run, &cfg, &u, &mesh),
        Command::Verify(_) => verify(run, &cfg, &u, &mesh),
        Command::Optimize(_) => optimize(run, &cfg, &u, &mesh),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Solve(a) => ("solve", a),
        Command::Derive(a) => ("derive", a),
        Command::Verify(a) => ("verify", a),
        Command::Optimize(a) => ("optimize", a),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create output directory {}: {e}", args.out.display());
        return ExitCode::from(2);
    }
    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            let mut m = RunManifest::new(name, &args.config, &[]);
            m.status = "validation_error";
            m.exit_code = 2;
            m.error = Some(e.to_string());
            let _ = m.write(&args.out);
            return ExitCode::from(2);
        }
    };
    let mut run = Run { out: args.out.clone(), manifest: RunManifest::new(name, &args.config, &bytes) };
    let result = execute(&mut run, &cli.command, args, &bytes);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            run.manifest.status = if e.code() == 2 { "validation_error" } else { "solver_error" };
            run.manifest.error = Some(e.message());
            e.code()
        }
    };
    run.manifest.exit_code = code.into();
    if let Err(e) = run.manifest.write(Path::new(&run.out)) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(if code == 0 { 2 } else { code });
    }
    ExitCode::from(code)
}
