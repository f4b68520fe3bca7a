//! `memchua` command-line front end.
//!
//! Exit codes are a stable contract: 0 success, 2 input/parse problem,
//! 3 fit failure, 4 design failure, 5 runtime failure (divergence, SOA abort,
//! unwritable output). Partial outputs are left in place on code 5.

use std::ffi::OsString;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{run_point, sweep, SweepConfig, SweepMode, SweepPoint};
use crate::circuit::{classify_stability, CircuitParams};
use crate::config::{RunConfig, CONFIG_ENV};
use crate::design::{design_circuit, DesignReport};
use crate::device::{fit_poly, read_iv_csv, write_state_table, DeviceState, FitReport};
use crate::error::Error;
use crate::integrate::SoaPolicy;

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_FIT: u8 = 3;
pub const EXIT_DESIGN: u8 = 4;
pub const EXIT_RUNTIME: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "memchua", version, about = "Memristor-based Chua's circuit design and analysis")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base seed for device variability.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sweep mode.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<SweepMode>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the I-V polynomial to measured samples and write a device card.
    Fit {
        /// CSV with header `voltage_V,current_A`.
        iv_csv: PathBuf,
        /// |V_SET| of the programmed state (V).
        #[arg(long, default_value_t = 1.2)]
        v_set: f64,
        /// V_STOP of the programmed state (V).
        #[arg(long, default_value_t = 2.6)]
        v_stop: f64,
        /// Lower fit bound (V); defaults to -0.9 |V_SET|.
        #[arg(long, allow_hyphen_values = true)]
        v_min: Option<f64>,
        /// Upper fit bound (V); defaults to V_STOP.
        #[arg(long)]
        v_max: Option<f64>,
        /// Programmed resistance recorded on the card; defaults to the fitted
        /// polynomial's resistance at 0.1 V.
        #[arg(long)]
        r_prog: Option<f64>,
    },
    /// Design the passive components for the configured device state.
    Design,
    /// Locate the equilibria of the configured circuit and their eigenvalues.
    Equilibria,
    /// Integrate one trajectory and classify it.
    Simulate,
    /// Sweep the programmed resistance and write a bifurcation table.
    Sweep,
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

type CmdResult = std::result::Result<u8, Failure>;

fn fail(code: u8) -> impl Fn(Error) -> Failure {
    move |e| Failure { code, message: e.to_string() }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Fit { iv_csv, v_set, v_stop, v_min, v_max, r_prog } => {
            cmd_fit(&cfg, iv_csv, *v_set, *v_stop, (*v_min, *v_max), *r_prog)
        }
        Command::Design => cmd_design(&cfg),
        Command::Equilibria => cmd_equilibria(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(EXIT_OK)
        }
    }
}

fn load_config(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)
            .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", p.display()) })?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.sweep.mode = mode;
    }
    Ok(cfg)
}

fn out_file(cfg: &RunConfig, name: &str) -> std::result::Result<(PathBuf, File), Failure> {
    let io = |e: std::io::Error| Failure { code: EXIT_RUNTIME, message: format!("{name}: {e}") };
    fs::create_dir_all(&cfg.out_dir).map_err(io)?;
    let path = cfg.out_dir.join(name);
    let f = File::create(&path).map_err(io)?;
    Ok((path, f))
}

fn write_text(cfg: &RunConfig, name: &str, text: &str) -> std::result::Result<PathBuf, Failure> {
    use std::io::Write;
    let (path, mut f) = out_file(cfg, name)?;
    f.write_all(text.as_bytes())
        .map_err(|e| Failure { code: EXIT_RUNTIME, message: format!("{name}: {e}") })?;
    Ok(path)
}

#[derive(Serialize)]
struct FitRecord<'a> {
    r_prog_ohm: f64,
    window_v: [f64; 2],
    coefficients: [f64; 5],
    report: &'a FitReport,
}

fn cmd_fit(
    cfg: &RunConfig,
    iv_csv: &Path,
    v_set: f64,
    v_stop: f64,
    window: (Option<f64>, Option<f64>),
    r_prog: Option<f64>,
) -> CmdResult {
    let file = File::open(iv_csv)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", iv_csv.display()) })?;
    let samples = read_iv_csv(file)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", iv_csv.display()) })?;
    let lo = window.0.unwrap_or(-0.9 * v_set);
    let hi = window.1.unwrap_or(v_stop);
    let (poly, report) = fit_poly(&samples, (lo, hi)).map_err(fail(EXIT_FIT))?;
    let r_prog = r_prog.unwrap_or_else(|| poly.read_resistance());
    let state = DeviceState::new(r_prog, v_set, v_stop, poly.coeffs).map_err(fail(EXIT_FIT))?;

    let (card, f) = out_file(cfg, "device_card.csv")?;
    write_state_table(f, &[state]).map_err(fail(EXIT_RUNTIME))?;
    let record =
        FitRecord { r_prog_ohm: r_prog, window_v: [lo, hi], coefficients: poly.coeffs, report: &report };
    let text =
        toml::to_string(&record).map_err(|e| Failure { code: EXIT_RUNTIME, message: e.to_string() })?;
    write_text(cfg, "fit_report.toml", &text)?;
    println!(
        "fitted {} samples, rms residual {:.3e} A -> {}",
        report.samples_used,
        report.residual_rms,
        card.display()
    );
    Ok(EXIT_OK)
}

fn device_state(cfg: &RunConfig) -> std::result::Result<(crate::device::StateTable, DeviceState), Failure> {
    let table = cfg.state_table().map_err(fail(EXIT_PARSE))?;
    let state = cfg.device_state(&table).map_err(fail(EXIT_PARSE))?;
    Ok((table, state))
}

/// The circuit to simulate: explicit components when configured, else designed.
fn circuit(cfg: &RunConfig, state: &DeviceState) -> std::result::Result<CircuitParams, Failure> {
    if let Some(explicit) = cfg.explicit_circuit(state) {
        return explicit.map_err(fail(EXIT_PARSE));
    }
    let report = design_circuit(state, &cfg.design).map_err(fail(EXIT_DESIGN))?;
    for c in report.failed() {
        eprintln!("warning: design check {} failed ({})", c.name, c.detail);
    }
    Ok(report.params)
}

#[derive(Serialize)]
struct DesignRecord<'a> {
    all_passed: bool,
    r_prog_ohm: f64,
    r_ohm: f64,
    r_n_ohm: f64,
    l_h: f64,
    c1_f: f64,
    c2_f: f64,
    check: &'a [crate::design::DesignCheck],
}

fn design_record<'a>(state: &DeviceState, rep: &'a DesignReport) -> DesignRecord<'a> {
    DesignRecord {
        all_passed: rep.all_passed(),
        r_prog_ohm: state.r_prog,
        r_ohm: rep.r,
        r_n_ohm: rep.r_n,
        l_h: rep.params.l,
        c1_f: rep.params.c1,
        c2_f: rep.params.c2,
        check: &rep.checks,
    }
}

fn cmd_design(cfg: &RunConfig) -> CmdResult {
    let (_, state) = device_state(cfg)?;
    let rep = design_circuit(&state, &cfg.design).map_err(fail(EXIT_DESIGN))?;
    let text = toml::to_string(&design_record(&state, &rep))
        .map_err(|e| Failure { code: EXIT_RUNTIME, message: e.to_string() })?;
    let path = write_text(cfg, "design_report.toml", &text)?;
    println!(
        "R = {:.1} ohm, R_N = {:.1} ohm, L = {:.4e} H, C2 = {:.4e} F -> {}",
        rep.r,
        rep.r_n,
        rep.params.l,
        rep.params.c2,
        path.display()
    );
    let failed: Vec<_> = rep.failed().map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(Failure { code: EXIT_DESIGN, message: format!("design check failed: {}", failed.join(", ")) })
    }
}

fn cmd_equilibria(cfg: &RunConfig) -> CmdResult {
    use std::io::Write;
    let (_, state) = device_state(cfg)?;
    let params = circuit(cfg, &state)?;
    let eq = params.find_equilibria();
    let (path, f) = out_file(cfg, "equilibria.csv")?;
    let mut w = std::io::BufWriter::new(f);
    let io = |e: std::io::Error| Failure { code: EXIT_RUNTIME, message: e.to_string() };
    writeln!(
        w,
        "label,v1_V,v2_V,iL_A,in_window,stable,saddle_focus,eig1_re,eig1_im,eig2_re,eig2_im,eig3_re,eig3_im"
    )
    .map_err(io)?;
    for e in &eq {
        let verdict = classify_stability(e);
        write!(
            w,
            "{},{:e},{:e},{:e},{},{},{}",
            e.label.as_str(),
            e.state.v1,
            e.state.v2,
            e.state.i_l,
            e.in_window,
            e.stable,
            verdict.saddle_focus
        )
        .map_err(io)?;
        for z in &e.eigenvalues {
            write!(w, ",{:e},{:e}", z.re, z.im).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
        println!("{:>2}  v1 = {:+.6} V  stable = {}", e.label.as_str(), e.state.v1, e.stable);
    }
    w.flush().map_err(io)?;
    println!("-> {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_simulate(cfg: &RunConfig) -> CmdResult {
    let (_, state) = device_state(cfg)?;
    let params = circuit(cfg, &state)?;
    let integration = cfg.integration.to_config();
    let lyap = cfg.lyapunov.to_config(&cfg.integration);
    let run = run_point(&params, cfg.init, &integration, lyap.as_ref(), &cfg.classify)
        .map_err(fail(EXIT_RUNTIME))?;

    let (_, f) = out_file(cfg, "trajectory.csv")?;
    run.trajectory.write_csv(f).map_err(fail(EXIT_RUNTIME))?;
    let (_, f) = out_file(cfg, "events.csv")?;
    run.trajectory.write_events_csv(f).map_err(fail(EXIT_RUNTIME))?;
    write_text(cfg, "classification.toml", &run.class.summary())?;
    let point = SweepPoint {
        r_prog: state.r_prog,
        extrema: run.extrema.iter().map(|e| e.value).collect(),
        class: run.class,
        seed: cfg.seed,
        soa_events: run.trajectory.soa_events().count(),
        failure: None,
    };
    let (_, f) = out_file(cfg, "extrema.csv")?;
    crate::analysis::sweep::write_bifurcation_csv(f, std::slice::from_ref(&point))
        .map_err(fail(EXIT_RUNTIME))?;

    print!("{}", run.class.summary());
    if run.trajectory.diverged() {
        return Err(Failure {
            code: EXIT_RUNTIME,
            message: "trajectory diverged; partial output written".into(),
        });
    }
    if integration.soa_policy == SoaPolicy::Abort && point.soa_events > 0 {
        return Err(Failure {
            code: EXIT_RUNTIME,
            message: "v1 left the safe operating window; run aborted, partial output written".into(),
        });
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(cfg: &RunConfig) -> CmdResult {
    use std::io::Write;
    let (table, _) = device_state(cfg)?;
    let (r_min, r_max) = cfg.sweep_range(&table);
    let sc = SweepConfig {
        r_min,
        r_max,
        n_points: cfg.sweep.n_points,
        mode: cfg.sweep.mode,
        reference_r_prog: Some(cfg.reference_r_prog(&table)),
        spec: cfg.design,
        init: cfg.init,
        integration: cfg.integration.to_config(),
        lyapunov: cfg.lyapunov.to_config(&cfg.integration),
        classify: cfg.classify,
        sigma: cfg.sweep.sigma,
        seed: cfg.seed,
    };
    let points = sweep(&table, &sc).map_err(|e| {
        let code = match e {
            Error::InfeasibleG { .. } | Error::SafeWindow { .. } => EXIT_DESIGN,
            _ => EXIT_PARSE,
        };
        fail(code)(e)
    })?;

    let (path, f) = out_file(cfg, "bifurcation.csv")?;
    crate::analysis::sweep::write_bifurcation_csv(f, &points).map_err(fail(EXIT_RUNTIME))?;

    let (_, f) = out_file(cfg, "sweep_points.csv")?;
    let mut w = std::io::BufWriter::new(f);
    let io = |e: std::io::Error| Failure { code: EXIT_RUNTIME, message: e.to_string() };
    writeln!(
        w,
        "r_prog_ohm,class,scroll_side,lambda1_dimensionless,n_extrema_clusters,soa_events,seed,failure"
    )
    .map_err(io)?;
    for p in &points {
        let lambda = p.class.lambda1_dimensionless.map_or_else(String::new, |x| format!("{x:e}"));
        let why = p.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            w,
            "{:e},{},{},{},{},{},{},{}",
            p.r_prog,
            p.class.label,
            p.class.scroll_side.as_str(),
            lambda,
            p.class.n_extrema_clusters,
            p.soa_events,
            p.seed,
            why
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;

    let ok = points.iter().filter(|p| p.failure.is_none()).count();
    println!("{ok} of {} points simulated -> {}", points.len(), path.display());
    for p in points.iter().filter(|p| p.failure.is_some()) {
        eprintln!("point r_prog = {:.1}: {}", p.r_prog, p.failure.as_deref().unwrap_or(""));
    }
    if ok == 0 {
        return Err(Failure { code: EXIT_RUNTIME, message: "no sweep point could be simulated".into() });
    }
    Ok(EXIT_OK)
}
