//! Scenario runner and identity sweeps behind the `wold` binary.

pub mod builders;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::exec::Exec;
use crate::identities::{mutation_probes, run_sweeps, SweepParams, SweepReport};
use crate::optuple::ProbeConfig;
use crate::wold::{classify_pure, decompose, Verdict, WoldConfig, WoldReport};
use config::{load_config, ConfigError, Scenario};
use report::{to_json, Parameters, RegularitySection, RunReport, ScenarioReport, RADIUS_NOTE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wold", version, about = "Wold-type decomposition of commuting operator tuples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every scenario of a config file and compare against expectations.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Overrides the identity and Gram tolerances of every scenario.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides the Gram degree of every scenario.
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        no_timestamp: bool,
        /// Number of scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Check the combinatorial identities exactly over a grid.
    VerifyIdentities {
        #[arg(long, default_value_t = 5)]
        max_m: usize,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 6)]
        max_deg: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub tol: Option<f64>,
    pub max_degree: Option<usize>,
    pub timestamp: bool,
    pub parallel: usize,
}

/// Parses `args` (including the program name), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run { config, format, tol, max_degree, no_timestamp, parallel } => {
            let opts = RunOptions { tol, max_degree, timestamp: !no_timestamp, parallel };
            match run(&config, &opts) {
                Ok(rep) => {
                    emit_run(&mut out, &rep, format);
                    exit_code(&rep)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::VerifyIdentities { max_m, max_n, max_deg, format } => {
            if max_m == 0 || max_n == 0 {
                eprintln!("error: --max-m and --max-n must be positive");
                return EXIT_CONFIG;
            }
            let sweeps = verify_identities(max_m, max_n, max_deg);
            emit_sweeps(&mut out, &sweeps, format);
            if sweeps.sweeps.iter().all(|s| s.passed) && sweeps.mutations_rejected {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            }
        }
    }
}

pub fn exit_code(rep: &RunReport) -> i32 {
    if rep.reports.iter().all(|r| r.matches) {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

/// Loads the config and runs all scenarios, preserving config order.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunReport, ConfigError> {
    let cfg = load_config(config_path)?;
    if let Some(t) = opts.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(ConfigError("--tol must be positive and finite".into()));
        }
    }
    let reports = run_scenarios(&cfg.scenarios, opts);
    for r in &reports {
        for d in &r.diagnostics {
            eprintln!("{}: {d}", r.scenario);
        }
    }
    let generated_at_unix = opts.timestamp.then(|| {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    });
    Ok(RunReport { generated_at_unix, reports })
}

#[cfg(feature = "parallel")]
fn run_scenarios(scenarios: &[Scenario], opts: &RunOptions) -> Vec<ScenarioReport> {
    use rayon::prelude::*;
    if opts.parallel > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(opts.parallel).build() {
            return pool.install(|| scenarios.par_iter().map(|s| run_scenario(s, opts)).collect());
        }
    }
    scenarios.iter().map(|s| run_scenario(s, opts)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_scenarios(scenarios: &[Scenario], opts: &RunOptions) -> Vec<ScenarioReport> {
    scenarios.iter().map(|s| run_scenario(s, opts)).collect()
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> ScenarioReport {
    let mut tolerances = s.tolerances.unwrap_or_default();
    if let Some(t) = opts.tol {
        tolerances.identity = t;
        tolerances.gram = t;
    }
    let max_degree = opts.max_degree.or(s.max_degree);
    let mut rep = ScenarioReport {
        scenario: s.name.clone(),
        parameters: Parameters { builder: s.builder.clone(), m: s.m, max_degree, tolerances },
        predicates: None,
        residuals: None,
        dims: None,
        regularity: None,
        classification: None,
        gram_degree: None,
        verdict: None,
        expected: s.expected.clone(),
        matches: false,
        diagnostics: Vec::new(),
        error: None,
    };
    let t = match builders::build_tuple(&s.builder, tolerances) {
        Ok(t) => t,
        Err(e) => {
            rep.diagnostics.push(format!("build failed: {e}"));
            rep.error = Some(e);
            return rep;
        }
    };
    let wcfg = WoldConfig { m: s.m, max_degree, probe: ProbeConfig::default(), exec: Exec::default() };
    let wold = match decompose(&t, &wcfg) {
        Ok(w) => w,
        Err(e) => {
            rep.diagnostics.push(format!("decomposition failed: {e}"));
            rep.error = Some(e.to_string());
            return rep;
        }
    };
    match classify_pure(&t, s.m, &wcfg.probe, wcfg.exec) {
        Ok(c) => rep.classification = Some(c),
        Err(e) => rep.diagnostics.push(format!("classification failed: {e}")),
    }
    rep.matches = compare(&wold, s, &tolerances, &mut rep.diagnostics);
    rep.predicates = Some(wold.predicates.clone());
    rep.residuals = Some(wold.residuals.clone());
    rep.dims = Some(wold.dims.clone());
    rep.regularity = Some(RegularitySection { report: wold.regularity.clone(), radius_note: RADIUS_NOTE });
    rep.gram_degree = Some(wold.gram_degree);
    rep.verdict = Some(wold.verdict.to_string());
    rep
}

/// Residuals above their tolerance, named as in the report.
pub fn failing_residuals(w: &WoldReport, tol: &crate::Tolerances) -> Vec<String> {
    let r = &w.residuals;
    let checks = [
        ("identity", r.identity, tol.identity),
        ("reducing", r.reducing, tol.identity),
        ("coisometry", r.coisometry, tol.identity),
        ("orthogonality", r.orthogonality, tol.identity),
        ("gram", r.gram, tol.gram),
    ];
    checks
        .iter()
        .filter(|(_, v, bound)| !(v.is_finite() && v <= bound))
        .map(|(name, v, bound)| format!("residual {name}={v:.3e} exceeds {bound:.1e}"))
        .collect()
}

fn compare(w: &WoldReport, s: &Scenario, tol: &crate::Tolerances, diag: &mut Vec<String>) -> bool {
    let Some(expected) = &s.expected else {
        return true;
    };
    let mut ok = true;
    // validated at load time
    let want = expected.verdict().unwrap_or(Verdict::TruncationLimited);
    if want != w.verdict {
        ok = false;
        diag.push(format!("verdict {} but expected {want}", w.verdict));
        if matches!(w.verdict, Verdict::TruncationLimited | Verdict::HypothesesViolated(_)) {
            diag.extend(failing_residuals(w, tol));
        }
        if w.dims.h_inf + w.dims.orbit != w.dims.total {
            diag.push(format!(
                "dim H_inf + dim orbit = {} + {} does not fill dimension {}",
                w.dims.h_inf, w.dims.orbit, w.dims.total
            ));
        }
    }
    if let Some(d) = expected.dim_h_inf() {
        if d != w.dims.h_inf {
            ok = false;
            diag.push(format!("dim H_inf {} but expected {d}", w.dims.h_inf));
        }
    }
    if let Some(d) = expected.dim_orbit() {
        if d != w.dims.orbit {
            ok = false;
            diag.push(format!("dim orbit {} but expected {d}", w.dims.orbit));
        }
    }
    ok
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRun {
    pub params: SweepParams,
    pub sweeps: Vec<SweepReport>,
    pub mutations_rejected: bool,
}

pub fn verify_identities(max_m: usize, max_n: usize, max_deg: usize) -> IdentityRun {
    let params = SweepParams::uniform(max_m, max_n, max_deg);
    let sweeps = run_sweeps(&params, Exec::default());
    let mutations_rejected = mutation_probes().iter().all(|(_, passed)| !passed);
    IdentityRun { params, sweeps, mutations_rejected }
}

fn emit_run(out: &mut impl Write, rep: &RunReport, format: Format) {
    let _ = match format {
        Format::Json => writeln!(out, "{}", to_json(rep)),
        Format::Text => rep.reports.iter().try_for_each(|r| writeln!(out, "{}", r.text_line())),
    };
}

fn emit_sweeps(out: &mut impl Write, run: &IdentityRun, format: Format) {
    let _ = match format {
        Format::Json => writeln!(out, "{}", to_json(run)),
        Format::Text => (|| {
            for s in &run.sweeps {
                let status = if s.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{status} {} ({} cases)", s.name, s.cases)?;
                for f in s.failures.iter().take(10) {
                    writeln!(out, "  {f}")?;
                }
            }
            let status = if run.mutations_rejected { "PASS" } else { "FAIL" };
            writeln!(out, "{status} mutation probes rejected")
        })(),
    };
}
