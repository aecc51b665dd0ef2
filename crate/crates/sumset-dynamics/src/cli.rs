//! Subcommand dispatch and machine-readable reports.
//!
//! Every run writes one versioned JSON report embedding the configuration it
//! was produced from (the orbit CSV of `nil orbit` is the one non-JSON
//! surface). Exit status separates outcome classes: 0 for success, 2 for
//! verification-failure outcomes (a refutation left unresolved, a certificate
//! that fails its check, a search that returns a trace), and 1 for
//! operational errors such as malformed inputs. Negative results are expected
//! outputs, not crashes, so scripted experiments can classify them.
//!
//! `SUMSET_DYN_THREADS` caps the worker pool; `SUMSET_DYN_WINDOW` overrides
//! the default membership window.

use crate::ergodic::{self, A2Config, FunctionSpec, ScanKind, ScanParams};
use crate::nil::{omega, AffineTorusSystem, ExactPoint, TorusArc, TorusBox};
use crate::rat::{parse_rat, Rat};
use crate::search::{SearchBudget, SearchOutcome};
use crate::sets::FiniteNatSet;
use crate::setspec::{FolnerWindow, SetSpec};
use crate::straus::StrausSpec;
use crate::{cert, search, straus, Error, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

pub const DEFAULT_WINDOW: u64 = 1_000_000;

pub fn default_window() -> u64 {
    std::env::var("SUMSET_DYN_WINDOW")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_WINDOW)
}

#[derive(Clone, Debug, Parser, Serialize)]
#[command(
    name = "sumset-dynamics",
    about = "Restricted sumset certificates in dense sets, with exact torus dynamics"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Report destination; stdout when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (also SUMSET_DYN_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Prime-residue counterexample sets: density bounds and refutation tables.
    Straus(StrausArgs),
    /// Window densities of a set specification.
    Density(DensityArgs),
    /// Search for a sumset certificate in a dense set.
    Search(SearchArgs),
    /// Re-check a certificate against a set, independently of its producer.
    Verify(VerifyArgs),
    /// Affine torus systems: orbits, manifolds, seminorms, scanners.
    #[command(subcommand)]
    Nil(NilCommand),
    /// End-to-end reproductions.
    #[command(subcommand)]
    Repro(ReproCommand),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct StrausArgs {
    /// Comma-separated increasing primes.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5u64, 13, 29, 103])]
    pub primes: Vec<u64>,
    /// Measure the window density on [1, window].
    #[arg(long)]
    pub density: bool,
    #[arg(long)]
    pub window: Option<u64>,
    /// Run the per-shift refutation table for a random B prefix.
    #[arg(long)]
    pub refute: bool,
    #[arg(long, default_value_t = 120)]
    pub b_size: usize,
    #[arg(long, default_value_t = 10_000)]
    pub b_max: u64,
    #[arg(long, default_value_t = 110)]
    pub k: u64,
    #[arg(long, default_value_t = 100)]
    pub t_bound: u64,
    /// Write the set specification itself into the report.
    #[arg(long)]
    pub emit_set: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DensityArgs {
    /// Path to a SetSpec JSON document.
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub length: u64,
    #[arg(long, default_value_t = 50)]
    pub windows: u64,
    #[arg(long, default_value_t = 1000)]
    pub stride: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SearchArgs {
    /// thma | thmb | mixed.
    pub kind: String,
    /// Path to a SetSpec JSON document.
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub ell: u32,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long)]
    pub max_scan: Option<u64>,
    #[arg(long)]
    pub backtrack: Option<u32>,
    #[arg(long)]
    pub target_b: Option<usize>,
    #[arg(long)]
    pub shift_cap: Option<u64>,
    #[arg(long)]
    pub s_cap: Option<u64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cert: PathBuf,
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub window: Option<u64>,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NilCommand {
    /// Orbit of the affine system as CSV (n, x_1, …, x_s).
    Orbit(OrbitArgs),
    /// Haar samples of the diagonal orbit-closure manifold.
    Omega(OmegaArgs),
    /// Projection strictness of the manifolds, with a machine-checked witness.
    OmegaStrictness(OmegaStrictnessArgs),
    /// Return-time set of a point to a box, emitted as a SetSpec document.
    ReturnTimes(ReturnTimesArgs),
    /// Uniformity seminorm of a function along the orbit.
    Seminorm(SeminormArgs),
    /// Progressiveness scanners.
    Progressive(ProgressiveArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    /// Rotation as p/q or a decimal literal (parsed exactly).
    #[arg(long, default_value = "0.41421356237")]
    pub alpha: String,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    /// exact | float.
    #[arg(long, default_value = "exact")]
    pub mode: String,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OmegaArgs {
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OmegaStrictnessArgs {
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReturnTimesArgs {
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value = "610/987")]
    pub alpha: String,
    /// Per-coordinate arcs "lo,len", repeatable; defaults to [0, 3/5) per coordinate.
    #[arg(long)]
    pub arc: Vec<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub horizon: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SeminormArgs {
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value = "195025/470832")]
    pub alpha: String,
    /// Path to a FunctionSpec JSON document; defaults to e(x_s).
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long = "big-h", default_value_t = 64)]
    pub h: u64,
    #[arg(long, default_value_t = 100_000)]
    pub n: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ProgressiveArgs {
    /// left | right | multi.
    #[arg(long)]
    pub mode: String,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value = "195025/470832")]
    pub alpha: String,
    /// Boxes in the pattern (left/multi: k boxes; right: k-1 boxes).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub ell: usize,
    /// Cube side; cubes are centered at the origin.
    #[arg(long, default_value = "2/5")]
    pub side: String,
    #[arg(long, default_value_t = 10_000)]
    pub n_max: u64,
    #[arg(long, default_value_t = 1000)]
    pub m_max: u64,
    #[arg(long, default_value_t = 2000)]
    pub avg: u64,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_hits: Option<usize>,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReproCommand {
    /// The double-average seminorm-control example, exact and numeric.
    AppendixA2(AppendixA2Args),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AppendixA2Args {
    #[arg(long, default_value_t = 200_000)]
    pub n: u64,
    #[arg(long, default_value_t = 500)]
    pub m: u64,
    #[arg(long)]
    pub alpha: Option<String>,
}

/// Exit classes: success, verification-failure outcome, operational error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitClass {
    Success,
    VerificationFailure,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Success => 0,
            ExitClass::VerificationFailure => 2,
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    version: u32,
    config: &'a RunConfig,
    result: T,
}

fn render<T: Serialize>(config: &RunConfig, result: T) -> Result<String> {
    serde_json::to_string_pretty(&Report {
        version: 1,
        config,
        result,
    })
    .map_err(|e| Error::Malformed(e.to_string()))
}

fn read_set_spec(path: &PathBuf) -> Result<SetSpec> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn parse_arc(s: &str) -> Result<TorusArc> {
    let (lo, len) = s
        .split_once(',')
        .ok_or_else(|| Error::Invalid(format!("arc must be \"lo,len\", got {s:?}")))?;
    TorusArc::new(parse_rat(lo)?, parse_rat(len)?)
}

fn centered_cube(dim: usize, side: Rat) -> Result<TorusBox> {
    let lo = crate::rat::mod1(-side / Rat::from_integer(2));
    Ok(TorusBox::new(
        (0..dim)
            .map(|_| TorusArc::new(lo, side))
            .collect::<Result<_>>()?,
    ))
}

/// Run one subcommand, producing the report document and its exit class.
pub fn dispatch(config: &RunConfig) -> Result<(String, ExitClass)> {
    if let Some(threads) = config.threads.or_else(|| {
        std::env::var("SUMSET_DYN_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        // Ignore failure: the global pool can only be built once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match &config.command {
        Command::Straus(args) => run_straus(config, args),
        Command::Density(args) => run_density(config, args),
        Command::Search(args) => run_search(config, args),
        Command::Verify(args) => run_verify(config, args),
        Command::Nil(cmd) => run_nil(config, cmd),
        Command::Repro(ReproCommand::AppendixA2(args)) => {
            let rep = ergodic::appendix_a2_repro(&A2Config {
                n: args.n,
                m: args.m,
                alpha: args.alpha.clone(),
            })?;
            Ok((render(config, rep)?, ExitClass::Success))
        }
    }
}

#[derive(Serialize)]
struct StrausReport {
    primes: Vec<u64>,
    density_bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_density_f64: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refutation: Option<straus::RefuteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    set: Option<SetSpec>,
}

fn run_straus(config: &RunConfig, args: &StrausArgs) -> Result<(String, ExitClass)> {
    let spec = StrausSpec::new(args.primes.clone())?;
    let window = args.window.unwrap_or_else(default_window);
    let mut report = StrausReport {
        primes: spec.primes.clone(),
        density_bound: crate::rat::format_rat(spec.density_bound()),
        measured_density: None,
        measured_density_f64: None,
        refutation: None,
        set: None,
    };
    if args.density {
        let d = spec
            .set_spec()
            .window_density(FolnerWindow { start: 1, len: window })?;
        report.measured_density = Some(crate::rat::format_rat(d));
        report.measured_density_f64 = Some(crate::rat::to_f64(d));
    }
    let mut class = ExitClass::Success;
    if args.refute {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut b = std::collections::BTreeSet::new();
        while b.len() < args.b_size {
            b.insert(rng.gen_range(1..=args.b_max));
        }
        let b = FiniteNatSet::new(b.into_iter().collect())?;
        let table = straus::refute_fixed_b(&spec, &b, args.k, args.t_bound, window)?;
        if !table.all_refuted() {
            class = ExitClass::VerificationFailure;
        }
        report.refutation = Some(table);
    }
    if args.emit_set {
        report.set = Some(spec.set_spec());
    }
    Ok((render(config, report)?, class))
}

fn run_density(config: &RunConfig, args: &DensityArgs) -> Result<(String, ExitClass)> {
    let spec = read_set_spec(&args.set)?;
    let est = spec.banach_density_estimate(args.length, args.windows, args.stride)?;
    Ok((render(config, est)?, ExitClass::Success))
}

fn run_search(config: &RunConfig, args: &SearchArgs) -> Result<(String, ExitClass)> {
    let spec = read_set_spec(&args.set)?;
    let mut budget = SearchBudget::new(args.k, args.window.unwrap_or_else(default_window));
    if let Some(v) = args.max_scan {
        budget.max_scan = v;
    }
    if let Some(v) = args.backtrack {
        budget.backtrack_depth = v;
    }
    if let Some(v) = args.target_b {
        budget.target_b_size = v;
    }
    if let Some(v) = args.shift_cap {
        budget.shift_cap = v;
    }
    if let Some(v) = args.s_cap {
        budget.s_cap = v;
    }
    let outcome = match args.kind.as_str() {
        "thma" => search::search_thma(&spec, args.ell, &budget)?,
        "thmb" => search::search_thmb(&spec, &budget)?,
        "mixed" => search::search_mixed(&spec, args.ell, &budget)?,
        other => {
            return Err(Error::Invalid(format!(
                "unknown search kind {other:?} (thma|thmb|mixed)"
            )))
        }
    };
    let class = match &outcome {
        SearchOutcome::Found(_) => ExitClass::Success,
        SearchOutcome::Failed(_) => ExitClass::VerificationFailure,
    };
    Ok((render(config, outcome)?, class))
}

fn run_verify(config: &RunConfig, args: &VerifyArgs) -> Result<(String, ExitClass)> {
    let spec = read_set_spec(&args.set)?;
    let raw = std::fs::read_to_string(&args.cert)
        .map_err(|e| Error::Invalid(format!("{}: {e}", args.cert.display())))?;
    let certificate = cert::SumsetCertificate::from_json(&raw)?;
    let window = args.window.unwrap_or(certificate.window);
    let report = cert::verify(&spec, &certificate, window)?;
    let class = match report.status {
        cert::CheckStatus::Violation => ExitClass::VerificationFailure,
        _ => ExitClass::Success,
    };
    Ok((render(config, report)?, class))
}

fn run_nil(config: &RunConfig, cmd: &NilCommand) -> Result<(String, ExitClass)> {
    match cmd {
        NilCommand::Orbit(args) => {
            let sys = AffineTorusSystem::new(args.s, parse_rat(&args.alpha)?)?;
            let a = ExactPoint::origin(args.s);
            let mut csv = String::from("n");
            for j in 1..=args.s {
                csv.push_str(&format!(",x{j}"));
            }
            csv.push('\n');
            match args.mode.as_str() {
                "exact" => {
                    let mut orbit = sys.orbit_iter_exact(&a, 1, 1)?;
                    for n in 1..=args.n {
                        let p = orbit.current().to_f64s();
                        csv.push_str(&format!("{n}"));
                        for x in p {
                            csv.push_str(&format!(",{x:.15}"));
                        }
                        csv.push('\n');
                        orbit.advance();
                    }
                }
                "float" => {
                    let mut orbit = sys.orbit_iter_float(&a, 1, 1)?;
                    for n in 1..=args.n {
                        let p = orbit.current();
                        csv.push_str(&format!("{n}"));
                        for x in p {
                            csv.push_str(&format!(",{x:.15}"));
                        }
                        csv.push('\n');
                        orbit.advance();
                    }
                }
                other => {
                    return Err(Error::Invalid(format!(
                        "unknown mode {other:?} (exact|float)"
                    )))
                }
            }
            Ok((csv, ExitClass::Success))
        }
        NilCommand::Omega(args) => {
            let samples = omega::omega_sample(args.s, args.k, args.samples, config.seed)?;
            Ok((
                serde_json::to_string(&samples).map_err(|e| Error::Malformed(e.to_string()))?,
                ExitClass::Success,
            ))
        }
        NilCommand::OmegaStrictness(args) => {
            let rep =
                omega::projection_strictness(args.s, args.k, args.samples, config.seed, args.tol)?;
            let class = if rep.strict() {
                ExitClass::Success
            } else {
                ExitClass::VerificationFailure
            };
            Ok((render(config, rep)?, class))
        }
        NilCommand::ReturnTimes(args) => {
            let sys = AffineTorusSystem::new(args.s, parse_rat(&args.alpha)?)?;
            let arcs: Vec<TorusArc> = if args.arc.is_empty() {
                (0..args.s)
                    .map(|_| TorusArc::new(Rat::new(0, 1), Rat::new(3, 5)))
                    .collect::<Result<_>>()?
            } else {
                args.arc.iter().map(|s| parse_arc(s)).collect::<Result<_>>()?
            };
            if arcs.len() != args.s {
                return Err(Error::Invalid(format!(
                    "need {} arcs, got {}",
                    args.s,
                    arcs.len()
                )));
            }
            let spec = crate::setspec::return_time_set(
                &sys,
                &ExactPoint::origin(args.s),
                &TorusBox::new(arcs),
                args.horizon,
            )?;
            Ok((
                serde_json::to_string_pretty(&spec).map_err(|e| Error::Malformed(e.to_string()))?,
                ExitClass::Success,
            ))
        }
        NilCommand::Seminorm(args) => {
            let sys = AffineTorusSystem::new(args.s, parse_rat(&args.alpha)?)?;
            let f: FunctionSpec = match &args.f {
                Some(path) => {
                    let raw = std::fs::read_to_string(path)
                        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&raw).map_err(|e| Error::Malformed(e.to_string()))?
                }
                None => {
                    let mut freq = vec![0i64; args.s];
                    freq[args.s - 1] = 1;
                    FunctionSpec::Character(vec![freq])
                }
            };
            let est = ergodic::ghk_seminorm(
                &sys,
                &f,
                &ExactPoint::origin(args.s),
                args.k,
                args.h,
                args.n,
            )?;
            Ok((render(config, est)?, ExitClass::Success))
        }
        NilCommand::Progressive(args) => {
            let sys = AffineTorusSystem::new(args.s, parse_rat(&args.alpha)?)?;
            let a = ExactPoint::origin(args.s);
            let cube = centered_cube(args.s, parse_rat(&args.side)?)?;
            let mut params = ScanParams::new(args.n_max);
            params.m_max = args.m_max;
            params.avg_n = args.avg;
            params.threshold = args.threshold;
            if let Some(h) = args.max_hits {
                params.max_hits = h;
            }
            let (kind, boxes) = match args.mode.as_str() {
                "left" => (ScanKind::Left, vec![cube; args.k]),
                "right" => (ScanKind::Right { k: args.k }, vec![cube; args.k - 1]),
                "multi" => (
                    ScanKind::MultipleRight { ell: args.ell },
                    vec![cube; args.k],
                ),
                other => {
                    return Err(Error::Invalid(format!(
                        "unknown mode {other:?} (left|right|multi)"
                    )))
                }
            };
            let hits = match kind {
                ScanKind::Left => ergodic::left_progressive_scan(&sys, &a, &boxes, &params)?,
                ScanKind::Right { k } => {
                    ergodic::right_progressive_scan(&sys, &a, k, &boxes, &params)?
                }
                ScanKind::MultipleRight { ell } => {
                    ergodic::multiple_right_scan(&sys, &a, ell, &boxes, &params)?
                }
            };
            #[derive(Serialize)]
            struct ScanReport {
                kind: ScanKind,
                threshold: f64,
                hits: Vec<ergodic::ScanHit>,
            }
            let threshold = params
                .threshold
                .unwrap_or_else(|| ergodic::default_threshold(&boxes));
            Ok((
                render(config, ScanReport { kind, threshold, hits })?,
                ExitClass::Success,
            ))
        }
    }
}

/// Parse, dispatch, write, exit. The thin binary calls only this.
pub fn main_entry() -> i32 {
    let config = RunConfig::parse();
    match dispatch(&config) {
        Ok((doc, class)) => {
            let out = match &config.output {
                Some(path) => std::fs::write(path, doc.as_bytes()).map_err(Error::Io),
                None => std::io::stdout()
                    .write_all(doc.as_bytes())
                    .and_then(|_| std::io::stdout().write_all(b"\n"))
                    .map_err(Error::Io),
            };
            if let Err(e) = out {
                eprintln!("error: {e}");
                return 1;
            }
            class.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> RunConfig {
        RunConfig::parse_from(std::iter::once("sumset-dynamics").chain(args.iter().copied()))
    }

    #[test]
    fn straus_density_report() {
        let config = cfg(&["straus", "--primes", "5,13,29", "--density", "--window", "100000"]);
        let (doc, class) = dispatch(&config).unwrap();
        assert_eq!(class, ExitClass::Success);
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["result"]["density_bound"], "1023/1885");
        assert!(v["result"]["measured_density_f64"].as_f64().unwrap() > 0.5);
        assert_eq!(v["version"], 1);
        assert!(v["config"]["command"].is_object());
    }

    #[test]
    fn verify_exit_classes() {
        let dir = tempfile::tempdir().unwrap();
        let set_path = dir.path().join("odds.json");
        std::fs::write(
            &set_path,
            serde_json::to_string(&SetSpec::odds()).unwrap(),
        )
        .unwrap();
        let cert = cert::SumsetCertificate {
            version: 1,
            kind: cert::CertKind::ThmA,
            ell: 0,
            b: FiniteNatSet::new(vec![1, 3]).unwrap(),
            t: vec![0, 0],
            s: vec![],
            t_b: vec![],
            k_max: 2,
            window: 1000,
            verified: None,
            violation: None,
        };
        let cert_path = dir.path().join("cert.json");
        std::fs::write(&cert_path, cert.to_json()).unwrap();
        let config = cfg(&[
            "verify",
            "--cert",
            cert_path.to_str().unwrap(),
            "--set",
            set_path.to_str().unwrap(),
            "--window",
            "1000",
        ]);
        let (doc, class) = dispatch(&config).unwrap();
        assert_eq!(class, ExitClass::VerificationFailure);
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["result"]["status"], "violation");
        assert_eq!(v["result"]["violation"]["sum"], 4);
    }

    #[test]
    fn reports_are_reproducible() {
        let config = cfg(&["straus", "--primes", "5,13", "--density", "--window", "5000"]);
        let (a, _) = dispatch(&config).unwrap();
        let (b, _) = dispatch(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_csv_has_header_and_rows() {
        let config = cfg(&["nil", "orbit", "--s", "2", "--alpha", "1/7", "--n", "3"]);
        let (doc, _) = dispatch(&config).unwrap();
        let lines: Vec<&str> = doc.lines().collect();
        assert_eq!(lines[0], "n,x1,x2");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,0.142857"));
    }

    #[test]
    fn malformed_spec_is_an_operational_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        std::fs::write(&p, "{not json").unwrap();
        let config = cfg(&["density", "--set", p.to_str().unwrap()]);
        assert!(matches!(dispatch(&config), Err(Error::Malformed(_))));
    }
}
