//! Command-line plumbing: configuration, replica fan-out, the suites and
//! the on-disk layout of a run.
//!
//! A run writes, under its output directory:
//!
//! ```text
//! config.toml               the resolved configuration
//! manifest.json             digest, version, seed, per-claim verdicts
//! timing.txt                wall time per suite (the only nondeterministic file)
//! <suite>/reports.json      full reports
//! <suite>/report.txt        human-readable table
//! <suite>/claims.csv        one row per claim
//! plots/<figure>.csv        tidy data for external plotting
//! ```

pub mod config;
pub mod plot;
pub mod replicate;
pub mod suites;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verification::{format_number, render_text, VerificationReport};
use config::{hex_digest, ExperimentConfig, Suite};

/// Default SubCRT experiment used when no configuration file is given.
pub const DEFAULT_CONFIG: &str = include_str!("../../../../configs/subcrt.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub suite: Suite,
    pub claim: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub replicas: usize,
    pub suites: Vec<Suite>,
    pub claims: Vec<ClaimVerdict>,
    pub all_pass: bool,
}

#[derive(Debug)]
pub struct SuiteRun {
    pub suite: Suite,
    pub reports: Vec<VerificationReport>,
    pub runtime: Duration,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub suites: Vec<SuiteRun>,
    pub dir: PathBuf,
}

impl RunOutcome {
    pub fn reports(&self) -> impl Iterator<Item = &VerificationReport> {
        self.suites.iter().flat_map(|s| &s.reports)
    }

    pub fn all_pass(&self) -> bool {
        self.manifest.all_pass
    }
}

/// Runs one suite. A suite-level error becomes a single failing report
/// rather than aborting the whole run.
pub fn run_one(suite: Suite, cfg: &ExperimentConfig, workers: usize) -> SuiteRun {
    let start = Instant::now();
    let digest = cfg.digest().unwrap_or_default();
    let mut reports = suites::run_suite(suite, cfg, workers).unwrap_or_else(|e| {
        vec![VerificationReport::new(
            &format!("{}.error", suite.name()),
            "the suite could not be completed",
            f64::NAN,
            false,
        )
        .note(e.to_string())]
    });
    let runtime = start.elapsed();
    for r in &mut reports {
        r.inputs_digest = hex_digest(format!("{digest}:{}:{}", suite.name(), r.claim).as_bytes());
        r.runtime = Some(runtime);
    }
    SuiteRun {
        suite,
        reports,
        runtime,
    }
}

/// Runs `suite` (expanded) and writes the run directory `out`.
pub fn run(cfg: &ExperimentConfig, suite: Suite, workers: usize, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let suites: Vec<SuiteRun> = suite.expand().into_iter().map(|s| run_one(s, cfg, workers)).collect();
    let claims: Vec<ClaimVerdict> = suites
        .iter()
        .flat_map(|s| {
            s.reports.iter().map(|r| ClaimVerdict {
                suite: s.suite,
                claim: r.claim.clone(),
                pass: r.pass,
            })
        })
        .collect();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        config_digest: cfg.digest()?,
        master_seed: cfg.noise.master_seed,
        replicas: cfg.noise.replicas,
        suites: suites.iter().map(|s| s.suite).collect(),
        all_pass: claims.iter().all(|c| c.pass),
        claims,
    };
    let outcome = RunOutcome {
        manifest,
        suites,
        dir: out.to_path_buf(),
    };
    write_run(&outcome, cfg)?;
    Ok(outcome)
}

fn write_run(run: &RunOutcome, cfg: &ExperimentConfig) -> Result<()> {
    let dir = &run.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    std::fs::write(dir.join("manifest.json"), to_json(&run.manifest)? + "\n")?;
    let mut timing = String::new();
    for s in &run.suites {
        let _ = writeln!(timing, "{} {:.3}s", s.suite.name(), s.runtime.as_secs_f64());
        write_suite(&dir.join(s.suite.name()), &s.reports)?;
    }
    std::fs::write(dir.join("timing.txt"), timing)?;
    let all: Vec<VerificationReport> = run.reports().cloned().collect();
    plot::emit_plot_data(&all, &dir.join("plots"))?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Config(format!("serialisation failed: {e}")))
}

pub fn write_suite(dir: &Path, reports: &[VerificationReport]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("reports.json"), to_json(&reports)? + "\n")?;
    // runtimes go to timing.txt so that this file is reproducible too
    let timeless: Vec<VerificationReport> = reports
        .iter()
        .cloned()
        .map(|mut r| {
            r.runtime = None;
            r
        })
        .collect();
    std::fs::write(dir.join("report.txt"), render_text(&timeless))?;
    std::fs::write(dir.join("claims.csv"), claims_csv(reports))?;
    Ok(())
}

/// `claim,estimate,ci_lo,ci_hi,bound,tolerance,replicas,pass`
pub fn claims_csv(reports: &[VerificationReport]) -> String {
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    let mut out = String::from("claim,estimate,ci_lo,ci_hi,bound,tolerance,replicas,pass\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.claim,
            format_number(r.estimate),
            opt(r.interval.as_ref().map(|i| i.lo)),
            opt(r.interval.as_ref().map(|i| i.hi)),
            opt(r.bound),
            opt(r.tolerance),
            r.replicas,
            r.pass
        );
    }
    out
}

/// Reads every `<suite>/reports.json` below a run directory, in manifest
/// order when a manifest is present and directory order otherwise.
pub fn load_reports(dir: &Path) -> Result<Vec<VerificationReport>> {
    let read = |path: PathBuf| -> Result<Vec<VerificationReport>> {
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    };
    let manifest = dir.join("manifest.json");
    if manifest.exists() {
        let m: Manifest = serde_json::from_str(&std::fs::read_to_string(&manifest)?)
            .map_err(|e| Error::Config(format!("{}: {e}", manifest.display())))?;
        let mut out = Vec::new();
        for s in m.suites {
            out.extend(read(dir.join(s.name()).join("reports.json"))?);
        }
        return Ok(out);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path().join("reports.json")))
        .filter(|p| p.exists())
        .collect();
    if dir.join("reports.json").exists() {
        paths.push(dir.join("reports.json"));
    }
    if paths.is_empty() {
        return Err(Error::MissingReport(format!("no reports.json under {}", dir.display())));
    }
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        out.extend(read(p)?);
    }
    Ok(out)
}
