//! Config-driven pipelines behind the command-line tool. Every artifact is
//! a pure function of the config and its inputs; timestamps go to a
//! `.meta.json` sidecar so the main JSON files are byte-reproducible.

use crate::config::{ExperimentConfig, Format, TestSpec};
use crate::correlation::{variance_series_with, CorrelationReport, SeriesOptions, DEFAULT_HORIZON};
use crate::error::{Error, Result};
use crate::fourier::{fit_constant, verify_condition, TailShape};
use crate::martingale::{
    chain_long_run_covariance, check_all, conditional_norms, d0_covariance, martingale_defect,
    verify_maximal_remainder, verify_remainder_bound, SummabilityVerdict,
};
use crate::orbit::{birkhoff_check, ergodicity_warning, read_ensemble, sample_paths, write_ensemble, PathEnsemble};
use crate::stats::{self, ReportBundle, Rule, TestReport, Verdict};
use crate::torus::classify;
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const ENSEMBLE_FILE: &str = "ensemble.tipl";
/// Ensembles with more values than this are not exported as CSV.
const CSV_EXPORT_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Correlate,
    Simulate,
    Test,
    Martingale,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Correlate => "correlate",
            Command::Simulate => "simulate",
            Command::Test => "test",
            Command::Martingale => "martingale",
            Command::Report => "report",
        }
    }
}

/// Exit status of a run: 0 pass, 1 fail, 3 inconclusive. Errors map to 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 3,
        }
    }

    fn from_str(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(Outcome::Pass),
            "fail" => Some(Outcome::Fail),
            "inconclusive" => Some(Outcome::Inconclusive),
            _ => None,
        }
    }
}

pub const USAGE_EXIT_CODE: i32 = 2;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub budget_mb: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub artifacts: Vec<PathBuf>,
    pub message: String,
}

struct Context {
    cfg: ExperimentConfig,
    hash: String,
    base_dir: PathBuf,
    out_dir: PathBuf,
    opts: RunOptions,
    artifacts: Vec<PathBuf>,
}

impl Context {
    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }

    fn write_json(&mut self, stem: &str, command: Command, outcome: Outcome, result: Value) -> Result<()> {
        let doc = json!({
            "command": command.name(),
            "config_hash": self.hash,
            "outcome": outcome,
            "result": result,
        });
        let path = self.out_dir.join(format!("{stem}.json"));
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        self.artifacts.push(path);
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = json!({
            "artifact": format!("{stem}.json"),
            "created_unix": created,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config": self.opts.config.display().to_string(),
            "jobs": self.opts.jobs,
            "budget_mb": self.opts.budget_mb,
        });
        fs::write(
            self.out_dir.join(format!("{stem}.meta.json")),
            serde_json::to_string_pretty(&meta)? + "\n",
        )?;
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, text)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn correlation_report(&self) -> Result<CorrelationReport> {
        let s = self.cfg.automorphism()?;
        let f = self.cfg.finite_observable(&self.base_dir)?;
        let horizon = self
            .cfg
            .correlation
            .as_ref()
            .and_then(|c| c.horizon)
            .unwrap_or(DEFAULT_HORIZON);
        variance_series_with(
            &f,
            &s,
            SeriesOptions {
                horizon,
                ..SeriesOptions::default()
            },
        )
    }
}

/// Run one subcommand.
pub fn run(cmd: Command, opts: RunOptions) -> Result<RunSummary> {
    let cfg = ExperimentConfig::load(&opts.config)?;
    let base_dir = opts
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = match &opts.output_dir {
        Some(d) => d.clone(),
        None => base_dir.join(&cfg.output.dir),
    };
    fs::create_dir_all(&out_dir)?;
    let mut ctx = Context {
        hash: cfg.hash(),
        cfg,
        base_dir,
        out_dir,
        opts: opts.clone(),
        artifacts: Vec::new(),
    };
    let body = |ctx: &mut Context| -> Result<(Outcome, String)> {
        match cmd {
            Command::Check => run_check(ctx),
            Command::Correlate => run_correlate(ctx),
            Command::Simulate => run_simulate(ctx),
            Command::Test => run_test(ctx),
            Command::Martingale => run_martingale(ctx),
            Command::Report => run_report(ctx),
        }
    };
    let (outcome, message) = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(|| body(&mut ctx))?,
        None => body(&mut ctx)?,
    };
    Ok(RunSummary {
        outcome,
        artifacts: ctx.artifacts,
        message,
    })
}

fn run_check(ctx: &mut Context) -> Result<(Outcome, String)> {
    let s = ctx.cfg.automorphism()?;
    let mut result = BTreeMap::new();
    let mut outcome = Outcome::Pass;
    let msg;
    match classify(&s) {
        Ok(c) => {
            msg = format!("ergodic = {}, hyperbolic = {}", c.ergodic, c.hyperbolic);
            result.insert("classification".to_string(), serde_json::to_value(&c)?);
        }
        Err(e @ Error::UndecidedHyperbolicity { .. }) => {
            outcome = Outcome::Inconclusive;
            msg = e.to_string();
            result.insert("classification_error".to_string(), json!(msg));
        }
        Err(e) => return Err(e),
    }
    result.insert("characteristic_polynomial".to_string(), json!(s.charpoly().to_string()));
    if let Some(cond) = ctx.cfg.conditions.clone() {
        let f = ctx.cfg.observable(&ctx.base_dir)?;
        let mut spec = ctx.cfg.condition_spec(&cond)?;
        let mut fitted = None;
        if cond.constant_r.is_none() && !matches!(spec.shape, TailShape::LeonovProduct { .. }) {
            let r = fit_constant(&f, &spec, 4096)?;
            if r > 0.0 {
                spec.constant_r = r;
            }
            fitted = Some(r);
        }
        let grid: Vec<BigUint> = cond.b_log2.iter().map(|&r| BigUint::from(1u32) << r).collect();
        let report = verify_condition(&f, &spec, &grid)?;
        result.insert(
            "condition".to_string(),
            json!({
                "spec": spec,
                "fitted_constant": fitted,
                "b_log2": cond.b_log2,
                "report": report,
                "holds_everywhere": report.all_hold(),
            }),
        );
    }
    ctx.write_json("check", Command::Check, outcome, serde_json::to_value(result)?)?;
    Ok((outcome, msg))
}

fn run_correlate(ctx: &mut Context) -> Result<(Outcome, String)> {
    let report = ctx.correlation_report()?;
    let outcome = if report.horizon_limited {
        Outcome::Inconclusive
    } else {
        Outcome::Pass
    };
    let msg = match report.sigma2 {
        Some(s2) => format!("sigma^2 = {s2}"),
        None => format!("Sigma = {:?}", report.sigma),
    };
    if ctx.wants(Format::Csv) {
        ctx.write_text("correlate.csv", &report.to_csv())?;
    }
    ctx.write_json("correlate", Command::Correlate, outcome, serde_json::to_value(&report)?)?;
    Ok((outcome, msg))
}

fn run_simulate(ctx: &mut Context) -> Result<(Outcome, String)> {
    let s = ctx.cfg.automorphism()?;
    let f = ctx.cfg.finite_observable(&ctx.base_dir)?;
    let mut sim = ctx.cfg.simulation_config()?;
    if let Some(b) = ctx.opts.budget_mb {
        sim.budget_mb = b;
    }
    let warning = ergodicity_warning(&s);
    let ens = sample_paths(&s, &f, &sim)?;
    let path = ctx.out_dir.join(ENSEMBLE_FILE);
    write_ensemble(&ens, std::io::BufWriter::new(fs::File::create(&path)?))?;
    ctx.artifacts.push(path);
    if ctx.wants(Format::Csv) && ens.raw().len() <= CSV_EXPORT_LIMIT {
        ctx.write_text("ensemble.csv", &ens.to_csv())?;
    }
    let result = json!({
        "meta": ens.meta,
        "ensemble_file": ENSEMBLE_FILE,
        "ergodicity_warning": warning,
    });
    ctx.write_json("simulate", Command::Simulate, Outcome::Pass, result)?;
    Ok((
        Outcome::Pass,
        format!(
            "{} paths of length {} written to {ENSEMBLE_FILE}",
            ens.paths(),
            ens.length()
        ),
    ))
}

fn load_ensemble(ctx: &Context) -> Result<PathEnsemble> {
    let path = ctx.out_dir.join(ENSEMBLE_FILE);
    if !path.exists() {
        return Err(Error::MissingArtifact(format!(
            "ensemble: {} not found; run `simulate` first",
            path.display()
        )));
    }
    let ens = read_ensemble(std::io::BufReader::new(fs::File::open(&path)?))?;
    let sim = ctx.cfg.simulation_config()?;
    let dim = ctx.cfg.automorphism()?.dim();
    let m = &ens.meta;
    if m.paths != sim.paths
        || m.length != sim.length
        || m.master_seed != sim.seed
        || m.modulus != sim.modulus
        || m.dim != dim
    {
        return Err(Error::MissingArtifact(format!(
            "ensemble matching the config: {} was produced with different settings; rerun `simulate`",
            path.display()
        )));
    }
    Ok(ens)
}

fn birkhoff_report(ens: &PathEnsemble, sigma: &[Vec<f64>]) -> Result<TestReport> {
    let s2 = (0..ens.components()).map(|c| sigma[c][c]).fold(0.0, f64::max);
    let b = birkhoff_check(ens, s2)?;
    let mut details = BTreeMap::new();
    details.insert("flagged_paths".to_string(), b.flagged_paths.len() as f64);
    Ok(TestReport {
        test_name: "birkhoff".into(),
        statistic: b.max_abs_mean,
        p_value: None,
        threshold: b.threshold,
        rule: Rule::StatisticAtMost,
        n_used: ens.length(),
        m_used: ens.paths(),
        reference: "ergodic average E f = 0".into(),
        verdict: if b.flagged_paths.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        details,
    })
}

fn inconclusive(name: &str, ens: &PathEnsemble, reason: &str) -> TestReport {
    TestReport {
        test_name: name.into(),
        statistic: f64::NAN,
        p_value: None,
        threshold: 0.0,
        rule: Rule::StatisticAtMost,
        n_used: ens.length(),
        m_used: ens.paths(),
        reference: reason.into(),
        verdict: Verdict::Inconclusive,
        details: BTreeMap::new(),
    }
}

fn default_tests(m: usize) -> Vec<TestSpec> {
    let mut t = vec![
        TestSpec::Clt { n: None, level: None },
        TestSpec::Donsker { n: None, level: None },
        TestSpec::Lil { slack: None },
        TestSpec::VarianceGrowth { se_multiplier: None },
        TestSpec::Birkhoff,
    ];
    if m > 1 {
        t.push(TestSpec::Covariance {
            n: None,
            se_multiplier: None,
        });
    }
    t
}

fn run_test(ctx: &mut Context) -> Result<(Outcome, String)> {
    let ens = load_ensemble(ctx)?;
    let corr = ctx.correlation_report()?;
    let sigma = corr.sigma.clone();
    let m = ens.components();
    let big_n = ens.length();
    let specs = if ctx.cfg.tests.is_empty() {
        default_tests(m)
    } else {
        ctx.cfg.tests.clone()
    };
    let mut reports = Vec::new();
    for spec in &specs {
        match spec {
            TestSpec::Clt { n, level } => {
                for c in 0..m {
                    let r = stats::clt_test_component(&ens, c, sigma[c][c], n.unwrap_or(big_n))?;
                    reports.push(retag(r, c, m, level.unwrap_or(stats::KS_LEVEL)));
                }
            }
            TestSpec::Donsker { n, level } => {
                for c in 0..m {
                    let r = stats::donsker_functionals_component(&ens, c, sigma[c][c], n.unwrap_or(big_n))?;
                    reports.push(retag(r, c, m, level.unwrap_or(stats::KS_LEVEL)));
                }
            }
            TestSpec::Lil { slack } => {
                for c in 0..m {
                    if big_n < 1 << 14 {
                        reports.push(inconclusive("lil", &ens, "LIL envelope needs N >= 16384"));
                        break;
                    }
                    let r = stats::lil_envelope_component(&ens, c, sigma[c][c])?;
                    reports.push(retag(r, c, m, 1.0 + slack.unwrap_or(stats::LIL_SLACK)));
                }
            }
            TestSpec::Covariance { n, se_multiplier } => {
                let r = stats::covariance_matrix_test(&ens, &sigma, n.unwrap_or(big_n))?;
                reports.push(r.with_threshold(se_multiplier.unwrap_or(stats::SE_MULTIPLIER)));
            }
            TestSpec::VarianceGrowth { se_multiplier } => {
                for c in 0..m {
                    let r = stats::variance_growth_component(&ens, c, &corr, &stats::VARIANCE_GROWTH_LAGS)?;
                    reports.push(retag(r, c, m, se_multiplier.unwrap_or(stats::SE_MULTIPLIER)));
                }
            }
            TestSpec::Birkhoff => {
                if big_n < 1 << 10 {
                    reports.push(inconclusive("birkhoff", &ens, "Birkhoff check needs N >= 1024"));
                } else {
                    reports.push(birkhoff_report(&ens, &sigma)?);
                }
            }
        }
    }
    let bundle = ReportBundle::new(reports);
    let outcome = bundle_outcome(&bundle);
    if ctx.wants(Format::Csv) {
        ctx.write_text("tests.csv", &bundle.to_csv())?;
    }
    let passed = bundle.reports.iter().filter(|r| r.passed()).count();
    let msg = format!("{passed}/{} tests passed", bundle.reports.len());
    ctx.write_json("tests", Command::Test, outcome, serde_json::to_value(&bundle)?)?;
    Ok((outcome, msg))
}

fn retag(r: TestReport, c: usize, m: usize, threshold: f64) -> TestReport {
    let mut r = r.with_threshold(threshold);
    if m > 1 {
        r.test_name = format!("{}[{c}]", r.test_name);
    }
    r
}

fn bundle_outcome(b: &ReportBundle) -> Outcome {
    b.reports
        .iter()
        .map(|r| match r.verdict {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::Inconclusive | Verdict::Degenerate => Outcome::Inconclusive,
        })
        .max()
        .unwrap_or(Outcome::Inconclusive)
}

fn run_martingale(ctx: &mut Context) -> Result<(Outcome, String)> {
    let model = ctx.cfg.markov_model()?;
    let mc = ctx.cfg.martingale.clone().expect("validated");
    let table = conditional_norms(&model, mc.p, mc.max_lag)?;
    let defect = martingale_defect(&model, &table.d0);
    let d0_cov = d0_covariance(&model, &table.d0);
    let chain_cov = chain_long_run_covariance(&model);
    let cov_gap = d0_cov
        .iter()
        .flatten()
        .zip(chain_cov.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let conditions = check_all(&table)?;
    let grid: Vec<usize> = (mc.grid_log2[0]..=mc.grid_log2[1]).map(|k| 1usize << k).collect();
    let bound = verify_remainder_bound(&model, mc.p, &grid)?;
    let maximal = verify_maximal_remainder(&model, mc.p, &grid, mc.paths, mc.seed)?;

    let exact_ok = defect < 1e-12 && cov_gap < 1e-8 && bound.enumeration.iter().all(|e| e.consistent());
    let mut outcome = if exact_ok && bound.holds && maximal.decreasing {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    if outcome == Outcome::Pass && conditions.iter().any(|c| c.verdict != SummabilityVerdict::Converges) {
        outcome = Outcome::Inconclusive;
    }
    if ctx.wants(Format::Csv) {
        let mut csv = String::from("lag,proj_forward,proj_backward,cond_mean,past_residual\n");
        for l in 0..=table.max_lag {
            csv.push_str(&format!(
                "{l},{},{},{},{}\n",
                table.forward[l], table.backward[l], table.conditional_mean[l], table.past_residual[l]
            ));
        }
        ctx.write_text("martingale.csv", &csv)?;
    }
    let result = json!({
        "model": model,
        "projection_table": table,
        "martingale_defect": defect,
        "d0_covariance": d0_cov,
        "long_run_covariance": chain_cov,
        "conditions": conditions,
        "remainder_bound": bound,
        "maximal_remainder": maximal,
    });
    ctx.write_json("martingale", Command::Martingale, outcome, result)?;
    Ok((
        outcome,
        format!(
            "defect {defect:.1e}, fitted constant {:.4}, maximal ratio decreasing: {}",
            bound.fitted_constant, maximal.decreasing
        ),
    ))
}

fn summarize(command: &str, result: &Value) -> Vec<String> {
    let mut lines = Vec::new();
    match command {
        "check" => {
            if let Some(c) = result.get("classification") {
                lines.push(format!("- ergodic: {}, hyperbolic: {}", c["ergodic"], c["hyperbolic"]));
                if !c["cyclotomic_witness"].is_null() {
                    lines.push(format!("- cyclotomic witness: Phi_{}", c["cyclotomic_witness"]));
                }
            }
            lines.push(format!(
                "- characteristic polynomial: {}",
                result["characteristic_polynomial"]
            ));
            if let Some(c) = result.get("condition") {
                lines.push(format!(
                    "- tail condition holds on the whole grid: {} (fitted exponent {})",
                    c["holds_everywhere"], c["report"]["fitted_exponent"]
                ));
            }
        }
        "correlate" => {
            lines.push(format!("- sigma^2: {}", result["sigma2"]));
            lines.push(format!("- Sigma: {}", result["Sigma"]));
            lines.push(format!(
                "- correlations vanish from lag {} (certified: {})",
                result["termination_n0"], result["certified"]
            ));
        }
        "simulate" => {
            let m = &result["meta"];
            lines.push(format!(
                "- {} paths, length {}, modulus {}, seed {}",
                m["paths"], m["length"], m["modulus"], m["master_seed"]
            ));
            if !result["ergodicity_warning"].is_null() {
                lines.push(format!("- warning: {}", result["ergodicity_warning"]));
            }
        }
        "test" => {
            if let Some(rs) = result["reports"].as_array() {
                lines.push("| test | statistic | p-value | threshold | verdict |".into());
                lines.push("|---|---|---|---|---|".into());
                for r in rs {
                    lines.push(format!(
                        "| {} | {} | {} | {} | {} |",
                        r["test_name"].as_str().unwrap_or("?"),
                        r["statistic"],
                        r["p_value"],
                        r["threshold"],
                        r["verdict"].as_str().unwrap_or("?")
                    ));
                }
                lines.push(String::new());
                lines.push(format!("_{}_", result["header"].as_str().unwrap_or("")));
            }
        }
        "martingale" => {
            lines.push(format!("- max |E(d_0 | past)|: {}", result["martingale_defect"]));
            lines.push(format!(
                "- remainder bound constant: {}",
                result["remainder_bound"]["fitted_constant"]
            ));
            lines.push(format!(
                "- maximal remainder ratios: {}",
                result["maximal_remainder"]["ratios"]
            ));
            if let Some(cs) = result["conditions"].as_array() {
                for c in cs {
                    lines.push(format!(
                        "- {}: {}",
                        c["condition"].as_str().unwrap_or("?"),
                        c["verdict"].as_str().unwrap_or("?")
                    ));
                }
            }
        }
        _ => {}
    }
    lines
}

fn run_report(ctx: &mut Context) -> Result<(Outcome, String)> {
    let mut files: Vec<PathBuf> = fs::read_dir(&ctx.out_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".meta.json")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::MissingArtifact(format!(
            "reports: no JSON artifacts in {}",
            ctx.out_dir.display()
        )));
    }
    let mut out = String::from("# Experiment digest\n\n");
    out.push_str(&format!("config hash: `{}`\n\n", ctx.hash));
    let mut overall = Outcome::Pass;
    for f in &files {
        let doc: Value = serde_json::from_str(&fs::read_to_string(f)?)?;
        let command = doc["command"].as_str().unwrap_or("unknown");
        let outcome = doc["outcome"]
            .as_str()
            .and_then(Outcome::from_str)
            .unwrap_or(Outcome::Inconclusive);
        overall = overall.max(outcome);
        let stale = doc["config_hash"].as_str() != Some(ctx.hash.as_str());
        out.push_str(&format!(
            "## {command} ({})\n\noutcome: **{}**{}\n\n",
            f.file_name().and_then(|n| n.to_str()).unwrap_or(""),
            doc["outcome"].as_str().unwrap_or("?"),
            if stale {
                " (produced with a different config)"
            } else {
                ""
            }
        ));
        for line in summarize(command, &doc["result"]) {
            out.push_str(&line);
            out.push('\n');
        }
        out.push('\n');
    }
    ctx.write_text("report.md", &out)?;
    Ok((overall, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_ordering_and_codes() {
        assert!(Outcome::Fail > Outcome::Inconclusive && Outcome::Inconclusive > Outcome::Pass);
        assert_eq!(Outcome::Pass.exit_code(), 0);
        assert_eq!(Outcome::Fail.exit_code(), 1);
        assert_eq!(Outcome::Inconclusive.exit_code(), 3);
    }
}
