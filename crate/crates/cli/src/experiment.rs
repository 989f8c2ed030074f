//! Monte Carlo experiments and the files they write.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use commsir::analytic::limit_quantities;
use commsir::approx::{fixed_m_mixture, global_normal};
use commsir::embed::run_embedded;
use commsir::replicate::run_replicates;
use commsir::sim::run_multi;
use commsir::stats::{equal_width_edges, summarize, Histogram};
use commsir::{Condition, ConditionalSummary, Field, LimitQuantities, ModelParams, Outcome};
use serde::Serialize;

use crate::config::{Engine, ExperimentConfig};
use crate::error::{CliError, Result};

/// Points in each overlay curve.
pub const OVERLAY_POINTS: usize = 400;

/// Runs all replicates in index order.
pub fn simulate(config: &ExperimentConfig) -> Result<Vec<Outcome>> {
    let params = config.validate()?;
    let runs = match config.engine {
        Engine::Direct => {
            run_replicates(config.master_seed, config.replicates, config.workers, |_, rng| Ok(run_multi(&params, rng)))?
        }
        Engine::Embedding => {
            run_replicates(config.master_seed, config.replicates, config.workers, |_, rng| run_embedded(&params, rng))?
        }
    };
    Ok(runs.into_iter().collect::<commsir::Result<Vec<_>>>()?)
}

pub fn outcomes_csv(outcomes: &[Outcome]) -> String {
    let mut s = String::from("replicate,Z_T,Zhat_C,Z_C,A_T,community0_size,community0_major,global_epidemic\n");
    for (i, o) in outcomes.iter().enumerate() {
        writeln!(
            s,
            "{i},{},{},{},{},{},{},{}",
            o.z_t,
            o.zhat_c,
            o.z_c,
            o.a_t,
            o.community_sizes.first().copied().unwrap_or(0),
            o.community0_major,
            o.global_epidemic
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub total: u64,
    pub condition: Condition,
    pub conditioned_count: u64,
    pub summaries: Vec<ConditionalSummary>,
}

pub fn summary(outcomes: &[Outcome], condition: Condition) -> Summary {
    let conditions =
        if condition == Condition::None { vec![Condition::None] } else { vec![Condition::None, condition] };
    let summaries = conditions
        .iter()
        .flat_map(|&c| Field::ALL.iter().filter_map(move |&f| summarize(outcomes, f, c).ok()))
        .collect();
    Summary {
        total: outcomes.len() as u64,
        condition,
        conditioned_count: outcomes.iter().filter(|o| condition.holds(o)).count() as u64,
        summaries,
    }
}

/// Histogram of conditioned `Z_T` over equal-width bins spanning the sample.
pub fn histogram(outcomes: &[Outcome], condition: Condition, bins: usize) -> Option<Histogram> {
    let sample: Vec<f64> = outcomes.iter().filter(|o| condition.holds(o)).map(|o| o.z_t as f64).collect();
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if sample.is_empty() {
        return None;
    }
    // pad a degenerate range so every bin has positive width
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    Some(Histogram::new(&sample, &equal_width_edges(lo, hi, bins)))
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("bin_left,bin_right,count,empirical_density\n");
    for ((w, c), d) in h.edges.windows(2).zip(&h.counts).zip(h.densities()) {
        writeln!(s, "{},{},{c},{d}", w[0], w[1]).unwrap();
    }
    s
}

/// `(x, pdf)` of `f` on an even grid over `[lo, hi]`.
pub fn overlay_csv(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> String {
    let mut s = String::from("x,pdf\n");
    for i in 0..OVERLAY_POINTS {
        let x = lo + (hi - lo) * i as f64 / (OVERLAY_POINTS - 1) as f64;
        writeln!(s, "{x},{}", f(x)).unwrap();
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsReport {
    #[serde(flatten)]
    pub limits: LimitQuantities,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rf: Option<f64>,
}

pub fn limits_report(params: &ModelParams) -> Result<LimitsReport> {
    let limits = limit_quantities(&params.period, params.lambda_w(), params.lambda_g())?;
    let (m, p_rf) = if params.m >= 1 { (Some(params.m), Some(limits.p_rf(params.m)?)) } else { (None, None) };
    Ok(LimitsReport { limits, m, p_rf })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub outcomes: Vec<Outcome>,
    pub summary: Summary,
}

/// Simulates and writes `outcomes.csv`, `summary.json`, `histogram.csv`,
/// `limits.json` (when `λ_G > 0`) and, where the approximations apply, `overlay_mixture.csv`
/// and `overlay_normal.csv` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Artifacts> {
    let params = config.validate()?;
    let dir = &config.outputs;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let outcomes = simulate(config)?;
    let summary = summary(&outcomes, config.condition);
    let mut files =
        vec![write(dir, "outcomes.csv", &outcomes_csv(&outcomes))?, write(dir, "summary.json", &to_json(&summary))?];

    // the limit theory needs global contacts
    let report = if params.lambda_g() > 0.0 { Some(limits_report(&params)?) } else { None };
    if let Some(r) = &report {
        files.push(write(dir, "limits.json", &to_json(r))?);
    }

    if let Some(h) = histogram(&outcomes, config.condition, config.bins) {
        files.push(write(dir, "histogram.csv", &histogram_csv(&h))?);
        let (lo, hi) = (h.edges[0], h.edges[h.edges.len() - 1]);
        if let Some(q) = report.as_ref().map(|r| &r.limits) {
            if let Ok(mix) = fixed_m_mixture(params.n, params.m, q) {
                files.push(write(dir, "overlay_mixture.csv", &overlay_csv(lo, hi, |x| mix.pdf(x)))?);
            }
            if q.r_star > 1.0 {
                if let Ok(g) = global_normal(params.n, params.m, q) {
                    files.push(write(dir, "overlay_normal.csv", &overlay_csv(lo, hi, |x| g.total_size_pdf(x)))?);
                }
            }
        }
    }
    Ok(Artifacts { files, outcomes, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ParamsConfig;
    use commsir::InfectiousPeriod;

    fn config(dir: &Path, m: usize, lambda_g: f64, replicates: u64) -> ExperimentConfig {
        ExperimentConfig {
            params: ParamsConfig {
                n: 50,
                m,
                lambda_w: Some(2.0),
                lambda_g: Some(lambda_g),
                beta_w: None,
                beta_g: None,
                period: InfectiousPeriod::exponential(1.0).unwrap(),
                large_outbreak_threshold: None,
                global_threshold: None,
            },
            replicates,
            master_seed: 11,
            workers: 1,
            condition: Condition::Community0Major,
            outputs: dir.to_path_buf(),
            engine: Engine::Direct,
            bins: 10,
        }
    }

    #[test]
    fn single_replicate_without_global_contacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path(), 3, 0.0, 1);
        c.condition = Condition::None;
        let art = run_experiment(&c).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("outcomes.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(art.outcomes[0].zhat_c, 1);
        assert!(!dir.path().join("limits.json").exists());
        assert!(dir.path().join("histogram.csv").exists());
    }

    #[test]
    fn writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let art = run_experiment(&config(dir.path(), 5, 6.0, 200)).unwrap();
        for name in [
            "outcomes.csv",
            "summary.json",
            "histogram.csv",
            "limits.json",
            "overlay_mixture.csv",
            "overlay_normal.csv",
        ] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        assert_eq!(art.files.len(), 6);
        let hist = std::fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
        assert_eq!(hist.lines().count(), 11);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["total"], 200);
        assert!(summary["conditioned_count"].as_u64().unwrap() <= 200);
    }

    #[test]
    fn worker_count_does_not_change_outcomes() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path(), 4, 6.0, 300);
        let one = outcomes_csv(&simulate(&c).unwrap());
        c.workers = 4;
        assert_eq!(one, outcomes_csv(&simulate(&c).unwrap()));
        c.engine = Engine::Embedding;
        let a = outcomes_csv(&simulate(&c).unwrap());
        c.workers = 1;
        assert_eq!(a, outcomes_csv(&simulate(&c).unwrap()));
    }
}
