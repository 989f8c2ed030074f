//! Checks of simulated outcomes against the limit theory.

use std::fmt::Write as _;

use commsir::analytic::{self, sigma_n_matrix};
use commsir::approx::{fixed_m_mixture, minor_outbreak_pmf};
use commsir::reedfrost::rf_pmf;
use commsir::stats::{binned_tv, discrete_tv, sample_edges, summarize_by};
use commsir::{Condition, LimitQuantities, ModelParams, Outcome};
use serde::Serialize;

use crate::error::Result;

pub const TV_RF: f64 = 0.05;
pub const TV_MIXTURE: f64 = 0.10;
pub const TV_BOREL: f64 = 0.05;
pub const GLOBAL_MEAN_TOL: f64 = 0.01;
pub const GLOBAL_VAR_REL: f64 = 0.25;
pub const SINGLE_Z_SCORE: f64 = 3.0;
pub const SINGLE_MEAN_TOL: f64 = 0.005;
pub const SINGLE_VAR_REL: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    /// Replicates the metric was computed from.
    pub count: u64,
    pub pass: bool,
}

impl Check {
    fn at_most(metric: &str, value: f64, threshold: f64, count: u64) -> Self {
        Self { metric: metric.into(), value, threshold, count, pass: value <= threshold }
    }
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut s = String::from("metric,value,threshold,pass\n");
    for c in checks {
        writeln!(s, "{},{},{},{}", c.metric, c.value, c.threshold, c.pass).unwrap();
    }
    s
}

/// `P(Z = k)` on `0..=m+1` for the Reed-Frost law of the number of major communities.
fn rf_on_zero_based(m: usize, p: f64) -> Result<Vec<f64>> {
    let pmf = rf_pmf(m, p)?;
    Ok(std::iter::once(0.0).chain(pmf.iter().map(|(_, w)| w)).collect())
}

/// TV against a pmf that may leave mass beyond its support; the missing
/// mass is counted as unmatched.
fn tv_with_tail(sample: &[usize], pmf: &[f64]) -> Result<f64> {
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    Ok((discrete_tv(sample, pmf)? + 0.5 * tail).min(1.0))
}

/// Single community (`m = 0`): major-outbreak probability, and the
/// conditional mean and variance of `Z/n` given a major outbreak.
pub fn single_community(params: &ModelParams, outcomes: &[Outcome]) -> Result<Vec<Check>> {
    let n = params.n as f64;
    let lambda_w = params.lambda_w();
    let (mu_i, sigma2_i) = params.period.moments();
    let pi_w = analytic::pi_w(&params.period, lambda_w)?;
    let z_inf = analytic::z_inf(mu_i * lambda_w);
    let total = outcomes.len() as u64;
    let major = summarize_by(outcomes, |o| o.community0_major as u8 as f64, Condition::None)?;
    let z_score = (major.mean - (1.0 - pi_w)).abs() / major.std_error.max(f64::MIN_POSITIVE);
    let mut checks = vec![Check::at_most("major_probability_z_score", z_score, SINGLE_Z_SCORE, total)];
    if mu_i * lambda_w > 1.0 {
        let sigma2_w = analytic::sigma2_w(lambda_w, mu_i, sigma2_i, z_inf)?;
        let size = summarize_by(outcomes, |o| o.z_t as f64 / n, Condition::Community0Major)?;
        checks.push(Check::at_most(
            "major_mean_fraction_error",
            (size.mean - z_inf).abs(),
            SINGLE_MEAN_TOL,
            size.count,
        ));
        checks.push(Check::at_most(
            "major_scaled_variance_rel_error",
            (n * size.variance / sigma2_w - 1.0).abs(),
            SINGLE_VAR_REL,
            size.count,
        ));
    }
    Ok(checks)
}

/// Fixed `m`, given a major outbreak in community 0: the law of `Z_C`
/// against Reed-Frost and the binned law of `Z_T` against the normal mixture.
pub fn community0_major(
    params: &ModelParams,
    q: &LimitQuantities,
    outcomes: &[Outcome],
    bins: usize,
) -> Result<Vec<Check>> {
    let major: Vec<&Outcome> = outcomes.iter().filter(|o| o.community0_major).collect();
    let count = major.len() as u64;
    if major.is_empty() {
        return Err(commsir::Error::NoConditionedReplicates("community0_major".into()).into());
    }
    let z_c: Vec<usize> = major.iter().map(|o| o.z_c).collect();
    let tv_rf = tv_with_tail(&z_c, &rf_on_zero_based(params.m, q.p_rf(params.m)?)?)?;

    let z_t: Vec<f64> = major.iter().map(|o| o.z_t as f64).collect();
    let mix = fixed_m_mixture(params.n, params.m, q)?;
    let tv_mix = binned_tv(&z_t, |x| mix.cdf(x), &sample_edges(&z_t, bins))?.tv;
    Ok(vec![
        Check::at_most("tv_major_communities_vs_reed_frost", tv_rf, TV_RF, count),
        Check::at_most("binned_tv_total_size_vs_mixture", tv_mix, TV_MIXTURE, count),
    ])
}

/// Given a global epidemic: law-of-large-numbers centring of `(Z̄_C, Z̃_T, Ã)`
/// and the scaled variance of `Z̃_T`.
pub fn global_epidemic(params: &ModelParams, q: &LimitQuantities, outcomes: &[Outcome]) -> Result<Vec<Check>> {
    let m = params.m as f64;
    let nm = (params.n * params.m) as f64;
    let z = summarize_by(outcomes, |o| o.z_t as f64 / nm, Condition::GlobalEpidemic)?;
    let x = summarize_by(outcomes, |o| o.z_c as f64 / m, Condition::GlobalEpidemic)?;
    let a = summarize_by(outcomes, |o| o.a_t / nm, Condition::GlobalEpidemic)?;
    let sigma = sigma_n_matrix(q)?;
    Ok(vec![
        Check::at_most("global_mean_size_error", (z.mean - q.z_tau).abs(), GLOBAL_MEAN_TOL, z.count),
        Check::at_most(
            "global_scaled_variance_rel_error",
            (m * z.variance / sigma[1][1] - 1.0).abs(),
            GLOBAL_VAR_REL,
            z.count,
        ),
        Check::at_most("global_mean_major_fraction_error", (x.mean - q.x_tau).abs(), GLOBAL_MEAN_TOL, x.count),
        Check::at_most("global_mean_severity_error", (a.mean - q.tau).abs(), GLOBAL_MEAN_TOL, a.count),
    ])
}

/// Without a global epidemic: the number of major communities against the
/// extinction-conditioned Borel law.
pub fn not_global(params: &ModelParams, q: &LimitQuantities, outcomes: &[Outcome]) -> Result<Vec<Check>> {
    let z_c: Vec<usize> = outcomes.iter().filter(|o| !o.global_epidemic).map(|o| o.z_c).collect();
    if z_c.is_empty() {
        return Err(commsir::Error::NoConditionedReplicates("not_global".into()).into());
    }
    let pmf = minor_outbreak_pmf(q, params.m + 1, true)?;
    let tv = tv_with_tail(&z_c, &pmf)?;
    Ok(vec![Check::at_most("tv_major_communities_vs_borel", tv, TV_BOREL, z_c.len() as u64)])
}

/// All checks that apply to `condition` (every applicable one for `None`).
/// Needs `m >= 1`; see [`single_community`] otherwise.
pub fn compare(
    params: &ModelParams,
    q: &LimitQuantities,
    outcomes: &[Outcome],
    condition: Condition,
    bins: usize,
) -> Result<Vec<Check>> {
    let wanted: &[Condition] = match condition {
        Condition::None => &[Condition::Community0Major, Condition::GlobalEpidemic, Condition::NotGlobal],
        Condition::Community0Major => &[Condition::Community0Major],
        Condition::GlobalEpidemic => &[Condition::GlobalEpidemic],
        Condition::NotGlobal => &[Condition::NotGlobal],
    };
    let mut checks = Vec::new();
    for &c in wanted {
        let applies = match c {
            Condition::Community0Major => q.r0 > 1.0,
            Condition::GlobalEpidemic => q.r_star > 1.0 && params.m >= 2,
            _ => params.m >= 2,
        };
        if !applies && condition == Condition::None {
            continue;
        }
        checks.extend(match c {
            Condition::Community0Major => community0_major(params, q, outcomes, bins)?,
            Condition::GlobalEpidemic => global_epidemic(params, q, outcomes)?,
            Condition::NotGlobal => not_global(params, q, outcomes)?,
            Condition::None => unreachable!(),
        });
    }
    Ok(checks)
}
