//! Subcommand bodies. Each returns the text it would print.

use std::fmt::Write as _;
use std::path::Path;

use commsir::analytic::limit_quantities;
use commsir::approx::{fixed_m_mixture, global_normal};
use commsir::embed::estimate_curves;
use commsir::reedfrost::{rf_brute_pmf, rf_pmf};
use commsir::{InfectiousPeriod, ModelParams};
use serde::Serialize;

use crate::compare::{self, Check};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{limits_report, simulate, LimitsReport, OVERLAY_POINTS};

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn limits(period: &InfectiousPeriod, lambda_w: f64, lambda_g: f64, m: Option<usize>) -> Result<String> {
    let limits = limit_quantities(period, lambda_w, lambda_g)?;
    let p_rf = m.map(|m| limits.p_rf(m)).transpose()?;
    Ok(json(&LimitsReport { limits, m, p_rf }))
}

/// `k,probability` for `k = 1..=m+1`.
pub fn rf(m: usize, p: f64, brute: bool) -> Result<String> {
    let pmf = if brute { rf_brute_pmf(m, p)? } else { rf_pmf(m, p)? };
    let mut s = String::from("k,probability\n");
    for (k, w) in pmf.iter() {
        writeln!(s, "{k},{w}").unwrap();
    }
    Ok(s)
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Validation(format!("grid: expected start:stop:step, got '{spec}'"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(start >= 0.0 && stop >= start && step > 0.0) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Curve table as CSV with a `# {"tau_hat": ...}` footer line.
pub fn curves(config: &ExperimentConfig, grid: &[f64]) -> Result<String> {
    let params = config.validate()?;
    let table = estimate_curves(&params, grid, config.replicates, config.master_seed, config.workers)?;
    let mut s = String::from("t,x,z,a,se_x,se_z,se_a\n");
    for p in &table.points {
        writeln!(s, "{},{},{},{},{},{},{}", p.t, p.x, p.z, p.a, p.se_x, p.se_z, p.se_a).unwrap();
    }
    writeln!(s, "# {}", serde_json::json!({ "tau_hat": table.tau_hat, "replicates": config.replicates })).unwrap();
    Ok(s)
}

/// Both approximating densities of `Z_T` on a grid over `[0, n(m+1)]`.
/// A column is empty where its approximation does not apply.
pub fn approx(params: &ModelParams) -> Result<String> {
    if params.m == 0 {
        return Err(CliError::Validation("params.m: the approximations need m >= 1".into()));
    }
    let q = limit_quantities(&params.period, params.lambda_w(), params.lambda_g())?;
    let mix = fixed_m_mixture(params.n, params.m, &q).ok();
    let normal = if q.r_star > 1.0 { global_normal(params.n, params.m, &q).ok() } else { None };
    if mix.is_none() && normal.is_none() {
        return Err(CliError::Validation("params: neither approximation applies (needs R0 > 1 and m >= 1)".into()));
    }
    let hi = params.population() as f64;
    let mut s = String::from("x,mixture_pdf,normal_pdf\n");
    for i in 0..OVERLAY_POINTS {
        let x = hi * i as f64 / (OVERLAY_POINTS - 1) as f64;
        let a = mix.as_ref().map(|d| d.pdf(x).to_string()).unwrap_or_default();
        let b = normal.as_ref().map(|g| g.total_size_pdf(x).to_string()).unwrap_or_default();
        writeln!(s, "{x},{a},{b}").unwrap();
    }
    Ok(s)
}

/// Simulates and checks against the theory; writes `comparison.csv` when
/// `out` is given.
pub fn compare(config: &ExperimentConfig, out: Option<&Path>) -> Result<(String, Vec<Check>)> {
    let params = config.validate()?;
    let checks = if params.m == 0 {
        compare::single_community(&params, &simulate(config)?)?
    } else {
        let report = limits_report(&params)?;
        compare::compare(&params, &report.limits, &simulate(config)?, config.condition, config.bins)?
    };
    let csv = compare::checks_csv(&checks);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("comparison.csv");
        std::fs::write(&path, &csv).map_err(|e| CliError::io(&path, e))?;
    }
    Ok((csv, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_baseline_exp() {
        let out = limits(&InfectiousPeriod::exponential(1.0).unwrap(), 2.0, 6.0, None).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["r0"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert!((v["pi_w"].as_f64().unwrap() - 0.5).abs() < 1e-10);
        assert!((v["z_inf"].as_f64().unwrap() - 0.7968).abs() < 1e-4);
        assert!((v["r_star"].as_f64().unwrap() - 2.390).abs() < 1e-3);
        assert!((v["z_tau"].as_f64().unwrap() - 0.699).abs() < 1e-3);
        assert!(v.get("p_rf").is_none());
    }

    #[test]
    fn limits_subcritical() {
        let out = limits(&InfectiousPeriod::exponential(1.0).unwrap(), 0.5, 6.0, Some(20)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pi_w"].as_f64().unwrap(), 1.0);
        assert_eq!(v["r_star"].as_f64().unwrap(), 0.0);
        assert_eq!(v["tau"].as_f64().unwrap(), 0.0);
        assert_eq!(v["p_rf"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn rf_table_sums_to_one() {
        let s = rf(5, 0.3, false).unwrap();
        let total: f64 = s.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(s.lines().count(), 7);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0.5:0.5:1").unwrap(), vec![0.5]);
        for bad in ["0:1", "1:0:0.1", "0:1:0", "a:b:c", "-1:1:0.5"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
