//! The cumulative-pressure (embedding) construction of final outcomes.
//!
//! A community is driven by a Poisson trigger process of rate `β_G n² m` on a
//! "pressure" axis `t`. Each trigger picks a uniform member; if susceptible,
//! an instantaneous within-community epidemic runs among the current
//! susceptibles. The resulting step functions `t ↦ (Z_i(t), A_i(t))` are
//! coupled across communities by iterating
//! `T̃_{k+1} = T̃_0 + A_•(T̃_k)/(n m)` to its first fixed point.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::replicate::{run_replicates, Stream};
use crate::sim::{run_external_with, run_single_with, ModelParams, Outcome, SingleScratch};
use crate::stats::Moments;

/// Right-continuous cumulative (size, severity) path of one community.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityPath {
    pub n: usize,
    /// Horizon the path was simulated on.
    pub t_max: f64,
    /// Whole community infected before `t_max`; the path is then final for all `t`.
    pub exhausted: bool,
    pub jump_times: Vec<f64>,
    pub cum_sizes: Vec<u64>,
    pub cum_severities: Vec<f64>,
}

impl CommunityPath {
    /// `(Z(t), A(t))`: value at the last jump `≤ t`, `(0, 0)` before the first.
    pub fn eval(&self, t: f64) -> (u64, f64) {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            (0, 0.0)
        } else {
            (self.cum_sizes[k - 1], self.cum_severities[k - 1])
        }
    }

    /// Largest `t` at which [`eval`](Self::eval) is known to be exact.
    pub fn horizon(&self) -> f64 {
        if self.exhausted {
            f64::INFINITY
        } else {
            self.t_max
        }
    }
}

/// Default horizon `2(T̃_0 + μ_I + 1)`; `A_•(∞)/(nm)` concentrates near `μ_I·z`.
pub fn default_horizon(t0_tilde: f64, mu_i: f64) -> f64 {
    2.0 * (t0_tilde + mu_i + 1.0)
}

/// Simulates one community's path on `[0, t_max]`.
pub fn community_path<R: Rng + ?Sized>(params: &ModelParams, t_max: f64, rng: &mut R) -> CommunityPath {
    community_path_with(params, t_max, rng, &mut SingleScratch::default())
}

fn community_path_with<R: Rng + ?Sized>(
    params: &ModelParams,
    t_max: f64,
    rng: &mut R,
    scratch: &mut SingleScratch,
) -> CommunityPath {
    let n = params.n;
    let nf = n as f64;
    let rate = params.beta_g * nf * nf * params.m as f64;
    let sampler = params.period.sampler();
    let mut path = CommunityPath {
        n,
        t_max,
        exhausted: false,
        jump_times: Vec::new(),
        cum_sizes: Vec::new(),
        cum_severities: Vec::new(),
    };
    if !(rate > 0.0) {
        return path;
    }
    let gap = Exp::new(rate).expect("positive rate");
    let (mut t, mut susceptible, mut z, mut a) = (0.0, n, 0u64, 0.0);
    loop {
        t += gap.sample(rng);
        if t > t_max {
            break;
        }
        // susceptibles occupy labels 0..susceptible
        if rng.random_range(0..n) >= susceptible {
            continue;
        }
        let (size, severity) = run_single_with(susceptible - 1, 1, params.beta_w, &sampler, rng, scratch);
        susceptible -= size as usize;
        z += size;
        a += severity;
        path.jump_times.push(t);
        path.cum_sizes.push(z);
        path.cum_severities.push(a);
        if susceptible == 0 {
            path.exhausted = true;
            break;
        }
    }
    path
}

/// Fixed point of the severity iteration and totals at that point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeverityFixedPoint {
    pub t_inf_tilde: f64,
    pub z_total: u64,
    pub a_total: f64,
    /// Communities whose size at the fixed point reaches the major threshold.
    pub x_count: usize,
    pub iterations: usize,
}

/// Iterates `T̃_{k+1} = T̃_0 + Ã_•(T̃_k)` from `T̃_0` until it stops moving.
///
/// `Ã_• = A_•/(n m)` with `m = paths.len()`. The paths are step functions, so
/// the iteration reaches its fixed point exactly after at most one step per
/// jump.
pub fn solve_severity(t0_tilde: f64, paths: &[CommunityPath], large_threshold: f64) -> Result<SeverityFixedPoint> {
    if !(t0_tilde >= 0.0) {
        return Err(Error::Precondition(format!("initial pressure must be >= 0, got {t0_tilde}")));
    }
    if paths.is_empty() {
        return Ok(SeverityFixedPoint { t_inf_tilde: t0_tilde, z_total: 0, a_total: 0.0, x_count: 0, iterations: 1 });
    }
    let scale = (paths[0].n * paths.len()) as f64;

    // (time, severity increment) over all paths, in time order
    let mut jumps: Vec<(f64, f64)> = paths
        .iter()
        .flat_map(|p| {
            p.jump_times.iter().zip(&p.cum_severities).scan(0.0, |prev, (&t, &a)| {
                let d = a - *prev;
                *prev = a;
                Some((t, d))
            })
        })
        .collect();
    jumps.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut t = t0_tilde;
    let mut absorbed = 0;
    let mut severity = 0.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let before = absorbed;
        while absorbed < jumps.len() && jumps[absorbed].0 <= t {
            severity += jumps[absorbed].1;
            absorbed += 1;
        }
        if absorbed == before {
            break;
        }
        t = t0_tilde + severity / scale;
    }

    let horizon = paths.iter().map(CommunityPath::horizon).fold(f64::INFINITY, f64::min);
    if t > horizon {
        return Err(Error::InsufficientHorizon { t_max: horizon, needed: t });
    }

    let mut z_total = 0;
    let mut a_total = 0.0;
    let mut x_count = 0;
    for p in paths {
        let (z, a) = p.eval(t);
        z_total += z;
        a_total += a;
        if z > 0 && z as f64 >= large_threshold {
            x_count += 1;
        }
    }
    Ok(SeverityFixedPoint { t_inf_tilde: t, z_total, a_total, x_count, iterations })
}

/// Final outcome of the modified epidemic on communities `1..=m`, each
/// individual initially exposed to `T0` units of infection.
///
/// The outcome's `community_sizes` has length `m`; it may have `Z_T = 0`.
pub fn run_modified<R: Rng + ?Sized>(t0: f64, params: &ModelParams, rng: &mut R) -> Result<Outcome> {
    let mut scratch = SingleScratch::default();
    run_modified_with(t0, params, rng, &mut scratch).map(|(o, _)| o)
}

fn run_modified_with<R: Rng + ?Sized>(
    t0: f64,
    params: &ModelParams,
    rng: &mut R,
    scratch: &mut SingleScratch,
) -> Result<(Outcome, SeverityFixedPoint)> {
    if params.m == 0 {
        return Err(Error::Precondition("the modified epidemic needs m >= 1".into()));
    }
    let t0_tilde = t0 / (params.n * params.m) as f64;
    let t_max = default_horizon(t0_tilde, params.period.mean());
    let paths: Vec<CommunityPath> = (0..params.m).map(|_| community_path_with(params, t_max, rng, scratch)).collect();
    let fp = solve_severity(t0_tilde, &paths, params.large_outbreak_threshold)?;
    let sizes = paths.iter().map(|p| p.eval(fp.t_inf_tilde).0 as u32).collect();
    let outcome =
        Outcome::from_sizes(sizes, fp.a_total, params.large_outbreak_threshold, params.global_threshold, false);
    Ok((outcome, fp))
}

/// The whole epidemic through the embedding engine: community 0's
/// within-community outbreak (size `Z_0`, severity `A_0`) seeds the modified
/// epidemic on communities `1..=m` with `T0 = A_0`.
///
/// Communities `1..=m` cannot reinfect community 0.
pub fn run_embedded<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Outcome> {
    let mut scratch = SingleScratch::default();
    let sampler = params.period.sampler();
    let (z0, a0) = run_single_with(params.n - 1, 1, params.beta_w, &sampler, rng, &mut scratch);
    let (rest, _) = run_modified_with(a0, params, rng, &mut scratch)?;
    let mut sizes = Vec::with_capacity(params.m + 1);
    sizes.push(z0 as u32);
    sizes.extend(rest.community_sizes);
    Ok(Outcome::from_sizes(sizes, a0 + rest.a_t, params.large_outbreak_threshold, params.global_threshold, true))
}

/// Monte Carlo estimates of `x^(n)(t)`, `z^(n)(t)`, `a^(n)(t)` at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub a: f64,
    pub se_x: f64,
    pub se_z: f64,
    pub se_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub points: Vec<CurvePoint>,
    /// Estimated first root of `t = a^(n)(t)` above [`CURVE_TAU_EPS`], or 0.
    pub tau_hat: f64,
}

pub const CURVE_TAU_EPS: f64 = 1e-6;

/// Estimates the finite-`n` curves at one `t` from `replicates` runs of the
/// externally seeded epidemic. Replicate `i` uses stream `i` of `master_seed`
/// at every `t`.
pub fn estimate_point(
    params: &ModelParams,
    t: f64,
    replicates: u64,
    master_seed: u64,
    workers: usize,
) -> Result<CurvePoint> {
    if replicates == 0 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    let n = params.n;
    let beta_g_nm = params.beta_g * (n * params.m) as f64;
    let sampler = params.period.sampler();
    let runs = run_replicates(master_seed, replicates, workers, |_, rng: &mut Stream| {
        let mut scratch = SingleScratch::default();
        run_external_with(n, t, params.beta_w, beta_g_nm, &sampler, rng, &mut scratch)
    })?;
    let nf = n as f64;
    let xs: Moments =
        runs.iter().map(|&(z, _)| (z > 0 && z as f64 >= params.large_outbreak_threshold) as u8 as f64).collect();
    let zs: Moments = runs.iter().map(|&(z, _)| z as f64 / nf).collect();
    let as_: Moments = runs.iter().map(|&(_, a)| a / nf).collect();
    Ok(CurvePoint {
        t,
        x: xs.mean,
        z: zs.mean,
        a: as_.mean,
        se_x: xs.std_error(),
        se_z: zs.std_error(),
        se_a: as_.std_error(),
    })
}

/// Curve estimates on a grid, plus `τ̂^(n)`.
///
/// `τ̂` is located by the first grid interval above [`CURVE_TAU_EPS`] on
/// which `â(t) - t` changes sign from positive, then refined by bisection
/// with fresh estimates (same streams) to width `1e-4`.
pub fn estimate_curves(
    params: &ModelParams,
    t_grid: &[f64],
    replicates: u64,
    master_seed: u64,
    workers: usize,
) -> Result<CurveTable> {
    if t_grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::Precondition("curve grid must be nonnegative".into()));
    }
    let points = t_grid
        .iter()
        .map(|&t| estimate_point(params, t, replicates, master_seed, workers))
        .collect::<Result<Vec<_>>>()?;

    let mut tau_hat = 0.0;
    let above: Vec<&CurvePoint> = points.iter().filter(|p| p.t > CURVE_TAU_EPS).collect();
    for w in above.windows(2) {
        if w[0].a - w[0].t > 0.0 && w[1].a - w[1].t <= 0.0 {
            let (mut lo, mut hi) = (w[0].t, w[1].t);
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                let p = estimate_point(params, mid, replicates, master_seed, workers)?;
                if p.a - mid > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            tau_hat = 0.5 * (lo + hi);
            break;
        }
    }
    Ok(CurveTable { points, tau_hat })
}
