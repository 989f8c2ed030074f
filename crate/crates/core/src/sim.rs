//! Direct simulation of final outcomes.
//!
//! Final size does not depend on the timing of infections, so each epidemic
//! is resolved by breadth-first exploration of its latent contact digraph.
//! An infected individual draws its infectious period `I`, then the number
//! of distinct individuals it would contact, `Bin(K, 1 - e^{-βI})` over its
//! `K` possible targets, and finally which targets (uniformly, without
//! replacement). Contacts with non-susceptibles are no-ops.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periods::{InfectiousPeriod, PeriodSampler};

/// Parameters of the multi-community epidemic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Community size.
    pub n: usize,
    /// Number of communities besides community 0.
    pub m: usize,
    /// Per-pair within-community contact rate.
    pub beta_w: f64,
    /// Per-pair global contact rate.
    pub beta_g: f64,
    pub period: InfectiousPeriod,
    /// A community outbreak is major when its size is at least this.
    pub large_outbreak_threshold: f64,
    /// An epidemic is global when at least this many communities are affected.
    pub global_threshold: f64,
}

/// `ln n`, the default major-outbreak cut-off.
pub fn default_large_threshold(n: usize) -> f64 {
    (n as f64).ln()
}

/// `ln m` for `m >= 2`; with fewer communities no epidemic counts as global.
pub fn default_global_threshold(m: usize) -> f64 {
    if m >= 2 {
        (m as f64).ln()
    } else {
        f64::INFINITY
    }
}

impl ModelParams {
    pub fn new(n: usize, m: usize, beta_w: f64, beta_g: f64, period: InfectiousPeriod) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("community size n must be >= 1".into()));
        }
        for (name, v) in [("beta_W", beta_w), ("beta_G", beta_g)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self {
            n,
            m,
            beta_w,
            beta_g,
            period,
            large_outbreak_threshold: default_large_threshold(n),
            global_threshold: default_global_threshold(m),
        })
    }

    /// Rates from their scaled forms: `β_W = λ_W/n`, `β_G = λ_G/(n² m)`.
    pub fn from_scaled(n: usize, m: usize, lambda_w: f64, lambda_g: f64, period: InfectiousPeriod) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("community size n must be >= 1".into()));
        }
        if m == 0 && lambda_g != 0.0 {
            return Err(Error::InvalidParameter("lambda_G scaling needs m >= 1".into()));
        }
        let nf = n as f64;
        let beta_g = if m == 0 { 0.0 } else { lambda_g / (nf * nf * m as f64) };
        Self::new(n, m, lambda_w / nf, beta_g, period)
    }

    pub fn with_thresholds(mut self, large_outbreak: f64, global: f64) -> Self {
        self.large_outbreak_threshold = large_outbreak;
        self.global_threshold = global;
        self
    }

    pub fn lambda_w(&self) -> f64 {
        self.beta_w * self.n as f64
    }

    pub fn lambda_g(&self) -> f64 {
        let nf = self.n as f64;
        self.beta_g * nf * nf * self.m as f64
    }

    /// Total population `n(m+1)`.
    pub fn population(&self) -> usize {
        self.n * (self.m + 1)
    }
}

/// Final outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Total infected, including the initial infective.
    pub z_t: u64,
    /// Communities with at least one infected individual.
    pub zhat_c: usize,
    /// Communities whose outbreak reached the major threshold.
    pub z_c: usize,
    /// Sum of the infectious periods of everyone infected.
    pub a_t: f64,
    pub community_sizes: Vec<u32>,
    pub community0_major: bool,
    pub global_epidemic: bool,
}

impl Outcome {
    /// Tallies an outcome from per-community sizes and total severity.
    pub fn from_sizes(
        community_sizes: Vec<u32>,
        a_t: f64,
        large_threshold: f64,
        global_threshold: f64,
        has_community0: bool,
    ) -> Self {
        let z_t = community_sizes.iter().map(|&s| s as u64).sum();
        let zhat_c = community_sizes.iter().filter(|&&s| s > 0).count();
        let major = |s: u32| s > 0 && s as f64 >= large_threshold;
        let z_c = community_sizes.iter().filter(|&&s| major(s)).count();
        let community0_major = has_community0 && community_sizes.first().is_some_and(|&s| major(s));
        Self {
            z_t,
            zhat_c,
            z_c,
            a_t,
            community_sizes,
            community0_major,
            global_epidemic: zhat_c as f64 >= global_threshold,
        }
    }
}

/// Draws `count` distinct values from `0..range` into `out` (Floyd's algorithm).
fn sample_distinct<R: Rng + ?Sized>(rng: &mut R, range: u64, count: u64, out: &mut Vec<u64>) {
    out.clear();
    debug_assert!(count <= range);
    if count == 0 {
        return;
    }
    if count <= 32 {
        for j in range - count..range {
            let t = rng.random_range(0..=j);
            if out.contains(&t) {
                out.push(j);
            } else {
                out.push(t);
            }
        }
    } else {
        let mut seen = std::collections::HashSet::with_capacity(count as usize * 2);
        for j in range - count..range {
            let t = rng.random_range(0..=j);
            let v = if seen.contains(&t) { j } else { t };
            seen.insert(v);
            out.push(v);
        }
    }
}

/// Number of distinct contacts out of `targets` candidates for one infective
/// with period `period` and per-pair rate `beta`.
#[inline]
fn contact_count<R: Rng + ?Sized>(rng: &mut R, targets: u64, beta: f64, period: f64) -> u64 {
    if targets == 0 || beta == 0.0 || period == 0.0 {
        return 0;
    }
    let p = -(-beta * period).exp_m1();
    if p >= 1.0 {
        return targets;
    }
    Binomial::new(targets, p).expect("p in [0,1)").sample(rng)
}

/// Scratch space for the single-population kernel, reusable across calls.
#[derive(Default)]
pub struct SingleScratch {
    infected: Vec<bool>,
    queue: Vec<u32>,
    targets: Vec<u64>,
}

/// Single-population epidemic with `n_sus` susceptibles and `a_init`
/// initial infectives. Returns `(Z, A)`, both including the initial infectives.
pub fn run_single<R: Rng + ?Sized>(
    n_sus: usize,
    a_init: usize,
    beta_w: f64,
    period: &InfectiousPeriod,
    rng: &mut R,
) -> (u64, f64) {
    run_single_with(n_sus, a_init, beta_w, &period.sampler(), rng, &mut SingleScratch::default())
}

pub(crate) fn run_single_with<R: Rng + ?Sized>(
    n_sus: usize,
    a_init: usize,
    beta_w: f64,
    period: &PeriodSampler,
    rng: &mut R,
    scratch: &mut SingleScratch,
) -> (u64, f64) {
    let total = n_sus + a_init;
    let SingleScratch { infected, queue, targets } = scratch;
    infected.clear();
    infected.resize(total, false);
    queue.clear();
    infected[..a_init].fill(true);
    queue.extend(0..a_init as u32);
    let mut z = a_init as u64;
    let mut severity = 0.0;
    let mut head = 0;
    while head < queue.len() {
        let i = queue[head] as u64;
        head += 1;
        let len = period.sample(rng);
        severity += len;
        if z == total as u64 {
            continue;
        }
        let d = contact_count(rng, total as u64 - 1, beta_w, len);
        sample_distinct(rng, total as u64 - 1, d, targets);
        for &t in targets.iter() {
            let j = if t >= i { t + 1 } else { t } as usize;
            if !infected[j] {
                infected[j] = true;
                queue.push(j as u32);
                z += 1;
            }
        }
    }
    (z, severity)
}

/// Externally seeded epidemic: `S ~ Bin(n, e^{-β_G n m t})` susceptibles,
/// `n - S` initial infectives. `beta_g_nm` is the product `β_G·n·m`.
/// Returns `(0, 0)` when nobody is initially infected.
pub fn run_external<R: Rng + ?Sized>(
    n: usize,
    t: f64,
    beta_w: f64,
    beta_g_nm: f64,
    period: &InfectiousPeriod,
    rng: &mut R,
) -> (u64, f64) {
    run_external_with(n, t, beta_w, beta_g_nm, &period.sampler(), rng, &mut SingleScratch::default())
}

pub(crate) fn run_external_with<R: Rng + ?Sized>(
    n: usize,
    t: f64,
    beta_w: f64,
    beta_g_nm: f64,
    period: &PeriodSampler,
    rng: &mut R,
    scratch: &mut SingleScratch,
) -> (u64, f64) {
    let escape = (-beta_g_nm * t).exp();
    let s = if escape >= 1.0 { n as u64 } else { Binomial::new(n as u64, escape).expect("probability").sample(rng) };
    if s == n as u64 {
        return (0, 0.0);
    }
    let s = s as usize;
    run_single_with(s, n - s, beta_w, period, rng, scratch)
}

/// Full multi-community epidemic started by one infective placed uniformly
/// in community 0.
///
/// Global contacts are aimed at the whole population, the infective's own
/// community included.
pub fn run_multi<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Outcome {
    let n = params.n;
    let total = params.population();
    let sampler = params.period.sampler();
    let mut infected = vec![false; total];
    let mut sizes = vec![0u32; params.m + 1];
    let mut queue: Vec<u32> = Vec::new();
    let mut targets = Vec::new();

    let first = rng.random_range(0..n);
    infected[first] = true;
    sizes[0] = 1;
    queue.push(first as u32);
    let mut severity = 0.0;
    let mut z = 1usize;
    let mut head = 0;

    let mut infect = |j: usize, queue: &mut Vec<u32>, sizes: &mut Vec<u32>, z: &mut usize| {
        if !infected[j] {
            infected[j] = true;
            sizes[j / n] += 1;
            queue.push(j as u32);
            *z += 1;
        }
    };

    while head < queue.len() {
        let i = queue[head] as usize;
        head += 1;
        let len = sampler.sample(rng);
        severity += len;
        if z == total {
            continue;
        }
        let community = i / n;
        let local = i - community * n;
        let d = contact_count(rng, n as u64 - 1, params.beta_w, len);
        sample_distinct(rng, n as u64 - 1, d, &mut targets);
        for &t in &targets {
            let t = t as usize;
            let j = community * n + if t >= local { t + 1 } else { t };
            infect(j, &mut queue, &mut sizes, &mut z);
        }
        let d = contact_count(rng, total as u64 - 1, params.beta_g, len);
        sample_distinct(rng, total as u64 - 1, d, &mut targets);
        for &t in &targets {
            let t = t as usize;
            let j = if t >= i { t + 1 } else { t };
            infect(j, &mut queue, &mut sizes, &mut z);
        }
    }
    Outcome::from_sizes(sizes, severity, params.large_outbreak_threshold, params.global_threshold, true)
}
