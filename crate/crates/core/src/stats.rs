//! Empirical comparisons between simulated samples and reference laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Outcome;

/// `c(α) = sqrt(-ln(α/2) / 2)`, the asymptotic Kolmogorov critical constant.
pub fn ks_constant(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample KS critical value at level `alpha` for `n` observations.
pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    ks_constant(alpha) / (n as f64).sqrt()
}

/// Two-sample KS critical value at level `alpha`.
pub fn ks_critical_two_sample(alpha: f64, n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    ks_constant(alpha) * ((a + b) / (a * b)).sqrt()
}

/// Sup distance between the empirical CDF of a sorted sample and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample KS statistic; ties are resolved by stepping both ECDFs together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `bins + 1` equal-width edges spanning `[lo, hi]`.
pub fn equal_width_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let bins = bins.max(1);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let w = (hi - lo) / bins as f64;
    (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * w }).collect()
}

/// Edges over the range of a sample.
pub fn sample_edges(sample: &[f64], bins: usize) -> Vec<f64> {
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    equal_width_edges(lo, hi, bins)
}

/// Bin counts with half-open bins `[e_i, e_{i+1})`, the last one closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn new(sample: &[f64], edges: &[f64]) -> Self {
        let bins = edges.len() - 1;
        let mut counts = vec![0u64; bins];
        let (mut below, mut above) = (0, 0);
        for &x in sample {
            if x < edges[0] {
                below += 1;
            } else if x > edges[bins] {
                above += 1;
            } else {
                let k = edges.partition_point(|&e| e <= x).saturating_sub(1).min(bins - 1);
                counts[k] += 1;
            }
        }
        Self { edges: edges.to_vec(), counts, below, above }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    /// Density per unit length in each bin.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts.iter().zip(self.edges.windows(2)).map(|(&c, e)| c as f64 / total / (e[1] - e[0])).collect()
    }
}

/// Result of a binned total-variation comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedTv {
    pub tv: f64,
    /// Sample points below the first / above the last edge.
    pub overflow_below: u64,
    pub overflow_above: u64,
}

/// `½ Σ |empirical mass − reference mass|` over the bins plus the two
/// overflow regions; `reference_cdf` gives the reference mass of each bin.
pub fn binned_tv<F: Fn(f64) -> f64>(sample: &[f64], reference_cdf: F, edges: &[f64]) -> Result<BinnedTv> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if edges.len() < 2 {
        return Err(Error::Precondition("binned_tv needs at least one bin".into()));
    }
    let h = Histogram::new(sample, edges);
    let n = sample.len() as f64;
    let cdf: Vec<f64> = edges.iter().map(|&e| reference_cdf(e)).collect();
    let mut tv = (h.below as f64 / n - cdf[0]).abs() + (h.above as f64 / n - (1.0 - cdf[cdf.len() - 1])).abs();
    for (k, &c) in h.counts.iter().enumerate() {
        tv += (c as f64 / n - (cdf[k + 1] - cdf[k])).abs();
    }
    Ok(BinnedTv { tv: (0.5 * tv).clamp(0.0, 1.0), overflow_below: h.below, overflow_above: h.above })
}

/// Total variation between the empirical law of an integer sample and a pmf
/// given on `0..pmf.len()`.
pub fn discrete_tv(sample: &[usize], pmf: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let top = sample.iter().copied().max().unwrap_or(0).max(pmf.len().saturating_sub(1));
    let mut counts = vec![0u64; top + 1];
    for &k in sample {
        counts[k] += 1;
    }
    let n = sample.len() as f64;
    let tv: f64 = (0..=top).map(|k| (counts[k] as f64 / n - pmf.get(k).copied().unwrap_or(0.0)).abs()).sum();
    Ok((0.5 * tv).clamp(0.0, 1.0))
}

/// Conditioning events on replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    #[default]
    None,
    Community0Major,
    GlobalEpidemic,
    NotGlobal,
}

impl Condition {
    pub fn holds(&self, o: &Outcome) -> bool {
        match self {
            Self::None => true,
            Self::Community0Major => o.community0_major,
            Self::GlobalEpidemic => o.global_epidemic,
            Self::NotGlobal => !o.global_epidemic,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Community0Major => "community0_major",
            Self::GlobalEpidemic => "global_epidemic",
            Self::NotGlobal => "not_global",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "community0_major" => Ok(Self::Community0Major),
            "global_epidemic" => Ok(Self::GlobalEpidemic),
            "not_global" => Ok(Self::NotGlobal),
            _ => Err(Error::InvalidParameter(format!("unknown condition '{s}'"))),
        }
    }
}

/// Outcome field selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    TotalSize,
    AffectedCommunities,
    MajorCommunities,
    Severity,
    Community0Size,
}

impl Field {
    pub const ALL: [Field; 5] =
        [Field::TotalSize, Field::AffectedCommunities, Field::MajorCommunities, Field::Severity, Field::Community0Size];

    pub fn value(&self, o: &Outcome) -> f64 {
        match self {
            Self::TotalSize => o.z_t as f64,
            Self::AffectedCommunities => o.zhat_c as f64,
            Self::MajorCommunities => o.z_c as f64,
            Self::Severity => o.a_t,
            Self::Community0Size => o.community_sizes.first().copied().unwrap_or(0) as f64,
        }
    }
}

/// Mergeable running moments (count, mean, centred sum of squares).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }

    /// Unbiased sample variance (0 for fewer than two points).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalSummary {
    pub condition: Condition,
    pub field: Field,
    pub count: u64,
    pub total: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

/// Mean, variance and standard error of `field` over replicates satisfying
/// `condition`.
pub fn summarize(outcomes: &[Outcome], field: Field, condition: Condition) -> Result<ConditionalSummary> {
    summarize_by(outcomes, |o| field.value(o), condition).map(|mut s| {
        s.field = field;
        s
    })
}

/// [`summarize`] with an arbitrary per-outcome statistic.
pub fn summarize_by<F: Fn(&Outcome) -> f64>(
    outcomes: &[Outcome],
    stat: F,
    condition: Condition,
) -> Result<ConditionalSummary> {
    let m: Moments = outcomes.iter().filter(|o| condition.holds(o)).map(stat).collect();
    if m.count == 0 {
        return Err(Error::NoConditionedReplicates(condition.name().into()));
    }
    Ok(ConditionalSummary {
        condition,
        field: Field::TotalSize,
        count: m.count,
        total: outcomes.len() as u64,
        mean: m.mean,
        variance: m.variance(),
        std_error: m.std_error(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicate::stream;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};
    use statrs::distribution::{ContinuousCDF, Normal};

    fn outcome(z: u32, major: bool, global: bool) -> Outcome {
        Outcome {
            z_t: z as u64,
            zhat_c: 1,
            z_c: major as usize,
            a_t: z as f64,
            community_sizes: vec![z],
            community0_major: major,
            global_epidemic: global,
        }
    }

    #[test]
    fn ks_uniform_quantiles() {
        let k = 99;
        let xs: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 1.0 / (k + 1) as f64 + 1e-12);
    }

    #[test]
    fn ks_single_point() {
        assert_eq!(ks_distance(&[0.0], |_| 0.5).unwrap(), 0.5);
        assert_eq!(ks_distance(&[], |_| 0.5), Err(Error::EmptySample));
    }

    #[test]
    fn ks_normal_mostly_below_critical() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 100_000;
        let crit = ks_critical_one_sample(0.01, n);
        assert!((crit - 0.00516).abs() < 2e-5);
        let mut passed = 0;
        for seed in 0..20 {
            let mut rng = stream(seed, 0);
            let mut xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            xs.sort_by(f64::total_cmp);
            if ks_distance(&xs, |x| normal.cdf(x)).unwrap() < crit {
                passed += 1;
            }
        }
        assert!(passed >= 19, "{passed}/20");
    }

    #[test]
    fn two_sample_ks_basics() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        // ties across samples
        assert!((ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn binned_tv_cases() {
        let mut rng = stream(3, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let edges = equal_width_edges(0.0, 1.0, 20);
        let r = binned_tv(&xs, |x| x.clamp(0.0, 1.0), &edges).unwrap();
        assert!(r.tv < 0.01, "{}", r.tv);
        // disjoint supports
        let r = binned_tv(&[5.0, 5.5], |x| x.clamp(0.0, 1.0), &equal_width_edges(0.0, 6.0, 6)).unwrap();
        assert_eq!(r.tv, 1.0);
        // overflow is reported
        let r = binned_tv(&[-1.0, 0.5, 2.0], |x| x.clamp(0.0, 1.0), &edges).unwrap();
        assert_eq!((r.overflow_below, r.overflow_above), (1, 1));
    }

    #[test]
    fn discrete_tv_cases() {
        assert_eq!(discrete_tv(&[2, 2, 2], &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(discrete_tv(&[5], &[1.0]).unwrap(), 1.0);
        assert!((discrete_tv(&[0, 1], &[1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn histogram_edges_and_counts() {
        let h = Histogram::new(&[0.0, 0.5, 1.0, 1.0], &equal_width_edges(0.0, 1.0, 2));
        assert_eq!(h.counts, vec![1, 3]);
        let d = h.densities();
        assert!((d.iter().sum::<f64>() * 0.5 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn summaries() {
        let same = vec![outcome(7, true, false); 10];
        let s = summarize(&same, Field::TotalSize, Condition::None).unwrap();
        assert_eq!((s.count, s.total, s.mean, s.variance), (10, 10, 7.0, 0.0));
        let mixed = vec![outcome(1, false, false), outcome(100, true, true), outcome(200, true, true)];
        let s = summarize(&mixed, Field::TotalSize, Condition::GlobalEpidemic).unwrap();
        assert_eq!((s.count, s.mean), (2, 150.0));
        assert!((s.std_error - (s.variance / 2.0).sqrt()).abs() < 1e-15);
        assert!(summarize(&same, Field::TotalSize, Condition::GlobalEpidemic).is_err());
        let nonglobal = summarize(&mixed, Field::TotalSize, Condition::NotGlobal).unwrap();
        assert_eq!(nonglobal.count, 1);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.3).collect();
        let whole: Moments = xs.iter().copied().collect();
        let a: Moments = xs[..313].iter().copied().collect();
        let b: Moments = xs[313..].iter().copied().collect();
        let merged = a.merge(&b);
        assert_eq!(merged.count, whole.count);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.variance() - whole.variance()).abs() < 1e-9);
    }
}
