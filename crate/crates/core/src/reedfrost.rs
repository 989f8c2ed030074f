//! Reed-Frost final-size laws.
//!
//! [`rf_pmf`] solves the classical final-size triangular system for one
//! initial infective and `m` susceptibles. The system is badly conditioned:
//! it subtracts sums of terms scaled by `q^{-(k+1)(m-l)}`, so it is solved in
//! binary floating point with adaptively doubled precision until two
//! consecutive precisions agree. [`rf_brute_pmf`] is an independent oracle
//! that propagates the chain-binomial generations exactly.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp};
use serde::Serialize;

use crate::analytic::LimitQuantities;
use crate::bigfloat::BigFloat;
use crate::error::{Error, Result};

pub const RF_MAX_M: usize = 500;
pub const RF_BRUTE_MAX_M: usize = 10;

const START_PRECISION: u64 = 128;
const MAX_PRECISION: u64 = 1 << 16;

/// Final-size law of a Reed-Frost epidemic with one initial infective.
///
/// `probs[k - 1] = P(Z = k)` for `k = 1..=m+1`; `Z` counts the initial infective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfPmf {
    pub m: usize,
    pub p: f64,
    pub probs: Vec<f64>,
}

impl RfPmf {
    fn point_mass_at_one(m: usize, p: f64) -> Self {
        let mut probs = vec![0.0; m + 1];
        probs[0] = 1.0;
        Self { m, p, probs }
    }

    /// `P(Z = k)`; zero outside `1..=m+1`.
    pub fn prob(&self, k: usize) -> f64 {
        if k == 0 || k > self.m + 1 {
            0.0
        } else {
            self.probs[k - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    /// Iterator over `(k, P(Z = k))`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (i + 1, p))
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Precondition(format!("Reed-Frost p must lie in [0, 1), got {p}")));
    }
    Ok(())
}

/// Exact final-size pmf via the triangular system
/// `Σ_{k≤l} C(m-k, l-k) P_k / q^{(k+1)(m-l)} = C(m, l)`, `l = 0..m`,
/// where `P_k` is the probability that exactly `k` susceptibles are infected.
pub fn rf_pmf(m: usize, p: f64) -> Result<RfPmf> {
    if m == 0 || m > RF_MAX_M {
        return Err(Error::Precondition(format!("rf_pmf needs 1 <= m <= {RF_MAX_M}, got {m}")));
    }
    check_p(p)?;
    if p == 0.0 {
        return Ok(RfPmf::point_mass_at_one(m, p));
    }

    let mut previous: Option<Vec<f64>> = None;
    let mut precision = START_PRECISION;
    while precision <= MAX_PRECISION {
        let probs = solve_final_size_system(m, p, precision);
        let sane =
            probs.iter().all(|&x| x >= -1e-9 && x.is_finite()) && (probs.iter().sum::<f64>() - 1.0).abs() <= 1e-8;
        if let (true, Some(prev)) = (sane, previous.as_ref()) {
            let diff = prev.iter().zip(&probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if diff < 1e-15 {
                // tiny negative round-off only; anything larger failed `sane`
                let probs = probs.into_iter().map(|x| x.max(0.0)).collect();
                return Ok(RfPmf { m, p, probs });
            }
        }
        previous = sane.then_some(probs);
        precision *= 2;
    }
    Err(Error::Instability(format!("Reed-Frost system for m={m}, p={p} did not stabilise at {MAX_PRECISION} bits")))
}

fn solve_final_size_system(m: usize, p: f64, precision: u64) -> Vec<f64> {
    let int = |x: usize| BigFloat::from_u64(x as u64, precision);
    let one = int(1);
    let q = &one - &BigFloat::from_f64(p, precision);
    let r = &one / &q;

    let mut solved: Vec<BigFloat> = Vec::with_capacity(m + 1);
    // binom[j] = C(d + j, j) for the current d = m - l
    let mut binom: Vec<BigFloat> = Vec::with_capacity(m + 1);
    for l in 0..=m {
        let d = m - l;
        binom.clear();
        binom.push(one.clone());
        for j in 0..l {
            let next = &(&binom[j] * &int(d + j + 1)) / &int(j + 1);
            binom.push(next);
        }
        let base = r.powi(d as u64);
        let mut pw = base.clone();
        let mut sum = BigFloat::zero(precision);
        for (k, pk) in solved.iter().enumerate() {
            sum = &sum + &(&(&binom[l - k] * pk) * &pw);
            pw = &pw * &base;
        }
        // here pw = base^{l+1} and binom[l] = C(m, l)
        let pl = &(&binom[l] - &sum) / &pw;
        solved.push(pl);
    }
    solved.iter().map(BigFloat::to_f64).collect()
}

/// Independent oracle: exact propagation of the chain-binomial generations.
///
/// State `(s, i)`: susceptibles left and current infectives; each generation
/// infects `Bin(s, 1 - q^i)` new individuals.
pub fn rf_brute_pmf(m: usize, p: f64) -> Result<RfPmf> {
    if m == 0 || m > RF_BRUTE_MAX_M {
        return Err(Error::Precondition(format!("rf_brute_pmf needs 1 <= m <= {RF_BRUTE_MAX_M}, got {m}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("p must lie in [0, 1], got {p}")));
    }
    let q = 1.0 - p;
    let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    // mass[s][i]
    let mut mass = vec![vec![0.0_f64; m + 2]; m + 1];
    mass[m][1] = 1.0;
    let mut probs = vec![0.0; m + 1];
    // generations strictly reduce s unless the epidemic stops, so sweeping s downward suffices
    for s in (0..=m).rev() {
        for i in 0..=m + 1 {
            let w = mass[s][i];
            if w == 0.0 {
                continue;
            }
            if i == 0 {
                probs[m - s] += w;
                continue;
            }
            let escape = q.powi(i as i32);
            for new in 0..=s {
                let pr = binom(s, new) * (1.0 - escape).powi(new as i32) * escape.powi((s - new) as i32);
                if new == 0 {
                    probs[m - s] += w * pr;
                } else {
                    mass[s - new][new] += w * pr;
                }
            }
        }
    }
    Ok(RfPmf { m, p, probs })
}

/// One draw of the Reed-Frost final size through the order-statistics
/// construction: with `L'_1..L'_m` i.i.d. `Exp(λ_G(1-π_W))`, return the
/// smallest `k` such that `k·z∞μ_I/m < L'_(k)` (with `L'_(m+1) = ∞`).
pub fn rf_sample<R: Rng + ?Sized>(m: usize, lambda_g: f64, pi_w: f64, z_inf: f64, mu_i: f64, rng: &mut R) -> usize {
    let rate = lambda_g * (1.0 - pi_w);
    if !(rate > 0.0) || m == 0 {
        return 1;
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut l: Vec<f64> = (0..m).map(|_| exp.sample(rng)).collect();
    l.sort_by(f64::total_cmp);
    let step = z_inf * mu_i / m as f64;
    (1..=m).find(|&k| k as f64 * step < l[k - 1]).unwrap_or(m + 1)
}

/// [`rf_sample`] with parameters taken from limit quantities.
pub fn rf_sample_from<R: Rng + ?Sized>(m: usize, q: &LimitQuantities, rng: &mut R) -> usize {
    rf_sample(m, q.lambda_g, q.pi_w, q.z_inf, q.mu_i, rng)
}

/// Chain-binomial simulation of one Reed-Frost epidemic; used for testing.
pub fn rf_chain_binomial<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> usize {
    let (mut s, mut i) = (m as u64, 1u64);
    while i > 0 && s > 0 {
        let hit = 1.0 - (1.0 - p).powi(i as i32);
        let new = Binomial::new(s, hit).expect("probability in [0,1]").sample(rng);
        s -= new;
        i = new;
    }
    m + 1 - s as usize
}
