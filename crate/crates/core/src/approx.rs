//! Approximating laws for final outcomes.
//!
//! All approximations are stated on the absolute scale (number of
//! individuals) so they can be overlaid on simulated histograms:
//!
//! - fixed `m`, given a major outbreak in community 0: `Z_T` is a mixture
//!   over the Reed-Frost count `k` of normals with mean `k·n·z∞` and
//!   variance `k·n·σ²_W`;
//! - many communities, no global epidemic: the number of major community
//!   outbreaks is `0` with probability `π_W`, otherwise Borel(`R*`);
//! - many communities, global epidemic: `(Z_C/m, Z_T/(nm), A_T/(nm))` is
//!   normal with mean `(x(τ), z(τ), a(τ))` and covariance `Σ_N/m`, so
//!   `Z_T ≈ N(n·m·z(τ), n²·m·Σ_N[1][1])`.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::analytic::{borel_pmf, sigma_n_matrix, LimitQuantities};
use crate::error::{Error, Result};
use crate::reedfrost::rf_pmf;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = (x - mean) / variance.sqrt();
    INV_SQRT_2PI / variance.sqrt() * (-0.5 * z * z).exp()
}

pub fn normal_cdf(x: f64, mean: f64, variance: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (2.0 * variance).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureOfNormals {
    pub components: Vec<NormalComponent>,
}

impl MixtureOfNormals {
    pub fn new(components: Vec<NormalComponent>) -> Result<Self> {
        if components.iter().any(|c| !(c.weight >= 0.0) || !(c.variance > 0.0)) {
            return Err(Error::InvalidParameter("mixture needs nonnegative weights and positive variances".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * normal_pdf(x, c.mean, c.variance)).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * normal_cdf(x, c.mean, c.variance)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }
}

/// `Σ_k w_k φ(x; μ_k, σ²_k)`.
pub fn mixture_pdf(mix: &MixtureOfNormals, x: f64) -> f64 {
    mix.pdf(x)
}

/// Law of `Z_T` given a major outbreak in community 0, `m` fixed.
pub fn fixed_m_mixture(n: usize, m: usize, q: &LimitQuantities) -> Result<MixtureOfNormals> {
    let sigma2_w = q.sigma2_w.ok_or_else(|| Error::Domain(format!("fixed-m mixture needs R0 > 1, got {}", q.r0)))?;
    if n < 2 || m < 1 {
        return Err(Error::Precondition(format!("fixed-m mixture needs n >= 2 and m >= 1 (n={n}, m={m})")));
    }
    let pmf = rf_pmf(m, q.p_rf(m)?)?;
    let nf = n as f64;
    let components = pmf
        .iter()
        .map(|(k, w)| NormalComponent { weight: w, mean: k as f64 * nf * q.z_inf, variance: k as f64 * nf * sigma2_w })
        .collect();
    MixtureOfNormals::new(components)
}

/// Approximate law of the number of major community outbreaks when there is
/// no global epidemic, on `0..=k_max`.
///
/// Entry 0 is `π_W`, entry `k ≥ 1` is `(1-π_W)·Borel(R*, k)`. Unnormalised,
/// the total mass is `π̌_G`; `condition_on_extinction` divides by it.
pub fn minor_outbreak_pmf(q: &LimitQuantities, k_max: usize, condition_on_extinction: bool) -> Result<Vec<f64>> {
    if k_max < 1 {
        return Err(Error::Precondition("minor_outbreak_pmf needs k_max >= 1".into()));
    }
    let mut pmf = Vec::with_capacity(k_max + 1);
    pmf.push(q.pi_w);
    pmf.extend((1..=k_max as u64).map(|k| (1.0 - q.pi_w) * borel_pmf(q.r_star, k)));
    if condition_on_extinction {
        let mass = q.pi_check_g;
        pmf.iter_mut().for_each(|p| *p /= mass);
    }
    Ok(pmf)
}

/// Normal approximation given a global epidemic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalNormal {
    pub n: usize,
    pub m: usize,
    /// `(x, z, a)` centring of `(Z_C/m, Z_T/(nm), A_T/(nm))`.
    pub mean: [f64; 3],
    /// `Σ_N / m`.
    pub cov: [[f64; 3]; 3],
}

impl GlobalNormal {
    /// Mean and variance of the absolute final size `Z_T`.
    pub fn total_size(&self) -> (f64, f64) {
        let scale = (self.n * self.m) as f64;
        (scale * self.mean[1], scale * scale * self.cov[1][1])
    }

    pub fn total_size_pdf(&self, x: f64) -> f64 {
        let (mu, var) = self.total_size();
        normal_pdf(x, mu, var)
    }

    pub fn total_size_cdf(&self, x: f64) -> f64 {
        let (mu, var) = self.total_size();
        normal_cdf(x, mu, var)
    }

    /// Same covariance, centred on finite-`n` estimates `(x̂, ẑ, â)` instead
    /// of the limits.
    pub fn recentred(&self, mean: [f64; 3]) -> Self {
        Self { mean, ..self.clone() }
    }
}

pub fn global_normal(n: usize, m: usize, q: &LimitQuantities) -> Result<GlobalNormal> {
    if m == 0 {
        return Err(Error::Precondition("global normal needs m >= 1".into()));
    }
    let sigma = sigma_n_matrix(q)?;
    let mut cov = sigma;
    cov.iter_mut().flatten().for_each(|v| *v /= m as f64);
    Ok(GlobalNormal { n, m, mean: [q.x_tau, q.z_tau, q.a_tau], cov })
}
