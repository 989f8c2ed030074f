//! Deterministic limit quantities.
//!
//! Fixed points are solved by bracketed bisection; where a Lambert-W closed
//! form exists it is kept as an independent cross-check.

mod lambert;

pub use lambert::lambert_w0;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periods::InfectiousPeriod;

/// Absolute tolerance for all bracketed solves.
pub const SOLVE_TOL: f64 = 1e-12;

/// Lower cut-off excluding the trivial root `t = 0` when solving for `τ`.
pub const TAU_EPS: f64 = 1e-12;

/// Bisection on a sign-changing bracket. `g(lo)` and `g(hi)` must differ in sign.
pub(crate) fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    let glo_pos = g(lo) > 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < SOLVE_TOL * 1e-2 {
            break;
        }
        if (g(mid) > 0.0) == glo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest root in `[0, 1]` of `s = f(s)` for a convex generating-function
/// style map with `f(1) = 1` and `f(0) > 0`.
///
/// Walks `s = 1 - 2^-k` toward 1 until `f(s) < s`; if no such point exists
/// the smallest root is 1 itself.
fn smallest_fixed_point<F: Fn(f64) -> f64>(f: F) -> f64 {
    let g = |s: f64| f(s) - s;
    if g(0.0) <= 0.0 {
        return 0.0;
    }
    let mut h = 0.5;
    while h > 1e-15 {
        if g(1.0 - h) < 0.0 {
            return bisect(g, 0.0, 1.0 - h);
        }
        h *= 0.5;
    }
    1.0
}

/// `R₀ = μ_I λ_W`.
pub fn r0(period: &InfectiousPeriod, lambda_w: f64) -> f64 {
    period.mean() * lambda_w
}

/// Probability that one introduction fails to cause a major outbreak in a
/// community: the smallest fixed point of `s ↦ φ_I(λ_W(1-s))`.
pub fn pi_w(period: &InfectiousPeriod, lambda_w: f64) -> Result<f64> {
    if !(lambda_w > 0.0 && lambda_w.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda_W must be positive, got {lambda_w}")));
    }
    if r0(period, lambda_w) <= 1.0 {
        return Ok(1.0);
    }
    // θ = λ_W(1-s) ≥ 0 on [0,1], inside every kind's domain
    Ok(smallest_fixed_point(|s| period.laplace(lambda_w * (1.0 - s)).expect("nonnegative argument")))
}

/// Fraction infected by a major outbreak: largest root of `z = 1 - exp(-R₀ z)`.
pub fn z_inf(r0: f64) -> f64 {
    if r0 <= 1.0 {
        return 0.0;
    }
    let g = |z: f64| 1.0 - (-r0 * z).exp() - z;
    let mut lo = 0.5;
    while g(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    bisect(g, lo, 1.0)
}

/// Closed form `1 + W₀(-R₀ e^{-R₀})/R₀`, kept as a cross-check of [`z_inf`].
pub fn z_inf_lambert(r0: f64) -> f64 {
    if r0 <= 1.0 {
        return 0.0;
    }
    1.0 + lambert_w0(-r0 * (-r0).exp()).expect("argument >= -1/e") / r0
}

/// Asymptotic variance of the scaled final size given a major outbreak.
pub fn sigma2_w(lambda_w: f64, mu_i: f64, sigma2_i: f64, z_inf: f64) -> Result<f64> {
    let r0 = lambda_w * mu_i;
    if r0 <= 1.0 {
        return Err(Error::Domain(format!("sigma2_W needs R0 > 1, got {r0}")));
    }
    let one_minus = 1.0 - z_inf;
    let num = z_inf * one_minus + lambda_w * lambda_w * sigma2_i * one_minus * one_minus * z_inf;
    let den = 1.0 - lambda_w * mu_i * one_minus;
    Ok(num / (den * den))
}

/// Pairwise infection probability of the community-level Reed-Frost epidemic.
pub fn p_rf(lambda_g: f64, pi_w: f64, z_inf: f64, mu_i: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Precondition("p_RF needs m >= 1".into()));
    }
    Ok(-(-lambda_g * (1.0 - pi_w) * z_inf * mu_i / m as f64).exp_m1())
}

/// Borel probability `(kR)^{k-1} e^{-kR} / k!`, evaluated in log space.
pub fn borel_pmf(r_star: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if r_star <= 0.0 {
        return if k == 1 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    let log_p = (kf - 1.0) * (kf * r_star).ln() - kf * r_star - statrs::function::gamma::ln_gamma(kf + 1.0);
    log_p.exp()
}

/// Extinction probability of a Poisson(`r`) Galton-Watson process: smallest
/// root of `q = exp(-r(1-q))`.
pub fn poisson_extinction(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    smallest_fixed_point(|q| (-r * (1.0 - q)).exp())
}

/// Probability a community avoids infection given its susceptibility set has
/// `k` members, with `n` susceptibles and `a` initial infectives.
pub fn theta_escape(n: u64, a: u64, k: u64) -> Result<f64> {
    if n < 1 || a < 1 || k > n + a - 1 {
        return Err(Error::Precondition(format!(
            "theta_escape needs N >= 1, a >= 1, 0 <= k <= N+a-1 (N={n}, a={a}, k={k})"
        )));
    }
    if k >= n {
        return Ok(0.0);
    }
    Ok((1..=k).map(|j| (n - j) as f64 / (n + a - j) as f64).product())
}

/// All asymptotic scalars for given period and scaled rates.
///
/// `sigma2_w` is absent unless `R₀ > 1`; `sigma_n` and `b`-based covariance
/// are absent unless `R* > 1`. `tau` is `0` exactly when `R* ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitQuantities {
    pub lambda_w: f64,
    pub lambda_g: f64,
    pub mu_i: f64,
    pub sigma2_i: f64,
    pub r0: f64,
    pub pi_w: f64,
    pub z_inf: f64,
    pub sigma2_w: Option<f64>,
    pub r_star: f64,
    pub pi_check_g: f64,
    pub tau: f64,
    pub x_tau: f64,
    pub z_tau: f64,
    pub a_tau: f64,
    pub sigma_n: Option<[[f64; 3]; 3]>,
    pub b: [f64; 3],
}

impl LimitQuantities {
    pub fn new(period: &InfectiousPeriod, lambda_w: f64, lambda_g: f64) -> Result<Self> {
        limit_quantities(period, lambda_w, lambda_g)
    }

    /// Rate of the exponential clock in `x(t)`: `λ_G(1-π_W)`.
    pub fn trigger_rate(&self) -> f64 {
        self.lambda_g * (1.0 - self.pi_w)
    }

    /// `(x(t), z(t), a(t))`.
    pub fn xza(&self, t: f64) -> (f64, f64, f64) {
        let x = -(-self.trigger_rate() * t).exp_m1();
        (x, self.z_inf * x, self.mu_i * self.z_inf * x)
    }

    pub fn p_rf(&self, m: usize) -> Result<f64> {
        p_rf(self.lambda_g, self.pi_w, self.z_inf, self.mu_i, m)
    }

    /// `τ` from the Lambert form; cross-check for the bisection value.
    pub fn tau_lambert(&self) -> f64 {
        if self.r_star <= 1.0 {
            return 0.0;
        }
        let w = lambert_w0(-self.r_star * (-self.r_star).exp()).expect("argument >= -1/e");
        (self.mu_i * self.z_inf * (1.0 + w / self.r_star)).max(0.0)
    }

    /// `π̌_G` from the Lambert form; cross-check for the fixed-point value.
    pub fn pi_check_g_lambert(&self) -> f64 {
        if self.r_star <= 0.0 {
            return 1.0;
        }
        let w = lambert_w0(-self.r_star * (-self.r_star).exp()).expect("argument >= -1/e");
        (self.pi_w - (1.0 - self.pi_w) * w / self.r_star).min(1.0)
    }
}

/// See [`LimitQuantities`].
pub fn limit_quantities(period: &InfectiousPeriod, lambda_w: f64, lambda_g: f64) -> Result<LimitQuantities> {
    if !(lambda_g > 0.0 && lambda_g.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda_G must be positive, got {lambda_g}")));
    }
    let (mu_i, sigma2_i) = period.moments();
    let r0 = mu_i * lambda_w;
    let pi_w = pi_w(period, lambda_w)?;
    let z_inf = z_inf(r0);
    let sigma2_w = if r0 > 1.0 { Some(sigma2_w(lambda_w, mu_i, sigma2_i, z_inf)?) } else { None };
    let r_star = lambda_g * (1.0 - pi_w) * z_inf * mu_i;

    let c = mu_i * lambda_g * z_inf;
    let pi_check_g =
        if r_star > 1.0 { smallest_fixed_point(|s| pi_w + (1.0 - pi_w) * (-c * (1.0 - s)).exp()) } else { 1.0 };

    let rate = lambda_g * (1.0 - pi_w);
    let a_of = |t: f64| mu_i * z_inf * -(-rate * t).exp_m1();
    let tau = if r_star > 1.0 {
        let g = |t: f64| a_of(t) - t;
        let mut lo = TAU_EPS;
        while g(lo) <= 0.0 && lo < mu_i * z_inf {
            lo *= 2.0;
        }
        bisect(g, lo, mu_i * z_inf)
    } else {
        0.0
    };
    let x_tau = -(-rate * tau).exp_m1();

    let mut q = LimitQuantities {
        lambda_w,
        lambda_g,
        mu_i,
        sigma2_i,
        r0,
        pi_w,
        z_inf,
        sigma2_w,
        r_star,
        pi_check_g,
        tau,
        x_tau,
        z_tau: z_inf * x_tau,
        a_tau: mu_i * z_inf * x_tau,
        sigma_n: None,
        b: [1.0, z_inf, mu_i * z_inf],
    };
    q.sigma_n = sigma_n_matrix(&q).ok();
    Ok(q)
}

/// `(x(t), z(t), a(t))` for the given limits.
pub fn xza(q: &LimitQuantities, t: f64) -> Result<(f64, f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("xza needs t >= 0, got {t}")));
    }
    Ok(q.xza(t))
}

/// Scalar `c` in `Σ_N = c·b·bᵀ`.
pub fn sigma_n_scale(q: &LimitQuantities) -> Result<f64> {
    if q.r_star <= 1.0 {
        return Err(Error::Domain(format!("Sigma_N needs R* > 1, got {}", q.r_star)));
    }
    let x = q.x_tau;
    let den = 1.0 - q.z_inf * q.mu_i * q.lambda_g * (1.0 - q.pi_w) * (1.0 - x);
    Ok(x * (1.0 - x) / (den * den))
}

/// Rank-one covariance of the global-epidemic CLT.
pub fn sigma_n_matrix(q: &LimitQuantities) -> Result<[[f64; 3]; 3]> {
    let c = sigma_n_scale(q)?;
    let b = q.b;
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = c * b[i] * b[j];
        }
    }
    Ok(s)
}

#[cfg(test)]
pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> InfectiousPeriod {
        InfectiousPeriod::exponential(1.0).unwrap()
    }
    fn const1() -> InfectiousPeriod {
        InfectiousPeriod::constant(1.0).unwrap()
    }

    /// Independent oracle: plain bisection on `s = e^{-2(1-s)}` restricted to `(0, 0.5)`.
    fn const_pi_w_oracle() -> f64 {
        let g = |s: f64| (-2.0 * (1.0 - s)).exp() - s;
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo
    }

    #[test]
    fn pi_w_examples() {
        assert!((pi_w(&exp1(), 2.0).unwrap() - 0.5).abs() < 1e-10);
        let c = pi_w(&const1(), 2.0).unwrap();
        assert!((c - const_pi_w_oracle()).abs() < 1e-10);
        assert!((c - 0.203_187_8).abs() < 1e-6, "{c}");
        assert_eq!(pi_w(&exp1(), 0.5).unwrap(), 1.0);
        assert!(pi_w(&exp1(), 0.0).is_err());
    }

    #[test]
    fn pi_w_gamma_residual() {
        let g = InfectiousPeriod::gamma(2.0, 2.0).unwrap();
        let p = pi_w(&g, 2.0).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert!((p - g.laplace(2.0 * (1.0 - p)).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn z_inf_examples() {
        assert_eq!(z_inf(1.0), 0.0);
        let z = z_inf(2.0);
        assert!((z - 0.796_812_129_928_3).abs() < 1e-9, "{z}");
        assert!(z > 0.5);
        assert!((z - z_inf_lambert(2.0)).abs() < 1e-9);
    }

    #[test]
    fn sigma2_w_examples() {
        let z = z_inf(2.0);
        // plug-in values recomputed from the formula with z = 0.7968121299...
        let e = sigma2_w(2.0, 1.0, 1.0, z).unwrap();
        let c = sigma2_w(2.0, 1.0, 0.0, z).unwrap();
        let oracle = |s2: f64| {
            let u = 1.0 - z;
            (z * u + 4.0 * s2 * u * u * z) / (1.0 - 2.0 * u).powi(2)
        };
        assert!((e - oracle(1.0)).abs() < 1e-14);
        assert!((c - oracle(0.0)).abs() < 1e-14);
        assert!((e - 0.8329).abs() < 5e-4, "{e}");
        assert!((c - 0.4594).abs() < 5e-4, "{c}");
        assert!(sigma2_w(1.0, 1.0, 1.0, 0.0).is_err());
        // everyone infected, no period variance: no fluctuation left
        assert!(sigma2_w(50.0, 1.0, 0.0, 1.0 - 1e-15).unwrap() < 1e-12);
    }

    #[test]
    fn p_rf_examples() {
        let z = z_inf(2.0);
        let p = p_rf(6.0, 0.5, z, 1.0, 20).unwrap();
        assert!((p - (1.0 - (-6.0 * 0.5 * z / 20.0f64).exp())).abs() < 1e-15);
        assert!((p - 0.112_655_35).abs() < 1e-7, "{p}");
        assert_eq!(p_rf(6.0, 1.0, z, 1.0, 20).unwrap(), 0.0);
        let m = 1_000_000;
        let big = p_rf(6.0, 0.5, z, 1.0, m).unwrap();
        let first_order = 6.0 * 0.5 * z / m as f64;
        assert!(((big - first_order) / first_order).abs() < 1e-5);
        assert!(p_rf(6.0, 0.5, z, 1.0, 0).is_err());
    }

    #[test]
    fn baseline_exponential_limits() {
        let q = limit_quantities(&exp1(), 2.0, 6.0).unwrap();
        assert_eq!(q.r0, 2.0);
        assert!((q.pi_w - 0.5).abs() < 1e-10);
        assert!((q.z_inf - 0.796812).abs() < 1e-6);
        assert!((q.r_star - 2.3904).abs() < 1e-4, "{}", q.r_star);
        assert!((q.z_tau - 0.6990).abs() < 5e-4, "{}", q.z_tau);
        assert!((q.tau - q.tau_lambert()).abs() < 1e-8);
        assert!((q.pi_check_g - q.pi_check_g_lambert()).abs() < 1e-8);
        assert!(q.pi_check_g < 1.0);
    }

    #[test]
    fn baseline_constant_limits() {
        let q = limit_quantities(&const1(), 2.0, 6.0).unwrap();
        assert!((q.pi_w - 0.20319).abs() < 1e-5);
        assert!((q.r_star - 3.8094).abs() < 1e-4, "{}", q.r_star);
        assert!((q.z_tau - 0.7775).abs() < 5e-4, "{}", q.z_tau);
    }

    #[test]
    fn subcritical_limits() {
        let q = limit_quantities(&exp1(), 0.5, 6.0).unwrap();
        assert_eq!(q.pi_w, 1.0);
        assert_eq!(q.z_inf, 0.0);
        assert_eq!(q.r_star, 0.0);
        assert_eq!(q.tau, 0.0);
        assert_eq!(q.pi_check_g, 1.0);
        assert!(q.sigma2_w.is_none());
        assert!(q.sigma_n.is_none());
    }

    #[test]
    fn type_invariants() {
        for (p, lw, lg) in [(exp1(), 2.0, 6.0), (const1(), 2.0, 6.0), (exp1(), 1.5, 1.0), (const1(), 3.0, 0.5)] {
            let q = limit_quantities(&p, lw, lg).unwrap();
            assert_eq!(q.r0, q.mu_i * lw);
            assert!((q.r_star - lg * (1.0 - q.pi_w) * q.z_inf * q.mu_i).abs() < 1e-15);
            assert_eq!(q.tau > 0.0, q.r_star > 1.0);
            assert_eq!(q.pi_check_g < 1.0, q.r_star > 1.0);
            assert!((q.a_tau - q.tau).abs() < 1e-8);
            assert!((q.z_tau - q.z_inf * q.x_tau).abs() < 1e-15);
            assert!((q.a_tau - q.mu_i * q.z_tau).abs() < 1e-15);
            assert_eq!(q.b, [1.0, q.z_inf, q.mu_i * q.z_inf]);
        }
    }

    #[test]
    fn xza_examples() {
        let q = limit_quantities(&exp1(), 2.0, 6.0).unwrap();
        assert_eq!(xza(&q, 0.0).unwrap(), (0.0, 0.0, 0.0));
        let (x, z, a) = xza(&q, 100.0).unwrap();
        assert!((x - 1.0).abs() < 1e-10);
        assert!((z - q.z_inf).abs() < 1e-10 && (a - q.mu_i * q.z_inf).abs() < 1e-10);
        let (_, _, a) = xza(&q, q.tau).unwrap();
        assert!((a - q.tau).abs() < 1e-8);
        assert!(xza(&q, -1.0).is_err());
    }

    #[test]
    fn borel_examples() {
        assert!((borel_pmf(0.5, 1) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((borel_pmf(0.5, 2) - (-1f64).exp() / 2.0).abs() < 1e-15);
        let total: f64 = (1..=5000).map(|k| borel_pmf(0.5, k)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // large k stays finite in log space
        let big = borel_pmf(1.0, 1_000_000);
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn borel_mass_is_extinction_probability() {
        for r in [0.3, 1.0, 1.7, 2.3904, 3.8] {
            let total: f64 = (1..=20_000).map(|k| borel_pmf(r, k)).sum();
            let q = poisson_extinction(r);
            // at R* = 1 the tail decays like k^{-3/2}
            let tol = if r == 1.0 { 1e-2 } else { 1e-6 };
            assert!((total - q).abs() < tol, "R*={r} sum={total} q={q}");
        }
    }

    #[test]
    fn sigma_n_rank_one() {
        let q = limit_quantities(&exp1(), 2.0, 6.0).unwrap();
        let s = sigma_n_matrix(&q).unwrap();
        assert!((s[0][1] - q.z_inf * s[0][0]).abs() < 1e-15);
        assert!((s[0][2] - q.mu_i * q.z_inf * s[0][0]).abs() < 1e-15);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s[i][j], s[j][i]);
            }
        }
        assert!(det3(&s).abs() < 1e-12 * s[0][0].powi(3).max(1.0));
        let c = q.x_tau * (1.0 - q.x_tau) / (1.0 - q.z_inf * 6.0 * 0.5 * (1.0 - q.x_tau)).powi(2);
        assert!((s[0][0] - c).abs() < 1e-14);
        let sub = limit_quantities(&exp1(), 0.5, 6.0).unwrap();
        assert!(sigma_n_matrix(&sub).is_err());
    }

    #[test]
    fn theta_escape_examples() {
        assert_eq!(theta_escape(7, 3, 0).unwrap(), 1.0);
        assert_eq!(theta_escape(2, 1, 1).unwrap(), 0.5);
        assert_eq!(theta_escape(5, 2, 5).unwrap(), 0.0);
        assert_eq!(theta_escape(5, 2, 6).unwrap(), 0.0);
        assert!(theta_escape(5, 2, 7).is_err());
        assert!(theta_escape(0, 2, 0).is_err());
        let v: Vec<f64> = (1..10).map(|k| theta_escape(10, 3, k).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn supercritical_effective_reproduction_below_one() {
        let mut r = 1.01;
        while r < 20.0 {
            assert!((1.0 - z_inf(r)) * r < 1.0, "R0={r}");
            r += 0.07;
        }
    }
}
