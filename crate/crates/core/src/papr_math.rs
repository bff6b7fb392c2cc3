//! Closed-form distribution theory for the PAPR and crest factor of `n`
//! i.i.d. zero-mean complex Gaussian samples.
//!
//! With the sample power normalized by its mean, each normalized power is
//! Exp(1) and each normalized amplitude is Rayleigh(1/√2). PAPR is the
//! maximum of `n` such powers, CF its square root. Nothing here depends on
//! the noise variance.

use serde::{Deserialize, Serialize};

use crate::error::{domain, PaprError, Result};
use crate::quadrature::{integrate_to_infinity, QuadratureSpec};
use crate::scalar::Real;

/// Largest `n` for which harmonic numbers are summed term by term.
pub const HARMONIC_DIRECT_LIMIT: u64 = 1_000_000;

/// Largest `n` accepted by [`mean_cf_sum`].
pub const CF_SUM_MAX_N: u64 = 50;

/// Number of i.i.d. complex samples in one PAPR observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaprModel {
    n: u64,
}

impl PaprModel {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return domain("sample count n must be at least 1");
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn n_as<T: Real>(&self) -> T {
        T::from_count(self.n)
    }

    fn require_at_least(&self, min: u64, what: &str) -> Result<()> {
        if self.n < min {
            return domain(format!("{what} requires n >= {min}, got n = {}", self.n));
        }
        Ok(())
    }
}

/// Observation period and one-sided impulse bandwidth of a swept analyzer's
/// resolution filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeysightInput<T> {
    pub tau: T,
    pub bw_i: T,
}

impl<T: Real> KeysightInput<T> {
    pub fn new(tau: T, bw_i: T) -> Result<Self> {
        if !(tau > T::zero() && bw_i > T::zero()) {
            return domain(format!(
                "observation period and impulse bandwidth must be positive (tau {tau}, bw_i {bw_i})"
            ));
        }
        Ok(Self { tau, bw_i })
    }
}

fn check_nonneg<T: Real>(x: T, what: &str) -> Result<()> {
    if x.is_nan() || x < T::zero() {
        return domain(format!("{what} must be >= 0, got {x}"));
    }
    Ok(())
}

fn check_probability<T: Real>(p: T) -> Result<()> {
    if p.is_nan() || p < T::zero() || p >= T::one() {
        return domain(format!("probability must satisfy 0 <= p < 1, got {p}"));
    }
    Ok(())
}

/// Standard Gumbel CDF with location `loc` and scale `scale`.
pub fn gumbel_cdf<T: Real>(x: T, loc: T, scale: T) -> T {
    (-(-(x - loc) / scale).exp()).exp()
}

/// `(1 − e^{−x})^n`.
pub fn papr_cdf<T: Real>(x: T, m: PaprModel) -> Result<T> {
    check_nonneg(x, "PAPR")?;
    let log_single = (-(-x).exp()).ln_1p();
    Ok((m.n_as::<T>() * log_single).exp())
}

/// `(1 − e^{−x²})^n`, i.e. the PAPR CDF at `x²`.
pub fn cf_cdf<T: Real>(x: T, m: PaprModel) -> Result<T> {
    check_nonneg(x, "CF")?;
    papr_cdf(x * x, m)
}

/// `−ln(1 − p^{1/n})` for `0 ≤ p < 1`.
pub fn papr_quantile<T: Real>(p: T, m: PaprModel) -> Result<T> {
    check_probability(p)?;
    if p == T::zero() {
        return Ok(T::zero());
    }
    let root = p.ln() / m.n_as::<T>();
    // 1 − p^{1/n} = −expm1(ln p / n)
    let tail = -root.exp_m1();
    Ok(-tail.ln())
}

pub fn cf_quantile<T: Real>(p: T, m: PaprModel) -> Result<T> {
    papr_quantile(p, m).map(|x| x.sqrt())
}

/// `n e^{−x} (1 − e^{−x})^{n−1}`.
pub fn papr_pdf<T: Real>(x: T, m: PaprModel) -> Result<T> {
    check_nonneg(x, "PAPR")?;
    let e = (-x).exp();
    if m.n == 1 {
        return Ok(e);
    }
    let n = m.n_as::<T>();
    let log_rest = (n - T::one()) * (-e).ln_1p();
    Ok(n * e * log_rest.exp())
}

/// Density of `10·log10(PAPR)` per dB.
pub fn papr_pdf_db<T: Real>(y: T, m: PaprModel) -> Result<T> {
    if y.is_nan() {
        return domain("dB argument is NaN");
    }
    let ten = T::lit(10.0);
    let x = ten.powf(y / ten);
    if x.is_infinite() {
        return Ok(T::zero());
    }
    let jacobian = T::LN_10() / ten * x;
    Ok(papr_pdf(x, m)? * jacobian)
}

/// Gumbel approximation to the PAPR CDF: location `ln n`, unit scale.
pub fn papr_cdf_asymptotic<T: Real>(x: T, m: PaprModel) -> Result<T> {
    m.require_at_least(2, "asymptotic PAPR CDF")?;
    Ok(gumbel_cdf(x, m.n_as::<T>().ln(), T::one()))
}

/// Gumbel approximation to the CF CDF: location `√ln n`, scale `1/(2√ln n)`.
pub fn cf_cdf_asymptotic<T: Real>(x: T, m: PaprModel) -> Result<T> {
    m.require_at_least(2, "asymptotic CF CDF")?;
    let (loc, scale) = cf_gumbel_parameters(m);
    Ok(gumbel_cdf(x, loc, scale))
}

/// Location and scale of the limiting Gumbel law of the crest factor.
pub fn cf_gumbel_parameters<T: Real>(m: PaprModel) -> (T, T) {
    let root_ln = m.n_as::<T>().ln().sqrt();
    (root_ln, T::one() / (T::lit(2.0) * root_ln))
}

/// `H_n = Σ_{k=1}^{n} 1/k`.
///
/// Summed exactly (smallest terms first) up to [`HARMONIC_DIRECT_LIMIT`],
/// otherwise from the expansion
/// `ln n + γ + 1/(2n) − 1/(12n²) + 1/(120n⁴)`, whose truncation error
/// there is below 1e-37.
pub fn harmonic_number<T: Real>(n: u64) -> T {
    if n <= HARMONIC_DIRECT_LIMIT {
        partial_harmonic_direct(1, n)
    } else {
        harmonic_asymptotic(n)
    }
}

/// Five-term asymptotic expansion of `H_n`.
pub fn harmonic_asymptotic<T: Real>(n: u64) -> T {
    let n = T::from_count(n);
    let n2 = n * n;
    n.ln() + T::euler_gamma() + T::one() / (T::lit(2.0) * n) - T::one() / (T::lit(12.0) * n2)
        + T::one() / (T::lit(120.0) * n2 * n2)
}

fn partial_harmonic_direct<T: Real>(lo: u64, hi: u64) -> T {
    (lo..=hi).rev().map(|k| T::one() / T::from_count(k)).sum()
}

/// Mean of the r-th smallest of `n` standard exponentials,
/// `Σ_{k=n−r+1}^{n} 1/k`.
pub fn mean_order_statistic_power<T: Real>(r: u64, m: PaprModel) -> Result<T> {
    if r == 0 || r > m.n {
        return domain(format!("order index r must satisfy 1 <= r <= n = {}, got {r}", m.n));
    }
    if r <= HARMONIC_DIRECT_LIMIT {
        Ok(partial_harmonic_direct(m.n - r + 1, m.n))
    } else {
        Ok(harmonic_number::<T>(m.n) - harmonic_number::<T>(m.n - r))
    }
}

/// Exact mean PAPR, `H_n`.
pub fn mean_papr<T: Real>(m: PaprModel) -> T {
    harmonic_number(m.n)
}

/// `ln n + γ`.
pub fn mean_papr_gumbel<T: Real>(m: PaprModel) -> Result<T> {
    m.require_at_least(2, "Gumbel mean PAPR")?;
    Ok(m.n_as::<T>().ln() + T::euler_gamma())
}

/// `√ln n + γ / (2√ln n)`.
pub fn mean_cf_gumbel<T: Real>(m: PaprModel) -> Result<T> {
    m.require_at_least(2, "Gumbel mean CF")?;
    let (loc, scale) = cf_gumbel_parameters::<T>(m);
    Ok(loc + T::euler_gamma() * scale)
}

/// Jensen upper bound `√H_n` on the mean crest factor.
pub fn mean_cf_bound<T: Real>(m: PaprModel) -> T {
    mean_papr::<T>(m).sqrt()
}

/// Mean crest factor from the alternating binomial sum
/// `(√π/2) Σ_{k=1}^{n} C(n,k) (−1)^{k−1} k^{−1/2}`.
///
/// The terms grow like `C(n, n/2)` while the result stays O(1), so the sum
/// is accumulated in double-double arithmetic. Refuses `n > 50`.
pub fn mean_cf_sum<T: Real>(m: PaprModel) -> Result<T> {
    if m.n > CF_SUM_MAX_N {
        return Err(PaprError::Unstable(format!(
            "binomial sum for mean CF is limited to n <= {CF_SUM_MAX_N}, got n = {}; use mean_cf_integral",
            m.n
        )));
    }
    let n = m.n;
    let mut acc = DoubleDouble::ZERO;
    // C(50, 25) < 2^53, so every coefficient is exact in f64.
    let mut binom: u64 = 1;
    for k in 1..=n {
        binom = binom * (n - k + 1) / k;
        let term = DoubleDouble::recip_sqrt(k as f64).mul_f64(binom as f64);
        acc = if k % 2 == 1 { acc.add(term) } else { acc.sub(term) };
    }
    let half_root_pi = std::f64::consts::PI.sqrt() / 2.0;
    Ok(T::lit(acc.mul_f64(half_root_pi).to_f64()))
}

/// Mean crest factor `∫₀¹ √(−ln(1 − u^{1/n})) du`, by adaptive quadrature.
///
/// The integrand diverges at `u = 1`. Substituting `u = 1 − e^{−s}` gives
/// `∫₀^∞ e^{−s} √(−ln(1 − (1 − e^{−s})^{1/n})) ds`, which is bounded and
/// decays exponentially.
pub fn mean_cf_integral<T: Real>(m: PaprModel, q: &QuadratureSpec<T>) -> Result<T> {
    let n = m.n_as::<T>();
    let ln2 = T::LN_2();
    let integrand = move |s: T| {
        if s <= T::zero() {
            return T::zero();
        }
        let decay = (-s).exp();
        if decay == T::zero() {
            return T::zero();
        }
        // ln u with u = 1 − e^{−s}
        let ln_u = if s > ln2 {
            (-decay).ln_1p()
        } else {
            (-(-s).exp_m1()).ln()
        };
        let tail = -(ln_u / n).exp_m1();
        let value = -tail.ln();
        if value <= T::zero() {
            return T::zero();
        }
        decay * value.sqrt()
    };
    integrate_to_infinity(integrand, T::zero(), q).map(|r| r.value)
}

/// Mean PAPR approximation `ln n` from the microwave-measurement literature.
pub fn prior_mean_papr_dunsmore<T: Real>(m: PaprModel) -> Result<T> {
    m.require_at_least(2, "ln n approximation")?;
    Ok(m.n_as::<T>().ln())
}

/// Vendor application-note approximation `ln(πn + e)`.
pub fn prior_mean_papr_keysight<T: Real>(m: PaprModel) -> T {
    (T::PI() * m.n_as::<T>() + T::E()).ln()
}

/// Vendor approximation in analyzer terms, `ln(2π τ BW_i + e)`.
pub fn prior_mean_papr_keysight_bw<T: Real>(k: KeysightInput<T>) -> T {
    (T::lit(2.0) * T::PI() * k.tau * k.bw_i + T::E()).ln()
}

// Minimal double-double arithmetic (hi + lo, |lo| <= ulp(hi)/2).
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self { hi: s, lo: b - (s - a) }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let t = Self::two_sum(self.lo, other.lo);
        let s = Self::quick_two_sum(s.hi, s.lo + t.hi);
        Self::quick_two_sum(s.hi, s.lo + t.lo)
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Self::two_prod(self.hi, b);
        Self::quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn mul(self, other: Self) -> Self {
        let p = Self::two_prod(self.hi, other.hi);
        Self::quick_two_sum(p.hi, p.lo + (self.hi * other.lo + self.lo * other.hi))
    }

    /// `1/√k` refined by one Newton step from the f64 estimate.
    fn recip_sqrt(k: f64) -> Self {
        let r0 = 1.0 / k.sqrt();
        let r0_dd = Self { hi: r0, lo: 0.0 };
        let k_r2 = Self::two_prod(r0, r0).mul_f64(k);
        let residual = Self { hi: 1.0, lo: 0.0 }.sub(k_r2);
        r0_dd.add(r0_dd.mul(residual).mul_f64(0.5))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}
