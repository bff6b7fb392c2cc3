//! Exact rational forms of the harmonic-number results, for small `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{domain, Result};
use crate::papr_math::PaprModel;

/// `H_n` as an exact fraction.
pub fn harmonic_exact(n: u64) -> BigRational {
    partial_harmonic_exact(1, n)
}

/// Exact mean of the r-th smallest of `n` standard exponentials.
pub fn mean_order_statistic_power_exact(r: u64, m: PaprModel) -> Result<BigRational> {
    let n = m.n();
    if r == 0 || r > n {
        return domain(format!("order index r must satisfy 1 <= r <= n = {n}, got {r}"));
    }
    Ok(partial_harmonic_exact(n - r + 1, n))
}

/// Nearest `f64` to an exact rational.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn partial_harmonic_exact(lo: u64, hi: u64) -> BigRational {
    let one = BigInt::from(1u8);
    (lo..=hi).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(one.clone(), BigInt::from(k))
    })
}
