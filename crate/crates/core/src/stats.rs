//! Closed-form statistical helpers for the fair-coin binomial.
//!
//! Everything here concerns `B ~ Binomial(m, 1/2)` because that is the only
//! distribution the sampling scheme produces. Moments are computed from
//! integer numerators over power-of-two denominators, so for the `m` that
//! occur in practice the returned doubles are exact.

use crate::{Error, Result};

/// First four raw moments of `Binomial(m, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialMoments {
    pub m: u32,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

impl BinomialMoments {
    /// Variance `e2 - e1^2`, equal to `m/4`.
    pub fn variance(&self) -> f64 {
        self.e2 - self.e1 * self.e1
    }
}

/// Raw moments of `Binomial(m, 1/2)`:
/// `E[B] = m/2`, `E[B^2] = m^2/4 + m/4`, `E[B^3] = m^3/8 + 3m^2/8`,
/// `E[B^4] = m^4/16 + 3m^3/8 + 3m^2/16 - m/8`.
pub fn binomial_moments(m: u32) -> Result<BinomialMoments> {
    if m == 0 {
        return Err(Error::InvalidParameter("binomial_moments requires m >= 1".into()));
    }
    let mi = m as i128;
    // Integer numerators over a common power-of-two denominator keep the
    // division exact for m <= 64 (numerators stay far below 2^53).
    let e1 = (mi * 8) as f64 / 16.0;
    let e2 = (4 * mi * mi + 4 * mi) as f64 / 16.0;
    let e3 = (2 * mi * mi * mi + 6 * mi * mi) as f64 / 16.0;
    let e4 = (mi * mi * mi * mi + 6 * mi * mi * mi + 3 * mi * mi - 2 * mi) as f64 / 16.0;
    Ok(BinomialMoments { m, e1, e2, e3, e4 })
}

/// Exact third absolute central moment `E|B - m/2|^3` for even `m`:
/// `m^2 / 2^(m+2) * C(m, m/2)`.
pub fn third_abs_moment_exact(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("third_abs_moment_exact requires m >= 1".into()));
    }
    if m % 2 != 0 {
        return Err(Error::InvalidParameter(
            "third_abs_moment_exact holds for even m only; enumerate the pmf for odd m".into(),
        ));
    }
    let central = binomial_coefficient(m, m / 2)
        .ok_or_else(|| Error::InvalidParameter("m too large for exact arithmetic".into()))?;
    let numer = (m as u128) * (m as u128) * central;
    Ok(numer as f64 / 2f64.powi(m as i32 + 2))
}

/// Upper bound `m^(3/2) / sqrt(8*pi)` on the third absolute central moment,
/// valid for all `m >= 1`.
pub fn third_abs_moment_bound(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("third_abs_moment_bound requires m >= 1".into()));
    }
    let m = m as f64;
    Ok(m.powf(1.5) / (8.0 * std::f64::consts::PI).sqrt())
}

/// Smallest `n` with `2^(b+1) * exp(-2 n delta^2) <= eta`: the sample count
/// under which the empirical precision of *every* anchor of a length-`b`
/// document stays within `delta` of the true precision with probability at
/// least `1 - eta`.
pub fn hoeffding_sample_size(b: u32, delta: f64, eta: f64) -> Result<usize> {
    if b == 0 {
        return Err(Error::InvalidParameter("hoeffding_sample_size requires b >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)".into()));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter("eta must lie in (0, 1)".into()));
    }
    let target = ((b as f64 + 1.0) * std::f64::consts::LN_2 + (1.0 / eta).ln()) / (2.0 * delta * delta);
    let mut n = target.ceil().max(1.0) as usize;
    // The ceil can land one off after rounding; walk to the true minimum.
    while hoeffding_failure_bound(b, delta, n) > eta {
        n += 1;
    }
    while n > 1 && hoeffding_failure_bound(b, delta, n - 1) <= eta {
        n -= 1;
    }
    Ok(n)
}

/// The union-bound failure probability `2^(b+1) * exp(-2 n delta^2)`.
pub fn hoeffding_failure_bound(b: u32, delta: f64, n: usize) -> f64 {
    2f64.powi(b as i32 + 1) * (-2.0 * n as f64 * delta * delta).exp()
}

/// `C(n, k)` while it fits in a `u128`.
pub(crate) fn binomial_coefficient(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}
