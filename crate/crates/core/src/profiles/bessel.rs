//! Bessel function of the first kind, order one.
//!
//! Three regimes, all accurate to about 1e-15 absolute on `|x| ≤ 50`:
//!
//! - `|x| < 8`: ascending power series. The largest term near `x = 8` is
//!   ~1e2, so cancellation costs at most two digits.
//! - `8 ≤ |x| < 25`: Miller's backward recurrence normalized with
//!   `J₀ + 2ΣJ₂ₖ = 1`. The Hankel expansion is not yet accurate enough here
//!   (its smallest term is ~`e^{-2x}`).
//! - `|x| ≥ 25`: Hankel asymptotic expansion, truncated at its smallest term.

use crate::{Error, Result};

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// First positive zero of `J₁`.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512_3;

/// `J₁(x)`. Odd in `x`; rejects NaN and infinities.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j1 needs a finite argument, got {x}")));
    }
    let ax = x.abs();
    let value = if ax < SERIES_LIMIT {
        series(ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax)
    } else {
        hankel(ax)
    };
    Ok(if x < 0.0 { -value } else { value })
}

fn series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..60 {
        let k = k as f64;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    // (e x / 2N)^N is below 1e-30 for N = x + 60 throughout the band.
    let top = 2 * ((x as usize + 60) / 2);
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{m+1}
    let mut current = 1e-30; // J_m, m = top (even)
    let mut norm = 2.0 * current;
    let mut j1 = 0.0;
    for m in (1..=top).rev() {
        let below = m as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let order = m - 1;
        if order == 1 {
            j1 = current;
        }
        if order == 0 {
            norm += current;
        } else if order % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > 1e200 {
            above *= 1e-200;
            current *= 1e-200;
            norm *= 1e-200;
            j1 *= 1e-200;
        }
    }
    j1 / norm
}

fn hankel(x: f64) -> f64 {
    // a_k(1) = prod_{m=1..k} (4 - (2m-1)^2) / (k! 8^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut previous = f64::INFINITY;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        term *= (4.0 - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= previous || term.abs() < 1e-18 {
            break;
        }
        previous = term.abs();
        // term_k carries sign (-1)^{floor(k/2)} relative to the P/Q sums
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
    }
    let (s, c) = x.sin_cos();
    let frac = std::f64::consts::FRAC_1_SQRT_2;
    let cos_chi = (s - c) * frac;
    let sin_chi = -(s + c) * frac;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}
