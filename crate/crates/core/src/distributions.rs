//! Standard normal and chi-square distribution functions.
//!
//! Critical values follow the upper-tail convention used by the one-sided
//! rejection regions: `z_alpha` satisfies `Phi(z_alpha) = 1 - alpha`, and
//! likewise `chisq_quantile(alpha, df)` has upper-tail mass `alpha`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{ln_gamma_prefactor, regularized_gamma};

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability<T>(T);

impl<T: Real> Probability<T> {
    pub fn new(value: T) -> Result<Self> {
        if value >= T::zero() && value <= T::one() {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("probability must lie in [0, 1], got {value}")))
        }
    }

    /// A significance level, restricted to the open interval `(0, 1)`.
    pub fn level(value: T) -> Result<Self> {
        check_level(value)?;
        Ok(Self(value))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// Positive (not necessarily integer) degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct DegreesOfFreedom<T>(T);

impl<T: Real> DegreesOfFreedom<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > T::zero() && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidDegreesOfFreedom(value.to_f64().unwrap_or(f64::NAN)))
        }
    }

    /// `p(p-1)/2`, the degrees of freedom of the chi-square calibration.
    pub fn for_dimension(p: usize) -> Self {
        Self(T::from_count(crate::scalar::pair_count(p) as u64))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

fn check_level<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidProbability(alpha.to_f64().unwrap_or(f64::NAN)))
    }
}

/// `Phi(x)`. Saturates to 0 or 1 in the far tails.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let half = T::lit(0.5);
    let (p, q) = regularized_gamma(half, half * x * x).expect("shape 1/2 is valid");
    if x >= T::zero() {
        half + half * p
    } else {
        half * q
    }
}

/// `1 - Phi(x)`, computed without cancellation for large `x`.
pub fn std_normal_sf<T: Real>(x: T) -> T {
    std_normal_cdf(-x)
}

pub fn std_normal_pdf<T: Real>(x: T) -> T {
    (-T::lit(0.5) * x * x).exp() / T::TAU().sqrt()
}

/// Upper-tail critical value `z_alpha` with `Phi(z_alpha) = 1 - alpha`.
pub fn std_normal_quantile<T: Real>(alpha: T) -> Result<T> {
    check_level(alpha)?;
    let half = T::lit(0.5);
    if alpha == half {
        return Ok(T::zero());
    }
    // solve sf(z) = tail for z > 0, then restore the sign
    let (tail, sign) = if alpha < half { (alpha, T::one()) } else { (T::one() - alpha, -T::one()) };
    let ln_tail = tail.ln();

    let mut z = tail_guess(tail);
    let (mut lo, mut hi) = (T::zero(), T::lit(40.0));
    for _ in 0..200 {
        let sf = std_normal_sf(z);
        let g = sf.ln() - ln_tail;
        if g > T::zero() {
            lo = z;
        } else {
            hi = z;
        }
        // d/dz ln sf(z) = -pdf(z) / sf(z)
        let slope = -std_normal_pdf(z) / sf;
        let mut next = z - g / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = half * (lo + hi);
        }
        let step = (next - z).abs();
        z = next;
        if step <= T::lit(4.0) * T::epsilon() * z.abs().max(T::one()) || hi - lo <= T::epsilon() * hi {
            return Ok(sign * z);
        }
    }
    Err(Error::Convergence("normal quantile"))
}

/// Abramowitz & Stegun 26.2.23 starting point, |error| < 4.5e-4.
fn tail_guess<T: Real>(tail: T) -> T {
    let t = (T::lit(-2.0) * tail.ln()).sqrt();
    let num = T::lit(2.515_517) + t * (T::lit(0.802_853) + t * T::lit(0.010_328));
    let den = T::one() + t * (T::lit(1.432_788) + t * (T::lit(0.189_269) + t * T::lit(0.001_308)));
    (t - num / den).max(T::zero())
}

/// `P(chi^2_df <= x)`; zero for `x <= 0`.
pub fn chisq_cdf<T: Real>(x: T, df: T) -> Result<T> {
    let df = DegreesOfFreedom::new(df)?.value();
    let half = T::lit(0.5);
    Ok(regularized_gamma(half * df, half * x)?.0)
}

/// `P(chi^2_df > x)`.
pub fn chisq_sf<T: Real>(x: T, df: T) -> Result<T> {
    let df = DegreesOfFreedom::new(df)?.value();
    let half = T::lit(0.5);
    Ok(regularized_gamma(half * df, half * x)?.1)
}

pub fn chisq_pdf<T: Real>(x: T, df: T) -> Result<T> {
    let df = DegreesOfFreedom::new(df)?.value();
    if x <= T::zero() {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    Ok(ln_gamma_prefactor(half * df, half * x).exp() / x)
}

/// Upper-tail critical value: `chisq_cdf(result, df) = 1 - alpha`.
///
/// Newton on the log of whichever tail is smaller, started from the
/// Wilson-Hilferty cube approximation and kept inside a bracket that falls
/// back to bisection.
pub fn chisq_quantile<T: Real>(alpha: T, df: T) -> Result<T> {
    check_level(alpha)?;
    let df = DegreesOfFreedom::new(df)?.value();
    let half = T::lit(0.5);
    let upper = alpha <= half;
    let target = if upper { alpha } else { T::one() - alpha };
    let ln_target = target.ln();
    let a = half * df;

    // g(x) = ln(tail(x)) - ln(target); increasing in x for the lower tail
    let eval = |x: T| -> Result<(T, T)> {
        let (p, q) = regularized_gamma(a, half * x)?;
        let tail = if upper { q } else { p };
        let dens = ln_gamma_prefactor(a, half * x).exp() / x;
        let slope = if upper { -dens / tail } else { dens / tail };
        Ok((tail.ln() - ln_target, slope))
    };
    // sign of g that means "root lies above x"
    let below_root = |g: T| if upper { g > T::zero() } else { g < T::zero() };

    let mut x = wilson_hilferty(alpha, df)?;
    let mut lo = T::zero();
    let mut hi = x.max(df);
    loop {
        let (g, _) = eval(hi)?;
        if !below_root(g) {
            break;
        }
        lo = hi;
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::Convergence("chi-square quantile bracket"));
        }
    }
    if !(x > lo && x < hi) {
        x = half * (lo + hi);
    }

    for _ in 0..500 {
        let (g, slope) = eval(x)?;
        if g == T::zero() {
            return Ok(x);
        }
        if below_root(g) {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - g / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = half * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= T::lit(4.0) * T::epsilon() * x || hi - lo <= T::lit(2.0) * T::epsilon() * hi {
            return Ok(x);
        }
    }
    Err(Error::Convergence("chi-square quantile"))
}

fn wilson_hilferty<T: Real>(alpha: T, df: T) -> Result<T> {
    let z = std_normal_quantile(alpha)?;
    let c = T::lit(2.0) / (T::lit(9.0) * df);
    let cube = T::one() - c + z * c.sqrt();
    let guess = df * cube * cube * cube;
    Ok(if guess > T::zero() { guess } else { df * T::lit(1e-3) })
}
