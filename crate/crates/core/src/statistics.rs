//! Sum-of-squared-correlation statistics and their calibrations.
//!
//! * Schott: `t = sum r_ij^2`, centred by `p(p-1)/(2(n-1))` and scaled by
//!   `tau^2 = p(p-1)(n-2) / ((n-1)^2 (n+1))`.
//! * Mao: `T = sum r_ij^2 / (1 - r_ij^2)`, centred by `p(p-1)/(2(n-4))` and
//!   scaled by `sigma^2 = p(p-1)(n-3) / ((n-4)^2 (n-6))`.
//! * Fisher z: `Q = ((n-3) sum z_ij^2 - p(p-1)/2) / sqrt(p(p-1))`.
//!
//! The chi-square calibrations `sqrt(p(p-1)) * star + p(p-1)/2` are evaluated
//! directly from the raw statistic; going through the normalized value first
//! subtracts two large centerings when `p` is big.

use serde::Serialize;

use crate::correlation::CorrelationSummary;
use crate::error::{Error, Result};
use crate::scalar::{ordered_pairs, Real};

pub const SCHOTT_MIN_N: usize = 3;
pub const MAO_MIN_N: usize = 7;
pub const FISHER_MIN_N: usize = 4;

fn require_n(what: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::SampleSize { what, n, min })
    } else {
        Ok(())
    }
}

fn require_p(p: usize) -> Result<()> {
    if p < 2 {
        Err(Error::Dimension(p))
    } else {
        Ok(())
    }
}

#[inline]
fn count<T: Real>(k: usize) -> T {
    T::from_count(k as u64)
}

/// `p(p-1)` as a scalar, formed in integer arithmetic first.
#[inline]
fn pp<T: Real>(p: usize) -> T {
    T::from_count(ordered_pairs(p))
}

fn first_unit<T: Real>(corr: &CorrelationSummary<T>, what: &'static str) -> Result<()> {
    match corr.pairs().find(|&(_, _, r)| !(r.abs() < T::one())) {
        Some((i, j, _)) => Err(Error::DegenerateCorrelation { what, i, j }),
        None => Ok(()),
    }
}

/// Schott's `t = sum_{j<i} r_ij^2`.
pub fn schott_statistic<T: Real>(corr: &CorrelationSummary<T>) -> T {
    corr.offdiag().iter().map(|&r| r * r).sum()
}

/// Mao's `T = sum_{j<i} r_ij^2 / (1 - r_ij^2)`. Fails when some `|r_ij| = 1`.
pub fn mao_statistic<T: Real>(corr: &CorrelationSummary<T>) -> Result<T> {
    first_unit(corr, "Mao's T")?;
    Ok(corr
        .offdiag()
        .iter()
        .map(|&r| {
            let r2 = r * r;
            r2 / (T::one() - r2)
        })
        .sum())
}

/// Fisher z-transform statistic `Q`. Needs `n >= 4` and all `|r_ij| < 1`.
pub fn fisher_statistic<T: Real>(corr: &CorrelationSummary<T>) -> Result<T> {
    let (n, p) = (corr.n(), corr.p());
    require_n("Fisher's Q", n, FISHER_MIN_N)?;
    first_unit(corr, "Fisher's Q")?;
    let z2: T = corr
        .offdiag()
        .iter()
        .map(|&r| {
            let z = r.abs().atanh();
            z * z
        })
        .sum();
    let pp = pp::<T>(p);
    Ok((count::<T>(n - 3) * z2 - T::lit(0.5) * pp) / pp.sqrt())
}

/// Null mean of `t`: `p(p-1) / (2(n-1))`.
pub fn schott_null_mean<T: Real>(n: usize, p: usize) -> T {
    pp::<T>(p) / (T::lit(2.0) * count::<T>(n - 1))
}

/// `tau^2_np`.
pub fn schott_scale_sq<T: Real>(n: usize, p: usize) -> Result<T> {
    require_n("Schott's t*", n, SCHOTT_MIN_N)?;
    require_p(p)?;
    let nm1 = count::<T>(n - 1);
    Ok(pp::<T>(p) * count::<T>(n - 2) / (nm1 * nm1 * count::<T>(n + 1)))
}

/// Null mean of `T`: `p(p-1) / (2(n-4))`.
pub fn mao_null_mean<T: Real>(n: usize, p: usize) -> T {
    pp::<T>(p) / (T::lit(2.0) * count::<T>(n - 4))
}

/// `sigma^2_np`.
pub fn mao_scale_sq<T: Real>(n: usize, p: usize) -> Result<T> {
    require_n("Mao's T*", n, MAO_MIN_N)?;
    require_p(p)?;
    let nm4 = count::<T>(n - 4);
    Ok(pp::<T>(p) * count::<T>(n - 3) / (nm4 * nm4 * count::<T>(n - 6)))
}

/// `t*_np = (t - p(p-1)/(2(n-1))) / tau_np`.
pub fn normalize_schott<T: Real>(t: T, n: usize, p: usize) -> Result<T> {
    let tau = schott_scale_sq::<T>(n, p)?.sqrt();
    Ok((t - schott_null_mean::<T>(n, p)) / tau)
}

/// `T*_np = (T - p(p-1)/(2(n-4))) / sigma_np`.
pub fn normalize_mao<T: Real>(big_t: T, n: usize, p: usize) -> Result<T> {
    let sigma = mao_scale_sq::<T>(n, p)?.sqrt();
    Ok((big_t - mao_null_mean::<T>(n, p)) / sigma)
}

/// `sqrt(p(p-1)) * star + p(p-1)/2`, the defining form of both chi-square
/// calibrations.
pub fn calibrate_from_normalized<T: Real>(star: T, p: usize) -> T {
    let pp = pp::<T>(p);
    pp.sqrt() * star + T::lit(0.5) * pp
}

/// `T^c = sqrt((n-6)/(n-3)) (n-4) T + p(p-1)/2 (1 - sqrt((n-6)/(n-3)))`.
pub fn chisq_calibrated_mao<T: Real>(big_t: T, n: usize, p: usize) -> Result<T> {
    require_n("Mao's T^c", n, MAO_MIN_N)?;
    require_p(p)?;
    let ratio = (count::<T>(n - 6) / count::<T>(n - 3)).sqrt();
    let direct = ratio * count::<T>(n - 4) * big_t + T::lit(0.5) * pp::<T>(p) * (T::one() - ratio);
    debug_assert!(forms_agree(direct, calibrate_from_normalized(normalize_mao(big_t, n, p)?, p)));
    Ok(direct)
}

/// `t^c = sqrt((n+1)/(n-2)) (n-1) t + p(p-1)/2 (1 - sqrt((n+1)/(n-2)))`.
pub fn chisq_calibrated_schott<T: Real>(t: T, n: usize, p: usize) -> Result<T> {
    require_n("Schott's t^c", n, SCHOTT_MIN_N)?;
    require_p(p)?;
    let ratio = (count::<T>(n + 1) / count::<T>(n - 2)).sqrt();
    let direct = ratio * count::<T>(n - 1) * t + T::lit(0.5) * pp::<T>(p) * (T::one() - ratio);
    debug_assert!(forms_agree(direct, calibrate_from_normalized(normalize_schott(t, n, p)?, p)));
    Ok(direct)
}

fn forms_agree<T: Real>(a: T, b: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= T::lit(1e-9).max(T::lit(64.0) * T::epsilon()) * scale
}

/// Every statistic for one dataset. Entries that cannot be formed (too few
/// observations, a perfect correlation) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticReport<T> {
    pub n: usize,
    pub p: usize,
    pub t: T,
    #[serde(rename = "T")]
    pub big_t: Option<T>,
    #[serde(rename = "Q")]
    pub q: Option<T>,
    pub t_star: Option<T>,
    #[serde(rename = "T_star")]
    pub big_t_star: Option<T>,
    pub t_c: Option<T>,
    #[serde(rename = "T_c")]
    pub big_t_c: Option<T>,
    pub tau_sq: Option<T>,
    pub sigma_sq: Option<T>,
}

impl<T: Real> StatisticReport<T> {
    pub fn compute(corr: &CorrelationSummary<T>) -> Self {
        let (n, p) = (corr.n(), corr.p());
        let t = schott_statistic(corr);
        let big_t = mao_statistic(corr).ok();
        Self {
            n,
            p,
            t,
            big_t,
            q: fisher_statistic(corr).ok(),
            t_star: normalize_schott(t, n, p).ok(),
            big_t_star: big_t.and_then(|v| normalize_mao(v, n, p).ok()),
            t_c: chisq_calibrated_schott(t, n, p).ok(),
            big_t_c: big_t.and_then(|v| chisq_calibrated_mao(v, n, p).ok()),
            tau_sq: schott_scale_sq(n, p).ok(),
            sigma_sq: mao_scale_sq(n, p).ok(),
        }
    }
}
