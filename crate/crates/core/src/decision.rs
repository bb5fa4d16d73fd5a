//! Level-alpha rejection regions and one-sided p-values.
//!
//! All four regions are closed upper half-lines `{statistic >= threshold}` on
//! the raw statistic (`t` for Schott, `T` for Mao). The chi-square regions are
//! the rearrangement of `t^c >= chi2_alpha(df)` and `T^c >= chi2_alpha(df)`:
//!
//! ```text
//! T >= p(p-1)/(2(n-4)) (1 - sqrt((n-3)/(n-6))) + chi2_alpha sqrt((n-3)/((n-4)^2 (n-6)))
//! t >= p(p-1)/(2(n-1)) (1 - sqrt((n-2)/(n+1))) + chi2_alpha sqrt((n-2)/((n-1)^2 (n+1)))
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::correlation::CorrelationSummary;
use crate::distributions::{chisq_quantile, chisq_sf, std_normal_quantile, std_normal_sf, Probability};
use crate::error::{Error, Result};
use crate::scalar::{pair_count, Real};
use crate::statistics::{
    chisq_calibrated_mao, chisq_calibrated_schott, mao_null_mean, mao_scale_sq, mao_statistic,
    normalize_mao, normalize_schott, schott_null_mean, schott_scale_sq, schott_statistic,
    StatisticReport, MAO_MIN_N, SCHOTT_MIN_N,
};

/// The four calibrated tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    /// `t*`: Schott's statistic, normal calibration.
    SchottNormal,
    /// `T*`: Mao's statistic, normal calibration.
    MaoNormal,
    /// `t^c`: Schott's statistic, chi-square calibration.
    SchottChiSquare,
    /// `T^c`: Mao's statistic, chi-square calibration.
    MaoChiSquare,
}

impl TestKind {
    /// Table order.
    pub const ALL: [TestKind; 4] =
        [TestKind::SchottNormal, TestKind::MaoNormal, TestKind::SchottChiSquare, TestKind::MaoChiSquare];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::SchottNormal => "t_star",
            TestKind::MaoNormal => "T_star",
            TestKind::SchottChiSquare => "t_c",
            TestKind::MaoChiSquare => "T_c",
        }
    }

    pub fn is_mao(self) -> bool {
        matches!(self, TestKind::MaoNormal | TestKind::MaoChiSquare)
    }

    pub fn is_chi_square(self) -> bool {
        matches!(self, TestKind::SchottChiSquare | TestKind::MaoChiSquare)
    }

    pub fn min_n(self) -> usize {
        if self.is_mao() {
            MAO_MIN_N
        } else {
            SCHOTT_MIN_N
        }
    }

    /// Parses a comma-separated list such as `t_star,T_c`.
    pub fn parse_list(s: &str) -> Result<Vec<TestKind>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownTest(s.to_string()))
    }
}

impl Serialize for TestKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[inline]
fn count<T: Real>(k: usize) -> T {
    T::from_count(k as u64)
}

fn df<T: Real>(p: usize) -> T {
    count(pair_count(p))
}

/// Threshold on `T`: `p(p-1)/(2(n-4)) + z_alpha sigma_np`.
pub fn mao_normal_threshold<T: Real>(n: usize, p: usize, alpha: T) -> Result<T> {
    let sigma = mao_scale_sq::<T>(n, p)?.sqrt();
    Ok(mao_null_mean::<T>(n, p) + std_normal_quantile(alpha)? * sigma)
}

/// Threshold on `T` equivalent to `T^c >= chi2_alpha(p(p-1)/2)`.
pub fn mao_chisq_threshold<T: Real>(n: usize, p: usize, alpha: T) -> Result<T> {
    mao_scale_sq::<T>(n, p)?;
    let ratio = (count::<T>(n - 3) / count::<T>(n - 6)).sqrt();
    let crit = chisq_quantile(alpha, df(p))?;
    Ok(mao_null_mean::<T>(n, p) * (T::one() - ratio) + crit * ratio / count::<T>(n - 4))
}

/// Threshold on `t`: `p(p-1)/(2(n-1)) + z_alpha tau_np`.
pub fn schott_normal_threshold<T: Real>(n: usize, p: usize, alpha: T) -> Result<T> {
    let tau = schott_scale_sq::<T>(n, p)?.sqrt();
    Ok(schott_null_mean::<T>(n, p) + std_normal_quantile(alpha)? * tau)
}

/// Threshold on `t` equivalent to `t^c >= chi2_alpha(p(p-1)/2)`.
pub fn schott_chisq_threshold<T: Real>(n: usize, p: usize, alpha: T) -> Result<T> {
    schott_scale_sq::<T>(n, p)?;
    let ratio = (count::<T>(n - 2) / count::<T>(n + 1)).sqrt();
    let crit = chisq_quantile(alpha, df(p))?;
    Ok(schott_null_mean::<T>(n, p) * (T::one() - ratio) + crit * ratio / count::<T>(n - 1))
}

pub fn threshold<T: Real>(kind: TestKind, n: usize, p: usize, alpha: T) -> Result<T> {
    match kind {
        TestKind::SchottNormal => schott_normal_threshold(n, p, alpha),
        TestKind::MaoNormal => mao_normal_threshold(n, p, alpha),
        TestKind::SchottChiSquare => schott_chisq_threshold(n, p, alpha),
        TestKind::MaoChiSquare => mao_chisq_threshold(n, p, alpha),
    }
}

/// Calibrated value of `kind` (`t*`, `T*`, `t^c` or `T^c`) read off a report.
pub fn calibrated_value<T: Real>(kind: TestKind, report: &StatisticReport<T>) -> Option<T> {
    match kind {
        TestKind::SchottNormal => report.t_star,
        TestKind::MaoNormal => report.big_t_star,
        TestKind::SchottChiSquare => report.t_c,
        TestKind::MaoChiSquare => report.big_t_c,
    }
}

/// One-sided tail probability of the calibrated statistic: `1 - Phi(star)`
/// for the normal tests, `P(chi2_df > value)` for the chi-square tests.
pub fn p_value_of<T: Real>(kind: TestKind, calibrated: T, p: usize) -> Result<T> {
    if kind.is_chi_square() {
        chisq_sf(calibrated, df(p))
    } else {
        Ok(std_normal_sf(calibrated))
    }
}

/// p-value of `kind` for a computed report.
pub fn p_value<T: Real>(kind: TestKind, report: &StatisticReport<T>) -> Result<T> {
    let value = calibrated_value(kind, report).ok_or_else(|| {
        Error::Domain(format!("{kind} is not available for this dataset (n = {}, p = {})", report.n, report.p))
    })?;
    p_value_of(kind, value, report.p)
}

/// p-value for a test given by name.
pub fn p_value_by_name<T: Real>(test_name: &str, report: &StatisticReport<T>) -> Result<T> {
    p_value(test_name.parse()?, report)
}

/// Outcome of one test at level `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionReport<T> {
    pub test_name: TestKind,
    /// Raw statistic compared against `threshold` (`t` or `T`).
    pub statistic: T,
    /// `t*`, `T*`, `t^c` or `T^c`.
    pub calibrated: T,
    pub threshold: T,
    pub alpha: Probability<T>,
    pub reject: bool,
    pub p_value: T,
}

/// Runs test `kind` on a correlation summary.
pub fn decide<T: Real>(kind: TestKind, corr: &CorrelationSummary<T>, alpha: Probability<T>) -> Result<DecisionReport<T>> {
    let (n, p) = (corr.n(), corr.p());
    let a = alpha.value();
    let statistic = if kind.is_mao() { mao_statistic(corr)? } else { schott_statistic(corr) };
    let calibrated = match kind {
        TestKind::SchottNormal => normalize_schott(statistic, n, p)?,
        TestKind::MaoNormal => normalize_mao(statistic, n, p)?,
        TestKind::SchottChiSquare => chisq_calibrated_schott(statistic, n, p)?,
        TestKind::MaoChiSquare => chisq_calibrated_mao(statistic, n, p)?,
    };
    let threshold = threshold(kind, n, p, a)?;
    Ok(DecisionReport {
        test_name: kind,
        statistic,
        calibrated,
        threshold,
        alpha,
        reject: in_region(statistic, threshold),
        p_value: p_value_of(kind, calibrated, p)?,
    })
}

/// Membership in the closed region `{statistic >= threshold}`; ties reject.
#[inline]
pub fn in_region<T: Real>(statistic: T, threshold: T) -> bool {
    statistic >= threshold
}

/// Thresholds for all four tests at fixed `(n, p, alpha)`; `None` where the
/// test is undefined (e.g. Mao's tests below `n = 7`).
#[derive(Debug, Clone, Copy)]
pub struct ThresholdSet<T> {
    values: [Option<T>; 4],
}

impl<T: Real> ThresholdSet<T> {
    pub fn new(n: usize, p: usize, alpha: T) -> Result<Self> {
        Probability::level(alpha)?;
        let mut values = [None; 4];
        for (slot, kind) in values.iter_mut().zip(TestKind::ALL) {
            *slot = threshold(kind, n, p, alpha).ok();
        }
        Ok(Self { values })
    }

    pub fn get(&self, kind: TestKind) -> Option<T> {
        self.values[kind as usize]
    }
}
