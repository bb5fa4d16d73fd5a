//! Exact finite-sample moments of null correlations, with Monte Carlo checks.
//!
//! Under independence `r_ij = w_i' w_j` for independent uniform unit vectors
//! in `R^(n-1)`, so `r^2 ~ Beta(1/2, (n-2)/2)` and
//! `r_hat = r^2/(1-r^2) - 1/(n-4)` is a centred beta-prime variable. The
//! closed forms below are rational in `n` and generic over [`Field`], so they
//! evaluate in floating point and in exact rational arithmetic alike.
//!
//! Fourth moments of `r_hat` are finite only for `n >= 11` and have heavy
//! tails near that bound; their Monte Carlo tolerance is 10%.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::correlation::{sample_null_correlations, CorrelationSummary};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::scalar::Field;

fn check_n(what: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::SampleSize { what, n, min })
    } else {
        Ok(())
    }
}

#[inline]
fn int<T: Field>(k: i64) -> T {
    T::int(k)
}

/// Index pattern of `E(r_hat_{l j1} r_hat_{l j2} r_hat_{l j3} r_hat_{l j4})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentCase {
    /// `j1 = j2 = j3 = j4`.
    AllEqual,
    /// `{j1, j2, j3, j4}` forms two distinct pairs.
    TwoPairs,
    /// Any other pattern; some index appears an odd number of times.
    Otherwise,
}

/// Fourth product moment of centred Mao terms sharing the row `l`.
///
/// * all equal: `12(n-3)(5n^2-27n+40) / ((n-4)^4 (n-6)(n-8)(n-10))`, `n >= 11`
/// * two pairs: `4(n-3)^2 / ((n-4)^4 (n-6)^2)`, `n >= 7`
/// * otherwise: `0`
pub fn mao_centered_moment<T: Field>(case: MomentCase, n: usize) -> Result<T> {
    let m = n as i64;
    match case {
        MomentCase::AllEqual => {
            check_n("the fourth moment of r_hat", n, 11)?;
            let num = int::<T>(12 * (m - 3) * (5 * m * m - 27 * m + 40));
            let d4 = int::<T>(m - 4);
            let d4 = d4.clone() * d4.clone() * d4.clone() * d4;
            Ok(num / (d4 * int::<T>((m - 6) * (m - 8) * (m - 10))))
        }
        MomentCase::TwoPairs => {
            let v = mao_variance::<T>(n)?;
            Ok(v.clone() * v)
        }
        MomentCase::Otherwise => Ok(T::zero()),
    }
}

/// Variance of one centred Mao term, `2(n-3) / ((n-4)^2 (n-6))`.
///
/// Summed over the `p(p-1)/2` pairs this is `sigma^2_np`.
pub fn mao_variance<T: Field>(n: usize) -> Result<T> {
    check_n("the variance of r_hat", n, 7)?;
    let m = n as i64;
    Ok(int::<T>(2 * (m - 3)) / int::<T>((m - 4) * (m - 4) * (m - 6)))
}

/// Mean of `r^2/(1-r^2)`, `1/(n-4)`.
pub fn mao_mean<T: Field>(n: usize) -> Result<T> {
    check_n("the mean of r^2/(1-r^2)", n, 5)?;
    Ok(T::one() / int::<T>(n as i64 - 4))
}

/// `sum_{i != j} E(y_i^2 y_j^2) - 1` for the normalized Mao martingale
/// differences, `-2 sigma^-4 (n-3)^2 p(p-1)(2p-1) / (3 (n-4)^4 (n-6)^2)`.
///
/// Does not depend on `n`: it reduces to `-2(2p-1) / (3p(p-1))`.
pub fn mao_second_moment_correction<T: Field>(n: usize, p: usize) -> Result<T> {
    check_n("the martingale correction", n, 7)?;
    if p < 2 {
        return Err(Error::Dimension(p));
    }
    let (m, q) = (n as i64, p as i64);
    let pp = int::<T>(q * (q - 1));
    let sigma_sq = pp.clone() * int::<T>(m - 3) / int::<T>((m - 4) * (m - 4) * (m - 6));
    let sigma_4 = sigma_sq.clone() * sigma_sq;
    let nm4 = int::<T>((m - 4) * (m - 4));
    let num = int::<T>(2 * (m - 3) * (m - 3)) * pp * int::<T>(2 * q - 1);
    let den = int::<T>(3) * nm4.clone() * nm4 * int::<T>((m - 6) * (m - 6)) * sigma_4;
    Ok(T::zero() - num / den)
}

/// Conditional moments `c_r = E(r^{2r} | w_l)`, `r = 1..4`:
/// `1/(n-1)`, `3/((n-1)(n+1))`, `15/((n-1)(n+1)(n+3))`, `105/((n-1)(n+1)(n+3)(n+5))`.
pub fn sphere_r2_moments<T: Field>(n: usize) -> Result<[T; 4]> {
    check_n("the sphere moments", n, 3)?;
    let m = n as i64;
    let mut out: [T; 4] = [T::zero(), T::zero(), T::zero(), T::zero()];
    let mut den = T::one();
    let mut num = 1i64;
    for (k, slot) in out.iter_mut().enumerate() {
        let k = k as i64;
        den = den * int::<T>(m - 1 + 2 * k);
        num *= 2 * k + 1;
        *slot = int::<T>(num) / den.clone();
    }
    Ok(out)
}

/// Central moments `d_r = E((r^2 - 1/(n-1))^r | w_l)` for `r = 2, 3, 4`,
/// expanded binomially in the `c_r`. `d_2 = 2(n-2)/((n-1)^2 (n+1))`.
pub fn schott_centered_moments<T: Field>(n: usize) -> Result<[T; 3]> {
    let [c1, c2, c3, c4] = sphere_r2_moments::<T>(n)?;
    let m = T::one() / int::<T>(n as i64 - 1);
    let m2 = m.clone() * m.clone();
    let m3 = m2.clone() * m.clone();
    let m4 = m3.clone() * m.clone();
    let d2 = c2.clone() - m2.clone();
    let d3 = c3.clone() - int::<T>(3) * c2.clone() * m.clone() + int::<T>(3) * c1.clone() * m2.clone() - m3.clone();
    let d4 = c4 - int::<T>(4) * c3 * m + int::<T>(6) * c2 * m2 - int::<T>(4) * c1 * m3 + m4;
    Ok([d2, d3, d4])
}

/// `E[(r_ij^2 - 1/(n-1)) (r_st^2 - 1/(n-1))]`: `d_2` for the same pair, else 0.
pub fn schott_cross_moment<T: Field>(n: usize, same_pair: bool) -> Result<T> {
    if same_pair {
        let [d2, _, _] = schott_centered_moments::<T>(n)?;
        Ok(d2)
    } else {
        check_n("the sphere moments", n, 3)?;
        Ok(T::zero())
    }
}

/// A moment identity checked by simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `E r^{2k} = c_k`, `k = 1..4`.
    SphereMoment(u8),
    /// `E (r^2 - 1/(n-1))^k = d_k`, `k = 2..4`.
    SchottCentered(u8),
    /// Cross moment over two pairs with no index in common, `0`.
    SchottCrossDisjoint,
    /// `E r_hat = 0`.
    MaoMeanZero,
    /// `E r_hat^2 = 2(n-3)/((n-4)^2 (n-6))`.
    MaoVariance,
    /// Fourth product moments of `r_hat` sharing one row.
    MaoFourth(MomentCase),
}

impl Identity {
    pub fn name(&self) -> String {
        match self {
            Identity::SphereMoment(k) => format!("c{k}"),
            Identity::SchottCentered(k) => format!("d{k}"),
            Identity::SchottCrossDisjoint => "schott_cross_disjoint".into(),
            Identity::MaoMeanZero => "mao_mean_zero".into(),
            Identity::MaoVariance => "mao_variance".into(),
            Identity::MaoFourth(MomentCase::AllEqual) => "mao_fourth_all_equal".into(),
            Identity::MaoFourth(MomentCase::TwoPairs) => "mao_fourth_two_pairs".into(),
            Identity::MaoFourth(MomentCase::Otherwise) => "mao_fourth_otherwise".into(),
        }
    }

    pub fn analytic(&self, n: usize) -> Result<f64> {
        match *self {
            Identity::SphereMoment(k @ 1..=4) => Ok(sphere_r2_moments::<f64>(n)?[k as usize - 1]),
            Identity::SchottCentered(k @ 2..=4) => Ok(schott_centered_moments::<f64>(n)?[k as usize - 2]),
            Identity::SchottCrossDisjoint => schott_cross_moment(n, false),
            Identity::MaoMeanZero => mao_mean::<f64>(n).map(|_| 0.0),
            Identity::MaoVariance => mao_variance(n),
            Identity::MaoFourth(case) => {
                check_n("r_hat fourth moments", n, 11)?;
                mao_centered_moment(case, n)
            }
            Identity::SphereMoment(_) | Identity::SchottCentered(_) => {
                Err(Error::Domain(format!("no identity {}", self.name())))
            }
        }
    }

    /// Dimension of each null draw: enough vectors that every index pattern
    /// has many instances per draw.
    fn vectors_per_draw(&self) -> usize {
        DRAW_DIMENSION
    }

    /// Average of the identity's integrand over all matching index tuples of one draw.
    fn draw_average(&self, corr: &CorrelationSummary<f64>) -> f64 {
        let n = corr.n();
        let p = corr.p();
        let centre_r2 = 1.0 / (n as f64 - 1.0);
        let centre_mao = 1.0 / (n as f64 - 4.0);
        let r_hat = |i: usize, j: usize| {
            let r2 = corr.get(i, j).powi(2);
            r2 / (1.0 - r2) - centre_mao
        };
        let mean = |it: &mut dyn Iterator<Item = f64>| {
            let (s, c) = it.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            s / c as f64
        };
        match *self {
            Identity::SphereMoment(k) => mean(&mut corr.offdiag().iter().map(|r| r.powi(2 * k as i32))),
            Identity::SchottCentered(k) => {
                mean(&mut corr.offdiag().iter().map(|r| (r * r - centre_r2).powi(k as i32)))
            }
            Identity::SchottCrossDisjoint => {
                let q: Vec<(usize, usize, f64)> = corr.pairs().map(|(i, j, r)| (i, j, r * r - centre_r2)).collect();
                let mut it = q.iter().enumerate().flat_map(|(a, &(i, j, x))| {
                    q[a + 1..]
                        .iter()
                        .filter(move |&&(s, t, _)| s != i && s != j && t != i && t != j)
                        .map(move |&(_, _, y)| x * y)
                });
                mean(&mut it)
            }
            Identity::MaoMeanZero => mean(&mut corr.pairs().map(|(i, j, _)| r_hat(i, j))),
            Identity::MaoVariance => mean(&mut corr.pairs().map(|(i, j, _)| r_hat(i, j).powi(2))),
            Identity::MaoFourth(MomentCase::AllEqual) => mean(&mut corr.pairs().map(|(i, j, _)| r_hat(i, j).powi(4))),
            Identity::MaoFourth(case) => {
                // row l, two distinct partners a != b
                let mut it = (0..p).flat_map(|l| {
                    (0..p).filter(move |&a| a != l).flat_map(move |a| {
                        (0..p).filter(move |&b| b != l && b != a).map(move |b| (l, a, b))
                    })
                });
                let mut vals = it.by_ref().map(|(l, a, b)| {
                    let (x, y) = (r_hat(l, a), r_hat(l, b));
                    match case {
                        MomentCase::TwoPairs => x * x * y * y,
                        _ => x * x * x * y,
                    }
                });
                mean(&mut vals)
            }
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Identity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

const DRAW_DIMENSION: usize = 10;
const BLOCK: u64 = 1024;

/// Pass criterion for a simulated moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// `|empirical - analytic| <= tol * |analytic|`.
    Relative(f64),
    /// `|empirical - analytic| <= k` Monte Carlo standard errors.
    StdErrors(f64),
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Relative(t) => write!(f, "{}%", t * 100.0),
            Tolerance::StdErrors(k) => write!(f, "{k} se"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub identity: Identity,
    pub n: usize,
    pub replications: u64,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    /// `None` when the analytic value is zero.
    pub relative_error: Option<f64>,
    pub tolerance: Tolerance,
    pub passed: bool,
}

/// Monte Carlo estimate of `identity` at sample size `n` from `replications`
/// sphere draws (each with several vectors), compared with the closed form.
///
/// Replications are summed in fixed-size blocks combined in block order, so
/// the result does not depend on the thread count.
pub fn verify_moment_by_simulation(
    identity: Identity,
    n: usize,
    replications: u64,
    seed: u64,
    tolerance: Tolerance,
) -> Result<MomentCheck> {
    let analytic = identity.analytic(n)?;
    if replications < 2 {
        return Err(Error::Domain(format!("at least 2 replications are needed, got {replications}")));
    }
    let p = identity.vectors_per_draw();
    let blocks = replications.div_ceil(BLOCK);
    let partial: Vec<Result<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let (mut s, mut s2) = (0.0, 0.0);
            for i in b * BLOCK..((b + 1) * BLOCK).min(replications) {
                let mut rng = substream(seed, i);
                let corr = sample_null_correlations::<f64, _>(n, p, &mut rng)?;
                let y = identity.draw_average(&corr);
                s += y;
                s2 += y * y;
            }
            Ok((s, s2))
        })
        .collect();
    let (mut s, mut s2) = (0.0, 0.0);
    for block in partial {
        let (a, b) = block?;
        s += a;
        s2 += b;
    }
    let m = replications as f64;
    let empirical = s / m;
    let var = ((s2 - m * empirical * empirical) / (m - 1.0)).max(0.0);
    let std_error = (var / m).sqrt();
    let relative_error = (analytic != 0.0).then(|| (empirical - analytic).abs() / analytic.abs());
    let passed = match tolerance {
        Tolerance::Relative(t) => relative_error.is_some_and(|e| e <= t),
        Tolerance::StdErrors(k) => (empirical - analytic).abs() <= k * std_error,
    };
    Ok(MomentCheck { identity, n, replications, analytic, empirical, std_error, relative_error, tolerance, passed })
}

/// The identities checked by the validation suite, with their sample size and tolerance.
pub fn identity_suite() -> Vec<(Identity, usize, Tolerance)> {
    use Identity::*;
    vec![
        (SphereMoment(1), 10, Tolerance::Relative(0.01)),
        (SphereMoment(2), 10, Tolerance::Relative(0.01)),
        (SphereMoment(3), 10, Tolerance::Relative(0.02)),
        (SphereMoment(4), 10, Tolerance::Relative(0.02)),
        (SchottCentered(2), 10, Tolerance::Relative(0.02)),
        (SchottCentered(3), 10, Tolerance::Relative(0.05)),
        (SchottCentered(4), 10, Tolerance::Relative(0.05)),
        (SchottCrossDisjoint, 20, Tolerance::StdErrors(3.0)),
        (MaoMeanZero, 20, Tolerance::StdErrors(3.0)),
        (MaoVariance, 20, Tolerance::Relative(0.02)),
        (MaoFourth(MomentCase::TwoPairs), 20, Tolerance::Relative(0.10)),
        (MaoFourth(MomentCase::AllEqual), 20, Tolerance::Relative(0.10)),
        (MaoFourth(MomentCase::Otherwise), 20, Tolerance::StdErrors(3.0)),
    ]
}

/// Runs [`identity_suite`]; identity `k` uses stream key `seed + k`.
///
/// The tolerances are calibrated for about `10^6` replications; below `10^4`
/// failures say little about the formulas.
pub fn run_identity_suite(replications: u64, seed: u64) -> Result<Vec<MomentCheck>> {
    identity_suite()
        .into_iter()
        .enumerate()
        .map(|(k, (id, n, tol))| verify_moment_by_simulation(id, n, replications, seed.wrapping_add(k as u64), tol))
        .collect()
}
