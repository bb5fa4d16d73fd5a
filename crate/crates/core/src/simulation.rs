//! Monte Carlo size and power under `N_p(0, Sigma_rho)`, where `Sigma_rho` has
//! unit diagonal and every off-diagonal entry equal to `rho`.
//!
//! Replication `i` draws from [`substream`]`(seed, i)`, so a cell's rejection
//! counts are the same for any thread count or scheduling order.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{correlation_summary, DataMatrix};
use crate::decision::{in_region, TestKind, ThresholdSet};
use crate::distributions::Probability;
use crate::error::{Error, Result};
use crate::rng::{substream, NormalSampler};
use crate::scalar::Real;
use crate::statistics::{mao_statistic, schott_statistic, StatisticReport};

/// One cell of a size/power experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSpec<T> {
    pub n: usize,
    pub p: usize,
    pub rho: T,
    pub alpha: T,
    pub replications: u64,
    pub seed: u64,
    pub tests: Vec<TestKind>,
}

impl<T: Real> SimulationSpec<T> {
    pub fn new(n: usize, p: usize, rho: T, alpha: T, replications: u64, seed: u64) -> Self {
        Self { n, p, rho, alpha, replications, seed, tests: TestKind::ALL.to_vec() }
    }

    pub fn with_tests(mut self, tests: Vec<TestKind>) -> Self {
        self.tests = tests;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::SampleSize { what: "a correlation matrix", n: self.n, min: 3 });
        }
        check_rho(self.p, self.rho)?;
        Probability::level(self.alpha)?;
        if self.replications == 0 {
            return Err(Error::NoReplications);
        }
        if self.tests.is_empty() {
            return Err(Error::Domain("no tests requested".into()));
        }
        for &t in &self.tests {
            if self.n < t.min_n() {
                return Err(Error::SampleSize { what: t.name(), n: self.n, min: t.min_n() });
            }
        }
        Ok(())
    }
}

fn check_rho<T: Real>(p: usize, rho: T) -> Result<()> {
    if p < 2 {
        return Err(Error::Dimension(p));
    }
    let lower = -T::one() / T::from_count((p - 1) as u64);
    if rho > lower && rho < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidRho { rho: rho.to_f64().unwrap_or(f64::NAN), p })
    }
}

#[derive(Debug, Clone)]
enum Factor<T> {
    /// `x_j = a g_0 + b g_j`, exact for `rho >= 0`.
    OneFactor { a: T, b: T },
    /// Row-major lower-triangular Cholesky factor of `Sigma_rho`.
    Cholesky(Vec<T>),
}

/// Draws `n x p` samples with rows i.i.d. `N_p(0, Sigma_rho)`.
#[derive(Debug, Clone)]
pub struct EquicorrelatedSampler<T> {
    p: usize,
    factor: Factor<T>,
}

impl<T: Real> EquicorrelatedSampler<T> {
    pub fn new(p: usize, rho: T) -> Result<Self> {
        check_rho(p, rho)?;
        let factor = if rho >= T::zero() {
            Factor::OneFactor { a: rho.sqrt(), b: (T::one() - rho).sqrt() }
        } else {
            Factor::Cholesky(cholesky_equicorrelated(p, rho)?)
        };
        Ok(Self { p, factor })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DataMatrix<T>> {
        let p = self.p;
        let mut normals = NormalSampler::new();
        let mut values = vec![T::zero(); n * p];
        match &self.factor {
            Factor::OneFactor { a, b } => {
                let mut common = vec![T::zero(); n];
                normals.fill(rng, &mut common);
                for col in values.chunks_exact_mut(n) {
                    normals.fill(rng, col);
                    if *a != T::zero() {
                        for (x, &g) in col.iter_mut().zip(&common) {
                            *x = *a * g + *b * *x;
                        }
                    }
                }
            }
            Factor::Cholesky(l) => {
                let mut g = vec![T::zero(); p];
                for k in 0..n {
                    normals.fill(rng, &mut g);
                    for i in 0..p {
                        let row = &l[i * p..i * p + i + 1];
                        let x = row.iter().zip(&g).map(|(&lij, &gj)| lij * gj).sum::<T>();
                        values[i * n + k] = x;
                    }
                }
            }
        }
        DataMatrix::from_columns(n, p, values)
    }
}

fn cholesky_equicorrelated<T: Real>(p: usize, rho: T) -> Result<Vec<T>> {
    let mut l = vec![T::zero(); p * p];
    for i in 0..p {
        for j in 0..=i {
            let target = if i == j { T::one() } else { rho };
            let s = (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum::<T>();
            if i == j {
                let d = target - s;
                if !(d > T::zero()) {
                    return Err(Error::InvalidRho { rho: rho.to_f64().unwrap_or(f64::NAN), p });
                }
                l[i * p + i] = d.sqrt();
            } else {
                l[i * p + j] = (target - s) / l[j * p + j];
            }
        }
    }
    Ok(l)
}

/// One `n x p` draw from `N_p(0, Sigma_rho)`.
pub fn sample_equicorrelated_normal<T: Real, R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rho: T,
    rng: &mut R,
) -> Result<DataMatrix<T>> {
    EquicorrelatedSampler::new(p, rho)?.sample(n, rng)
}

/// Rejection count for one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome<T> {
    pub test: TestKind,
    pub rejections: u64,
    pub rejection_rate: T,
    pub mc_standard_error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult<T> {
    pub spec: SimulationSpec<T>,
    /// Replications that produced statistics; the rates are over these.
    pub completed: u64,
    pub failed_replications: u64,
    /// Error of the lowest-numbered failed replication.
    pub first_failure: Option<String>,
    pub outcomes: Vec<TestOutcome<T>>,
}

impl<T: Real> SimulationResult<T> {
    pub fn outcome(&self, test: TestKind) -> Option<&TestOutcome<T>> {
        self.outcomes.iter().find(|o| o.test == test)
    }

    pub fn rate(&self, test: TestKind) -> Option<T> {
        self.outcome(test).map(|o| o.rejection_rate)
    }
}

#[derive(Clone, Default)]
struct Tally {
    rejections: [u64; 4],
    completed: u64,
    failed: u64,
    first_failure: Option<(u64, Error)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.rejections.iter_mut().zip(other.rejections) {
            *a += b;
        }
        self.completed += other.completed;
        self.failed += other.failed;
        self.first_failure = match (self.first_failure, other.first_failure) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Estimated rejection rate of each requested test over `spec.replications`
/// independent samples. Runs on the current rayon pool.
pub fn estimate_rejection_rate<T: Real>(spec: &SimulationSpec<T>) -> Result<SimulationResult<T>> {
    spec.validate()?;
    let sampler = EquicorrelatedSampler::new(spec.p, spec.rho)?;
    let thresholds = ThresholdSet::new(spec.n, spec.p, spec.alpha)?;
    let mut wanted = [false; 4];
    for &t in &spec.tests {
        wanted[t as usize] = true;
    }
    let need_mao = spec.tests.iter().any(|t| t.is_mao());

    let replicate = |i: u64| -> Result<[bool; 4]> {
        let mut rng = substream(spec.seed, i);
        let data = sampler.sample(spec.n, &mut rng)?;
        let corr = correlation_summary(&data)?;
        let t = schott_statistic(&corr);
        let big_t = if need_mao { Some(mao_statistic(&corr)?) } else { None };
        let mut out = [false; 4];
        for kind in TestKind::ALL {
            if !wanted[kind as usize] {
                continue;
            }
            let stat = if kind.is_mao() { big_t.expect("computed when requested") } else { t };
            let th = thresholds.get(kind).expect("validated sample size");
            out[kind as usize] = in_region(stat, th);
        }
        Ok(out)
    };

    let tally = (0..spec.replications)
        .into_par_iter()
        .map(|i| {
            let mut tally = Tally::default();
            match replicate(i) {
                Ok(flags) => {
                    tally.completed = 1;
                    for (c, f) in tally.rejections.iter_mut().zip(flags) {
                        *c += f as u64;
                    }
                }
                Err(e) => {
                    tally.failed = 1;
                    tally.first_failure = Some((i, e));
                }
            }
            tally
        })
        .reduce(Tally::default, Tally::merge);

    let denom = T::from_count(tally.completed.max(1));
    let outcomes = spec
        .tests
        .iter()
        .map(|&test| {
            let rejections = tally.rejections[test as usize];
            let rate = T::from_count(rejections) / denom;
            TestOutcome {
                test,
                rejections,
                rejection_rate: rate,
                mc_standard_error: (rate * (T::one() - rate) / denom).sqrt(),
            }
        })
        .collect();
    Ok(SimulationResult {
        spec: spec.clone(),
        completed: tally.completed,
        failed_replications: tally.failed,
        first_failure: tally.first_failure.map(|(i, e)| format!("replication {i}: {e}")),
        outcomes,
    })
}

/// Statistics of `replications` independent samples, in replication order.
pub fn sample_statistics<T: Real>(
    n: usize,
    p: usize,
    rho: T,
    replications: u64,
    seed: u64,
) -> Result<Vec<StatisticReport<T>>> {
    let sampler = EquicorrelatedSampler::new(p, rho)?;
    (0..replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let data = sampler.sample(n, &mut rng)?;
            Ok(StatisticReport::compute(&correlation_summary(&data)?))
        })
        .collect()
}

/// One output row: a test within a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow<T> {
    pub test: TestKind,
    pub n: usize,
    pub p: usize,
    pub rho: T,
    pub alpha: T,
    pub replications: u64,
    pub seed: u64,
    pub reject_rate: Option<T>,
    pub mc_se: Option<T>,
    pub rejections: Option<u64>,
    pub failed_replications: u64,
    pub error: Option<String>,
}

/// Identity of a cell for resuming a partially written table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellKey {
    pub n: usize,
    pub p: usize,
    pub rho: String,
    pub alpha: String,
    pub replications: u64,
    pub seed: u64,
}

impl CellKey {
    pub fn of<T: Real>(spec: &SimulationSpec<T>) -> Self {
        Self {
            n: spec.n,
            p: spec.p,
            rho: spec.rho.to_string(),
            alpha: spec.alpha.to_string(),
            replications: spec.replications,
            seed: spec.seed,
        }
    }
}

fn rows_for<T: Real>(spec: &SimulationSpec<T>, result: Result<SimulationResult<T>>) -> Vec<TableRow<T>> {
    let base = |test| TableRow {
        test,
        n: spec.n,
        p: spec.p,
        rho: spec.rho,
        alpha: spec.alpha,
        replications: spec.replications,
        seed: spec.seed,
        reject_rate: None,
        mc_se: None,
        rejections: None,
        failed_replications: 0,
        error: None,
    };
    match result {
        Ok(res) => res
            .outcomes
            .iter()
            .map(|o| TableRow {
                reject_rate: Some(o.rejection_rate),
                mc_se: Some(o.mc_standard_error),
                rejections: Some(o.rejections),
                failed_replications: res.failed_replications,
                error: res.first_failure.clone(),
                ..base(o.test)
            })
            .collect(),
        Err(e) => spec.tests.iter().map(|&t| TableRow { error: Some(e.to_string()), ..base(t) }).collect(),
    }
}

/// Evaluates every cell not rejected by `skip`, calling `on_cell` with each
/// cell's rows as it finishes. A failing cell yields rows carrying the error.
pub fn run_table_with<T: Real>(
    grid: &[SimulationSpec<T>],
    skip: impl Fn(&SimulationSpec<T>) -> bool,
    mut on_cell: impl FnMut(usize, &[TableRow<T>]),
) -> Vec<TableRow<T>> {
    let mut rows = Vec::new();
    for (idx, spec) in grid.iter().enumerate() {
        if skip(spec) {
            continue;
        }
        let cell = rows_for(spec, estimate_rejection_rate(spec));
        on_cell(idx, &cell);
        rows.extend(cell);
    }
    rows
}

pub fn run_table<T: Real>(grid: &[SimulationSpec<T>]) -> Result<Vec<TableRow<T>>> {
    if grid.is_empty() {
        return Err(Error::Domain("empty simulation grid".into()));
    }
    Ok(run_table_with(grid, |_| false, |_, _| {}))
}

/// The two standard grids: size at `rho = 0` and power at `rho = 0.02`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Size,
    Power,
}

pub const PRESET_N: [usize; 5] = [15, 30, 60, 100, 200];
pub const PRESET_P: [usize; 6] = [3, 10, 20, 50, 100, 200];

impl Preset {
    pub fn rho<T: Real>(self) -> T {
        match self {
            Preset::Size => T::zero(),
            Preset::Power => T::lit(0.02),
        }
    }

    /// 30 cells in `n`-major order, all four tests in each.
    pub fn grid<T: Real>(self, alpha: T, replications: u64, seed: u64) -> Vec<SimulationSpec<T>> {
        PRESET_N
            .iter()
            .flat_map(|&n| PRESET_P.iter().map(move |&p| (n, p)))
            .map(|(n, p)| SimulationSpec::new(n, p, self.rho(), alpha, replications, seed))
            .collect()
    }
}

pub const CSV_HEADER: &str = "test,n,p,rho,alpha,replications,seed,reject_rate,mc_se";

/// Writes rows as CSV. Rates carry 4 decimals; failed cells leave both
/// numeric fields empty.
pub fn write_csv<T: Real, W: Write>(rows: &[TableRow<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        write_csv_row(r, &mut out)?;
    }
    Ok(())
}

pub fn write_csv_row<T: Real, W: Write>(r: &TableRow<T>, out: &mut W) -> std::io::Result<()> {
    let rate = r.reject_rate.map(|v| format!("{v:.4}")).unwrap_or_default();
    let se = r.mc_se.map(|v| format!("{v:.6}")).unwrap_or_default();
    writeln!(out, "{},{},{},{},{},{},{},{},{}", r.test, r.n, r.p, r.rho, r.alpha, r.replications, r.seed, rate, se)
}

/// JSON array mirroring [`TableRow`], full precision.
pub fn rows_to_json<T: Real>(rows: &[TableRow<T>]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

/// Cells already present (with a rate) in a previously written CSV table.
pub fn completed_cells<R: BufRead>(input: R) -> Result<HashSet<CellKey>> {
    let mut done = HashSet::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Domain(format!("reading table: {e}")))?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Domain(format!("table line {}: expected 9 fields", lineno + 1)));
        }
        if f[7].is_empty() {
            continue;
        }
        let parse = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Domain(format!("table line {}: bad integer `{s}`", lineno + 1)))
        };
        done.insert(CellKey {
            n: parse(f[1])? as usize,
            p: parse(f[2])? as usize,
            rho: f[3].to_string(),
            alpha: f[4].to_string(),
            replications: parse(f[5])?,
            seed: parse(f[6])?,
        });
    }
    Ok(done)
}
