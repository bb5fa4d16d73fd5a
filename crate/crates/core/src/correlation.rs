//! Sample correlation matrices and the null sampler on the unit sphere.
//!
//! Off-diagonal entries are stored in the order (2,1), (3,1), (3,2), (4,1), ...
//! (row `i` outer, column `j < i` inner); every statistic indexes this layout.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::NormalSampler;
use crate::scalar::{pair_count, Real};

/// An `n x p` data matrix, observations in rows, variables in columns.
///
/// Stored column-major so each variable is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    n: usize,
    p: usize,
    values: Vec<T>,
}

impl<T: Real> DataMatrix<T> {
    /// Builds from column-major values (`values[j * n + k]` is row `k`, column `j`).
    pub fn from_columns(n: usize, p: usize, values: Vec<T>) -> Result<Self> {
        if n < 3 {
            return Err(Error::SampleSize { what: "a correlation matrix", n, min: 3 });
        }
        if p < 2 {
            return Err(Error::Dimension(p));
        }
        if values.len() != n * p {
            return Err(Error::Shape { len: values.len(), n, p });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos % n, column: pos / n });
        }
        Ok(Self { n, p, values })
    }

    /// Builds from a slice of rows, each of length `p`.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = vec![T::zero(); n * p];
        for (k, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::Shape { len: row.len() * n, n, p });
            }
            for (j, &x) in row.iter().enumerate() {
                values[j * n + k] = x;
            }
        }
        Self::from_columns(n, p, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[T] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, row: usize, column: usize) -> T {
        self.values[column * self.n + row]
    }

    pub fn as_column_major(&self) -> &[T] {
        &self.values
    }
}

/// Position of pair `(i, j)`, `j < i`, in the packed off-diagonal vector (0-based).
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

/// The `p(p-1)/2` off-diagonal sample correlations of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary<T> {
    n: usize,
    p: usize,
    offdiag: Vec<T>,
}

impl<T: Real> CorrelationSummary<T> {
    /// Wraps precomputed correlations in the packed order.
    pub fn from_offdiag(n: usize, p: usize, offdiag: Vec<T>) -> Result<Self> {
        if p < 2 {
            return Err(Error::Dimension(p));
        }
        if n < 3 {
            return Err(Error::SampleSize { what: "a correlation matrix", n, min: 3 });
        }
        if offdiag.len() != pair_count(p) {
            return Err(Error::Domain(format!(
                "expected {} off-diagonal correlations for p = {p}, got {}",
                pair_count(p),
                offdiag.len()
            )));
        }
        if let Some(r) = offdiag.iter().find(|r| !(r.abs() <= T::one())) {
            return Err(Error::Domain(format!("correlation {r} outside [-1, 1]")));
        }
        Ok(Self { n, p, offdiag })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn offdiag(&self) -> &[T] {
        &self.offdiag
    }

    /// `r_ij` for any `i != j` (0-based); 1 on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::one(),
            std::cmp::Ordering::Greater => self.offdiag[pair_index(i, j)],
            std::cmp::Ordering::Less => self.offdiag[pair_index(j, i)],
        }
    }

    /// `(i, j, r_ij)` with `j < i`, in storage order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (1..self.p)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .zip(self.offdiag.iter().copied())
            .map(|((i, j), r)| (i, j, r))
    }
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] = acc[0] + x[0] * y[0];
        acc[1] = acc[1] + x[1] * y[1];
        acc[2] = acc[2] + x[2] * y[2];
        acc[3] = acc[3] + x[3] * y[3];
    }
    let mut tail = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        tail = tail + x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Pearson correlation of every pair of columns.
///
/// Means are removed first and the cross products are taken on the centred
/// columns (two passes), so large offsets do not cancel.
pub fn correlation_summary<T: Real>(data: &DataMatrix<T>) -> Result<CorrelationSummary<T>> {
    let (n, p) = (data.n, data.p);
    let nf = T::from_count(n as u64);
    let mut centred = Vec::with_capacity(n * p);
    let mut sum_sq = Vec::with_capacity(p);
    for j in 0..p {
        let col = data.column(j);
        let mean = col.iter().copied().sum::<T>() / nf;
        let start = centred.len();
        centred.extend(col.iter().map(|&x| x - mean));
        let c = &centred[start..];
        let ss = dot(c, c);
        let scale = col.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let floor = T::lit(4.0) * T::epsilon() * scale;
        if !(ss > nf * floor * floor) {
            return Err(Error::DegenerateColumn { column: j });
        }
        sum_sq.push(ss);
    }
    let inv_norm: Vec<T> = sum_sq.iter().map(|s| s.sqrt().recip()).collect();
    let near_one = T::one() - T::lit(8.0) * T::epsilon();

    let mut offdiag = Vec::with_capacity(pair_count(p));
    for i in 1..p {
        let ci = &centred[i * n..(i + 1) * n];
        for j in 0..i {
            let cj = &centred[j * n..(j + 1) * n];
            let s = dot(ci, cj);
            let mut r = s * inv_norm[i] * inv_norm[j];
            if r.abs() > near_one {
                // exact +-1 for identical (or negated) columns
                r = s / (sum_sq[i] * sum_sq[j]).sqrt();
            }
            offdiag.push(r.max(-T::one()).min(T::one()));
        }
    }
    Ok(CorrelationSummary { n, p, offdiag })
}

/// `p` independent vectors uniform on the unit sphere of `R^(n-1)`, packed
/// one after another (`vectors[j*(n-1)..(j+1)*(n-1)]` is `w_j`).
pub fn sample_sphere_vectors<T: Real, R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Vec<T>> {
    if n < 3 {
        return Err(Error::SampleSize { what: "the sphere sampler", n, min: 3 });
    }
    if p < 2 {
        return Err(Error::Dimension(p));
    }
    let dim = n - 1;
    let mut sampler = NormalSampler::new();
    let mut w = vec![T::zero(); dim * p];
    for v in w.chunks_exact_mut(dim) {
        loop {
            sampler.fill(rng, v);
            let norm = dot(v, v).sqrt();
            if norm > T::zero() {
                v.iter_mut().for_each(|x| *x = *x / norm);
                break;
            }
        }
    }
    Ok(w)
}

/// Null correlations drawn directly as inner products `r_ij = w_i' w_j` of
/// independent uniform unit vectors in `R^(n-1)`.
///
/// Equal in law to [`correlation_summary`] of an `n x p` sample with
/// independent normal columns.
pub fn sample_null_correlations<T: Real, R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<CorrelationSummary<T>> {
    let w = sample_sphere_vectors::<T, R>(n, p, rng)?;
    let dim = n - 1;
    let mut offdiag = Vec::with_capacity(pair_count(p));
    for i in 1..p {
        let wi = &w[i * dim..(i + 1) * dim];
        for j in 0..i {
            let r = dot(wi, &w[j * dim..(j + 1) * dim]);
            offdiag.push(r.max(-T::one()).min(T::one()));
        }
    }
    Ok(CorrelationSummary { n, p, offdiag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn matrix(cols: &[&[f64]]) -> DataMatrix<f64> {
        let n = cols[0].len();
        let values = cols.iter().flat_map(|c| c.iter().copied()).collect();
        DataMatrix::from_columns(n, cols.len(), values).unwrap()
    }

    #[test]
    fn identical_columns_correlate_exactly_one() {
        let s = correlation_summary(&matrix(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]])).unwrap();
        assert_eq!(s.offdiag(), &[1.0]);
        let s = correlation_summary(&matrix(&[&[0.3, -1.7, 2.2, 5.0], &[0.3, -1.7, 2.2, 5.0]])).unwrap();
        assert_eq!(s.offdiag(), &[1.0]);
        let s = correlation_summary(&matrix(&[&[0.3, -1.7, 2.2], &[-0.3, 1.7, -2.2]])).unwrap();
        assert_eq!(s.offdiag(), &[-1.0]);
    }

    #[test]
    fn hand_evaluated_half() {
        let s = correlation_summary(&matrix(&[&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]])).unwrap();
        assert!((s.offdiag()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn storage_order_is_row_outer() {
        // columns x, 2x+noise..., check get() against pair_index layout
        let data = matrix(&[
            &[1.0, 2.0, 3.0, 4.0],
            &[2.0, 1.0, 4.0, 3.0],
            &[4.0, 3.0, 2.0, 1.0],
            &[1.0, 3.0, 2.0, 5.0],
        ]);
        let s = correlation_summary(&data).unwrap();
        let order: Vec<(usize, usize)> = s.pairs().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(order, vec![(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]);
        // (3,1) pairs columns x and 4-x: r = -1
        assert_eq!(s.get(2, 0), -1.0);
        assert_eq!(s.get(0, 2), -1.0);
        assert_eq!(s.get(1, 1), 1.0);
    }

    #[test]
    fn constant_column_is_an_error() {
        let err = correlation_summary(&matrix(&[&[1.0, 2.0, 3.0], &[0.1, 0.1, 0.1]])).unwrap_err();
        assert_eq!(err, Error::DegenerateColumn { column: 1 });
        let err = correlation_summary(&matrix(&[&[7.0, 7.0, 7.0], &[0.0, 1.0, 0.0]])).unwrap_err();
        assert_eq!(err, Error::DegenerateColumn { column: 0 });
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            DataMatrix::from_columns(2, 2, vec![1.0, 2.0, 3.0, 4.0]),
            Err(Error::SampleSize { n: 2, .. })
        ));
        assert!(matches!(DataMatrix::from_columns(3, 1, vec![1.0, 2.0, 3.0]), Err(Error::Dimension(1))));
        assert!(matches!(DataMatrix::from_columns(3, 2, vec![1.0; 5]), Err(Error::Shape { .. })));
        assert_eq!(
            DataMatrix::from_columns(3, 2, vec![1.0, 2.0, 3.0, 4.0, f64::NAN, 6.0]).unwrap_err(),
            Error::NonFinite { row: 1, column: 1 }
        );
    }

    #[test]
    fn from_rows_transposes() {
        let m = DataMatrix::from_rows(&[[1.0, 10.0], [2.0, 20.0], [3.0, 30.5]]).unwrap();
        assert_eq!(m.column(1), &[10.0, 20.0, 30.5]);
        assert_eq!(m.get(2, 0), 3.0);
    }

    #[test]
    fn large_offsets_do_not_lose_precision() {
        let base = [0.1, -0.4, 0.35, 0.9, -1.2, 0.05];
        let other = [0.3, 0.2, -0.5, 0.8, -0.7, 0.1];
        let r0 = correlation_summary(&matrix(&[&base, &other])).unwrap().offdiag()[0];
        let shifted: Vec<f64> = base.iter().map(|x| x + 1e8).collect();
        let r1 = correlation_summary(&matrix(&[&shifted, &other])).unwrap().offdiag()[0];
        assert!((r0 - r1).abs() < 1e-7, "{r0} vs {r1}");
    }

    #[test]
    fn sphere_vectors_have_unit_norm() {
        let mut rng = substream(3, 0);
        for &n in &[3usize, 10, 57] {
            let w = sample_sphere_vectors::<f64, _>(n, 5, &mut rng).unwrap();
            for v in w.chunks_exact(n - 1) {
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_sampler_is_deterministic() {
        let a = sample_null_correlations::<f64, _>(10, 6, &mut substream(5, 9)).unwrap();
        let b = sample_null_correlations::<f64, _>(10, 6, &mut substream(5, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.offdiag().len(), 15);
    }

    #[test]
    fn sphere_r2_mean_is_one_over_n_minus_one() {
        let mut rng = substream(2024, 0);
        let reps = 100_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..reps {
            let r = sample_null_correlations::<f64, _>(10, 2, &mut rng).unwrap().offdiag()[0];
            acc += r * r;
            acc2 += r.powi(4);
        }
        let mean = acc / reps as f64;
        let se = ((acc2 / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - 1.0 / 9.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sampler_preconditions() {
        let mut rng = substream(0, 0);
        assert!(sample_null_correlations::<f64, _>(2, 3, &mut rng).is_err());
        assert!(sample_null_correlations::<f64, _>(5, 1, &mut rng).is_err());
    }
}
