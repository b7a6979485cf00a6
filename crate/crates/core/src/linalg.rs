//! Banded symmetric factorizations and triangular solves.
//!
//! Everything in here works on two storage layouts: a row-major upper band
//! (for `G` and its Cholesky factor `R`) and a row-major dense upper
//! triangle (for the `R̄` of a dense QR). Both expose their rows through
//! [`UpperTriangular`], which is what the sphere searches consume.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric matrix with `half_bandwidth` stored superdiagonals.
///
/// Row `i` holds `entry(i, i..=i + b)`; positions past the last column are
/// zero padding.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymMatrix {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BandedSymMatrix {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        let b = half_bandwidth.min(n.saturating_sub(1));
        Self {
            n,
            b,
            data: vec![0.0; n * (b + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        m.data.iter_mut().for_each(|x| *x = 1.0);
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper band (`j >= i`).
    pub fn from_upper_fn(n: usize, half_bandwidth: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n, half_bandwidth);
        for i in 0..n {
            for j in i..=(i + m.b).min(n - 1) {
                m.data[i * (m.b + 1) + (j - i)] = f(i, j);
            }
        }
        m
    }

    /// Copies the upper band of a dense symmetric matrix.
    pub fn from_dense(a: &DMatrix<f64>, half_bandwidth: usize) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        Ok(Self::from_upper_fn(a.nrows(), half_bandwidth, |i, j| a[(i, j)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.b
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi - lo > self.b {
            0.0
        } else {
            self.data[lo * (self.b + 1) + (hi - lo)]
        }
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * (self.b + 1)] += shift;
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "mul_vec dimension");
        let mut out = vec![0.0; self.n];
        let w = self.b + 1;
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let end = (i + self.b).min(self.n - 1);
            out[i] += row[0] * x[i];
            for j in (i + 1)..=end {
                let v = row[j - i];
                out[i] += v * x[j];
                out[j] += v * x[i];
            }
        }
        out
    }

    /// `xᵀ·self·x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "quadratic_form dimension");
        let w = self.b + 1;
        let mut acc = 0.0;
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let end = (i + self.b).min(self.n - 1);
            let mut off = 0.0;
            for j in (i + 1)..=end {
                off += row[j - i] * x[j];
            }
            acc += x[i] * (row[0] * x[i] + 2.0 * off);
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in i..=(i + self.b).min(self.n - 1) {
                let v = self.get(i, j);
                acc += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        acc.sqrt()
    }
}

/// Row access to an upper-triangular matrix.
///
/// `row(i)` returns the possibly-nonzero entries of row `i` starting at the
/// diagonal, so `row(i)[k]` is `entry(i, i + k)`.
pub trait UpperTriangular {
    fn dim(&self) -> usize;
    fn row(&self, i: usize) -> &[f64];

    fn get(&self, i: usize, j: usize) -> f64 {
        if j < i {
            return 0.0;
        }
        self.row(i).get(j - i).copied().unwrap_or(0.0)
    }

    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(&x[i..])
                    .map(|(r, v)| r * v)
                    .sum()
            })
            .collect()
    }

    /// `selfᵀ·x`.
    fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, xi) in x.iter().enumerate().take(self.dim()) {
            for (k, r) in self.row(i).iter().enumerate() {
                out[i + k] += r * xi;
            }
        }
        out
    }

    fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.get(i, j))
    }
}

/// Banded upper-triangular matrix, the Cholesky factor `R` with `G = RᵀR`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedUpperTriangular {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BandedUpperTriangular {
    pub fn from_upper_fn(n: usize, half_bandwidth: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let b = half_bandwidth.min(n.saturating_sub(1));
        let mut data = vec![0.0; n * (b + 1)];
        for i in 0..n {
            for j in i..=(i + b).min(n - 1) {
                data[i * (b + 1) + (j - i)] = f(i, j);
            }
        }
        Self { n, b, data }
    }

    pub fn half_bandwidth(&self) -> usize {
        self.b
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.data[i * (self.b + 1)])
    }

    /// Solves `selfᵀ·x = rhs` by forward substitution.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, rhs.len())?;
        let mut x = rhs.to_vec();
        for i in 0..self.n {
            let d = self.data[i * (self.b + 1)];
            if d.abs() < SINGULAR_DIAGONAL {
                return Err(Error::SingularDiagonal { index: i });
            }
            x[i] /= d;
            let xi = x[i];
            for (k, r) in self.row(i).iter().enumerate().skip(1) {
                x[i + k] -= r * xi;
            }
        }
        Ok(x)
    }
}

impl UpperTriangular for BandedUpperTriangular {
    fn dim(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.b + 1;
        let len = w.min(self.n - i);
        &self.data[i * w..i * w + len]
    }
}

/// Dense upper-triangular matrix stored row-major, upper part only.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUpperTriangular {
    n: usize,
    data: Vec<f64>,
}

impl DenseUpperTriangular {
    /// Takes the upper triangle of `a`; entries below the diagonal are ignored.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(a[(i, j)]);
            }
        }
        Self { n, data }
    }

    fn offset(&self, i: usize) -> usize {
        // rows 0..i hold n + (n-1) + ... + (n-i+1) entries
        i * self.n - i * (i.saturating_sub(1)) / 2
    }
}

impl UpperTriangular for DenseUpperTriangular {
    fn dim(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[f64] {
        let start = self.offset(i);
        &self.data[start..start + (self.n - i)]
    }
}

/// Pivot floor and optional diagonal loading for [`cholesky_banded_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholeskyOptions {
    pub pivot_floor: f64,
    pub loading: f64,
}

impl Default for CholeskyOptions {
    fn default() -> Self {
        Self {
            pivot_floor: 1e-12,
            loading: 0.0,
        }
    }
}

const SINGULAR_DIAGONAL: f64 = 1e-14;

pub fn cholesky_banded(g: &BandedSymMatrix) -> Result<BandedUpperTriangular> {
    cholesky_banded_with(g, CholeskyOptions::default())
}

/// Banded Cholesky `G + loading·I = RᵀR` with `R` upper triangular.
///
/// The factor keeps the half-bandwidth of `g`. Costs `O(n·b²)`.
pub fn cholesky_banded_with(g: &BandedSymMatrix, opts: CholeskyOptions) -> Result<BandedUpperTriangular> {
    let n = g.n;
    let b = g.b;
    let w = b + 1;
    let mut r = vec![0.0; n * w];
    for i in 0..n {
        let k0 = i.saturating_sub(b);
        let mut pivot = g.data[i * w] + opts.loading;
        for k in k0..i {
            let rki = r[k * w + (i - k)];
            pivot -= rki * rki;
        }
        if !(pivot > opts.pivot_floor) {
            return Err(Error::NotPositiveDefinite { pivot: i, value: pivot });
        }
        let rii = pivot.sqrt();
        r[i * w] = rii;
        for j in (i + 1)..=(i + b).min(n - 1) {
            let mut acc = g.data[i * w + (j - i)];
            for k in j.saturating_sub(b)..i {
                acc -= r[k * w + (i - k)] * r[k * w + (j - k)];
            }
            r[i * w + (j - i)] = acc / rii;
        }
    }
    Ok(BandedUpperTriangular { n, b, data: r })
}

/// Solves `g·z = y` through the banded Cholesky factor.
pub fn solve_spd(g: &BandedSymMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_len(g.dim(), y.len())?;
    let r = cholesky_banded(g)?;
    solve_with_factor(&r, y)
}

/// Solves `RᵀR·z = y` given the factor.
pub fn solve_with_factor(r: &BandedUpperTriangular, y: &[f64]) -> Result<Vec<f64>> {
    let u = r.solve_transpose(y)?;
    back_substitute(r, &u)
}

/// Solves `r·x = rhs` for upper-triangular `r`.
pub fn back_substitute<R: UpperTriangular + ?Sized>(r: &R, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = r.dim();
    check_len(n, rhs.len())?;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let row = r.row(i);
        let d = row[0];
        if d.abs() < SINGULAR_DIAGONAL {
            return Err(Error::SingularDiagonal { index: i });
        }
        let mut acc = rhs[i];
        for (k, v) in row.iter().enumerate().skip(1) {
            acc -= v * x[i + k];
        }
        x[i] = acc / d;
    }
    Ok(x)
}

/// `Q̄R̄ = G` with `Q̄` orthogonal and `R̄` upper triangular with a
/// non-negative diagonal.
#[derive(Debug, Clone)]
pub struct OrthogonalFactorPair {
    pub q: DMatrix<f64>,
    pub r: DenseUpperTriangular,
}

/// Householder QR of a square matrix.
pub fn qr_factor(g: &DMatrix<f64>) -> Result<OrthogonalFactorPair> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.ncols(),
        });
    }
    let scale = g.norm();
    let mut a = g.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    let mut v = vec![0.0; n];
    for k in 0..n {
        let norm_x = (k..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm_x } else { norm_x };
        for i in k..n {
            v[i] = a[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2vvᵀ/vᵀv) A on rows k.., and Q <- Q H.
        for j in k..n {
            let dot: f64 = (k..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                a[(i, j)] -= f * v[i];
            }
        }
        for i in 0..n {
            let dot: f64 = (k..n).map(|j| q[(i, j)] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k..n {
                q[(i, j)] -= f * v[j];
            }
        }
    }
    for k in 0..n {
        if a[(k, k)] < 0.0 {
            for j in k..n {
                a[(k, j)] = -a[(k, j)];
            }
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
        }
        if a[(k, k)] < 1e-12 * scale {
            return Err(Error::RankDeficient { column: k });
        }
    }
    Ok(OrthogonalFactorPair {
        q,
        r: DenseUpperTriangular::from_dense(&a),
    })
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
