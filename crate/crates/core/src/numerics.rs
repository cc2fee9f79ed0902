//! Dense complex linear algebra used by the solvers.
//!
//! Everything here is small and dense: channel matrices are at most a few
//! hundred entries on a side. The one non-trivial kernel is
//! [`max_eigenvalue`], a shifted power iteration returning the algebraically
//! largest eigenvalue of a Hermitian operator, which may be indefinite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type ComplexVector = Vec<Complex64>;

const HERMITIAN_RTOL: f64 = 1e-10;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::invalid("matrix contains non-finite entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn diag(&self) -> ComplexVector {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[Complex64]) -> Result<ComplexVector> {
        if x.len() != self.cols {
            return Err(Error::invalid(format!(
                "vector of length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `selfᴴ * y`.
    pub fn adjoint_matvec(&self, y: &[Complex64]) -> Result<ComplexVector> {
        if y.len() != self.rows {
            return Err(Error::invalid(format!(
                "vector of length {} does not match {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        self.adjoint_matvec_into(y, &mut out);
        Ok(out)
    }

    // Unchecked kernels; callers guarantee the lengths.
    pub(crate) fn matvec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot_unconj(self.row(i), x);
        }
    }

    pub(crate) fn adjoint_matvec_into(&self, y: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for (i, &yi) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
    }

    /// `selfᴴ * self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i].conj();
                for (gij, rj) in g.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *gij += ai * rj;
                }
            }
        }
        g
    }

    /// Scales column `j` by `d[j]`, i.e. `self * diag(d)`.
    pub fn scale_columns(&self, d: &[Complex64]) -> Result<Self> {
        if d.len() != self.cols {
            return Err(Error::invalid("column scaling length mismatch"));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * d[j]))
    }

    pub fn is_hermitian(&self, rtol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = rtol * scale.max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| (i..self.cols).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Maximum absolute row sum; an upper bound on every eigenvalue modulus.
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

#[inline]
fn dot_unconj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `aᴴ b`.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Elementwise product of two equally sized matrices.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_shape(b)?;
    Ok(ComplexMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

/// `xᴴ A x`.
pub fn quadratic_form(x: &[Complex64], a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() || a.cols != x.len() {
        return Err(Error::invalid(format!(
            "quadratic form of length-{} vector with {}x{} matrix",
            x.len(),
            a.rows,
            a.cols
        )));
    }
    Ok((0..a.rows).map(|i| x[i].conj() * dot_unconj(a.row(i), x)).sum())
}

/// Relative modulus error treated as already projected.
const MODULUS_SLACK: f64 = 8.0 * f64::EPSILON;

/// Projects each entry onto the circle of radius `magnitude`, keeping its phase.
///
/// Entries with modulus at or below `zero_tol` have no usable phase; they take
/// the phase of the matching entry of `previous` when given, else phase 0.
pub fn phase_project_with(
    v: &[Complex64],
    magnitude: f64,
    previous: Option<&[Complex64]>,
    zero_tol: f64,
) -> ComplexVector {
    v.iter()
        .enumerate()
        .map(|(i, &z)| {
            let r = z.norm();
            if (r - magnitude).abs() <= MODULUS_SLACK * magnitude {
                // Already on the circle up to rounding; keeps the map idempotent.
                z
            } else if r > zero_tol {
                z * (magnitude / r)
            } else {
                match previous {
                    Some(prev) if prev[i].norm() > 0.0 => prev[i] * (magnitude / prev[i].norm()),
                    _ => Complex64::new(magnitude, 0.0),
                }
            }
        })
        .collect()
}

/// `magnitude · exp(j·arg(v))` entrywise; exact zeros map to phase 0.
pub fn phase_project(v: &[Complex64], magnitude: f64) -> ComplexVector {
    phase_project_with(v, magnitude, None, 0.0)
}

/// A Hermitian linear map applied matrix-free.
pub trait HermitianOperator {
    fn dim(&self) -> usize;

    /// Writes `H x` into `out`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);

    /// A value `σ ≥ 0` with `H + σI` positive semidefinite.
    fn shift_bound(&self) -> f64;
}

impl HermitianOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.matvec_into(x, out);
    }

    fn shift_bound(&self) -> f64 {
        self.gershgorin_radius()
    }
}

/// The operator `XᴴX − α·YᴴY` kept in factored form.
///
/// Both majorized subproblems have this shape with short, wide factors, so a
/// product costs `O((rows_x + rows_y)·n)` instead of `O(n²)`.
#[derive(Debug, Clone)]
pub struct GramDifference {
    pub pos: ComplexMatrix,
    pub neg: ComplexMatrix,
    pub alpha: f64,
}

impl GramDifference {
    pub fn new(pos: ComplexMatrix, neg: ComplexMatrix, alpha: f64) -> Result<Self> {
        if pos.cols() != neg.cols() {
            return Err(Error::invalid("gram factors have different column counts"));
        }
        Ok(Self { pos, neg, alpha })
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let p = self.pos.gram();
        let n = self.neg.gram();
        p.sub(&n.scale(Complex64::new(self.alpha, 0.0)))
            .expect("gram factors share a column count")
    }
}

impl HermitianOperator for GramDifference {
    fn dim(&self) -> usize {
        self.pos.cols()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let mut tmp_p = vec![Complex64::new(0.0, 0.0); self.pos.rows()];
        self.pos.matvec_into(x, &mut tmp_p);
        self.pos.adjoint_matvec_into(&tmp_p, out);
        if self.neg.rows() == 0 || self.alpha == 0.0 {
            return;
        }
        let mut tmp_n = vec![Complex64::new(0.0, 0.0); self.neg.rows()];
        let mut back = vec![Complex64::new(0.0, 0.0); self.neg.cols()];
        self.neg.matvec_into(x, &mut tmp_n);
        self.neg.adjoint_matvec_into(&tmp_n, &mut back);
        for (o, b) in out.iter_mut().zip(&back) {
            *o -= self.alpha * b;
        }
    }

    fn shift_bound(&self) -> f64 {
        // λ_min ≥ −α·λ_max(YᴴY) ≥ −α·‖Y‖_F².
        self.alpha.max(0.0) * self.neg.frobenius_norm_sqr()
    }
}

/// Stop rule and start vector for [`max_eigenvalue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 5000,
            seed: 0x5eed_1a3b,
        }
    }
}

/// Algebraically largest eigenvalue of a Hermitian operator.
///
/// Runs power iteration on `H + σI` with `σ` from [`HermitianOperator::shift_bound`],
/// which makes the dominant eigenvalue the algebraic maximum, then subtracts `σ`.
pub fn max_eigenvalue(op: &impl HermitianOperator, cfg: &PowerIteration) -> Result<f64> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::invalid("eigenvalue of an empty operator"));
    }
    let shift = op.shift_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: ComplexVector = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nx = norm_sqr(&x).sqrt();
    x.iter_mut().for_each(|z| *z /= nx);

    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut prev = f64::NAN;
    for _ in 0..cfg.max_iter {
        op.apply(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        // x is unit norm, so xᴴ(H+σI)x is the Rayleigh quotient.
        let rho = inner(&x, &y).re;
        let ny = norm_sqr(&y).sqrt();
        if ny == 0.0 {
            // H + σI annihilates a generic start vector, so H = −σI.
            return Ok(-shift);
        }
        if (rho - prev).abs() <= cfg.rel_tol * rho.abs() {
            return Ok(rho - shift);
        }
        prev = rho;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        best: prev - shift,
    })
}

/// [`max_eigenvalue`] on a dense matrix, after checking it is square and Hermitian.
pub fn hermitian_max_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    hermitian_max_eigenvalue_with(h, &PowerIteration::default())
}

pub fn hermitian_max_eigenvalue_with(h: &ComplexMatrix, cfg: &PowerIteration) -> Result<f64> {
    if !h.is_square() {
        return Err(Error::invalid(format!("{}x{} matrix is not square", h.rows, h.cols)));
    }
    if !h.is_hermitian(HERMITIAN_RTOL) {
        return Err(Error::invalid("matrix is not Hermitian"));
    }
    max_eigenvalue(h, cfg)
}
