//! Small dense real and complex matrices.
//!
//! Everything downstream works with matrices of at most a few dozen
//! rows. A cyclic Jacobi eigensolver handles the symmetric/Hermitian
//! spectra, circulant matrices come from DFT synthesis, and the
//! rank-one Riccati update is shared by the steady-state solver and the
//! encoder recursion.

pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn sum_entries(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.cols).map(|j| self.get(i, j)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix sizes differ in add".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension("inner dimensions differ in matmul".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Largest absolute asymmetry max |a_ij - a_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Hermitian/PSD report for a square real matrix.
    pub fn is_psd(&self, tol: f64) -> Result<HermitianCheckReport> {
        if !self.is_square() {
            return Err(Error::Dimension("PSD check needs a square matrix".into()));
        }
        let defect = self.symmetry_defect();
        let sym = Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i))
        });
        let eigs = symmetric_eigenvalues(&sym)?;
        Ok(HermitianCheckReport {
            is_hermitian: defect <= tol,
            max_asymmetry: defect,
            min_eigenvalue: *eigs.last().expect("nonempty spectrum"),
        })
    }
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = entries[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension("inner dimensions differ in matmul".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Row sums, i.e. the matrix applied to the all-one vector.
    pub fn row_sums(&self) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).re).collect()
    }

    /// Largest deviation from Hermitian symmetry, max |a_ij - conj(a_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.rows {
            d = d.max(self.get(i, i).im.abs());
            for j in (i + 1)..self.cols {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Symmetrize into the nearest Hermitian matrix (A + A^H)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i).conj())
        })
    }

    /// Eigenvalues of the Hermitian part, descending. Uses the real
    /// symmetric embedding [[S, -T], [T, S]] of H = S + iT, whose spectrum
    /// is that of H with every eigenvalue doubled.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::Dimension("eigenvalues need a square matrix".into()));
        }
        let h = self.hermitian_part();
        let n = self.rows;
        let embed = RealMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let (bi, ii) = (i / n, i % n);
            let (bj, jj) = (j / n, j % n);
            let z = h.get(ii, jj);
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            }
        });
        let all = symmetric_eigenvalues(&embed)?;
        // Each eigenvalue appears exactly twice in the embedding.
        Ok(all.into_iter().step_by(2).collect())
    }

    /// Hermitian/PSD report for a square complex matrix.
    pub fn is_psd(&self, tol: f64) -> Result<HermitianCheckReport> {
        if !self.is_square() {
            return Err(Error::Dimension("PSD check needs a square matrix".into()));
        }
        let defect = self.hermitian_defect();
        let eigs = self.hermitian_eigenvalues()?;
        Ok(HermitianCheckReport {
            is_hermitian: defect <= tol,
            max_asymmetry: defect,
            min_eigenvalue: *eigs.last().expect("nonempty spectrum"),
        })
    }
}

/// Outcome of a Hermitian/positive-semidefiniteness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianCheckReport {
    pub is_hermitian: bool,
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
}

/// Unitary N-point DFT matrix, Q_jk = n^{-1/2} exp(-2 pi i (j-1)(k-1)/n).
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Dimension("DFT size must be positive".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let base = -2.0 * std::f64::consts::PI / n as f64;
    Ok(ComplexMatrix::from_fn(n, n, |j, k| {
        // Reduce the exponent index mod n before multiplying to keep the
        // angle small; powers of roots of unity stay exact this way.
        let idx = (j * k) % n;
        Complex64::from_polar(scale, base * idx as f64)
    }))
}

/// One step of the rank-one Riccati update
/// A K A^H - (A K 1)(1 + 1' K 1)^{-1} (A K 1)^H.
///
/// `k` is expected Hermitian PSD; the output is then Hermitian PSD up to
/// roundoff (it is the covariance of a one-step estimation error).
pub fn rank_one_riccati_step(a: &ComplexMatrix, k: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || !k.is_square() || a.rows() != k.rows() {
        return Err(Error::Dimension(
            "Riccati step needs square matrices of equal size".into(),
        ));
    }
    let n = a.rows();
    let k1: Vec<Complex64> = k.row_sums();
    let s = 1.0 + k1.iter().map(|v| v.re).sum::<f64>();
    // 1 + 1'K1 >= 1 for PSD K; anything else means a corrupted input.
    if s <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + 1'K1 = {s} is not positive; K is not a covariance"
        )));
    }
    // ak1 = A (K 1)
    let ak1: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j) * k1[j]).sum())
        .collect();
    let akah = a.matmul(k)?.matmul(&a.adjoint())?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        akah.get(i, j) - ak1[i] * ak1[j].conj() / s
    }))
}

/// [`rank_one_riccati_step`] specialized to diagonal A, given as its
/// diagonal entries. Produces bit-identical results to the general form
/// (each product involves exactly one nonzero term there) at O(N^2) cost.
pub fn diagonal_riccati_step(a_diag: &[Complex64], k: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a_diag.len();
    if !k.is_square() || k.rows() != n {
        return Err(Error::Dimension(
            "Riccati step needs a square K matching the gain".into(),
        ));
    }
    let k1 = k.row_sums();
    let s = 1.0 + k1.iter().map(|v| v.re).sum::<f64>();
    if s <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + 1'K1 = {s} is not positive; K is not a covariance"
        )));
    }
    let ak1: Vec<Complex64> = (0..n).map(|i| a_diag[i] * k1[i]).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        a_diag[i] * k.get(i, j) * a_diag[j].conj() - ak1[i] * ak1[j].conj() / s
    }))
}

/// Eigenvalues of a symmetric real matrix in descending order, via cyclic
/// Jacobi rotations. Tolerance is relative to the Frobenius norm.
pub fn symmetric_eigenvalues(m: &RealMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(m)?.0)
}

/// Full symmetric eigendecomposition: (eigenvalues descending, matrix of
/// column eigenvectors in the matching order).
pub fn symmetric_eigen(m: &RealMatrix) -> Result<(Vec<f64>, RealMatrix)> {
    jacobi(m)
}

fn jacobi(m: &RealMatrix) -> Result<(Vec<f64>, RealMatrix)> {
    if !m.is_square() {
        return Err(Error::Dimension("eigendecomposition needs a square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = RealMatrix::identity(n);
    let frob: f64 = a.entries().iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = 1e-14 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).powi(2);
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= stop / (n as f64) {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = RealMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((values, vectors))
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues
/// below `rel_tol` times the largest are treated as zero.
pub fn symmetric_pseudo_inverse(m: &RealMatrix, rel_tol: f64) -> Result<RealMatrix> {
    let (values, vectors) = symmetric_eigen(m)?;
    let cutoff = rel_tol * values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let n = m.rows();
    let mut out = RealMatrix::zeros(n, n);
    for k in 0..n {
        if values[k].abs() <= cutoff {
            continue;
        }
        let inv = 1.0 / values[k];
        for i in 0..n {
            for j in 0..n {
                let add = inv * vectors.get(i, k) * vectors.get(j, k);
                out.set(i, j, out.get(i, j) + add);
            }
        }
    }
    Ok(out)
}

/// Symmetric square root of a PSD matrix; tiny negative eigenvalues from
/// roundoff are clipped to zero.
pub fn symmetric_sqrt(m: &RealMatrix) -> Result<RealMatrix> {
    let (values, vectors) = symmetric_eigen(m)?;
    let n = m.rows();
    let scale = values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut out = RealMatrix::zeros(n, n);
    for k in 0..n {
        if values[k] <= 0.0 {
            if values[k] < -1e-9 * scale.max(1.0) {
                return Err(Error::Domain(format!(
                    "matrix is not PSD: eigenvalue {}",
                    values[k]
                )));
            }
            continue;
        }
        let root = values[k].sqrt();
        for i in 0..n {
            for j in 0..n {
                let add = root * vectors.get(i, k) * vectors.get(j, k);
                out.set(i, j, out.get(i, j) + add);
            }
        }
    }
    Ok(out)
}
