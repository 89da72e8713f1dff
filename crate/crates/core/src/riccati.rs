//! Steady-state solutions of the rank-one discrete algebraic Riccati
//! equation K = A K A^H - (A K 1)(1 + 1'K 1)^{-1}(A K 1)^H with
//! A = diag(beta_j omega_j), beta_j > 1, |omega_j| = 1.
//!
//! Two solvers: plain fixed-point iteration of the recursion (valid for
//! any detectable gain), and a circulant closed form for the symmetric
//! choice beta_j = beta, omega_j = N-th roots of unity, where the DFT
//! diagonalizes everything and the eigenvalues form the geometric ladder
//! lambda_j = lambda_1 / beta^(2(j-1)) with 1 + N lambda_1 = beta^(2N).

use num_complex::Complex64;

use crate::capacity::solve_phi;
use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, diagonal_riccati_step, rank_one_riccati_step, ComplexMatrix};

/// Diagonal encoder gain A = diag(beta_1 omega_1, ..., beta_N omega_N).
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    betas: Vec<f64>,
    omegas: Vec<Complex64>,
}

impl GainMatrix {
    /// General constructor; requires beta_j > 1 and unit-modulus omegas.
    pub fn new(betas: Vec<f64>, omegas: Vec<Complex64>) -> Result<Self> {
        if betas.is_empty() || betas.len() != omegas.len() {
            return Err(Error::Parameter(
                "betas and omegas must be nonempty and of equal length".into(),
            ));
        }
        for (j, b) in betas.iter().enumerate() {
            if !(*b > 1.0) || !b.is_finite() {
                return Err(Error::Domain(format!("beta[{j}] = {b} must exceed 1")));
            }
        }
        for (j, w) in omegas.iter().enumerate() {
            if (w.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "omega[{j}] = {w} is not on the unit circle"
                )));
            }
        }
        Ok(Self { betas, omegas })
    }

    /// Symmetric parameter choice: common beta, omegas the N-th roots of
    /// unity omega_j = exp(2 pi i (j-1)/N).
    pub fn symmetric(n_senders: usize, beta: f64) -> Result<Self> {
        if n_senders == 0 {
            return Err(Error::Parameter("need at least one sender".into()));
        }
        let omegas = (0..n_senders)
            .map(|j| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n_senders as f64)
            })
            .collect();
        Self::new(vec![beta; n_senders], omegas)
    }

    pub fn n_senders(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn omegas(&self) -> &[Complex64] {
        &self.omegas
    }

    /// Diagonal entries beta_j omega_j.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.betas
            .iter()
            .zip(&self.omegas)
            .map(|(b, w)| b * w)
            .collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diagonal(&self.diagonal())
    }

    /// Inverse gain diag(1/(beta_j omega_j)).
    pub fn inverse_matrix(&self) -> ComplexMatrix {
        let inv: Vec<Complex64> = self.diagonal().iter().map(|d| 1.0 / d).collect();
        ComplexMatrix::diagonal(&inv)
    }
}

/// Fixed point of the Riccati recursion plus convergence metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    /// Hermitian positive-definite steady-state covariance.
    pub k_star: ComplexMatrix,
    /// Iterations spent (0 for the closed form).
    pub iterations: usize,
    /// Max-norm of K - step(K) at the returned K.
    pub residual: f64,
    /// Real spectrum, descending.
    pub eigenvalues: Vec<f64>,
}

/// Detectability of (A, 1) for diagonal A: with every |beta_j omega_j| > 1
/// unstable, the pair is detectable iff the diagonal entries are pairwise
/// distinct.
pub fn is_detectable(gain: &GainMatrix) -> bool {
    let diag = gain.diagonal();
    for i in 0..diag.len() {
        for j in (i + 1)..diag.len() {
            if (diag[i] - diag[j]).norm() <= 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Max-norm DARE residual of a candidate solution.
pub fn dare_residual(gain: &GainMatrix, k: &ComplexMatrix) -> Result<f64> {
    let next = rank_one_riccati_step(&gain.matrix(), k)?;
    Ok(k.max_abs_diff(&next))
}

/// Solve the DARE by iterating the recursion from `k_init` until the
/// successive-iterate max-norm change drops below `tol * (1 + |K|_max)`
/// (relative to the iterate scale, since the per-step roundoff floor
/// scales with the entries).
///
/// From any strictly positive-definite start the iteration converges to
/// the unique positive-definite solution; pass the identity when in
/// doubt. The all-zero matrix is its own degenerate fixed point (the
/// recursion has no additive noise term), so it does not reach K*.
pub fn solve_dare_iterative(
    gain: &GainMatrix,
    k_init: &ComplexMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<RiccatiSolution> {
    let n = gain.n_senders();
    if !k_init.is_square() || k_init.rows() != n {
        return Err(Error::Dimension(format!(
            "k_init must be {n}x{n} to match the gain"
        )));
    }
    if !is_detectable(gain) {
        return Err(Error::Parameter(
            "gain has repeated unstable eigenvalues; (A, 1) is not detectable".into(),
        ));
    }
    let scale = 1.0 + k_init.max_abs();
    let check = k_init.is_psd(1e-8 * scale)?;
    if check.min_eigenvalue < -1e-8 * scale {
        return Err(Error::Domain(format!(
            "k_init is not PSD: min eigenvalue {}",
            check.min_eigenvalue
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let a_diag = gain.diagonal();
    let mut k = k_init.hermitian_part();
    let mut diff = f64::INFINITY;
    for iter in 1..=max_iters {
        let next = diagonal_riccati_step(&a_diag, &k)?.hermitian_part();
        diff = k.max_abs_diff(&next);
        k = next;
        if diff < tol * (1.0 + k.max_abs()) {
            let residual = dare_residual(gain, &k)?;
            let eigenvalues = k.hermitian_eigenvalues()?;
            return Ok(RiccatiSolution { k_star: k, iterations: iter, residual, eigenvalues });
        }
    }
    Err(Error::Convergence(format!(
        "DARE iteration did not reach tol {tol} in {max_iters} steps; last change {diff}"
    )))
}

/// Closed-form DARE solution for the symmetric parameter choice:
/// K* = Q diag(lambda) Q^H with Q the N-point DFT matrix,
/// lambda_1 = (beta^(2N) - 1)/N and lambda_j = lambda_1 / beta^(2(j-1)).
pub fn solve_dare_circulant(n_senders: usize, beta: f64) -> Result<RiccatiSolution> {
    if n_senders == 0 {
        return Err(Error::Parameter("need at least one sender".into()));
    }
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta = {beta} must exceed 1")));
    }
    let n = n_senders as f64;
    let lambda1 = (beta.powi(2 * n_senders as i32) - 1.0) / n;
    let eigenvalues: Vec<f64> = (0..n_senders)
        .map(|j| lambda1 / beta.powi(2 * j as i32))
        .collect();
    let q = dft_matrix(n_senders)?;
    let lambda_cx: Vec<Complex64> =
        eigenvalues.iter().map(|l| Complex64::new(*l, 0.0)).collect();
    let k_star = q
        .matmul(&ComplexMatrix::diagonal(&lambda_cx))?
        .matmul(&q.adjoint())?
        .hermitian_part();
    let gain = GainMatrix::symmetric(n_senders, beta)?;
    let residual = dare_residual(&gain, &k_star)?;
    Ok(RiccatiSolution { k_star, iterations: 0, residual, eigenvalues })
}

/// Real diagonal entries of the steady-state covariance (the asymptotic
/// per-sender, per-real-use powers).
pub fn diagonal_power(solution: &RiccatiSolution) -> Vec<f64> {
    solution.k_star.real_diagonal()
}

/// Cross-check linking the Riccati spectrum to the capacity fixed point:
/// |lambda_1 - K*_jj phi(N, K*_jj)|, maximized over j. Small values mean
/// the largest eigenvalue and the diagonal satisfy the same identity that
/// defines phi.
pub fn lambda_phi_defect(solution: &RiccatiSolution, n_senders: usize) -> Result<f64> {
    let lambda1 = solution.eigenvalues[0];
    let mut worst = 0.0f64;
    for &kjj in &diagonal_power(solution) {
        if !(kjj > 0.0) {
            return Err(Error::Domain(format!("nonpositive diagonal entry {kjj}")));
        }
        let phi = solve_phi(n_senders, kjj, 1e-14)?;
        worst = worst.max((lambda1 - kjj * phi).abs());
    }
    Ok(worst)
}
