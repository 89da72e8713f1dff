//! Linear-feedback sum-capacity of the symmetric Gaussian MAC.
//!
//! The central object is the cooperation factor `phi(N, P)`, the unique
//! root in [1, N] of
//!
//! ```text
//! (1 + N P phi)^(N-1) = (1 + P phi (N - phi))^N
//! ```
//!
//! from which the sum-capacity is `C_L = (1/2) log(1 + N P phi)`. Both
//! sides overflow f64 quickly, so the solver works with the log-domain
//! difference `(N-1) log1p(N P phi) - N log1p(P phi (N - phi))`, which is
//! negative at phi = 1, positive at phi = N, and strictly increasing in
//! between; plain bisection is unconditionally convergent there.
//!
//! All values are in nats.

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

const MAX_BISECT_ITERS: usize = 300;

/// A solved operating point: the cooperation factor and sum-capacity for
/// (n_senders, power).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    pub n_senders: usize,
    /// Per-sender block power, noise-normalized.
    pub power: f64,
    /// Cooperation factor in [1, N].
    pub phi: f64,
    /// Linear-feedback sum-capacity in nats.
    pub sum_capacity: f64,
}

/// Exchangeable covariance x ((1-rho) I + rho 11'), parameterized by the
/// per-sender power x and the cooperation factor phi = 1 + (N-1) rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricCovariance {
    pub scale_x: f64,
    pub phi: f64,
    pub n_senders: usize,
}

impl SymmetricCovariance {
    pub fn new(scale_x: f64, phi: f64, n_senders: usize) -> Result<Self> {
        if n_senders < 2 {
            return Err(Error::Parameter("need at least 2 senders".into()));
        }
        if !(scale_x >= 0.0) {
            return Err(Error::Domain("per-sender power must be nonnegative".into()));
        }
        if !(0.0..=n_senders as f64).contains(&phi) {
            return Err(Error::Domain(format!(
                "phi = {phi} outside [0, {n_senders}]"
            )));
        }
        Ok(Self { scale_x, phi, n_senders })
    }

    /// Equivalent off-diagonal correlation rho = (phi - 1)/(N - 1).
    pub fn rho(&self) -> f64 {
        (self.phi - 1.0) / (self.n_senders as f64 - 1.0)
    }

    pub fn to_matrix(&self) -> RealMatrix {
        let rho = self.rho();
        RealMatrix::from_fn(self.n_senders, self.n_senders, |i, j| {
            if i == j {
                self.scale_x
            } else {
                self.scale_x * rho
            }
        })
    }
}

/// Signed log-domain defect of the fixed-point identity at (n, p, phi):
/// `(N-1) log1p(N p phi) - N log1p(p phi (N - phi))`. Zero at the root,
/// negative below it, positive above it.
pub fn phi_defect(n_senders: usize, power: f64, phi: f64) -> f64 {
    let n = n_senders as f64;
    (n - 1.0) * (n * power * phi).ln_1p() - n * (power * phi * (n - phi)).ln_1p()
}

/// Scale-free residual of the fixed-point identity, suitable for
/// pass/fail checks across many orders of magnitude of P.
pub fn phi_residual(n_senders: usize, power: f64, phi: f64) -> f64 {
    let n = n_senders as f64;
    let lhs = (n - 1.0) * (n * power * phi).ln_1p();
    phi_defect(n_senders, power, phi).abs() / lhs.max(1.0)
}

/// Solve for the cooperation factor phi(N, P) in [1, N].
///
/// `tol` bounds the final bisection bracket width. Powers at or below
/// zero are a domain error; the P -> 0 limit is phi = 1 and is handled by
/// [`linear_feedback_sum_capacity`].
pub fn solve_phi(n_senders: usize, power: f64, tol: f64) -> Result<f64> {
    if n_senders < 2 {
        return Err(Error::Parameter("need at least 2 senders".into()));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Domain(format!("power must be positive, got {power}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let n = n_senders as f64;
    let mut lo = 1.0;
    let mut hi = n;
    // phi_defect(1) < 0 < phi_defect(N) for every P > 0.
    for _ in 0..MAX_BISECT_ITERS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if phi_defect(n_senders, power, mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Linear-feedback sum-capacity C_L(N, P) = (1/2) log(1 + N P phi(N, P)),
/// in nats. P = 0 returns zero capacity with phi = 1 by convention.
pub fn linear_feedback_sum_capacity(
    n_senders: usize,
    power: f64,
    tol: f64,
) -> Result<CapacityPoint> {
    if n_senders < 2 {
        return Err(Error::Parameter("need at least 2 senders".into()));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::Domain(format!(
            "power must be nonnegative, got {power}"
        )));
    }
    if power == 0.0 {
        return Ok(CapacityPoint { n_senders, power, phi: 1.0, sum_capacity: 0.0 });
    }
    let phi = solve_phi(n_senders, power, tol)?;
    let sum_capacity = 0.5 * (n_senders as f64 * power * phi).ln_1p();
    Ok(CapacityPoint { n_senders, power, phi, sum_capacity })
}

/// C1(x, phi) = (1/2) log(1 + N x phi).
pub fn c1(x: f64, phi: f64, n_senders: usize) -> Result<f64> {
    let arg = n_senders as f64 * x * phi;
    if arg <= -1.0 {
        return Err(Error::Domain(format!("log argument 1 + {arg} is not positive")));
    }
    Ok(0.5 * arg.ln_1p())
}

/// C2(x, phi) = N / (2(N-1)) log(1 + (N - phi) x phi).
pub fn c2(x: f64, phi: f64, n_senders: usize) -> Result<f64> {
    let n = n_senders as f64;
    let arg = (n - phi) * x * phi;
    if arg <= -1.0 {
        return Err(Error::Domain(format!("log argument 1 + {arg} is not positive")));
    }
    Ok(n / (2.0 * (n - 1.0)) * arg.ln_1p())
}

/// f1(K) = (1/2) log(1 + sum of all entries of K).
pub fn f1(k: &RealMatrix) -> Result<f64> {
    if !k.is_square() {
        return Err(Error::Dimension("f1 needs a square matrix".into()));
    }
    let total = k.sum_entries();
    if total <= -1.0 {
        return Err(Error::Domain(format!(
            "1 + sum(K) = {} is not positive",
            1.0 + total
        )));
    }
    Ok(0.5 * total.ln_1p())
}

/// f2(K) = 1/(2(N-1)) sum_j log[1 + sum(K) - (row_j sum)^2 / K_jj].
///
/// A sender with zero power contributes nothing: if the whole j-th row is
/// zero its ratio term is taken as 0 (the vanishing-power limit). A zero
/// diagonal with a nonzero row cannot come from a covariance and is a
/// domain error.
pub fn f2(k: &RealMatrix) -> Result<f64> {
    if !k.is_square() {
        return Err(Error::Dimension("f2 needs a square matrix".into()));
    }
    let n = k.rows();
    if n < 2 {
        return Err(Error::Dimension("f2 needs at least a 2x2 matrix".into()));
    }
    let total = k.sum_entries();
    let mut acc = 0.0;
    for j in 0..n {
        let diag = k.get(j, j);
        let row = k.row_sum(j);
        let ratio = if diag == 0.0 {
            let row_zero = (0..n).all(|c| k.get(j, c) == 0.0);
            if row_zero {
                0.0
            } else {
                return Err(Error::Domain(format!(
                    "row {j} has zero diagonal but nonzero entries"
                )));
            }
        } else {
            row * row / diag
        };
        let arg = total - ratio;
        if arg <= -1.0 {
            return Err(Error::Domain(format!(
                "term {j} of f2 has nonpositive log argument 1 + {arg}"
            )));
        }
        acc += arg.ln_1p();
    }
    Ok(acc / (2.0 * (n as f64 - 1.0)))
}

/// Power threshold P_c(N) above which the feedback sum-capacity is known
/// to equal the linear-feedback one: the unique positive root of
/// (1 + N^2 P / 2)^(N-1) = (1 + N^2 P / 4)^N. Degenerates to 0 at N = 2.
pub fn kramer_threshold(n_senders: usize, tol: f64) -> Result<f64> {
    if n_senders < 2 {
        return Err(Error::Parameter("need at least 2 senders".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    if n_senders == 2 {
        // (1 + 2P) = (1 + P)^2 forces P = 0: every positive power is
        // above the threshold.
        return Ok(0.0);
    }
    let n = n_senders as f64;
    let defect = |p: f64| (n - 1.0) * (n * n * p / 2.0).ln_1p() - n * (n * n * p / 4.0).ln_1p();
    // Positive for small P (N >= 3), negative for large P; expand the
    // bracket geometrically, then bisect.
    let mut hi = 1.0;
    let mut guard = 0;
    while defect(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence("no sign change found for P_c bracket".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..MAX_BISECT_ITERS {
        if hi - lo <= tol * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if defect(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gaps of C_L(N, P) against its two reference curves:
/// `low_gap  = C_L - (1/2) log(1 + N P)`   (no-feedback baseline, >= 0)
/// `high_gap = C_L - (1/2) log(1 + N^2 P)` (full-cooperation bound, <= 0).
pub fn limit_gaps(n_senders: usize, power: f64) -> Result<(f64, f64)> {
    let point = linear_feedback_sum_capacity(n_senders, power, 1e-13)?;
    let n = n_senders as f64;
    let low = point.sum_capacity - 0.5 * (n * power).ln_1p();
    let high = point.sum_capacity - 0.5 * (n * n * power).ln_1p();
    Ok((low, high))
}
