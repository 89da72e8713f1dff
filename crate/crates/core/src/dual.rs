//! Lagrange-dual converse machinery.
//!
//! The converse bound works with
//!
//! ```text
//! g(gamma, x, phi) = (1 - gamma) C1(x, phi) + gamma C2(x, phi)
//! J(lambda, gamma) = max_{x >= 0} max_{0 <= phi <= N} g + lambda N (P - x)
//! ```
//!
//! For fixed (gamma, x) the inner maximizer phi* solves a quadratic with
//! coefficients `a = (N + gamma - 1 + gamma N) x`,
//! `b = -N (N + gamma - 1) x + 2 gamma`, `c = -(N + gamma - 1)`; since
//! `a c < 0` exactly one root is positive. The outer maximization in x is
//! concave, handled by a grid pre-scan plus golden-section refinement.
//! At the multipliers `gamma_star` (closed form) and `lambda_star`
//! (first-order condition via central differences) the dual bound meets
//! the capacity value, which is the strong-duality check exercised by the
//! acceptance suite.

use crate::capacity::{c1, c2, f1, f2, solve_phi};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

/// Multiplier pair of the dual bound: `gamma` prices the dependence
/// balance constraint, `lambda` the common power constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualParams {
    pub gamma: f64,
    pub lambda: f64,
}

impl DualParams {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !(gamma >= 0.0) {
            return Err(Error::Parameter(format!(
                "multipliers must be nonnegative, got lambda = {lambda}, gamma = {gamma}"
            )));
        }
        Ok(Self { gamma, lambda })
    }
}

/// Closed-form inner maximizer of g over phi at fixed (gamma, x), with
/// the quadratic coefficients it solves and the curvature parameter
/// alpha = 1 + gamma N / (N + gamma - 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerMaximizer {
    pub phi_star: f64,
    pub quad_a: f64,
    pub quad_b: f64,
    pub quad_c: f64,
    pub alpha: f64,
}

/// The inner maximization in phi either has a finite stationary point or
/// (at gamma = 0, where g = C1 keeps growing in phi) none at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiStar {
    Finite(InnerMaximizer),
    Unbounded,
}

/// One evaluation of the dual bound together with its argmax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEvaluation {
    pub params: DualParams,
    pub j_value: f64,
    pub x_star: f64,
    /// The phi actually used at x_star (clamped to [0, N]).
    pub phi_at_x: f64,
}

/// g(gamma, x, phi) = (1 - gamma) C1(x, phi) + gamma C2(x, phi).
pub fn g(gamma: f64, x: f64, phi: f64, n_senders: usize) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Parameter(format!("gamma must be nonnegative, got {gamma}")));
    }
    Ok((1.0 - gamma) * c1(x, phi, n_senders)? + gamma * c2(x, phi, n_senders)?)
}

/// Stationary point of g in phi at fixed (gamma, x).
///
/// Accepts x = 0, where the quadratic degenerates to a linear equation
/// with root (N + gamma - 1) / (2 gamma), the x -> 0 limit of phi*.
pub fn phi_star(gamma: f64, x: f64, n_senders: usize) -> Result<PhiStar> {
    if n_senders < 2 {
        return Err(Error::Parameter("need at least 2 senders".into()));
    }
    if !(gamma >= 0.0) {
        return Err(Error::Parameter(format!("gamma must be nonnegative, got {gamma}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
    }
    if gamma == 0.0 {
        // g = C1 is strictly increasing in phi: no finite maximizer.
        return Ok(PhiStar::Unbounded);
    }
    let n = n_senders as f64;
    let a = (n + gamma - 1.0 + gamma * n) * x;
    let b = -n * (n + gamma - 1.0) * x + 2.0 * gamma;
    let c = -(n + gamma - 1.0);
    let alpha = 1.0 + gamma * n / (n + gamma - 1.0);
    let root = if a == 0.0 {
        -c / b
    } else {
        // a c < 0 guarantees one positive root; pick it through the
        // numerically stable form to survive tiny a (x -> 0).
        let disc = (b * b - 4.0 * a * c).sqrt();
        let q = -0.5 * (b + b.signum() * disc);
        if b > 0.0 {
            c / q
        } else {
            q / a
        }
    };
    Ok(PhiStar::Finite(InnerMaximizer {
        phi_star: root,
        quad_a: a,
        quad_b: b,
        quad_c: c,
        alpha,
    }))
}

/// g*(gamma, x) = g at the inner maximizer. For gamma = 0 the supremum
/// over the admissible interval [0, N] sits at phi = N, so the
/// constrained value C1(x, N) is reported.
pub fn g_star(gamma: f64, x: f64, n_senders: usize) -> Result<f64> {
    match phi_star(gamma, x, n_senders)? {
        PhiStar::Unbounded => c1(x, n_senders as f64, n_senders),
        PhiStar::Finite(inner) => g(gamma, x, inner.phi_star, n_senders),
    }
}

/// Inner maximum of g over phi restricted to [0, N], as the dual bound
/// needs it. Returns (value, phi used).
fn inner_max_clamped(gamma: f64, x: f64, n_senders: usize) -> Result<(f64, f64)> {
    let n = n_senders as f64;
    if x == 0.0 {
        return Ok((0.0, n));
    }
    let phi = match phi_star(gamma, x, n_senders)? {
        PhiStar::Unbounded => n,
        // g is concave in phi, so clamping the stationary point to the
        // admissible interval yields the constrained maximum.
        PhiStar::Finite(inner) => inner.phi_star.clamp(0.0, n),
    };
    Ok((g(gamma, x, phi, n_senders)?, phi))
}

/// Golden-section maximization of a concave function on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 300 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Evaluate the dual bound J(lambda, gamma) for the configuration
/// (n_senders, power) by nested maximization: closed-form phi inside,
/// grid pre-scan plus golden-section over x outside.
///
/// `grid` is the pre-scan resolution (200 is plenty). lambda = 0 leaves
/// the objective unbounded in x and is reported as such.
pub fn dual_bound(
    lambda: f64,
    gamma: f64,
    n_senders: usize,
    power: f64,
    grid: usize,
) -> Result<DualEvaluation> {
    let params = DualParams::new(lambda, gamma)?;
    if n_senders < 2 {
        return Err(Error::Parameter("need at least 2 senders".into()));
    }
    if !(power >= 0.0) {
        return Err(Error::Domain("power must be nonnegative".into()));
    }
    if grid < 2 {
        return Err(Error::Parameter("grid must have at least 2 points".into()));
    }
    if lambda == 0.0 {
        return Err(Error::Unbounded(
            "lambda = 0: g* is nondecreasing and unbounded in x".into(),
        ));
    }
    let n = n_senders as f64;
    // The penalty slope lambda N must dominate the logarithmic growth of
    // g* before the bracket end; g*' <= (1 + gamma) N / (2 (N-1) x) makes
    // 10 (1 + gamma) / lambda a safe cut.
    let x_hi = (10.0 * power).max(10.0 * (1.0 + gamma) / lambda).max(1.0);
    let objective = |x: f64| -> f64 {
        match inner_max_clamped(gamma, x, n_senders) {
            Ok((v, _)) => v + lambda * n * (power - x),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let mut best_k = 0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..grid {
        let x = x_hi * k as f64 / (grid - 1) as f64;
        let v = objective(x);
        if v > best_val {
            best_val = v;
            best_k = k;
        }
    }
    let cell = x_hi / (grid - 1) as f64;
    let lo = (best_k as f64 - 1.0).max(0.0) * cell;
    let hi = ((best_k + 1) as f64).min((grid - 1) as f64) * cell;
    let (x_star, j_refined) = golden_max(&objective, lo, hi, 1e-12 * x_hi.max(1.0));
    let (x_star, j_value) = if j_refined >= best_val {
        (x_star, j_refined)
    } else {
        (best_k as f64 * cell, best_val)
    };
    let (_, phi_at_x) = inner_max_clamped(gamma, x_star, n_senders)?;
    Ok(DualEvaluation { params, j_value, x_star, phi_at_x })
}

/// The multiplier gamma*(N, P) that makes the inner maximizer at x = P
/// coincide with the capacity fixed point phi(N, P):
/// `gamma* = (1 - (N - 2 phi)(1 + N P phi) / ((N-1)(1 + P phi (N - phi))))^{-1}`.
pub fn gamma_star(n_senders: usize, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::Domain("power must be positive".into()));
    }
    let n = n_senders as f64;
    let phi = solve_phi(n_senders, power, 1e-14)?;
    let numer = (n - 2.0 * phi) * (1.0 + n * power * phi);
    let denom = (n - 1.0) * (1.0 + power * phi * (n - phi));
    let inv = 1.0 - numer / denom;
    if !(inv > 0.0) {
        return Err(Error::Domain(format!(
            "gamma* undefined: 1 - ratio = {inv} at phi = {phi}"
        )));
    }
    Ok(1.0 / inv)
}

/// The power multiplier lambda* matching gamma*: the slope that makes
/// x = P stationary, computed as (1/N) d g*(gamma*, x)/dx at x = P by
/// central differences with step 1e-5 P.
pub fn lambda_star(n_senders: usize, power: f64) -> Result<f64> {
    let gamma = gamma_star(n_senders, power)?;
    lambda_for_gamma(gamma, n_senders, power)
}

/// First-order multiplier for an arbitrary gamma: lambda(gamma) =
/// (1/N) d g*(gamma, x)/dx at x = P.
pub fn lambda_for_gamma(gamma: f64, n_senders: usize, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::Domain("power must be positive".into()));
    }
    let h = 1e-5 * power;
    let up = g_star(gamma, power + h, n_senders)?;
    let down = g_star(gamma, power - h, n_senders)?;
    Ok((up - down) / (2.0 * h * n_senders as f64))
}

/// Single-letter dependence balance gap f1(K) - f2(K); at most zero when
/// K satisfies the dependence balance condition.
pub fn dependence_balance_gap(k: &RealMatrix) -> Result<f64> {
    Ok(f1(k)? - f2(k)?)
}
