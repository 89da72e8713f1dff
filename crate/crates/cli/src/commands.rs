//! Handlers for the six subcommands.

use std::path::PathBuf;

use gmacfb_core::capacity::{
    kramer_threshold, linear_feedback_sum_capacity, SymmetricCovariance,
};
use gmacfb_core::dual::{dependence_balance_gap, dual_bound, gamma_star, lambda_star};
use gmacfb_core::kramer::{chebyshev_error_bound, KramerParams};
use gmacfb_core::linalg::{Complex64, ComplexMatrix, RealMatrix};
use gmacfb_core::maxcorr::{
    conditional_correlation, maximal_correlation_diagnostics, GaussianJoint,
    LINEAR_ATTAINMENT_TOL,
};
use gmacfb_core::riccati::{
    diagonal_power, lambda_phi_defect, solve_dare_circulant, solve_dare_iterative, GainMatrix,
};
use gmacfb_core::sim::run_campaign;

use crate::record::{num, num_list, OutputRecord};
use crate::{CliError, OutputOpts};

const LN2: f64 = std::f64::consts::LN_2;

/// Presentation-layer unit conversion: capacities are computed in nats
/// and divided by ln 2 when bits are requested.
fn units(out: OutputOpts) -> (f64, &'static str) {
    if out.bits {
        (1.0 / LN2, "bits")
    } else {
        (1.0, "nats")
    }
}

fn require_senders(senders: usize) -> Result<(), CliError> {
    if senders < 2 {
        return Err(CliError::Usage(format!(
            "--senders must be at least 2, got {senders}"
        )));
    }
    Ok(())
}

pub fn capacity(
    senders: usize,
    power: f64,
    tol: f64,
    out: OutputOpts,
) -> Result<(), CliError> {
    require_senders(senders)?;
    let (scale, unit) = units(out);
    let point = linear_feedback_sum_capacity(senders, power, tol)?;
    let n = senders as f64;
    let no_feedback = 0.5 * (n * power).ln_1p();
    let full_cooperation = 0.5 * (n * n * power).ln_1p();
    let threshold = kramer_threshold(senders, tol)?;

    let mut rec = OutputRecord::new("capacity");
    rec.param("senders", senders as u64);
    rec.param("power", num(power));
    rec.param("tol", num(tol));
    rec.param("units", unit);
    rec.result("phi", num(point.phi));
    rec.result("sum_capacity", num(point.sum_capacity * scale));
    rec.result("no_feedback_capacity", num(no_feedback * scale));
    rec.result("full_cooperation_capacity", num(full_cooperation * scale));
    rec.result("low_gap", num((point.sum_capacity - no_feedback) * scale));
    rec.result("high_gap", num((point.sum_capacity - full_cooperation) * scale));
    rec.result("threshold_power", num(threshold));
    rec.emit(out.json);
    Ok(())
}

pub fn sweep(
    senders: usize,
    power_min: f64,
    power_max: f64,
    points: usize,
    log_grid: bool,
    out: OutputOpts,
) -> Result<(), CliError> {
    require_senders(senders)?;
    if points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    if !(power_min >= 0.0) || !power_min.is_finite() || !power_max.is_finite() {
        return Err(CliError::Usage("powers must be finite and nonnegative".into()));
    }
    if power_min > power_max || (points > 1 && power_min == power_max) {
        return Err(CliError::Usage(format!(
            "empty power range [{power_min}, {power_max}]"
        )));
    }
    if log_grid && power_min <= 0.0 {
        return Err(CliError::Usage("--log-grid needs a positive --power-min".into()));
    }
    let (scale, unit) = units(out);
    let grid: Vec<f64> = if points == 1 {
        vec![power_min]
    } else if log_grid {
        let (lo, hi) = (power_min.ln(), power_max.ln());
        (0..points)
            .map(|k| (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp())
            .collect()
    } else {
        (0..points)
            .map(|k| power_min + (power_max - power_min) * k as f64 / (points - 1) as f64)
            .collect()
    };

    let mut rows = Vec::with_capacity(grid.len());
    for p in grid {
        let point = linear_feedback_sum_capacity(senders, p, 1e-12)?;
        let n = senders as f64;
        let no_fb = 0.5 * (n * p).ln_1p();
        let coop = 0.5 * (n * n * p).ln_1p();
        rows.push([
            p,
            point.phi,
            point.sum_capacity * scale,
            no_fb * scale,
            coop * scale,
            (point.sum_capacity - no_fb) * scale,
            (point.sum_capacity - coop) * scale,
        ]);
    }

    if out.json {
        let mut rec = OutputRecord::new("sweep");
        rec.param("senders", senders as u64);
        rec.param("power_min", num(power_min));
        rec.param("power_max", num(power_max));
        rec.param("points", points as u64);
        rec.param("log_grid", log_grid);
        rec.param("units", unit);
        rec.result(
            "header",
            vec!["P", "phi", "C_L", "C_nofb", "C_coop", "low_gap", "high_gap"],
        );
        rec.result(
            "rows",
            serde_json::Value::Array(rows.iter().map(|r| num_list(r)).collect()),
        );
        rec.emit(true);
    } else {
        println!("P,phi,C_L,C_nofb,C_coop,low_gap,high_gap");
        for r in rows {
            // Default float formatting is the shortest round-trip form,
            // which keeps the CSV diff-stable.
            println!("{},{},{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4], r[5], r[6]);
        }
    }
    Ok(())
}

pub fn dual(
    senders: usize,
    power: f64,
    gamma: Option<f64>,
    lambda: Option<f64>,
    out: OutputOpts,
) -> Result<(), CliError> {
    require_senders(senders)?;
    if !(power > 0.0) {
        return Err(CliError::Usage("--power must be positive".into()));
    }
    for (name, v) in [("gamma", gamma), ("lambda", lambda)] {
        if let Some(v) = v {
            if !(v >= 0.0) {
                return Err(CliError::Usage(format!("--{name} must be nonnegative, got {v}")));
            }
        }
    }
    let (scale, unit) = units(out);
    let gamma_opt = gamma_star(senders, power)?;
    let lambda_opt = lambda_star(senders, power)?;
    let used_gamma = gamma.unwrap_or(gamma_opt);
    let used_lambda = lambda.unwrap_or(lambda_opt);
    let eval = dual_bound(used_lambda, used_gamma, senders, power, 400)?;
    let cap = linear_feedback_sum_capacity(senders, power, 1e-13)?;
    let sym = SymmetricCovariance::new(eval.x_star, eval.phi_at_x, senders)?;
    let db_gap = dependence_balance_gap(&sym.to_matrix())?;

    let mut rec = OutputRecord::new("dual");
    rec.param("senders", senders as u64);
    rec.param("power", num(power));
    rec.param("gamma", num(used_gamma));
    rec.param("lambda", num(used_lambda));
    rec.param("units", unit);
    rec.result("j_value", num(eval.j_value * scale));
    rec.result("sum_capacity", num(cap.sum_capacity * scale));
    rec.result("duality_gap", num((eval.j_value - cap.sum_capacity) * scale));
    rec.result("gamma_star", num(gamma_opt));
    rec.result("lambda_star", num(lambda_opt));
    rec.result("x_star", num(eval.x_star));
    rec.result("phi_at_x_star", num(eval.phi_at_x));
    rec.result("dependence_balance_gap", num(db_gap * scale));
    rec.emit(out.json);
    Ok(())
}

pub fn riccati(
    senders: usize,
    beta: f64,
    iterative: bool,
    tol: f64,
    max_iters: usize,
    out: OutputOpts,
) -> Result<(), CliError> {
    require_senders(senders)?;
    let circ = solve_dare_circulant(senders, beta)?;
    let diag = diagonal_power(&circ);
    let link_defect = lambda_phi_defect(&circ, senders)?;

    let mut rec = OutputRecord::new("riccati");
    rec.param("senders", senders as u64);
    rec.param("beta", num(beta));
    rec.param("iterative", iterative);
    rec.result("eigenvalues", num_list(&circ.eigenvalues));
    rec.result("diagonal_power", num_list(&diag));
    rec.result("dare_residual", num(circ.residual));
    rec.result("lambda_phi_defect", num(link_defect));
    if iterative {
        let gain = GainMatrix::symmetric(senders, beta)?;
        let from_identity =
            solve_dare_iterative(&gain, &ComplexMatrix::identity(senders), tol, max_iters)?;
        let skewed = ComplexMatrix::diagonal(
            &(0..senders)
                .map(|j| Complex64::new(1.0 + j as f64, 0.0))
                .collect::<Vec<_>>(),
        );
        let from_skewed = solve_dare_iterative(&gain, &skewed, tol, max_iters)?;
        rec.result(
            "iterative_vs_circulant",
            num(circ.k_star.max_abs_diff(&from_identity.k_star)),
        );
        rec.result(
            "iterative_init_agreement",
            num(from_identity.k_star.max_abs_diff(&from_skewed.k_star)),
        );
        rec.result("iterative_iterations", from_identity.iterations as u64);
        rec.result("iterative_residual", num(from_identity.residual));
    }
    rec.emit(out.json);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    senders: usize,
    beta: f64,
    rate: f64,
    blocklength: usize,
    trials: u64,
    seed: u64,
    power: f64,
    out: OutputOpts,
) -> Result<(), CliError> {
    require_senders(senders)?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let params = KramerParams::new(senders, beta, rate, blocklength, power)?;
    let bound = chebyshev_error_bound(&params)?;
    let k_star = diagonal_power(&solve_dare_circulant(senders, beta)?);
    let report = run_campaign(&params, trials, seed)?;
    let error_rate = report.message_errors as f64 / report.trials as f64;
    let power_feasible = k_star.iter().all(|&k| k < power);

    let mut rec = OutputRecord::new("simulate");
    rec.param("senders", senders as u64);
    rec.param("beta", num(beta));
    rec.param("requested_rate_bits_per_complex_use", num(rate));
    rec.param("blocklength", blocklength as u64);
    rec.param("trials", trials);
    rec.param("seed", seed);
    rec.param("power", num(power));
    rec.result("bits_per_axis", params.bits_per_axis() as u64);
    rec.result("actual_rate_bits_per_complex_use", num(params.actual_rate()));
    rec.result(
        "reliable_rate_limit_bits_per_complex_use",
        num(2.0 * beta.log2()),
    );
    rec.result("message_errors", report.message_errors);
    rec.result("error_rate", num(error_rate));
    rec.result(
        "wilson_99_interval",
        num_list(&[report.wilson_interval.0, report.wilson_interval.1]),
    );
    rec.result("analytic_error_bound", num(bound));
    rec.result(
        "per_sender_error_counts",
        serde_json::Value::Array(
            report
                .per_sender_error_counts
                .iter()
                .map(|&c| serde_json::Value::from(c))
                .collect(),
        ),
    );
    rec.result("empirical_powers", num_list(&report.empirical_powers));
    rec.result("steady_state_powers", num_list(&k_star));
    rec.result("power_feasible", power_feasible);
    if !out.json && !power_feasible {
        eprintln!(
            "warning: steady-state power {:?} reaches the budget {power}; \
             the power constraint fails asymptotically",
            k_star
        );
    }
    rec.emit(out.json);
    Ok(())
}

fn load_covariance(path: &PathBuf) -> Result<RealMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| CliError::Input("empty covariance file".into()))?
        .parse()
        .map_err(|e| CliError::Input(format!("bad dimension line: {e}")))?;
    if n == 0 {
        return Err(CliError::Input("dimension must be positive".into()));
    }
    let mut entries = Vec::with_capacity(n * n);
    for t in tokens {
        let v: f64 = t
            .parse()
            .map_err(|e| CliError::Input(format!("bad entry {t:?}: {e}")))?;
        entries.push(v);
    }
    if entries.len() != n * n {
        return Err(CliError::Input(format!(
            "expected {} entries for a {n}x{n} matrix, found {}",
            n * n,
            entries.len()
        )));
    }
    RealMatrix::new(n, n, entries).map_err(|e| CliError::Input(e.to_string()))
}

pub fn maxcorr(
    covariance: Option<PathBuf>,
    demo_triple: bool,
    degree: u32,
    samples: usize,
    seed: u64,
    out: OutputOpts,
) -> Result<(), CliError> {
    let joint = if demo_triple {
        GaussianJoint::demo_triple()
    } else if let Some(path) = covariance {
        let cov = load_covariance(&path)?;
        if cov.rows() < 2 {
            return Err(CliError::Input("need at least coordinates V1 and V2".into()));
        }
        let y: Vec<usize> = (2..cov.rows()).collect();
        GaussianJoint::new(cov, 0, 1, y).map_err(|e| CliError::Input(e.to_string()))?
    } else {
        return Err(CliError::Usage(
            "pass either --covariance FILE or --demo-triple".into(),
        ));
    };

    let rho = conditional_correlation(&joint)?;
    let diag = maximal_correlation_diagnostics(&joint, degree, samples, seed)?;
    let linear_achieves = diag.estimate - diag.linear_estimate <= LINEAR_ATTAINMENT_TOL;

    let mut rec = OutputRecord::new("maxcorr");
    rec.param("degree", degree);
    rec.param("samples", samples as u64);
    rec.param("seed", seed);
    rec.param("y_dimension", joint.y_dim() as u64);
    rec.result("partial_correlation", num(rho));
    rec.result("partial_correlation_magnitude", num(rho.abs()));
    rec.result("best_nonlinear_estimate", num(diag.estimate));
    rec.result("linear_estimate", num(diag.linear_estimate));
    rec.result("linear_achieves", linear_achieves);
    rec.result("feature_basis_size", diag.feature_basis_size as u64);
    rec.result("orthogonality_defect", num(diag.orthogonality_defect));
    rec.result("dropped_directions", diag.dropped_directions as u64);
    rec.result(
        "method_note",
        "sampled polynomial-feature search; a numerical demonstration, not a proof",
    );
    rec.emit(out.json);
    Ok(())
}
