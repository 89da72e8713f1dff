use gmacfb_core::kramer::{
    chebyshev_error_bound, covariance_trajectory, decode, encode_step, initial_state,
    KramerParams,
};
use gmacfb_core::riccati::{diagonal_power, solve_dare_circulant};
use gmacfb_core::rng::DetRng;
use gmacfb_core::sim::{
    empirical_power_trace, run_campaign, run_campaign_with_channel, ChannelModel,
};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_identity_holds_on_random_runs(seed in 0u64..10_000) {
        // Theta - Theta_hat = A^{-n} X_{n+1} to machine precision, any
        // messages, any noise.
        let params = KramerParams::new(2, 1.2, 0.25, 24, 1.0).unwrap();
        let gain = params.gain().clone();
        let grid = params.grid();
        let k1 = params.initial_half_covariance();
        let traj = covariance_trajectory(&k1, &gain, params.blocklength()).unwrap();

        let mut rng = DetRng::from_key(seed, 0);
        let theta: Vec<Complex64> = (0..2)
            .map(|_| grid.center(rng.below_pow2(2 * grid.bits_per_axis())).unwrap())
            .collect();
        let mut state = initial_state(&theta, k1).unwrap();
        let mut ys = Vec::new();
        for _ in 0..params.blocklength() {
            let (zr, zi) = rng.standard_normal_pair();
            let y: Complex64 = state.x_prev.iter().sum::<Complex64>() + Complex64::new(zr, zi);
            ys.push(y);
            state = encode_step(&state, &gain, y).unwrap();
        }
        let estimate = decode(&ys, &gain, &traj).unwrap();
        let a = gain.diagonal();
        for j in 0..2 {
            let mut weight = Complex64::new(1.0, 0.0);
            for _ in 0..params.blocklength() {
                weight /= a[j];
            }
            let lhs = theta[j] - estimate[j];
            let rhs = weight * state.x_prev[j];
            let scale = 1.0 + lhs.norm().max(rhs.norm());
            prop_assert!((lhs - rhs).norm() < 1e-11 * scale);
        }
    }

    #[test]
    fn covariance_trajectory_is_data_independent(seed in 0u64..10_000) {
        // The K_i sequence of the recursion never looks at messages or
        // noise: states driven by different data share it bit for bit.
        let params = KramerParams::new(2, 1.15, 0.25, 8, 1.0).unwrap();
        let gain = params.gain().clone();
        let k1 = params.initial_half_covariance();
        let traj = covariance_trajectory(&k1, &gain, params.blocklength()).unwrap();

        let mut rng = DetRng::from_key(seed, 1);
        let grid = params.grid();
        let theta: Vec<Complex64> = (0..2)
            .map(|_| grid.center(rng.below_pow2(2 * grid.bits_per_axis())).unwrap())
            .collect();
        let mut state = initial_state(&theta, k1).unwrap();
        for i in 0..params.blocklength() {
            prop_assert!(state.k_current == traj[i]);
            let (zr, zi) = rng.standard_normal_pair();
            let y: Complex64 = state.x_prev.iter().sum::<Complex64>() + Complex64::new(zr, zi);
            state = encode_step(&state, &gain, y).unwrap();
        }
    }
}

#[test]
fn reports_are_bit_identical_for_identical_inputs() {
    let params = KramerParams::new(2, 1.25, 0.2, 64, 1.0).unwrap();
    let a = run_campaign(&params, 500, 99).unwrap();
    let b = run_campaign(&params, 500, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn observed_errors_stay_below_chebyshev_bound() {
    // Configuration inside the reliable region; the bound is tiny, so the
    // observed count must be zero and the Wilson lower limit consistent
    // with the bound.
    let params = KramerParams::new(2, 1.25, 0.2, 64, 1.0).unwrap();
    let bound = chebyshev_error_bound(&params).unwrap();
    assert!(bound < 1e-3, "bound {bound} too large for this check");
    let report = run_campaign(&params, 10_000, 2024).unwrap();
    let rate = report.message_errors as f64 / report.trials as f64;
    assert!(rate <= bound, "rate {rate} above bound {bound}");
    assert!(report.wilson_interval.0 <= bound);
}

#[test]
fn errors_appear_beyond_the_rate_threshold() {
    // Rates above 2 log2(beta) bits per complex use leave the error
    // probability bounded away from zero (reported, not a theorem).
    let params = KramerParams::new(2, 1.05, 1.0, 24, 1.0).unwrap();
    assert!(params.actual_rate() > 2.0 * 1.05f64.log2());
    let report = run_campaign(&params, 400, 7).unwrap();
    assert!(
        report.message_errors > 0,
        "expected errors above the threshold, saw none in {} trials",
        report.trials
    );
}

#[test]
fn cesaro_power_converges_to_steady_state_diagonal() {
    // n = 2000, 1000 trials, N = 2, beta = 1.1: the time-averaged power
    // lands within 2% of K*_jj.
    let params = KramerParams::new(2, 1.1, 0.01, 2000, 1.0).unwrap();
    let k_star = diagonal_power(&solve_dare_circulant(2, 1.1).unwrap());
    let trace = empirical_power_trace(&params, 1000, 11).unwrap();
    for j in 0..2 {
        let rel = (trace.cesaro[j] - k_star[j]).abs() / k_star[j];
        assert!(
            rel < 0.02,
            "sender {j}: cesaro {} vs K* {} ({}%)",
            trace.cesaro[j],
            k_star[j],
            100.0 * rel
        );
    }
}

#[test]
fn empirical_power_settles_under_the_budget() {
    // With K*_jj < P the running time average drops under the budget and
    // stays there; the settling index is an empirical report.
    let params = KramerParams::new(2, 1.25, 0.2, 64, 1.0).unwrap();
    let k_star = diagonal_power(&solve_dare_circulant(2, 1.25).unwrap());
    assert!(k_star.iter().all(|&k| k < 1.0));
    let trace = empirical_power_trace(&params, 2000, 17).unwrap();
    let n0 = trace.budget_settling_index(1.0).expect("trace settles");
    println!("power settles under the budget from complex use {n0}");
    for j in 0..2 {
        assert!(trace.cesaro[j] < 1.0, "sender {j}: {}", trace.cesaro[j]);
    }
    // An unreachable budget never settles.
    assert_eq!(trace.budget_settling_index(1e-6), None);
}

#[test]
fn first_step_power_is_the_grid_variance() {
    let params = KramerParams::new(2, 1.25, 0.25, 16, 1.0).unwrap();
    let expected = params.grid().per_axis_variance();
    let trace = empirical_power_trace(&params, 20_000, 4).unwrap();
    for j in 0..2 {
        // Mean |Theta_j|^2 / 2 is the per-axis variance exactly in
        // expectation; 3 sigma of the sample mean covers the rest.
        let sd = expected / (20_000f64).sqrt() * 2.0;
        assert!(
            (trace.per_time[0][j] - expected).abs() < 3.0 * sd,
            "sender {j}: {} vs {expected}",
            trace.per_time[0][j]
        );
    }
}

#[test]
fn forced_message_noiseless_trace_is_deterministic() {
    // With the channel silenced the trace is a pure function of the
    // recursion; two runs agree exactly.
    let params = KramerParams::new(2, 1.2, 0.25, 32, 1.0).unwrap();
    let a = run_campaign_with_channel(&params, 10, 5, ChannelModel::noiseless()).unwrap();
    let b = run_campaign_with_channel(&params, 10, 5, ChannelModel::noiseless()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.message_errors, 0);
}
