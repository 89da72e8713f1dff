//! The iterative-refinement linear-feedback code over the complex AWGN
//! MAC.
//!
//! A pair of consecutive real channel uses is treated as one complex use.
//! Each sender places its message on a square grid inside the square with
//! corners +-1 +- i, transmits the message point, and from then on
//! amplifies and rotates its current estimation error:
//!
//! ```text
//! X_1 = Theta,    X_i = A (X_{i-1} - G_{i-1} Y_{i-1}),   A = diag(beta_j omega_j)
//! ```
//!
//! with G_i the scalar-output LMMSE gain vector. The receiver accumulates
//! Theta_hat = sum_i A^{-(i-1)} G_i Y_i, which leaves the exact error
//! identity Theta - Theta_hat = A^{-n} X_{n+1}, X_{n+1} being the state
//! the encoder would transmit next.
//!
//! Unit convention: every covariance here is the per-real-use half
//! covariance (the complex noise Z has i.i.d. real and imaginary parts of
//! unit variance, so E|Z|^2 = 2 while the recursion carries the "1 +"
//! normalization). Diagonals are therefore directly comparable to the
//! per-real-use power budget P.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{diagonal_riccati_step, rank_one_riccati_step, ComplexMatrix};
use crate::riccati::GainMatrix;

/// Full parameter set for one code instance.
#[derive(Debug, Clone, PartialEq)]
pub struct KramerParams {
    n_senders: usize,
    beta: f64,
    requested_rate: f64,
    blocklength: usize,
    power_budget: f64,
    bits_per_axis: u32,
    gain: GainMatrix,
}

impl KramerParams {
    /// Build a parameter set with the symmetric gain (common beta,
    /// omegas the N-th roots of unity).
    ///
    /// `rate_per_sender` is in bits per complex channel use (one complex
    /// use = two real uses). The grid needs an integer number of bits per
    /// axis, so the rate is rounded down to the nearest feasible value;
    /// [`KramerParams::actual_rate`] reports what the grid really carries.
    pub fn new(
        n_senders: usize,
        beta: f64,
        rate_per_sender: f64,
        blocklength: usize,
        power_budget: f64,
    ) -> Result<Self> {
        let gain = GainMatrix::symmetric(n_senders, beta)?;
        Self::with_gain(gain, rate_per_sender, blocklength, power_budget)
    }

    /// Advanced constructor with explicit per-sender gains.
    pub fn with_gain(
        gain: GainMatrix,
        rate_per_sender: f64,
        blocklength: usize,
        power_budget: f64,
    ) -> Result<Self> {
        let n_senders = gain.n_senders();
        if n_senders < 2 {
            return Err(Error::Parameter("need at least 2 senders".into()));
        }
        if blocklength == 0 {
            return Err(Error::Parameter("blocklength must be positive".into()));
        }
        if !(power_budget > 0.0) {
            return Err(Error::Parameter("power budget must be positive".into()));
        }
        if !(rate_per_sender > 0.0) || !rate_per_sender.is_finite() {
            return Err(Error::Parameter("rate must be positive".into()));
        }
        // Total message bits n*R split evenly over the two axes; round
        // down to the nearest feasible grid (1e-9 slack absorbs float fuzz
        // in rates specified like 12.8/64).
        let bits_total = blocklength as f64 * rate_per_sender;
        let bits_per_axis = ((bits_total / 2.0) + 1e-9).floor();
        if bits_per_axis < 1.0 {
            let nearest = 2.0 / blocklength as f64;
            return Err(Error::Parameter(format!(
                "rate {rate_per_sender} infeasible at blocklength {blocklength}: \
                 nearest feasible rate is {nearest} bits per complex use"
            )));
        }
        if bits_per_axis > 30.0 {
            return Err(Error::Parameter(format!(
                "grid of 2^{bits_per_axis} cells per axis is too fine"
            )));
        }
        let beta = gain.betas()[0];
        Ok(Self {
            n_senders,
            beta,
            requested_rate: rate_per_sender,
            blocklength,
            power_budget,
            bits_per_axis: bits_per_axis as u32,
            gain,
        })
    }

    pub fn n_senders(&self) -> usize {
        self.n_senders
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn requested_rate(&self) -> f64 {
        self.requested_rate
    }

    pub fn bits_per_axis(&self) -> u32 {
        self.bits_per_axis
    }

    /// Rate the rounded grid actually carries, bits per complex use.
    pub fn actual_rate(&self) -> f64 {
        2.0 * self.bits_per_axis as f64 / self.blocklength as f64
    }

    pub fn gain(&self) -> &GainMatrix {
        &self.gain
    }

    pub fn grid(&self) -> MessagePointGrid {
        MessagePointGrid { bits_per_axis: self.bits_per_axis }
    }

    /// Half covariance of the uniform message point: a diagonal matrix of
    /// the per-axis grid variance.
    pub fn initial_half_covariance(&self) -> ComplexMatrix {
        let var = self.grid().per_axis_variance();
        ComplexMatrix::diagonal(&vec![Complex64::new(var, 0.0); self.n_senders])
    }
}

/// Square grid of message points inside the square with corners +-1 +- i.
///
/// With b bits per axis there are 2^b centers per axis at spacing
/// Delta = 2 * 2^-b, the first at -1 + Delta/2; message index m maps to
/// column m mod 2^b on the real axis and row m div 2^b on the imaginary
/// axis, so message 0 is the bottom-left center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessagePointGrid {
    bits_per_axis: u32,
}

impl MessagePointGrid {
    pub fn new(bits_per_axis: u32) -> Result<Self> {
        if bits_per_axis == 0 || bits_per_axis > 30 {
            return Err(Error::Parameter(format!(
                "bits per axis must be in 1..=30, got {bits_per_axis}"
            )));
        }
        Ok(Self { bits_per_axis })
    }

    pub fn bits_per_axis(&self) -> u32 {
        self.bits_per_axis
    }

    pub fn per_axis(&self) -> u64 {
        1u64 << self.bits_per_axis
    }

    pub fn message_count(&self) -> u64 {
        1u64 << (2 * self.bits_per_axis)
    }

    /// Minimum distance between adjacent centers, Delta = 2 * 2^-b.
    pub fn min_distance(&self) -> f64 {
        2.0 / self.per_axis() as f64
    }

    /// Variance of one coordinate of a uniformly drawn message point.
    pub fn per_axis_variance(&self) -> f64 {
        let s = self.per_axis() as f64;
        let delta = self.min_distance();
        delta * delta * (s * s - 1.0) / 12.0
    }

    pub fn center(&self, message: u64) -> Result<Complex64> {
        if message >= self.message_count() {
            return Err(Error::Parameter(format!(
                "message {message} out of range 0..{}",
                self.message_count()
            )));
        }
        let s = self.per_axis();
        let col = message % s;
        let row = message / s;
        let axis = |idx: u64| -1.0 + (2 * idx + 1) as f64 / s as f64;
        Ok(Complex64::new(axis(col), axis(row)))
    }

    /// Message whose subsquare contains the estimate. Cells are half-open
    /// [lo, hi) on each axis with the last cell closed; estimates outside
    /// the big square clamp to the boundary cells.
    pub fn nearest_message(&self, estimate: Complex64) -> u64 {
        let s = self.per_axis();
        let cell = |coord: f64| -> u64 {
            let idx = ((coord + 1.0) / self.min_distance()).floor();
            if idx < 0.0 {
                0
            } else if idx as u64 >= s {
                s - 1
            } else {
                idx as u64
            }
        };
        cell(estimate.im) * s + cell(estimate.re)
    }
}

/// Build a grid for an exactly feasible rate: blocklength * rate must be
/// an even integer >= 2 (bits split evenly over the two axes).
pub fn build_grid(rate_per_sender: f64, blocklength: usize) -> Result<MessagePointGrid> {
    let bits_total = rate_per_sender * blocklength as f64;
    let rounded = bits_total.round();
    if (bits_total - rounded).abs() > 1e-6 || rounded < 2.0 || (rounded as u64) % 2 != 0 {
        return Err(Error::Parameter(format!(
            "rate {rate_per_sender} at blocklength {blocklength} gives {bits_total} total bits; \
             an even integer >= 2 is required"
        )));
    }
    MessagePointGrid::new((rounded as u32) / 2)
}

/// Encoder state after transmitting X_time and absorbing the feedback up
/// to Y_{time-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    /// Most recent transmitted vector X_i.
    pub x_prev: Vec<Complex64>,
    /// Half covariance K_i of X_i (deterministic, data-independent).
    pub k_current: ComplexMatrix,
    /// Transmission index i, starting at 1.
    pub time: usize,
}

/// Initial state X_1 = Theta with the message-point covariance.
pub fn initial_state(theta: &[Complex64], k1: ComplexMatrix) -> Result<EncoderState> {
    if k1.rows() != theta.len() || !k1.is_square() {
        return Err(Error::Dimension("K_1 must be square and match Theta".into()));
    }
    Ok(EncoderState { x_prev: theta.to_vec(), k_current: k1, time: 1 })
}

/// LMMSE gain vector K 1 / (1 + 1'K 1) for estimating X from the scalar
/// Y = 1'X + Z in half-covariance units.
pub fn lmmse_gain(k: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !k.is_square() {
        return Err(Error::Dimension("gain needs a square covariance".into()));
    }
    let sums = k.row_sums();
    let denom = 1.0 + sums.iter().map(|v| v.re).sum::<f64>();
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + 1'K1 = {denom} is not positive; K is not a covariance"
        )));
    }
    Ok(sums.into_iter().map(|v| v / denom).collect())
}

/// Advance the encoder one step with the observed feedback Y_{i}:
/// X_{i+1} = A (X_i - G_i Y_i), K_{i+1} = step(A, K_i).
///
/// The j-th entry of the new vector depends only on sender j's own
/// previous symbol and the shared feedback, so each sender can run its
/// own coordinate of this recursion in isolation.
pub fn encode_step(
    state: &EncoderState,
    gain: &GainMatrix,
    y_prev: Complex64,
) -> Result<EncoderState> {
    let n = state.x_prev.len();
    if gain.n_senders() != n || state.k_current.rows() != n {
        return Err(Error::Dimension("state and gain sizes differ".into()));
    }
    let g = lmmse_gain(&state.k_current)?;
    let a = gain.diagonal();
    let x_new: Vec<Complex64> = (0..n)
        .map(|j| a[j] * (state.x_prev[j] - g[j] * y_prev))
        .collect();
    let k_new = rank_one_riccati_step(&gain.matrix(), &state.k_current)?.hermitian_part();
    Ok(EncoderState { x_prev: x_new, k_current: k_new, time: state.time + 1 })
}

/// Deterministic covariance trajectory K_1, ..., K_n of the recursion.
/// Encoder and decoder replay the same list bit for bit.
pub fn covariance_trajectory(
    k1: &ComplexMatrix,
    gain: &GainMatrix,
    blocklength: usize,
) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(blocklength);
    let mut k = k1.clone();
    let a_diag = gain.diagonal();
    for _ in 0..blocklength {
        out.push(k.clone());
        k = diagonal_riccati_step(&a_diag, &k)?.hermitian_part();
    }
    Ok(out)
}

/// Decoder accumulator for Theta_hat = sum_i A^{-(i-1)} G_i Y_i.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub accumulated_estimate: Vec<Complex64>,
    /// Running A^{-(i-1)} diagonal.
    pub a_inverse_power: Vec<Complex64>,
}

impl DecoderState {
    pub fn new(n: usize) -> Self {
        Self {
            accumulated_estimate: vec![Complex64::new(0.0, 0.0); n],
            a_inverse_power: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Fold in one received symbol with its (replayed) covariance.
    pub fn absorb(&mut self, y: Complex64, k: &ComplexMatrix, gain: &GainMatrix) -> Result<()> {
        let g = lmmse_gain(k)?;
        let a = gain.diagonal();
        for j in 0..self.accumulated_estimate.len() {
            self.accumulated_estimate[j] += self.a_inverse_power[j] * g[j] * y;
            self.a_inverse_power[j] /= a[j];
        }
        Ok(())
    }
}

/// Run the full decoder over a received block. `k_trajectory` must be the
/// deterministic covariance trajectory of the same blocklength.
pub fn decode(
    y_sequence: &[Complex64],
    gain: &GainMatrix,
    k_trajectory: &[ComplexMatrix],
) -> Result<Vec<Complex64>> {
    if y_sequence.len() != k_trajectory.len() {
        return Err(Error::Parameter(format!(
            "received {} symbols but {} covariances",
            y_sequence.len(),
            k_trajectory.len()
        )));
    }
    let mut state = DecoderState::new(gain.n_senders());
    for (y, k) in y_sequence.iter().zip(k_trajectory) {
        state.absorb(*y, k, gain)?;
    }
    Ok(state.accumulated_estimate)
}

/// Union-of-events / Chebyshev bound on the joint message error
/// probability at the configured blocklength:
/// `sum_j E|D(j)|^2 (Delta/2)^{-2} = sum_j 2 K_{n+1}(j,j) beta^{-2n} 4^b`,
/// from the error identity D = A^{-n} X_{n+1}. The factor 2 converts the
/// half covariance to the complex second moment.
pub fn chebyshev_error_bound(params: &KramerParams) -> Result<f64> {
    let n = params.blocklength();
    let mut k = params.initial_half_covariance();
    let a_diag = params.gain().diagonal();
    for _ in 0..n {
        k = diagonal_riccati_step(&a_diag, &k)?.hermitian_part();
    }
    let b = params.bits_per_axis();
    let quarter_dist_sq = 4.0f64.powi(b as i32); // (Delta/2)^{-2}
    let mut bound = 0.0;
    for (j, beta) in params.gain().betas().iter().enumerate() {
        let err_moment = 2.0 * k.get(j, j).re * beta.powi(-2 * n as i32);
        bound += err_moment * quarter_dist_sq;
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_quartering() {
        let grid = MessagePointGrid::new(1).unwrap();
        assert_eq!(grid.per_axis(), 2);
        assert_eq!(grid.message_count(), 4);
        assert_eq!(grid.min_distance(), 1.0);
        assert_eq!(grid.center(0).unwrap(), cx(-0.5, -0.5));
        assert_eq!(grid.center(1).unwrap(), cx(0.5, -0.5));
        assert_eq!(grid.center(2).unwrap(), cx(-0.5, 0.5));
        assert_eq!(grid.center(3).unwrap(), cx(0.5, 0.5));
    }

    #[test]
    fn grid_sixteen_cells() {
        let grid = MessagePointGrid::new(2).unwrap();
        assert_eq!(grid.per_axis(), 4);
        assert_eq!(grid.min_distance(), 0.5);
        assert_eq!(grid.center(0).unwrap(), cx(-0.75, -0.75));
    }

    #[test]
    fn nearest_message_roundtrip_and_boundaries() {
        let grid = MessagePointGrid::new(2).unwrap();
        for m in 0..grid.message_count() {
            assert_eq!(grid.nearest_message(grid.center(m).unwrap()), m);
        }
        // Boundary point belongs to the upper half-open cell.
        assert_eq!(grid.nearest_message(cx(-0.5, -0.75)), 1);
        // Far outside clamps to the corner cell.
        assert_eq!(grid.nearest_message(cx(5.0, 5.0)), 15);
        assert_eq!(grid.nearest_message(cx(-5.0, -5.0)), 0);
        // The upper edge (+1) is closed.
        assert_eq!(grid.nearest_message(cx(1.0, 1.0)), 15);
    }

    #[test]
    fn build_grid_validates_parity() {
        assert!(build_grid(0.5, 4).is_ok()); // 2 bits total
        assert!(matches!(build_grid(0.75, 4), Err(Error::Parameter(_)))); // 3 bits
        assert!(matches!(build_grid(0.1, 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn params_round_rate_down() {
        let p = KramerParams::new(2, 1.25, 0.2, 64, 1.0).unwrap();
        // 64 * 0.2 = 12.8 total bits -> 6 per axis -> actual rate 0.1875.
        assert_eq!(p.bits_per_axis(), 6);
        assert!((p.actual_rate() - 0.1875).abs() < 1e-15);
        assert!(matches!(
            KramerParams::new(2, 1.25, 0.01, 64, 1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn lmmse_gain_values() {
        let zero = ComplexMatrix::zeros(2, 2);
        assert!(lmmse_gain(&zero).unwrap().iter().all(|v| v.norm() == 0.0));
        let scalar = ComplexMatrix::diagonal(&[cx(3.0, 0.0)]);
        assert!((lmmse_gain(&scalar).unwrap()[0] - cx(0.75, 0.0)).norm() < 1e-15);
        let eye = ComplexMatrix::identity(2);
        let g = lmmse_gain(&eye).unwrap();
        assert!((g[0] - cx(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((g[1] - cx(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn encode_step_scalar_case() {
        // N=1 arithmetic: beta = 2, x = 1, K = [1], y = 1 gives
        // x_new = 2 (1 - 0.5) = 1.
        let gain = GainMatrix::new(vec![2.0], vec![cx(1.0, 0.0)]).unwrap();
        let state = initial_state(&[cx(1.0, 0.0)], ComplexMatrix::identity(1)).unwrap();
        let next = encode_step(&state, &gain, cx(1.0, 0.0)).unwrap();
        assert!((next.x_prev[0] - cx(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(next.time, 2);
    }

    #[test]
    fn encode_step_zero_covariance_passes_through() {
        let gain = GainMatrix::symmetric(2, 1.5).unwrap();
        let state =
            initial_state(&[cx(0.3, 0.1), cx(-0.2, 0.4)], ComplexMatrix::zeros(2, 2)).unwrap();
        let next = encode_step(&state, &gain, cx(0.9, -0.3)).unwrap();
        let a = gain.diagonal();
        for j in 0..2 {
            assert!((next.x_prev[j] - a[j] * state.x_prev[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn encode_step_matches_dense_oracle() {
        // One full step against an independent dense expansion:
        // x_new[j] = A_jj (x[j] - (K1)_j / (1 + 1'K1) y).
        let gain = GainMatrix::symmetric(2, 1.1).unwrap();
        let k1 = ComplexMatrix::new(
            2,
            2,
            vec![cx(0.4, 0.0), cx(0.1, 0.05), cx(0.1, -0.05), cx(0.5, 0.0)],
        )
        .unwrap();
        let theta = [cx(0.25, -0.75), cx(-0.25, 0.25)];
        let y = cx(0.4, 0.2);
        let state = initial_state(&theta, k1.clone()).unwrap();
        let next = encode_step(&state, &gain, y).unwrap();

        let rows = k1.row_sums();
        let denom = 1.0 + (rows[0] + rows[1]).re;
        let a = gain.diagonal();
        for j in 0..2 {
            let expected = a[j] * (theta[j] - rows[j] / denom * y);
            assert!((next.x_prev[j] - expected).norm() < 1e-14, "entry {j}");
        }
        // Covariance advanced exactly one Riccati step.
        let expected_k = rank_one_riccati_step(&gain.matrix(), &k1).unwrap().hermitian_part();
        assert!(next.k_current.max_abs_diff(&expected_k) < 1e-15);
    }

    #[test]
    fn decode_single_step_is_lmmse() {
        let gain = GainMatrix::symmetric(2, 1.2).unwrap();
        let k = ComplexMatrix::identity(2);
        let y = cx(0.7, -0.1);
        let out = decode(&[y], &gain, std::slice::from_ref(&k)).unwrap();
        let g = lmmse_gain(&k).unwrap();
        for j in 0..2 {
            assert!((out[j] - g[j] * y).norm() < 1e-15);
        }
    }

    #[test]
    fn decode_length_mismatch() {
        let gain = GainMatrix::symmetric(2, 1.2).unwrap();
        let res = decode(&[cx(0.0, 0.0)], &gain, &[]);
        assert!(matches!(res, Err(Error::Parameter(_))));
    }

    #[test]
    fn error_identity_is_exact() {
        // Theta - decode(...) equals A^{-n} X_{n+1} computed from the
        // encoder state, with the same arithmetic on both sides.
        let params = KramerParams::new(3, 1.15, 0.25, 16, 1.0).unwrap();
        let gain = params.gain().clone();
        let k1 = params.initial_half_covariance();
        let traj = covariance_trajectory(&k1, &gain, params.blocklength()).unwrap();

        let grid = params.grid();
        let theta: Vec<Complex64> = vec![
            grid.center(3).unwrap(),
            grid.center(7).unwrap(),
            grid.center(12).unwrap(),
        ];
        let mut state = initial_state(&theta, k1).unwrap();
        let mut rng = crate::rng::DetRng::from_key(99, 0);
        let mut ys = Vec::new();
        for _ in 0..params.blocklength() {
            let (zr, zi) = rng.standard_normal_pair();
            let y: Complex64 =
                state.x_prev.iter().sum::<Complex64>() + cx(zr, zi);
            ys.push(y);
            state = encode_step(&state, &gain, y).unwrap();
        }
        let estimate = decode(&ys, &gain, &traj).unwrap();

        let inv = gain.inverse_matrix();
        let mut a_inv_n = [cx(1.0, 0.0); 3];
        for _ in 0..params.blocklength() {
            for j in 0..3 {
                a_inv_n[j] *= inv.get(j, j);
            }
        }
        for j in 0..3 {
            let d = theta[j] - estimate[j];
            let expected = a_inv_n[j] * state.x_prev[j];
            assert!((d - expected).norm() < 1e-12, "sender {j}: {d} vs {expected}");
        }
    }

    #[test]
    fn noiseless_error_shrinks_geometrically() {
        let params = KramerParams::new(2, 1.3, 0.25, 40, 1.0).unwrap();
        let gain = params.gain().clone();
        let k1 = params.initial_half_covariance();
        let grid = params.grid();
        let theta = vec![grid.center(1).unwrap(), grid.center(2).unwrap()];

        let mut errors = Vec::new();
        for n in [10usize, 20, 40] {
            let traj = covariance_trajectory(&k1, &gain, n).unwrap();
            let mut state = initial_state(&theta, k1.clone()).unwrap();
            let mut ys = Vec::new();
            for _ in 0..n {
                let y: Complex64 = state.x_prev.iter().sum();
                ys.push(y);
                state = encode_step(&state, &gain, y).unwrap();
            }
            let est = decode(&ys, &gain, &traj).unwrap();
            let err: f64 = theta
                .iter()
                .zip(&est)
                .map(|(t, e)| (t - e).norm_sqr())
                .sum::<f64>()
                .sqrt();
            errors.push(err);
        }
        // Rate beta^-n: doubling n squares the error scale.
        assert!(errors[1] < errors[0] * 1e-1);
        assert!(errors[2] < errors[1] * 1e-2);
        assert!(errors[2] < 1e-4);
    }

    #[test]
    fn distributed_encoders_match_vector_recursion() {
        // Each sender, running only its own coordinate from
        // (theta_j, y-history), reproduces the joint recursion exactly.
        let params = KramerParams::new(3, 1.2, 0.5, 12, 1.0).unwrap();
        let gain = params.gain().clone();
        let k1 = params.initial_half_covariance();
        let traj = covariance_trajectory(&k1, &gain, params.blocklength()).unwrap();
        let grid = params.grid();
        let theta = vec![
            grid.center(5).unwrap(),
            grid.center(9).unwrap(),
            grid.center(2).unwrap(),
        ];

        let mut state = initial_state(&theta, k1).unwrap();
        let a = gain.diagonal();
        let mut rng = crate::rng::DetRng::from_key(3, 1);
        let mut per_sender: Vec<Complex64> = theta.clone();
        for i in 0..params.blocklength() {
            let (zr, zi) = rng.standard_normal_pair();
            let y: Complex64 = state.x_prev.iter().sum::<Complex64>() + cx(zr, zi);
            // Joint update.
            state = encode_step(&state, &gain, y).unwrap();
            // Per-sender scalar updates from shared feedback only.
            let g = lmmse_gain(&traj[i]).unwrap();
            for j in 0..3 {
                per_sender[j] = a[j] * (per_sender[j] - g[j] * y);
                assert!(
                    (per_sender[j] - state.x_prev[j]).norm() == 0.0,
                    "sender {j} diverged at step {i}"
                );
            }
        }
    }

    #[test]
    fn error_bound_is_finite_and_small_inside_the_rate_region() {
        let params = KramerParams::new(2, 1.25, 0.2, 64, 1.0).unwrap();
        let bound = chebyshev_error_bound(&params).unwrap();
        assert!(bound > 0.0 && bound < 1e-6, "bound = {bound}");
    }
}
