//! Monte Carlo harness for the feedback code.
//!
//! Each trial draws independent uniform messages and an i.i.d. complex
//! noise stream from its own RNG stream keyed by (seed, trial index), so
//! any subset of trials is reproducible and the aggregation order cannot
//! change the result. Powers are accounted per real channel use: one
//! complex use counts as two real uses, |X|^2 / 2 per complex symbol.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kramer::{covariance_trajectory, lmmse_gain, KramerParams, MessagePointGrid};
use crate::rng::DetRng;

/// Complex AWGN channel with unit noise variance per real component
/// (E|Z|^2 = 2 per complex use). The noiseless variant exists as a test
/// hook for exercising the deterministic recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelModel {
    noise_on: bool,
}

impl ChannelModel {
    /// The real channel: unit-variance noise per real use.
    pub fn unit() -> Self {
        Self { noise_on: true }
    }

    /// Test hook: no noise at all.
    pub fn noiseless() -> Self {
        Self { noise_on: false }
    }

    pub fn has_noise(&self) -> bool {
        self.noise_on
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::unit()
    }
}

/// Aggregate outcome of a simulation campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub trials: u64,
    /// Trials in which any sender's message was decoded incorrectly.
    pub message_errors: u64,
    pub per_sender_error_counts: Vec<u64>,
    /// Time-averaged per-sender power in per-real-use units.
    pub empirical_powers: Vec<f64>,
    /// 99% Wilson score interval for the joint error probability.
    pub wilson_interval: (f64, f64),
    pub seed: u64,
    pub params_echo: KramerParams,
}

/// Per-time power profile of the code under Monte Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    /// `per_time[i][j]`: mean |X_j,i|^2 / 2 at complex time i.
    pub per_time: Vec<Vec<f64>>,
    /// Running time average per sender (the Cesaro mean at the final
    /// blocklength).
    pub cesaro: Vec<f64>,
}

impl PowerTrace {
    /// Smallest blocklength from which every sender's running time
    /// average stays at or below `budget` through the end of the trace;
    /// None if the trace never settles. There is no a-priori formula for
    /// this index, so it is reported empirically.
    pub fn budget_settling_index(&self, budget: f64) -> Option<usize> {
        let senders = self.cesaro.len();
        let mut running = vec![0.0f64; senders];
        let mut settled_at: Option<usize> = None;
        for (i, row) in self.per_time.iter().enumerate() {
            let mut all_ok = true;
            for j in 0..senders {
                running[j] += row[j];
                if running[j] / (i + 1) as f64 > budget {
                    all_ok = false;
                }
            }
            if all_ok {
                settled_at.get_or_insert(i);
            } else {
                settled_at = None;
            }
        }
        settled_at
    }
}

// 99% two-sided normal quantile for the Wilson score interval.
const WILSON_Z: f64 = 2.575_829_303_548_900_4;

fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct TrialOutcome {
    wrong: Vec<bool>,
    power_sums: Vec<f64>, // sum over time of |X_ji|^2
}

/// Data-independent pieces shared by every trial: the covariance
/// trajectory, its LMMSE gain vectors, and the decoder weights
/// A^{-(i-1)} G_i. Computing them once keeps the per-trial work linear
/// in N.
struct CodeContext {
    grid: MessagePointGrid,
    a_diag: Vec<Complex64>,
    gains: Vec<Vec<Complex64>>,
    decoder_weights: Vec<Vec<Complex64>>,
}

impl CodeContext {
    fn build(params: &KramerParams) -> Result<Self> {
        let gain = params.gain();
        let k1 = params.initial_half_covariance();
        let traj = covariance_trajectory(&k1, gain, params.blocklength())?;
        let gains: Vec<Vec<Complex64>> =
            traj.iter().map(lmmse_gain).collect::<Result<_>>()?;
        let a_diag = gain.diagonal();
        let n = a_diag.len();
        let mut a_inv_pow = vec![Complex64::new(1.0, 0.0); n];
        let mut decoder_weights = Vec::with_capacity(gains.len());
        for g in &gains {
            decoder_weights.push((0..n).map(|j| a_inv_pow[j] * g[j]).collect());
            for j in 0..n {
                a_inv_pow[j] /= a_diag[j];
            }
        }
        Ok(Self { grid: params.grid(), a_diag, gains, decoder_weights })
    }
}

fn run_trial(
    ctx: &CodeContext,
    seed: u64,
    trial: u64,
    channel: ChannelModel,
    per_time: Option<&mut [Vec<f64>]>,
) -> TrialOutcome {
    let n_senders = ctx.a_diag.len();
    let blocklength = ctx.gains.len();
    let mut rng = DetRng::from_key(seed, trial);
    // Draw order per trial: first the N message indices, then one
    // (re, im) normal pair per complex use when noise is on.
    let messages: Vec<u64> = (0..n_senders)
        .map(|_| rng.below_pow2(2 * ctx.grid.bits_per_axis()))
        .collect();
    let theta: Vec<Complex64> = messages
        .iter()
        .map(|&m| ctx.grid.center(m).expect("message drawn in range"))
        .collect();

    let mut x = theta.clone();
    let mut estimate = vec![Complex64::new(0.0, 0.0); n_senders];
    let mut power_sums = vec![0.0f64; n_senders];
    let mut per_time = per_time;
    for i in 0..blocklength {
        for (j, xj) in x.iter().enumerate() {
            let p = xj.norm_sqr();
            power_sums[j] += p;
            if let Some(acc) = per_time.as_deref_mut() {
                acc[i][j] += p;
            }
        }
        let noise = if channel.has_noise() {
            let (zr, zi) = rng.standard_normal_pair();
            Complex64::new(zr, zi)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let y: Complex64 = x.iter().sum::<Complex64>() + noise;
        // Each sender refines its own coordinate; the receiver folds the
        // same symbol into the running estimate.
        let g = &ctx.gains[i];
        let w = &ctx.decoder_weights[i];
        for j in 0..n_senders {
            estimate[j] += w[j] * y;
            x[j] = ctx.a_diag[j] * (x[j] - g[j] * y);
        }
    }

    let wrong = estimate
        .iter()
        .zip(&messages)
        .map(|(e, &m)| ctx.grid.nearest_message(*e) != m)
        .collect();
    TrialOutcome { wrong, power_sums }
}

/// Run `trials` independent transmissions over the given channel.
pub fn run_campaign_with_channel(
    params: &KramerParams,
    trials: u64,
    seed: u64,
    channel: ChannelModel,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let ctx = CodeContext::build(params)?;
    let n_senders = params.n_senders();
    let mut message_errors = 0u64;
    let mut per_sender = vec![0u64; n_senders];
    let mut power_sums = vec![0.0f64; n_senders];
    for trial in 0..trials {
        let outcome = run_trial(&ctx, seed, trial, channel, None);
        if outcome.wrong.iter().any(|&w| w) {
            message_errors += 1;
        }
        for j in 0..n_senders {
            if outcome.wrong[j] {
                per_sender[j] += 1;
            }
            power_sums[j] += outcome.power_sums[j];
        }
    }
    // |X|^2 summed over n complex uses covers 2n real uses.
    let real_uses = (2 * params.blocklength()) as f64 * trials as f64;
    let empirical_powers = power_sums.iter().map(|s| s / real_uses).collect();
    Ok(SimulationReport {
        trials,
        message_errors,
        per_sender_error_counts: per_sender,
        empirical_powers,
        wilson_interval: wilson_interval(message_errors, trials),
        seed,
        params_echo: params.clone(),
    })
}

/// Run a campaign over the unit-noise channel.
pub fn run_campaign(params: &KramerParams, trials: u64, seed: u64) -> Result<SimulationReport> {
    run_campaign_with_channel(params, trials, seed, ChannelModel::unit())
}

/// Monte Carlo per-time, per-sender mean square |X_ji|^2 / 2 together
/// with its Cesaro average, in per-real-use units.
pub fn empirical_power_trace(
    params: &KramerParams,
    trials: u64,
    seed: u64,
) -> Result<PowerTrace> {
    empirical_power_trace_with_channel(params, trials, seed, ChannelModel::unit())
}

pub fn empirical_power_trace_with_channel(
    params: &KramerParams,
    trials: u64,
    seed: u64,
    channel: ChannelModel,
) -> Result<PowerTrace> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let ctx = CodeContext::build(params)?;
    let n_senders = params.n_senders();
    let blocklength = params.blocklength();
    let mut per_time = vec![vec![0.0f64; n_senders]; blocklength];
    for trial in 0..trials {
        run_trial(&ctx, seed, trial, channel, Some(&mut per_time));
    }
    // Half of the complex mean square is the per-real-use power.
    for row in &mut per_time {
        for v in row.iter_mut() {
            *v /= 2.0 * trials as f64;
        }
    }
    let cesaro = (0..n_senders)
        .map(|j| per_time.iter().map(|row| row[j]).sum::<f64>() / blocklength as f64)
        .collect();
    Ok(PowerTrace { per_time, cesaro })
}
