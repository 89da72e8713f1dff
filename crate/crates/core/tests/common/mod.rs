//! Shared helpers and independent oracles for the integration suites.
//!
//! The bisection oracle below works on the raw power form of the
//! fixed-point identity (no log transform), deliberately on a different
//! numerical route than the library solver.
#![allow(dead_code)]

use gmacfb_core::linalg::RealMatrix;
use gmacfb_core::rng::DetRng;

/// Independent root finder for the cooperation factor: bisect the sign of
/// (1 + N P phi)^(N-1) - (1 + P phi (N - phi))^N on [1, N] down to a
/// 1e-12 bracket. Safe in raw powers for P up to ~1e6 at N <= 8.
pub fn bisect_phi_oracle(n_senders: usize, power: f64) -> f64 {
    let n = n_senders as f64;
    let sign = |phi: f64| -> f64 {
        (1.0 + n * power * phi).powi(n_senders as i32 - 1)
            - (1.0 + power * phi * (n - phi)).powi(n_senders as i32)
    };
    let mut lo = 1.0;
    let mut hi = n;
    assert!(sign(lo) <= 0.0 && sign(hi) > 0.0, "oracle bracket invalid");
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if sign(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Deterministic random PSD matrix G G' with entries of G uniform in
/// [-1, 1).
pub fn random_psd(n: usize, rng: &mut DetRng) -> RealMatrix {
    let g = RealMatrix::from_fn(n, n, |_, _| 2.0 * rng.uniform() - 1.0);
    g.matmul(&g.transpose()).expect("square product")
}

/// Uniform draw in [lo, hi).
pub fn uniform_in(rng: &mut DetRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Log-uniform draw in [lo, hi).
pub fn log_uniform_in(rng: &mut DetRng, lo: f64, hi: f64) -> f64 {
    (uniform_in(rng, lo.ln(), hi.ln())).exp()
}
