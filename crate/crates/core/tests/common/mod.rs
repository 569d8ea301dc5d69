#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vidpop::ModelParams;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random valid parameters: log-uniform population, rates and reaction, uniform q.
pub fn random_params(rng: &mut StdRng) -> ModelParams {
    let n = log_uniform(rng, 1e3, 1e8).round();
    let q = rng.random_range(0.01..=1.0);
    let alpha = log_uniform(rng, 1e-4, 1.0);
    let b = log_uniform(rng, 1e-3, 1.0);
    let gamma = log_uniform(rng, 1e-2, 10.0);
    ModelParams::new(n, alpha, b / (q * n), q, gamma).unwrap()
}

/// Largest pointwise gap between two curves, each scaled by its own maximum.
pub fn normalized_gap(a: &[f64], b: &[f64]) -> f64 {
    let ma = a.iter().cloned().fold(0.0, f64::max);
    let mb = b.iter().cloned().fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / ma - y / mb).abs())
        .fold(0.0, f64::max)
}

pub fn figure_params(alpha: f64, gamma: f64) -> ModelParams {
    ModelParams::new(1e6, alpha, 1e-7, 0.05, gamma).unwrap()
}

pub const FIGURE_ALPHAS: [f64; 4] = [0.00005, 0.0014, 0.0055, 0.0188];
