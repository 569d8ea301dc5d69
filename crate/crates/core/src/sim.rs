//! Discrete-time stochastic simulation of the population process.
//!
//! Each slot of length `dt`:
//!
//! 1. every uninformed user is informed with probability `1 - e^{-(alpha + beta x) dt}`;
//!    the newly informed join the interested set with probability `q`
//! 2. every interested user who has not watched yet watches with probability
//!    `1 - e^{-gamma dt}`
//!
//! Both draws use the state at the start of the slot, so users informed in slot
//! `k` first get the chance to watch in slot `k + 1`. Users are exchangeable and
//! each transition is drawn as a single binomial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Generator used for every run, recorded in output metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = run index; rand_distr 0.5 Binomial";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// `n_users` must be a whole number.
    pub params: ModelParams,
    pub dt_slot: f64,
    pub n_slots: usize,
    pub seed: u64,
    pub n_runs: usize,
    /// Use `rate * dt` as the slot probability instead of `1 - e^{-rate dt}`.
    #[serde(default)]
    pub linearized: bool,
}

impl SimConfig {
    pub fn new(params: ModelParams, dt_slot: f64, n_slots: usize, seed: u64, n_runs: usize) -> Self {
        Self {
            params,
            dt_slot,
            n_slots,
            seed,
            n_runs,
            linearized: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let n = self.params.n_users;
        if n.fract() != 0.0 || n > u64::MAX as f64 {
            return Err(Error::InvalidParameter {
                name: "n_users",
                reason: format!("must be a whole number of users, got {n}"),
            });
        }
        if !(self.dt_slot.is_finite() && self.dt_slot > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt_slot",
                reason: format!("must be > 0, got {}", self.dt_slot),
            });
        }
        if self.n_slots == 0 {
            return Err(Error::InvalidParameter {
                name: "n_slots",
                reason: "must be >= 1".into(),
            });
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidParameter {
                name: "n_runs",
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    fn probability(&self, name: &'static str, rate: f64) -> Result<f64> {
        let h = rate * self.dt_slot;
        if self.linearized {
            if h > 1.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("linearized slot probability {h} exceeds 1"),
                });
            }
            Ok(h)
        } else {
            Ok(-(-h).exp_m1())
        }
    }
}

/// Counts at the start of every slot; index `k` is time `k * dt_slot`.
///
/// `dw[k]` is the number of views during the slot ending at `k` (`dw[0] = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTrace {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub s: Vec<u64>,
    pub z: Vec<u64>,
    pub w: Vec<u64>,
    pub dw: Vec<u64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("probability checked to lie in (0, 1)")
        .sample(rng)
}

/// Generator of run `run_index`, independent of how runs are scheduled.
pub fn run_rng(seed: u64, run_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index as u64);
    rng
}

/// One run of the simulator.
pub fn simulate_run(config: &SimConfig, run_index: usize) -> Result<SimTrace> {
    config.validate()?;
    let p = &config.params;
    let n = p.n_users as u64;
    let p_view = config.probability("gamma", p.gamma)?;
    let mut rng = run_rng(config.seed, run_index);

    let len = config.n_slots + 1;
    let mut tr = SimTrace {
        x: Vec::with_capacity(len),
        y: Vec::with_capacity(len),
        s: Vec::with_capacity(len),
        z: Vec::with_capacity(len),
        w: Vec::with_capacity(len),
        dw: Vec::with_capacity(len),
    };
    let (mut x, mut y, mut s, mut z, mut w) = (0u64, 0u64, n, 0u64, 0u64);
    let push = |tr: &mut SimTrace, x, y, s, z, w, dw| {
        tr.x.push(x);
        tr.y.push(y);
        tr.s.push(s);
        tr.z.push(z);
        tr.w.push(w);
        tr.dw.push(dw);
    };
    push(&mut tr, x, y, s, z, w, 0);
    for _ in 0..config.n_slots {
        let p_inform = config.probability("alpha", p.alpha + p.beta * x as f64)?;
        let informed = binomial(&mut rng, s, p_inform);
        let interested = binomial(&mut rng, informed, p.q);
        let views = binomial(&mut rng, z, p_view);
        s -= informed;
        x += interested;
        y += informed - interested;
        z = z - views + interested;
        w += views;
        push(&mut tr, x, y, s, z, w, views);
    }
    Ok(tr)
}

/// All `n_runs` runs, serially.
pub fn simulate(config: &SimConfig) -> Result<Vec<SimTrace>> {
    config.validate()?;
    (0..config.n_runs).map(|i| simulate_run(config, i)).collect()
}

/// All `n_runs` runs on the rayon pool; identical output to [`simulate`].
pub fn simulate_parallel(config: &SimConfig) -> Result<Vec<SimTrace>> {
    config.validate()?;
    (0..config.n_runs)
        .into_par_iter()
        .map(|i| simulate_run(config, i))
        .collect()
}

/// Per-slot series for each tracked count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Columns {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
}

/// Elementwise mean and sample standard deviation over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_runs: usize,
    pub mean: Columns,
    pub sd: Columns,
}

fn stats(series: &[&[u64]]) -> (Vec<f64>, Vec<f64>) {
    let runs = series.len();
    let len = series[0].len();
    let mut mean = vec![0.0; len];
    let mut sd = vec![0.0; len];
    for k in 0..len {
        let m = series.iter().map(|s| s[k] as f64).sum::<f64>() / runs as f64;
        mean[k] = m;
        if runs > 1 {
            let var = series
                .iter()
                .map(|s| (s[k] as f64 - m).powi(2))
                .sum::<f64>()
                / (runs - 1) as f64;
            sd[k] = var.sqrt();
        }
    }
    (mean, sd)
}

pub fn aggregate(traces: &[SimTrace]) -> Result<Aggregate> {
    let first = traces.first().ok_or(Error::EmptyInput("no traces to aggregate"))?;
    if let Some(bad) = traces.iter().find(|t| t.len() != first.len()) {
        return Err(Error::LengthMismatch(first.len(), bad.len()));
    }
    let column = |f: fn(&SimTrace) -> &[u64]| stats(&traces.iter().map(f).collect::<Vec<_>>());
    let (xm, xs) = column(|t| &t.x);
    let (ym, ys) = column(|t| &t.y);
    let (sm, ss) = column(|t| &t.s);
    let (zm, zs) = column(|t| &t.z);
    let (wm, ws) = column(|t| &t.w);
    let (dm, ds) = column(|t| &t.dw);
    Ok(Aggregate {
        n_runs: traces.len(),
        mean: Columns {
            x: xm,
            y: ym,
            s: sm,
            z: zm,
            w: wm,
            dw: dm,
        },
        sd: Columns {
            x: xs,
            y: ys,
            s: ss,
            z: zs,
            w: ws,
            dw: ds,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: f64, alpha: f64, q: f64, gamma: f64) -> SimConfig {
        let beta = 0.1 / n;
        SimConfig::new(ModelParams::new(n, alpha, beta, q, gamma).unwrap(), 1.0, 300, 7, 4)
    }

    #[test]
    fn conservation_every_slot() {
        let cfg = config(1e4, 0.001, 0.4, 0.2);
        for tr in simulate(&cfg).unwrap() {
            for k in 0..tr.len() {
                assert_eq!(tr.x[k] + tr.y[k] + tr.s[k], 10_000);
                assert_eq!(tr.z[k] + tr.w[k], tr.x[k]);
                if k > 0 {
                    assert!(tr.x[k] >= tr.x[k - 1]);
                    assert!(tr.y[k] >= tr.y[k - 1]);
                    assert!(tr.w[k] >= tr.w[k - 1]);
                    assert!(tr.s[k] <= tr.s[k - 1]);
                    assert_eq!(tr.w[k] - tr.w[k - 1], tr.dw[k]);
                }
            }
        }
    }

    #[test]
    fn saturation() {
        let p = ModelParams::new(1000.0, 1e3, 1e-3, 1.0, 1e3).unwrap();
        let tr = simulate_run(&SimConfig::new(p, 1.0, 5, 1, 1), 0).unwrap();
        assert_eq!(tr.x[1], 1000);
        assert_eq!(tr.w[2], 1000);
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let cfg = config(1e4, 0.001, 0.4, 0.2);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        let c = simulate_parallel(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn linearized_overflow() {
        let p = ModelParams::new(1000.0, 2.0, 1e-3, 1.0, 0.5).unwrap();
        let mut cfg = SimConfig::new(p, 1.0, 5, 1, 1);
        assert!(simulate_run(&cfg, 0).is_ok());
        cfg.linearized = true;
        assert!(matches!(
            simulate_run(&cfg, 0),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
    }

    #[test]
    fn rejects_fractional_population() {
        let p = ModelParams::new(1000.5, 0.1, 1e-3, 1.0, 0.5).unwrap();
        assert!(simulate_run(&SimConfig::new(p, 1.0, 5, 1, 1), 0).is_err());
    }

    fn trace_of(v: Vec<u64>) -> SimTrace {
        SimTrace {
            x: v.clone(),
            y: v.clone(),
            s: v.clone(),
            z: v.clone(),
            w: v.clone(),
            dw: v,
        }
    }

    #[test]
    fn aggregate_basics() {
        let one = trace_of(vec![1, 5, 9]);
        let agg = aggregate(std::slice::from_ref(&one)).unwrap();
        assert_eq!(agg.mean.x, vec![1.0, 5.0, 9.0]);
        assert_eq!(agg.sd.x, vec![0.0; 3]);
        let agg = aggregate(&[trace_of(vec![0]), trace_of(vec![2])]).unwrap();
        assert_eq!(agg.mean.w, vec![1.0]);
        assert!((agg.sd.w[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(aggregate(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            aggregate(&[trace_of(vec![0]), trace_of(vec![0, 1])]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }
}
