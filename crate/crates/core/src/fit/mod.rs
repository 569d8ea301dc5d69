//! Least-squares estimation of reduced parameters from daily view counts.
//!
//! Only `(A, B, V_total, gamma)` is identifiable: `N` and `q` enter the view
//! curve through `q N` alone, and `q N` is merged with the unknown number of
//! views per model user into `V_total`, the asymptotic total view count.
//!
//! The search runs in log space from a deterministic multistart grid, with a
//! simplex descent per start and a few restarts around the winner.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ReducedParams, TimeGrid};
use crate::reaction::{solve_reduced, ReactionOptions};
use crate::spread::Regime;
use crate::trace::ViewTrace;
use simplex::{minimize, SimplexOptions};

/// Model views per day: `w(d + 1) - w(d)` for `d = 0..days`.
pub fn daily_views(params: &ReducedParams, days: usize) -> Result<Vec<f64>> {
    let grid = TimeGrid::new(1.0, days + 1)?;
    let tr = solve_reduced(params, &grid, ReactionOptions::default())?;
    Ok(tr.w.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Sum of squared residuals between model and observed daily views.
pub fn objective(trace: &ViewTrace, params: &ReducedParams) -> Result<f64> {
    let model = daily_views(params, trace.len())?;
    Ok(model
        .iter()
        .zip(&trace.counts)
        .map(|(m, c)| (m - c).powi(2))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub a_starts: Vec<f64>,
    pub b_starts: Vec<f64>,
    pub gamma_starts: Vec<f64>,
    /// Starting `V_total` values as multiples of the observed total.
    pub v_starts: Vec<f64>,
    pub a_bounds: (f64, f64),
    pub b_bounds: (f64, f64),
    pub gamma_bounds: (f64, f64),
    /// Bounds on `V_total` as multiples of the observed total.
    pub v_bounds: (f64, f64),
    pub max_evals_per_start: usize,
    /// Simplex diameter in log space at which a descent stops.
    pub xtol: f64,
    /// Extra descents restarted from the best point.
    pub polish_rounds: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        let decades = |lo: f64, hi: f64| vec![lo, 0.5 * (lo + hi), hi];
        let pow = |v: Vec<f64>| v.into_iter().map(|e| 10f64.powf(e)).collect::<Vec<_>>();
        Self {
            a_starts: pow(decades(-5.0, 0.0)),
            b_starts: pow(decades(-5.0, 0.0)),
            gamma_starts: pow(decades(-3.0, 2.0)),
            v_starts: vec![1.0, 10.0, 100.0],
            a_bounds: (1e-7, 10.0),
            b_bounds: (1e-7, 10.0),
            gamma_bounds: (1e-4, 1e3),
            v_bounds: (0.1, 1e4),
            max_evals_per_start: 2000,
            xtol: 1e-4,
            polish_rounds: 3,
        }
    }
}

impl FitOptions {
    pub fn n_starts(&self) -> usize {
        self.a_starts.len() * self.b_starts.len() * self.gamma_starts.len() * self.v_starts.len()
    }

    /// Start `index` in log space, `v` last index varying fastest.
    fn start(&self, index: usize, total: f64) -> Vec<f64> {
        let nv = self.v_starts.len();
        let ng = self.gamma_starts.len();
        let nb = self.b_starts.len();
        let iv = index % nv;
        let ig = (index / nv) % ng;
        let ib = (index / (nv * ng)) % nb;
        let ia = index / (nv * ng * nb);
        vec![
            self.a_starts[ia].ln(),
            self.b_starts[ib].ln(),
            (self.v_starts[iv] * total).ln(),
            self.gamma_starts[ig].ln(),
        ]
    }
}

const NAMES: [&str; 4] = ["a_direct", "b_wom", "v_total", "gamma"];

/// Estimated parameters of one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub video_id: String,
    pub a_direct: f64,
    pub b_wom: f64,
    /// Asymptotic total view count, `q N` times views per model user.
    pub v_total: f64,
    pub gamma: f64,
    /// Views per model user; fixed at 1 so that `m_adopters == v_total`.
    pub scale: f64,
    pub sse: f64,
    pub n_evals: usize,
    pub converged: bool,
    pub start_index: usize,
    /// Parameters that ended on a search bound.
    pub at_bound: Vec<String>,
}

impl FitResult {
    pub fn reduced(&self) -> ReducedParams {
        ReducedParams {
            a_direct: self.a_direct,
            b_wom: self.b_wom,
            m_adopters: self.v_total / self.scale,
            gamma: self.gamma,
        }
    }
}

fn to_params(theta: &[f64]) -> ReducedParams {
    ReducedParams {
        a_direct: theta[0].exp(),
        b_wom: theta[1].exp(),
        m_adopters: theta[2].exp(),
        gamma: theta[3].exp(),
    }
}

/// Fits `(A, B, V_total, gamma)` to a trace.
pub fn fit(trace: &ViewTrace, options: &FitOptions) -> Result<FitResult> {
    trace.validate()?;
    if trace.len() < 3 {
        return Err(Error::TraceTooShort {
            video_id: trace.video_id.clone(),
            len: trace.len(),
            min: 3,
        });
    }
    let total = trace.total();
    if total <= 0.0 {
        return Err(Error::DegenerateTrace(trace.video_id.clone()));
    }
    if options.n_starts() == 0 {
        return Err(Error::EmptyInput("multistart grid"));
    }

    let lower = vec![
        options.a_bounds.0.ln(),
        options.b_bounds.0.ln(),
        (options.v_bounds.0 * total).ln(),
        options.gamma_bounds.0.ln(),
    ];
    let upper = vec![
        options.a_bounds.1.ln(),
        options.b_bounds.1.ln(),
        (options.v_bounds.1 * total).ln(),
        options.gamma_bounds.1.ln(),
    ];
    let simplex = |step: f64| SimplexOptions {
        step,
        xtol: options.xtol,
        max_evals: options.max_evals_per_start,
        lower: lower.clone(),
        upper: upper.clone(),
    };
    let f = |theta: &[f64]| objective(trace, &to_params(theta)).unwrap_or(f64::INFINITY);

    let mut n_evals = 0;
    let mut best: Option<(usize, simplex::Minimum)> = None;
    for index in 0..options.n_starts() {
        let m = minimize(f, &options.start(index, total), &simplex(1.0));
        n_evals += m.evals;
        // strict comparison keeps the lowest index on ties
        if best.as_ref().is_none_or(|(_, b)| m.fx < b.fx) {
            best = Some((index, m));
        }
    }
    let (start_index, mut best) = best.expect("at least one start");

    for _ in 0..options.polish_rounds {
        let m = minimize(f, &best.x, &simplex(0.05));
        n_evals += m.evals;
        let improved = m.fx < best.fx;
        let small_gain = best.fx - m.fx <= 1e-12 * best.fx.abs();
        if improved {
            best = m;
        } else {
            best.converged = best.converged || m.converged;
        }
        if !improved || small_gain {
            break;
        }
    }

    let params = to_params(&best.x);
    let at_bound = best
        .x
        .iter()
        .zip(lower.iter().zip(&upper))
        .zip(NAMES)
        .filter(|((v, (lo, hi)), _)| (*v - *lo).abs() < 1e-6 || (*hi - *v).abs() < 1e-6)
        .map(|(_, name)| name.to_string())
        .collect();
    Ok(FitResult {
        video_id: trace.video_id.clone(),
        a_direct: params.a_direct,
        b_wom: params.b_wom,
        v_total: params.m_adopters,
        gamma: params.gamma,
        scale: 1.0,
        sse: objective(trace, &params)?,
        n_evals,
        converged: best.converged,
        start_index,
        at_bound,
    })
}

/// Regime of the fitted `(A, B)`. Meaningful for converged fits.
pub fn classify_trace(result: &FitResult) -> Regime {
    Regime::from_rates(result.a_direct, result.b_wom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spread::Family;

    fn synthetic(a: f64, b: f64, m: f64, gamma: f64, days: usize) -> ViewTrace {
        let p = ReducedParams::new(a, b, m, gamma).unwrap();
        ViewTrace::new("synthetic", daily_views(&p, days).unwrap())
    }

    #[test]
    fn daily_views_sum_to_w() {
        let p = ReducedParams::new(0.01, 0.05, 1e4, 0.3).unwrap();
        let views = daily_views(&p, 30).unwrap();
        let tr = solve_reduced(&p, &TimeGrid::new(1.0, 31).unwrap(), ReactionOptions::default())
            .unwrap();
        let total: f64 = views.iter().sum();
        assert!((total - tr.w[30]).abs() < 1e-9 * tr.w[30]);
    }

    #[test]
    fn start_grid_layout() {
        let o = FitOptions::default();
        assert_eq!(o.n_starts(), 81);
        let s0 = o.start(0, 100.0);
        assert!((s0[0] - 1e-5f64.ln()).abs() < 1e-12);
        assert!((s0[2] - 100f64.ln()).abs() < 1e-12);
        let s1 = o.start(1, 100.0);
        assert!((s1[2] - 1000f64.ln()).abs() < 1e-12);
        let last = o.start(80, 100.0);
        assert!((last[0] - 0.0).abs() < 1e-12 && (last[3] - 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_traces() {
        let o = FitOptions::default();
        assert!(matches!(
            fit(&ViewTrace::new("z", vec![0.0; 10]), &o),
            Err(Error::DegenerateTrace(_))
        ));
        assert!(matches!(
            fit(&ViewTrace::new("s", vec![1.0, 2.0]), &o),
            Err(Error::TraceTooShort { .. })
        ));
    }

    #[test]
    fn recovers_concave_trace() {
        let trace = synthetic(0.2, 0.05, 2e4, 0.5, 40);
        let r = fit(&trace, &FitOptions::default()).unwrap();
        assert_eq!(classify_trace(&r).family(), Family::XConcave);
        assert!((r.a_direct / 0.2 - 1.0).abs() < 0.1, "{r:?}");
        assert!((r.v_total / 2e4 - 1.0).abs() < 0.05, "{r:?}");
        let again = objective(&trace, &r.reduced()).unwrap();
        assert!((again - r.sse).abs() <= 1e-9 * r.sse.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn classify_boundary_delegates() {
        let r = FitResult {
            video_id: String::new(),
            a_direct: 0.05,
            b_wom: 0.05,
            v_total: 1.0,
            gamma: 1.0,
            scale: 1.0,
            sse: 0.0,
            n_evals: 0,
            converged: true,
            start_index: 0,
            at_bound: vec![],
        };
        assert_eq!(classify_trace(&r), Regime::ConcaveDecay2Stage);
    }
}
