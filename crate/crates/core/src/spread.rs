//! Closed-form information-spreading process.
//!
//! With `A = alpha`, `B = beta q N`, `M = q N` and `tau = A + B` the interested
//! population is
//!
//! ```text
//! x(t) = (M g(t) - A M / B) / (g(t) + 1),    g(t) = (A / B) e^{tau t}
//! ```
//!
//! Everything here is evaluated through the reciprocal `u = B e^{-tau t} = A / g`,
//! which stays bounded for all `t >= 0`:
//!
//! ```text
//! x    = A M (1 - e^{-tau t}) / (A + u)
//! x'   = tau^2 (M/B) A u / (A + u)^2
//! x''  = tau^3 (M/B) A u (u - A) / (A + u)^3
//! x''' = tau^4 (M/B) A u (A^2 - 4 A u + u^2) / (A + u)^4
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, ReducedParams, TimeGrid, SQRT3};

/// Spreading curve parameterized by `(A, B, M)` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadCurve {
    a: f64,
    b: f64,
    m: f64,
    tau: f64,
}

impl SpreadCurve {
    pub fn new(a_direct: f64, b_wom: f64, m_adopters: f64) -> Self {
        Self {
            a: a_direct,
            b: b_wom,
            m: m_adopters,
            tau: a_direct + b_wom,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    fn u(&self, t: f64) -> f64 {
        self.b * (-self.tau * t).exp()
    }

    /// `1 / g(t) = (B / A) e^{-tau t}`.
    pub fn inv_g(&self, t: f64) -> f64 {
        self.u(t) / self.a
    }

    pub fn x(&self, t: f64) -> f64 {
        let a = self.a;
        let x = a * self.m * -(-self.tau * t).exp_m1() / (a + self.u(t));
        // rounding can push the saturated value one ulp past the ceiling
        x.min(self.m)
    }

    pub fn dx(&self, t: f64) -> f64 {
        let (a, u) = (self.a, self.u(t));
        let d = a + u;
        self.tau * self.tau * (self.m / self.b) * (a * u / (d * d))
    }

    pub fn d2x(&self, t: f64) -> f64 {
        let (a, u) = (self.a, self.u(t));
        let d = a + u;
        let r = a / d * (u / d) * ((u - a) / d);
        self.tau.powi(3) * (self.m / self.b) * r
    }

    pub fn d3x(&self, t: f64) -> f64 {
        let (a, u) = (self.a, self.u(t));
        let d = a + u;
        let (an, un) = (a / d, u / d);
        let r = an * un * (an * an - 4.0 * an * un + un * un);
        self.tau.powi(4) * (self.m / self.b) * r
    }

    pub fn critical_times(&self) -> CriticalTimes {
        let ratio = self.b / self.a;
        CriticalTimes {
            t_prime: ratio.ln() / self.tau,
            t_one: ((2.0 + SQRT3) * ratio).ln() / self.tau,
            t_two: ((2.0 - SQRT3) * ratio).ln() / self.tau,
        }
    }

    pub fn regime(&self) -> Regime {
        Regime::from_rates(self.a, self.b)
    }

    /// Time at which `x'` is maximal: `0` when direct recommendation dominates, `t'` otherwise.
    pub fn peak_dx_time(&self) -> f64 {
        self.critical_times().t_prime.max(0.0)
    }
}

impl From<&ModelParams> for SpreadCurve {
    fn from(p: &ModelParams) -> Self {
        Self::new(p.alpha, p.b_wom(), p.adopters())
    }
}

impl From<&ReducedParams> for SpreadCurve {
    fn from(r: &ReducedParams) -> Self {
        Self::new(r.a_direct, r.b_wom, r.m_adopters)
    }
}

/// Zeros of `x''` and `x'''`, possibly negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalTimes {
    /// Inflection point of `x`, where `g = 1`.
    pub t_prime: f64,
    /// Where `g = 2 + sqrt(3)`.
    pub t_one: f64,
    /// Where `g = 2 - sqrt(3)`.
    pub t_two: f64,
}

/// Shape class of `x'(t)` on `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `B <= A < (2+sqrt3) B`: `x'` decreases, concave then convex.
    ConcaveDecay2Stage,
    /// `A >= (2+sqrt3) B`: `x'` decreases as a convex function.
    ConvexDecay,
    /// `A < (2-sqrt3) B`: convex rise, concave rise, concave fall, convex fall.
    SCurve4Stage,
    /// `(2-sqrt3) B <= A < B`: concave rise, concave fall, convex fall.
    SCurve3Stage,
}

/// Coarse shape of `x(t)` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `A >= B`: `x` is concave, `x'` peaks at `t = 0`.
    XConcave,
    /// `A < B`: `x` is an S-curve, `x'` peaks at `t'`.
    XSigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curvature {
    Convex,
    Concave,
}

/// Which critical time closes a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageEnd {
    TTwo,
    TPrime,
    TOne,
    Never,
}

/// One stage of `x'(t)`: its direction, its curvature and where it ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub trend: Trend,
    pub curvature: Curvature,
    pub until: StageEnd,
}

const fn stage(trend: Trend, curvature: Curvature, until: StageEnd) -> Stage {
    Stage {
        trend,
        curvature,
        until,
    }
}

impl Regime {
    /// Threshold table on `A / B`, with boundary ties resolved towards larger `A`.
    pub fn from_rates(a_direct: f64, b_wom: f64) -> Self {
        let (a, b) = (a_direct, b_wom);
        if a >= (2.0 + SQRT3) * b {
            Regime::ConvexDecay
        } else if a >= b {
            Regime::ConcaveDecay2Stage
        } else if a >= (2.0 - SQRT3) * b {
            Regime::SCurve3Stage
        } else {
            Regime::SCurve4Stage
        }
    }

    pub fn family(self) -> Family {
        match self {
            Regime::ConcaveDecay2Stage | Regime::ConvexDecay => Family::XConcave,
            Regime::SCurve4Stage | Regime::SCurve3Stage => Family::XSigmoid,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::ConcaveDecay2Stage => "ConcaveDecay2Stage",
            Regime::ConvexDecay => "ConvexDecay",
            Regime::SCurve4Stage => "SCurve4Stage",
            Regime::SCurve3Stage => "SCurve3Stage",
        }
    }

    /// Stages of `x'(t)` on `[0, inf)` in order.
    pub fn stages(self) -> &'static [Stage] {
        use Curvature::*;
        use StageEnd::*;
        use Trend::*;
        const CONVEX: [Stage; 1] = [stage(Decreasing, Convex, Never)];
        const CONCAVE2: [Stage; 2] = [
            stage(Decreasing, Concave, TOne),
            stage(Decreasing, Convex, Never),
        ];
        const S3: [Stage; 3] = [
            stage(Increasing, Concave, TPrime),
            stage(Decreasing, Concave, TOne),
            stage(Decreasing, Convex, Never),
        ];
        const S4: [Stage; 4] = [
            stage(Increasing, Convex, TTwo),
            stage(Increasing, Concave, TPrime),
            stage(Decreasing, Concave, TOne),
            stage(Decreasing, Convex, Never),
        ];
        match self {
            Regime::ConvexDecay => &CONVEX,
            Regime::ConcaveDecay2Stage => &CONCAVE2,
            Regime::SCurve3Stage => &S3,
            Regime::SCurve4Stage => &S4,
        }
    }

    /// Expected sign runs of `x''` with the critical time ending each run.
    pub fn d2x_pattern(self) -> Vec<(i8, StageEnd)> {
        merge_runs(self.stages().iter().map(|s| {
            let sign = match s.trend {
                Trend::Increasing => 1,
                Trend::Decreasing => -1,
            };
            (sign, s.until)
        }))
    }

    /// Expected sign runs of `x'''` with the critical time ending each run.
    pub fn d3x_pattern(self) -> Vec<(i8, StageEnd)> {
        merge_runs(self.stages().iter().map(|s| {
            let sign = match s.curvature {
                Curvature::Convex => 1,
                Curvature::Concave => -1,
            };
            (sign, s.until)
        }))
    }
}

fn merge_runs(it: impl Iterator<Item = (i8, StageEnd)>) -> Vec<(i8, StageEnd)> {
    let mut out: Vec<(i8, StageEnd)> = Vec::new();
    for (sign, until) in it {
        match out.last_mut() {
            Some(last) if last.0 == sign => last.1 = until,
            _ => out.push((sign, until)),
        }
    }
    out
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ConcaveDecay2Stage" => Ok(Regime::ConcaveDecay2Stage),
            "ConvexDecay" => Ok(Regime::ConvexDecay),
            "SCurve4Stage" => Ok(Regime::SCurve4Stage),
            "SCurve3Stage" => Ok(Regime::SCurve3Stage),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

fn check_t(t: f64) {
    debug_assert!(t >= 0.0, "time must be nonnegative, got {t}");
}

/// `g(t) = (alpha / (beta q N)) e^{tau t}`; errors once it is no longer representable.
pub fn eval_g(params: &ModelParams, t: f64) -> Result<f64> {
    check_t(t);
    let inv = SpreadCurve::from(params).inv_g(t);
    let g = 1.0 / inv;
    if inv == 0.0 || !g.is_finite() {
        return Err(Error::Overflow { t });
    }
    Ok(g)
}

/// `1 / g(t)`; never overflows, underflows to zero for very large `tau t`.
pub fn eval_inv_g(params: &ModelParams, t: f64) -> f64 {
    check_t(t);
    SpreadCurve::from(params).inv_g(t)
}

pub fn eval_x(params: &ModelParams, t: f64) -> f64 {
    check_t(t);
    SpreadCurve::from(params).x(t)
}

/// Users informed but not interested: `(1 - q) / q * x`.
pub fn eval_y(params: &ModelParams, t: f64) -> f64 {
    (1.0 - params.q) / params.q * eval_x(params, t)
}

/// Users not yet informed: `N - x / q`.
pub fn eval_s(params: &ModelParams, t: f64) -> f64 {
    params.n_users - eval_x(params, t) / params.q
}

pub fn eval_dx(params: &ModelParams, t: f64) -> f64 {
    check_t(t);
    SpreadCurve::from(params).dx(t)
}

pub fn eval_d2x(params: &ModelParams, t: f64) -> f64 {
    check_t(t);
    SpreadCurve::from(params).d2x(t)
}

pub fn eval_d3x(params: &ModelParams, t: f64) -> f64 {
    check_t(t);
    SpreadCurve::from(params).d3x(t)
}

pub fn critical_times(params: &ModelParams) -> CriticalTimes {
    SpreadCurve::from(params).critical_times()
}

pub fn classify(params: &ModelParams) -> Regime {
    Regime::from_rates(params.alpha, params.b_wom())
}

/// Spreading process sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub dx: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Largest `|x + y + s - N|` on the grid.
    pub fn conservation_error(&self, n_users: f64) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.s)
            .map(|((x, y), s)| (x + y + s - n_users).abs())
            .fold(0.0, f64::max)
    }
}

pub fn sample_spread(params: &ModelParams, grid: &TimeGrid) -> Trajectory {
    let curve = SpreadCurve::from(params);
    let t: Vec<f64> = grid.times().collect();
    let x: Vec<f64> = t.iter().map(|&t| curve.x(t)).collect();
    let y = x.iter().map(|x| (1.0 - params.q) / params.q * x).collect();
    let s = x.iter().map(|x| params.n_users - x / params.q).collect();
    let dx = t.iter().map(|&t| curve.dx(t)).collect();
    Trajectory {
        grid: *grid,
        t,
        x,
        y,
        s,
        dx,
    }
}

/// Run of constant sign on a grid, `[t_first, t_last]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignRun {
    pub sign: i8,
    pub t_first: f64,
    pub t_last: f64,
}

/// Sign structure of `x''` and `x'''` observed on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SignScan {
    pub d2x: Vec<SignRun>,
    pub d3x: Vec<SignRun>,
}

fn sign_runs(t: &[f64], v: impl Iterator<Item = f64>) -> Vec<SignRun> {
    let mut runs: Vec<SignRun> = Vec::new();
    for (&t, v) in t.iter().zip(v) {
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            continue;
        };
        match runs.last_mut() {
            Some(r) if r.sign == sign => r.t_last = t,
            _ => runs.push(SignRun {
                sign,
                t_first: t,
                t_last: t,
            }),
        }
    }
    runs
}

/// Scans the signs of `x''` and `x'''` on every grid point. Exact zeros are skipped.
pub fn scan_signs(params: &ModelParams, grid: &TimeGrid) -> SignScan {
    let curve = SpreadCurve::from(params);
    let t: Vec<f64> = grid.times().collect();
    SignScan {
        d2x: sign_runs(&t, t.iter().map(|&t| curve.d2x(t))),
        d3x: sign_runs(&t, t.iter().map(|&t| curve.d3x(t))),
    }
}

impl SignScan {
    /// Checks the observed runs against a regime's stage table.
    ///
    /// Every sign change must bracket the critical time that closes the
    /// corresponding stage: `t_last <= t_c <= t_first` of the next run.
    pub fn matches(&self, regime: Regime, times: &CriticalTimes) -> bool {
        fn check(runs: &[SignRun], pattern: &[(i8, StageEnd)], times: &CriticalTimes) -> bool {
            if runs.len() != pattern.len() {
                return false;
            }
            runs.iter().zip(pattern).enumerate().all(|(i, (run, &(sign, end)))| {
                if run.sign != sign {
                    return false;
                }
                let Some(next) = runs.get(i + 1) else {
                    return end == StageEnd::Never;
                };
                let tc = match end {
                    StageEnd::TTwo => times.t_two,
                    StageEnd::TPrime => times.t_prime,
                    StageEnd::TOne => times.t_one,
                    StageEnd::Never => return false,
                };
                run.t_last <= tc && tc <= next.t_first
            })
        }
        check(&self.d2x, &regime.d2x_pattern(), times)
            && check(&self.d3x, &regime.d3x_pattern(), times)
    }
}
