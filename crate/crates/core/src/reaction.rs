//! User-reaction process.
//!
//! Interested users who have not watched yet, `z`, and cumulative views, `w`, obey
//!
//! ```text
//! z' = -gamma z + x'(t)      w' = gamma z      z(0) = w(0) = 0
//! ```
//!
//! `x'` comes from the closed form, so only `(z, w)` is integrated. Steps are
//! classical RK4 while `gamma h <= 1`, otherwise an exponential step that
//! integrates `e^{-gamma (h - s)}` exactly against a quadratic interpolant of the
//! forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, ReducedParams, TimeGrid};
use crate::spread::SpreadCurve;

/// Largest `rate * h` accepted for an RK4 substep.
pub const MAX_RATE_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Stepper {
    /// RK4 when `gamma h <= 1` after forcing refinement, exponential otherwise.
    #[default]
    Auto,
    Rk4,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionOptions {
    pub stepper: Stepper,
    /// Subdivide grid cells internally. When false, a grid violating
    /// `dt <= 0.1 / max(gamma, tau)` is rejected.
    pub allow_refine: bool,
}

impl Default for ReactionOptions {
    fn default() -> Self {
        Self {
            stepper: Stepper::Auto,
            allow_refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Method {
    Rk4,
    Exponential,
}

/// Integrates `(z, w)` across arbitrary spans.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Integrator {
    curve: SpreadCurve,
    gamma: f64,
    opts: ReactionOptions,
}

impl Integrator {
    pub(crate) fn new(curve: SpreadCurve, gamma: f64, opts: ReactionOptions) -> Self {
        Self { curve, gamma, opts }
    }

    fn stiff_rate(&self) -> f64 {
        self.gamma.max(self.curve.tau())
    }

    /// Number and kind of substeps used to cross a span of length `h`.
    fn plan(&self, h: f64) -> Result<(usize, Method)> {
        let tau = self.curve.tau();
        if !self.opts.allow_refine {
            let bound = MAX_RATE_STEP / self.stiff_rate();
            if h > bound * (1.0 + 1e-12) {
                return Err(Error::GridTooCoarse { dt: h, bound });
            }
            let method = match self.opts.stepper {
                Stepper::Exponential => Method::Exponential,
                _ => Method::Rk4,
            };
            return Ok((1, method));
        }
        let cells = |rate: f64| ((h * rate / MAX_RATE_STEP).ceil() as usize).max(1);
        let forcing_cells = cells(tau);
        let method = match self.opts.stepper {
            Stepper::Rk4 => Method::Rk4,
            Stepper::Exponential => Method::Exponential,
            Stepper::Auto => {
                if self.gamma * h / forcing_cells as f64 <= 1.0 {
                    Method::Rk4
                } else {
                    Method::Exponential
                }
            }
        };
        Ok(match method {
            Method::Rk4 => (cells(self.stiff_rate()), Method::Rk4),
            Method::Exponential => (forcing_cells, Method::Exponential),
        })
    }

    /// Advances `(z, w)` from `t0` by `h`.
    pub(crate) fn advance(&self, t0: f64, z: f64, w: f64, h: f64) -> Result<(f64, f64)> {
        if h <= 0.0 {
            return Ok((z, w));
        }
        let (n, method) = self.plan(h)?;
        let hs = h / n as f64;
        let (mut z, mut w) = (z, w);
        let mut f0 = self.curve.dx(t0);
        for i in 0..n {
            let t = t0 + i as f64 * hs;
            let fm = self.curve.dx(t + 0.5 * hs);
            let f1 = self.curve.dx(t + hs);
            (z, w) = match method {
                Method::Rk4 => self.rk4(z, w, hs, f0, fm, f1),
                Method::Exponential => self.exponential(z, w, hs, f0, fm, f1),
            };
            f0 = f1;
        }
        Ok((z, w))
    }

    fn rk4(&self, z: f64, w: f64, h: f64, f0: f64, fm: f64, f1: f64) -> (f64, f64) {
        let g = self.gamma;
        let z1 = z;
        let k1 = -g * z1 + f0;
        let z2 = z + 0.5 * h * k1;
        let k2 = -g * z2 + fm;
        let z3 = z + 0.5 * h * k2;
        let k3 = -g * z3 + fm;
        let z4 = z + h * k3;
        let k4 = -g * z4 + f1;
        let dz = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let dw = h / 6.0 * g * (z1 + 2.0 * z2 + 2.0 * z3 + z4);
        (z + dz, w + dw)
    }

    fn exponential(&self, z: f64, w: f64, h: f64, f0: f64, fm: f64, f1: f64) -> (f64, f64) {
        let c = self.gamma * h;
        let [j0, j1, j2] = decay_moments(c);
        // forcing as c0 + c1 u + c2 u^2 on u = s / h
        let c1 = -3.0 * f0 + 4.0 * fm - f1;
        let c2 = 2.0 * f0 - 4.0 * fm + 2.0 * f1;
        let forced = h * (f0 * j0 + c1 * j1 + c2 * j2);
        let z_next = z * (-c).exp() + forced;
        let inflow = h / 6.0 * (f0 + 4.0 * fm + f1);
        (z_next, w + (z - z_next) + inflow)
    }
}

/// `J_k(c) = int_0^1 e^{-c (1 - u)} u^k du` for `k = 0, 1, 2`.
fn decay_moments(c: f64) -> [f64; 3] {
    if c < 0.5 {
        // J_k = sum_n (-c)^n k! / (n + k + 1)!
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let kf = [1.0, 1.0, 2.0][k];
            let mut term = kf / factorial(k + 1);
            let mut sum = 0.0;
            for n in 0..30 {
                sum += term;
                term *= -c / (n + k + 2) as f64;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *slot = sum;
        }
        out
    } else {
        let j0 = -(-c).exp_m1() / c;
        let j1 = (1.0 - j0) / c;
        let j2 = (1.0 - 2.0 * j1) / c;
        [j0, j1, j2]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Reaction process on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionTrajectory {
    pub grid: TimeGrid,
    pub t: Vec<f64>,
    /// Interested users who have not watched yet.
    pub z: Vec<f64>,
    /// Cumulative views.
    pub w: Vec<f64>,
    /// View rate `gamma z`.
    pub dw: Vec<f64>,
}

impl ReactionTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Largest `|z + w - x|` on the grid.
    pub fn mass_balance_error(&self, curve: &SpreadCurve) -> f64 {
        self.t
            .iter()
            .zip(self.z.iter().zip(&self.w))
            .map(|(&t, (z, w))| (z + w - curve.x(t)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest residual of `z' = -gamma z + x'` at cell midpoints, divided by
    /// `max(gamma * max z, max x')`.
    ///
    /// Midpoint value and slope come from fourth-order four-point stencils, so
    /// the grid must resolve `1 / gamma` and `1 / tau` for the figure to mean anything.
    /// Returns `None` on grids with fewer than four points.
    pub fn relative_residual(&self, curve: &SpreadCurve, gamma: f64) -> Option<f64> {
        let n = self.len();
        if n < 4 {
            return None;
        }
        let h = self.grid.dt;
        let zmax = self.z.iter().cloned().fold(0.0, f64::max);
        let fmax = self.t.iter().map(|&t| curve.dx(t)).fold(0.0, f64::max);
        let scale = (gamma * zmax).max(fmax);
        let z = &self.z;
        let worst = (1..n - 2)
            .map(|k| {
                let mid = 0.5 * (self.t[k] + self.t[k + 1]);
                let zm = (-z[k - 1] + 9.0 * z[k] + 9.0 * z[k + 1] - z[k + 2]) / 16.0;
                let dz = (z[k - 1] - 27.0 * z[k] + 27.0 * z[k + 1] - z[k + 2]) / (24.0 * h);
                (dz + gamma * zm - curve.dx(mid)).abs()
            })
            .fold(0.0, f64::max);
        Some(worst / scale)
    }
}

/// Solves the reaction process with default options.
pub fn solve_reaction(params: &ModelParams, grid: &TimeGrid) -> Result<ReactionTrajectory> {
    solve_reaction_with(params, grid, ReactionOptions::default())
}

pub fn solve_reaction_with(
    params: &ModelParams,
    grid: &TimeGrid,
    opts: ReactionOptions,
) -> Result<ReactionTrajectory> {
    params.validate()?;
    solve_inner(SpreadCurve::from(params), params.gamma, grid, opts)
}

/// Same as [`solve_reaction_with`] on reduced parameters.
pub fn solve_reduced(
    params: &ReducedParams,
    grid: &TimeGrid,
    opts: ReactionOptions,
) -> Result<ReactionTrajectory> {
    params.validate()?;
    solve_inner(SpreadCurve::from(params), params.gamma, grid, opts)
}

fn solve_inner(
    curve: SpreadCurve,
    gamma: f64,
    grid: &TimeGrid,
    opts: ReactionOptions,
) -> Result<ReactionTrajectory> {
    grid.validate()?;
    let integ = Integrator::new(curve, gamma, opts);
    let n = grid.n_steps;
    let mut z = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    // initial condition holds at t = 0; a later start is reached by integrating
    let (mut zc, mut wc) = integ.advance(0.0, 0.0, 0.0, grid.t_start)?;
    z.push(zc);
    w.push(wc);
    for k in 1..n {
        (zc, wc) = integ.advance(grid.time(k - 1), zc, wc, grid.dt)?;
        z.push(zc);
        w.push(wc);
    }
    Ok(ReactionTrajectory {
        grid: *grid,
        t: grid.times().collect(),
        dw: z.iter().map(|z| gamma * z).collect(),
        z,
        w,
    })
}

/// `z(t)` from its integral form `int_0^t x'(s) e^{-gamma (t - s)} ds`.
///
/// Midpoint Riemann sums with the number of cells doubled until two successive
/// sums agree to `1e-4` relative. The part of the integral older than `60 / gamma`
/// is dropped, which changes the value by less than `e^{-60} x(t)`.
pub fn z_quadrature(params: &ModelParams, t: f64) -> f64 {
    z_quadrature_curve(&SpreadCurve::from(params), params.gamma, t)
}

pub(crate) fn z_quadrature_curve(curve: &SpreadCurve, gamma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let lo = (t - 60.0 / gamma).max(0.0);
    let len = t - lo;
    let rate = gamma.max(curve.tau());
    let mut cells = ((len * rate).ceil() as usize).max(16);
    let sum = |k: usize| {
        let h = len / k as f64;
        h * (0..k)
            .map(|i| {
                let s = lo + (i as f64 + 0.5) * h;
                curve.dx(s) * (-gamma * (t - s)).exp()
            })
            .sum::<f64>()
    };
    let mut prev = sum(cells);
    const MAX_CELLS: usize = 1 << 26;
    while cells < MAX_CELLS {
        cells *= 2;
        let next = sum(cells);
        if (next - prev).abs() <= 1e-4 * next.abs() {
            return next;
        }
        prev = next;
    }
    prev
}

/// Peak times of `x'` and of the view rate `dw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub t_peak_dx: f64,
    pub t_peak_dw: f64,
    pub dw_max: f64,
    /// Spacing of the scan grid used to bracket the peak.
    pub dt: f64,
}

/// Locates the peak of `dw` on `[0, horizon]`.
///
/// The view rate is unimodal, so a dense scan brackets the maximum and a
/// golden-section search refines it within the bracketing cells.
pub fn find_peak(params: &ModelParams, horizon: f64) -> Result<PeakReport> {
    params.validate()?;
    find_peak_curve(&SpreadCurve::from(params), params.gamma, horizon)
}

pub(crate) fn find_peak_curve(curve: &SpreadCurve, gamma: f64, horizon: f64) -> Result<PeakReport> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidGrid(format!("horizon must be > 0, got {horizon}")));
    }
    let integ = Integrator::new(*curve, gamma, ReactionOptions::default());
    let rate = gamma.max(curve.tau());
    let cells = ((horizon * rate / MAX_RATE_STEP).ceil() as usize).clamp(200, 2_000_000);
    let dt = horizon / cells as f64;

    let (mut z, mut w) = (0.0, 0.0);
    let mut best = (0usize, 0.0f64);
    let mut before_best = (0.0, 0.0, 0.0);
    let mut last_dw = 0.0;
    let mut prev_dw = 0.0;
    for k in 1..=cells {
        let t0 = (k - 1) as f64 * dt;
        let state_before = (t0, z, w);
        (z, w) = integ.advance(t0, z, w, dt)?;
        let dw = gamma * z;
        if dw > best.1 {
            best = (k, dw);
            before_best = state_before;
        }
        prev_dw = last_dw;
        last_dw = dw;
    }
    if best.0 == cells || last_dw >= prev_dw {
        return Err(Error::HorizonTooShort { horizon });
    }

    // bracket [t_{k-1}, t_{k+1}]
    let (lo, zlo, wlo) = before_best;
    let tk = best.0 as f64 * dt;
    let hi = tk + dt;
    let dw_at = |s: f64| -> Result<f64> {
        let (z, _) = integ.advance(lo, zlo, wlo, s - lo)?;
        Ok(gamma * z)
    };
    let (t_peak_dw, dw_max) = golden_max(dw_at, lo, hi, 1e-9 * dt.max(1e-12))?;
    let (t_peak_dw, dw_max) = if dw_max >= best.1 {
        (t_peak_dw, dw_max)
    } else {
        (tk, best.1)
    };
    Ok(PeakReport {
        t_peak_dx: curve.peak_dx_time(),
        t_peak_dw,
        dw_max,
        dt,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Number of sign changes in the first differences of `v`, ignoring flat steps.
pub fn difference_sign_changes(v: &[f64]) -> usize {
    let mut changes = 0;
    let mut last = 0i8;
    for pair in v.windows(2) {
        let d = pair[1] - pair[0];
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            continue;
        };
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}
