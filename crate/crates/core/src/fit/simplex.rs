//! Box-constrained Nelder–Mead simplex search.

use std::cell::Cell;

/// Outcome of one simplex descent.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    /// Simplex diameter fell below the tolerance before the budget ran out.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub step: f64,
    /// Stop once every vertex is within this distance of the best one.
    pub xtol: f64,
    pub max_evals: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

fn diameter(points: &[(Vec<f64>, f64)]) -> f64 {
    let best = &points[0].0;
    points[1..]
        .iter()
        .map(|(p, _)| {
            p.iter()
                .zip(best)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Minimizes `f` from `x0`. Trial points are projected onto the box
/// `[lower, upper]`; non-finite objective values are treated as `+inf`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let evals = Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut start = x0.to_vec();
    clamp(&mut start, &opts.lower, &opts.upper);
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&start);
    pts.push((start.clone(), f0));
    for i in 0..n {
        let mut p = start.clone();
        p[i] += opts.step;
        if p[i] > opts.upper[i] {
            p[i] = start[i] - opts.step;
        }
        clamp(&mut p, &opts.lower, &opts.upper);
        let fp = eval(&p);
        pts.push((p, fp));
    }

    let mut converged = false;
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&pts) < opts.xtol {
            converged = true;
            break;
        }
        if evals.get() >= opts.max_evals {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| pts[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = pts[n].clone();
        let along = |coef: f64| {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            clamp(&mut p, &opts.lower, &opts.upper);
            p
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < pts[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            pts[n] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let best = pts[0].0.clone();
        for (p, fp) in pts.iter_mut().skip(1) {
            for (v, b) in p.iter_mut().zip(&best) {
                *v = b + 0.5 * (*v - b);
            }
            *fp = eval(p);
        }
    }
    let (x, fx) = pts.swap_remove(0);
    Minimum {
        x,
        fx,
        evals: evals.get(),
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(n: usize) -> SimplexOptions {
        SimplexOptions {
            step: 0.5,
            xtol: 1e-8,
            max_evals: 20_000,
            lower: vec![-10.0; n],
            upper: vec![10.0; n],
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(f, &[-1.2, 1.0], &opts(2));
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_4d() {
        let target = [0.3, -2.0, 1.5, 4.0];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .enumerate()
                .map(|(i, (a, b))| (i + 1) as f64 * (a - b).powi(2))
                .sum()
        };
        let m = minimize(f, &[0.0; 4], &opts(4));
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 20.0).powi(2) + x[1] * x[1];
        let m = minimize(f, &[0.0, 1.0], &opts(2));
        assert_eq!(m.x[0], 10.0);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut o = opts(2);
        o.max_evals = 10;
        let m = minimize(f, &[-1.2, 1.0], &o);
        assert!(!m.converged);
    }
}
