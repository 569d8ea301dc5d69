mod common;

use proptest::prelude::*;
use vidpop::reaction::{solve_reaction_with, ReactionOptions, Stepper};
use vidpop::spread::SpreadCurve;
use vidpop::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (-4.0f64..0.0, -2.0f64..0.0, -2.0f64..1.0, 0.05f64..=1.0).prop_map(|(la, lb, lg, q)| {
        let n = 1e5;
        ModelParams::new(n, 10f64.powf(la), 10f64.powf(lb) / (q * n), q, 10f64.powf(lg)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_balance_on_day_grid(p in params_strategy()) {
        let days = (40.0 / p.tau()).ceil() as usize;
        let tr = solve_reaction(&p, &TimeGrid::new(1.0, days + 1).unwrap()).unwrap();
        let curve = SpreadCurve::from(&p);
        prop_assert!(tr.mass_balance_error(&curve) <= 1e-6 * p.adopters());
        prop_assert!(tr.z.iter().all(|&z| z >= 0.0));
        prop_assert!(tr.w.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn steppers_agree(p in params_strategy(), t in 0.5f64..30.0) {
        let grid = TimeGrid::spanning(t, 2).unwrap();
        let solve = |stepper| {
            let opts = ReactionOptions { stepper, ..ReactionOptions::default() };
            solve_reaction_with(&p, &grid, opts).unwrap().z[1]
        };
        let rk4 = solve(Stepper::Rk4);
        let etd = solve(Stepper::Exponential);
        prop_assert!((rk4 - etd).abs() <= 1e-4 * rk4.abs().max(1e-12 * p.adopters()), "{} vs {}", rk4, etd);
    }

    #[test]
    fn view_rate_peaks_after_spread_rate(p in params_strategy()) {
        let horizon = critical_times(&p).t_prime.max(0.0) + 40.0 / p.gamma.min(p.tau());
        let peak = find_peak(&p, horizon).unwrap();
        prop_assert!(peak.t_peak_dw >= peak.t_peak_dx - peak.dt);
        prop_assert!(peak.dw_max <= SpreadCurve::from(&p).dx(peak.t_peak_dx) * (1.0 + 1e-9));
    }
}

#[test]
fn quadrature_matches_solver_at_figure_parameters() {
    for alpha in common::FIGURE_ALPHAS {
        for gamma in [0.001, 0.01, 0.1, 1.0, 10.0] {
            let p = common::figure_params(alpha, gamma);
            let tr = solve_reaction(&p, &TimeGrid::new(1.0, 301).unwrap()).unwrap();
            for k in [1, 10, 50, 150, 300] {
                let zq = z_quadrature(&p, tr.t[k]);
                assert!((tr.z[k] - zq).abs() <= 1e-3 * zq, "alpha {alpha} gamma {gamma} t {k}");
            }
        }
    }
}

#[test]
fn short_horizon_is_reported() {
    let p = common::figure_params(0.00005, 0.1);
    assert!(matches!(find_peak(&p, 10.0), Err(Error::HorizonTooShort { .. })));
}

// The lag between the two peaks shrinking as gamma grows is reported, not
// asserted; only the interior peak of dw is a hard property.
#[test]
fn peak_lag_over_gamma() {
    for alpha in common::FIGURE_ALPHAS {
        let mut lags = Vec::new();
        for gamma in [0.001, 0.01, 0.1, 1.0, 10.0] {
            let p = common::figure_params(alpha, gamma);
            let horizon = critical_times(&p).t_prime.max(0.0) + 40.0 / gamma.min(p.tau());
            let peak = find_peak(&p, horizon).unwrap();
            assert!(peak.t_peak_dw > 0.0);
            lags.push(peak.t_peak_dw - peak.t_peak_dx);
        }
        let shrinking = lags.windows(2).all(|w| w[1] <= w[0]);
        println!("alpha {alpha:<8} lags {lags:.3?} nonincreasing: {shrinking}");
    }
}
