mod common;

use proptest::prelude::*;
use vidpop::fit::daily_views;
use vidpop::metrics::{corpus_summary, entropy};
use vidpop::*;

fn h(counts: Vec<f64>) -> f64 {
    entropy(&ViewTrace::new("v", counts), 30).unwrap().entropy
}

proptest! {
    #[test]
    fn invariant_under_permutation_and_scale(
        counts in proptest::collection::vec(0.0f64..1e4, 30),
        shift in 0usize..30,
        c in 1e-3f64..1e3,
    ) {
        prop_assume!(counts.iter().sum::<f64>() > 0.0);
        let base = h(counts.clone());
        let mut rotated = counts.clone();
        rotated.rotate_left(shift);
        prop_assert!((h(rotated) - base).abs() <= 1e-12);
        prop_assert!((h(counts.iter().map(|v| v * c).collect()) - base).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&base));
    }
}

fn model_entropy(a: f64, b: f64, gamma: f64) -> f64 {
    let p = ReducedParams::new(a, b, 1e5, gamma).unwrap();
    h(daily_views(&p, 30).unwrap())
}

#[test]
fn entropy_falls_with_direct_rate_under_strong_word_of_mouth() {
    let hs: Vec<f64> = [1e-5, 1e-3, 1e-1].iter().map(|&a| model_entropy(a, 1.0, 1.0)).collect();
    assert!(hs.windows(2).all(|w| w[1] <= w[0]), "{hs:?}");
}

// Not monotone in general: with slow word of mouth, a larger direct rate spreads
// views more evenly over the window.
#[test]
fn entropy_can_rise_with_direct_rate() {
    let low = model_entropy(1e-5, 0.05, 0.5);
    let mid = model_entropy(1e-3, 0.05, 0.5);
    assert!(mid > low, "{low} {mid}");
}

#[test]
fn corpus_summary_is_sorted_and_ends_at_one() {
    let reports: Vec<_> = (1..=9)
        .map(|i| {
            let mut c = vec![0.0; 30];
            c[..i * 3].fill(1.0);
            entropy(&ViewTrace::new(format!("v{i}"), c), 30).unwrap()
        })
        .collect();
    let s = corpus_summary(&reports).unwrap();
    assert!(s.sorted_entropy.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(s.cdf.last().unwrap().1, 1.0);
    assert!((s.median() - (15f64).ln() / 30f64.ln()).abs() < 1e-12);
}
