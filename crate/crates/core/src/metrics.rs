//! Windowed view-count entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::ViewTrace;

pub const DEFAULT_WINDOW: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub video_id: String,
    pub window_days: usize,
    /// Shannon entropy of the daily view shares, divided by `ln T`.
    pub entropy: f64,
    pub total_views: f64,
}

/// Normalized entropy of the first `window_days` days of `trace`.
///
/// Days without views contribute nothing (`0 ln 0 = 0`). Traces shorter than
/// the window are rejected rather than padded.
pub fn entropy(trace: &ViewTrace, window_days: usize) -> Result<EntropyReport> {
    trace.validate()?;
    if window_days < 2 {
        return Err(Error::InvalidParameter {
            name: "window_days",
            reason: format!("must be >= 2, got {window_days}"),
        });
    }
    if trace.len() < window_days {
        return Err(Error::WindowTooLong {
            video_id: trace.video_id.clone(),
            len: trace.len(),
            window: window_days,
        });
    }
    let window = &trace.counts[..window_days];
    let total: f64 = window.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyWindow(trace.video_id.clone()));
    }
    let h: f64 = window
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            -p * p.ln()
        })
        .sum();
    let entropy = (h / (window_days as f64).ln()).clamp(0.0, 1.0);
    Ok(EntropyReport {
        video_id: trace.video_id.clone(),
        window_days,
        entropy,
        total_views: total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub video_id: String,
    pub entropy: f64,
    pub total_views: f64,
}

/// Data behind an entropy CDF and an entropy/total-views scatter plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    /// Entropies in ascending order.
    pub sorted_entropy: Vec<f64>,
    /// `(entropy, fraction of videos with entropy <= it)` at each distinct value.
    pub cdf: Vec<(f64, f64)>,
    /// Sorted by video id.
    pub scatter: Vec<ScatterPoint>,
}

impl CorpusSummary {
    pub fn median(&self) -> f64 {
        let v = &self.sorted_entropy;
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

pub fn corpus_summary(reports: &[EntropyReport]) -> Result<CorpusSummary> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("no entropy reports"));
    }
    let mut sorted: Vec<f64> = reports.iter().map(|r| r.entropy).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut cdf: Vec<(f64, f64)> = Vec::new();
    for (i, &e) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match cdf.last_mut() {
            Some(last) if last.0 == e => last.1 = frac,
            _ => cdf.push((e, frac)),
        }
    }
    let mut scatter: Vec<ScatterPoint> = reports
        .iter()
        .map(|r| ScatterPoint {
            video_id: r.video_id.clone(),
            entropy: r.entropy,
            total_views: r.total_views,
        })
        .collect();
    scatter.sort_by(|a, b| {
        a.video_id
            .cmp(&b.video_id)
            .then(a.entropy.total_cmp(&b.entropy))
            .then(a.total_views.total_cmp(&b.total_views))
    });
    Ok(CorpusSummary {
        sorted_entropy: sorted,
        cdf,
        scatter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(counts: Vec<f64>) -> ViewTrace {
        ViewTrace::new("v", counts)
    }

    #[test]
    fn uniform_is_one() {
        let r = entropy(&tr(vec![5.0; 30]), 30).unwrap();
        assert!((r.entropy - 1.0).abs() <= 1e-12);
        assert_eq!(r.total_views, 150.0);
    }

    #[test]
    fn spike_is_zero() {
        let mut c = vec![0.0; 30];
        c[3] = 1000.0;
        assert_eq!(entropy(&tr(c), 30).unwrap().entropy, 0.0);
    }

    #[test]
    fn two_equal_days() {
        let mut c = vec![0.0; 30];
        c[0] = 4.0;
        c[17] = 4.0;
        let e = entropy(&tr(c), 30).unwrap().entropy;
        assert!((e - 2f64.ln() / 30f64.ln()).abs() <= 1e-12);
        assert!((e - 0.20379).abs() < 1e-4);
    }

    #[test]
    fn uses_only_the_window() {
        let mut c = vec![1.0; 10];
        c.extend(vec![1e6; 5]);
        assert!((entropy(&tr(c), 10).unwrap().entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            entropy(&tr(vec![1.0; 5]), 30),
            Err(Error::WindowTooLong { .. })
        ));
        assert!(matches!(
            entropy(&tr(vec![0.0; 30]), 30),
            Err(Error::EmptyWindow(_))
        ));
        assert!(entropy(&tr(vec![1.0; 5]), 1).is_err());
        assert!(matches!(corpus_summary(&[]), Err(Error::EmptyInput(_))));
    }

    fn report(id: &str, e: f64) -> EntropyReport {
        EntropyReport {
            video_id: id.into(),
            window_days: 30,
            entropy: e,
            total_views: 1.0,
        }
    }

    #[test]
    fn single_report_cdf() {
        let s = corpus_summary(&[report("a", 0.4)]).unwrap();
        assert_eq!(s.cdf, vec![(0.4, 1.0)]);
    }

    #[test]
    fn duplicates_keep_cdf_shape() {
        let base = [report("a", 0.2), report("b", 0.7)];
        let doubled: Vec<_> = base.iter().chain(base.iter()).cloned().collect();
        let s1 = corpus_summary(&base).unwrap();
        let s2 = corpus_summary(&doubled).unwrap();
        assert_eq!(s1.cdf, s2.cdf);
        assert_eq!(s2.sorted_entropy, vec![0.2, 0.2, 0.7, 0.7]);
        assert_eq!(s2.scatter.len(), 4);
    }
}
