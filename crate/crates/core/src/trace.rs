use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Daily view counts of one video, day 0 being the upload day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewTrace {
    pub video_id: String,
    pub counts: Vec<f64>,
}

impl ViewTrace {
    pub fn new(video_id: impl Into<String>, counts: Vec<f64>) -> Self {
        Self {
            video_id: video_id.into(),
            counts,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn peak(&self) -> f64 {
        self.counts.iter().cloned().fold(0.0, f64::max)
    }

    /// Rejects negative or non-finite counts.
    pub fn validate(&self) -> Result<()> {
        if let Some((day, v)) = self
            .counts
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: format!("day {day} of `{}` has count {v}", self.video_id),
            });
        }
        Ok(())
    }

    /// Counts divided by the peak daily count.
    pub fn normalize_peak(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let peak = self.peak();
        if peak <= 0.0 {
            return Err(Error::DegenerateTrace(self.video_id.clone()));
        }
        Ok(self.counts.iter().map(|c| c / peak).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize() {
        let t = ViewTrace::new("v", vec![10.0, 100.0, 50.0]);
        assert_eq!(t.normalize_peak().unwrap(), vec![0.1, 1.0, 0.5]);
        let t = ViewTrace::new("v", vec![7.0; 3]);
        assert_eq!(t.normalize_peak().unwrap(), vec![1.0; 3]);
        let t = ViewTrace::new("z", vec![0.0; 3]);
        assert!(matches!(t.normalize_peak(), Err(Error::DegenerateTrace(_))));
        assert!(ViewTrace::new("n", vec![1.0, -1.0]).validate().is_err());
    }
}
