//! Parameter sets and time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Full parameter set of the fluid model.
///
/// * `n_users`: total user population
/// * `alpha`: direct recommendation rate
/// * `beta`: word-of-mouth rate, per informed-and-interested user
/// * `q`: attractiveness, the probability that an informed user intends to watch
/// * `gamma`: reaction rate of users who intend to watch
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_users: f64,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub gamma: f64,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}

impl ModelParams {
    /// Validates and builds a parameter set.
    pub fn new(n_users: f64, alpha: f64, beta: f64, q: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            n_users,
            alpha,
            beta,
            q,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("n_users", self.n_users)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("gamma", self.gamma)?;
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: format!("must lie in (0, 1], got {}", self.q),
            });
        }
        let b = self.b_wom();
        if !(b.is_finite() && b > 0.0 && (self.alpha + b).is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("beta*q*n_users = {b} is not a finite positive rate"),
            });
        }
        Ok(())
    }

    /// `beta * q * n_users`, the saturated word-of-mouth rate.
    pub fn b_wom(&self) -> f64 {
        self.beta * self.q * self.n_users
    }

    /// `alpha + beta * q * n_users`.
    pub fn tau(&self) -> f64 {
        self.alpha + self.b_wom()
    }

    /// Asymptotic number of interested users, `q * n_users`.
    pub fn adopters(&self) -> f64 {
        self.q * self.n_users
    }

    pub fn reduced(&self) -> ReducedParams {
        ReducedParams {
            a_direct: self.alpha,
            b_wom: self.b_wom(),
            m_adopters: self.adopters(),
            gamma: self.gamma,
        }
    }
}

/// Identifiable reparameterization `(A, B, M, gamma) = (alpha, beta q N, q N, gamma)`.
///
/// The observable curves `x`, `z`, `w` depend on these four numbers only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub a_direct: f64,
    pub b_wom: f64,
    pub m_adopters: f64,
    pub gamma: f64,
}

impl ReducedParams {
    pub fn new(a_direct: f64, b_wom: f64, m_adopters: f64, gamma: f64) -> Result<Self> {
        let r = Self {
            a_direct,
            b_wom,
            m_adopters,
            gamma,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        positive("a_direct", self.a_direct)?;
        positive("b_wom", self.b_wom)?;
        positive("m_adopters", self.m_adopters)?;
        positive("gamma", self.gamma)?;
        if !(self.a_direct + self.b_wom).is_finite() {
            return Err(Error::InvalidParameter {
                name: "b_wom",
                reason: "a_direct + b_wom overflows".into(),
            });
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.a_direct + self.b_wom
    }

    /// Recovers the full parameter set given the population size.
    pub fn with_population(&self, n_users: f64) -> Result<ModelParams> {
        positive("n_users", n_users)?;
        let q = self.m_adopters / n_users;
        ModelParams::new(n_users, self.a_direct, self.b_wom / self.m_adopters, q, self.gamma)
    }

    /// Recovers the full parameter set given the attractiveness.
    pub fn with_attractiveness(&self, q: f64) -> Result<ModelParams> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: format!("must lie in (0, 1], got {q}"),
            });
        }
        ModelParams::new(
            self.m_adopters / q,
            self.a_direct,
            self.b_wom / self.m_adopters,
            q,
            self.gamma,
        )
    }
}

impl From<ModelParams> for ReducedParams {
    fn from(p: ModelParams) -> Self {
        p.reduced()
    }
}

/// Uniform time grid `t_k = t_start + k * dt` for `k = 0..n_steps`.
///
/// `n_steps` counts grid points, so a grid with `n_steps == 1` is the single point `t_start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        let g = Self {
            t_start: 0.0,
            dt,
            n_steps,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid of `n_steps` points covering `[0, horizon]`.
    pub fn spanning(horizon: f64, n_steps: usize) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::InvalidGrid("need at least two points to span a horizon".into()));
        }
        Self::new(horizon / (n_steps - 1) as f64, n_steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be >= 1".into()));
        }
        if !(self.t_start.is_finite() && self.t_start >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "t_start must be >= 0, got {}",
                self.t_start
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(|k| self.time(k))
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.n_steps - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_q() {
        let err = ModelParams::new(1e6, 0.1, 1e-7, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "q", .. }));
    }

    #[test]
    fn accepts_q_one() {
        assert!(ModelParams::new(1e6, 0.1, 1e-7, 1.0, 1.0).is_ok());
    }

    #[test]
    fn rejects_nonpositive_rates() {
        for (i, bad) in [0.0, -1.0, f64::NAN, f64::INFINITY].into_iter().enumerate() {
            assert!(ModelParams::new(1e6, bad, 1e-7, 0.5, 1.0).is_err(), "case {i}");
            assert!(ModelParams::new(1e6, 0.1, bad, 0.5, 1.0).is_err(), "case {i}");
            assert!(ModelParams::new(1e6, 0.1, 1e-7, 0.5, bad).is_err(), "case {i}");
            assert!(ModelParams::new(bad, 0.1, 1e-7, 0.5, 1.0).is_err(), "case {i}");
        }
    }

    #[test]
    fn reduced_round_trip() {
        let p = ModelParams::new(1e6, 0.1, 1e-7, 0.5, 2.0).unwrap();
        let r = p.reduced();
        assert_eq!(r.a_direct, 0.1);
        assert!((r.b_wom - 0.05).abs() < 1e-15);
        assert_eq!(r.m_adopters, 5e5);
        let back = r.with_population(1e6).unwrap();
        assert!((back.q - 0.5).abs() < 1e-15);
        assert!((back.beta - 1e-7).abs() < 1e-22);
        let back = r.with_attractiveness(0.5).unwrap();
        assert!((back.n_users - 1e6).abs() < 1e-6);
    }

    #[test]
    fn grid_points() {
        let g = TimeGrid::new(0.5, 3).unwrap();
        assert_eq!(g.times().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert_eq!(g.horizon(), 1.0);
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        let s = TimeGrid::spanning(10.0, 11).unwrap();
        assert_eq!(s.dt, 1.0);
    }
}
