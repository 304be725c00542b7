//! Riemann invariants and characteristic speeds for p(ρ) = ρ², and the
//! inverse map from (λ1, w1) back to a state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerState {
    pub rho: f64,
    pub m1: f64,
    pub m2: f64,
}

impl EulerState {
    pub fn new(rho: f64, m1: f64, m2: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Domain { op: "EulerState::new", what: "rho", value: rho });
        }
        Ok(EulerState { rho, m1, m2 })
    }

    /// State with velocity `(0, v2)`.
    pub fn from_velocity(rho: f64, v2: f64) -> Result<Self> {
        Self::new(rho, 0.0, rho * v2)
    }

    pub fn v2(&self) -> f64 {
        self.m2 / self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveCoordinates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub w1: f64,
    pub w2: f64,
}

pub fn wave_from_state(s: &EulerState) -> Result<WaveCoordinates> {
    if !(s.rho > 0.0) {
        return Err(Error::Domain { op: "wave_from_state", what: "rho", value: s.rho });
    }
    let v = s.v2();
    let c = (2.0 * s.rho).sqrt();
    let int = (8.0 * s.rho).sqrt();
    Ok(WaveCoordinates { lambda1: v - c, lambda2: v + c, w1: v + int, w2: v - int })
}

/// Density and normal momentum on the 1-family with Riemann invariant `w1`.
/// Generic so that derivatives along a trace can be carried through.
pub fn density_momentum<R: Real>(lambda1: R, w1: f64) -> (R, R) {
    let d = -lambda1 + w1;
    let rho = d * d / 18.0;
    let m2 = rho * (lambda1 * 2.0 + w1) / 3.0;
    (rho, m2)
}

pub fn state_from_wave(lambda1: f64, w1: f64) -> Result<EulerState> {
    if !(w1 > lambda1) {
        return Err(Error::Domain { op: "state_from_wave", what: "w1 - lambda1", value: w1 - lambda1 });
    }
    let (rho, m2) = density_momentum(lambda1, w1);
    Ok(EulerState { rho, m1: 0.0, m2 })
}

/// The momentum reconstruction with the sign as it appears in print,
/// `m2 = (w1 - λ1)² (2λ1 - w1) / 54`. Kept only so the consistency checks
/// can demonstrate that it does not reproduce the endpoint states.
pub fn state_from_wave_as_printed(lambda1: f64, w1: f64) -> Result<EulerState> {
    if !(w1 > lambda1) {
        return Err(Error::Domain { op: "state_from_wave", what: "w1 - lambda1", value: w1 - lambda1 });
    }
    let d = w1 - lambda1;
    Ok(EulerState { rho: d * d / 18.0, m1: 0.0, m2: d * d * (2.0 * lambda1 - w1) / 54.0 })
}

pub fn energy_density(s: &EulerState) -> Result<f64> {
    if !(s.rho > 0.0) {
        return Err(Error::Domain { op: "energy_density", what: "rho", value: s.rho });
    }
    Ok(s.rho * s.rho + (s.m1 * s.m1 + s.m2 * s.m2) / (2.0 * s.rho))
}
