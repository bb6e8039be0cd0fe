//! Time-sliced path integrals: short-time actions, Jacobian actions of the
//! sliced measure, the effective potential and a transfer-matrix propagator
//! for spectra on the ring and the sphere.

mod action;
mod jacobian;
mod propagator;
mod spectrum;

pub use action::{
    exact_map_action, midpoint_action, postpoint_action, postpoint_action_with, prepoint_action,
    torsion_quartic_term, ShortTimeExpansion,
};
pub use jacobian::{
    delta_jacobian, delta_jacobian_exact, effective_potential, jacobian_action_naive, jacobian_action_naive_with,
    jacobian_action_qep, jacobian_naive_exact, jacobian_qep_exact,
};
pub use propagator::{build_propagator, KernelEntry, KernelSettings, Manifold, MeasureMode, SlicedPropagator, SphereFrame};
pub use spectrum::{extract_spectrum, richardson, Level, SpectrumReport, SpectrumSettings, DEFAULT_LADDER};

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    RealTime,
    ImaginaryTime,
}

/// Physical constants of one time slice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeConfig {
    pub mass: f64,
    pub hbar: f64,
    pub epsilon: f64,
    pub sign_mode: SignMode,
}

impl Default for ShortTimeConfig {
    fn default() -> Self {
        ShortTimeConfig {
            mass: 1.0,
            hbar: 1.0,
            epsilon: 0.01,
            sign_mode: SignMode::ImaginaryTime,
        }
    }
}

impl ShortTimeConfig {
    pub fn new(mass: f64, hbar: f64, epsilon: f64, sign_mode: SignMode) -> Result<Self> {
        let c = ShortTimeConfig {
            mass,
            hbar,
            epsilon,
            sign_mode,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("hbar", self.hbar), ("epsilon", self.epsilon)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeomError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        ShortTimeConfig { epsilon, ..*self }
    }

    /// Width `sqrt(ε ħ / M)` of the free short-time Gaussian.
    pub fn sigma(&self) -> f64 {
        (self.epsilon * self.hbar / self.mass).sqrt()
    }
}
