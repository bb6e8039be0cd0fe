//! Centrally configured numeric tolerances.

use serde::{Deserialize, Serialize};

/// Environment variable selecting the default profile.
pub const PROFILE_ENV: &str = "NONHOLONOMIC_TOLERANCE";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Triads with `|det e|` below this are rejected.
    pub det_floor: f64,
    /// Radius of the disk excluded around the origin of defect charts.
    pub guard_radius: f64,
    /// Relative energy drift allowed before a trajectory is flagged.
    pub energy_drift: f64,
    /// Panel-refinement difference above which a loop integral is rejected.
    pub quadrature: f64,
    /// Nearest-neighbour hop, in kernel widths, above which a grid is too coarse.
    pub max_hop_ratio: f64,
    /// Kernel rows are truncated beyond this many Gaussian widths.
    pub kernel_cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            det_floor: 1e-12,
            guard_radius: 1e-8,
            energy_drift: 1e-6,
            quadrature: 1e-9,
            max_hop_ratio: 1.0,
            kernel_cutoff: 6.0,
        }
    }
}

impl Tolerances {
    pub fn strict() -> Self {
        Tolerances {
            det_floor: 1e-10,
            energy_drift: 1e-8,
            quadrature: 1e-11,
            max_hop_ratio: 0.5,
            kernel_cutoff: 8.0,
            ..Tolerances::default()
        }
    }

    pub fn loose() -> Self {
        Tolerances {
            det_floor: 1e-14,
            energy_drift: 1e-4,
            quadrature: 1e-6,
            max_hop_ratio: 2.0,
            kernel_cutoff: 5.0,
            ..Tolerances::default()
        }
    }

    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Tolerances::default()),
            "strict" => Some(Tolerances::strict()),
            "loose" => Some(Tolerances::loose()),
            _ => None,
        }
    }

    /// Profile named by [`PROFILE_ENV`], falling back to the default.
    pub fn from_env() -> Self {
        std::env::var(PROFILE_ENV)
            .ok()
            .and_then(|p| Tolerances::profile(p.trim()))
            .unwrap_or_default()
    }
}
