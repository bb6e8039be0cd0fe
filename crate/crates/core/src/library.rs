//! Built-in charts. The definitions live in `charts/*.json` and are embedded
//! at compile time, so they are identical to the files the CLI ships.

use crate::chart::{Chart, ChartFile, ChartKind};

pub const CARTESIAN: &str = include_str!("../charts/cartesian.json");
pub const POLAR: &str = include_str!("../charts/polar.json");
pub const SPHERE: &str = include_str!("../charts/sphere.json");
pub const RING: &str = include_str!("../charts/ring.json");
pub const DISLOCATION: &str = include_str!("../charts/dislocation.json");
pub const DISCLINATION: &str = include_str!("../charts/disclination.json");
pub const SYNTHETIC_TORSION: &str = include_str!("../charts/synthetic_torsion.json");

/// Names accepted by [`builtin`].
pub const NAMES: [&str; 7] = [
    "cartesian",
    "polar",
    "sphere",
    "ring",
    "dislocation",
    "disclination",
    "synthetic_torsion",
];

fn embedded(text: &str) -> Chart {
    Chart::from_json(text).expect("built-in chart definitions are valid")
}

fn with(text: &str, name: &str, value: f64) -> Chart {
    embedded(text)
        .with_param(name, value)
        .unwrap_or_else(|e| panic!("{name} = {value}: {e}"))
}

/// Built-in chart by name, with its default parameters.
pub fn builtin(name: &str) -> Option<Chart> {
    let text = match name {
        "cartesian" => CARTESIAN,
        "polar" => POLAR,
        "sphere" => SPHERE,
        "ring" => RING,
        "dislocation" => DISLOCATION,
        "disclination" => DISCLINATION,
        "synthetic_torsion" | "synthetic-torsion" => SYNTHETIC_TORSION,
        _ => return None,
    };
    Some(embedded(text))
}

/// Identity map `x = q` in `dim` dimensions.
pub fn cartesian(dim: usize) -> Chart {
    if dim == 2 {
        return embedded(CARTESIAN);
    }
    Chart::new(ChartFile {
        name: Some("cartesian".into()),
        dim,
        kind: ChartKind::Map,
        exprs: (1..=dim).map(|i| format!("q{i}")).collect(),
        params: Default::default(),
        guard: None,
    })
    .expect("identity map is valid")
}

/// Polar coordinates `(r, θ)` of the plane.
pub fn polar() -> Chart {
    embedded(POLAR)
}

/// Sphere of radius `r` in coordinates `(θ, φ)`, embedded in three dimensions.
pub fn sphere(r: f64) -> Chart {
    with(SPHERE, "r", r)
}

/// Circle of radius `r` parametrized by its angle.
pub fn ring(r: f64) -> Chart {
    with(RING, "r", r)
}

/// Edge dislocation: `e¹ = dq¹`, `e² = dq² + ε dφ`.
pub fn dislocation(eps: f64) -> Chart {
    with(DISLOCATION, "eps", eps)
}

/// Wedge disclination of small Frank angle, linear in `Omega`.
pub fn disclination(omega: f64) -> Chart {
    with(DISCLINATION, "Omega", omega)
}

/// Flat image with constant torsion density: `e²_2 = 1 + α q¹`.
pub fn synthetic_torsion(alpha: f64) -> Chart {
    with(SYNTHETIC_TORSION, "alpha", alpha)
}
