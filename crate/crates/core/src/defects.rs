//! Dislocation and disclination charts and the loop integrals that detect
//! them: winding number, Burgers vector, Frank angle and torsion flux.
//!
//! Line integrals run over closed polygons. Each edge is split into
//! `samples_per_edge` panels and every panel is integrated with 8-point
//! Gauss-Legendre quadrature. A panel is also integrated as two halves; if the
//! two estimates disagree by more than the quadrature tolerance the integral
//! is rejected, which catches loops that pass too close to a defect line.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, VectorField};
use crate::error::{GeomError, Result};
use crate::geometry::Depth;
use crate::library;
use crate::tolerance::Tolerances;

/// Nodes and weights of 8-point Gauss-Legendre quadrature on `[-1, 1]`.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

pub const MIN_SAMPLES_PER_EDGE: usize = 8;

fn default_samples() -> usize {
    MIN_SAMPLES_PER_EDGE
}

/// Closed polygonal circuit in coordinate space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub vertices: Vec<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples_per_edge: usize,
}

/// On-disk loop: either a bare list of vertices or a full [`LoopSpec`].
#[derive(Deserialize)]
#[serde(untagged)]
enum LoopFile {
    Bare(Vec<Vec<f64>>),
    Full(LoopSpec),
}

impl LoopSpec {
    /// Builds a loop, appending the first vertex at the end if the polygon is
    /// not already closed.
    pub fn new(mut vertices: Vec<Vec<f64>>, samples_per_edge: usize) -> Result<LoopSpec> {
        if vertices.len() < 3 {
            return Err(GeomError::InvalidParameter("a loop needs at least three vertices".into()));
        }
        let dim = vertices[0].len();
        if dim == 0 || vertices.iter().any(|v| v.len() != dim) {
            return Err(GeomError::DimensionMismatch("loop vertices must share one dimension".into()));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidParameter("loop vertices must be finite".into()));
        }
        if samples_per_edge < MIN_SAMPLES_PER_EDGE {
            return Err(GeomError::InsufficientSampling(format!(
                "samples_per_edge must be at least {MIN_SAMPLES_PER_EDGE}, got {samples_per_edge}"
            )));
        }
        if vertices.first() != vertices.last() {
            vertices.push(vertices[0].clone());
        }
        Ok(LoopSpec {
            vertices,
            samples_per_edge,
        })
    }

    pub fn from_json(text: &str) -> Result<LoopSpec> {
        match serde_json::from_str::<LoopFile>(text)? {
            LoopFile::Bare(v) => LoopSpec::new(v, MIN_SAMPLES_PER_EDGE),
            LoopFile::Full(s) => LoopSpec::new(s.vertices, s.samples_per_edge),
        }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<LoopSpec> {
        LoopSpec::from_json(&std::fs::read_to_string(path)?)
    }

    /// Axis-aligned square with the given center and half side, traversed
    /// counter-clockwise.
    pub fn square(center: [f64; 2], half: f64) -> LoopSpec {
        let [cx, cy] = center;
        LoopSpec::new(
            vec![
                vec![cx - half, cy - half],
                vec![cx + half, cy - half],
                vec![cx + half, cy + half],
                vec![cx - half, cy + half],
            ],
            MIN_SAMPLES_PER_EDGE,
        )
        .expect("square loop is valid")
    }

    /// Regular polygon approximating a circle, counter-clockwise, winding
    /// `turns` times around its center.
    pub fn polygon(center: [f64; 2], radius: f64, sides: usize, turns: usize) -> LoopSpec {
        let n = sides.max(3) * turns.max(1);
        let vertices = (0..=n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / sides.max(3) as f64;
                vec![center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        LoopSpec::new(vertices, MIN_SAMPLES_PER_EDGE).expect("polygon loop is valid")
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn edges(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Winding number around `center` (a 2-D loop), from the accumulated
    /// angle each edge subtends.
    pub fn winding_number(&self, center: [f64; 2]) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| {
                let (ax, ay) = (w[0][0] - center[0], w[0][1] - center[1]);
                let (bx, by) = (w[1][0] - center[0], w[1][1] - center[1]);
                (ax * by - ay * bx).atan2(ax * bx + ay * by)
            })
            .sum::<f64>()
            / (2.0 * PI)
    }
}

/// `∮ F_μ(q) dq^μ` for several integrands at once; `f` returns the rows
/// `F^(c)_μ` for every component `c`.
pub fn line_integral(
    lp: &LoopSpec,
    tol: f64,
    f: impl Fn(&[f64]) -> Result<Vec<Vec<f64>>>,
) -> Result<Vec<f64>> {
    let dim = lp.dim();
    let panel = |a: &[f64], b: &[f64]| -> Result<Vec<f64>> {
        let dq: Vec<f64> = (0..dim).map(|m| b[m] - a[m]).collect();
        let mut acc: Vec<f64> = Vec::new();
        for &(x, w) in &GL8 {
            let s = 0.5 * (x + 1.0);
            let q: Vec<f64> = (0..dim).map(|m| a[m] + s * dq[m]).collect();
            let rows = f(&q)?;
            if acc.is_empty() {
                acc = vec![0.0; rows.len()];
            }
            for (c, row) in rows.iter().enumerate() {
                let dot: f64 = row.iter().zip(&dq).map(|(r, d)| r * d).sum();
                acc[c] += 0.5 * w * dot;
            }
        }
        Ok(acc)
    };
    let mut total: Vec<f64> = Vec::new();
    for (edge, w) in lp.vertices.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let m = lp.samples_per_edge;
        for k in 0..m {
            let p0: Vec<f64> = (0..dim).map(|i| a[i] + (b[i] - a[i]) * k as f64 / m as f64).collect();
            let p1: Vec<f64> = (0..dim).map(|i| a[i] + (b[i] - a[i]) * (k + 1) as f64 / m as f64).collect();
            let mid: Vec<f64> = (0..dim).map(|i| 0.5 * (p0[i] + p1[i])).collect();
            let whole = panel(&p0, &p1)?;
            let left = panel(&p0, &mid)?;
            let right = panel(&mid, &p1)?;
            if total.is_empty() {
                total = vec![0.0; whole.len()];
            }
            for c in 0..whole.len() {
                let fine = left[c] + right[c];
                let diff = (fine - whole[c]).abs();
                if diff > tol * fine.abs().max(1.0) {
                    return Err(GeomError::QuadratureDivergence { edge, difference: diff });
                }
                total[c] += fine;
            }
        }
    }
    Ok(total)
}

/// Gradient `∂_μ φ = (−q², q¹)/|q|²` of the polar angle, as a field on the
/// plane.
pub fn angle_gradient() -> VectorField {
    VectorField::parse(&library::cartesian(2), &["-q2/(q1^2+q2^2)", "q1/(q1^2+q2^2)"])
        .expect("angle gradient parses")
}

/// `∮ dq^μ ∂_μ φ` for a gradient field `∂_μ φ`.
pub fn winding_integral(gradient: &VectorField, lp: &LoopSpec) -> Result<f64> {
    winding_integral_with(gradient, lp, &Tolerances::from_env())
}

pub fn winding_integral_with(gradient: &VectorField, lp: &LoopSpec, tol: &Tolerances) -> Result<f64> {
    if gradient.dim() != lp.dim() {
        return Err(GeomError::DimensionMismatch("field and loop dimensions differ".into()));
    }
    let guard = tol.guard_radius;
    let v = line_integral(lp, tol.quadrature, |q| {
        if q.iter().map(|x| x * x).sum::<f64>() <= guard * guard {
            return Err(GeomError::SingularPoint { point: q.to_vec() });
        }
        Ok(vec![gradient.eval(q)])
    })?;
    Ok(v[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    Dislocation { epsilon: f64 },
    Disclination { omega: f64 },
}

/// A chart carrying a single line defect at the origin.
#[derive(Clone, Debug)]
pub struct DefectChart {
    pub chart: Chart,
    pub kind: DefectKind,
}

impl DefectChart {
    /// The same chart with the defect strength set to zero.
    pub fn reference(&self) -> DefectChart {
        match self.kind {
            DefectKind::Dislocation { .. } => make_dislocation(0.0).expect("zero is valid"),
            DefectKind::Disclination { .. } => make_disclination(0.0).expect("zero is valid"),
        }
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(GeomError::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

/// Edge dislocation of strength `epsilon` (a triad field).
pub fn make_dislocation(epsilon: f64) -> Result<DefectChart> {
    finite("epsilon", epsilon)?;
    Ok(DefectChart {
        chart: library::dislocation(epsilon),
        kind: DefectKind::Dislocation { epsilon },
    })
}

/// Wedge disclination of small Frank angle `omega`, to linear order.
pub fn make_disclination(omega: f64) -> Result<DefectChart> {
    finite("omega", omega)?;
    if omega.abs() > 0.5 {
        return Err(GeomError::InvalidParameter(format!(
            "disclination is linearized in omega; |omega| = {} is too large",
            omega.abs()
        )));
    }
    Ok(DefectChart {
        chart: library::disclination(omega),
        kind: DefectKind::Disclination { omega },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Burgers {
    /// `b^i = ∮ dq^μ e^i_μ`.
    pub b: Vec<f64>,
    /// `b / 2π`.
    pub b_over_2pi: Vec<f64>,
}

/// `∮ dq^μ e^i_μ(q)`.
pub fn burgers_vector(chart: &Chart, lp: &LoopSpec) -> Result<Burgers> {
    burgers_vector_with(chart, lp, &Tolerances::from_env())
}

pub fn burgers_vector_with(chart: &Chart, lp: &LoopSpec, tol: &Tolerances) -> Result<Burgers> {
    if lp.dim() != chart.dim() {
        return Err(GeomError::DimensionMismatch("chart and loop dimensions differ".into()));
    }
    let b = line_integral(lp, tol.quadrature, |q| Ok(chart.eval_triad(q)?.to_rows()))?;
    let b_over_2pi = b.iter().map(|x| x / (2.0 * PI)).collect();
    Ok(Burgers { b, b_over_2pi })
}

/// `∮ dq^μ ∂_μ ω` with the local rotation `ω = ½(e²_1 − e¹_2)`; two
/// dimensions only.
pub fn frank_angle(chart: &Chart, lp: &LoopSpec) -> Result<f64> {
    frank_angle_with(chart, lp, &Tolerances::from_env())
}

pub fn frank_angle_with(chart: &Chart, lp: &LoopSpec, tol: &Tolerances) -> Result<f64> {
    if chart.dim() != 2 || chart.ambient() != 2 || lp.dim() != 2 {
        return Err(GeomError::DimensionMismatch(
            "the Frank angle is defined for planar two-dimensional charts".into(),
        ));
    }
    let v = line_integral(lp, tol.quadrature, |q| {
        let p = chart.geometry(q, Depth::Connection)?;
        let d = &p.triad_d1;
        Ok(vec![(0..2).map(|m| 0.5 * (d[(m, 1, 0)] - d[(m, 0, 1)])).collect()])
    })?;
    Ok(v[0])
}

/// Torsion flux through a surface bounded by the loop: the Burgers integral
/// minus that of the defect-free chart.
pub fn torsion_flux(defect: &DefectChart, lp: &LoopSpec) -> Result<Vec<f64>> {
    let b = burgers_vector(&defect.chart, lp)?.b;
    let b0 = burgers_vector(&defect.reference().chart, lp)?.b;
    Ok(b.iter().zip(&b0).map(|(x, y)| x - y).collect())
}
