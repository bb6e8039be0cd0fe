use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::connection::Variant;
use crate::error::{GeomError, Result};
use crate::geometry::Depth;
use crate::library;
use crate::tolerance::Tolerances;

use super::{ShortTimeConfig, ShortTimeExpansion, SignMode};

/// Grid on which the sliced propagator acts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "manifold", rename_all = "lowercase")]
pub enum Manifold {
    /// Circle of radius `r` sampled at `points` equally spaced angles.
    Ring { r: f64, points: usize },
    /// Sphere of radius `r` on a latitude-longitude grid with cell-centred
    /// polar angles `θ_j = (j + ½)π/Pθ` and azimuths `φ_k = 2πk/Pφ`.
    Sphere { r: f64, theta_points: usize, phi_points: usize },
}

impl Manifold {
    pub fn chart(&self) -> Chart {
        match *self {
            Manifold::Ring { r, .. } => library::ring(r),
            Manifold::Sphere { r, .. } => library::sphere(r),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Manifold::Ring { .. } => 1,
            Manifold::Sphere { .. } => 2,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Manifold::Ring { r, .. } | Manifold::Sphere { r, .. } => r,
        }
    }

    /// Number of grid points.
    pub fn size(&self) -> usize {
        match *self {
            Manifold::Ring { points, .. } => points,
            Manifold::Sphere {
                theta_points,
                phi_points,
                ..
            } => theta_points * phi_points,
        }
    }

    /// Number of points along the periodic direction.
    pub fn periodic_points(&self) -> usize {
        match *self {
            Manifold::Ring { points, .. } => points,
            Manifold::Sphere { phi_points, .. } => phi_points,
        }
    }

    /// Number of distinct rows up to periodic shifts.
    pub fn row_classes(&self) -> usize {
        match *self {
            Manifold::Ring { .. } => 1,
            Manifold::Sphere { theta_points, .. } => theta_points,
        }
    }

    fn validate(&self) -> Result<()> {
        let (r, counts): (f64, Vec<usize>) = match *self {
            Manifold::Ring { r, points } => (r, vec![points]),
            Manifold::Sphere {
                r,
                theta_points,
                phi_points,
            } => (r, vec![theta_points, phi_points]),
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        if counts.iter().any(|&c| c < 4) {
            return Err(GeomError::InvalidParameter(format!(
                "grid needs at least 4 points per direction, got {counts:?}"
            )));
        }
        Ok(())
    }

    fn periodic_step(&self) -> f64 {
        2.0 * PI / self.periodic_points() as f64
    }

    fn theta(&self, j: usize) -> f64 {
        match *self {
            Manifold::Sphere { theta_points, .. } => (j as f64 + 0.5) * PI / theta_points as f64,
            Manifold::Ring { .. } => 0.0,
        }
    }

    /// Coordinate cell volume `d^D q` of one grid point.
    pub fn cell(&self) -> f64 {
        match *self {
            Manifold::Ring { points, .. } => 2.0 * PI / points as f64,
            Manifold::Sphere {
                theta_points,
                phi_points,
                ..
            } => (PI / theta_points as f64) * (2.0 * PI / phi_points as f64),
        }
    }

    /// Coordinates of grid point `index` (row-major in `(θ, φ)` on the sphere).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let h = self.periodic_step();
        match *self {
            Manifold::Ring { .. } => vec![index as f64 * h],
            Manifold::Sphere { phi_points, .. } => {
                vec![self.theta(index / phi_points), (index % phi_points) as f64 * h]
            }
        }
    }
}

/// Measure of the sliced path integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureMode {
    /// Naive measure `∏ d^D q √g` with the Jacobian action `A_J0`.
    #[serde(rename = "naive")]
    NaiveDeWitt,
    /// Equivalence-principle measure with the Jacobian action `A_J`.
    #[serde(rename = "qep")]
    Qep,
    /// Naive measure plus the effective potential `V_eff`.
    #[serde(rename = "qep-veff")]
    QepViaVeff,
}

impl MeasureMode {
    pub const ALL: [MeasureMode; 3] = [MeasureMode::NaiveDeWitt, MeasureMode::Qep, MeasureMode::QepViaVeff];

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureMode::NaiveDeWitt => "naive",
            MeasureMode::Qep => "qep",
            MeasureMode::QepViaVeff => "qep-veff",
        }
    }
}

impl fmt::Display for MeasureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureMode {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" | "naive-dewitt" | "dewitt" => Ok(MeasureMode::NaiveDeWitt),
            "qep" => Ok(MeasureMode::Qep),
            "qep-veff" | "qepviaveff" | "veff" => Ok(MeasureMode::QepViaVeff),
            other => Err(GeomError::InvalidParameter(format!(
                "unknown measure mode '{other}' (expected naive, qep or qep-veff)"
            ))),
        }
    }
}

/// Numerical settings of the kernel assembly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSettings {
    /// Rows are truncated beyond this many Gaussian widths `σ = √(εħ/M)`,
    /// measured with the metric at the row point.
    pub cutoff: f64,
    /// Largest admissible nearest-neighbour hop in units of `σ`.
    pub max_hop_ratio: f64,
    /// Frame in which sphere rows are evaluated.
    #[serde(default)]
    pub frame: SphereFrame,
}

/// Coordinates used for the short-time expansion of a sphere row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SphereFrame {
    /// The latitude-longitude chart rotated so that the row point lies on
    /// its equator. All rows then share one set of expansion coefficients.
    #[default]
    Rotated,
    /// The latitude-longitude chart itself. Rows within a few kernel widths
    /// of a pole see increments far outside the range of the expansion.
    Native,
}

impl Default for KernelSettings {
    fn default() -> Self {
        KernelSettings {
            cutoff: 6.0,
            max_hop_ratio: 1.0,
            frame: SphereFrame::Rotated,
        }
    }
}

impl From<&Tolerances> for KernelSettings {
    fn from(tol: &Tolerances) -> Self {
        KernelSettings {
            cutoff: tol.kernel_cutoff,
            max_hop_ratio: tol.max_hop_ratio,
            frame: SphereFrame::default(),
        }
    }
}

/// Non-zero kernel entry of one row class: the column lies in row class
/// `class` and is shifted by `shift` steps along the periodic direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelEntry {
    pub class: usize,
    pub shift: isize,
    pub weight: f64,
}

/// Time-sliced short-time kernel on a grid.
///
/// One slice acts as `ψ'(q_a) = Σ_b K[a][b] ψ(q_b)`. The cell volume and
/// the `√g(q_a)` weight of the increment measure are absorbed by the row
/// normalisation, which makes the frozen-metric Gaussian sum to one. Rows are stored once per row class;
/// all rows of a class are periodic shifts of each other.
#[derive(Clone, Debug, Serialize)]
pub struct SlicedPropagator {
    pub manifold: Manifold,
    pub config: ShortTimeConfig,
    pub measure: MeasureMode,
    pub settings: KernelSettings,
    /// Number of slices represented by [`amplitude`](Self::amplitude).
    pub slice_count: usize,
    rows: Vec<Vec<KernelEntry>>,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Builds the sliced propagator with default kernel settings.
pub fn build_propagator(manifold: Manifold, cfg: &ShortTimeConfig, measure: MeasureMode) -> Result<SlicedPropagator> {
    SlicedPropagator::build(manifold, cfg, measure, KernelSettings::default())
}

impl SlicedPropagator {
    pub fn build(
        manifold: Manifold,
        cfg: &ShortTimeConfig,
        measure: MeasureMode,
        settings: KernelSettings,
    ) -> Result<Self> {
        cfg.validate()?;
        manifold.validate()?;
        if cfg.sign_mode == SignMode::RealTime {
            return Err(GeomError::InvalidParameter(
                "the transfer-matrix propagator needs imaginary time".into(),
            ));
        }
        if !(settings.cutoff > 0.0 && settings.max_hop_ratio > 0.0) {
            return Err(GeomError::InvalidParameter("kernel settings must be positive".into()));
        }
        let chart = manifold.chart();
        let sigma = cfg.sigma();
        let h = manifold.periodic_step();
        let r = manifold.radius();
        let hop = match manifold {
            Manifold::Ring { .. } => r * h,
            Manifold::Sphere { theta_points, .. } => r * (PI / theta_points as f64).max(h),
        };
        if hop / sigma > settings.max_hop_ratio {
            return Err(GeomError::GridTooCoarse {
                ratio: hop / sigma,
                limit: settings.max_hop_ratio,
            });
        }

        let n_per = manifold.periodic_points() as isize;
        let beta = cfg.mass / (2.0 * cfg.epsilon * cfg.hbar);
        let radius2 = (settings.cutoff * sigma).powi(2);
        let rotated = matches!(manifold, Manifold::Sphere { .. }) && settings.frame == SphereFrame::Rotated;
        let equator = if rotated {
            Some(ShortTimeExpansion::new(
                &chart.geometry(&[PI / 2.0, 0.0], Depth::Full)?,
                Variant::Affine,
            ))
        } else {
            None
        };
        let mut rows = Vec::with_capacity(manifold.row_classes());
        for class in 0..manifold.row_classes() {
            let qa = manifold.point(class * manifold.periodic_points());
            let e = match &equator {
                Some(e) => e.clone(),
                None => ShortTimeExpansion::new(&chart.geometry(&qa, Depth::Full)?, Variant::Affine),
            };
            let veff_factor = match measure {
                MeasureMode::QepViaVeff => cfg.epsilon * cfg.hbar * e.scalar_curvature / (6.0 * cfg.mass),
                _ => 0.0,
            };
            let mut entries = Vec::new();
            let mut flat = 0.0;
            // `ratio` converts the increment measure of the frame in which the
            // expansion is evaluated to the grid measure `d^D q_b √g(q_b)`.
            let mut push = |cls: usize, shift: isize, dq: &[f64], ratio: f64| -> Result<()> {
                let quad = e.quadratic(dq);
                if quad > radius2 {
                    return Ok(());
                }
                flat += ratio * (-beta * quad).exp();
                let jac = match measure {
                    MeasureMode::Qep => e.jacobian_qep(dq),
                    MeasureMode::NaiveDeWitt | MeasureMode::QepViaVeff => e.jacobian_naive(dq),
                };
                let expo = -beta * e.postpoint_bracket(dq) + jac + veff_factor;
                let w = ratio * expo.exp();
                if !(w.is_finite() && w > 0.0) {
                    return Err(GeomError::NonPositiveKernel {
                        row: class,
                        col: cls,
                        value: w,
                    });
                }
                entries.push(KernelEntry { class: cls, shift, weight: w });
                Ok(())
            };
            match manifold {
                Manifold::Ring { .. } => {
                    for s in -(n_per / 2)..=((n_per - 1) / 2) {
                        push(0, s, &[-(s as f64) * h], 1.0)?;
                    }
                }
                Manifold::Sphere { theta_points, .. } if rotated => {
                    let (sa, ca) = qa[0].sin_cos();
                    for jb in 0..theta_points {
                        let (sb, cb) = manifold.theta(jb).sin_cos();
                        for s in -(n_per / 2)..=((n_per - 1) / 2) {
                            let (sp, cp) = (s as f64 * h).sin_cos();
                            let (x, y, z) = (sb * cp, sb * sp, cb);
                            // rotation about the y axis taking q_a to (π/2, 0)
                            let xr = x * sa + z * ca;
                            let zr = -x * ca + z * sa;
                            let st = (xr * xr + y * y).sqrt();
                            if st < 1e-12 {
                                continue;
                            }
                            let dq = [zr.atan2(st), -y.atan2(xr)];
                            push(jb, s, &dq, sb / st)?;
                        }
                    }
                }
                Manifold::Sphere { theta_points, .. } => {
                    for jb in 0..theta_points {
                        let tb = manifold.theta(jb);
                        let dth = qa[0] - tb;
                        if r * r * dth * dth > radius2 {
                            continue;
                        }
                        let ratio = tb.sin() / qa[0].sin();
                        for s in -(n_per / 2)..=((n_per - 1) / 2) {
                            push(jb, s, &[dth, wrap(-(s as f64) * h)], ratio)?;
                        }
                    }
                }
            }
            let norm = 1.0 / flat;
            for en in &mut entries {
                en.weight *= norm;
            }
            rows.push(entries);
        }
        Ok(SlicedPropagator {
            manifold,
            config: *cfg,
            measure,
            settings,
            slice_count: 1,
            rows,
        })
    }

    pub fn size(&self) -> usize {
        self.manifold.size()
    }

    /// Stored entries of row class `class`.
    pub fn row_entries(&self, class: usize) -> &[KernelEntry] {
        &self.rows[class]
    }

    fn column(&self, row: usize, en: &KernelEntry) -> usize {
        let n = self.manifold.periodic_points() as isize;
        let k = (row % n as usize) as isize;
        en.class * n as usize + (k + en.shift).rem_euclid(n) as usize
    }

    fn class_of(&self, row: usize) -> usize {
        row / self.manifold.periodic_points()
    }

    /// One slice applied to a grid function.
    pub fn apply(&self, psi: &[f64]) -> Result<Vec<f64>> {
        if psi.len() != self.size() {
            return Err(GeomError::DimensionMismatch(format!(
                "grid function has {} values, grid has {}",
                psi.len(),
                self.size()
            )));
        }
        Ok((0..self.size())
            .map(|a| {
                self.rows[self.class_of(a)]
                    .iter()
                    .map(|en| en.weight * psi[self.column(a, en)])
                    .sum()
            })
            .collect())
    }

    /// Dense one-slice kernel matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for en in &self.rows[self.class_of(a)] {
                m[(a, self.column(a, en))] += en.weight;
            }
        }
        m
    }

    /// Dense kernel of `slice_count` consecutive slices.
    pub fn amplitude(&self) -> DMatrix<f64> {
        let k = self.dense();
        let mut out = k.clone();
        for _ in 1..self.slice_count.max(1) {
            out = &out * &k;
        }
        out
    }

    pub fn with_slices(mut self, n: usize) -> Self {
        self.slice_count = n.max(1);
        self
    }

    /// Dense composition `K_self ∘ K_other`.
    pub fn compose(&self, other: &SlicedPropagator) -> Result<DMatrix<f64>> {
        if self.manifold != other.manifold {
            return Err(GeomError::GridMismatch("propagators live on different grids".into()));
        }
        Ok(self.dense() * other.dense())
    }

    /// Fourier block of azimuthal number `m`: `K_m[j][j'] = Σ_k K[(j,0)][(j',k)] cos(m φ_k)`.
    /// On the ring this is the `1×1` eigenvalue of the mode `e^{imq}`.
    pub fn fourier_block(&self, m: usize) -> DMatrix<f64> {
        let c = self.manifold.row_classes();
        let h = self.manifold.periodic_step();
        let mut b = DMatrix::zeros(c, c);
        for (j, entries) in self.rows.iter().enumerate() {
            for en in entries {
                b[(j, en.class)] += en.weight * (m as f64 * en.shift as f64 * h).cos();
            }
        }
        b
    }

    /// Largest deviation from row sums of one, for diagnostics.
    pub fn row_sum_range(&self) -> (f64, f64) {
        let sums: Vec<f64> = self.rows.iter().map(|r| r.iter().map(|e| e.weight).sum()).collect();
        let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn entry_count(&self) -> usize {
        (0..self.manifold.row_classes())
            .map(|c| self.rows[c].len() * self.manifold.periodic_points())
            .sum()
    }
}
