use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

use super::propagator::KernelSettings;
use super::{Manifold, MeasureMode, ShortTimeConfig, SlicedPropagator};

/// Default ε ladder in natural units.
pub const DEFAULT_LADDER: [f64; 4] = [0.08, 0.04, 0.02, 0.01];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    pub ladder: Vec<f64>,
    /// Number of distinct levels to report.
    pub n_levels: usize,
    /// Relative tolerance for grouping numerically degenerate levels.
    pub degeneracy_tol: f64,
    pub kernel: KernelSettings,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        SpectrumSettings {
            ladder: DEFAULT_LADDER.to_vec(),
            n_levels: 4,
            degeneracy_tol: 1e-6,
            kernel: KernelSettings::default(),
        }
    }
}

impl SpectrumSettings {
    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() || self.ladder.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(GeomError::InvalidParameter(format!(
                "ε ladder must be non-empty and positive, got {:?}",
                self.ladder
            )));
        }
        if self.n_levels == 0 {
            return Err(GeomError::InvalidParameter("n_levels must be at least 1".into()));
        }
        if !(self.degeneracy_tol > 0.0) {
            return Err(GeomError::InvalidParameter("degeneracy_tol must be positive".into()));
        }
        Ok(())
    }
}

/// One (possibly degenerate) energy level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Structural quantum number when the grid provides one (`l` on the sphere).
    pub label: Option<usize>,
    pub degeneracy: usize,
    /// Extrapolated energy.
    pub energy: f64,
    /// Mean energy of the group at each ε of the ladder.
    pub raw: Vec<f64>,
    /// Largest spread inside the group at the finest ε.
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub manifold: Manifold,
    pub measure: MeasureMode,
    pub mass: f64,
    pub hbar: f64,
    pub ladder: Vec<f64>,
    pub extrapolation_order: u32,
    pub levels: Vec<Level>,
    /// Largest imaginary part met among the kept eigenvalues, relative to
    /// the eigenvalue.
    pub max_relative_imaginary: f64,
}

impl SpectrumReport {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn degeneracies(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.degeneracy).collect()
    }
}

/// First-order Richardson step from a coarse and a fine estimate whose step
/// sizes differ by `ratio`, assuming an error `∝ ε^order`.
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: u32) -> f64 {
    let f = ratio.powi(order as i32);
    (f * fine - coarse) / (f - 1.0)
}

fn energy(lambda: f64, cfg: &ShortTimeConfig) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(GeomError::EigenFailure(format!("kernel eigenvalue {lambda:e} is not positive")));
    }
    Ok(-(cfg.hbar / cfg.epsilon) * lambda.ln())
}

/// Groups of energies at one ε, one group per level (sorted ascending).
struct Slice {
    groups: Vec<Vec<f64>>,
    labels: Vec<Option<usize>>,
    max_imag: f64,
}

fn ring_slice(prop: &SlicedPropagator, count: usize) -> Result<Slice> {
    let k = prop.dense();
    let asym = (&k - k.transpose()).amax();
    if asym > 1e-12 * k.amax() {
        return Err(GeomError::EigenFailure(format!("ring kernel is not symmetric (asymmetry {asym:e})")));
    }
    let eig = SymmetricEigen::try_new(k, 1e-14, 10_000)
        .ok_or_else(|| GeomError::EigenFailure("symmetric eigen-solver did not converge".into()))?;
    let mut lambdas: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let energies = lambdas
        .into_iter()
        .take(count)
        .map(|l| energy(l, &prop.config))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Slice {
        groups: energies.into_iter().map(|e| vec![e]).collect(),
        labels: Vec::new(),
        max_imag: 0.0,
    })
}

fn sphere_slice(prop: &SlicedPropagator, lmax: usize) -> Result<Slice> {
    let mut groups = vec![Vec::new(); lmax + 1];
    let mut max_imag: f64 = 0.0;
    for m in 0..=lmax {
        let block = prop.fourier_block(m);
        let mut ev: Vec<(f64, f64)> = block.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        ev.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (k, &(re, im)) in ev.iter().take(lmax + 1 - m).enumerate() {
            max_imag = max_imag.max(im.abs() / re.abs());
            let e = energy(re, &prop.config)?;
            let copies = if m == 0 { 1 } else { 2 };
            groups[m + k].extend(std::iter::repeat(e).take(copies));
        }
    }
    Ok(Slice {
        labels: (0..=lmax).map(Some).collect(),
        groups,
        max_imag,
    })
}

fn slice_for(prop: &SlicedPropagator, n_levels: usize) -> Result<Slice> {
    match prop.manifold {
        Manifold::Ring { points, .. } => ring_slice(prop, (2 * n_levels + 1).min(points)),
        Manifold::Sphere { .. } => sphere_slice(prop, n_levels - 1),
    }
}

/// Splits a sorted list of energies into runs of numerically equal values.
fn group_sizes(energies: &[f64], tol: f64, unit: f64) -> Vec<usize> {
    let mut sizes: Vec<usize> = Vec::new();
    let mut start = 0;
    for i in 1..=energies.len() {
        let split = i == energies.len() || {
            let (a, b) = (energies[start], energies[i]);
            (b - a).abs() > tol * a.abs().max(b.abs()).max(unit)
        };
        if split {
            sizes.push(i - start);
            start = i;
        }
    }
    sizes
}

fn regroup(flat: &[f64], sizes: &[usize]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut i = 0;
    for &s in sizes {
        out.push(flat[i..i + s].to_vec());
        i += s;
    }
    out
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Energy levels of the sliced propagator over the ε ladder, extrapolated to
/// `ε → 0` with a first-order Richardson step on the two finest rungs.
///
/// Energies are `E = −(ħ/ε) ln λ` with `λ` the kernel eigenvalues; the row
/// normalisation fixes `λ_norm = 1`.
pub fn extract_spectrum(
    manifold: Manifold,
    cfg: &ShortTimeConfig,
    measure: MeasureMode,
    settings: &SpectrumSettings,
) -> Result<SpectrumReport> {
    settings.validate()?;
    let mut ladder = settings.ladder.clone();
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup();
    let mut slices = Vec::with_capacity(ladder.len());
    for &eps in &ladder {
        let prop = SlicedPropagator::build(manifold, &cfg.with_epsilon(eps), measure, settings.kernel)?;
        slices.push(slice_for(&prop, settings.n_levels)?);
    }
    let max_imag = slices.iter().map(|s| s.max_imag).fold(0.0, f64::max);

    let unit = cfg.hbar * cfg.hbar / (cfg.mass * manifold.radius().powi(2));
    let finest = slices.last().expect("ladder is non-empty");
    let (groups_per_eps, labels): (Vec<Vec<Vec<f64>>>, Vec<Option<usize>>) = if finest.labels.is_empty() {
        let flat_fine: Vec<f64> = finest.groups.iter().flatten().cloned().collect();
        let mut sizes = group_sizes(&flat_fine, settings.degeneracy_tol, unit);
        let mut total: usize = 0;
        sizes.retain(|&s| {
            let keep = total + s <= flat_fine.len();
            total += s;
            keep
        });
        sizes.truncate(settings.n_levels);
        let per = slices
            .iter()
            .map(|s| {
                let flat: Vec<f64> = s.groups.iter().flatten().cloned().collect();
                regroup(&flat, &sizes)
            })
            .collect();
        (per, vec![None; sizes.len()])
    } else {
        (slices.iter().map(|s| s.groups.clone()).collect(), finest.labels.clone())
    };

    let n = labels.len();
    let mut levels = Vec::with_capacity(n);
    for (i, label) in labels.into_iter().enumerate() {
        let raw: Vec<f64> = groups_per_eps.iter().map(|g| mean(&g[i])).collect();
        let fine_group = &groups_per_eps[groups_per_eps.len() - 1][i];
        let spread = fine_group.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - fine_group.iter().cloned().fold(f64::INFINITY, f64::min);
        let energy = if raw.len() >= 2 {
            let k = raw.len();
            richardson(raw[k - 2], raw[k - 1], ladder[k - 2] / ladder[k - 1], 1)
        } else {
            raw[0]
        };
        levels.push(Level {
            label,
            degeneracy: fine_group.len(),
            energy,
            raw,
            spread,
        });
    }
    Ok(SpectrumReport {
        manifold,
        measure,
        mass: cfg.mass,
        hbar: cfg.hbar,
        ladder,
        extrapolation_order: 1,
        levels,
        max_relative_imaginary: max_imag,
    })
}
