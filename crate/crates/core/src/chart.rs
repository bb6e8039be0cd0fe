//! Coordinate charts.
//!
//! A chart is either a holonomic map `x^i(q)` (the triads are its Jacobian)
//! or a directly supplied triad field `e^i_μ(q)`, which need not be
//! integrable. Maps may embed the `D`-dimensional coordinate space in a
//! higher-dimensional flat space (for example the sphere in R³); the triad is
//! then rectangular and the reciprocal triad is its left inverse.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::{Expr, Scope};
use crate::geometry::{Depth, GeometryPoint};
use crate::jet::{Jet, MAX_VARS};
use crate::linalg::{Mat, Tensor3, Tensor4};
use crate::scalar::{lit, to_f64, Real};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    /// Holonomic map `x^i(q)`.
    Map,
    /// Triad field `e^i_μ(q)`, row-major in `(i, μ)`.
    Triad,
}

/// On-disk chart definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub kind: ChartKind,
    pub exprs: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Points are admitted iff this expression evaluates to a positive number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Chart {
    file: ChartFile,
    exprs: Vec<Expr>,
    guard: Option<Expr>,
    param_values: Vec<f64>,
    ambient: usize,
    det_floor: f64,
}

impl Chart {
    pub fn new(file: ChartFile) -> Result<Chart> {
        let d = file.dim;
        if d == 0 || d > MAX_VARS {
            return Err(GeomError::DimensionMismatch(format!(
                "dim must be between 1 and {MAX_VARS}, got {d}"
            )));
        }
        let n = file.exprs.len();
        let ambient = match file.kind {
            ChartKind::Map => {
                if n < d {
                    return Err(GeomError::DimensionMismatch(format!(
                        "a map of dimension {d} needs at least {d} expressions, got {n}"
                    )));
                }
                n
            }
            ChartKind::Triad => {
                if n != d * d {
                    return Err(GeomError::DimensionMismatch(format!(
                        "a triad field of dimension {d} needs {} expressions, got {n}",
                        d * d
                    )));
                }
                d
            }
        };
        for (k, v) in &file.params {
            if !v.is_finite() {
                return Err(GeomError::InvalidParameter(format!("{k} = {v}")));
            }
        }
        let names: Vec<&str> = file.params.keys().map(|s| s.as_str()).collect();
        let scope = Scope::coordinates(d, &names);
        let exprs = file
            .exprs
            .iter()
            .enumerate()
            .map(|(index, s)| Expr::parse(s, &scope).map_err(|source| GeomError::Parse { index, source }))
            .collect::<Result<Vec<_>>>()?;
        let guard = file
            .guard
            .as_deref()
            .map(|g| Expr::parse(g, &scope).map_err(|source| GeomError::Parse { index: n, source }))
            .transpose()?;
        let param_values = file.params.values().copied().collect();
        Ok(Chart {
            file,
            exprs,
            guard,
            param_values,
            ambient,
            det_floor: Tolerances::default().det_floor,
        })
    }

    pub fn from_json(text: &str) -> Result<Chart> {
        let file: ChartFile = serde_json::from_str(text)?;
        Chart::new(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Chart> {
        let text = std::fs::read_to_string(path)?;
        Chart::from_json(&text)
    }

    pub fn file(&self) -> &ChartFile {
        &self.file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("chart file serializes")
    }

    pub fn name(&self) -> Option<&str> {
        self.file.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.file.dim
    }

    /// Number of flat coordinates `x^i`.
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn kind(&self) -> ChartKind {
        self.file.kind
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.file.params.get(name).copied()
    }

    pub fn param_names(&self) -> Vec<&str> {
        self.file.params.keys().map(|s| s.as_str()).collect()
    }

    /// Copy of the chart with one parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Chart> {
        if !self.file.params.contains_key(name) {
            return Err(GeomError::InvalidParameter(format!("chart has no parameter `{name}`")));
        }
        let mut file = self.file.clone();
        file.params.insert(name.to_owned(), value);
        let mut c = Chart::new(file)?;
        c.det_floor = self.det_floor;
        Ok(c)
    }

    pub fn with_det_floor(mut self, floor: f64) -> Chart {
        self.det_floor = floor;
        self
    }

    pub fn det_floor(&self) -> f64 {
        self.det_floor
    }

    pub fn scope(&self) -> Scope {
        Scope::coordinates(self.dim(), &self.param_names())
    }

    pub(crate) fn param_values(&self) -> &[f64] {
        &self.param_values
    }

    pub fn admits<T: Real>(&self, q: &[T]) -> bool {
        if q.len() != self.dim() || q.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match &self.guard {
            None => true,
            Some(g) => g.eval(q, &self.param_values) > T::zero(),
        }
    }

    pub(crate) fn check_point<T: Real>(&self, q: &[T]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "point has {} coordinates, chart has dimension {}",
                q.len(),
                self.dim()
            )));
        }
        if !self.admits(q) {
            return Err(GeomError::SingularPoint {
                point: q.iter().map(|&x| to_f64(x)).collect(),
            });
        }
        Ok(())
    }

    /// Flat coordinates `x^i(q)` of a map chart.
    pub fn map_point<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        if self.kind() != ChartKind::Map {
            return Err(GeomError::InvalidParameter(
                "only map charts have single-valued flat coordinates".into(),
            ));
        }
        self.check_point(q)?;
        Ok(self.exprs.iter().map(|e| e.eval(q, &self.param_values)).collect())
    }

    /// Triad entries as jets, row-major `(i, μ)`, carrying `order` derivative
    /// orders of the triad itself.
    pub(crate) fn triad_jets<T: Real>(&self, q: &[T], order: u8) -> Vec<Jet<T>> {
        let d = self.dim();
        match self.kind() {
            ChartKind::Map => {
                let vars = Jet::seed(q, order + 1);
                let xs: Vec<Jet<T>> = self.exprs.iter().map(|e| e.eval(&vars, &self.param_values)).collect();
                let mut out = Vec::with_capacity(self.ambient * d);
                for x in &xs {
                    for mu in 0..d {
                        out.push(x.partial(mu));
                    }
                }
                out
            }
            ChartKind::Triad => {
                let vars = Jet::seed(q, order);
                self.exprs.iter().map(|e| e.eval(&vars, &self.param_values)).collect()
            }
        }
    }

    /// `|det e|` for square triads, `sqrt(det g)` for embeddings.
    fn volume_factor<T: Real>(&self, e: &Mat<T>) -> T {
        if e.rows() == e.cols() {
            e.det().abs()
        } else {
            e.transpose().mul(e).det().max(T::zero()).sqrt()
        }
    }

    /// Triad `e^i_μ(q)`; rows are flat indices `i`, columns coordinate indices `μ`.
    pub fn eval_triad<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        self.check_point(q)?;
        let d = self.dim();
        let e = match self.kind() {
            ChartKind::Triad => Mat::from_fn(d, d, |i, mu| self.exprs[i * d + mu].eval(q, &self.param_values)),
            ChartKind::Map => {
                let jets = self.triad_jets(q, 0);
                Mat::from_fn(self.ambient, d, |i, mu| jets[i * d + mu].val())
            }
        };
        let det = self.volume_factor(&e);
        if !(to_f64(det) >= self.det_floor) {
            return Err(GeomError::DegenerateTriad {
                point: q.iter().map(|&x| to_f64(x)).collect(),
                det: to_f64(det),
                floor: self.det_floor,
            });
        }
        Ok(e)
    }

    /// Reciprocal triad `e_i^μ`, a `D × n` matrix with `e_i^μ e^i_ν = δ^μ_ν`.
    pub fn reciprocal_triad<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        let e = self.eval_triad(q)?;
        reciprocal_of(&e).ok_or_else(|| GeomError::NonInvertibleMetric {
            point: q.iter().map(|&x| to_f64(x)).collect(),
        })
    }

    /// Induced metric `g_μν = e^i_μ e^i_ν`.
    pub fn metric<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        let e = self.eval_triad(q)?;
        Ok(e.transpose().mul(&e))
    }

    /// Exact triad derivatives: order 1 gives `[λ][i][κ] = ∂_λ e^i_κ`, order 2
    /// gives `[σ][λ][i][κ] = ∂_σ ∂_λ e^i_κ`.
    pub fn triad_derivatives<T: Real>(&self, q: &[T], order: u8) -> Result<TriadDerivative<T>> {
        self.check_point(q)?;
        let d = self.dim();
        let n = self.ambient;
        match order {
            1 => {
                let jets = self.triad_jets(q, 1);
                Ok(TriadDerivative::First(Tensor3::from_fn([d, n, d], |l, i, k| {
                    jets[i * d + k].d1(l)
                })))
            }
            2 => {
                let jets = self.triad_jets(q, 2);
                Ok(TriadDerivative::Second(Tensor4::from_fn([d, d, n, d], |s, l, i, k| {
                    jets[i * d + k].d2(l, s)
                })))
            }
            _ => Err(GeomError::InvalidParameter(format!("derivative order must be 1 or 2, got {order}"))),
        }
    }

    /// All local tensors at `q`.
    pub fn geometry<T: Real>(&self, q: &[T], depth: Depth) -> Result<GeometryPoint<T>> {
        self.eval_triad(q)?;
        let order = match depth {
            Depth::Connection => 1,
            Depth::Full => 2,
        };
        let jets = self.triad_jets(q, order);
        GeometryPoint::from_triad_jets(q, self.ambient, &jets, depth).ok_or_else(|| {
            GeomError::NonInvertibleMetric {
                point: q.iter().map(|&x| to_f64(x)).collect(),
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TriadDerivative<T> {
    First(Tensor3<T>),
    Second(Tensor4<T>),
}

/// Left inverse `g⁻¹ eᵀ` of a full-column-rank triad.
pub fn reciprocal_of<T: Real>(e: &Mat<T>) -> Option<Mat<T>> {
    if e.rows() == e.cols() {
        return e.inverse();
    }
    let g = e.transpose().mul(e);
    Some(g.inverse()?.mul(&e.transpose()))
}

/// Vector (or covector) field given by one expression per component.
#[derive(Clone, Debug)]
pub struct VectorField {
    exprs: Vec<Expr>,
    params: Vec<f64>,
}

impl VectorField {
    /// Parses component expressions in the variables and parameters of `chart`.
    pub fn parse<S: AsRef<str>>(chart: &Chart, components: &[S]) -> Result<VectorField> {
        if components.len() != chart.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "field has {} components, chart has dimension {}",
                components.len(),
                chart.dim()
            )));
        }
        let scope = chart.scope();
        let exprs = components
            .iter()
            .enumerate()
            .map(|(index, s)| Expr::parse(s.as_ref(), &scope).map_err(|source| GeomError::Parse { index, source }))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            exprs,
            params: chart.param_values().to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.exprs.len()
    }

    pub fn eval<T: Real>(&self, q: &[T]) -> Vec<T> {
        self.exprs.iter().map(|e| e.eval(q, &self.params)).collect()
    }

    /// Components and their gradients: `(v, [μ][ν] = ∂_μ v_ν)`.
    pub fn eval_with_gradient<T: Real>(&self, q: &[T]) -> (Vec<T>, Mat<T>) {
        let vars = Jet::seed(q, 1);
        let jets: Vec<Jet<T>> = self.exprs.iter().map(|e| e.eval(&vars, &self.params)).collect();
        let d = q.len();
        let v = jets.iter().map(|j| j.val()).collect();
        let grad = Mat::from_fn(d, jets.len(), |mu, nu| jets[nu].d1(mu));
        (v, grad)
    }
}

/// Central finite-difference gradient of a scalar function; test helper for
/// checking the jets.
pub fn central_difference<T: Real>(f: impl Fn(&[T]) -> T, q: &[T], step: T) -> Vec<T> {
    let two = lit::<T>(2.0);
    (0..q.len())
        .map(|i| {
            let mut p = q.to_vec();
            p[i] = q[i] + step;
            let fp = f(&p);
            p[i] = q[i] - step;
            let fm = f(&p);
            (fp - fm) / (two * step)
        })
        .collect()
}
