//! Geodesics, autoparallels, nonholonomic variations and the torsion-modified
//! Euler-Lagrange residual.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::expr::{Expr, Scope};
use crate::geometry::{Depth, GeometryPoint};
use crate::linalg::Mat;
use crate::scalar::{lit, to_f64, Real};
use crate::tolerance::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState<T> {
    pub t: T,
    pub q: Vec<T>,
    pub qdot: Vec<T>,
}

/// Which connection drives the equation of motion `q̈^μ + C_λν^μ q̇^λ q̇^ν = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flow {
    /// Christoffel connection: shortest lines.
    Geodesic,
    /// Affine connection: straightest lines.
    Autoparallel,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory<T> {
    pub flow: Flow,
    pub states: Vec<TrajectoryState<T>>,
    /// Set when the run stopped early at an inadmissible point.
    pub truncated: Option<String>,
    /// `max |E(t) − E(0)| / E(0)` with `E = ½ g q̇ q̇`.
    pub energy_drift: T,
    /// True when the drift exceeds the tolerance the run was made with.
    pub drift_flagged: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &TrajectoryState<T> {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

fn acceleration<T: Real>(p: &GeometryPoint<T>, flow: Flow, v: &[T]) -> Vec<T> {
    let d = p.dim;
    let conn = match flow {
        Flow::Geodesic => &p.christoffel,
        Flow::Autoparallel => &p.gamma,
    };
    (0..d)
        .map(|m| {
            let mut a = T::zero();
            for l in 0..d {
                for n in 0..d {
                    a -= conn[(l, n, m)] * v[l] * v[n];
                }
            }
            a
        })
        .collect()
}

fn axpy<T: Real>(x: &[T], a: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&x, &y)| x + a * y).collect()
}

/// Integrates a geodesic or autoparallel with classical fixed-step RK4. The
/// step is shrunk slightly if needed so that `t_span` is covered by a whole
/// number of steps.
pub fn integrate<T: Real>(
    chart: &Chart,
    flow: Flow,
    q0: &[T],
    qdot0: &[T],
    t_span: (T, T),
    step: T,
    tol: &Tolerances,
) -> Result<Trajectory<T>> {
    let d = chart.dim();
    if q0.len() != d || qdot0.len() != d {
        return Err(GeomError::DimensionMismatch(format!(
            "initial state must have {d} coordinates and {d} velocities"
        )));
    }
    if !(step > T::zero()) || !(t_span.1 > t_span.0) {
        return Err(GeomError::InvalidParameter("step and time span must be positive".into()));
    }
    let span = t_span.1 - t_span.0;
    let n = (span / step - lit::<T>(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let h = span / T::from_usize(n).unwrap();
    let half = lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let two = lit::<T>(2.0);

    let p0 = chart.geometry(q0, Depth::Connection)?;
    let e0 = p0.kinetic(qdot0);
    let mut states = vec![TrajectoryState {
        t: t_span.0,
        q: q0.to_vec(),
        qdot: qdot0.to_vec(),
    }];
    let mut drift = T::zero();
    let mut truncated = None;
    let accel = |q: &[T], v: &[T]| -> Result<Vec<T>> {
        let p = chart.geometry(q, Depth::Connection)?;
        Ok(acceleration(&p, flow, v))
    };

    let mut q = q0.to_vec();
    let mut v = qdot0.to_vec();
    for k in 0..n {
        let step_result = (|| -> Result<(Vec<T>, Vec<T>)> {
            let k1q = v.clone();
            let k1v = accel(&q, &v)?;
            let q2 = axpy(&q, half * h, &k1q);
            let v2 = axpy(&v, half * h, &k1v);
            let k2v = accel(&q2, &v2)?;
            let q3 = axpy(&q, half * h, &v2);
            let v3 = axpy(&v, half * h, &k2v);
            let k3v = accel(&q3, &v3)?;
            let q4 = axpy(&q, h, &v3);
            let v4 = axpy(&v, h, &k3v);
            let k4v = accel(&q4, &v4)?;
            let qn = (0..d)
                .map(|i| q[i] + sixth * h * (k1q[i] + two * v2[i] + two * v3[i] + v4[i]))
                .collect::<Vec<_>>();
            let vn = (0..d)
                .map(|i| v[i] + sixth * h * (k1v[i] + two * k2v[i] + two * k3v[i] + k4v[i]))
                .collect::<Vec<_>>();
            Ok((qn, vn))
        })();
        let (qn, vn) = match step_result {
            Ok(x) => x,
            Err(e) => {
                truncated = Some(e.to_string());
                break;
            }
        };
        let p = match chart.geometry(&qn, Depth::Connection) {
            Ok(p) => p,
            Err(e) => {
                truncated = Some(e.to_string());
                break;
            }
        };
        if e0 > T::zero() {
            drift = drift.max(((p.kinetic(&vn) - e0) / e0).abs());
        }
        q = qn;
        v = vn;
        states.push(TrajectoryState {
            t: t_span.0 + T::from_usize(k + 1).unwrap() * h,
            q: q.clone(),
            qdot: v.clone(),
        });
    }
    Ok(Trajectory {
        flow,
        states,
        truncated,
        energy_drift: drift,
        drift_flagged: to_f64(drift) > tol.energy_drift,
    })
}

/// Solves `q̈^μ + Γ̄_λν^μ q̇^λ q̇^ν = 0`.
pub fn integrate_geodesic<T: Real>(
    chart: &Chart,
    q0: &[T],
    qdot0: &[T],
    t_span: (T, T),
    step: T,
) -> Result<Trajectory<T>> {
    integrate(chart, Flow::Geodesic, q0, qdot0, t_span, step, &Tolerances::from_env())
}

/// Solves `q̈^μ + Γ_λν^μ q̇^λ q̇^ν = 0`.
pub fn integrate_autoparallel<T: Real>(
    chart: &Chart,
    q0: &[T],
    qdot0: &[T],
    t_span: (T, T),
    step: T,
) -> Result<Trajectory<T>> {
    integrate(chart, Flow::Autoparallel, q0, qdot0, t_span, step, &Tolerances::from_env())
}

/// Discretized length `Σ sqrt(g_μν(q̄) Δq^μ Δq^ν)` of a polygonal path, with
/// the metric at segment midpoints.
pub fn polygon_length<T: Real>(chart: &Chart, points: &[Vec<T>]) -> Result<T> {
    let half = lit::<T>(0.5);
    let mut len = T::zero();
    for w in points.windows(2) {
        let mid: Vec<T> = w[0].iter().zip(&w[1]).map(|(&a, &b)| half * (a + b)).collect();
        let dq: Vec<T> = w[1].iter().zip(&w[0]).map(|(&a, &b)| a - b).collect();
        let g = chart.metric(&mid)?;
        let mut s = T::zero();
        for m in 0..dq.len() {
            for n in 0..dq.len() {
                s += g[(m, n)] * dq[m] * dq[n];
            }
        }
        len += s.sqrt();
    }
    Ok(len)
}

/// Holonomic variation `δq(t)`: one expression per coordinate in the variable
/// `t`, with the named parameters plus `ta` and `tb` (the end times).
#[derive(Clone, Debug)]
pub struct VariationExpr {
    sources: Vec<String>,
    params: BTreeMap<String, f64>,
}

impl VariationExpr {
    pub fn new<S: AsRef<str>>(components: &[S], params: BTreeMap<String, f64>) -> Result<Self> {
        let v = VariationExpr {
            sources: components.iter().map(|s| s.as_ref().to_owned()).collect(),
            params,
        };
        v.compile(0.0, 1.0)?;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.sources.len()
    }

    pub fn components(&self) -> &[String] {
        &self.sources
    }

    fn compile(&self, ta: f64, tb: f64) -> Result<(Vec<Expr>, Vec<f64>)> {
        let mut params = self.params.clone();
        params.insert("ta".into(), ta);
        params.insert("tb".into(), tb);
        let names: Vec<&str> = params.keys().map(|s| s.as_str()).collect();
        let scope = Scope::new(&["t"], &names);
        let exprs = self
            .sources
            .iter()
            .enumerate()
            .map(|(index, s)| Expr::parse(s, &scope).map_err(|source| GeomError::Parse { index, source }))
            .collect::<Result<Vec<_>>>()?;
        Ok((exprs, params.values().copied().collect()))
    }

    /// Samples `δq` at the given times.
    pub fn sample<T: Real>(&self, times: &[T]) -> Result<Vec<Vec<T>>> {
        let (ta, tb) = match (times.first(), times.last()) {
            (Some(&a), Some(&b)) => (to_f64(a), to_f64(b)),
            _ => return Ok(Vec::new()),
        };
        let (exprs, params) = self.compile(ta, tb)?;
        Ok(times
            .iter()
            .map(|&t| exprs.iter().map(|e| e.eval(&[t], &params)).collect())
            .collect())
    }
}

/// Result of a nonholonomic variation along a base trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct VariationRun<T> {
    pub times: Vec<T>,
    pub delta_q: Vec<Vec<T>>,
    /// `G^μ_λ = Γ_λν^μ q̇^ν` at each sample.
    pub g: Vec<Mat<T>>,
    /// `Σ^μ_ν = 2 S_λν^μ q̇^λ` at each sample.
    pub sigma: Vec<Mat<T>>,
    /// `δ̄b(t)` at each sample.
    pub delta_b: Vec<Vec<T>>,
}

/// `G^μ_λ = Γ_λν^μ q̇^ν`.
pub fn g_matrix<T: Real>(p: &GeometryPoint<T>, qdot: &[T]) -> Mat<T> {
    let d = p.dim;
    Mat::from_fn(d, d, |m, l| (0..d).map(|n| p.gamma[(l, n, m)] * qdot[n]).sum())
}

/// `Σ^μ_ν = 2 S_λν^μ q̇^λ`.
pub fn sigma_matrix<T: Real>(p: &GeometryPoint<T>, qdot: &[T]) -> Mat<T> {
    let d = p.dim;
    let two = lit::<T>(2.0);
    Mat::from_fn(d, d, |m, n| (0..d).map(|l| two * p.torsion[(l, n, m)] * qdot[l]).sum())
}

/// Checks that `times` is an increasing uniform grid and returns its step.
pub fn uniform_step<T: Real>(times: &[T]) -> Result<T> {
    if times.len() < 2 {
        return Err(GeomError::GridMismatch("need at least two samples".into()));
    }
    let n = times.len() - 1;
    let h = (times[n] - times[0]) / T::from_usize(n).unwrap();
    if !(h > T::zero()) {
        return Err(GeomError::GridMismatch("times must increase".into()));
    }
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > lit::<T>(1e-6) * h {
            return Err(GeomError::GridMismatch(format!("sample {k} breaks the uniform time grid")));
        }
    }
    Ok(h)
}

/// Solves `dδ̄b/dt = −G δ̄b + Σ δq`, `δ̄b(t_a) = 0`, on a uniform grid.
///
/// Pairs of steps are advanced with a single exponential factor
/// `exp(−∫G)` (Simpson rule for the exponent) and a Simpson rule for the
/// source convolution; odd samples are filled in with a trapezoid step from
/// the preceding even sample. The propagator is therefore an ordered product
/// of per-step exponentials whose error is dominated by the neglected
/// commutators of `G` at different times.
pub fn solve_variation<T: Real>(times: &[T], g: &[Mat<T>], sigma: &[Mat<T>], delta_q: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = times.len();
    if g.len() != n || sigma.len() != n || delta_q.len() != n {
        return Err(GeomError::GridMismatch(format!(
            "{} times, {} G, {} Σ and {} δq samples",
            n,
            g.len(),
            sigma.len(),
            delta_q.len()
        )));
    }
    let h = uniform_step(times)?;
    let d = g[0].rows();
    let half = lit::<T>(0.5);
    let third = lit::<T>(1.0 / 3.0);
    let four = lit::<T>(4.0);
    let src: Vec<Vec<T>> = (0..n).map(|k| sigma[k].mul_vec(&delta_q[k])).collect();
    let trap_factor = |a: usize, b: usize| g[a].add(&g[b]).scale(-half * h).expm();

    let mut b = vec![vec![T::zero(); d]; n];
    let trapezoid = |from: &Vec<T>, k: usize| -> Vec<T> {
        let u = trap_factor(k, k + 1);
        let ub = u.mul_vec(from);
        let us = u.mul_vec(&src[k]);
        (0..d).map(|i| ub[i] + half * h * (us[i] + src[k + 1][i])).collect()
    };
    let mut k = 0;
    while k + 2 < n {
        // advance two steps k → k+2
        let omega = g[k].add(&g[k + 1].scale(four)).add(&g[k + 2]).scale(-third * h);
        let u_full = omega.expm();
        let u_half = trap_factor(k + 1, k + 2);
        let a = u_full.mul_vec(&b[k]);
        let s0 = u_full.mul_vec(&src[k]);
        let s1 = u_half.mul_vec(&src[k + 1]);
        b[k + 1] = trapezoid(&b[k], k);
        b[k + 2] = (0..d)
            .map(|i| a[i] + third * h * (s0[i] + four * s1[i] + src[k + 2][i]))
            .collect();
        k += 2;
    }
    if k + 1 < n {
        b[k + 1] = trapezoid(&b[k], k);
    }
    Ok(b)
}

/// Nonholonomic variation along `base` driven by the holonomic variation
/// `deltaq`, which must vanish at both ends.
pub fn nonholonomic_variation<T: Real>(
    chart: &Chart,
    base: &[TrajectoryState<T>],
    deltaq: &VariationExpr,
) -> Result<VariationRun<T>> {
    let d = chart.dim();
    if deltaq.dim() != d {
        return Err(GeomError::DimensionMismatch(format!(
            "variation has {} components, chart has dimension {d}",
            deltaq.dim()
        )));
    }
    let times: Vec<T> = base.iter().map(|s| s.t).collect();
    uniform_step(&times)?;
    let delta_q = deltaq.sample(&times)?;
    let scale = delta_q
        .iter()
        .flatten()
        .fold(T::zero(), |m, &x| m.max(x.abs()))
        .max(T::one());
    let ends = [&delta_q[0], &delta_q[delta_q.len() - 1]];
    if ends.iter().flat_map(|v| v.iter()).any(|&x| x.abs() > lit::<T>(1e-10) * scale) {
        return Err(GeomError::InvalidParameter(
            "holonomic variation must vanish at both end points".into(),
        ));
    }
    let mut g = Vec::with_capacity(base.len());
    let mut sigma = Vec::with_capacity(base.len());
    for s in base {
        let p = chart.geometry(&s.q, Depth::Connection)?;
        g.push(g_matrix(&p, &s.qdot));
        sigma.push(sigma_matrix(&p, &s.qdot));
    }
    let delta_b = solve_variation(&times, &g, &sigma, &delta_q)?;
    Ok(VariationRun {
        times,
        delta_q,
        g,
        sigma,
        delta_b,
    })
}

/// Euler-Lagrange residual along a sampled trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct ElResidual<T> {
    /// Times at which the residual was evaluated (two samples are dropped at
    /// each end).
    pub times: Vec<T>,
    pub residual: Vec<Vec<T>>,
    /// Max-norm over the whole run.
    pub max: T,
}

/// `∂L/∂q^λ − d/dt ∂L/∂q̇^λ − 2 S_λμ^ν q̇^μ ∂L/∂q̇^ν` with
/// `L = ½ M g_μν q̇^μ q̇^ν`; the time derivative uses five-point central
/// differences.
pub fn torsion_el_residual<T: Real>(chart: &Chart, traj: &[TrajectoryState<T>], mass: T) -> Result<ElResidual<T>> {
    if traj.len() < 5 {
        return Err(GeomError::InsufficientSampling(format!(
            "five-point differences need at least 5 samples, got {}",
            traj.len()
        )));
    }
    let times: Vec<T> = traj.iter().map(|s| s.t).collect();
    let h = uniform_step(&times)?;
    let d = chart.dim();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let mut geo = Vec::with_capacity(traj.len());
    let mut mom = Vec::with_capacity(traj.len());
    for s in traj {
        let p = chart.geometry(&s.q, Depth::Connection)?;
        mom.push(p.metric.mul_vec(&s.qdot).into_iter().map(|x| mass * x).collect::<Vec<T>>());
        geo.push(p);
    }
    let c = [lit::<T>(1.0 / 12.0), lit::<T>(-8.0 / 12.0), lit::<T>(8.0 / 12.0), lit::<T>(-1.0 / 12.0)];
    let mut out_t = Vec::new();
    let mut out = Vec::new();
    let mut worst = T::zero();
    for k in 2..traj.len() - 2 {
        let p = &geo[k];
        let v = &traj[k].qdot;
        let r: Vec<T> = (0..d)
            .map(|l| {
                let mut dl = T::zero();
                for a in 0..d {
                    for b in 0..d {
                        dl += half * mass * p.metric_d1[(l, a, b)] * v[a] * v[b];
                    }
                }
                let dp = (c[0] * mom[k - 2][l] + c[1] * mom[k - 1][l] + c[2] * mom[k + 1][l] + c[3] * mom[k + 2][l]) / h;
                let mut tors = T::zero();
                for m in 0..d {
                    for n in 0..d {
                        tors += two * p.torsion[(l, m, n)] * v[m] * mom[k][n];
                    }
                }
                dl - dp - tors
            })
            .collect();
        worst = r.iter().fold(worst, |w, x| w.max(x.abs()));
        out_t.push(times[k]);
        out.push(r);
    }
    Ok(ElResidual {
        times: out_t,
        residual: out,
        max: worst,
    })
}

/// `2 S_μν^λ q̇^μ δq^ν`, the failure of `δ` and `d/dt` to commute.
pub fn commutation_defect<T: Real>(chart: &Chart, q: &[T], qdot: &[T], deltaq: &[T]) -> Result<Vec<T>> {
    let d = chart.dim();
    if qdot.len() != d || deltaq.len() != d {
        return Err(GeomError::DimensionMismatch("velocity and variation must match the chart".into()));
    }
    let p = chart.geometry(q, Depth::Connection)?;
    let two = lit::<T>(2.0);
    Ok((0..d)
        .map(|l| {
            let mut s = T::zero();
            for m in 0..d {
                for n in 0..d {
                    s += two * p.torsion[(m, n, l)] * qdot[m] * deltaq[n];
                }
            }
            s
        })
        .collect())
}
