//! Riemann and affine connections, torsion, contortion and covariant
//! derivatives at a point.

use serde::Serialize;

use crate::chart::{Chart, VectorField};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::geometry::{Depth, GeometryPoint};
use crate::jet::Jet;
use crate::linalg::{Mat, Tensor3};
use crate::scalar::Real;

/// Point-local connection data. Index layouts:
/// `gamma_bar_first[(λ, ν, μ)] = Γ̄_λνμ`, `gamma_bar[(λ, ν, μ)] = Γ̄_λν^μ`,
/// `gamma[(λ, κ, μ)] = Γ_λκ^μ`, `torsion[(λ, κ, μ)] = S_λκ^μ`,
/// `contortion[(μ, ν, λ)] = K_μν^λ`.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionBundle<T> {
    pub gamma_bar_first: Tensor3<T>,
    pub gamma_bar: Tensor3<T>,
    pub gamma: Tensor3<T>,
    pub torsion: Tensor3<T>,
    pub contortion: Tensor3<T>,
    pub metric: Mat<T>,
    pub inverse_metric: Mat<T>,
}

impl<T: Real> ConnectionBundle<T> {
    pub fn from_geometry(p: &GeometryPoint<T>) -> Self {
        ConnectionBundle {
            gamma_bar_first: p.christoffel_first.clone(),
            gamma_bar: p.christoffel.clone(),
            gamma: p.gamma.clone(),
            torsion: p.torsion.clone(),
            contortion: p.contortion.clone(),
            metric: p.metric.clone(),
            inverse_metric: p.metric_inv.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.rows()
    }

    /// Contracted torsion `S_μ = S_μλ^λ`.
    pub fn torsion_vector(&self) -> Vec<T> {
        let d = self.dim();
        (0..d).map(|m| (0..d).map(|l| self.torsion[(m, l, l)]).sum()).collect()
    }

    /// Residuals of the algebraic identities every connection bundle obeys.
    pub fn residuals(&self) -> ConnectionResiduals<T> {
        let d = self.dim();
        let g = &self.metric;
        let mut r = ConnectionResiduals::<T>::default();
        let lower = |t: &Tensor3<T>, a: usize, b: usize, c: usize| -> T {
            (0..d).map(|k| g[(c, k)] * t[(a, b, k)]).sum()
        };
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let cs = (self.gamma_bar[(a, b, c)] - self.gamma_bar[(b, a, c)]).abs();
                    r.christoffel_symmetry = r.christoffel_symmetry.max(cs);
                    let ts = (self.torsion[(a, b, c)] + self.torsion[(b, a, c)]).abs();
                    r.torsion_antisymmetry = r.torsion_antisymmetry.max(ts);
                    let ks = (lower(&self.contortion, a, b, c) + lower(&self.contortion, a, c, b)).abs();
                    r.contortion_antisymmetry = r.contortion_antisymmetry.max(ks);
                    let dec = (self.gamma[(a, b, c)] - self.gamma_bar[(a, b, c)] - self.contortion[(a, b, c)]).abs();
                    r.decomposition = r.decomposition.max(dec);
                }
            }
            let tr: T = (0..d).map(|n| self.gamma[(a, n, n)] - self.gamma_bar[(a, n, n)]).sum();
            r.trace_identity = r.trace_identity.max(tr.abs());
        }
        r
    }
}

/// Max-norm residuals of the connection identities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ConnectionResiduals<T> {
    /// `Γ̄_λν^μ − Γ̄_νλ^μ`
    pub christoffel_symmetry: T,
    /// `S_λκ^μ + S_κλ^μ`
    pub torsion_antisymmetry: T,
    /// `K_μνλ + K_μλν`
    pub contortion_antisymmetry: T,
    /// `Γ − Γ̄ − K`
    pub decomposition: T,
    /// `Γ_μν^ν − Γ̄_μν^ν`
    pub trace_identity: T,
}

impl<T: Real> ConnectionResiduals<T> {
    pub fn max(&self) -> T {
        [
            self.christoffel_symmetry,
            self.torsion_antisymmetry,
            self.contortion_antisymmetry,
            self.decomposition,
            self.trace_identity,
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }
}

pub fn connection<T: Real>(chart: &Chart, q: &[T]) -> Result<ConnectionBundle<T>> {
    Ok(ConnectionBundle::from_geometry(&chart.geometry(q, Depth::Connection)?))
}

/// Christoffel symbols of the first and second kind.
pub fn christoffel<T: Real>(chart: &Chart, q: &[T]) -> Result<(Tensor3<T>, Tensor3<T>)> {
    let p = chart.geometry(q, Depth::Connection)?;
    Ok((p.christoffel_first, p.christoffel))
}

pub fn affine_connection<T: Real>(chart: &Chart, q: &[T]) -> Result<Tensor3<T>> {
    Ok(chart.geometry(q, Depth::Connection)?.gamma)
}

pub fn torsion_tensor<T: Real>(chart: &Chart, q: &[T]) -> Result<Tensor3<T>> {
    Ok(chart.geometry(q, Depth::Connection)?.torsion)
}

pub fn contortion<T: Real>(chart: &Chart, q: &[T]) -> Result<Tensor3<T>> {
    Ok(chart.geometry(q, Depth::Connection)?.contortion)
}

/// Which connection a covariant derivative uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Christoffel connection `Γ̄`.
    Riemann,
    /// Affine connection `Γ`.
    Affine,
}

/// Whether the field components carry an upper or a lower index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variance {
    Upper,
    Lower,
}

/// Covariant derivative of a vector field: entry `(μ, ν)` is `D_μ v^ν`
/// (upper) or `D_μ v_ν` (lower).
pub fn covariant_derivative<T: Real>(
    chart: &Chart,
    q: &[T],
    field: &VectorField,
    variant: Variant,
    variance: Variance,
) -> Result<Mat<T>> {
    let d = chart.dim();
    if field.dim() != d {
        return Err(GeomError::DimensionMismatch(format!(
            "field has {} components, chart has dimension {d}",
            field.dim()
        )));
    }
    let p = chart.geometry(q, Depth::Connection)?;
    let conn = match variant {
        Variant::Riemann => &p.christoffel,
        Variant::Affine => &p.gamma,
    };
    let (v, dv) = field.eval_with_gradient(q);
    Ok(Mat::from_fn(d, d, |mu, nu| {
        let corr: T = (0..d)
            .map(|l| match variance {
                Variance::Upper => conn[(mu, l, nu)] * v[l],
                Variance::Lower => -conn[(mu, nu, l)] * v[l],
            })
            .sum();
        dv[(mu, nu)] + corr
    }))
}

/// Covariant derivative of a scalar field `f`, identical for both variants:
/// `D_μ f = D̄_μ f = ∂_μ f`.
pub fn scalar_derivative<T: Real>(chart: &Chart, q: &[T], f: &str, _variant: Variant) -> Result<Vec<T>> {
    chart.check_point(q)?;
    let expr = Expr::parse(f, &chart.scope()).map_err(|source| GeomError::Parse { index: 0, source })?;
    let jet = expr.eval(&Jet::seed(q, 1), chart.param_values());
    Ok((0..q.len()).map(|m| jet.d1(m)).collect())
}

/// `D_μ g_νλ = ∂_μ g_νλ − Γ_μν^κ g_κλ − Γ_μλ^κ g_νκ`, max-norm. Vanishes for
/// the triad-induced affine connection.
pub fn metricity_residual<T: Real>(p: &GeometryPoint<T>) -> T {
    let d = p.dim;
    let g = &p.metric;
    let mut worst = T::zero();
    for m in 0..d {
        for n in 0..d {
            for l in 0..d {
                let mut r = p.metric_d1[(m, n, l)];
                for k in 0..d {
                    r -= p.gamma[(m, n, k)] * g[(k, l)] + p.gamma[(m, l, k)] * g[(n, k)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    #[test]
    fn cartesian_connections_vanish() {
        let c = library::cartesian(2);
        let b = connection(&c, &[0.4, -1.2]).unwrap();
        assert_eq!(b.gamma_bar.max_abs(), 0.0);
        assert_eq!(b.gamma.max_abs(), 0.0);
        assert_eq!(b.torsion.max_abs(), 0.0);
        assert_eq!(b.contortion.max_abs(), 0.0);
    }

    #[test]
    fn polar_christoffel_symbols() {
        let r: f64 = 1.7;
        let (_, cs) = christoffel(&library::polar(), &[r, 0.3]).unwrap();
        assert!((cs[(1, 1, 0)] + r).abs() < 1e-14); // Γ̄_θθ^r
        assert!((cs[(0, 1, 1)] - 1.0 / r).abs() < 1e-14); // Γ̄_rθ^θ
        assert!((cs[(1, 0, 1)] - 1.0 / r).abs() < 1e-14);
    }

    #[test]
    fn sphere_christoffel_symbol() {
        let th: f64 = 0.9;
        let (_, cs) = christoffel(&library::sphere(2.0), &[th, 1.1]).unwrap();
        assert!((cs[(1, 1, 0)] + th.sin() * th.cos()).abs() < 1e-14);
    }

    #[test]
    fn holonomic_affine_connection_is_christoffel() {
        let b = connection(&library::polar(), &[1.3, 0.8]).unwrap();
        assert!(b.gamma.max_abs_diff(&b.gamma_bar) < 1e-14);
        assert!(b.torsion.max_abs() < 1e-15);
    }

    #[test]
    fn synthetic_torsion_connection() {
        let alpha = 0.25;
        let c = library::synthetic_torsion(alpha);
        let q1 = 0.6;
        let g = affine_connection(&c, &[q1, 0.1]).unwrap();
        assert!((g[(0, 1, 1)] - alpha / (1.0 + alpha * q1)).abs() < 1e-15);
        assert_eq!(g[(1, 0, 1)], 0.0);
        let s = torsion_tensor(&c, &[0.0, 0.1]).unwrap();
        assert!((s[(0, 1, 1)] - alpha / 2.0).abs() < 1e-15);
        let res = connection(&c, &[q1, 0.1]).unwrap().residuals();
        assert!(res.max() < 1e-12, "{res:?}");
    }

    #[test]
    fn dislocation_torsion_vanishes_off_origin() {
        let s = torsion_tensor(&library::dislocation(0.1), &[1.0, 1.0]).unwrap();
        assert!(s.max_abs() < 1e-10);
    }

    #[test]
    fn covariant_derivatives() {
        let polar = library::polar();
        let r: f64 = 1.6;
        let v = VectorField::parse(&polar, &["1", "0"]).unwrap();
        let d = covariant_derivative(&polar, &[r, 0.2], &v, Variant::Riemann, Variance::Upper).unwrap();
        assert!((d[(1, 1)] - 1.0 / r).abs() < 1e-14);

        let cart = library::cartesian(2);
        let k = VectorField::parse(&cart, &["2", "-3"]).unwrap();
        for variant in [Variant::Riemann, Variant::Affine] {
            for variance in [Variance::Upper, Variance::Lower] {
                let d = covariant_derivative(&cart, &[0.1, 0.2], &k, variant, variance).unwrap();
                assert_eq!(d.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn scalar_derivative_is_partial_derivative() {
        let c = library::synthetic_torsion(0.4);
        for variant in [Variant::Riemann, Variant::Affine] {
            let g: Vec<f64> = scalar_derivative(&c, &[0.5, 2.0], "q1^2*q2", variant).unwrap();
            assert!((g[0] - 2.0).abs() < 1e-15);
            assert!((g[1] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn triad_connection_is_metric_compatible() {
        for c in [library::synthetic_torsion(0.3), library::dislocation(0.1), library::sphere(1.2)] {
            let p = c.geometry(&[0.7, 0.4], Depth::Connection).unwrap();
            assert!(metricity_residual(&p) < 1e-12);
        }
    }
}
