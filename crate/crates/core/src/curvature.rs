//! Cartan and Riemann curvature, Ricci tensor, curvature scalar and Einstein
//! tensor.
//!
//! Both curvature tensors are the covariant curl of a connection,
//!
//! ```text
//! R_μνλ^κ = ∂_μ Γ_νλ^κ − ∂_ν Γ_μλ^κ − [Γ_μ, Γ_ν]_λ^κ,
//! [Γ_μ, Γ_ν]_λ^κ = Γ_μλ^σ Γ_νσ^κ − Γ_νλ^σ Γ_μσ^κ,
//! ```
//!
//! stored as `t[(μ, ν, λ, κ)]`. The Ricci tensor contracts the first index
//! with the upper one, `R_νλ = R_μνλ^μ`. With these conventions the round
//! sphere of radius `r` has curvature scalar `+2/r²`.

use serde::Serialize;

use crate::chart::Chart;
use crate::error::Result;
use crate::geometry::{Depth, GeometryPoint};
use crate::linalg::{Mat, Tensor3, Tensor4};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurvatureSource {
    /// Curvature of the affine connection `Γ`.
    Cartan,
    /// Curvature of the Christoffel connection `Γ̄`.
    Riemann,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureBundle<T> {
    pub cartan: Tensor4<T>,
    pub riemann: Tensor4<T>,
    /// Ricci tensor of the Riemann curvature.
    pub ricci: Mat<T>,
    /// Curvature scalar of the Riemann curvature.
    pub scalar: T,
    /// Einstein tensor of the Riemann curvature.
    pub einstein: Mat<T>,
}

/// Covariant curl of a connection `conn[(λ, κ, μ)]` with derivative
/// `conn_d[(σ, λ, κ, μ)]`.
pub fn curl<T: Real>(conn: &Tensor3<T>, conn_d: &Tensor4<T>) -> Tensor4<T> {
    let d = conn.dims()[0];
    Tensor4::from_fn([d, d, d, d], |m, n, l, k| {
        let mut r = conn_d[(m, n, l, k)] - conn_d[(n, m, l, k)];
        for s in 0..d {
            r -= conn[(m, l, s)] * conn[(n, s, k)] - conn[(n, l, s)] * conn[(m, s, k)];
        }
        r
    })
}

/// `R_νλ = R_μνλ^μ`.
pub fn ricci<T: Real>(curv: &Tensor4<T>) -> Mat<T> {
    let d = curv.dims()[0];
    Mat::from_fn(d, d, |n, l| (0..d).map(|m| curv[(m, n, l, m)]).sum())
}

/// `R = g^{νλ} R_νλ`.
pub fn scalar<T: Real>(ricci: &Mat<T>, metric_inv: &Mat<T>) -> T {
    let d = ricci.rows();
    let mut s = T::zero();
    for n in 0..d {
        for l in 0..d {
            s += metric_inv[(n, l)] * ricci[(n, l)];
        }
    }
    s
}

/// `G_μν = R_μν − ½ g_μν R`.
pub fn einstein<T: Real>(ricci: &Mat<T>, metric: &Mat<T>, scalar: T) -> Mat<T> {
    ricci.sub(&metric.scale(lit::<T>(0.5) * scalar))
}

impl<T: Real> CurvatureBundle<T> {
    pub fn from_geometry(p: &GeometryPoint<T>) -> Self {
        let cartan = curl(&p.gamma, p.gamma_d());
        let riemann = curl(&p.christoffel, p.christoffel_d());
        let ricci = ricci(&riemann);
        let scalar = scalar(&ricci, &p.metric_inv);
        let einstein = einstein(&ricci, &p.metric, scalar);
        CurvatureBundle {
            cartan,
            riemann,
            ricci,
            scalar,
            einstein,
        }
    }
}

pub fn curvature<T: Real>(chart: &Chart, q: &[T]) -> Result<CurvatureBundle<T>> {
    Ok(CurvatureBundle::from_geometry(&chart.geometry(q, Depth::Full)?))
}

pub fn cartan_curvature<T: Real>(chart: &Chart, q: &[T]) -> Result<Tensor4<T>> {
    let p = chart.geometry(q, Depth::Full)?;
    Ok(curl(&p.gamma, p.gamma_d()))
}

pub fn riemann_curvature<T: Real>(chart: &Chart, q: &[T]) -> Result<Tensor4<T>> {
    let p = chart.geometry(q, Depth::Full)?;
    Ok(curl(&p.christoffel, p.christoffel_d()))
}

/// Ricci tensor, curvature scalar and Einstein tensor of the chosen curvature.
pub fn ricci_scalar_einstein<T: Real>(
    chart: &Chart,
    q: &[T],
    source: CurvatureSource,
) -> Result<(Mat<T>, T, Mat<T>)> {
    let p = chart.geometry(q, Depth::Full)?;
    let curv = match source {
        CurvatureSource::Cartan => curl(&p.gamma, p.gamma_d()),
        CurvatureSource::Riemann => curl(&p.christoffel, p.christoffel_d()),
    };
    let ric = ricci(&curv);
    let s = scalar(&ric, &p.metric_inv);
    let g = einstein(&ric, &p.metric, s);
    Ok((ric, s, g))
}

/// `D̄_μ K_νλ^κ`, the Christoffel-covariant derivative of the contortion,
/// stored `[(μ, ν, λ, κ)]`.
pub fn contortion_covariant_derivative<T: Real>(p: &GeometryPoint<T>) -> Tensor4<T> {
    let d = p.dim;
    let k = &p.contortion;
    let kd = p.contortion_d();
    let c = &p.christoffel;
    Tensor4::from_fn([d, d, d, d], |m, n, l, kk| {
        let mut r = kd[(m, n, l, kk)];
        for s in 0..d {
            r += -c[(m, n, s)] * k[(s, l, kk)] - c[(m, l, s)] * k[(n, s, kk)] + c[(m, s, kk)] * k[(n, l, s)];
        }
        r
    })
}

/// Max-norm of `R − (R̄ + D̄_μK_ν − D̄_νK_μ − [K_μ, K_ν])`.
pub fn curvature_relation_residual<T: Real>(p: &GeometryPoint<T>) -> T {
    let d = p.dim;
    let cartan = curl(&p.gamma, p.gamma_d());
    let riemann = curl(&p.christoffel, p.christoffel_d());
    let dk = contortion_covariant_derivative(p);
    let k = &p.contortion;
    let mut worst = T::zero();
    for m in 0..d {
        for n in 0..d {
            for l in 0..d {
                for kk in 0..d {
                    let mut rhs = riemann[(m, n, l, kk)] + dk[(m, n, l, kk)] - dk[(n, m, l, kk)];
                    for s in 0..d {
                        rhs -= k[(m, l, s)] * k[(n, s, kk)] - k[(n, l, s)] * k[(m, s, kk)];
                    }
                    worst = worst.max((cartan[(m, n, l, kk)] - rhs).abs());
                }
            }
        }
    }
    worst
}

pub fn curvature_relation_check<T: Real>(chart: &Chart, q: &[T]) -> Result<T> {
    Ok(curvature_relation_residual(&chart.geometry(q, Depth::Full)?))
}

/// Cartan curvature of a square triad field computed from the triads alone,
/// `R_μνλ^κ = e_i^κ (∂_μ ∂_ν − ∂_ν ∂_μ) e^i_λ`. `None` for embeddings, where
/// the curvature also involves the normal bundle.
pub fn cartan_from_triads<T: Real>(p: &GeometryPoint<T>) -> Option<Tensor4<T>> {
    let d = p.dim;
    if p.ambient != d {
        return None;
    }
    let e2 = p.triad_d2();
    let inv = &p.reciprocal;
    Some(Tensor4::from_fn([d, d, d, d], |m, n, l, k| {
        (0..d).map(|i| inv[(k, i)] * (e2[(m, n, i, l)] - e2[(n, m, i, l)])).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    #[test]
    fn flat_charts_have_no_curvature() {
        for c in [library::cartesian(2), library::polar()] {
            let b: CurvatureBundle<f64> = curvature(&c, &[1.3, 0.4]).unwrap();
            assert!(b.cartan.max_abs() < 1e-12);
            assert!(b.riemann.max_abs() < 1e-12);
            assert!(b.ricci.max_abs() < 1e-12);
            assert!(b.scalar.abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_torsion_image_is_flat() {
        let c = library::synthetic_torsion(0.35);
        let r = cartan_curvature(&c, &[0.2, 0.9]).unwrap();
        assert!(r.max_abs() < 1e-12);
        let p = c.geometry(&[0.2, 0.9], Depth::Full).unwrap();
        let oracle = cartan_from_triads(&p).unwrap();
        assert!(r.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn sphere_curvature() {
        let r: f64 = 1.7;
        let c = library::sphere(r);
        let q = [0.8, 2.0];
        let b = curvature(&c, &q).unwrap();
        assert!((b.scalar - 2.0 / (r * r)).abs() < 1e-12);
        assert!(b.cartan.max_abs_diff(&b.riemann) < 1e-12);
        // single independent component: R̄_φθθ^φ = −R̄_θφθ^φ = 1, R̄_θθ = 1
        assert!((b.riemann[(0, 1, 0, 1)] + 1.0).abs() < 1e-12);
        assert!((b.ricci[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(b.einstein.max_abs() < 1e-12);
    }

    #[test]
    fn curvature_relation_with_torsion() {
        let c = library::synthetic_torsion(0.3);
        assert!(curvature_relation_check(&c, &[0.4, -0.2]).unwrap() < 1e-12);
        let d = library::dislocation(0.1);
        assert!(curvature_relation_check(&d, &[0.7, 0.5]).unwrap() < 1e-10);
    }

    #[test]
    fn antisymmetry_in_first_pair() {
        let b: CurvatureBundle<f64> = curvature(&library::sphere(1.0), &[1.1, 0.3]).unwrap();
        for m in 0..2 {
            for n in 0..2 {
                for l in 0..2 {
                    for k in 0..2 {
                        assert_eq!(b.riemann[(m, n, l, k)], -b.riemann[(n, m, l, k)]);
                    }
                }
            }
        }
    }
}
