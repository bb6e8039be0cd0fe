use crate::chart::Chart;
use crate::connection::Variant;
use crate::curvature::{curl, ricci, scalar};
use crate::error::{GeomError, Result};
use crate::geometry::Depth;
use crate::scalar::{lit, Real};

use super::{ShortTimeConfig, ShortTimeExpansion};

fn check_len<T>(chart: &Chart, dq: &[T]) -> Result<()> {
    if dq.len() != chart.dim() {
        return Err(GeomError::DimensionMismatch(format!(
            "increment has {} components, chart has dimension {}",
            dq.len(),
            chart.dim()
        )));
    }
    Ok(())
}

/// Naive Jacobian exponent `−Γ_μν^ν Δq^μ + ½ ∂_μ Γ_νκ^κ Δq^ν Δq^μ` at the
/// postpoint, using the affine connection.
pub fn jacobian_action_naive<T: Real>(chart: &Chart, q_post: &[T], dq: &[T]) -> Result<T> {
    jacobian_action_naive_with(chart, q_post, dq, Variant::Affine)
}

/// Naive Jacobian exponent with the traces taken from the chosen connection.
/// Both choices agree, since `Γ_μν^ν = Γ̄_μν^ν`.
pub fn jacobian_action_naive_with<T: Real>(chart: &Chart, q_post: &[T], dq: &[T], variant: Variant) -> Result<T> {
    check_len(chart, dq)?;
    Ok(ShortTimeExpansion::at(chart, q_post, variant)?.jacobian_naive(dq))
}

/// `ln(√g(q − Δq) / √g(q))`, the closed form of the naive exponent.
pub fn jacobian_naive_exact<T: Real>(chart: &Chart, q_post: &[T], dq: &[T]) -> Result<T> {
    check_len(chart, dq)?;
    let q_prev: Vec<T> = q_post.iter().zip(dq).map(|(&a, &b)| a - b).collect();
    let g1 = chart.metric(q_post)?.det().abs().sqrt();
    let g0 = chart.metric(&q_prev)?.det().abs().sqrt();
    Ok((g0 / g1).ln())
}

/// Jacobian exponent of the equivalence-principle measure.
pub fn jacobian_action_qep<T: Real>(chart: &Chart, q_post: &[T], dq: &[T]) -> Result<T> {
    check_len(chart, dq)?;
    Ok(ShortTimeExpansion::at(chart, q_post, Variant::Affine)?.jacobian_qep(dq))
}

/// Closed form of the equivalence-principle exponent: the log-determinant of
/// the cubic increment map.
pub fn jacobian_qep_exact<T: Real>(chart: &Chart, q_post: &[T], dq: &[T]) -> Result<T> {
    check_len(chart, dq)?;
    Ok(ShortTimeExpansion::at(chart, q_post, Variant::Affine)?.jacobian_qep_log_det(dq))
}

/// `A_J − A_J0` from the two second-order expansions.
pub fn delta_jacobian<T: Real>(chart: &Chart, q_post: &[T], dq: &[T]) -> Result<T> {
    check_len(chart, dq)?;
    let e = ShortTimeExpansion::at(chart, q_post, Variant::Affine)?;
    Ok(e.jacobian_qep(dq) - e.jacobian_naive(dq))
}

/// `A_J − A_J0` from the two closed forms.
pub fn delta_jacobian_exact<T: Real>(chart: &Chart, q_post: &[T], dq: &[T]) -> Result<T> {
    Ok(jacobian_qep_exact(chart, q_post, dq)? - jacobian_naive_exact(chart, q_post, dq)?)
}

/// `V_eff = −ħ² R̄ / (6M)`.
pub fn effective_potential<T: Real>(chart: &Chart, q: &[T], cfg: &ShortTimeConfig) -> Result<T> {
    cfg.validate()?;
    let p = chart.geometry(q, Depth::Full)?;
    let r = scalar(&ricci(&curl(&p.christoffel, p.christoffel_d())), &p.metric_inv);
    Ok(-lit::<T>(cfg.hbar * cfg.hbar / (6.0 * cfg.mass)) * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    #[test]
    fn polar_radial_increment() {
        let c = library::polar();
        let (r, d) = (1.5_f64, 0.01_f64);
        let a = jacobian_action_naive(&c, &[r, 0.7], &[d, 0.0]).unwrap();
        // second-order Taylor polynomial of ln((r − δ)/r)
        let expect = -d / r - d * d / (2.0 * r * r);
        assert!((a - expect).abs() < 1e-12);
        assert!((a - ((r - d) / r).ln()).abs() < d.powi(3));
    }

    #[test]
    fn naive_series_tracks_the_volume_ratio() {
        let c = library::sphere(1.0);
        let q = [1.1, 0.2];
        let err = |s: f64| {
            let dq = [0.1 * s, 0.07 * s];
            let a: f64 = jacobian_action_naive(&c, &q, &dq).unwrap();
            (a - jacobian_naive_exact(&c, &q, &dq).unwrap()).abs()
        };
        let order = (err(1.0) / err(0.5)).log2();
        assert!(order > 2.7, "observed order {order}");
    }

    #[test]
    fn trace_choice_is_irrelevant_for_the_naive_action() {
        let c = library::synthetic_torsion(0.3);
        let q = [0.4, -0.3];
        let dq = [0.06, 0.04];
        let a: f64 = jacobian_action_naive_with(&c, &q, &dq, Variant::Affine).unwrap();
        let b: f64 = jacobian_action_naive_with(&c, &q, &dq, Variant::Riemann).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn sphere_effective_potential() {
        let cfg = ShortTimeConfig::default();
        let r = 2.0;
        let v: f64 = effective_potential(&library::sphere(r), &[0.9, 0.0], &cfg).unwrap();
        assert!((v + 1.0 / (3.0 * r * r)).abs() < 1e-12);
    }
}
