use crate::chart::{Chart, ChartKind};
use crate::connection::Variant;
use crate::curvature::{curl, ricci, scalar};
use crate::error::{GeomError, Result};
use crate::geometry::{Depth, GeometryPoint};
use crate::linalg::{Mat, Tensor3, Tensor4};
use crate::scalar::{lit, Real};

use super::ShortTimeConfig;

/// Coefficients of the short-time expansions at one point, precomputed so
/// that many increments `Δq` can be evaluated cheaply.
///
/// The postpoint action is
///
/// ```text
/// A = (M/2ε) { g_μν Δ^μ Δ^ν − Γ_μνλ Δ^μ Δ^ν Δ^λ
///            + [⅓ g_μτ (∂_κ Γ_λν^τ + Γ_λν^δ Γ_{(κδ)}^τ) + ¼ Γ_λκ^σ Γ_μνσ] Δ^μ Δ^ν Δ^λ Δ^κ }
/// ```
///
/// with `Δq = q_n − q_{n−1}` and all coefficients at the postpoint `q_n`.
#[derive(Clone, Debug)]
pub struct ShortTimeExpansion<T> {
    pub dim: usize,
    pub metric: Mat<T>,
    pub sqrt_g: T,
    /// `Γ_μνλ`.
    pub cubic: Tensor3<T>,
    /// Quartic postpoint coefficient, flattened `[μ][ν][λ][κ]`.
    pub quartic: Tensor4<T>,
    /// Quartic midpoint coefficient `(1/12) g_κτ (∂_λ Γ_μν^τ + Γ_μν^δ Γ_{(λδ)}^τ)`, `[λ][μ][ν][κ]`.
    pub quartic_mid: Tensor4<T>,
    /// `Γ_μν^ν`.
    pub naive1: Vec<T>,
    /// `∂_μ Γ_νκ^κ`, `[μ][ν]`.
    pub naive2: Mat<T>,
    /// `Γ_{(μν)}^μ`, free index `ν`.
    pub qep1: Vec<T>,
    /// `C_{(μνσ)}^μ − Γ_{(μν)}^λ Γ_{(λσ)}^μ`, `[ν][σ]`.
    pub qep2: Mat<T>,
    /// `Γ_{(ρλ)}^μ`, `[ρ][λ][μ]`.
    pub gamma_sym: Tensor3<T>,
    /// `C_{(ρbc)}^μ`, `[ρ][b][c][μ]`.
    pub c_sym: Tensor4<T>,
    /// Ricci tensor of the Christoffel connection.
    pub ricci: Mat<T>,
    /// Curvature scalar of the Christoffel connection.
    pub scalar_curvature: T,
}

impl<T: Real> ShortTimeExpansion<T> {
    /// Builds the expansion with the affine connection (`Variant::Affine`) or
    /// the Christoffel connection (`Variant::Riemann`) in every
    /// connection-dependent coefficient.
    pub fn new(p: &GeometryPoint<T>, variant: Variant) -> Self {
        let d = p.dim;
        let (gam, gam_d) = match variant {
            Variant::Affine => (&p.gamma, p.gamma_d()),
            Variant::Riemann => (&p.christoffel, p.christoffel_d()),
        };
        let g = &p.metric;
        let half = lit::<T>(0.5);
        let cube = [d, d, d];
        let lowered = Tensor3::from_fn(cube, |m, n, l| (0..d).map(|k| g[(l, k)] * gam[(m, n, k)]).sum());
        let gs = Tensor3::from_fn(cube, |a, b, c| half * (gam[(a, b, c)] + gam[(b, a, c)]));
        // ∂_κ Γ_λν^τ + Γ_λν^δ Γ_{(κδ)}^τ  stored [κ][λ][ν][τ]
        let b = Tensor4::from_fn([d, d, d, d], |k, l, n, t| {
            gam_d[(k, l, n, t)] + (0..d).map(|dd| gam[(l, n, dd)] * gs[(k, dd, t)]).sum::<T>()
        });
        let third = lit::<T>(1.0 / 3.0);
        let quarter = lit::<T>(0.25);
        let quartic = Tensor4::from_fn([d, d, d, d], |m, n, l, k| {
            let a: T = (0..d).map(|t| g[(m, t)] * b[(k, l, n, t)]).sum();
            let c: T = (0..d).map(|s| gam[(l, k, s)] * lowered[(m, n, s)]).sum();
            third * a + quarter * c
        });
        let twelfth = lit::<T>(1.0 / 12.0);
        let quartic_mid = Tensor4::from_fn([d, d, d, d], |l, m, n, k| {
            twelfth * (0..d).map(|t| g[(k, t)] * b[(l, m, n, t)]).sum::<T>()
        });

        let naive1 = (0..d).map(|m| (0..d).map(|n| gam[(m, n, n)]).sum()).collect();
        let naive2 = Mat::from_fn(d, d, |m, n| (0..d).map(|k| gam_d[(m, n, k, k)]).sum());

        // C_abc^μ = ∂_c Γ_ab^μ + Γ_ab^τ Γ_{(cτ)}^μ = b[(c, a, b, μ)]
        let six = lit::<T>(1.0 / 6.0);
        let c_sym = Tensor4::from_fn([d, d, d, d], |a, bb, c, mu| {
            six * (b[(c, a, bb, mu)]
                + b[(bb, a, c, mu)]
                + b[(c, bb, a, mu)]
                + b[(a, bb, c, mu)]
                + b[(bb, c, a, mu)]
                + b[(a, c, bb, mu)])
        });
        let qep1 = (0..d).map(|n| (0..d).map(|m| gs[(m, n, m)]).sum()).collect();
        let qep2 = Mat::from_fn(d, d, |n, s| {
            let mut v = T::zero();
            for m in 0..d {
                v += c_sym[(m, n, s, m)];
                for l in 0..d {
                    v -= gs[(m, n, l)] * gs[(l, s, m)];
                }
            }
            v
        });

        let riemann = curl(&p.christoffel, p.christoffel_d());
        let ric = ricci(&riemann);
        let r = scalar(&ric, &p.metric_inv);
        ShortTimeExpansion {
            dim: d,
            metric: g.clone(),
            sqrt_g: p.sqrt_g,
            cubic: lowered,
            quartic,
            quartic_mid,
            naive1,
            naive2,
            qep1,
            qep2,
            gamma_sym: gs,
            c_sym,
            ricci: ric,
            scalar_curvature: r,
        }
    }

    pub fn at(chart: &Chart, q: &[T], variant: Variant) -> Result<Self> {
        Ok(ShortTimeExpansion::new(&chart.geometry(q, Depth::Full)?, variant))
    }

    /// `g_μν Δ^μ Δ^ν`.
    pub fn quadratic(&self, dq: &[T]) -> T {
        let d = self.dim;
        let mut s = T::zero();
        for m in 0..d {
            for n in 0..d {
                s += self.metric[(m, n)] * dq[m] * dq[n];
            }
        }
        s
    }

    fn contract3(t: &Tensor3<T>, dq: &[T]) -> T {
        let d = dq.len();
        let mut s = T::zero();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    s += t[(a, b, c)] * dq[a] * dq[b] * dq[c];
                }
            }
        }
        s
    }

    fn contract4(t: &Tensor4<T>, dq: &[T]) -> T {
        let d = dq.len();
        let mut s = T::zero();
        for a in 0..d {
            for b in 0..d {
                let ab = dq[a] * dq[b];
                for c in 0..d {
                    for e in 0..d {
                        s += t[(a, b, c, e)] * ab * dq[c] * dq[e];
                    }
                }
            }
        }
        s
    }

    /// Curly bracket of the postpoint action (the action without `M/2ε`).
    pub fn postpoint_bracket(&self, dq: &[T]) -> T {
        self.quadratic(dq) - Self::contract3(&self.cubic, dq) + Self::contract4(&self.quartic, dq)
    }

    /// Bracket of the midpoint action, coefficients at this (mid)point.
    pub fn midpoint_bracket(&self, dq: &[T]) -> T {
        self.quadratic(dq) + Self::contract4(&self.quartic_mid, dq)
    }

    /// Naive Jacobian exponent `−Γ_μν^ν Δ^μ + ½ ∂_μ Γ_νκ^κ Δ^ν Δ^μ`.
    pub fn jacobian_naive(&self, dq: &[T]) -> T {
        let d = self.dim;
        let half = lit::<T>(0.5);
        let mut s = T::zero();
        for m in 0..d {
            s -= self.naive1[m] * dq[m];
            for n in 0..d {
                s += half * self.naive2[(m, n)] * dq[n] * dq[m];
            }
        }
        s
    }

    /// Jacobian exponent of the equivalence-principle measure,
    /// `−Γ_{(μν)}^μ Δ^ν + ½ [C_{(μνσ)}^μ − Γ_{(μν)}^λ Γ_{(λσ)}^μ] Δ^ν Δ^σ`.
    pub fn jacobian_qep(&self, dq: &[T]) -> T {
        let d = self.dim;
        let half = lit::<T>(0.5);
        let mut s = T::zero();
        for n in 0..d {
            s -= self.qep1[n] * dq[n];
            for m in 0..d {
                s += half * self.qep2[(n, m)] * dq[n] * dq[m];
            }
        }
        s
    }

    /// `ln det ∂ξ/∂Δq` for the cubic increment map
    /// `ξ^μ = Δ^μ − ½ Γ_νλ^μ Δ^ν Δ^λ + (1/6) C_abc^μ Δ^a Δ^b Δ^c`,
    /// whose second-order expansion is [`jacobian_qep`](Self::jacobian_qep).
    pub fn jacobian_qep_log_det(&self, dq: &[T]) -> T {
        let d = self.dim;
        let half = lit::<T>(0.5);
        let j = Mat::from_fn(d, d, |mu, rho| {
            let mut v = if mu == rho { T::one() } else { T::zero() };
            for l in 0..d {
                v -= self.gamma_sym[(rho, l, mu)] * dq[l];
                for c in 0..d {
                    v += half * self.c_sym[(rho, l, c, mu)] * dq[l] * dq[c];
                }
            }
            v
        });
        j.det().ln()
    }

    /// `(1/6) R̄_μν Δ^μ Δ^ν`.
    pub fn ricci_quadratic(&self, dq: &[T]) -> T {
        let d = self.dim;
        let mut s = T::zero();
        for m in 0..d {
            for n in 0..d {
                s += self.ricci[(m, n)] * dq[m] * dq[n];
            }
        }
        s / lit::<T>(6.0)
    }
}

fn prefactor<T: Real>(cfg: &ShortTimeConfig) -> Result<T> {
    cfg.validate()?;
    Ok(lit::<T>(cfg.mass / (2.0 * cfg.epsilon)))
}

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

/// Short-time postpoint action with the affine connection.
pub fn postpoint_action<T: Real>(chart: &Chart, q_post: &[T], dq: &[T], cfg: &ShortTimeConfig) -> Result<T> {
    postpoint_action_with(chart, q_post, dq, cfg, Variant::Affine)
}

/// Postpoint action with the chosen connection in every coefficient.
pub fn postpoint_action_with<T: Real>(
    chart: &Chart,
    q_post: &[T],
    dq: &[T],
    cfg: &ShortTimeConfig,
    variant: Variant,
) -> Result<T> {
    check_len(chart, dq)?;
    let pre = prefactor::<T>(cfg)?;
    Ok(pre * ShortTimeExpansion::at(chart, q_post, variant)?.postpoint_bracket(dq))
}

/// Prepoint form: `Δq → −Δq` with the coefficients at the prepoint
/// `q_pre = q_post − Δq`.
pub fn prepoint_action<T: Real>(chart: &Chart, q_pre: &[T], dq: &[T], cfg: &ShortTimeConfig) -> Result<T> {
    let minus: Vec<T> = dq.iter().map(|&x| -x).collect();
    postpoint_action(chart, q_pre, &minus, cfg)
}

/// Midpoint action `(M/2ε)[g(q̄) ΔΔ + (1/12) g_κτ (∂_λ Γ_μν^τ + Γ_μν^δ Γ_{(λδ)}^τ) ΔΔΔΔ]`.
pub fn midpoint_action<T: Real>(chart: &Chart, q_mid: &[T], dq: &[T], cfg: &ShortTimeConfig) -> Result<T> {
    check_len(chart, dq)?;
    let pre = prefactor::<T>(cfg)?;
    Ok(pre * ShortTimeExpansion::at(chart, q_mid, Variant::Affine)?.midpoint_bracket(dq))
}

/// Fourth-order torsion contribution to the postpoint action: the full
/// action minus the same expansion built from the Christoffel connection.
pub fn torsion_quartic_term<T: Real>(chart: &Chart, q_post: &[T], dq: &[T], cfg: &ShortTimeConfig) -> Result<T> {
    let full = postpoint_action_with(chart, q_post, dq, cfg, Variant::Affine)?;
    let riem = postpoint_action_with(chart, q_post, dq, cfg, Variant::Riemann)?;
    Ok(full - riem)
}

/// Exact action `(M/2ε) |x(q) − x(q − Δq)|²` of a map chart.
pub fn exact_map_action<T: Real>(chart: &Chart, q_post: &[T], dq: &[T], cfg: &ShortTimeConfig) -> Result<T> {
    if chart.kind() != ChartKind::Map {
        return Err(GeomError::InvalidParameter("the exact action needs a map chart".into()));
    }
    check_len(chart, dq)?;
    let pre = prefactor::<T>(cfg)?;
    let q_prev: Vec<T> = q_post.iter().zip(dq).map(|(&a, &b)| a - b).collect();
    let x1 = chart.map_point(q_post)?;
    let x0 = chart.map_point(&q_prev)?;
    Ok(pre * x1.iter().zip(&x0).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>())
}
