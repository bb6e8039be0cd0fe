//! All local tensors of a chart at one point.
//!
//! The triad is evaluated as a field of [`Jet`]s and every derived quantity
//! (metric, inverse metric, reciprocal triad, connections, torsion,
//! contortion) is computed in jet arithmetic. Derivatives of the connections,
//! needed for curvature and for the short-time expansions, are then read off
//! the jets instead of being differenced numerically.
//!
//! Index conventions follow the connection `Γ_λκ^μ = e_i^μ ∂_λ e^i_κ`: the
//! first lower slot is the derivative slot. Tensors are stored with the upper
//! index last, and derivative tensors put the extra derivative slot first,
//! e.g. `gamma_d[(σ, λ, κ, μ)] = ∂_σ Γ_λκ^μ`.

use crate::jet::Jet;
use crate::linalg::{Mat, Tensor3, Tensor4};
use crate::scalar::{lit, Real};

/// How many derivative orders of the connection to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    /// Connections only.
    Connection,
    /// Connections and their first derivatives (curvature, short-time expansions).
    Full,
}

#[derive(Clone, Debug)]
pub struct GeometryPoint<T> {
    pub q: Vec<T>,
    pub dim: usize,
    pub ambient: usize,
    /// `e^i_μ`, `ambient × dim`.
    pub triad: Mat<T>,
    /// `e_i^μ`, `dim × ambient`.
    pub reciprocal: Mat<T>,
    /// `[λ][i][κ] = ∂_λ e^i_κ`.
    pub triad_d1: Tensor3<T>,
    /// `[σ][λ][i][κ] = ∂_σ ∂_λ e^i_κ`.
    pub triad_d2: Option<Tensor4<T>>,
    pub metric: Mat<T>,
    pub metric_inv: Mat<T>,
    /// `sqrt(det g)`.
    pub sqrt_g: T,
    /// `[λ][μ][ν] = ∂_λ g_μν`.
    pub metric_d1: Tensor3<T>,
    /// Christoffel symbol of the first kind, `[λ][ν][μ] = Γ̄_λνμ`.
    pub christoffel_first: Tensor3<T>,
    /// Christoffel symbol of the second kind, `[λ][ν][μ] = Γ̄_λν^μ`.
    pub christoffel: Tensor3<T>,
    pub christoffel_d: Option<Tensor4<T>>,
    /// Affine connection `[λ][κ][μ] = Γ_λκ^μ`.
    pub gamma: Tensor3<T>,
    pub gamma_d: Option<Tensor4<T>>,
    /// Torsion `[λ][κ][μ] = S_λκ^μ`.
    pub torsion: Tensor3<T>,
    pub torsion_d: Option<Tensor4<T>>,
    /// Contortion `[μ][ν][λ] = K_μν^λ`.
    pub contortion: Tensor3<T>,
    pub contortion_d: Option<Tensor4<T>>,
}

type J<T> = Jet<T>;

fn jz<T: Real>() -> J<T> {
    Jet::constant(T::zero())
}

/// Gauss-Jordan inverse of a row-major `n × n` jet matrix.
fn invert<T: Real>(a: &[J<T>], n: usize) -> Option<Vec<J<T>>> {
    let mut a = a.to_vec();
    let mut inv: Vec<J<T>> = (0..n * n)
        .map(|k| Jet::constant(if k / n == k % n { T::one() } else { T::zero() }))
        .collect();
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.val().abs()));
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x * n + c].val().abs().partial_cmp(&a[y * n + c].val().abs()).unwrap())
            .unwrap();
        if a[p * n + c].val().abs() <= scale * T::epsilon() {
            return None;
        }
        if p != c {
            for k in 0..n {
                a.swap(p * n + k, c * n + k);
                inv.swap(p * n + k, c * n + k);
            }
        }
        let piv = a[c * n + c].recip();
        for k in 0..n {
            a[c * n + k] = a[c * n + k] * piv;
            inv[c * n + k] = inv[c * n + k] * piv;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r * n + c];
            for k in 0..n {
                a[r * n + k] = a[r * n + k] - f * a[c * n + k];
                inv[r * n + k] = inv[r * n + k] - f * inv[c * n + k];
            }
        }
    }
    Some(inv)
}

fn values3<T: Real>(dims: [usize; 3], j: &[J<T>]) -> Tensor3<T> {
    Tensor3::from_fn(dims, |a, b, c| j[(a * dims[1] + b) * dims[2] + c].val())
}

fn derivs3<T: Real>(d: usize, j: &[J<T>]) -> Tensor4<T> {
    Tensor4::from_fn([d, d, d, d], |s, a, b, c| j[(a * d + b) * d + c].d1(s))
}

impl<T: Real> GeometryPoint<T> {
    /// Builds the point from triad jets (row-major `(i, μ)`); `None` when the
    /// metric is singular.
    pub(crate) fn from_triad_jets(q: &[T], ambient: usize, e: &[J<T>], depth: Depth) -> Option<Self> {
        let d = q.len();
        let n = ambient;
        let half = Jet::constant(lit::<T>(0.5));
        let full = depth == Depth::Full;

        // metric and inverse
        let mut g = vec![jz::<T>(); d * d];
        for mu in 0..d {
            for nu in 0..d {
                let mut s = jz();
                for i in 0..n {
                    s = s + e[i * d + mu] * e[i * d + nu];
                }
                g[mu * d + nu] = s;
            }
        }
        let ginv = invert(&g, d)?;

        // reciprocal triad e_i^μ = g^{μν} e^i_ν
        let mut einv = vec![jz::<T>(); d * n];
        for mu in 0..d {
            for i in 0..n {
                let mut s = jz();
                for nu in 0..d {
                    s = s + ginv[mu * d + nu] * e[i * d + nu];
                }
                einv[mu * n + i] = s;
            }
        }

        // ∂_λ e^i_κ as [λ][i][κ]
        let mut de = Vec::with_capacity(d * n * d);
        for l in 0..d {
            for i in 0..n {
                for k in 0..d {
                    de.push(e[i * d + k].partial(l));
                }
            }
        }

        // Γ_λκ^μ = e_i^μ ∂_λ e^i_κ
        let mut gamma = vec![jz::<T>(); d * d * d];
        for l in 0..d {
            for k in 0..d {
                for mu in 0..d {
                    let mut s = jz();
                    for i in 0..n {
                        s = s + einv[mu * n + i] * de[(l * n + i) * d + k];
                    }
                    gamma[(l * d + k) * d + mu] = s;
                }
            }
        }

        // ∂_λ g_μν and Christoffel symbols
        let mut dg = Vec::with_capacity(d * d * d);
        for l in 0..d {
            for m in 0..d {
                for v in 0..d {
                    dg.push(g[m * d + v].partial(l));
                }
            }
        }
        let mut cf = vec![jz::<T>(); d * d * d];
        for l in 0..d {
            for v in 0..d {
                for m in 0..d {
                    cf[(l * d + v) * d + m] =
                        half * (dg[(l * d + v) * d + m] + dg[(v * d + l) * d + m] - dg[(m * d + l) * d + v]);
                }
            }
        }
        let mut cs = vec![jz::<T>(); d * d * d];
        for l in 0..d {
            for v in 0..d {
                for m in 0..d {
                    let mut s = jz();
                    for sg in 0..d {
                        s = s + ginv[m * d + sg] * cf[(l * d + v) * d + sg];
                    }
                    cs[(l * d + v) * d + m] = s;
                }
            }
        }

        // torsion S_λκ^μ and contortion K_μν^λ
        let mut tor = vec![jz::<T>(); d * d * d];
        for l in 0..d {
            for k in 0..d {
                for m in 0..d {
                    tor[(l * d + k) * d + m] = half * (gamma[(l * d + k) * d + m] - gamma[(k * d + l) * d + m]);
                }
            }
        }
        // S_μνλ with the upper index lowered
        let mut tl = vec![jz::<T>(); d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut s = jz();
                    for k in 0..d {
                        s = s + g[c * d + k] * tor[(a * d + b) * d + k];
                    }
                    tl[(a * d + b) * d + c] = s;
                }
            }
        }
        let idx = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
        let mut kl = vec![jz::<T>(); d * d * d];
        for m in 0..d {
            for v in 0..d {
                for l in 0..d {
                    kl[idx(m, v, l)] = tl[idx(m, v, l)] - tl[idx(v, l, m)] + tl[idx(l, m, v)];
                }
            }
        }
        let mut kon = vec![jz::<T>(); d * d * d];
        for m in 0..d {
            for v in 0..d {
                for l in 0..d {
                    let mut s = jz();
                    for k in 0..d {
                        s = s + ginv[l * d + k] * kl[idx(m, v, k)];
                    }
                    kon[idx(m, v, l)] = s;
                }
            }
        }

        let cube = [d, d, d];
        let triad = Mat::from_fn(n, d, |i, m| e[i * d + m].val());
        let reciprocal = Mat::from_fn(d, n, |m, i| einv[m * n + i].val());
        let metric = Mat::from_fn(d, d, |a, b| g[a * d + b].val());
        let metric_inv = Mat::from_fn(d, d, |a, b| ginv[a * d + b].val());
        let sqrt_g = metric.det().abs().sqrt();
        Some(GeometryPoint {
            q: q.to_vec(),
            dim: d,
            ambient: n,
            triad,
            reciprocal,
            triad_d1: values3([d, n, d], &de),
            triad_d2: full.then(|| {
                Tensor4::from_fn([d, d, n, d], |s, l, i, k| e[i * d + k].d2(l, s))
            }),
            metric,
            metric_inv,
            sqrt_g,
            metric_d1: values3(cube, &dg),
            christoffel_first: values3(cube, &cf),
            christoffel: values3(cube, &cs),
            christoffel_d: full.then(|| derivs3(d, &cs)),
            gamma: values3(cube, &gamma),
            gamma_d: full.then(|| derivs3(d, &gamma)),
            torsion: values3(cube, &tor),
            torsion_d: full.then(|| derivs3(d, &tor)),
            contortion: values3(cube, &kon),
            contortion_d: full.then(|| derivs3(d, &kon)),
        })
    }

    fn need<'a>(t: &'a Option<Tensor4<T>>, what: &str) -> &'a Tensor4<T> {
        t.as_ref()
            .unwrap_or_else(|| panic!("{what} requires a geometry evaluated at Depth::Full"))
    }

    pub fn gamma_d(&self) -> &Tensor4<T> {
        Self::need(&self.gamma_d, "∂Γ")
    }

    pub fn christoffel_d(&self) -> &Tensor4<T> {
        Self::need(&self.christoffel_d, "∂Γ̄")
    }

    pub fn torsion_d(&self) -> &Tensor4<T> {
        Self::need(&self.torsion_d, "∂S")
    }

    pub fn contortion_d(&self) -> &Tensor4<T> {
        Self::need(&self.contortion_d, "∂K")
    }

    pub fn triad_d2(&self) -> &Tensor4<T> {
        Self::need(&self.triad_d2, "∂∂e")
    }

    /// Contracted torsion `S_μ = S_μλ^λ`.
    pub fn torsion_vector(&self) -> Vec<T> {
        let d = self.dim;
        (0..d).map(|m| (0..d).map(|l| self.torsion[(m, l, l)]).sum()).collect()
    }

    /// `Γ_μνλ = g_λκ Γ_μν^κ`.
    pub fn gamma_lowered(&self) -> Tensor3<T> {
        let d = self.dim;
        Tensor3::from_fn([d, d, d], |m, v, l| {
            (0..d).map(|k| self.metric[(l, k)] * self.gamma[(m, v, k)]).sum()
        })
    }

    /// `S_μνλ = g_λκ S_μν^κ`.
    pub fn torsion_lowered(&self) -> Tensor3<T> {
        let d = self.dim;
        Tensor3::from_fn([d, d, d], |m, v, l| {
            (0..d).map(|k| self.metric[(l, k)] * self.torsion[(m, v, k)]).sum()
        })
    }

    /// `K_μνλ = g_λκ K_μν^κ`.
    pub fn contortion_lowered(&self) -> Tensor3<T> {
        let d = self.dim;
        Tensor3::from_fn([d, d, d], |m, v, l| {
            (0..d).map(|k| self.metric[(l, k)] * self.contortion[(m, v, k)]).sum()
        })
    }

    /// Kinetic energy per unit mass `½ g_μν v^μ v^ν`.
    pub fn kinetic(&self, v: &[T]) -> T {
        lit::<T>(0.5) * self.quadratic(v)
    }

    /// `g_μν a^μ a^ν`.
    pub fn quadratic(&self, a: &[T]) -> T {
        let d = self.dim;
        let mut s = T::zero();
        for m in 0..d {
            for n in 0..d {
                s += self.metric[(m, n)] * a[m] * a[n];
            }
        }
        s
    }
}
