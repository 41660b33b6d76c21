//! Independent reference computations. Everything here is written from the
//! raw frame data (pairing, anchor rows, structure functions, Christoffel
//! sections) by direct summation, without calling the library's bracket,
//! connection, curvature or frame code.

#![allow(dead_code, clippy::needless_range_loop)]

use genricci::linalg::RatMatrix;
use genricci::polyalg::{rat, ratio};
use genricci::{CourantAlgebroid, DivergenceOp, GenConnection, GenMetric, Poly, Rational, Section};
use num_traits::Zero;

pub type Vector = Vec<Poly>;

fn zero_vec(alg: &CourantAlgebroid) -> Vector {
    vec![Poly::zero(alg.base_vars()); alg.rank()]
}

fn add_into(acc: &mut Vector, v: &[Poly]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn scaled(v: &[Poly], f: &Poly) -> Vector {
    v.iter().map(|p| p * f).collect()
}

pub fn constant(alg: &CourantAlgebroid, v: &[Rational]) -> Vector {
    v.iter()
        .map(|c| Poly::constant(alg.base_vars(), c.clone()))
        .collect()
}

/// `ℒ_{ρ(eᵢ)} f`
pub fn rho(alg: &CourantAlgebroid, i: usize, f: &Poly) -> Poly {
    let mut acc = Poly::zero(alg.base_vars());
    for (v, c) in alg.anchor(i).components().iter().enumerate() {
        if !c.is_zero() {
            acc += &(c * &f.diff(v));
        }
    }
    acc
}

/// `ℒ_{ρ(x)} f` for a section `x`.
pub fn rho_of(alg: &CourantAlgebroid, x: &[Poly], f: &Poly) -> Poly {
    let mut acc = Poly::zero(alg.base_vars());
    for (i, xi) in x.iter().enumerate() {
        if !xi.is_zero() {
            acc += &(xi * &rho(alg, i, f));
        }
    }
    acc
}

/// `ρ*df`, i.e. `P⁻¹ (ℒ_{ρ(eᵢ)} f)ᵢ`.
pub fn rho_star_d(alg: &CourantAlgebroid, f: &Poly) -> Vector {
    let w: Vec<Poly> = (0..alg.rank()).map(|i| rho(alg, i, f)).collect();
    let pinv = alg.pairing_inv();
    (0..alg.rank())
        .map(|i| {
            let mut acc = Poly::zero(alg.base_vars());
            for (j, wj) in w.iter().enumerate() {
                acc += &wj.scale(&pinv[(i, j)]);
            }
            acc
        })
        .collect()
}

pub fn pair(alg: &CourantAlgebroid, a: &[Poly], b: &[Poly]) -> Poly {
    let p = alg.pairing();
    let mut acc = Poly::zero(alg.base_vars());
    for i in 0..alg.rank() {
        for j in 0..alg.rank() {
            if !p[(i, j)].is_zero() {
                acc += &(&a[i] * &b[j]).scale(&p[(i, j)]);
            }
        }
    }
    acc
}

/// Dorfman bracket of arbitrary sections, expanded from frame data:
/// `Σ aⁱbʲ cᵢⱼ + Σ aⁱ ρᵢ(bʲ) eⱼ − Σ ρ(b)(aⁱ) eᵢ + Σ (Pb)ᵢ ρ*d(aⁱ)`.
pub fn bracket(alg: &CourantAlgebroid, a: &[Poly], b: &[Poly]) -> Vector {
    let r = alg.rank();
    let mut out = zero_vec(alg);
    for i in 0..r {
        for j in 0..r {
            let ab = &a[i] * &b[j];
            if !ab.is_zero() {
                add_into(&mut out, &scaled(&alg.structure()[i][j].0, &ab));
            }
            out[j] += &(&a[i] * &rho(alg, i, &b[j]));
        }
    }
    for i in 0..r {
        out[i] -= &rho_of(alg, b, &a[i]);
    }
    let p = alg.pairing();
    for i in 0..r {
        let mut pb = Poly::zero(alg.base_vars());
        for (k, bk) in b.iter().enumerate() {
            pb += &bk.scale(&p[(i, k)]);
        }
        if !pb.is_zero() {
            add_into(&mut out, &scaled(&rho_star_d(alg, &a[i]), &pb));
        }
    }
    out
}

/// `div x = Σ xʲ div(eⱼ) + ℒ_{ρ(eⱼ)} xʲ`.
pub fn divergence(alg: &CourantAlgebroid, dv: &DivergenceOp, x: &[Poly]) -> Poly {
    let mut acc = Poly::zero(alg.base_vars());
    for (j, xj) in x.iter().enumerate() {
        acc += &(xj * &dv.frame_values()[j]);
        acc += &rho(alg, j, xj);
    }
    acc
}

/// `D_{eᵢ} x = Σₘ ρᵢ(xᵐ) eₘ + xᵐ Γᵢₘ`.
fn d_frame(alg: &CourantAlgebroid, conn: &GenConnection, i: usize, x: &[Poly]) -> Vector {
    let mut out = zero_vec(alg);
    for (m, xm) in x.iter().enumerate() {
        out[m] += &rho(alg, i, xm);
        if !xm.is_zero() {
            add_into(&mut out, &scaled(&conn.coefficient(i, m).0, xm));
        }
    }
    out
}

/// O1: `R0[i][j][k] = R₀(eᵢ, eⱼ)eₖ`, expanded as
/// `D_{eᵢ}Γⱼₖ − D_{eⱼ}Γᵢₖ − Σₘ cᵢⱼᵐ Γₘₖ`.
pub fn naive_curvature_table(
    alg: &CourantAlgebroid,
    conn: &GenConnection,
) -> Vec<Vec<Vec<Vector>>> {
    let r = alg.rank();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    (0..r)
                        .map(|k| {
                            let mut v = d_frame(alg, conn, i, &conn.coefficient(j, k).0);
                            let w = d_frame(alg, conn, j, &conn.coefficient(i, k).0);
                            for (a, b) in v.iter_mut().zip(&w) {
                                *a -= b;
                            }
                            for (m, c) in alg.structure()[i][j].0.iter().enumerate() {
                                if !c.is_zero() {
                                    let t = scaled(&conn.coefficient(m, k).0, c);
                                    for (a, b) in v.iter_mut().zip(&t) {
                                        *a -= b;
                                    }
                                }
                            }
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn projectors(metric: &GenMetric) -> (RatMatrix, RatMatrix) {
    let r = metric.rank();
    let id = RatMatrix::identity(r);
    let half = ratio(1, 2);
    (
        id.add(metric.matrix()).scale(&half),
        id.sub(metric.matrix()).scale(&half),
    )
}

/// O2: `Ric(eⱼ, eₖ) = Σᵢ [R₀((eᵢ)₊, (eⱼ)₋)eₖ + R₀((eᵢ)₋, (eⱼ)₊)eₖ]ⁱ`, using
/// `⟨v, P⁻¹eᵢ⟩ = vⁱ` and constant projectors.
pub fn total_ricci(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Vec<Vec<Poly>> {
    let r = alg.rank();
    let t = naive_curvature_table(alg, conn);
    let (pp, pm) = projectors(metric);
    let mut out = vec![vec![Poly::zero(alg.base_vars()); r]; r];
    for j in 0..r {
        for k in 0..r {
            let mut acc = Poly::zero(alg.base_vars());
            for i in 0..r {
                for p in 0..r {
                    for q in 0..r {
                        let w = &(&pp[(p, i)] * &pm[(q, j)]) + &(&pm[(p, i)] * &pp[(q, j)]);
                        if !w.is_zero() {
                            acc += &t[p][q][k][i].scale(&w);
                        }
                    }
                }
            }
            out[j][k] = acc;
        }
    }
    out
}

/// An adapted basis chosen from the rightmost independent columns of the
/// projector, with duals from the inverse Gram matrix.
pub struct OracleFrame {
    pub plus: Vec<Vec<Rational>>,
    pub minus: Vec<Vec<Rational>>,
    pub plus_dual: Vec<Vec<Rational>>,
    pub minus_dual: Vec<Vec<Rational>>,
}

fn independent_from_right(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let mut chosen: Vec<Vec<Rational>> = Vec::new();
    for j in (0..m.cols()).rev() {
        let col = m.column(j);
        let mut trial = chosen.clone();
        trial.push(col.clone());
        if RatMatrix::from_rows(trial).rank() == chosen.len() + 1 {
            chosen.push(col);
        }
    }
    chosen
}

fn duals(alg: &CourantAlgebroid, basis: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = basis.len();
    if n == 0 {
        return Vec::new();
    }
    let p = alg.pairing();
    let gram = RatMatrix::from_rows(
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        p.mul_vec(&basis[b])
                            .iter()
                            .zip(&basis[a])
                            .map(|(x, y)| x * y)
                            .sum()
                    })
                    .collect()
            })
            .collect(),
    );
    let ginv = gram.inverse().expect("nondegenerate side");
    (0..n)
        .map(|i| {
            let mut v = vec![rat(0); alg.rank()];
            for j in 0..n {
                for (x, y) in v.iter_mut().zip(&basis[j]) {
                    *x += &ginv[(j, i)] * y;
                }
            }
            v
        })
        .collect()
}

impl OracleFrame {
    pub fn new(alg: &CourantAlgebroid, metric: &GenMetric) -> Self {
        let (pp, pm) = projectors(metric);
        let plus = independent_from_right(&pp);
        let minus = independent_from_right(&pm);
        OracleFrame {
            plus_dual: duals(alg, &plus),
            minus_dual: duals(alg, &minus),
            plus,
            minus,
        }
    }

    pub fn side(&self, plus: bool) -> (&[Vec<Rational>], &[Vec<Rational>]) {
        if plus {
            (&self.plus, &self.plus_dual)
        } else {
            (&self.minus, &self.minus_dual)
        }
    }
}

fn project(alg: &CourantAlgebroid, metric: &GenMetric, x: &[Poly], plus: bool) -> Vector {
    let (pp, pm) = projectors(metric);
    let m = if plus { pp } else { pm };
    (0..alg.rank())
        .map(|i| {
            let mut acc = Poly::zero(alg.base_vars());
            for (j, xj) in x.iter().enumerate() {
                if !m[(i, j)].is_zero() {
                    acc += &xj.scale(&m[(i, j)]);
                }
            }
            acc
        })
        .collect()
}

/// O3: `Ric_SV^±(fₐ∓, f_b±)` over the oracle frame, rows over `V∓` and
/// columns over `V±`.
pub fn sv_ricci(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
    frame: &OracleFrame,
    plus: bool,
) -> Vec<Vec<Poly>> {
    let (own, own_dual) = frame.side(plus);
    let (other, _) = frame.side(!plus);
    let mut out = Vec::new();
    for a in other {
        let a = constant(alg, a);
        let mut row = Vec::new();
        for b in own {
            let b = constant(alg, b);
            let ab = project(alg, metric, &bracket(alg, &a, &b), plus);
            let mut val = divergence(alg, dv, &ab);
            val -= &rho_of(alg, &a, &divergence(alg, dv, &b));
            for (f, fd) in own.iter().zip(own_dual) {
                let inner = project(alg, metric, &bracket(alg, &constant(alg, f), &a), !plus);
                let outer = project(alg, metric, &bracket(alg, &inner, &b), plus);
                val -= &pair(alg, &constant(alg, fd), &outer);
            }
            row.push(val);
        }
        out.push(row);
    }
    out
}

/// Compatibility residual `div([a, b]) − ℒ_{ρa} div b + ℒ_{ρb} div a` on
/// every mixed pair of the oracle frame; `true` if all vanish.
pub fn compatible(alg: &CourantAlgebroid, dv: &DivergenceOp, frame: &OracleFrame) -> bool {
    for (x, y) in [(&frame.minus, &frame.plus), (&frame.plus, &frame.minus)] {
        for a in x {
            for b in y {
                let (a, b) = (constant(alg, a), constant(alg, b));
                let mut res = divergence(alg, dv, &bracket(alg, &a, &b));
                res -= &rho_of(alg, &a, &divergence(alg, dv, &b));
                res += &rho_of(alg, &b, &divergence(alg, dv, &a));
                if !res.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

pub fn to_section(v: &[Rational], alg: &CourantAlgebroid) -> Section {
    alg.constant_section(v)
}
