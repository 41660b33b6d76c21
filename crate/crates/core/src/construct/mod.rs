//! Connections built from `(A, G)`: the canonical pure-type metric
//! connection, its correction to a prescribed divergence, and seeded
//! elements of the kernel that leave the divergence and mixed part alone.

mod catalog;

pub use catalog::{catalog, InstanceSpec, CATALOG_NAMES};

use num_traits::{One, Zero};
use rand::Rng;

use crate::connection::{metric_defect, DivergenceOp, GenConnection};
use crate::courant::{random_poly, seeded_rng, CourantAlgebroid, FrameTensor, Section};
use crate::error::{Error, Result, Side};
use crate::linalg::RatMatrix;
use crate::metric::{adapted_frame, project, AdaptedFrame, GenMetric};
use crate::polyalg::{rat, Poly, Rational};

/// Frame-level data shared by the constructors: adapted vectors `f_α` in
/// `all()` order, and the inverse change of basis `Finv` with
/// `eᵢ = Σ_α Finv[α][i] f_α`.
struct Adapted {
    frame: AdaptedFrame,
    vectors: Vec<(Side, Section)>,
    finv: RatMatrix,
}

impl Adapted {
    fn new(alg: &CourantAlgebroid, metric: &GenMetric) -> Result<Self> {
        let frame = adapted_frame(alg, metric)?;
        let vectors = frame
            .all()
            .into_iter()
            .map(|(s, v)| (s, alg.constant_section(v)))
            .collect();
        let finv = frame
            .change_of_basis()
            .inverse()
            .ok_or_else(|| Error::ConstructionFailed("adapted frame is not a basis".into()))?;
        Ok(Adapted {
            frame,
            vectors,
            finv,
        })
    }

    /// Offset of the first vector of `side` in `all()` order.
    fn offset(&self, side: Side) -> usize {
        match side {
            Side::Plus => 0,
            Side::Minus => self.frame.side_rank(Side::Plus),
        }
    }

    /// Converts `t[α][β] = T_{f_α} f_β` (tensorial in both slots) to frame
    /// coefficients `T_{eᵢ} eⱼ`.
    fn to_frame(&self, alg: &CourantAlgebroid, t: &[Vec<Section>]) -> FrameTensor {
        let r = alg.rank();
        let mut out = vec![vec![alg.zero(); r]; r];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for (alpha, t_row) in t.iter().enumerate() {
                    let ca = &self.finv[(alpha, i)];
                    if ca.is_zero() {
                        continue;
                    }
                    for (beta, s) in t_row.iter().enumerate() {
                        let cb = &self.finv[(beta, j)];
                        if cb.is_zero() || s.is_zero() {
                            continue;
                        }
                        *cell += &s.scale_rat(&(ca * cb));
                    }
                }
            }
        }
        out
    }
}

/// The metric connection with pure-type torsion defined on adapted frame
/// vectors by `D_x y = [x, y]σ`, `σ` the side of `y`.
pub fn canonical_connection(alg: &CourantAlgebroid, metric: &GenMetric) -> Result<GenConnection> {
    let ad = Adapted::new(alg, metric)?;
    let mut t = Vec::with_capacity(alg.rank());
    for (_, x) in &ad.vectors {
        let mut row = Vec::with_capacity(alg.rank());
        for (sy, y) in &ad.vectors {
            row.push(project(metric, &alg.bracket(x, y)?, *sy));
        }
        t.push(row);
    }
    let conn = GenConnection::new(alg, ad.to_frame(alg, &t))
        .map_err(|e| Error::ConstructionFailed(format!("not a generalized connection: {e}")))?;
    validate_constructed(alg, metric, &conn)?;
    Ok(conn)
}

fn validate_constructed(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Result<()> {
    metric_defect(alg, metric, conn)
        .map_err(|w| Error::ConstructionFailed(format!("not metric: {w}")))?;
    let pure = conn.is_pure_type(alg, metric);
    if let Some(v) = pure.first_failure() {
        return Err(Error::ConstructionFailed(format!(
            "torsion not of pure type ({}): {}",
            v.id,
            v.witness.as_deref().unwrap_or("")
        )));
    }
    Ok(())
}

/// For a side of rank `r ≥ 2` and a covector `ε` on it, the tensor
/// `B_{f_α} f_β = (⟨f_α, f_β⟩ ε♯ − ε(f_β) f_α) / (1 − r)` with
/// `ε♯ = Σ ε(f_γ) ẽ_γ`. It is `so(V)`-valued and `tr₁B = ε` on the side.
fn trace_ansatz(
    alg: &CourantAlgebroid,
    ad: &Adapted,
    side: Side,
    eps: &[Poly],
) -> Vec<Vec<Section>> {
    let frame = &ad.frame;
    let n = frame.side_rank(side);
    let c = Rational::one() / (Rational::one() - rat(n as i64));
    let duals = frame.dual_sections(alg, side);
    let basis = frame.sections(alg, side);
    let mut sharp = alg.zero();
    for (e, d) in eps.iter().zip(&duals) {
        if !e.is_zero() {
            sharp += &d.scale(e);
        }
    }
    let gram = frame.gram(side);
    (0..n)
        .map(|alpha| {
            (0..n)
                .map(|beta| {
                    let t =
                        &sharp.scale_rat(&gram[(alpha, beta)]) - &basis[alpha].scale(&eps[beta]);
                    t.scale_rat(&c)
                })
                .collect()
        })
        .collect()
}

/// Embeds per-side tensors (indexed within the side) into `all()` order.
fn assemble(
    alg: &CourantAlgebroid,
    ad: &Adapted,
    parts: &[(Side, Vec<Vec<Section>>)],
) -> Vec<Vec<Section>> {
    let r = alg.rank();
    let mut t = vec![vec![alg.zero(); r]; r];
    for (side, part) in parts {
        let off = ad.offset(*side);
        for (a, row) in part.iter().enumerate() {
            for (b, s) in row.iter().enumerate() {
                t[off + a][off + b] = s.clone();
            }
        }
    }
    t
}

fn check_rank_one(ad: &Adapted) -> Result<()> {
    for side in Side::BOTH {
        if ad.frame.side_rank(side) == 1 {
            return Err(Error::RankOneSide(side));
        }
    }
    Ok(())
}

/// Returns `D0 + B` where `B` is the same-side correction that moves the
/// divergence of `D0` to `target`.
pub fn divergence_correction(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    d0: &GenConnection,
    target: &DivergenceOp,
) -> Result<GenConnection> {
    let ad = Adapted::new(alg, metric)?;
    check_rank_one(&ad)?;
    let current = d0.divergence_op(alg);
    let r = alg.rank();
    if target.frame_values().len() != r {
        return Err(Error::Input(format!(
            "divergence has {} frame values, rank is {r}",
            target.frame_values().len()
        )));
    }
    let defect: Vec<Poly> = target
        .frame_values()
        .iter()
        .zip(current.frame_values())
        .map(|(t, c)| t - c)
        .collect();
    check_tensorial_defect(alg, d0, target, &defect)?;
    if defect.iter().all(Poly::is_zero) {
        return Ok(d0.clone());
    }
    let mut parts = Vec::new();
    for side in Side::BOTH {
        let eps: Vec<Poly> = ad
            .frame
            .sections(alg, side)
            .iter()
            .map(|f| covector_eval(&defect, f))
            .collect();
        if eps.iter().all(Poly::is_zero) {
            continue;
        }
        parts.push((side, trace_ansatz(alg, &ad, side, &eps)));
    }
    let b = ad.to_frame(alg, &assemble(alg, &ad, &parts));
    let conn = d0
        .perturbed(alg, &b)
        .map_err(|e| Error::ConstructionFailed(format!("corrected coefficients: {e}")))?;
    validate_constructed(alg, metric, &conn)?;
    if let Some(i) = conn.divergence_op(alg).first_difference(target) {
        return Err(Error::ConstructionFailed(format!(
            "corrected divergence differs from the target at e{}",
            i + 1
        )));
    }
    Ok(conn)
}

fn covector_eval(values: &[Poly], a: &Section) -> Poly {
    let mut acc = Poly::zero(a.0[0].vars());
    for (v, x) in values.iter().zip(&a.0) {
        if !v.is_zero() && !x.is_zero() {
            acc += &(v * x);
        }
    }
    acc
}

/// `target(a) − tr(D0 a)` must be `C∞`-linear in `a`; checked on seeded
/// polynomial sections against the frame values.
fn check_tensorial_defect(
    alg: &CourantAlgebroid,
    d0: &GenConnection,
    target: &DivergenceOp,
    defect: &[Poly],
) -> Result<()> {
    let mut rng = seeded_rng(0xd1f);
    for n in 0..3 {
        let a = alg.random_section(&mut rng, 2, 3);
        let lhs = &target.apply(alg, &a)? - &d0.divergence(alg, &a)?;
        if lhs != covector_eval(defect, &a) {
            return Err(Error::NonTensorialDefect(format!(
                "random section #{n}: {a}"
            )));
        }
    }
    Ok(())
}

/// A seeded element `B = B⁺ + B⁻` with `B± ∈ V±⊗so(V±)` and `tr₁B± = 0`.
/// Coefficients are polynomials of degree ≤ 1 with integer coefficients in
/// `[-3, 3]`; sides of rank ≤ 1 contribute nothing.
pub fn random_kernel_b(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    seed: u64,
) -> Result<FrameTensor> {
    let ad = Adapted::new(alg, metric)?;
    let mut rng = seeded_rng(seed);
    let degree = u32::from(alg.dim_base() > 0);
    let mut parts = Vec::new();
    for side in Side::BOTH {
        let n = ad.frame.side_rank(side);
        if n < 2 {
            continue;
        }
        // ω[α][β][δ] = ⟨B_{f_α} f_β, f_δ⟩, skew in (β, δ)
        let zero = Poly::zero(alg.base_vars());
        let mut omega = vec![vec![vec![zero.clone(); n]; n]; n];
        for plane in omega.iter_mut() {
            for b in 0..n {
                for d in (b + 1)..n {
                    let mut w = random_poly(alg.base_vars(), &mut rng, degree, 3);
                    if w.is_zero() {
                        w = Poly::from_int(alg.base_vars(), rng.gen_range(1..=3));
                    }
                    plane[d][b] = -&w;
                    plane[b][d] = w;
                }
            }
        }
        let duals = ad.frame.dual_sections(alg, side);
        let ginv = ad.frame.gram_inv(side);
        let mut raw: Vec<Vec<Section>> = omega
            .iter()
            .map(|plane| {
                plane
                    .iter()
                    .map(|row| {
                        let mut s = alg.zero();
                        for (w, d) in row.iter().zip(&duals) {
                            if !w.is_zero() {
                                s += &d.scale(w);
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        // η(f_β) = Σ ω[α][β][δ] ⟨ẽ_α, ẽ_δ⟩ is the trace to remove
        let eta: Vec<Poly> = (0..n)
            .map(|b| {
                let mut acc = zero.clone();
                for (a, plane) in omega.iter().enumerate() {
                    for (d, w) in plane[b].iter().enumerate() {
                        let g = &ginv[(a, d)];
                        if !g.is_zero() && !w.is_zero() {
                            acc += &w.scale(g);
                        }
                    }
                }
                acc
            })
            .collect();
        let corr = trace_ansatz(alg, &ad, side, &eta);
        for (row, crow) in raw.iter_mut().zip(&corr) {
            for (s, c) in row.iter_mut().zip(crow) {
                *s -= c;
            }
        }
        parts.push((side, raw));
    }
    Ok(ad.to_frame(alg, &assemble(alg, &ad, &parts)))
}

/// Diagnostics on a difference tensor `B = D' − D`: whether it is
/// same-side and `so(V±)`-valued, and whether `tr₁B` vanishes.
pub fn kernel_diagnostics(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    b: &FrameTensor,
) -> Result<(
    std::result::Result<(), String>,
    std::result::Result<(), String>,
)> {
    let ad = Adapted::new(alg, metric)?;
    let names = crate::connection::frame_names(&ad.frame);
    let eval = |x: &Section, y: &Section| -> Section {
        let mut s = alg.zero();
        for (i, xi) in x.0.iter().enumerate() {
            for (j, yj) in y.0.iter().enumerate() {
                if xi.is_zero() || yj.is_zero() || b[i][j].is_zero() {
                    continue;
                }
                s += &b[i][j].scale(&(xi * yj));
            }
        }
        s
    };
    let mut decomposition = Ok(());
    'outer: for (a, (sa, x)) in ad.vectors.iter().enumerate() {
        for (c, (sc, y)) in ad.vectors.iter().enumerate() {
            let bxy = eval(x, y);
            if sa != sc {
                if !bxy.is_zero() {
                    decomposition = Err(format!("B_{} {} = {bxy} is not zero", names[a], names[c]));
                    break 'outer;
                }
                continue;
            }
            for (d, (sd, z)) in ad.vectors.iter().enumerate() {
                let v = if sd == sc {
                    &alg.pair_unchecked(&bxy, z) + &alg.pair_unchecked(y, &eval(x, z))
                } else {
                    alg.pair_unchecked(&bxy, z)
                };
                if !v.is_zero() {
                    decomposition = Err(format!(
                        "B_{} is not skew on ({}, {}): {v}",
                        names[a], names[c], names[d]
                    ));
                    break 'outer;
                }
            }
        }
    }
    let tr = alg.trace1(b)?;
    let trace = match tr.0.iter().position(|p| !p.is_zero()) {
        None => Ok(()),
        Some(j) => Err(format!("(tr₁B)(e{}) = {}", j + 1, tr.0[j])),
    };
    Ok((decomposition, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::is_metric;
    use crate::polyalg::ratio;

    #[test]
    fn abelian_point_gives_zero_connection() {
        let spec = catalog("abelian_point").unwrap();
        let g = spec.metric.as_ref().unwrap();
        let d = canonical_connection(&spec.algebroid, g).unwrap();
        assert_eq!(d, GenConnection::zero(&spec.algebroid));
    }

    #[test]
    fn product_has_no_mixed_coefficients() {
        let spec = catalog("so3_product").unwrap();
        let alg = &spec.algebroid;
        let d = canonical_connection(alg, spec.metric.as_ref().unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let c = d.coefficient(i, j);
                for k in 0..6 {
                    if (i < 3) != (j < 3) || (j < 3) != (k < 3) {
                        assert!(c.0[k].is_zero(), "Γ[{i}][{j}][{k}]");
                    }
                }
            }
        }
    }

    #[test]
    fn bidiagonal_canonical_is_metric_and_pure() {
        let spec = catalog("so3_bidiagonal").unwrap();
        let (alg, g) = (&spec.algebroid, spec.metric.as_ref().unwrap());
        let d = canonical_connection(alg, g).unwrap();
        assert!(is_metric(alg, g, &d).all_pass());
        assert!(d.is_pure_type(alg, g).all_pass());
    }

    #[test]
    fn zero_defect_is_a_no_op() {
        let spec = catalog("drinfeld_double_sl2").unwrap();
        let (alg, g) = (&spec.algebroid, spec.metric.as_ref().unwrap());
        let d0 = canonical_connection(alg, g).unwrap();
        let same = divergence_correction(alg, g, &d0, &d0.divergence_op(alg)).unwrap();
        assert_eq!(same, d0);
    }

    #[test]
    fn correction_hits_target_and_is_idempotent() {
        let spec = catalog("so3_bidiagonal").unwrap();
        let (alg, g) = (&spec.algebroid, spec.metric.as_ref().unwrap());
        let d0 = canonical_connection(alg, g).unwrap();
        let target = DivergenceOp::from_rationals(
            alg.base_vars(),
            &[rat(1), rat(0), ratio(-2, 3), rat(0), rat(3), rat(1)],
        );
        let d = divergence_correction(alg, g, &d0, &target).unwrap();
        assert_eq!(d.divergence_op(alg), target);
        let again = divergence_correction(alg, g, &d, &target).unwrap();
        assert_eq!(again, d);
        let zero = divergence_correction(alg, g, &d0, &DivergenceOp::zero(alg)).unwrap();
        for i in 0..6 {
            assert!(zero.divergence(alg, &alg.basis(i)).unwrap().is_zero());
        }
    }

    #[test]
    fn rank_one_side_refused() {
        let vars = crate::polyalg::make_vars::<&str>(&[]);
        let abel = CourantAlgebroid::new(
            vars.clone(),
            RatMatrix::identity(3),
            vec![crate::PolyVecField::zero(&vars); 3],
            vec![vec![Section::zero(&vars, 3); 3]; 3],
        )
        .unwrap();
        let g = GenMetric::new(RatMatrix::diag(&[rat(1), rat(-1), rat(-1)])).unwrap();
        let d0 = canonical_connection(&abel, &g).unwrap();
        let err = divergence_correction(&abel, &g, &d0, &DivergenceOp::zero(&abel)).unwrap_err();
        assert_eq!(err, Error::RankOneSide(Side::Plus));
    }

    #[test]
    fn kernel_element_satisfies_constraints() {
        for name in ["so3_bidiagonal", "exact_chart_H"] {
            let spec = catalog(name).unwrap();
            let (alg, g) = (&spec.algebroid, spec.metric.as_ref().unwrap());
            let b = random_kernel_b(alg, g, 17).unwrap();
            assert!(b.iter().flatten().any(|s| !s.is_zero()));
            let (decomp, trace) = kernel_diagnostics(alg, g, &b).unwrap();
            assert_eq!(decomp, Ok(()), "{name}");
            assert_eq!(trace, Ok(()), "{name}");
            let d0 = canonical_connection(alg, g).unwrap();
            let d1 = d0.perturbed(alg, &b).unwrap();
            assert_eq!(d1.divergence_op(alg), d0.divergence_op(alg));
            assert!(is_metric(alg, g, &d1).all_pass());
            assert!(d1.is_pure_type(alg, g).all_pass());
        }
    }

    #[test]
    fn kernel_is_deterministic_in_seed() {
        let spec = catalog("drinfeld_double_sl2").unwrap();
        let (alg, g) = (&spec.algebroid, spec.metric.as_ref().unwrap());
        assert_eq!(
            random_kernel_b(alg, g, 5).unwrap(),
            random_kernel_b(alg, g, 5).unwrap()
        );
        assert_ne!(
            random_kernel_b(alg, g, 5).unwrap(),
            random_kernel_b(alg, g, 6).unwrap()
        );
    }
}
