//! Generalized connections stored by their frame coefficients
//! `Γ[i][j] = D_{eᵢ} eⱼ`, and divergence operators stored by their frame
//! values `div(eᵢ)`.

use crate::courant::{CourantAlgebroid, FrameTensor, PolyMatrix, Section};
use crate::error::{Error, Result, Side};
use crate::metric::{adapted_frame, project, GenMetric};
use crate::polyalg::{Poly, Vars};
use crate::report::CheckReport;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConnection {
    gamma: FrameTensor,
}

impl GenConnection {
    /// Rejects coefficients that are not compatible with the pairing,
    /// i.e. `⟨Γᵢⱼ, eₖ⟩ + ⟨eⱼ, Γᵢₖ⟩ ≠ 0` for some frame triple.
    pub fn new(alg: &CourantAlgebroid, gamma: FrameTensor) -> Result<Self> {
        let r = alg.rank();
        if gamma.len() != r || gamma.iter().any(|row| row.len() != r) {
            return Err(Error::Input(format!(
                "connection coefficients must be {0}×{0}×{0}",
                r
            )));
        }
        let mut rows = Vec::with_capacity(r);
        for row in gamma {
            let mut out = Vec::with_capacity(r);
            for s in row {
                alg.check_rank(&s)?;
                out.push(Section(
                    s.0.iter()
                        .map(|p| p.over(alg.base_vars()))
                        .collect::<Result<_>>()?,
                ));
            }
            rows.push(out);
        }
        let conn = GenConnection { gamma: rows };
        if let Some(w) = conn.pairing_defect(alg) {
            return Err(Error::Input(format!(
                "coefficients are not compatible with the pairing: {w}"
            )));
        }
        Ok(conn)
    }

    /// `Γ = 0`: over a chart, the coordinate connection `D_a b = Σ aⁱ ℒ_{ρeᵢ} bʲ eⱼ`.
    pub fn zero(alg: &CourantAlgebroid) -> Self {
        let r = alg.rank();
        GenConnection {
            gamma: vec![vec![alg.zero(); r]; r],
        }
    }

    pub fn coefficients(&self) -> &FrameTensor {
        &self.gamma
    }

    pub fn coefficient(&self, i: usize, j: usize) -> &Section {
        &self.gamma[i][j]
    }

    /// `D + B` for a frame tensor `B[i][j] = B_{eᵢ} eⱼ`; the sum must again
    /// be compatible with the pairing.
    pub fn perturbed(&self, alg: &CourantAlgebroid, b: &FrameTensor) -> Result<Self> {
        let gamma = self
            .gamma
            .iter()
            .zip(b)
            .map(|(row, brow)| row.iter().zip(brow).map(|(x, y)| x + y).collect())
            .collect();
        GenConnection::new(alg, gamma)
    }

    /// `D' - D` as a frame tensor.
    pub fn difference(&self, other: &GenConnection) -> FrameTensor {
        other
            .gamma
            .iter()
            .zip(&self.gamma)
            .map(|(row, srow)| row.iter().zip(srow).map(|(x, y)| x - y).collect())
            .collect()
    }

    fn pairing_defect(&self, alg: &CourantAlgebroid) -> Option<String> {
        let r = alg.rank();
        for i in 0..r {
            for j in 0..r {
                for k in j..r {
                    let s = &alg.pair_unchecked(&self.gamma[i][j], &alg.basis(k))
                        + &alg.pair_unchecked(&alg.basis(j), &self.gamma[i][k]);
                    if !s.is_zero() {
                        return Some(format!(
                            "⟨Γ[{i}][{j}], e{k}⟩ + ⟨e{j}, Γ[{i}][{k}]⟩ = {s}",
                            i = i + 1,
                            j = j + 1,
                            k = k + 1
                        ));
                    }
                }
            }
        }
        None
    }

    /// `Γₐ = Σ aⁱ Γᵢ` as a matrix: column `j` is `Σ aⁱ Γ[i][j]`.
    pub fn connection_matrix(&self, alg: &CourantAlgebroid, a: &Section) -> PolyMatrix {
        let r = alg.rank();
        let mut m = vec![vec![Poly::zero(alg.base_vars()); r]; r];
        for (i, ai) in a.0.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for j in 0..r {
                for (k, c) in self.gamma[i][j].0.iter().enumerate() {
                    if !c.is_zero() {
                        m[k][j] += &(ai * c);
                    }
                }
            }
        }
        m
    }

    /// `D_a b = Σᵢ aⁱ (Σⱼ (ℒ_{ρeᵢ} bʲ) eⱼ + bʲ Γᵢⱼ)`.
    pub fn apply(&self, alg: &CourantAlgebroid, a: &Section, b: &Section) -> Result<Section> {
        alg.check_rank(a)?;
        alg.check_rank(b)?;
        let r = alg.rank();
        let mut out = alg.zero();
        for i in 0..r {
            let ai = &a.0[i];
            if ai.is_zero() {
                continue;
            }
            let mut t = alg.zero();
            for j in 0..r {
                let bj = &b.0[j];
                if bj.is_zero() {
                    continue;
                }
                let d = alg.lie_frame(i, bj)?;
                if !d.is_zero() {
                    t.0[j] += &d;
                }
                let g = &self.gamma[i][j];
                if !g.is_zero() {
                    t += &g.scale(bj);
                }
            }
            if !t.is_zero() {
                for (o, x) in out.0.iter_mut().zip(&t.0) {
                    if !x.is_zero() {
                        *o += &ai.checked_mul(x, alg.degree_cap())?;
                    }
                }
            }
        }
        alg.check_degree(&out)?;
        Ok(out)
    }

    /// `(Da)*b`: the section `s` with `⟨s, c⟩ = ⟨b, D_c a⟩` for all `c`.
    pub fn adjoint(&self, alg: &CourantAlgebroid, a: &Section, b: &Section) -> Result<Section> {
        alg.check_rank(a)?;
        alg.check_rank(b)?;
        let mut v = alg.zero();
        for i in 0..alg.rank() {
            let d = self.apply(alg, &alg.basis(i), a)?;
            v.0[i] = alg.pair_unchecked(b, &d);
        }
        Ok(v.transform(alg.pairing_inv()))
    }

    /// `div a = tr(Da) = Σᵢ ⟨ẽᵢ, D_{eᵢ} a⟩`.
    pub fn divergence(&self, alg: &CourantAlgebroid, a: &Section) -> Result<Poly> {
        let mut acc = Poly::zero(alg.base_vars());
        for i in 0..alg.rank() {
            let d = self.apply(alg, &alg.basis(i), a)?;
            acc += &d.0[i];
        }
        Ok(acc)
    }

    /// The divergence operator `a ↦ tr(Da)`, by its frame values.
    pub fn divergence_op(&self, alg: &CourantAlgebroid) -> DivergenceOp {
        let r = alg.rank();
        let values = (0..r)
            .map(|j| {
                let mut acc = Poly::zero(alg.base_vars());
                for i in 0..r {
                    acc += &self.gamma[i][j].0[i];
                }
                acc
            })
            .collect();
        DivergenceOp {
            frame_values: values,
        }
    }

    /// `T(a, b) = D_a b − D_b a − [a, b] + (Da)*b`.
    pub fn torsion(&self, alg: &CourantAlgebroid, a: &Section, b: &Section) -> Result<Section> {
        let t = &(&self.apply(alg, a, b)? - &self.apply(alg, b, a)?) - &alg.bracket(a, b)?;
        Ok(&t + &self.adjoint(alg, a, b)?)
    }

    /// `⟨T(a, b), c⟩`.
    pub fn torsion3(
        &self,
        alg: &CourantAlgebroid,
        a: &Section,
        b: &Section,
        c: &Section,
    ) -> Result<Poly> {
        let t = &(&self.apply(alg, a, b)? - &self.apply(alg, b, a)?) - &alg.bracket(a, b)?;
        Ok(&alg.pairing_of(&t, c)? + &alg.pairing_of(b, &self.apply(alg, c, a)?)?)
    }

    /// `R₀(a, b)c = D_a D_b c − D_b D_a c − D_{[a,b]} c`.
    pub fn naive_curvature(
        &self,
        alg: &CourantAlgebroid,
        a: &Section,
        b: &Section,
        c: &Section,
    ) -> Result<Section> {
        let ab = self.apply(alg, a, &self.apply(alg, b, c)?)?;
        let ba = self.apply(alg, b, &self.apply(alg, a, c)?)?;
        let br = self.apply(alg, &alg.bracket(a, b)?, c)?;
        Ok(&(&ab - &ba) - &br)
    }

    /// `(D_a B)(b) = D_a(Bb) − B(D_a b)`, i.e. `ℒ_{ρa}B + [Γₐ, B]`.
    pub fn induced_derivative_on_endos(
        &self,
        alg: &CourantAlgebroid,
        a: &Section,
        m: &PolyMatrix,
    ) -> Result<PolyMatrix> {
        let r = alg.rank();
        if m.len() != r || m.iter().any(|row| row.len() != r) {
            return Err(Error::Input(format!("endomorphism must be {0}×{0}", r)));
        }
        let ga = self.connection_matrix(alg, a);
        let mut out = vec![vec![Poly::zero(alg.base_vars()); r]; r];
        for k in 0..r {
            for j in 0..r {
                let mut acc = alg.lie(a, &m[k][j])?;
                for l in 0..r {
                    if !ga[k][l].is_zero() && !m[l][j].is_zero() {
                        acc += &(&ga[k][l] * &m[l][j]);
                    }
                    if !m[k][l].is_zero() && !ga[l][j].is_zero() {
                        acc -= &(&m[k][l] * &ga[l][j]);
                    }
                }
                out[k][j] = acc;
            }
        }
        Ok(out)
    }

    /// Whether `D` preserves `V±`; see [`is_metric`].
    pub fn is_metric(&self, alg: &CourantAlgebroid, metric: &GenMetric) -> CheckReport {
        is_metric(alg, metric, self)
    }

    pub fn is_pure_type(&self, alg: &CourantAlgebroid, metric: &GenMetric) -> CheckReport {
        is_pure_type(alg, metric, self)
    }
}

/// Checks `D_{eᵢ}(G eⱼ) = G D_{eᵢ} eⱼ` for every frame pair.
pub fn is_metric(alg: &CourantAlgebroid, metric: &GenMetric, conn: &GenConnection) -> CheckReport {
    let mut report = CheckReport::new();
    report.record("metric", metric_defect(alg, metric, conn));
    report
}

pub(crate) fn metric_defect(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> std::result::Result<(), String> {
    let r = alg.rank();
    let g = metric.matrix();
    for i in 0..r {
        for j in 0..r {
            let mut lhs = alg.zero();
            for m in 0..r {
                let c = &g[(m, j)];
                if !num_traits::Zero::is_zero(c) {
                    lhs += &conn.gamma[i][m].scale_rat(c);
                }
            }
            let rhs = metric.apply(&conn.gamma[i][j]);
            let diff = &lhs - &rhs;
            if let Some((k, p)) = diff.first_nonzero() {
                return Err(format!(
                    "D_e{}(G e{}) - G D_e{} e{} has component {} = {p}",
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1,
                    k + 1
                ));
            }
        }
    }
    Ok(())
}

/// Reports both characterizations of pure-type torsion: vanishing of every
/// mixed component of `⟨T(x, y), z⟩` over the adapted frame, and
/// `D_{a∓} b± = [a∓, b±]±` on adapted pairs.
pub fn is_pure_type(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> CheckReport {
    let mut report = CheckReport::new();
    let frame = match adapted_frame(alg, metric) {
        Ok(f) => f,
        Err(e) => {
            report.fail("pure_torsion", format!("no adapted frame: {e}"));
            report.fail("pure_mixed_derivative", format!("no adapted frame: {e}"));
            return report;
        }
    };
    let all: Vec<(Side, Section)> = frame
        .all()
        .into_iter()
        .map(|(s, v)| (s, alg.constant_section(v)))
        .collect();
    let names = frame_names(&frame);

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for (x, (sx, a)) in all.iter().enumerate() {
            for (y, (sy, b)) in all.iter().enumerate() {
                for (z, (sz, c)) in all.iter().enumerate() {
                    if sx == sy && sy == sz {
                        continue;
                    }
                    let t = conn.torsion3(alg, a, b, c)?;
                    if !t.is_zero() {
                        return Ok(Err(format!(
                            "T({}, {}, {}) = {t}",
                            names[x], names[y], names[z]
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "pure_torsion", outcome);

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for (x, (sx, a)) in all.iter().enumerate() {
            for (y, (sy, b)) in all.iter().enumerate() {
                if sx == sy {
                    continue;
                }
                let lhs = conn.apply(alg, a, b)?;
                let rhs = project(metric, &alg.bracket(a, b)?, *sy);
                let diff = &lhs - &rhs;
                if let Some((k, p)) = diff.first_nonzero() {
                    return Ok(Err(format!(
                        "D_{} {} - [{}, {}]{} has component {} = {p}",
                        names[x],
                        names[y],
                        names[x],
                        names[y],
                        sy,
                        k + 1
                    )));
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "pure_mixed_derivative", outcome);
    report
}

/// `f1+, f2+, …, f1-, …` in the order of [`crate::AdaptedFrame::all`].
pub(crate) fn frame_names(frame: &crate::AdaptedFrame) -> Vec<String> {
    frame
        .all()
        .iter()
        .scan((0usize, 0usize), |(p, m), (side, _)| {
            Some(match side {
                Side::Plus => {
                    *p += 1;
                    format!("f{p}+")
                }
                Side::Minus => {
                    *m += 1;
                    format!("f{m}-")
                }
            })
        })
        .collect()
}

pub(crate) fn record(
    report: &mut CheckReport,
    id: &str,
    outcome: Result<std::result::Result<(), String>>,
) {
    match outcome {
        Ok(o) => report.record(id, o),
        Err(e) => report.fail(id, format!("evaluation error: {e}")),
    }
}

/// A divergence operator, `div(Σ aⁱeᵢ) = Σ (aⁱ div(eᵢ) + ℒ_{ρeᵢ} aⁱ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceOp {
    frame_values: Vec<Poly>,
}

impl DivergenceOp {
    pub fn new(alg: &CourantAlgebroid, frame_values: Vec<Poly>) -> Result<Self> {
        if frame_values.len() != alg.rank() {
            return Err(Error::Input(format!(
                "divergence has {} frame values, rank is {}",
                frame_values.len(),
                alg.rank()
            )));
        }
        let frame_values = frame_values
            .into_iter()
            .map(|p| p.over(alg.base_vars()))
            .collect::<Result<_>>()?;
        Ok(DivergenceOp { frame_values })
    }

    pub fn zero(alg: &CourantAlgebroid) -> Self {
        DivergenceOp {
            frame_values: vec![Poly::zero(alg.base_vars()); alg.rank()],
        }
    }

    pub fn from_rationals(vars: &Vars, values: &[crate::Rational]) -> Self {
        DivergenceOp {
            frame_values: values
                .iter()
                .map(|c| Poly::constant(vars, c.clone()))
                .collect(),
        }
    }

    pub fn frame_values(&self) -> &[Poly] {
        &self.frame_values
    }

    pub fn apply(&self, alg: &CourantAlgebroid, a: &Section) -> Result<Poly> {
        alg.check_rank(a)?;
        let mut acc = Poly::zero(alg.base_vars());
        for (i, (ai, v)) in a.0.iter().zip(&self.frame_values).enumerate() {
            if ai.is_zero() {
                continue;
            }
            if !v.is_zero() {
                acc += &(ai * v);
            }
            acc += &alg.lie_frame(i, ai)?;
        }
        Ok(acc)
    }

    /// First frame index where the two operators differ.
    pub fn first_difference(&self, other: &DivergenceOp) -> Option<usize> {
        self.frame_values
            .iter()
            .zip(&other.frame_values)
            .position(|(a, b)| a != b)
    }
}
