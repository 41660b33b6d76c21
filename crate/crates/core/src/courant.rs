//! Frame presentation of a Courant algebroid over a polynomial chart.
//!
//! The bundle is trivialized by a frame `e₁..eᵣ` in which the pairing is a
//! constant rational matrix `P`. The anchor sends `eᵢ` to a polynomial vector
//! field and the structure functions give `[eᵢ, eⱼ]` for every ordered pair.
//! Brackets of arbitrary sections follow from the two Leibniz anomalies
//!
//! ```text
//! [a, f b] = f [a, b] + (ℒ_{ρa} f) b
//! [f a, b] = f [a, b] − (ℒ_{ρb} f) a + ⟨a, b⟩ ρ*df
//! ```

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::polyalg::{rat, Poly, PolyVecField, Rational, Vars, DEFAULT_DEGREE_CAP};
use crate::report::CheckReport;

/// Coordinates of a section in the frame `{eᵢ}`.
#[derive(Clone, PartialEq, Eq)]
pub struct Section(pub Vec<Poly>);

/// Coordinates of a section of `E*` in the dual frame.
#[derive(Clone, PartialEq, Eq)]
pub struct Covector(pub Vec<Poly>);

/// Endomorphism of `E` in the frame: `m[k][j]` is the `k`-th component of
/// the image of `eⱼ`.
pub type PolyMatrix = Vec<Vec<Poly>>;

/// Frame tensor `t[i][j]`, typically `D_{eᵢ} eⱼ` or `B_{eᵢ} eⱼ`.
pub type FrameTensor = Vec<Vec<Section>>;

impl Section {
    pub fn zero(vars: &Vars, rank: usize) -> Section {
        Section(vec![Poly::zero(vars); rank])
    }

    pub fn basis(vars: &Vars, rank: usize, i: usize) -> Section {
        let mut s = Section::zero(vars, rank);
        s.0[i] = Poly::one(vars);
        s
    }

    pub fn from_rationals(vars: &Vars, coeffs: &[Rational]) -> Section {
        Section(
            coeffs
                .iter()
                .map(|c| Poly::constant(vars, c.clone()))
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, f: &Poly) -> Section {
        Section(self.0.iter().map(|c| c * f).collect())
    }

    pub fn scale_rat(&self, c: &Rational) -> Section {
        Section(self.0.iter().map(|p| p.scale(c)).collect())
    }

    /// Rational coordinates when every component is constant.
    pub fn as_constant(&self) -> Option<Vec<Rational>> {
        self.0.iter().map(Poly::as_constant).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// `Σ cᵢ eᵢ` applied to a rational matrix: returns `M · self`.
    pub fn transform(&self, m: &RatMatrix) -> Section {
        let vars = self
            .0
            .first()
            .map(|p| p.vars().clone())
            .unwrap_or_else(|| Vars::from(vec![]));
        let mut out = Section::zero(&vars, m.rows());
        for k in 0..m.rows() {
            for (j, c) in self.0.iter().enumerate() {
                let mkj = &m[(k, j)];
                if !mkj.is_zero() && !c.is_zero() {
                    out.0[k] += &c.scale(mkj);
                }
            }
        }
        out
    }

    /// First nonzero component, for witnesses.
    pub fn first_nonzero(&self) -> Option<(usize, &Poly)> {
        self.0.iter().enumerate().find(|(_, p)| !p.is_zero())
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Add for &Section {
    type Output = Section;
    fn add(self, rhs: &Section) -> Section {
        Section(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Section {
    type Output = Section;
    fn sub(self, rhs: &Section) -> Section {
        Section(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Section {
    type Output = Section;
    fn neg(self) -> Section {
        Section(self.0.iter().map(|a| -a).collect())
    }
}

impl std::ops::AddAssign<&Section> for Section {
    fn add_assign(&mut self, rhs: &Section) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl std::ops::SubAssign<&Section> for Section {
    fn sub_assign(&mut self, rhs: &Section) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

impl Covector {
    /// `α(a) = Σ αᵢ aⁱ`.
    pub fn eval(&self, a: &Section) -> Poly {
        let mut acc = Poly::zero(self.0[0].vars());
        for (x, y) in self.0.iter().zip(&a.0) {
            if !x.is_zero() && !y.is_zero() {
                acc += &(x * y);
            }
        }
        acc
    }
}

impl fmt::Debug for Covector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "Covector[{}]", parts.join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct CourantAlgebroid {
    base_vars: Vars,
    rank: usize,
    pairing: RatMatrix,
    pairing_inv: RatMatrix,
    anchor: Vec<PolyVecField>,
    structure: FrameTensor,
    degree_cap: u32,
}

impl CourantAlgebroid {
    /// Validates shapes and the pairing; the bracket axioms are checked
    /// separately by [`CourantAlgebroid::axiom_check`].
    pub fn new(
        base_vars: Vars,
        pairing: RatMatrix,
        anchor: Vec<PolyVecField>,
        structure: FrameTensor,
    ) -> Result<Self> {
        let r = pairing.rows();
        if !pairing.is_square() {
            return Err(Error::Input("pairing matrix is not square".into()));
        }
        if !pairing.is_symmetric() {
            return Err(Error::Input("pairing matrix is not symmetric".into()));
        }
        let pairing_inv = pairing
            .inverse()
            .ok_or_else(|| Error::Input("pairing matrix is singular".into()))?;
        if anchor.len() != r {
            return Err(Error::Input(format!(
                "anchor has {} rows, rank is {r}",
                anchor.len()
            )));
        }
        let anchor = anchor
            .into_iter()
            .map(|v| PolyVecField::new(&base_vars, v.components().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        if structure.len() != r || structure.iter().any(|row| row.len() != r) {
            return Err(Error::Input(format!("structure must be {r}×{r}")));
        }
        let mut st = Vec::with_capacity(r);
        for row in structure {
            let mut new_row = Vec::with_capacity(r);
            for s in row {
                if s.rank() != r {
                    return Err(Error::Input(format!(
                        "structure entry has {} components, rank is {r}",
                        s.rank()
                    )));
                }
                new_row.push(Section(
                    s.0.iter()
                        .map(|p| p.over(&base_vars))
                        .collect::<Result<_>>()?,
                ));
            }
            st.push(new_row);
        }
        Ok(CourantAlgebroid {
            base_vars,
            rank: r,
            pairing,
            pairing_inv,
            anchor,
            structure: st,
            degree_cap: DEFAULT_DEGREE_CAP,
        })
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn base_vars(&self) -> &Vars {
        &self.base_vars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim_base(&self) -> usize {
        self.base_vars.len()
    }

    pub fn pairing(&self) -> &RatMatrix {
        &self.pairing
    }

    pub fn pairing_inv(&self) -> &RatMatrix {
        &self.pairing_inv
    }

    pub fn anchor(&self, i: usize) -> &PolyVecField {
        &self.anchor[i]
    }

    pub fn anchor_rows(&self) -> &[PolyVecField] {
        &self.anchor
    }

    pub fn structure(&self) -> &FrameTensor {
        &self.structure
    }

    /// Whether every anchor is zero (the algebroid is a quadratic Lie algebra
    /// over each point).
    pub fn has_zero_anchor(&self) -> bool {
        self.anchor.iter().all(PolyVecField::is_zero)
    }

    pub fn zero(&self) -> Section {
        Section::zero(&self.base_vars, self.rank)
    }

    pub fn basis(&self, i: usize) -> Section {
        Section::basis(&self.base_vars, self.rank, i)
    }

    pub fn frame(&self) -> Vec<Section> {
        (0..self.rank).map(|i| self.basis(i)).collect()
    }

    pub fn constant_section(&self, coeffs: &[Rational]) -> Section {
        Section::from_rationals(&self.base_vars, coeffs)
    }

    pub fn poly(&self, c: i64) -> Poly {
        Poly::from_int(&self.base_vars, c)
    }

    pub fn parse_poly(&self, text: &str) -> Result<Poly> {
        Poly::parse_in(text, &self.base_vars)
    }

    pub(crate) fn check_rank(&self, s: &Section) -> Result<()> {
        if s.rank() != self.rank {
            return Err(Error::Input(format!(
                "section has {} components, algebroid rank is {}",
                s.rank(),
                self.rank
            )));
        }
        Ok(())
    }

    pub(crate) fn check_degree(&self, s: &Section) -> Result<()> {
        let d = s.max_degree();
        if d > self.degree_cap {
            return Err(Error::DegreeCap {
                degree: d,
                cap: self.degree_cap,
            });
        }
        Ok(())
    }

    /// `⟨a, b⟩ = aᵀ P b`.
    pub fn pairing_of(&self, a: &Section, b: &Section) -> Result<Poly> {
        self.check_rank(a)?;
        self.check_rank(b)?;
        Ok(self.pair_unchecked(a, b))
    }

    pub(crate) fn pair_unchecked(&self, a: &Section, b: &Section) -> Poly {
        let mut acc = Poly::zero(&self.base_vars);
        for i in 0..self.rank {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                let p = &self.pairing[(i, j)];
                if p.is_zero() || b.0[j].is_zero() {
                    continue;
                }
                acc += &(&a.0[i] * &b.0[j]).scale(p);
            }
        }
        acc
    }

    /// `ρ(a) = Σ aⁱ ρ(eᵢ)`.
    pub fn anchor_of(&self, a: &Section) -> PolyVecField {
        let mut v = PolyVecField::zero(&self.base_vars);
        for (ai, rho) in a.0.iter().zip(&self.anchor) {
            if !ai.is_zero() && !rho.is_zero() {
                v = v.add(&rho.scale_by(ai));
            }
        }
        v
    }

    /// `ℒ_{ρa} f`.
    pub fn lie(&self, a: &Section, f: &Poly) -> Result<Poly> {
        let mut acc = Poly::zero(&self.base_vars);
        for (ai, rho) in a.0.iter().zip(&self.anchor) {
            if ai.is_zero() || rho.is_zero() {
                continue;
            }
            let d = rho.lie_derivative(f)?;
            if !d.is_zero() {
                acc += &(ai * &d);
            }
        }
        Ok(acc)
    }

    /// `ℒ_{ρeᵢ} f`.
    pub fn lie_frame(&self, i: usize, f: &Poly) -> Result<Poly> {
        self.anchor[i].lie_derivative(f)
    }

    /// The unique section `s` with `⟨s, b⟩ = df(ρb)` for every `b`.
    pub fn rho_star(&self, df: &[Poly]) -> Result<Section> {
        if df.len() != self.dim_base() {
            return Err(Error::Input(format!(
                "covector on the base has {} components, base has {} variables",
                df.len(),
                self.dim_base()
            )));
        }
        let mut v = self.zero();
        for (i, rho) in self.anchor.iter().enumerate() {
            for (c, d) in rho.components().iter().zip(df) {
                if !c.is_zero() && !d.is_zero() {
                    v.0[i] += &(c * d);
                }
            }
        }
        Ok(v.transform(&self.pairing_inv))
    }

    /// `ρ*df` for a function `f` on the base.
    pub fn rho_star_d(&self, f: &Poly) -> Result<Section> {
        let f = f.over(&self.base_vars)?;
        let df: Vec<Poly> = (0..self.dim_base()).map(|k| f.diff(k)).collect();
        self.rho_star(&df)
    }

    /// Musical isomorphism `E* → E` through the pairing.
    pub fn sharp(&self, alpha: &Covector) -> Section {
        Section(alpha.0.clone()).transform(&self.pairing_inv)
    }

    /// Musical isomorphism `E → E*`: `flat(a)(b) = ⟨a, b⟩`.
    pub fn flat(&self, a: &Section) -> Covector {
        Covector(a.transform(&self.pairing).0)
    }

    /// The Dorfman bracket of two sections.
    pub fn bracket(&self, a: &Section, b: &Section) -> Result<Section> {
        self.check_rank(a)?;
        self.check_rank(b)?;
        let r = self.rank;
        let mut out = self.zero();
        for i in 0..r {
            let ai = &a.0[i];
            if ai.is_zero() {
                continue;
            }
            for j in 0..r {
                let bj = &b.0[j];
                if bj.is_zero() {
                    continue;
                }
                let c = &self.structure[i][j];
                if !c.is_zero() {
                    let f = ai.checked_mul(bj, self.degree_cap)?;
                    out += &c.scale(&f);
                }
                let d = self.anchor[i].lie_derivative(bj)?;
                if !d.is_zero() {
                    out.0[j] += &ai.checked_mul(&d, self.degree_cap)?;
                }
            }
        }
        let rho_b = self.anchor_of(b);
        if !rho_b.is_zero() {
            for i in 0..r {
                let d = rho_b.lie_derivative(&a.0[i])?;
                out.0[i] -= &d;
            }
        }
        let pb = b.transform(&self.pairing);
        for i in 0..r {
            if pb.0[i].is_zero() || a.0[i].as_constant().is_some() {
                continue;
            }
            let s = self.rho_star_d(&a.0[i])?;
            if !s.is_zero() {
                out += &s.scale(&pb.0[i]);
            }
        }
        self.check_degree(&out)?;
        Ok(out)
    }

    /// Matrix trace of an endomorphism given in the frame.
    pub fn trace_endo(&self, m: &PolyMatrix) -> Result<Poly> {
        if m.len() != self.rank || m.iter().any(|row| row.len() != self.rank) {
            return Err(Error::Input(format!(
                "endomorphism must be {0}×{0}",
                self.rank
            )));
        }
        let mut acc = Poly::zero(&self.base_vars);
        for (i, row) in m.iter().enumerate() {
            acc += &row[i];
        }
        Ok(acc)
    }

    /// `tr₁ : E*⊗E*⊗E → E*` on a frame tensor `t[i][j] = B_{eᵢ} eⱼ`, so that
    /// `(tr₁B)(b) = tr(c ↦ B_c b)`.
    pub fn trace1(&self, t: &FrameTensor) -> Result<Covector> {
        if t.len() != self.rank || t.iter().any(|row| row.len() != self.rank) {
            return Err(Error::Input(format!(
                "tensor must be {0}×{0}×{0}",
                self.rank
            )));
        }
        let mut out = vec![Poly::zero(&self.base_vars); self.rank];
        for (i, row) in t.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                self.check_rank(s)?;
                out[j] += &s.0[i];
            }
        }
        Ok(Covector(out))
    }

    /// Seeded random polynomial: each monomial of degree ≤ `max_degree`
    /// appears with probability ½ and a coefficient in `[-range, range]`.
    pub fn random_poly(&self, rng: &mut ChaCha8Rng, max_degree: u32, range: i64) -> Poly {
        random_poly(&self.base_vars, rng, max_degree, range)
    }

    pub fn random_section(&self, rng: &mut ChaCha8Rng, max_degree: u32, range: i64) -> Section {
        Section(
            (0..self.rank)
                .map(|_| self.random_poly(rng, max_degree, range))
                .collect(),
        )
    }

    /// Verifies axioms 1)–3) and the anchor morphism property on frame
    /// elements and on seeded random sections.
    pub fn axiom_check(&self) -> CheckReport {
        self.axiom_check_seeded(AXIOM_SEED)
    }

    pub fn axiom_check_seeded(&self, seed: u64) -> CheckReport {
        let mut report = CheckReport::new();
        let frame = self.frame();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random: Vec<[Section; 3]> = (0..RANDOM_TRIPLES)
            .map(|_| {
                [
                    self.random_section(&mut rng, 2, 3),
                    self.random_section(&mut rng, 2, 3),
                    self.random_section(&mut rng, 2, 3),
                ]
            })
            .collect();
        let r = self.rank;
        let triples =
            || (0..r).flat_map(move |i| (0..r).flat_map(move |j| (0..r).map(move |k| (i, j, k))));

        let jacobi = |a: &Section, b: &Section, c: &Section| -> Result<Option<Section>> {
            let lhs = self.bracket(a, &self.bracket(b, c)?)?;
            let r1 = self.bracket(&self.bracket(a, b)?, c)?;
            let r2 = self.bracket(b, &self.bracket(a, c)?)?;
            let res = &(&lhs - &r1) - &r2;
            Ok((!res.is_zero()).then_some(res))
        };
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            for (i, j, k) in triples() {
                if let Some(res) = jacobi(&frame[i], &frame[j], &frame[k])? {
                    return Ok(Err(format!(
                        "frame triple (e{}, e{}, e{}): residual {res}",
                        i + 1,
                        j + 1,
                        k + 1
                    )));
                }
            }
            for (n, [a, b, c]) in random.iter().enumerate() {
                if let Some(res) = jacobi(a, b, c)? {
                    return Ok(Err(format!("random triple #{n}: residual {res}")));
                }
            }
            Ok(Ok(()))
        })();
        record(&mut report, "axiom1", outcome);

        let invariance = |a: &Section, b: &Section, c: &Section| -> Result<Option<Poly>> {
            let lhs = self.lie(a, &self.pair_unchecked(b, c))?;
            let rhs = &self.pair_unchecked(&self.bracket(a, b)?, c)
                + &self.pair_unchecked(b, &self.bracket(a, c)?);
            let res = &lhs - &rhs;
            Ok((!res.is_zero()).then_some(res))
        };
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            for (i, j, k) in triples() {
                if let Some(res) = invariance(&frame[i], &frame[j], &frame[k])? {
                    return Ok(Err(format!(
                        "frame triple (e{}, e{}, e{}): residual {res}",
                        i + 1,
                        j + 1,
                        k + 1
                    )));
                }
            }
            for (n, [a, b, c]) in random.iter().enumerate() {
                if let Some(res) = invariance(a, b, c)? {
                    return Ok(Err(format!("random triple #{n}: residual {res}")));
                }
            }
            Ok(Ok(()))
        })();
        record(&mut report, "axiom2", outcome);

        let square = |a: &Section| -> Result<Option<Section>> {
            let lhs = self.bracket(a, a)?.scale_rat(&rat(2));
            let rhs = self.rho_star_d(&self.pair_unchecked(a, a))?;
            let res = &lhs - &rhs;
            Ok((!res.is_zero()).then_some(res))
        };
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            for i in 0..r {
                if let Some(res) = square(&frame[i])? {
                    return Ok(Err(format!("frame element e{}: residual {res}", i + 1)));
                }
            }
            for i in 0..r {
                for j in (i + 1)..r {
                    if let Some(res) = square(&(&frame[i] + &frame[j]))? {
                        return Ok(Err(format!(
                            "frame sum e{} + e{}: residual {res}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
            for (n, t) in random.iter().enumerate() {
                if let Some(res) = square(&t[0])? {
                    return Ok(Err(format!("random section #{n}: residual {res}")));
                }
            }
            Ok(Ok(()))
        })();
        record(&mut report, "axiom3", outcome);

        let outcome = (|| -> Result<std::result::Result<(), String>> {
            for i in 0..r {
                for j in 0..r {
                    let lhs = self.anchor_of(&self.structure[i][j]);
                    let rhs = self.anchor[i].bracket(&self.anchor[j])?;
                    if lhs != rhs {
                        return Ok(Err(format!(
                            "frame pair (e{}, e{}): ρ[a,b] ≠ [ρa,ρb]",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
            Ok(Ok(()))
        })();
        record(&mut report, "anchor_morphism", outcome);
        report
    }
}

const AXIOM_SEED: u64 = 0x5eed_c0de;
const RANDOM_TRIPLES: usize = 10;

fn record(report: &mut CheckReport, id: &str, outcome: Result<std::result::Result<(), String>>) {
    match outcome {
        Ok(o) => report.record(id, o),
        Err(e) => report.fail(id, format!("evaluation error: {e}")),
    }
}

pub fn random_poly(vars: &Vars, rng: &mut ChaCha8Rng, max_degree: u32, range: i64) -> Poly {
    let mut terms = Vec::new();
    for e in monomials_up_to(vars.len(), max_degree) {
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(-range..=range);
            if c != 0 {
                terms.push((e, rat(c)));
            }
        }
    }
    Poly::from_terms(vars, terms).expect("exponent tuples match variable count")
}

/// All exponent tuples over `n` variables with total degree ≤ `d`.
fn monomials_up_to(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let used: u32 = prefix.iter().sum();
        for k in 0..=(d - used) {
            prefix.push(k);
            rec(n, d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

/// Free-function forms of the pairing and bracket.
pub fn pairing(a_alg: &CourantAlgebroid, a: &Section, b: &Section) -> Result<Poly> {
    a_alg.pairing_of(a, b)
}

pub fn bracket(a_alg: &CourantAlgebroid, a: &Section, b: &Section) -> Result<Section> {
    a_alg.bracket(a, b)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{make_vars, ratio};

    fn point_algebra(p: RatMatrix, structure: FrameTensor) -> CourantAlgebroid {
        let vars = make_vars::<&str>(&[]);
        let r = p.rows();
        CourantAlgebroid::new(
            vars.clone(),
            p,
            vec![PolyVecField::zero(&vars); r],
            structure,
        )
        .unwrap()
    }

    fn abelian(p: RatMatrix) -> CourantAlgebroid {
        let vars = make_vars::<&str>(&[]);
        let r = p.rows();
        let st = vec![vec![Section::zero(&vars, r); r]; r];
        point_algebra(p, st)
    }

    /// `T ⊕ T*` over a single coordinate `x`, frame `(∂x, dx)`, pairing ½.
    fn line_chart() -> CourantAlgebroid {
        let vars = make_vars(&["x"]);
        let p = RatMatrix::from_rows(vec![vec![rat(0), ratio(1, 2)], vec![ratio(1, 2), rat(0)]]);
        let anchor = vec![
            PolyVecField::new(&vars, vec![Poly::one(&vars)]).unwrap(),
            PolyVecField::zero(&vars),
        ];
        let st = vec![vec![Section::zero(&vars, 2); 2]; 2];
        CourantAlgebroid::new(vars, p, anchor, st).unwrap()
    }

    #[test]
    fn pairing_read_off() {
        let a = abelian(RatMatrix::from_ints(&[&[0, 1], &[1, 0]]));
        assert_eq!(a.pairing_of(&a.basis(0), &a.basis(1)).unwrap(), a.poly(1));
        let c = line_chart();
        let x = c.parse_poly("x").unwrap();
        let xe1 = c.basis(0).scale(&x);
        // ½ convention: ⟨x ∂x, dx⟩ = x/2
        assert_eq!(
            c.pairing_of(&xe1, &c.basis(1)).unwrap(),
            x.scale(&ratio(1, 2))
        );
    }

    #[test]
    fn pairing_rank_mismatch() {
        let a = abelian(RatMatrix::identity(2));
        let bad = Section::zero(a.base_vars(), 3);
        assert!(matches!(
            a.pairing_of(&bad, &a.basis(0)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn invalid_pairings_rejected() {
        let vars = make_vars::<&str>(&[]);
        let st = vec![vec![Section::zero(&vars, 2); 2]; 2];
        let anchor = vec![PolyVecField::zero(&vars); 2];
        assert!(CourantAlgebroid::new(
            vars.clone(),
            RatMatrix::from_ints(&[&[0, 1], &[2, 0]]),
            anchor.clone(),
            st.clone()
        )
        .is_err());
        assert!(
            CourantAlgebroid::new(vars, RatMatrix::from_ints(&[&[1, 1], &[1, 1]]), anchor, st)
                .is_err()
        );
    }

    #[test]
    fn abelian_bracket_vanishes() {
        let a = abelian(RatMatrix::identity(3));
        let s = a.constant_section(&[rat(1), rat(2), rat(3)]);
        assert!(a.bracket(&s, &a.basis(1)).unwrap().is_zero());
        assert!(a.axiom_check().all_pass());
    }

    #[test]
    fn rho_star_over_a_point_is_zero() {
        let a = abelian(RatMatrix::identity(2));
        assert!(a.rho_star(&[]).unwrap().is_zero());
        assert!(a.rho_star(&[a.poly(1)]).is_err());
    }

    #[test]
    fn musical_maps() {
        let a = abelian(RatMatrix::from_ints(&[&[0, 1], &[1, 0]]));
        let alpha = Covector(vec![a.poly(2), a.poly(5)]);
        let s = a.sharp(&alpha);
        assert_eq!(s, a.constant_section(&[rat(5), rat(2)]));
        assert_eq!(a.flat(&s), alpha);
        let id = abelian(RatMatrix::identity(2));
        assert_eq!(id.sharp(&alpha).0, alpha.0);
    }

    #[test]
    fn traces() {
        let a = abelian(RatMatrix::identity(3));
        let id: PolyMatrix = (0..3)
            .map(|k| (0..3).map(|j| a.poly(i64::from(k == j))).collect())
            .collect();
        assert_eq!(a.trace_endo(&id).unwrap(), a.poly(3));
        // α ⊗ β ⊗ v with α = e¹, β = 2e² + e³, v = 3e₁ - e₂: tr₁ = α(v) β = 3β
        let alpha = [1, 0, 0];
        let beta = [0, 2, 1];
        let v = [3, -1, 0];
        let t: FrameTensor = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| a.constant_section(&v.map(|vk| rat(alpha[i] * beta[j] * vk))))
                    .collect()
            })
            .collect();
        let tr = a.trace1(&t).unwrap();
        assert_eq!(tr.0, beta.map(|b| a.poly(3 * b)).to_vec());
    }

    #[test]
    fn line_chart_brackets() {
        let c = line_chart();
        let x = c.parse_poly("x").unwrap();
        // [∂x, x dx] = dx
        let xdx = c.basis(1).scale(&x);
        assert_eq!(c.bracket(&c.basis(0), &xdx).unwrap(), c.basis(1));
        // a = ∂x + x dx: [a, a] = d(ι_X ξ) = dx, ⟨a, a⟩ = x
        let a = &c.basis(0) + &xdx;
        assert_eq!(c.bracket(&a, &a).unwrap(), c.basis(1));
        assert_eq!(c.pairing_of(&a, &a).unwrap(), x);
        // ⟨ρ*dx, ∂x⟩ = 1
        let s = c.rho_star(&[c.poly(1)]).unwrap();
        assert_eq!(c.pairing_of(&s, &c.basis(0)).unwrap(), c.poly(1));
        assert!(c.axiom_check().all_pass());
    }

    #[test]
    fn leibniz_anomalies_on_random_sections() {
        let c = line_chart();
        let mut rng = seeded_rng(7);
        for _ in 0..5 {
            let a = c.random_section(&mut rng, 2, 3);
            let b = c.random_section(&mut rng, 2, 3);
            let f = c.random_poly(&mut rng, 2, 3);
            let ab = c.bracket(&a, &b).unwrap();
            let lhs = c.bracket(&a, &b.scale(&f)).unwrap();
            let rhs = &ab.scale(&f) + &b.scale(&c.lie(&a, &f).unwrap());
            assert_eq!(lhs, rhs);
            let lhs = c.bracket(&a.scale(&f), &b).unwrap();
            let rhs = &(&ab.scale(&f) - &a.scale(&c.lie(&b, &f).unwrap()))
                + &c.rho_star_d(&f)
                    .unwrap()
                    .scale(&c.pairing_of(&a, &b).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn rho_star_defining_identity() {
        let c = line_chart();
        let mut rng = seeded_rng(11);
        for _ in 0..5 {
            let f = c.random_poly(&mut rng, 3, 3);
            let b = c.random_section(&mut rng, 2, 3);
            let lhs = c.pairing_of(&c.rho_star_d(&f).unwrap(), &b).unwrap();
            assert_eq!(lhs, c.lie(&b, &f).unwrap());
        }
    }

    #[test]
    fn perturbed_structure_fails_axiom1() {
        // so(3) with ε-symbol constants, one constant bumped
        let vars = make_vars::<&str>(&[]);
        let mut st = vec![vec![Section::zero(&vars, 3); 3]; 3];
        for (i, j, k, s) in [
            (0, 1, 2, 1),
            (1, 2, 0, 1),
            (2, 0, 1, 1),
            (1, 0, 2, -1),
            (2, 1, 0, -1),
            (0, 2, 1, -1),
        ] {
            st[i][j].0[k] = Poly::from_int(&vars, s);
        }
        let good = point_algebra(RatMatrix::identity(3), st.clone());
        assert!(good.axiom_check().all_pass());
        st[0][1].0[0] = Poly::from_int(&vars, 1);
        let bad = point_algebra(RatMatrix::identity(3), st);
        let rep = bad.axiom_check();
        assert!(!rep.all_pass());
        assert!(rep.get("axiom1").unwrap().witness.is_some());
    }

    #[test]
    fn degree_cap_is_enforced() {
        let c = line_chart().with_degree_cap(2);
        let x = c.parse_poly("x^2").unwrap();
        let a = c.basis(0).scale(&x);
        let b = c.basis(1).scale(&x);
        assert!(matches!(c.bracket(&a, &b), Err(Error::DegreeCap { .. })));
    }
}
