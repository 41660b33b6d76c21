//! Generalized metrics: involutive, self-adjoint endomorphisms `G` with the
//! splitting `E = V+ ⊕ V-` into the `±1` eigenbundles.

use num_traits::{One, Zero};

use crate::courant::{CourantAlgebroid, Section};
use crate::error::{Error, Result, Side};
use crate::linalg::{primitive_integer, RatMatrix};
use crate::polyalg::{fmt_rational, ratio, Rational};
use crate::report::CheckReport;

#[derive(Clone, Debug, PartialEq)]
pub struct GenMetric {
    g: RatMatrix,
}

impl GenMetric {
    pub fn new(g: RatMatrix) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Input("metric matrix is not square".into()));
        }
        Ok(GenMetric { g })
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.g
    }

    pub fn rank(&self) -> usize {
        self.g.rows()
    }

    /// `½(1 ± G)`.
    pub fn projector(&self, side: Side) -> RatMatrix {
        let id = RatMatrix::identity(self.rank());
        let half = ratio(1, 2);
        match side {
            Side::Plus => id.add(&self.g).scale(&half),
            Side::Minus => id.sub(&self.g).scale(&half),
        }
    }

    pub fn apply(&self, a: &Section) -> Section {
        a.transform(&self.g)
    }

    /// Dimension of `V±`, read off as the trace of the projector.
    pub fn side_rank(&self, side: Side) -> usize {
        self.projector(side).rank()
    }
}

/// Checks `G² = 1`, self-adjointness `(PG)ᵀ = PG` and nondegeneracy of the
/// pairing restricted to each eigenbundle.
pub fn metric_validate(alg: &CourantAlgebroid, metric: &GenMetric) -> CheckReport {
    let mut report = CheckReport::new();
    let r = alg.rank();
    let g = metric.matrix();
    if g.rows() != r {
        report.fail(
            "shape",
            format!("metric is {0}×{0}, algebroid rank is {r}", g.rows()),
        );
        return report;
    }
    let sq = g.mul(g);
    match sq.first_difference(&RatMatrix::identity(r)) {
        None => report.pass("involution"),
        Some((i, j)) => report.fail(
            "involution",
            format!("(G²)[{}][{}] = {}", i + 1, j + 1, fmt_rational(&sq[(i, j)])),
        ),
    }
    let pg = alg.pairing().mul(g);
    match pg.first_difference(&pg.transpose()) {
        None => report.pass("self_adjoint"),
        Some((i, j)) => report.fail(
            "self_adjoint",
            format!(
                "(PG)[{}][{}] = {} but (PG)[{}][{}] = {}",
                i + 1,
                j + 1,
                fmt_rational(&pg[(i, j)]),
                j + 1,
                i + 1,
                fmt_rational(&pg[(j, i)])
            ),
        ),
    }
    let mut degenerate = None;
    let mut empty = Vec::new();
    for side in Side::BOTH {
        let basis = side_basis(metric, side);
        if basis.is_empty() {
            empty.push(side);
            continue;
        }
        if gram(alg, &basis).inverse().is_none() && degenerate.is_none() {
            degenerate = Some(side);
        }
    }
    match degenerate {
        None => report.pass("nondegenerate"),
        Some(side) => report.fail(
            "nondegenerate",
            format!("pairing restricted to V{side} is degenerate"),
        ),
    }
    for side in empty {
        report.skip(
            format!("rank_zero_v{}", side_name(side)),
            format!("V{side} = 0"),
        );
    }
    report
}

pub(crate) fn side_name(side: Side) -> &'static str {
    match side {
        Side::Plus => "plus",
        Side::Minus => "minus",
    }
}

/// `a± = ½(1 ± G) a`.
pub fn project(metric: &GenMetric, a: &Section, side: Side) -> Section {
    a.transform(&metric.projector(side))
}

/// Leftmost independent columns of the projector, scaled to primitive
/// integer vectors.
fn side_basis(metric: &GenMetric, side: Side) -> Vec<Vec<Rational>> {
    let proj = metric.projector(side);
    proj.independent_columns()
        .into_iter()
        .map(|j| primitive_integer(&proj.column(j)))
        .collect()
}

fn gram(alg: &CourantAlgebroid, basis: &[Vec<Rational>]) -> RatMatrix {
    let p = alg.pairing();
    let pb: Vec<Vec<Rational>> = basis.iter().map(|v| p.mul_vec(v)).collect();
    let rows = basis
        .iter()
        .map(|u| {
            pb.iter()
                .map(|w| {
                    u.iter()
                        .zip(w)
                        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
                })
                .collect()
        })
        .collect();
    if basis.is_empty() {
        RatMatrix::zeros(0, 0)
    } else {
        RatMatrix::from_rows(rows)
    }
}

/// Constant bases of `V±` together with their duals, `⟨ẽᵢ, eⱼ⟩ = δᵢⱼ`
/// within each side.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    plus: Vec<Vec<Rational>>,
    minus: Vec<Vec<Rational>>,
    plus_dual: Vec<Vec<Rational>>,
    minus_dual: Vec<Vec<Rational>>,
    plus_gram: RatMatrix,
    minus_gram: RatMatrix,
    plus_gram_inv: RatMatrix,
    minus_gram_inv: RatMatrix,
}

impl AdaptedFrame {
    /// Builds the frame from explicit bases, checking they are eigenvectors
    /// of `G` spanning `E` with nondegenerate Gram matrices.
    pub fn from_bases(
        alg: &CourantAlgebroid,
        metric: &GenMetric,
        plus: Vec<Vec<Rational>>,
        minus: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let r = alg.rank();
        if plus.len() + minus.len() != r || plus.iter().chain(&minus).any(|v| v.len() != r) {
            return Err(Error::Input(format!(
                "adapted bases must consist of {r} vectors of length {r}"
            )));
        }
        for (side, basis) in [(Side::Plus, &plus), (Side::Minus, &minus)] {
            let sign = Rational::from_integer(side.sign().into());
            for v in basis {
                let gv = metric.matrix().mul_vec(v);
                if gv.iter().zip(v).any(|(x, y)| *x != &sign * y) {
                    return Err(Error::Input(format!("basis vector is not in V{side}")));
                }
            }
        }
        let all: Vec<Vec<Rational>> = plus.iter().chain(&minus).cloned().collect();
        if RatMatrix::from_rows(all).rank() != r {
            return Err(Error::Input("adapted bases do not span E".into()));
        }
        let plus_gram = gram(alg, &plus);
        let minus_gram = gram(alg, &minus);
        let plus_gram_inv = plus_gram.inverse().ok_or(Error::SingularGram(Side::Plus))?;
        let minus_gram_inv = minus_gram
            .inverse()
            .ok_or(Error::SingularGram(Side::Minus))?;
        let dual = |basis: &[Vec<Rational>], ginv: &RatMatrix| -> Vec<Vec<Rational>> {
            (0..basis.len())
                .map(|i| {
                    let mut v = vec![Rational::zero(); r];
                    for (j, b) in basis.iter().enumerate() {
                        let c = &ginv[(j, i)];
                        if c.is_zero() {
                            continue;
                        }
                        for (vk, bk) in v.iter_mut().zip(b) {
                            *vk += c * bk;
                        }
                    }
                    v
                })
                .collect()
        };
        Ok(AdaptedFrame {
            plus_dual: dual(&plus, &plus_gram_inv),
            minus_dual: dual(&minus, &minus_gram_inv),
            plus,
            minus,
            plus_gram,
            minus_gram,
            plus_gram_inv,
            minus_gram_inv,
        })
    }

    pub fn basis(&self, side: Side) -> &[Vec<Rational>] {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn dual(&self, side: Side) -> &[Vec<Rational>] {
        match side {
            Side::Plus => &self.plus_dual,
            Side::Minus => &self.minus_dual,
        }
    }

    pub fn gram(&self, side: Side) -> &RatMatrix {
        match side {
            Side::Plus => &self.plus_gram,
            Side::Minus => &self.minus_gram,
        }
    }

    pub fn gram_inv(&self, side: Side) -> &RatMatrix {
        match side {
            Side::Plus => &self.plus_gram_inv,
            Side::Minus => &self.minus_gram_inv,
        }
    }

    pub fn side_rank(&self, side: Side) -> usize {
        self.basis(side).len()
    }

    pub fn section(&self, alg: &CourantAlgebroid, side: Side, i: usize) -> Section {
        alg.constant_section(&self.basis(side)[i])
    }

    pub fn dual_section(&self, alg: &CourantAlgebroid, side: Side, i: usize) -> Section {
        alg.constant_section(&self.dual(side)[i])
    }

    pub fn sections(&self, alg: &CourantAlgebroid, side: Side) -> Vec<Section> {
        (0..self.side_rank(side))
            .map(|i| self.section(alg, side, i))
            .collect()
    }

    pub fn dual_sections(&self, alg: &CourantAlgebroid, side: Side) -> Vec<Section> {
        (0..self.side_rank(side))
            .map(|i| self.dual_section(alg, side, i))
            .collect()
    }

    /// Plus vectors followed by minus vectors, with their sides.
    pub fn all(&self) -> Vec<(Side, &[Rational])> {
        self.plus
            .iter()
            .map(|v| (Side::Plus, v.as_slice()))
            .chain(self.minus.iter().map(|v| (Side::Minus, v.as_slice())))
            .collect()
    }

    /// Columns are the adapted vectors in the order of [`AdaptedFrame::all`].
    pub fn change_of_basis(&self) -> RatMatrix {
        let cols: Vec<&Vec<Rational>> = self.plus.iter().chain(&self.minus).collect();
        let r = cols.len();
        let mut m = RatMatrix::zeros(r, r);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..r {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    /// Coordinates of a section along the `side` basis: `⟨ẽᵢ, a⟩`.
    pub fn coordinates(
        &self,
        alg: &CourantAlgebroid,
        side: Side,
        a: &Section,
    ) -> Result<Vec<crate::Poly>> {
        self.dual(side)
            .iter()
            .map(|d| alg.pairing_of(&alg.constant_section(d), a))
            .collect()
    }
}

/// Bases from the leftmost independent columns of `½(1 ± G)`, duals from the
/// inverse Gram matrix of each side.
pub fn adapted_frame(alg: &CourantAlgebroid, metric: &GenMetric) -> Result<AdaptedFrame> {
    if metric.rank() != alg.rank() {
        return Err(Error::Input(format!(
            "metric is {0}×{0}, algebroid rank is {1}",
            metric.rank(),
            alg.rank()
        )));
    }
    let plus = side_basis(metric, Side::Plus);
    let minus = side_basis(metric, Side::Minus);
    AdaptedFrame::from_bases(alg, metric, plus, minus)
}

/// `diag(1, …, 1, -1, …, -1)`.
pub fn block_metric(plus: usize, minus: usize) -> GenMetric {
    let mut d = vec![Rational::one(); plus];
    d.extend(std::iter::repeat_n(-Rational::one(), minus));
    GenMetric {
        g: RatMatrix::diag(&d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{make_vars, rat, Poly, PolyVecField};

    fn point(p: RatMatrix) -> CourantAlgebroid {
        let vars = make_vars::<&str>(&[]);
        let r = p.rows();
        CourantAlgebroid::new(
            vars.clone(),
            p,
            vec![PolyVecField::zero(&vars); r],
            vec![vec![Section::zero(&vars, r); r]; r],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_split() {
        let alg = point(RatMatrix::from_ints(&[&[1, 0], &[0, -1]]));
        let g = GenMetric::new(RatMatrix::from_ints(&[&[1, 0], &[0, -1]])).unwrap();
        assert!(metric_validate(&alg, &g).all_pass());
        let f = adapted_frame(&alg, &g).unwrap();
        assert_eq!(f.basis(Side::Plus), &[vec![rat(1), rat(0)]]);
        assert_eq!(f.dual(Side::Plus), &[vec![rat(1), rat(0)]]);
        assert_eq!(f.dual(Side::Minus), &[vec![rat(0), rat(-1)]]);
        let a = alg.basis(0);
        assert_eq!(project(&g, &a, Side::Plus), a);
        assert!(project(&g, &a, Side::Minus).is_zero());
    }

    #[test]
    fn hyperbolic_plane() {
        let p = RatMatrix::from_ints(&[&[0, 1], &[1, 0]]);
        let alg = point(p.clone());
        let g = GenMetric::new(p).unwrap();
        assert!(metric_validate(&alg, &g).all_pass());
        let f = adapted_frame(&alg, &g).unwrap();
        assert_eq!(f.basis(Side::Plus), &[vec![rat(1), rat(1)]]);
        assert_eq!(f.dual(Side::Plus), &[vec![ratio(1, 2), ratio(1, 2)]]);
        assert_eq!(f.basis(Side::Minus), &[vec![rat(1), rat(-1)]]);
        assert_eq!(f.dual(Side::Minus), &[vec![ratio(-1, 2), ratio(1, 2)]]);
        // duals pair to zero with the opposite side
        let em = alg.constant_section(&f.basis(Side::Minus)[0]);
        let dp = f.dual_section(&alg, Side::Plus, 0);
        assert!(alg.pairing_of(&dp, &em).unwrap().is_zero());
    }

    #[test]
    fn identity_metric_has_empty_minus_side() {
        let alg = point(RatMatrix::identity(3));
        let g = GenMetric::new(RatMatrix::identity(3)).unwrap();
        let rep = metric_validate(&alg, &g);
        assert!(rep.all_pass());
        assert_eq!(rep.status("rank_zero_vminus"), Some(crate::Status::Skipped));
        let f = adapted_frame(&alg, &g).unwrap();
        assert_eq!(f.side_rank(Side::Plus), 3);
        assert_eq!(f.side_rank(Side::Minus), 0);
    }

    #[test]
    fn failures_carry_witnesses() {
        let alg = point(RatMatrix::identity(2));
        let g = GenMetric::new(RatMatrix::from_ints(&[&[1, 1], &[0, 1]])).unwrap();
        let rep = metric_validate(&alg, &g);
        assert_eq!(rep.status("involution"), Some(crate::Status::Fail));
        assert!(rep
            .get("involution")
            .unwrap()
            .witness
            .as_ref()
            .unwrap()
            .contains("[1][2]"));
        assert_eq!(rep.status("self_adjoint"), Some(crate::Status::Fail));
    }

    #[test]
    fn null_eigenline_is_degenerate() {
        // P = [[0,1],[1,0]] and G = diag(1,-1): G² = 1 but PG is not symmetric
        // and each eigenline is isotropic
        let alg = point(RatMatrix::from_ints(&[&[0, 1], &[1, 0]]));
        let g = GenMetric::new(RatMatrix::from_ints(&[&[1, 0], &[0, -1]])).unwrap();
        let rep = metric_validate(&alg, &g);
        assert_eq!(rep.status("nondegenerate"), Some(crate::Status::Fail));
        assert!(matches!(
            adapted_frame(&alg, &g),
            Err(Error::SingularGram(Side::Plus))
        ));
    }

    #[test]
    fn swap_metric_projection() {
        // k ⊕ k with the factor swap; a = (x, 0) in the first factor
        let vars = make_vars(&["x"]);
        let r = 6;
        let alg = CourantAlgebroid::new(
            vars.clone(),
            RatMatrix::identity(r),
            vec![PolyVecField::zero(&vars); r],
            vec![vec![Section::zero(&vars, r); r]; r],
        )
        .unwrap();
        let mut g = RatMatrix::zeros(6, 6);
        for i in 0..3 {
            g[(i, i + 3)] = rat(1);
            g[(i + 3, i)] = rat(1);
        }
        let g = GenMetric::new(g).unwrap();
        let x = Poly::var(&vars, 0);
        let half_x = x.scale(&ratio(1, 2));
        let mut a = alg.zero();
        a.0[0] = x.clone();
        let ap = project(&g, &a, Side::Plus);
        let am = project(&g, &a, Side::Minus);
        assert_eq!(ap.0[0], half_x);
        assert_eq!(ap.0[3], half_x);
        assert_eq!(am.0[3], -&half_x);
        assert_eq!(&ap + &am, a);
        assert_eq!(project(&g, &ap, Side::Plus), ap);
    }
}
