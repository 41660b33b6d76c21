//! Tensorial curvatures built from the naive curvature
//! `R₀(a, b)c = D_a D_b c − D_b D_a c − D_{[a,b]} c`, their Ricci
//! contractions, and checkers for the identities relating them.
//!
//! Traces over `E` or `V±` use dual frames, `⟨ẽᵢ, eⱼ⟩ = δᵢⱼ`, so all
//! arithmetic stays rational. Tensors are evaluated on constant frames,
//! where the real-bilinear formulas give the tensor components directly.

use std::fmt;

use num_traits::Zero;

use crate::connection::{metric_defect, record, DivergenceOp, GenConnection};
use crate::construct::kernel_diagnostics;
use crate::courant::{CourantAlgebroid, Section};
use crate::error::{Error, Result, Side};
use crate::linalg::RatMatrix;
use crate::metric::{adapted_frame, project, AdaptedFrame, GenMetric};
use crate::polyalg::{rat, ratio, Poly, Rational};
use crate::report::{CheckReport, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RicciKind {
    GfPlus,
    GfMinus,
    Jv,
    Sscv,
    SvPlus,
    SvMinus,
    Total,
    Prime,
}

impl RicciKind {
    pub const ALL: [RicciKind; 8] = [
        RicciKind::GfPlus,
        RicciKind::GfMinus,
        RicciKind::Jv,
        RicciKind::Sscv,
        RicciKind::SvPlus,
        RicciKind::SvMinus,
        RicciKind::Total,
        RicciKind::Prime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RicciKind::GfPlus => "gf+",
            RicciKind::GfMinus => "gf-",
            RicciKind::Jv => "jv",
            RicciKind::Sscv => "sscv",
            RicciKind::SvPlus => "sv+",
            RicciKind::SvMinus => "sv-",
            RicciKind::Total => "total",
            RicciKind::Prime => "prime",
        }
    }

    pub fn parse(s: &str) -> Option<RicciKind> {
        RicciKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for RicciKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A bilinear form stored by its values on two bases. Coordinates of an
/// argument are read off by pairing with the dual vectors of its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciTensor {
    pub kind: RicciKind,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    row_dual: Vec<Vec<Rational>>,
    col_dual: Vec<Vec<Rational>>,
    pub values: Vec<Vec<Poly>>,
}

impl RicciTensor {
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.values[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(Poly::is_zero)
    }

    /// `Ric(a, b)` by contraction of the stored matrix.
    pub fn eval(&self, alg: &CourantAlgebroid, a: &Section, b: &Section) -> Result<Poly> {
        let ca: Vec<Poly> = self
            .row_dual
            .iter()
            .map(|d| alg.pairing_of(&alg.constant_section(d), a))
            .collect::<Result<_>>()?;
        let cb: Vec<Poly> = self
            .col_dual
            .iter()
            .map(|d| alg.pairing_of(&alg.constant_section(d), b))
            .collect::<Result<_>>()?;
        let mut acc = Poly::zero(alg.base_vars());
        for (x, row) in ca.iter().zip(&self.values) {
            if x.is_zero() {
                continue;
            }
            for (y, v) in cb.iter().zip(row) {
                if !y.is_zero() && !v.is_zero() {
                    acc += &(&(x * y) * v);
                }
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for RicciTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .values
            .iter()
            .map(|row| row.iter().map(|p| p.to_string()).collect())
            .collect();
        let width = cells
            .iter()
            .flatten()
            .map(|s| s.chars().count())
            .chain(self.col_labels.iter().map(|s| s.chars().count()))
            .max()
            .unwrap_or(1);
        let lw = self
            .row_labels
            .iter()
            .map(|s| s.chars().count())
            .max()
            .unwrap_or(0);
        write!(f, "{:lw$}", "")?;
        for c in &self.col_labels {
            write!(f, "  {c:>width$}")?;
        }
        writeln!(f)?;
        for (label, row) in self.row_labels.iter().zip(&cells) {
            write!(f, "{label:lw$}")?;
            for c in row {
                write!(f, "  {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn frame_labels(r: usize) -> Vec<String> {
    (1..=r).map(|i| format!("e{i}")).collect()
}

fn side_labels(n: usize, side: Side) -> Vec<String> {
    (1..=n).map(|i| format!("f{i}{side}")).collect()
}

/// Dual vectors of the standard frame: columns of `P⁻¹`.
fn frame_duals(alg: &CourantAlgebroid) -> Vec<Vec<Rational>> {
    let pinv = alg.pairing_inv();
    (0..alg.rank()).map(|i| pinv.column(i)).collect()
}

fn require_metric_connection(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Result<()> {
    metric_defect(alg, metric, conn).map_err(Error::NonMetricConnection)
}

/// `R_GF^±(a±, b∓)c = R₀(a±, b∓)c` with `a`, `b` projected to the indicated
/// sides; for metric `D` the result preserves the splitting.
pub fn r_gf(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
    side: Side,
    a: &Section,
    b: &Section,
    c: &Section,
) -> Result<Section> {
    require_metric_connection(alg, metric, conn)?;
    let a = project(metric, a, side);
    let b = project(metric, b, side.opposite());
    conn.naive_curvature(alg, &a, &b, c)
}

/// Components `⟨R_GF^±(fᵢ±, fⱼ∓) fₖ±, ẽₗ±⟩` over an adapted frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedCurvature {
    pub side: Side,
    pub values: Vec<Vec<Vec<Vec<Poly>>>>,
}

impl MixedCurvature {
    /// First `(i, j, k, m)` where `⟨R fₖ, fₘ⟩ + ⟨R fₘ, fₖ⟩ ≠ 0`, i.e. where
    /// the endomorphism part leaves `so(V±)`.
    pub fn skew_defect(&self, frame: &AdaptedFrame) -> Option<(usize, usize, usize, usize)> {
        let gram = frame.gram(self.side);
        let n = frame.side_rank(self.side);
        for (i, plane) in self.values.iter().enumerate() {
            for (j, m) in plane.iter().enumerate() {
                let lowered = |k: usize, mm: usize| -> Poly {
                    let mut acc = Poly::zero(m[k][0].vars());
                    for l in 0..n {
                        let g = &gram[(l, mm)];
                        if !g.is_zero() {
                            acc += &m[k][l].scale(g);
                        }
                    }
                    acc
                };
                for k in 0..n {
                    for mm in k..n {
                        if !(&lowered(k, mm) + &lowered(mm, k)).is_zero() {
                            return Some((i, j, k, mm));
                        }
                    }
                }
            }
        }
        None
    }
}

pub fn mixed_curvature(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
    side: Side,
) -> Result<MixedCurvature> {
    require_metric_connection(alg, metric, conn)?;
    let frame = adapted_frame(alg, metric)?;
    let own = frame.sections(alg, side);
    let other = frame.sections(alg, side.opposite());
    let duals = frame.dual_sections(alg, side);
    let mut values = Vec::with_capacity(own.len());
    for x in &own {
        let mut plane = Vec::with_capacity(other.len());
        for y in &other {
            let mut m = Vec::with_capacity(own.len());
            for z in &own {
                let rz = conn.naive_curvature(alg, x, y, z)?;
                m.push(duals.iter().map(|d| alg.pair_unchecked(d, &rz)).collect());
            }
            plane.push(m);
        }
        values.push(plane);
    }
    Ok(MixedCurvature { side, values })
}

/// `⟨R_JV(a, b)c, e⟩ = ½(⟨R₀(a, b)c, e⟩ + ⟨R₀(c, e)a, b⟩ + ⟨(Da)*b, (Dc)*e⟩)`.
pub fn r_jv(
    alg: &CourantAlgebroid,
    conn: &GenConnection,
    a: &Section,
    b: &Section,
    c: &Section,
    e: &Section,
) -> Result<Poly> {
    let t1 = alg.pairing_of(&conn.naive_curvature(alg, a, b, c)?, e)?;
    let t2 = alg.pairing_of(&conn.naive_curvature(alg, c, e, a)?, b)?;
    let t3 = alg.pairing_of(&conn.adjoint(alg, a, b)?, &conn.adjoint(alg, c, e)?)?;
    Ok((&(&t1 + &t2) + &t3).scale(&ratio(1, 2)))
}

/// Frame tables `Q[i][j][k][l] = ⟨R₀(eᵢ, eⱼ)eₖ, eₗ⟩` and
/// `A[i][j] = (Deᵢ)*eⱼ`.
struct Tables {
    r: usize,
    q: Vec<Poly>,
    adj: Vec<Vec<Section>>,
}

impl Tables {
    fn new(alg: &CourantAlgebroid, conn: &GenConnection) -> Result<Self> {
        let r = alg.rank();
        let frame = alg.frame();
        let mut q = Vec::with_capacity(r * r * r * r);
        for a in &frame {
            for b in &frame {
                let ab = alg.bracket(a, b)?;
                for (k, c) in frame.iter().enumerate() {
                    let dbc = conn.coefficient(frame_index(b), k);
                    let dac = conn.coefficient(frame_index(a), k);
                    let t = &(&conn.apply(alg, a, dbc)? - &conn.apply(alg, b, dac)?)
                        - &conn.apply(alg, &ab, c)?;
                    let lowered = t.transform(alg.pairing());
                    q.extend(lowered.0);
                }
            }
        }
        let adj = frame
            .iter()
            .map(|a| {
                frame
                    .iter()
                    .map(|b| conn.adjoint(alg, a, b))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Tables { r, q, adj })
    }

    fn q(&self, i: usize, j: usize, k: usize, l: usize) -> &Poly {
        &self.q[((i * self.r + j) * self.r + k) * self.r + l]
    }
}

fn frame_index(s: &Section) -> usize {
    s.0.iter().position(|p| !p.is_zero()).expect("frame vector")
}

fn frame_tensor(alg: &CourantAlgebroid, kind: RicciKind, values: Vec<Vec<Poly>>) -> RicciTensor {
    let r = alg.rank();
    RicciTensor {
        kind,
        row_labels: frame_labels(r),
        col_labels: frame_labels(r),
        row_dual: frame_duals(alg),
        col_dual: frame_duals(alg),
        values,
    }
}

/// `Ric_JV(a, b) = tr(R_JV(·, a)b)` over the standard frame.
pub fn ricci_jv(alg: &CourantAlgebroid, conn: &GenConnection) -> Result<RicciTensor> {
    let t = Tables::new(alg, conn)?;
    let r = alg.rank();
    let pinv = alg.pairing_inv();
    let half = ratio(1, 2);
    let mut values = vec![vec![Poly::zero(alg.base_vars()); r]; r];
    for (j, row) in values.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            let mut acc = Poly::zero(alg.base_vars());
            for i in 0..r {
                for l in 0..r {
                    let w = &pinv[(l, i)];
                    if w.is_zero() {
                        continue;
                    }
                    let jv = &(t.q(i, j, k, l) + t.q(k, l, i, j))
                        + &alg.pair_unchecked(&t.adj[i][j], &t.adj[k][l]);
                    acc += &jv.scale(&(w * &half));
                }
            }
            *cell = acc;
        }
    }
    Ok(frame_tensor(alg, RicciKind::Jv, values))
}

/// `Ric_SSCV(a, b) = Ric_JV(a, b) − Ric_JV(Ga, Gb)`.
pub fn ricci_sscv(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Result<RicciTensor> {
    let jv = ricci_jv(alg, conn)?;
    let g = metric.matrix();
    let r = alg.rank();
    let mut values = jv.values.clone();
    for (j, row) in values.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            for p in 0..r {
                for q in 0..r {
                    let w = &g[(p, j)] * &g[(q, k)];
                    if !w.is_zero() {
                        *cell -= &jv.values[p][q].scale(&w);
                    }
                }
            }
        }
    }
    Ok(frame_tensor(alg, RicciKind::Sscv, values))
}

/// `Ric_GF^±(a∓, b±) = tr±(R_GF^±(·, a∓)b±)`, rows over `V∓`, columns over `V±`.
pub fn ricci_gf(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
    side: Side,
) -> Result<RicciTensor> {
    require_metric_connection(alg, metric, conn)?;
    let frame = adapted_frame(alg, metric)?;
    ricci_gf_in(alg, &frame, conn, side)
}

fn ricci_gf_in(
    alg: &CourantAlgebroid,
    frame: &AdaptedFrame,
    conn: &GenConnection,
    side: Side,
) -> Result<RicciTensor> {
    let own = frame.sections(alg, side);
    let duals = frame.dual_sections(alg, side);
    let other = frame.sections(alg, side.opposite());
    let mut values = Vec::with_capacity(other.len());
    for a in &other {
        let mut row = Vec::with_capacity(own.len());
        for b in &own {
            let mut acc = Poly::zero(alg.base_vars());
            for (x, d) in own.iter().zip(&duals) {
                let rb = conn.naive_curvature(alg, x, a, b)?;
                acc += &alg.pair_unchecked(&rb, d);
            }
            row.push(acc);
        }
        values.push(row);
    }
    Ok(RicciTensor {
        kind: match side {
            Side::Plus => RicciKind::GfPlus,
            Side::Minus => RicciKind::GfMinus,
        },
        row_labels: side_labels(other.len(), side.opposite()),
        col_labels: side_labels(own.len(), side),
        row_dual: frame.dual(side.opposite()).to_vec(),
        col_dual: frame.dual(side).to_vec(),
        values,
    })
}

/// `tr±[[·, a∓]∓, b±]± = Σᵢ ⟨ẽᵢ±, [[fᵢ±, a∓]∓, b±]±⟩`.
pub fn bracket_trace(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    frame: &AdaptedFrame,
    side: Side,
    a: &Section,
    b: &Section,
) -> Result<Poly> {
    let mut acc = Poly::zero(alg.base_vars());
    for i in 0..frame.side_rank(side) {
        let f = frame.section(alg, side, i);
        let inner = project(metric, &alg.bracket(&f, a)?, side.opposite());
        let outer = alg.bracket(&inner, b)?;
        acc += &alg.pairing_of(&frame.dual_section(alg, side, i), &outer)?;
    }
    Ok(acc)
}

/// `Ric_SV^±(a∓, b±) = div([a∓, b±]±) − ℒ_{ρa∓}(div b±) − tr±[[·, a∓]∓, b±]±`.
/// Arguments are projected to `V∓` and `V±`. No connection is involved.
pub fn ricci_sv_pair(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
    side: Side,
    a: &Section,
    b: &Section,
) -> Result<Poly> {
    let frame = adapted_frame(alg, metric)?;
    ricci_sv_pair_in(alg, metric, &frame, dv, side, a, b)
}

/// As [`ricci_sv_pair`], tracing over a caller-supplied adapted frame.
pub fn ricci_sv_pair_in(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    frame: &AdaptedFrame,
    dv: &DivergenceOp,
    side: Side,
    a: &Section,
    b: &Section,
) -> Result<Poly> {
    let a = project(metric, a, side.opposite());
    let b = project(metric, b, side);
    let first = dv.apply(alg, &project(metric, &alg.bracket(&a, &b)?, side))?;
    let second = alg.lie(&a, &dv.apply(alg, &b)?)?;
    let third = bracket_trace(alg, metric, frame, side, &a, &b)?;
    Ok(&(&first - &second) - &third)
}

pub fn ricci_sv(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
    side: Side,
) -> Result<RicciTensor> {
    let frame = adapted_frame(alg, metric)?;
    let own = frame.sections(alg, side);
    let other = frame.sections(alg, side.opposite());
    let values = other
        .iter()
        .map(|a| {
            own.iter()
                .map(|b| ricci_sv_pair_in(alg, metric, &frame, dv, side, a, b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RicciTensor {
        kind: match side {
            Side::Plus => RicciKind::SvPlus,
            Side::Minus => RicciKind::SvMinus,
        },
        row_labels: side_labels(other.len(), side.opposite()),
        col_labels: side_labels(own.len(), side),
        row_dual: frame.dual(side.opposite()).to_vec(),
        col_dual: frame.dual(side).to_vec(),
        values,
    })
}

/// `Ric(a, b) = tr(R(·, a)b)` for the total curvature
/// `R(x, y) = R₀(x₊, y₋) + R₀(x₋, y₊)`, over the standard frame.
pub fn ricci_total(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Result<RicciTensor> {
    let t = Tables::new(alg, conn)?;
    let r = alg.rank();
    let plus = metric.projector(Side::Plus);
    let minus = metric.projector(Side::Minus);
    let pinv = alg.pairing_inv();
    // (Π± P⁻¹)[p][l] weights ⟨R₀((eᵢ)±, ·)·, ẽᵢ⟩ summed over i
    let wp = plus.mul(pinv);
    let wm = minus.mul(pinv);
    let contract = |w: &RatMatrix, q: usize, k: usize| -> Poly {
        let mut acc = Poly::zero(alg.base_vars());
        for p in 0..r {
            for l in 0..r {
                let c = &w[(p, l)];
                if !c.is_zero() {
                    let v = t.q(p, q, k, l);
                    if !v.is_zero() {
                        acc += &v.scale(c);
                    }
                }
            }
        }
        acc
    };
    let tp: Vec<Vec<Poly>> = (0..r)
        .map(|q| (0..r).map(|k| contract(&wp, q, k)).collect())
        .collect();
    let tm: Vec<Vec<Poly>> = (0..r)
        .map(|q| (0..r).map(|k| contract(&wm, q, k)).collect())
        .collect();
    let mut values = vec![vec![Poly::zero(alg.base_vars()); r]; r];
    for (j, row) in values.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            for q in 0..r {
                let m = &minus[(q, j)];
                if !m.is_zero() {
                    *cell += &tp[q][k].scale(m);
                }
                let p = &plus[(q, j)];
                if !p.is_zero() {
                    *cell += &tm[q][k].scale(p);
                }
            }
        }
    }
    Ok(frame_tensor(alg, RicciKind::Total, values))
}

/// `Ric′(a, b) = Ric_GF⁺(a₋, b₊) − Ric_GF⁻(a₊, b₋)` over the standard frame.
pub fn ricci_prime(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Result<RicciTensor> {
    let gp = ricci_gf(alg, metric, conn, Side::Plus)?;
    let gm = ricci_gf(alg, metric, conn, Side::Minus)?;
    let r = alg.rank();
    let frame = alg.frame();
    let mut values = vec![vec![Poly::zero(alg.base_vars()); r]; r];
    for (j, row) in values.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = &gp.eval(alg, &frame[j], &frame[k])? - &gm.eval(alg, &frame[j], &frame[k])?;
        }
    }
    Ok(frame_tensor(alg, RicciKind::Prime, values))
}

/// Dispatches on `kind`; each kind takes only the inputs it needs.
pub fn ricci(
    alg: &CourantAlgebroid,
    metric: Option<&GenMetric>,
    conn: Option<&GenConnection>,
    dv: Option<&DivergenceOp>,
    kind: RicciKind,
) -> Result<RicciTensor> {
    let need_conn =
        || conn.ok_or_else(|| Error::Input(format!("Ricci kind {kind} needs a connection")));
    let need_metric = || metric.ok_or(Error::MissingMetric);
    match kind {
        RicciKind::Jv => ricci_jv(alg, need_conn()?),
        RicciKind::Sscv => ricci_sscv(alg, need_metric()?, need_conn()?),
        RicciKind::GfPlus => ricci_gf(alg, need_metric()?, need_conn()?, Side::Plus),
        RicciKind::GfMinus => ricci_gf(alg, need_metric()?, need_conn()?, Side::Minus),
        RicciKind::Total => ricci_total(alg, need_metric()?, need_conn()?),
        RicciKind::Prime => ricci_prime(alg, need_metric()?, need_conn()?),
        RicciKind::SvPlus | RicciKind::SvMinus => {
            let g = need_metric()?;
            let dv =
                dv.ok_or_else(|| Error::Input(format!("Ricci kind {kind} needs a divergence")))?;
            let side = if kind == RicciKind::SvPlus {
                Side::Plus
            } else {
                Side::Minus
            };
            ricci_sv(alg, g, dv, side)
        }
    }
}

/// `div([a, b]) − ℒ_{ρa}(div b) + ℒ_{ρb}(div a)`.
pub fn compatibility_residual(
    alg: &CourantAlgebroid,
    dv: &DivergenceOp,
    a: &Section,
    b: &Section,
) -> Result<Poly> {
    let first = dv.apply(alg, &alg.bracket(a, b)?)?;
    let second = alg.lie(a, &dv.apply(alg, b)?)?;
    let third = alg.lie(b, &dv.apply(alg, a)?)?;
    Ok(&(&first - &second) + &third)
}

/// Whether `(G, div)` is compatible, decided on adapted-frame mixed pairs.
pub fn is_compatible(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
) -> Result<std::result::Result<(), String>> {
    let frame = adapted_frame(alg, metric)?;
    for side in Side::BOTH {
        let own = frame.sections(alg, side);
        let other = frame.sections(alg, side.opposite());
        for (i, a) in other.iter().enumerate() {
            for (j, b) in own.iter().enumerate() {
                let res = compatibility_residual(alg, dv, a, b)?;
                if !res.is_zero() {
                    return Ok(Err(format!(
                        "residual at (f{}{}, f{}{}) = {res}",
                        i + 1,
                        side.opposite(),
                        j + 1,
                        side
                    )));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// Symmetry of a bilinear form, decided on adapted mixed pairs (the total
/// Ricci tensor vanishes on same-side pairs).
pub fn mixed_symmetry(
    alg: &CourantAlgebroid,
    frame: &AdaptedFrame,
    ric: &RicciTensor,
) -> Result<std::result::Result<(), String>> {
    let plus = frame.sections(alg, Side::Plus);
    let minus = frame.sections(alg, Side::Minus);
    for (i, a) in minus.iter().enumerate() {
        for (j, b) in plus.iter().enumerate() {
            let ab = ric.eval(alg, a, b)?;
            let ba = ric.eval(alg, b, a)?;
            if ab != ba {
                return Ok(Err(format!(
                    "Ric(f{}-, f{}+) = {ab} but Ric(f{}+, f{}-) = {ba}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                )));
            }
        }
    }
    Ok(Ok(()))
}

fn check_side_ranks(frame: &AdaptedFrame, failures: &mut Vec<String>) {
    for side in Side::BOTH {
        if frame.side_rank(side) == 1 {
            failures.push(format!("V{side} has rank 1"));
        }
    }
}

fn check_connection_hypotheses(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
    dv: &DivergenceOp,
    label: &str,
    failures: &mut Vec<String>,
) {
    if let Err(w) = metric_defect(alg, metric, conn) {
        failures.push(format!("{label}is not metric ({w})"));
    }
    if let Some(v) = conn.is_pure_type(alg, metric).first_failure() {
        failures.push(format!(
            "{label}torsion is not of pure type ({}: {})",
            v.id,
            v.witness.as_deref().unwrap_or("")
        ));
    }
    if let Some(i) = conn.divergence_op(alg).first_difference(dv) {
        failures.push(format!(
            "{label}divergence differs from the given operator at e{}",
            i + 1
        ));
    }
}

fn hypotheses(failures: Vec<String>) -> Result<()> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(failures.join("; ")))
    }
}

/// On all adapted mixed pairs `(a∓, b±)`:
/// `Ric_SSCV(a, b) = 2 Ric_JV(a, b) = Ric_GF^±(a, b) + Ric_GF^∓(b, a)`.
/// Also checks that `Ric_SSCV` vanishes on same-side pairs.
pub fn verify_theorem1(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
) -> Result<CheckReport> {
    require_metric_connection(alg, metric, conn)?;
    let frame = adapted_frame(alg, metric)?;
    let jv = ricci_jv(alg, conn)?;
    let sscv = ricci_sscv(alg, metric, conn)?;
    let gp = ricci_gf_in(alg, &frame, conn, Side::Plus)?;
    let gm = ricci_gf_in(alg, &frame, conn, Side::Minus)?;
    let gf = |side: Side| if side == Side::Plus { &gp } else { &gm };
    let mut report = CheckReport::new();

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for side in Side::BOTH {
            let other = frame.sections(alg, side.opposite());
            let own = frame.sections(alg, side);
            for (i, a) in other.iter().enumerate() {
                for (j, b) in own.iter().enumerate() {
                    let s = sscv.eval(alg, a, b)?;
                    let twice_jv = jv.eval(alg, a, b)?.scale(&rat(2));
                    let g = &gf(side).eval(alg, a, b)? + &gf(side.opposite()).eval(alg, b, a)?;
                    if s != twice_jv || twice_jv != g {
                        return Ok(Err(format!(
                            "(f{}{}, f{}{}): sscv = {s}, 2jv = {twice_jv}, gf sum = {g}",
                            i + 1,
                            side.opposite(),
                            j + 1,
                            side
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "thm1", outcome);

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for side in Side::BOTH {
            let own = frame.sections(alg, side);
            for (i, a) in own.iter().enumerate() {
                for (j, b) in own.iter().enumerate() {
                    let s = sscv.eval(alg, a, b)?;
                    if !s.is_zero() {
                        return Ok(Err(format!(
                            "sscv(f{}{side}, f{}{side}) = {s}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "sscv_same_side", outcome);
    Ok(report)
}

/// `Ric_GF^± = Ric_SV^±` entrywise, and the corollary
/// `Ric_SSCV(a∓, b±) = Ric_SV^±(a∓, b±) + Ric_SV^∓(b±, a∓)`. The connection
/// must be metric, of pure type and have divergence `dv`, and neither side
/// may have rank 1.
pub fn verify_theorem2(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
    dv: &DivergenceOp,
) -> Result<CheckReport> {
    let frame = adapted_frame(alg, metric)?;
    let mut failures = Vec::new();
    check_side_ranks(&frame, &mut failures);
    check_connection_hypotheses(alg, metric, conn, dv, "", &mut failures);
    hypotheses(failures)?;

    let mut report = CheckReport::new();
    let gf = [
        ricci_gf_in(alg, &frame, conn, Side::Plus)?,
        ricci_gf_in(alg, &frame, conn, Side::Minus)?,
    ];
    let sv = [
        ricci_sv(alg, metric, dv, Side::Plus)?,
        ricci_sv(alg, metric, dv, Side::Minus)?,
    ];
    let mut outcome = Ok(());
    'outer: for (g, s) in gf.iter().zip(&sv) {
        for (i, (grow, srow)) in g.values.iter().zip(&s.values).enumerate() {
            for (j, (x, y)) in grow.iter().zip(srow).enumerate() {
                if x != y {
                    outcome = Err(format!(
                        "{}({}, {}) = {x} but {}({}, {}) = {y}",
                        g.kind,
                        g.row_labels[i],
                        g.col_labels[j],
                        s.kind,
                        s.row_labels[i],
                        s.col_labels[j]
                    ));
                    break 'outer;
                }
            }
        }
    }
    report.record("thm2", outcome);

    let sscv = ricci_sscv(alg, metric, conn)?;
    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for (idx, side) in Side::BOTH.into_iter().enumerate() {
            let other = frame.sections(alg, side.opposite());
            let own = frame.sections(alg, side);
            for (i, a) in other.iter().enumerate() {
                for (j, b) in own.iter().enumerate() {
                    let lhs = sscv.eval(alg, a, b)?;
                    let rhs = &sv[idx].eval(alg, a, b)? + &sv[1 - idx].eval(alg, b, a)?;
                    if lhs != rhs {
                        return Ok(Err(format!(
                            "(f{}{}, f{}{}): sscv = {lhs}, sv sum = {rhs}",
                            i + 1,
                            side.opposite(),
                            j + 1,
                            side
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "corollary", outcome);
    Ok(report)
}

/// `Ric_GF^±(D1) = Ric_GF^±(D2)` for two metric pure-type connections with
/// divergence `dv`, with diagnostics on `B = D2 − D1`.
pub fn verify_independence(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
    d1: &GenConnection,
    d2: &GenConnection,
) -> Result<CheckReport> {
    let frame = adapted_frame(alg, metric)?;
    let mut failures = Vec::new();
    check_side_ranks(&frame, &mut failures);
    check_connection_hypotheses(alg, metric, d1, dv, "first connection: ", &mut failures);
    check_connection_hypotheses(alg, metric, d2, dv, "second connection: ", &mut failures);
    hypotheses(failures)?;

    let mut report = CheckReport::new();
    let mut outcome = Ok(());
    for side in Side::BOTH {
        let a = ricci_gf_in(alg, &frame, d1, side)?;
        let b = ricci_gf_in(alg, &frame, d2, side)?;
        if let Some((i, j)) = first_difference(&a.values, &b.values) {
            outcome = Err(format!(
                "{}({}, {}): {} vs {}",
                a.kind, a.row_labels[i], a.col_labels[j], a.values[i][j], b.values[i][j]
            ));
            break;
        }
    }
    report.record("independence", outcome);
    let (decomp, trace) = kernel_diagnostics(alg, metric, &d1.difference(d2))?;
    report.record("kernel_decomposition", decomp);
    report.record("kernel_trace_free", trace);
    Ok(report)
}

fn first_difference(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> Option<(usize, usize)> {
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                return Some((i, j));
            }
        }
    }
    None
}

/// Identities for the total Ricci tensor of a metric connection:
///
/// * `total_ricci`: `Ric(a, b) = Ric_GF⁺(a₋, b₊) + Ric_GF⁻(a₊, b₋)`;
/// * `total_same_side`: `Ric` vanishes on same-side pairs;
/// * `sym_skew`: `Ric(a, Gb) = −Ric(Ga, b)`;
/// * `total_skew`: `R₀(a₊, b₋) = −R₀(b₋, a₊)`;
/// * `cyclic_trace`: `tr±[[·, a∓]∓, b±]± = tr∓[[·, b±]±, a∓]∓`;
/// * `sym_iff_compat`: symmetry of `Ric` and compatibility of `(G, div)`
///   agree.
pub fn verify_section4(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    conn: &GenConnection,
    dv: &DivergenceOp,
) -> Result<CheckReport> {
    require_metric_connection(alg, metric, conn)?;
    let frame = adapted_frame(alg, metric)?;
    let mut failures = Vec::new();
    check_side_ranks(&frame, &mut failures);
    check_connection_hypotheses(alg, metric, conn, dv, "", &mut failures);
    hypotheses(failures)?;

    let mut report = CheckReport::new();
    let total = ricci_total(alg, metric, conn)?;
    let gp = ricci_gf_in(alg, &frame, conn, Side::Plus)?;
    let gm = ricci_gf_in(alg, &frame, conn, Side::Minus)?;
    let basis = alg.frame();
    let r = alg.rank();

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for (j, a) in basis.iter().enumerate() {
            for (k, b) in basis.iter().enumerate() {
                let lhs = total.values[j][k].clone();
                let rhs = &gp.eval(alg, a, b)? + &gm.eval(alg, a, b)?;
                if lhs != rhs {
                    return Ok(Err(format!(
                        "Ric(e{}, e{}) = {lhs} but gf+ + gf- = {rhs}",
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "total_ricci", outcome);

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for side in Side::BOTH {
            let own = frame.sections(alg, side);
            for (i, a) in own.iter().enumerate() {
                for (j, b) in own.iter().enumerate() {
                    let v = total.eval(alg, a, b)?;
                    if !v.is_zero() {
                        return Ok(Err(format!(
                            "Ric(f{}{side}, f{}{side}) = {v}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "total_same_side", outcome);

    let g = metric.matrix();
    let mut outcome = Ok(());
    'outer: for j in 0..r {
        for k in 0..r {
            let mut lhs = Poly::zero(alg.base_vars());
            let mut rhs = Poly::zero(alg.base_vars());
            for m in 0..r {
                if !g[(m, k)].is_zero() {
                    lhs += &total.values[j][m].scale(&g[(m, k)]);
                }
                if !g[(m, j)].is_zero() {
                    rhs -= &total.values[m][k].scale(&g[(m, j)]);
                }
            }
            if lhs != rhs {
                outcome = Err(format!(
                    "Ric(e{0}, Ge{1}) = {lhs} but -Ric(Ge{0}, e{1}) = {rhs}",
                    j + 1,
                    k + 1
                ));
                break 'outer;
            }
        }
    }
    report.record("sym_skew", outcome);

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        let plus = frame.sections(alg, Side::Plus);
        let minus = frame.sections(alg, Side::Minus);
        for (i, a) in plus.iter().enumerate() {
            for (j, b) in minus.iter().enumerate() {
                for (k, c) in basis.iter().enumerate() {
                    let s = &conn.naive_curvature(alg, a, b, c)?
                        + &conn.naive_curvature(alg, b, a, c)?;
                    if let Some((m, p)) = s.first_nonzero() {
                        return Ok(Err(format!(
                            "R(f{}+, f{}-)e{} + R(f{}-, f{}+)e{} has component {} = {p}",
                            i + 1,
                            j + 1,
                            k + 1,
                            j + 1,
                            i + 1,
                            k + 1,
                            m + 1
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "total_skew", outcome);

    let outcome = (|| -> Result<std::result::Result<(), String>> {
        for side in Side::BOTH {
            let other = frame.sections(alg, side.opposite());
            let own = frame.sections(alg, side);
            for (i, a) in other.iter().enumerate() {
                for (j, b) in own.iter().enumerate() {
                    let lhs = bracket_trace(alg, metric, &frame, side, a, b)?;
                    let rhs = bracket_trace(alg, metric, &frame, side.opposite(), b, a)?;
                    if lhs != rhs {
                        return Ok(Err(format!(
                            "(f{}{}, f{}{}): {lhs} vs {rhs}",
                            i + 1,
                            side.opposite(),
                            j + 1,
                            side
                        )));
                    }
                }
            }
        }
        Ok(Ok(()))
    })();
    record(&mut report, "cyclic_trace", outcome);

    let compat = is_compatible(alg, metric, dv)?;
    let sym = mixed_symmetry(alg, &frame, &total)?;
    let note = format!(
        "compatible: {}; symmetric: {}",
        yes_no(&compat),
        yes_no(&sym)
    );
    let status = if compat.is_ok() == sym.is_ok() {
        Status::Pass
    } else {
        Status::Fail
    };
    let note = match (&compat, &sym) {
        (Err(w), _) | (Ok(()), Err(w)) => format!("{note} ({w})"),
        _ => note,
    };
    report.note("sym_iff_compat", status, note);
    Ok(report)
}

fn yes_no(r: &std::result::Result<(), String>) -> &'static str {
    if r.is_ok() {
        "yes"
    } else {
        "no"
    }
}
