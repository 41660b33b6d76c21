use serde_json::{json, Map, Value};

use crate::connection::{DivergenceOp, GenConnection};
use crate::courant::{CourantAlgebroid, Section};
use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::metric::{metric_validate, GenMetric};
use crate::polyalg::{make_vars, rat, ratio, Poly, PolyVecField, Rational, Vars};
use crate::report::CheckReport;

pub const CATALOG_NAMES: [&str; 6] = [
    "abelian_point",
    "so3_product",
    "so3_bidiagonal",
    "drinfeld_double_sl2",
    "exact_chart_flat",
    "exact_chart_H",
];

/// An algebroid bundled with the optional data an instance file may carry.
#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub name: String,
    pub algebroid: CourantAlgebroid,
    pub metric: Option<GenMetric>,
    pub divergence: Option<DivergenceOp>,
    pub connection: Option<GenConnection>,
    pub metadata: Map<String, Value>,
}

impl InstanceSpec {
    /// Axiom check followed by metric validation when a metric is present.
    pub fn validate(&self) -> CheckReport {
        let mut report = self.algebroid.axiom_check();
        if let Some(g) = &self.metric {
            report.extend(metric_validate(&self.algebroid, g));
        }
        report
    }

    pub fn require_metric(&self) -> Result<&GenMetric> {
        self.metric.as_ref().ok_or(Error::MissingMetric)
    }

    /// The stored divergence, or zero.
    pub fn divergence_or_zero(&self) -> DivergenceOp {
        self.divergence
            .clone()
            .unwrap_or_else(|| DivergenceOp::zero(&self.algebroid))
    }
}

pub fn catalog(name: &str) -> Result<InstanceSpec> {
    match name {
        "abelian_point" => Ok(abelian_point()),
        "so3_product" => Ok(so3_product()),
        "so3_bidiagonal" => Ok(so3_bidiagonal()),
        "drinfeld_double_sl2" => Ok(drinfeld_double_sl2()),
        "exact_chart_flat" => Ok(exact_chart_flat()),
        "exact_chart_H" => Ok(exact_chart_h()),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}

fn point_vars() -> Vars {
    make_vars::<&str>(&[])
}

fn zero_structure(vars: &Vars, r: usize) -> Vec<Vec<Section>> {
    vec![vec![Section::zero(vars, r); r]; r]
}

/// Sets `[e_i, e_j] += c e_k` for each `(i, j, k, c)`.
fn add_structure(st: &mut [Vec<Section>], entries: &[(usize, usize, usize, Rational)]) {
    for (i, j, k, c) in entries {
        let vars = st[*i][*j].0[*k].vars().clone();
        st[*i][*j].0[*k] += &Poly::constant(&vars, c.clone());
    }
}

/// `[eᵢ, eⱼ] = ε_ijk e_k` on the three vectors starting at `offset`.
fn so3_constants(offset: usize) -> Vec<(usize, usize, usize, Rational)> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0 {
                    out.push((offset + i, offset + j, offset + k, rat(e)));
                }
            }
        }
    }
    out
}

fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

fn build(
    name: &str,
    vars: Vars,
    pairing: RatMatrix,
    anchor: Vec<PolyVecField>,
    structure: Vec<Vec<Section>>,
    metric: RatMatrix,
    metadata: Value,
) -> InstanceSpec {
    let algebroid = CourantAlgebroid::new(vars, pairing, anchor, structure)
        .expect("catalog data is well formed");
    let divergence = Some(DivergenceOp::zero(&algebroid));
    let metadata = match metadata {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    InstanceSpec {
        name: name.to_string(),
        algebroid,
        metric: Some(GenMetric::new(metric).expect("square metric")),
        divergence,
        connection: None,
        metadata,
    }
}

fn abelian_point() -> InstanceSpec {
    let vars = point_vars();
    let p = RatMatrix::from_ints(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, -1, 0], &[0, 0, 0, -1]]);
    build(
        "abelian_point",
        vars.clone(),
        p.clone(),
        vec![PolyVecField::zero(&vars); 4],
        zero_structure(&vars, 4),
        p,
        json!({"description": "abelian quadratic Lie algebra of signature (2,2) over a point"}),
    )
}

fn so3_pairing(sign_second: i64) -> RatMatrix {
    let mut d = vec![rat(1); 3];
    d.extend(vec![rat(sign_second); 3]);
    RatMatrix::diag(&d)
}

fn so3_product() -> InstanceSpec {
    let vars = point_vars();
    let mut st = zero_structure(&vars, 6);
    add_structure(&mut st, &so3_constants(0));
    add_structure(&mut st, &so3_constants(3));
    build(
        "so3_product",
        vars.clone(),
        so3_pairing(-1),
        vec![PolyVecField::zero(&vars); 6],
        st,
        so3_pairing(-1),
        json!({
            "description": "so(3) x so(3) with pairing k + (-k), block-diagonal metric",
            "basis": ["a1", "a2", "a3", "b1", "b2", "b3"]
        }),
    )
}

fn so3_bidiagonal() -> InstanceSpec {
    let vars = point_vars();
    let mut st = zero_structure(&vars, 6);
    add_structure(&mut st, &so3_constants(0));
    add_structure(&mut st, &so3_constants(3));
    let mut g = RatMatrix::zeros(6, 6);
    for i in 0..3 {
        g[(i, i + 3)] = rat(1);
        g[(i + 3, i)] = rat(1);
    }
    build(
        "so3_bidiagonal",
        vars.clone(),
        so3_pairing(1),
        vec![PolyVecField::zero(&vars); 6],
        st,
        g,
        json!({
            "description": "so(3) x so(3) with pairing k + k; metric is the factor swap, V+ the diagonal, V- the antidiagonal",
            "basis": ["a1", "a2", "a3", "b1", "b2", "b3"]
        }),
    )
}

fn drinfeld_double_sl2() -> InstanceSpec {
    let vars = point_vars();
    // h, e, f: [h,e] = 2e, [h,f] = -2f, [e,f] = h
    let mut c = vec![vec![vec![0i64; 3]; 3]; 3];
    c[0][1][1] = 2;
    c[1][0][1] = -2;
    c[0][2][2] = -2;
    c[2][0][2] = 2;
    c[1][2][0] = 1;
    c[2][1][0] = -1;
    let mut entries = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if c[i][j][k] != 0 {
                    entries.push((i, j, k, rat(c[i][j][k])));
                    // coadjoint action: [x_i, ξ^k] = -Σ_j c_ij^k ξ^j
                    entries.push((i, 3 + k, 3 + j, rat(-c[i][j][k])));
                    entries.push((3 + k, i, 3 + j, rat(c[i][j][k])));
                }
            }
        }
    }
    let mut st = zero_structure(&vars, 6);
    add_structure(&mut st, &entries);
    let p = RatMatrix::from_ints(&[
        &[0, 0, 0, 1, 0, 0],
        &[0, 0, 0, 0, 1, 0],
        &[0, 0, 0, 0, 0, 1],
        &[1, 0, 0, 0, 0, 0],
        &[0, 1, 0, 0, 0, 0],
        &[0, 0, 1, 0, 0, 0],
    ]);
    build(
        "drinfeld_double_sl2",
        vars.clone(),
        p.clone(),
        vec![PolyVecField::zero(&vars); 6],
        st,
        p,
        json!({
            "description": "sl(2) + sl(2)* with the canonical pairing and the coadjoint semidirect bracket; metric [[0, 1], [1, 0]]",
            "basis": ["h", "e", "f", "h*", "e*", "f*"]
        }),
    )
}

/// `G = [[-g⁻¹b, g⁻¹], [g - b g⁻¹ b, b g⁻¹]]` on `T ⊕ T*`.
fn exact_metric(g: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = g.rows();
    let ginv = g.inverse().expect("invertible metric");
    let tl = ginv.mul(b).scale(&rat(-1));
    let bl = g.sub(&b.mul(&ginv).mul(b));
    let br = b.mul(&ginv);
    let mut out = RatMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = tl[(i, j)].clone();
            out[(i, j + n)] = ginv[(i, j)].clone();
            out[(i + n, j)] = bl[(i, j)].clone();
            out[(i + n, j + n)] = br[(i, j)].clone();
        }
    }
    out
}

/// `½[[0, 1], [1, 0]]` on `T ⊕ T*`.
fn half_pairing(n: usize) -> RatMatrix {
    let mut p = RatMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        p[(i, i + n)] = ratio(1, 2);
        p[(i + n, i)] = ratio(1, 2);
    }
    p
}

fn coordinate_anchor(vars: &Vars) -> Vec<PolyVecField> {
    let n = vars.len();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let comps = (0..n)
            .map(|k| Poly::from_int(vars, i64::from(i == k)))
            .collect();
        out.push(PolyVecField::new(vars, comps).expect("n components"));
    }
    out.extend(std::iter::repeat_n(PolyVecField::zero(vars), n));
    out
}

fn exact_chart_flat() -> InstanceSpec {
    let vars = make_vars(&["x", "y"]);
    let g = RatMatrix::from_ints(&[&[2, 1], &[1, 1]]);
    let b = RatMatrix::from_ints(&[&[0, 1], &[-1, 0]]);
    build(
        "exact_chart_flat",
        vars.clone(),
        half_pairing(2),
        coordinate_anchor(&vars),
        zero_structure(&vars, 4),
        exact_metric(&g, &b),
        json!({
            "description": "T + T* over the (x, y) chart with the Dorfman bracket",
            "basis": ["dx_vec", "dy_vec", "dx", "dy"],
            "pairing_convention": "<X + xi, Y + eta> = (xi(Y) + eta(X)) / 2",
            "metric": {"g": [["2", "1"], ["1", "1"]], "b": [["0", "1"], ["-1", "0"]]}
        }),
    )
}

fn exact_chart_h() -> InstanceSpec {
    let vars = make_vars(&["x", "y", "z"]);
    // twist H = dx∧dy∧dz: [∂ᵢ, ∂ⱼ] = ι_{∂ⱼ} ι_{∂ᵢ} H = ε_ijk dxᵏ
    let mut entries = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0 {
                    entries.push((i, j, 3 + k, rat(e)));
                }
            }
        }
    }
    let mut st = zero_structure(&vars, 6);
    add_structure(&mut st, &entries);
    let g = RatMatrix::from_ints(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]);
    let b = RatMatrix::from_ints(&[&[0, 1, 0], &[-1, 0, 2], &[0, -2, 0]]);
    build(
        "exact_chart_H",
        vars.clone(),
        half_pairing(3),
        coordinate_anchor(&vars),
        st,
        exact_metric(&g, &b),
        json!({
            "description": "T + T* over the (x, y, z) chart with the Dorfman bracket twisted by H = dx^dy^dz",
            "basis": ["dx_vec", "dy_vec", "dz_vec", "dx", "dy", "dz"],
            "pairing_convention": "<X + xi, Y + eta> = (xi(Y) + eta(X)) / 2",
            "twist": "H = dx^dy^dz",
            "metric": {"g": [["2", "1", "0"], ["1", "2", "1"], ["0", "1", "2"]], "b": [["0", "1", "0"], ["-1", "0", "2"], ["0", "-2", "0"]]}
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_instance_validates() {
        for name in CATALOG_NAMES {
            let spec = catalog(name).unwrap();
            let rep = spec.validate();
            assert!(rep.all_pass(), "{name}:\n{rep}");
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!(
            catalog("so4").unwrap_err(),
            Error::UnknownInstance("so4".into())
        );
    }

    #[test]
    fn flat_chart_dorfman_bracket() {
        let spec = catalog("exact_chart_flat").unwrap();
        let alg = &spec.algebroid;
        let x = alg.parse_poly("x").unwrap();
        // [∂x, x dy] = dy
        let b = alg.basis(3).scale(&x);
        assert_eq!(alg.bracket(&alg.basis(0), &b).unwrap(), alg.basis(3));
    }

    #[test]
    fn bidiagonal_split() {
        let spec = catalog("so3_bidiagonal").unwrap();
        let f =
            crate::metric::adapted_frame(&spec.algebroid, spec.metric.as_ref().unwrap()).unwrap();
        for (i, v) in f.basis(crate::Side::Plus).iter().enumerate() {
            assert_eq!(v[i], rat(1));
            assert_eq!(v[i + 3], rat(1));
        }
        for (i, v) in f.basis(crate::Side::Minus).iter().enumerate() {
            assert_eq!(v[i], rat(1));
            assert_eq!(v[i + 3], rat(-1));
        }
    }
}
