//! JSON instance files.
//!
//! ```json
//! {
//!   "name": "exact_chart_flat",
//!   "base_vars": ["x", "y"],
//!   "rank": 4,
//!   "pairing": [["0", "1/2", ...], ...],
//!   "anchor": [["1", "0"], ...],
//!   "structure": [[["0", "0", "0", "0"], ...], ...],
//!   "metric": [["-1", ...], ...],
//!   "divergence": ["0", "0", "0", "0"],
//!   "connection": [[["0", ...], ...], ...],
//!   "metadata": {}
//! }
//! ```
//!
//! Rationals are written `-?int(/posint)?`, polynomials in the usual infix
//! grammar over `base_vars`. `anchor[i][k]` is the `∂_k` component of `ρ(eᵢ)`,
//! `structure[i][j]` the components of `[eᵢ, eⱼ]`, `connection[i][j]` those
//! of `D_{eᵢ} eⱼ`. The last four members are optional.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::connection::{DivergenceOp, GenConnection};
use crate::construct::InstanceSpec;
use crate::courant::{CourantAlgebroid, Section};
use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::metric::GenMetric;
use crate::polyalg::{fmt_rational, make_vars, parse_rational, Poly, PolyVecField, Vars};

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    base_vars: Vec<String>,
    rank: usize,
    pairing: Vec<Vec<String>>,
    anchor: Vec<Vec<String>>,
    structure: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    divergence: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    connection: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    metadata: Map<String, Value>,
}

fn shape_err(what: &str, expected: usize, got: usize) -> Error {
    Error::Input(format!("{what}: expected {expected} entries, found {got}"))
}

fn check_len<T>(what: &str, v: &[T], n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(shape_err(what, n, v.len()))
    }
}

fn rat_matrix(what: &str, rows: &[Vec<String>], r: usize) -> Result<RatMatrix> {
    check_len(what, rows, r)?;
    let mut out = Vec::with_capacity(r);
    for (i, row) in rows.iter().enumerate() {
        check_len(&format!("{what}[{i}]"), row, r)?;
        out.push(
            row.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(RatMatrix::from_rows(out))
}

fn polys(what: &str, items: &[String], n: usize, vars: &Vars) -> Result<Vec<Poly>> {
    check_len(what, items, n)?;
    items.iter().map(|s| Poly::parse_in(s, vars)).collect()
}

fn frame_tensor(
    what: &str,
    t: &[Vec<Vec<String>>],
    r: usize,
    vars: &Vars,
) -> Result<Vec<Vec<Section>>> {
    check_len(what, t, r)?;
    t.iter()
        .enumerate()
        .map(|(i, row)| {
            check_len(&format!("{what}[{i}]"), row, r)?;
            row.iter()
                .enumerate()
                .map(|(j, s)| Ok(Section(polys(&format!("{what}[{i}][{j}]"), s, r, vars)?)))
                .collect()
        })
        .collect()
}

/// Parses an instance file. Shapes are checked exactly; the axioms and the
/// metric are not validated here.
pub fn from_json(text: &str) -> Result<InstanceSpec> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let r = file.rank;
    let vars = make_vars(&file.base_vars);
    let n = vars.len();
    let pairing = rat_matrix("pairing", &file.pairing, r)?;
    check_len("anchor", &file.anchor, r)?;
    let anchor = file
        .anchor
        .iter()
        .enumerate()
        .map(|(i, row)| PolyVecField::new(&vars, polys(&format!("anchor[{i}]"), row, n, &vars)?))
        .collect::<Result<Vec<_>>>()?;
    let structure = frame_tensor("structure", &file.structure, r, &vars)?;
    let algebroid = CourantAlgebroid::new(vars.clone(), pairing, anchor, structure)?;
    let metric = file
        .metric
        .as_ref()
        .map(|m| GenMetric::new(rat_matrix("metric", m, r)?))
        .transpose()?;
    let divergence = file
        .divergence
        .as_ref()
        .map(|d| DivergenceOp::new(&algebroid, polys("divergence", d, r, &vars)?))
        .transpose()?;
    let connection = file
        .connection
        .as_ref()
        .map(|c| GenConnection::new(&algebroid, frame_tensor("connection", c, r, &vars)?))
        .transpose()?;
    Ok(InstanceSpec {
        name: file.name,
        algebroid,
        metric,
        divergence,
        connection,
        metadata: file.metadata,
    })
}

fn strings(ps: &[Poly]) -> Vec<String> {
    ps.iter().map(|p| p.to_string()).collect()
}

fn rat_strings(m: &RatMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|row| row.iter().map(fmt_rational).collect())
        .collect()
}

fn tensor_strings(t: &[Vec<Section>]) -> Vec<Vec<Vec<String>>> {
    t.iter()
        .map(|row| row.iter().map(|s| strings(&s.0)).collect())
        .collect()
}

/// Canonical pretty-printed form; `from_json(&to_json(s))` reproduces `s`.
pub fn to_json(spec: &InstanceSpec) -> String {
    let alg = &spec.algebroid;
    let file = InstanceFile {
        name: spec.name.clone(),
        base_vars: alg.base_vars().to_vec(),
        rank: alg.rank(),
        pairing: rat_strings(alg.pairing()),
        anchor: alg
            .anchor_rows()
            .iter()
            .map(|v| strings(v.components()))
            .collect(),
        structure: tensor_strings(alg.structure()),
        metric: spec.metric.as_ref().map(|g| rat_strings(g.matrix())),
        divergence: spec.divergence.as_ref().map(|d| strings(d.frame_values())),
        connection: spec
            .connection
            .as_ref()
            .map(|c| tensor_strings(c.coefficients())),
        metadata: spec.metadata.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("instance serializes");
    out.push('\n');
    out
}

pub fn read_file(path: &std::path::Path) -> Result<InstanceSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{canonical_connection, catalog, CATALOG_NAMES};

    #[test]
    fn catalog_round_trips() {
        for name in CATALOG_NAMES {
            let spec = catalog(name).unwrap();
            let text = to_json(&spec);
            let back = from_json(&text).unwrap();
            assert_eq!(to_json(&back), text, "{name}");
            assert_eq!(back.algebroid.structure(), spec.algebroid.structure());
            assert_eq!(back.metric, spec.metric);
        }
    }

    #[test]
    fn connection_block_round_trips() {
        let mut spec = catalog("exact_chart_H").unwrap();
        spec.connection =
            Some(canonical_connection(&spec.algebroid, spec.metric.as_ref().unwrap()).unwrap());
        let back = from_json(&to_json(&spec)).unwrap();
        assert_eq!(back.connection, spec.connection);
    }

    #[test]
    fn malformed_inputs() {
        let text = to_json(&catalog("abelian_point").unwrap());
        assert!(matches!(
            from_json(&text[..text.len() / 2]),
            Err(Error::Parse { .. })
        ));
        let bad_rank = text.replacen("\"rank\": 4", "\"rank\": 3", 1);
        assert!(matches!(from_json(&bad_rank), Err(Error::Input(_))));
        let bad_rat = text.replacen("\"1\"", "\"1.5\"", 1);
        assert!(from_json(&bad_rat).is_err());
    }
}
