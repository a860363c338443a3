//! Versioned JSON documents.
//!
//! Every document is an object `{"format_version": 1, "kind": ..., "n": ...,
//! "data": ...}`. Complex numbers are `[re, im]` pairs, matrices are
//! row-major nested arrays, and Wigner-like grids are N x N arrays indexed
//! `[a1][a2]`.

use std::fs;
use std::path::Path;

use qphase::{
    Complex64, ComplexMatrix, HamiltonianCoefficients, Prime, RateMatrix, RealMatrix,
    TransitionMatrix, WignerFunction,
};
use serde_json::{json, Map, Value};

use crate::CliError;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Density {
        n: Prime,
        matrix: ComplexMatrix,
    },
    Unitary {
        n: Prime,
        matrix: ComplexMatrix,
    },
    KrausSet {
        n: Prime,
        operators: Vec<ComplexMatrix>,
    },
    Wigner(WignerFunction),
    Transition(TransitionMatrix),
    Rates(RateMatrix),
    /// Phase-point coefficients `H_a` as an N x N grid.
    HamiltonianA(HamiltonianCoefficients),
    /// Displacement coefficients `kappa_mu` as an N x N complex grid.
    HamiltonianD {
        n: Prime,
        kappa: Vec<Complex64>,
    },
    Trajectory {
        n: Prime,
        times: Vec<f64>,
        frames: Vec<WignerFunction>,
    },
    /// All `A_a` in flattening order.
    PhasePointOperators {
        n: Prime,
        operators: Vec<ComplexMatrix>,
    },
}

const KINDS: &[&str] = &[
    "density",
    "unitary",
    "kraus_set",
    "wigner",
    "transition",
    "rates",
    "hamiltonian_a",
    "hamiltonian_d",
    "trajectory",
    "phase_point_operators",
];

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Density { .. } => "density",
            Document::Unitary { .. } => "unitary",
            Document::KrausSet { .. } => "kraus_set",
            Document::Wigner(_) => "wigner",
            Document::Transition(_) => "transition",
            Document::Rates(_) => "rates",
            Document::HamiltonianA(_) => "hamiltonian_a",
            Document::HamiltonianD { .. } => "hamiltonian_d",
            Document::Trajectory { .. } => "trajectory",
            Document::PhasePointOperators { .. } => "phase_point_operators",
        }
    }

    pub fn n(&self) -> Prime {
        match self {
            Document::Density { n, .. }
            | Document::Unitary { n, .. }
            | Document::KrausSet { n, .. }
            | Document::HamiltonianD { n, .. }
            | Document::Trajectory { n, .. }
            | Document::PhasePointOperators { n, .. } => *n,
            Document::Wigner(w) => w.n(),
            Document::Transition(p) => p.n(),
            Document::Rates(r) => r.n(),
            Document::HamiltonianA(h) => h.n(),
        }
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("format_version".into(), json!(FORMAT_VERSION));
        obj.insert("kind".into(), json!(self.kind()));
        obj.insert("n".into(), json!(self.n().get()));
        let data = match self {
            Document::Density { matrix, .. } | Document::Unitary { matrix, .. } => {
                complex_matrix(matrix)
            }
            Document::KrausSet { operators, .. }
            | Document::PhasePointOperators { operators, .. } => {
                Value::Array(operators.iter().map(complex_matrix).collect())
            }
            Document::Wigner(w) => real_grid(w.n(), w.values()),
            Document::Transition(p) => real_matrix(p.matrix()),
            Document::Rates(r) => {
                obj.insert("hbar".into(), json!(r.hbar()));
                real_matrix(r.matrix())
            }
            Document::HamiltonianA(h) => real_grid(h.n(), h.values()),
            Document::HamiltonianD { n, kappa } => Value::Array(
                kappa
                    .chunks(n.dim())
                    .map(|row| Value::Array(row.iter().map(|z| complex(*z)).collect()))
                    .collect(),
            ),
            Document::Trajectory { n, times, frames } => {
                obj.insert("times".into(), json!(times));
                Value::Array(frames.iter().map(|f| real_grid(*n, f.values())).collect())
            }
        };
        obj.insert("data".into(), data);
        Value::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Document, CliError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Document(format!("invalid JSON: {e}")))?;
        Document::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Document, CliError> {
        let obj = value
            .as_object()
            .ok_or_else(|| doc_err("<root>", "expected a JSON object"))?;
        let version = obj
            .get("format_version")
            .and_then(Value::as_u64)
            .ok_or_else(|| doc_err("format_version", "missing or not an integer"))?;
        if version != FORMAT_VERSION {
            return Err(doc_err(
                "format_version",
                &format!("unsupported version {version}, expected {FORMAT_VERSION}"),
            ));
        }
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| doc_err("kind", "missing or not a string"))?;
        if !KINDS.contains(&kind) {
            return Err(doc_err("kind", &format!("unknown kind {kind:?}")));
        }
        let n_raw = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| doc_err("n", "missing or not a non-negative integer"))?;
        let n = u32::try_from(n_raw)
            .ok()
            .and_then(|n| Prime::new(n).ok())
            .ok_or_else(|| doc_err("n", &format!("{n_raw} is not a supported prime")))?;
        let data = obj.get("data").ok_or_else(|| doc_err("data", "missing"))?;
        let d = n.dim();
        let m = n.num_points();
        let core = |e: qphase::Error| doc_err("data", &e.to_string());

        Ok(match kind {
            "density" => Document::Density {
                n,
                matrix: parse_complex_matrix(data, d, "data")?,
            },
            "unitary" => Document::Unitary {
                n,
                matrix: parse_complex_matrix(data, d, "data")?,
            },
            "kraus_set" | "phase_point_operators" => {
                let items = as_array(data, "data")?;
                if kind == "kraus_set" && items.is_empty() {
                    return Err(doc_err("data", "expected at least one operator"));
                }
                let operators = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| parse_complex_matrix(v, d, &format!("data[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                if kind == "kraus_set" {
                    Document::KrausSet { n, operators }
                } else {
                    if operators.len() != m {
                        return Err(doc_err(
                            "data",
                            &format!("expected {m} operators, found {}", operators.len()),
                        ));
                    }
                    Document::PhasePointOperators { n, operators }
                }
            }
            "wigner" => Document::Wigner(
                WignerFunction::new(n, parse_real_grid(data, d, "data")?).map_err(core)?,
            ),
            "transition" => Document::Transition(
                TransitionMatrix::new(n, parse_real_matrix(data, m, "data")?).map_err(core)?,
            ),
            "rates" => {
                let hbar = match obj.get("hbar") {
                    None => qphase::HBAR,
                    Some(v) => parse_f64(v, "hbar")?,
                };
                let r = parse_real_matrix(data, m, "data")?;
                Document::Rates(
                    RateMatrix::new(n, r, hbar).map_err(|e| doc_err("hbar", &e.to_string()))?,
                )
            }
            "hamiltonian_a" => Document::HamiltonianA(
                HamiltonianCoefficients::new(n, parse_real_grid(data, d, "data")?).map_err(core)?,
            ),
            "hamiltonian_d" => {
                let rows = expect_len(as_array(data, "data")?, d, "data")?;
                let mut kappa = Vec::with_capacity(m);
                for (i, row) in rows.iter().enumerate() {
                    let path = format!("data[{i}]");
                    for (j, z) in expect_len(as_array(row, &path)?, d, &path)?
                        .iter()
                        .enumerate()
                    {
                        kappa.push(parse_complex(z, &format!("{path}[{j}]"))?);
                    }
                }
                Document::HamiltonianD { n, kappa }
            }
            "trajectory" => {
                let times_v = obj
                    .get("times")
                    .ok_or_else(|| doc_err("times", "missing"))?;
                let times = as_array(times_v, "times")?
                    .iter()
                    .enumerate()
                    .map(|(i, v)| parse_f64(v, &format!("times[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let items = expect_len(as_array(data, "data")?, times.len(), "data")?;
                let frames = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let vals = parse_real_grid(v, d, &format!("data[{i}]"))?;
                        WignerFunction::new(n, vals).map_err(core)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Document::Trajectory { n, times, frames }
            }
            _ => unreachable!("kind checked above"),
        })
    }

    pub fn load(path: &Path) -> Result<Document, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Document::parse(&text).map_err(|e| match e {
            CliError::Document(msg) => CliError::Document(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json_string())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn doc_err(path: &str, msg: &str) -> CliError {
    CliError::Document(format!("{path}: {msg}"))
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn complex_matrix(m: &ComplexMatrix) -> Value {
    let d = m.dim();
    Value::Array(
        (0..d)
            .map(|i| Value::Array(m.row(i).iter().map(|z| complex(*z)).collect()))
            .collect(),
    )
}

fn real_matrix(m: &RealMatrix) -> Value {
    Value::Array(m.rows().map(|row| json!(row)).collect())
}

fn real_grid(n: Prime, values: &[f64]) -> Value {
    Value::Array(values.chunks(n.dim()).map(|row| json!(row)).collect())
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array()
        .ok_or_else(|| doc_err(path, "expected an array"))
}

fn expect_len<'a>(items: &'a [Value], len: usize, path: &str) -> Result<&'a [Value], CliError> {
    if items.len() != len {
        return Err(doc_err(
            path,
            &format!("expected {len} entries, found {}", items.len()),
        ));
    }
    Ok(items)
}

fn parse_f64(v: &Value, path: &str) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| doc_err(path, "expected a number"))
}

fn parse_complex(v: &Value, path: &str) -> Result<Complex64, CliError> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| doc_err(path, "expected a [re, im] pair"))?;
    Ok(Complex64::new(
        parse_f64(&pair[0], &format!("{path}[0]"))?,
        parse_f64(&pair[1], &format!("{path}[1]"))?,
    ))
}

fn parse_complex_matrix(v: &Value, dim: usize, path: &str) -> Result<ComplexMatrix, CliError> {
    let rows = expect_len(as_array(v, path)?, dim, path)?;
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        for (j, z) in expect_len(as_array(row, &rp)?, dim, &rp)?
            .iter()
            .enumerate()
        {
            data.push(parse_complex(z, &format!("{rp}[{j}]"))?);
        }
    }
    ComplexMatrix::from_vec(data).map_err(|e| doc_err(path, &e.to_string()))
}

fn parse_real_rows(v: &Value, dim: usize, path: &str) -> Result<Vec<f64>, CliError> {
    let rows = expect_len(as_array(v, path)?, dim, path)?;
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        for (j, x) in expect_len(as_array(row, &rp)?, dim, &rp)?
            .iter()
            .enumerate()
        {
            data.push(parse_f64(x, &format!("{rp}[{j}]"))?);
        }
    }
    Ok(data)
}

fn parse_real_matrix(v: &Value, dim: usize, path: &str) -> Result<RealMatrix, CliError> {
    RealMatrix::from_vec(dim, parse_real_rows(v, dim, path)?)
        .map_err(|e| doc_err(path, &e.to_string()))
}

fn parse_real_grid(v: &Value, n: usize, path: &str) -> Result<Vec<f64>, CliError> {
    parse_real_rows(v, n, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn wigner_grid_layout() {
        let n = p(3);
        let w = WignerFunction::point_mass(n.point(1, 2));
        let v = Document::Wigner(w).to_value();
        assert_eq!(v["data"][1][2], json!(1.0));
        assert_eq!(v["data"][2][1], json!(0.0));
        assert_eq!(v["format_version"], json!(1));
        assert_eq!(v["kind"], json!("wigner"));
    }

    #[test]
    fn positional_errors() {
        let bad = r#"{"format_version": 1, "kind": "density", "n": 2, "data": [[[1, 0], [0, 0]], [[0, 0], [0]]]}"#;
        let err = Document::parse(bad).unwrap_err().to_string();
        assert!(err.contains("data[1][1]"), "{err}");

        let bad = r#"{"format_version": 1, "kind": "transition", "n": 2, "data": [[1, 0, 0]]}"#;
        let err = Document::parse(bad).unwrap_err().to_string();
        assert!(err.contains("expected 4 entries"), "{err}");

        let bad = r#"{"format_version": 1, "kind": "nonsense", "n": 2, "data": []}"#;
        assert!(Document::parse(bad)
            .unwrap_err()
            .to_string()
            .contains("unknown kind"));

        let bad = r#"{"format_version": 2, "kind": "wigner", "n": 2, "data": []}"#;
        assert!(Document::parse(bad)
            .unwrap_err()
            .to_string()
            .contains("unsupported version"));

        let bad = r#"{"format_version": 1, "kind": "wigner", "n": 4, "data": []}"#;
        assert!(Document::parse(bad)
            .unwrap_err()
            .to_string()
            .contains("not a supported prime"));

        let bad = r#"{"format_version": 1, "kind": "rates", "n": 2, "hbar": -1, "data": [[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        assert!(Document::parse(bad)
            .unwrap_err()
            .to_string()
            .contains("hbar"));
    }

    #[test]
    fn rates_default_hbar() {
        let text = r#"{"format_version": 1, "kind": "rates", "n": 2, "data": [[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        match Document::parse(text).unwrap() {
            Document::Rates(r) => assert_eq!(r.hbar(), 1.0),
            other => panic!("{other:?}"),
        }
    }
}
