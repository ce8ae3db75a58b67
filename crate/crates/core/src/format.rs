//! Structured-text (JSON) file formats for problems, duals and reports.
//!
//! Problem file:
//!
//! ```json
//! {
//!   "n": 3,
//!   "c": [1.0, 0.0, 0.0],
//!   "d": [0.0, 1.0],
//!   "blocks": [{"indices": [0], "p": 1}, {"indices": [1, 2], "p": "inf"}],
//!   "eq":   {"A": [[...]], "B": [[...]], "b": [...]},
//!   "ineq": {"H": [[...]], "K": [[...]], "p": [...]}
//! }
//! ```
//!
//! `eq` and `ineq` may be absent. Matrices are row-major lists of rows and indices
//! are 0-based. Doubles are written in shortest round-trip form, so
//! `parse(write(problem)) == problem` bit for bit.

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::dual::build_dual;
use crate::error::{Error, Result};
use crate::model::{Block, DualProblem, Exponent, ExtendedValue, PHOProblem, VectorPH};

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Exponent::Finite(p) => s.serialize_f64(p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(p) => Ok(Exponent::Finite(p)),
            NumOrStr::Str(s) if s == "inf" => Ok(Exponent::Infinity),
            NumOrStr::Str(s) => Err(de::Error::custom(format!(
                "exponent must be a number or \"inf\", found {s:?}"
            ))),
        }
    }
}

impl Serialize for ExtendedValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            ExtendedValue::Finite(v) => s.serialize_f64(v),
            ExtendedValue::NegInf => s.serialize_str("-inf"),
            ExtendedValue::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(v) => Ok(ExtendedValue::Finite(v)),
            NumOrStr::Str(s) if s == "-inf" => Ok(ExtendedValue::NegInf),
            NumOrStr::Str(s) if s == "inf" => Ok(ExtendedValue::PosInf),
            NumOrStr::Str(s) => Err(de::Error::custom(format!("bad extended value {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub indices: Vec<usize>,
    pub p: Exponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_psi: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IneqFile {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k_psi: Vec<Vec<f64>>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub blocks: Vec<BlockFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<EqFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ineq: Option<IneqFile>,
}

/// Dual file: the originating problem plus the dual exponents and simplification
/// state, under a top-level `dual` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualFile {
    pub problem: ProblemFile,
    pub dual_exponents: Vec<Exponent>,
    #[serde(default)]
    pub equality_rows: Vec<usize>,
    #[serde(default)]
    pub infeasible_rows: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DualEnvelope {
    dual: DualFile,
}

#[derive(Serialize)]
struct ReportEnvelope<'a, T: Serialize> {
    report: &'a T,
}

/// Row-major rows into a matrix. A matrix with no rows takes `cols_if_empty`
/// columns; ragged rows are a parse error.
pub fn matrix_from_rows(what: &str, rows: &[Vec<f64>], cols_if_empty: usize) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(cols_if_empty, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{what}: row {i} has {} entries, row 0 has {cols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<PHOProblem> {
        let n = self.n;
        let psi = VectorPH::new(
            self.blocks
                .into_iter()
                .map(|b| Block::new(b.indices, b.p))
                .collect(),
        );
        let m = psi.m();
        let mut prob = PHOProblem::unconstrained(DVector::from_vec(self.c), DVector::from_vec(self.d), psi);
        prob.n = n;
        prob.eq_lin = DMatrix::zeros(0, n);
        prob.ineq_lin = DMatrix::zeros(0, n);
        if let Some(eq) = self.eq {
            prob.eq_lin = matrix_from_rows("eq.A", &eq.a, n)?;
            prob.eq_psi = matrix_from_rows("eq.B", &eq.b_psi, m)?;
            prob.eq_rhs = DVector::from_vec(eq.b);
        }
        if let Some(ineq) = self.ineq {
            prob.ineq_lin = matrix_from_rows("ineq.H", &ineq.h, n)?;
            prob.ineq_psi = matrix_from_rows("ineq.K", &ineq.k_psi, m)?;
            prob.ineq_rhs = DVector::from_vec(ineq.p);
        }
        Ok(prob)
    }

    pub fn from_problem(prob: &PHOProblem) -> Self {
        let eq = (prob.k() > 0 || prob.eq_lin.nrows() > 0).then(|| EqFile {
            a: matrix_to_rows(&prob.eq_lin),
            b_psi: matrix_to_rows(&prob.eq_psi),
            b: prob.eq_rhs.iter().copied().collect(),
        });
        let ineq = (prob.l() > 0 || prob.ineq_lin.nrows() > 0).then(|| IneqFile {
            h: matrix_to_rows(&prob.ineq_lin),
            k_psi: matrix_to_rows(&prob.ineq_psi),
            p: prob.ineq_rhs.iter().copied().collect(),
        });
        ProblemFile {
            n: prob.n,
            c: prob.c.iter().copied().collect(),
            d: prob.d.iter().copied().collect(),
            blocks: prob
                .psi
                .blocks
                .iter()
                .map(|b| BlockFile {
                    indices: b.indices.clone(),
                    p: b.func.exponent,
                })
                .collect(),
            eq,
            ineq,
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn problem_from_json(text: &str) -> Result<PHOProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(json_error)?;
    file.into_problem()
}

pub fn problem_to_json(prob: &PHOProblem) -> String {
    to_pretty(&ProblemFile::from_problem(prob))
}

impl DualFile {
    pub fn from_dual(dual: &DualProblem) -> Self {
        DualFile {
            problem: ProblemFile::from_problem(&dual.base),
            dual_exponents: dual
                .psi_star
                .blocks
                .iter()
                .map(|b| b.func.exponent)
                .collect(),
            equality_rows: dual.equality_rows.clone(),
            infeasible_rows: dual.infeasible_rows.clone(),
        }
    }

    /// Rebuilds the dual from its base problem and checks the stored exponents.
    pub fn into_dual(self) -> Result<DualProblem> {
        let base = self.problem.into_problem()?;
        let mut dual = build_dual(&base)?;
        let expected: Vec<Exponent> = dual.psi_star.blocks.iter().map(|b| b.func.exponent).collect();
        if expected != self.dual_exponents {
            return Err(Error::Parse(format!(
                "dual_exponents {:?} do not match the base problem (expected {:?})",
                self.dual_exponents, expected
            )));
        }
        let m = base.m();
        if let Some(&i) = self
            .equality_rows
            .iter()
            .chain(&self.infeasible_rows)
            .find(|&&i| i >= m)
        {
            return Err(Error::Parse(format!("row index {i} out of range for m = {m}")));
        }
        dual.equality_rows = self.equality_rows;
        dual.infeasible_rows = self.infeasible_rows;
        Ok(dual)
    }
}

pub fn dual_to_json(dual: &DualProblem) -> String {
    to_pretty(&DualEnvelope {
        dual: DualFile::from_dual(dual),
    })
}

pub fn dual_from_json(text: &str) -> Result<DualProblem> {
    let env: DualEnvelope = serde_json::from_str(text).map_err(json_error)?;
    env.dual.into_dual()
}

/// Wraps a serializable report under a top-level `report` key.
pub fn report_to_json<T: Serialize>(report: &T) -> String {
    to_pretty(&ReportEnvelope { report })
}

pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    // Serialization of plain data into a String cannot fail.
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Parses any JSON document into `T`, mapping errors to [`Error::Parse`] with a
/// line/column location.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(json_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "n": 3,
        "c": [1.0, 0.1, -0.30000000000000004],
        "d": [0.0, 1e-300],
        "blocks": [{"indices": [2], "p": 0.5}, {"indices": [0, 1], "p": "inf"}],
        "ineq": {"H": [[1, 0, 0]], "K": [[0, -1]], "p": [0]}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let prob = problem_from_json(SAMPLE).unwrap();
        assert_eq!(prob.k(), 0);
        assert_eq!(prob.eq_lin.shape(), (0, 3));
        assert_eq!(prob.l(), 1);
        assert_eq!(prob.psi.blocks[1].func.exponent, Exponent::Infinity);
        let again = problem_from_json(&problem_to_json(&prob)).unwrap();
        assert_eq!(prob, again);
        assert_eq!(again.c[2].to_bits(), (-0.30000000000000004f64).to_bits());
    }

    #[test]
    fn ragged_rows_are_parse_errors() {
        let text = SAMPLE.replace("[[1, 0, 0]]", "[[1, 0, 0], [1]]");
        let err = problem_from_json(&text).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("ineq.H")));
    }

    #[test]
    fn bad_exponent_string() {
        let text = SAMPLE.replace("\"inf\"", "\"infinity\"");
        let err = problem_from_json(&text).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("line")));
    }

    #[test]
    fn extended_value_serde() {
        let v = vec![ExtendedValue::Finite(1.5), ExtendedValue::NegInf, ExtendedValue::PosInf];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"[1.5,"-inf","inf"]"#);
        let back: Vec<ExtendedValue> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }
}
