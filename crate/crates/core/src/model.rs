//! Problem data model.
//!
//! A positively homogeneous optimization problem is
//!
//! ```text
//! min  cᵀx + dᵀΨ(x)
//! s.t. A x + B Ψ(x) = b
//!      H x + K Ψ(x) ≥ p
//! ```
//!
//! where `Ψ(x) = (ψ_1(x_{I_1}), …, ψ_m(x_{I_m}))` stacks one positively homogeneous
//! function per block of a partition of the variables. All indices are 0-based.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Exponent of a p-norm atom. `Infinity` is a distinguished value and never enters
/// floating-point arithmetic as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Checked constructor for a finite exponent.
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Exponent::Finite(p) => p.is_finite() && p > 0.0,
            Exponent::Infinity => true,
        }
    }

    /// True for exponents in `(0, 1]`, where the unit ball is spanned by the signed
    /// coordinate vectors.
    pub fn is_at_most_one(&self) -> bool {
        matches!(*self, Exponent::Finite(p) if p <= 1.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhKind {
    /// `‖x‖_p = (Σ|x_i|^p)^{1/p}`, or `max |x_i|` for `p = ∞`. Not a norm for `p < 1`
    /// but still positively homogeneous, nonnegative and zero only at the origin.
    PNorm,
}

/// One positively homogeneous atom `ψ_i: ℝ^{n_i} → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPH {
    pub kind: PhKind,
    pub exponent: Exponent,
    pub dim: usize,
}

impl ScalarPH {
    pub fn pnorm(exponent: Exponent, dim: usize) -> Self {
        ScalarPH {
            kind: PhKind::PNorm,
            exponent,
            dim,
        }
    }

    /// Same atom with another exponent (used to describe dual atoms).
    pub fn with_exponent(&self, exponent: Exponent) -> Self {
        ScalarPH {
            exponent,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub indices: Vec<usize>,
    pub func: ScalarPH,
}

impl Block {
    pub fn new(indices: Vec<usize>, exponent: Exponent) -> Self {
        let dim = indices.len();
        Block {
            indices,
            func: ScalarPH::pnorm(exponent, dim),
        }
    }

    /// Gathers `x_{I_i}`.
    pub fn gather(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.indices.len(), self.indices.iter().map(|&j| x[j]))
    }
}

/// Vector positively homogeneous function `Ψ`: an ordered list of disjoint blocks
/// covering every variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorPH {
    pub blocks: Vec<Block>,
}

impl VectorPH {
    pub fn new(blocks: Vec<Block>) -> Self {
        VectorPH { blocks }
    }

    /// `|x|` componentwise: `n` singleton blocks in index order.
    pub fn abs(n: usize) -> Self {
        VectorPH {
            blocks: (0..n)
                .map(|j| Block::new(vec![j], Exponent::Finite(1.0)))
                .collect(),
        }
    }

    /// Contiguous blocks with the given sizes and exponents.
    pub fn contiguous(spec: &[(usize, Exponent)]) -> Self {
        let mut next = 0;
        let blocks = spec
            .iter()
            .map(|&(dim, exponent)| {
                let indices: Vec<usize> = (next..next + dim).collect();
                next += dim;
                Block::new(indices, exponent)
            })
            .collect();
        VectorPH { blocks }
    }

    /// Number of variables covered.
    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).sum()
    }

    /// Number of blocks.
    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn all_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.indices.len() == 1)
    }
}

/// Data of the primal problem. Constructing one performs no validation; see
/// [`validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct PHOProblem {
    pub n: usize,
    pub c: DVector<f64>,
    pub d: DVector<f64>,
    /// `A` (k×n).
    pub eq_lin: DMatrix<f64>,
    /// `B` (k×m).
    pub eq_psi: DMatrix<f64>,
    /// `b` (k).
    pub eq_rhs: DVector<f64>,
    /// `H` (ℓ×n).
    pub ineq_lin: DMatrix<f64>,
    /// `K` (ℓ×m).
    pub ineq_psi: DMatrix<f64>,
    /// `p` (ℓ).
    pub ineq_rhs: DVector<f64>,
    pub psi: VectorPH,
}

impl PHOProblem {
    /// Problem with objective only (`k = ℓ = 0`).
    pub fn unconstrained(c: DVector<f64>, d: DVector<f64>, psi: VectorPH) -> Self {
        let n = c.len();
        let m = psi.m();
        PHOProblem {
            n,
            c,
            d,
            eq_lin: DMatrix::zeros(0, n),
            eq_psi: DMatrix::zeros(0, m),
            eq_rhs: DVector::zeros(0),
            ineq_lin: DMatrix::zeros(0, n),
            ineq_psi: DMatrix::zeros(0, m),
            ineq_rhs: DVector::zeros(0),
            psi,
        }
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        self.eq_lin = a;
        self.eq_psi = b;
        self.eq_rhs = rhs;
        self
    }

    pub fn with_inequalities(
        mut self,
        h: DMatrix<f64>,
        k: DMatrix<f64>,
        rhs: DVector<f64>,
    ) -> Self {
        self.ineq_lin = h;
        self.ineq_psi = k;
        self.ineq_rhs = rhs;
        self
    }

    pub fn m(&self) -> usize {
        self.psi.m()
    }

    /// Number of equality rows.
    pub fn k(&self) -> usize {
        self.eq_rhs.len()
    }

    /// Number of inequality rows.
    pub fn l(&self) -> usize {
        self.ineq_rhs.len()
    }

    /// Errors unless the problem is well formed.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_problem(self);
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(report))
        }
    }
}

/// Data of the closed-form dual
///
/// ```text
/// max  bᵀu + pᵀv
/// s.t. Ψ*(Aᵀu + Hᵀv − c) + Bᵀu + Kᵀv ≤ d,  v ≥ 0
/// ```
///
/// `psi_star` has the block structure of `base.psi` with each exponent replaced by
/// its dual exponent. Rows listed in `equality_rows` have a right-hand side that is
/// identically zero, so their constraint is equivalent to the linear equality
/// `(Aᵀu + Hᵀv − c)_{I_i} = 0`; rows in `infeasible_rows` have a constant negative
/// right-hand side and can never be satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct DualProblem {
    pub base: PHOProblem,
    pub psi_star: VectorPH,
    pub equality_rows: Vec<usize>,
    pub infeasible_rows: Vec<usize>,
}

impl DualProblem {
    /// Set by simplification when some row can never hold.
    pub fn is_infeasible(&self) -> bool {
        !self.infeasible_rows.is_empty()
    }

    /// Dimension of the dual variable `(u, v)`.
    pub fn dim(&self) -> usize {
        self.base.k() + self.base.l()
    }

    /// True when every block is one-dimensional, i.e. every dual row reads
    /// `|linear| ≤ linear` and the dual is a linear program.
    pub fn is_linear_program(&self) -> bool {
        self.psi_star.all_singletons()
    }
}

/// A real number or one of the two infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedValue {
    Finite(f64),
    NegInf,
    PosInf,
}

impl ExtendedValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion for comparisons.
    pub fn to_f64(&self) -> f64 {
        match *self {
            ExtendedValue::Finite(v) => v,
            ExtendedValue::NegInf => f64::NEG_INFINITY,
            ExtendedValue::PosInf => f64::INFINITY,
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Finite(v) => write!(f, "{v}"),
            ExtendedValue::NegInf => f.write_str("-inf"),
            ExtendedValue::PosInf => f.write_str("inf"),
        }
    }
}

/// A single violated invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BlocksOverlap { index: usize, first: usize, second: usize },
    IndexOutOfRange { block: usize, index: usize, n: usize },
    IndexUncovered { index: usize },
    EmptyBlock { block: usize },
    BlockDimMismatch { block: usize, indices: usize, dim: usize },
    InvalidExponent { block: usize, exponent: Exponent },
    Length { what: &'static str, expected_name: &'static str, expected: usize, found: usize },
    Shape { what: &'static str, expected: (usize, usize), found: (usize, usize) },
    NonFinite { what: &'static str, position: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BlocksOverlap { index, first, second } => write!(
                f,
                "blocks overlap at index {index} (blocks {first} and {second}); blocks must be pairwise disjoint"
            ),
            Violation::IndexOutOfRange { block, index, n } => {
                write!(f, "block {block}: index {index} out of range for n = {n}")
            }
            Violation::IndexUncovered { index } => {
                write!(f, "index {index} is not covered by any block; blocks must partition all variables")
            }
            Violation::EmptyBlock { block } => write!(f, "block {block} is empty"),
            Violation::BlockDimMismatch { block, indices, dim } => write!(
                f,
                "block {block}: {indices} indices but function dimension {dim}"
            ),
            Violation::InvalidExponent { block, exponent } => {
                write!(f, "block {block}: exponent {exponent} is not positive")
            }
            Violation::Length { what, expected_name, expected, found } => write!(
                f,
                "{what} length ≠ {expected_name} (found {found}, expected {expected})"
            ),
            Violation::Shape { what, expected, found } => write!(
                f,
                "{what} shape is {}×{}, expected {}×{}",
                found.0, found.1, expected.0, expected.1
            ),
            Violation::NonFinite { what, position } => {
                write!(f, "{what} has a non-finite entry at position {position}")
            }
        }
    }
}

/// All invariant violations of a problem; empty means valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// Checks the block partition of `psi` against `n` variables.
pub fn validate_blocks(psi: &VectorPH, n: usize, out: &mut Vec<Violation>) {
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut reported = BTreeSet::new();
    for (bi, block) in psi.blocks.iter().enumerate() {
        if block.indices.is_empty() {
            out.push(Violation::EmptyBlock { block: bi });
        }
        if block.indices.len() != block.func.dim {
            out.push(Violation::BlockDimMismatch {
                block: bi,
                indices: block.indices.len(),
                dim: block.func.dim,
            });
        }
        if !block.func.exponent.is_valid() {
            out.push(Violation::InvalidExponent {
                block: bi,
                exponent: block.func.exponent,
            });
        }
        for &j in &block.indices {
            if j >= n {
                out.push(Violation::IndexOutOfRange { block: bi, index: j, n });
                continue;
            }
            match owner[j] {
                Some(first) if reported.insert(j) => out.push(Violation::BlocksOverlap {
                    index: j,
                    first,
                    second: bi,
                }),
                Some(_) => {}
                None => owner[j] = Some(bi),
            }
        }
    }
    for (j, o) in owner.iter().enumerate() {
        if o.is_none() {
            out.push(Violation::IndexUncovered { index: j });
        }
    }
}

fn check_vec(
    out: &mut Vec<Violation>,
    what: &'static str,
    v: &DVector<f64>,
    expected_name: &'static str,
    expected: usize,
) {
    if v.len() != expected {
        out.push(Violation::Length {
            what,
            expected_name,
            expected,
            found: v.len(),
        });
    }
    if let Some(position) = v.iter().position(|x| !x.is_finite()) {
        out.push(Violation::NonFinite { what, position });
    }
}

fn check_mat(out: &mut Vec<Violation>, what: &'static str, a: &DMatrix<f64>, rows: usize, cols: usize) {
    if a.shape() != (rows, cols) {
        out.push(Violation::Shape {
            what,
            expected: (rows, cols),
            found: a.shape(),
        });
    }
    // Column-major storage index; reported as row-major position.
    if let Some(pos) = a.iter().position(|x| !x.is_finite()) {
        let (r, c) = (pos % a.nrows(), pos / a.nrows());
        out.push(Violation::NonFinite {
            what,
            position: r * a.ncols() + c,
        });
    }
}

/// Returns every violated invariant of `prob`.
pub fn validate_problem(prob: &PHOProblem) -> ValidationReport {
    let mut out = Vec::new();
    let n = prob.n;
    let m = prob.m();
    let k = prob.k();
    let l = prob.l();
    validate_blocks(&prob.psi, n, &mut out);
    check_vec(&mut out, "c", &prob.c, "n", n);
    check_vec(&mut out, "d", &prob.d, "m", m);
    check_vec(&mut out, "b", &prob.eq_rhs, "k", k);
    check_vec(&mut out, "p", &prob.ineq_rhs, "l", l);
    check_mat(&mut out, "A", &prob.eq_lin, k, n);
    check_mat(&mut out, "B", &prob.eq_psi, k, m);
    check_mat(&mut out, "H", &prob.ineq_lin, l, n);
    check_mat(&mut out, "K", &prob.ineq_psi, l, m);
    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_block() -> PHOProblem {
        let psi = VectorPH::new(vec![
            Block::new(vec![0], Exponent::Finite(1.0)),
            Block::new(vec![1, 2], Exponent::Finite(2.0)),
        ]);
        PHOProblem::unconstrained(DVector::from_vec(vec![1.0, 0.0, -1.0]), DVector::from_vec(vec![1.0, 2.0]), psi)
            .with_inequalities(
                DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]),
                DMatrix::from_row_slice(1, 2, &[0.0, -1.0]),
                DVector::from_vec(vec![0.0]),
            )
    }

    #[test]
    fn well_formed_is_valid() {
        assert!(validate_problem(&two_block()).is_empty());
    }

    #[test]
    fn overlapping_blocks_reported() {
        let mut prob = two_block();
        prob.psi = VectorPH::new(vec![
            Block::new(vec![0, 1], Exponent::Finite(1.0)),
            Block::new(vec![1, 2], Exponent::Finite(2.0)),
        ]);
        let report = validate_problem(&prob);
        assert!(report
            .violations
            .contains(&Violation::BlocksOverlap { index: 1, first: 0, second: 1 }));
        assert!(report.to_string().contains("blocks overlap at index 1"));
    }

    #[test]
    fn d_length_mismatch_reported() {
        let mut prob = two_block();
        prob.d = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let report = validate_problem(&prob);
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("d length ≠ m"));
    }

    #[test]
    fn uncovered_and_out_of_range() {
        let mut prob = two_block();
        prob.psi.blocks[1].indices = vec![1, 7];
        let text = validate_problem(&prob).to_string();
        assert!(text.contains("index 7 out of range"));
        assert!(text.contains("index 2 is not covered"));
    }

    #[test]
    fn bad_exponent_and_dim() {
        let mut prob = two_block();
        prob.psi.blocks[0].func.exponent = Exponent::Finite(-1.0);
        prob.psi.blocks[1].func.dim = 3;
        let v = validate_problem(&prob).violations;
        assert!(v.iter().any(|x| matches!(x, Violation::InvalidExponent { block: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::BlockDimMismatch { block: 1, .. })));
    }

    #[test]
    fn non_finite_entries() {
        let mut prob = two_block();
        prob.ineq_lin[(0, 2)] = f64::NAN;
        let v = validate_problem(&prob).violations;
        assert_eq!(v, vec![Violation::NonFinite { what: "H", position: 2 }]);
    }

    #[test]
    fn exponent_constructor() {
        assert!(Exponent::finite(0.0).is_err());
        assert!(Exponent::finite(f64::INFINITY).is_err());
        assert_eq!(Exponent::finite(0.5).unwrap(), Exponent::Finite(0.5));
    }
}
