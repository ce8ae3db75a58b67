//! Reformulations into positively homogeneous form and their simplified duals.
//!
//! * absolute value optimization (`Ψ(x) = |x|`) with its sign-splitting LP
//!   relaxation and closed-form dual;
//! * linear second-order cone programs;
//! * gauge-type problems `min Σ α_i f_i(A_i x − a_i)` s.t. `g_j(B_j x − b_j) ≤ β_j`,
//!   and the two Lasso-type special cases built on them;
//! * sums of (possibly negatively weighted) norms with linear constraints;
//! * 0-1 linear programs through `x ∈ {0, 1} ⇔ |2x − 1| = 1`.
//!
//! Variables that no atom covers get a dummy 2-norm block with zero objective
//! weight, so every reformulation keeps the blocks a partition of the variables.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dual::build_dual;
use crate::error::{check_len, Error, Result};
use crate::model::{validate_blocks, Block, DualProblem, Exponent, PHOProblem, VectorPH};

/// Absolute value optimization problem
///
/// ```text
/// min  cᵀx + dᵀ|x|
/// s.t. A x + B |x| = b,   H x + K |x| ≥ p
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AVOProblem {
    pub c: DVector<f64>,
    pub d: DVector<f64>,
    pub eq_lin: DMatrix<f64>,
    pub eq_abs: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub ineq_lin: DMatrix<f64>,
    pub ineq_abs: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
}

impl AVOProblem {
    /// The inequality-only shape `min cᵀx s.t. A x + B|x| ≥ b`.
    pub fn inequality_form(c: DVector<f64>, a: DMatrix<f64>, b_abs: DMatrix<f64>, b: DVector<f64>) -> Self {
        let n = c.len();
        AVOProblem {
            d: DVector::zeros(n),
            eq_lin: DMatrix::zeros(0, n),
            eq_abs: DMatrix::zeros(0, n),
            eq_rhs: DVector::zeros(0),
            ineq_lin: a,
            ineq_abs: b_abs,
            ineq_rhs: b,
            c,
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// True for the inequality-only, linear-objective shape.
    pub fn is_inequality_form(&self) -> bool {
        self.eq_rhs.is_empty() && self.d.iter().all(|&v| v == 0.0)
    }

    /// The same problem with `Ψ = |·|` as `n` singleton 1-norm blocks.
    pub fn to_pho(&self) -> PHOProblem {
        let n = self.n();
        let mut prob = PHOProblem::unconstrained(self.c.clone(), self.d.clone(), VectorPH::abs(n))
            .with_equalities(self.eq_lin.clone(), self.eq_abs.clone(), self.eq_rhs.clone())
            .with_inequalities(self.ineq_lin.clone(), self.ineq_abs.clone(), self.ineq_rhs.clone());
        prob.n = n;
        prob
    }

    /// Inverse of [`AVOProblem::to_pho`]: requires singleton blocks `{0}, {1}, …`.
    pub fn from_pho(prob: &PHOProblem) -> Result<Self> {
        prob.ensure_valid()?;
        let in_order = prob.psi.m() == prob.n
            && prob.psi.blocks.iter().enumerate().all(|(i, b)| b.indices == [i]);
        if !in_order {
            return Err(Error::Unsupported(
                "absolute value form needs singleton blocks {0}, {1}, … in index order".into(),
            ));
        }
        Ok(AVOProblem {
            c: prob.c.clone(),
            d: prob.d.clone(),
            eq_lin: prob.eq_lin.clone(),
            eq_abs: prob.eq_psi.clone(),
            eq_rhs: prob.eq_rhs.clone(),
            ineq_lin: prob.ineq_lin.clone(),
            ineq_abs: prob.ineq_psi.clone(),
            ineq_rhs: prob.ineq_rhs.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Dense linear program `opt objᵀy s.t. M y (senses) rhs, y ≥ lower`, where a
/// `None` lower bound marks a free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct LPProblem {
    pub direction: Direction,
    pub objective: DVector<f64>,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub senses: Vec<RowSense>,
    pub lower: Vec<Option<f64>>,
}

impl LPProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn check_dims(&self) -> Result<()> {
        let (r, c) = (self.num_rows(), self.num_vars());
        check_len("LP matrix rows", r, self.matrix.nrows())?;
        check_len("LP matrix columns", c, self.matrix.ncols())?;
        check_len("LP senses", r, self.senses.len())?;
        check_len("LP lower bounds", c, self.lower.len())
    }

    pub fn objective_value(&self, y: &DVector<f64>) -> f64 {
        self.objective.dot(y)
    }

    /// Largest constraint or bound violation at `y`.
    pub fn max_violation(&self, y: &DVector<f64>) -> f64 {
        let my = &self.matrix * y;
        let mut worst = 0.0f64;
        for i in 0..self.num_rows() {
            let gap = my[i] - self.rhs[i];
            worst = worst.max(match self.senses[i] {
                RowSense::Le => gap,
                RowSense::Ge => -gap,
                RowSense::Eq => gap.abs(),
            });
        }
        for (j, l) in self.lower.iter().enumerate() {
            if let Some(l) = l {
                worst = worst.max(l - y[j]);
            }
        }
        worst
    }

    /// The LP dual, for variables that are nonnegative or free.
    ///
    /// For a minimization with `≥` rows and `y ≥ 0` this is
    /// `max rhsᵀw s.t. Mᵀw ≤ obj, w ≥ 0`. `≤` rows (`≥` rows for a maximization)
    /// are first negated into the canonical sense so that every multiplier is
    /// nonnegative or free.
    pub fn dual(&self) -> Result<LPProblem> {
        self.check_dims()?;
        let (canonical, flipped, dual_direction, column_sense) = match self.direction {
            Direction::Minimize => (RowSense::Ge, RowSense::Le, Direction::Maximize, RowSense::Le),
            Direction::Maximize => (RowSense::Le, RowSense::Ge, Direction::Minimize, RowSense::Ge),
        };
        let mut m = self.matrix.clone();
        let mut rhs = self.rhs.clone();
        let mut lower = Vec::with_capacity(self.num_rows());
        for i in 0..self.num_rows() {
            let s = self.senses[i];
            if s == flipped {
                m.row_mut(i).neg_mut();
                rhs[i] = -rhs[i];
            }
            lower.push(if s == RowSense::Eq { None } else { Some(0.0) });
            debug_assert!(s == canonical || s == flipped || s == RowSense::Eq);
        }
        let mut senses = Vec::with_capacity(self.num_vars());
        for (j, l) in self.lower.iter().enumerate() {
            match l {
                Some(v) if *v == 0.0 => senses.push(column_sense),
                None => senses.push(RowSense::Eq),
                Some(v) => {
                    return Err(Error::Unsupported(format!(
                        "variable {j} has nonzero lower bound {v}; shift it first"
                    )))
                }
            }
        }
        Ok(LPProblem {
            direction: dual_direction,
            objective: rhs,
            matrix: m.transpose(),
            rhs: self.objective.clone(),
            senses,
            lower,
        })
    }
}

fn require_inequality_form(avo: &AVOProblem) -> Result<()> {
    avo.to_pho().ensure_valid()?;
    if avo.is_inequality_form() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "sign splitting needs the inequality-only shape (no equality rows, d = 0)".into(),
        ))
    }
}

/// Sign-splitting relaxation `min [c; −c]ᵀy s.t. [A+B | −A+B] y ≥ b, y ≥ 0` of
/// `min cᵀx s.t. Ax + B|x| ≥ b`, with `y = (x⁺, x⁻)` and the complementarity
/// `y₁ᵀy₂ = 0` dropped.
pub fn avo_split_lp(avo: &AVOProblem) -> Result<LPProblem> {
    require_inequality_form(avo)?;
    let n = avo.n();
    let rows = avo.ineq_rhs.len();
    let (a, b) = (&avo.ineq_lin, &avo.ineq_abs);
    let mut m = DMatrix::zeros(rows, 2 * n);
    m.columns_mut(0, n).copy_from(&(a + b));
    m.columns_mut(n, n).copy_from(&(-a + b));
    let mut obj = DVector::zeros(2 * n);
    obj.rows_mut(0, n).copy_from(&avo.c);
    obj.rows_mut(n, n).copy_from(&(-&avo.c));
    Ok(LPProblem {
        direction: Direction::Minimize,
        objective: obj,
        matrix: m,
        rhs: avo.ineq_rhs.clone(),
        senses: vec![RowSense::Ge; rows],
        lower: vec![Some(0.0); 2 * n],
    })
}

/// Closed-form dual `max bᵀu s.t. |Aᵀu − c| + Bᵀu ≤ 0, u ≥ 0` of the
/// inequality-only absolute value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AvoDual {
    pub b: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b_abs: DMatrix<f64>,
    pub c: DVector<f64>,
}

impl AvoDual {
    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        self.b.dot(u)
    }

    /// Largest violation of `|Aᵀu − c| + Bᵀu ≤ 0` and `u ≥ 0`.
    pub fn max_violation(&self, u: &DVector<f64>) -> f64 {
        let lin = self.a.tr_mul(u) - &self.c;
        let abs = self.b_abs.tr_mul(u);
        let rows = lin.iter().zip(abs.iter()).map(|(l, b)| l.abs() + b);
        let neg = u.iter().map(|v| -v);
        rows.chain(neg).fold(0.0f64, f64::max)
    }

    /// `max bᵀu s.t. [Aᵀ+Bᵀ; −Aᵀ+Bᵀ] u ≤ [c; −c], u ≥ 0`.
    pub fn split_form(&self) -> LPProblem {
        let n = self.c.len();
        let rows = self.b.len();
        let at = self.a.transpose();
        let bt = self.b_abs.transpose();
        let mut m = DMatrix::zeros(2 * n, rows);
        m.rows_mut(0, n).copy_from(&(&at + &bt));
        m.rows_mut(n, n).copy_from(&(-&at + &bt));
        let mut rhs = DVector::zeros(2 * n);
        rhs.rows_mut(0, n).copy_from(&self.c);
        rhs.rows_mut(n, n).copy_from(&(-&self.c));
        LPProblem {
            direction: Direction::Maximize,
            objective: self.b.clone(),
            matrix: m,
            rhs,
            senses: vec![RowSense::Le; 2 * n],
            lower: vec![Some(0.0); rows],
        }
    }
}

pub fn avo_dual(avo: &AVOProblem) -> Result<AvoDual> {
    require_inequality_form(avo)?;
    Ok(AvoDual {
        b: avo.ineq_rhs.clone(),
        a: avo.ineq_lin.clone(),
        b_abs: avo.ineq_abs.clone(),
        c: avo.c.clone(),
    })
}

/// Writes a dual whose blocks are all one-dimensional as a linear program in
/// `(u, v)`: each row `|α_j| ≤ β_i` becomes `α_j ≤ β_i` and `−α_j ≤ β_i`.
pub fn dual_as_lp(dual: &DualProblem) -> Result<LPProblem> {
    if !dual.is_linear_program() {
        return Err(Error::Unsupported("dual has blocks of dimension > 1".into()));
    }
    let prob = &dual.base;
    let (k, l) = (prob.k(), prob.l());
    let rows = 2 * prob.m();
    let mut m = DMatrix::zeros(rows, k + l);
    let mut rhs = DVector::zeros(rows);
    for (i, block) in prob.psi.blocks.iter().enumerate() {
        let j = block.indices[0];
        for (r, sign) in [(2 * i, 1.0), (2 * i + 1, -1.0)] {
            for q in 0..k {
                m[(r, q)] = sign * prob.eq_lin[(q, j)] + prob.eq_psi[(q, i)];
            }
            for q in 0..l {
                m[(r, k + q)] = sign * prob.ineq_lin[(q, j)] + prob.ineq_psi[(q, i)];
            }
            rhs[r] = prob.d[i] + sign * prob.c[j];
        }
    }
    let mut objective = DVector::zeros(k + l);
    objective.rows_mut(0, k).copy_from(&prob.eq_rhs);
    objective.rows_mut(k, l).copy_from(&prob.ineq_rhs);
    let mut lower = vec![None; k];
    lower.extend(std::iter::repeat_n(Some(0.0), l));
    Ok(LPProblem {
        direction: Direction::Maximize,
        objective,
        matrix: m,
        rhs,
        senses: vec![RowSense::Le; rows],
        lower,
    })
}

/// Marks rows whose right-hand side `d_i − (Bᵀu)_i − (Kᵀv)_i` does not depend on
/// `(u, v)`. A constant zero turns `ψ*_i(α_{I_i}) ≤ 0` into the linear equality
/// `α_{I_i} = 0` (only the origin has `ψ* = 0`); a constant negative value can
/// never hold since `ψ* ≥ 0`.
pub fn simplify_dual(dual: &DualProblem) -> DualProblem {
    let prob = &dual.base;
    let mut out = dual.clone();
    out.equality_rows.clear();
    out.infeasible_rows.clear();
    for i in 0..prob.m() {
        let constant = prob.eq_psi.column(i).iter().all(|&x| x == 0.0)
            && prob.ineq_psi.column(i).iter().all(|&x| x == 0.0);
        if !constant {
            continue;
        }
        if prob.d[i] == 0.0 {
            out.equality_rows.push(i);
        } else if prob.d[i] < 0.0 {
            out.infeasible_rows.push(i);
        }
    }
    out
}

fn build_simplified(prob: &PHOProblem) -> Result<DualProblem> {
    Ok(simplify_dual(&build_dual(prob)?))
}

/// Linear second-order cone program `min cᵀx s.t. Ax = b, x₁ ≥ ‖x₂‖₂` as
/// `Ψ(x) = (|x₁|, ‖x₂‖₂)`, `H = (1, 0, …, 0)`, `K = (0, −1)`, `p = 0`, `d = 0`,
/// `B = 0`.
pub fn socp_to_pho(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<PHOProblem> {
    let n = c.len();
    if n < 2 {
        return Err(Error::InvalidInput("second-order cone needs n ≥ 2".into()));
    }
    check_len("A columns", n, a.ncols())?;
    check_len("b", a.nrows(), b.len())?;
    let psi = VectorPH::new(vec![
        Block::new(vec![0], Exponent::Finite(1.0)),
        Block::new((1..n).collect(), Exponent::Finite(2.0)),
    ]);
    let mut h = DMatrix::zeros(1, n);
    h[(0, 0)] = 1.0;
    let prob = PHOProblem::unconstrained(c.clone(), DVector::zeros(2), psi)
        .with_equalities(a.clone(), DMatrix::zeros(a.nrows(), 2), b.clone())
        .with_inequalities(h, DMatrix::from_row_slice(1, 2, &[0.0, -1.0]), DVector::zeros(1));
    prob.ensure_valid()?;
    Ok(prob)
}

/// `max bᵀu s.t. ‖(Aᵀu)₂ − c₂‖₂ ≤ c₁ − (Aᵀu)₁`, the cone dual after eliminating
/// `v = c₁ − (Aᵀu)₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocpDual {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

impl SocpDual {
    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        self.b.dot(u)
    }

    /// `‖(Aᵀu)₂ − c₂‖₂ − (c₁ − (Aᵀu)₁)`; feasible when `≤ 0`.
    pub fn constraint(&self, u: &DVector<f64>) -> f64 {
        let r = self.c.clone() - self.a.tr_mul(u);
        let tail = r.rows(1, r.len() - 1).norm();
        tail - r[0]
    }

    /// The eliminated multiplier `v = c₁ − (Aᵀu)₁`.
    pub fn eliminated_v(&self, u: &DVector<f64>) -> f64 {
        self.c[0] - self.a.column(0).dot(u)
    }
}

/// Eliminates `v` from the dual of a [`socp_to_pho`] problem.
pub fn socp_dual_simplify(dual: &DualProblem) -> Result<SocpDual> {
    let prob = &dual.base;
    let n = prob.n;
    let shape_ok = n >= 2
        && prob.psi.blocks.len() == 2
        && prob.psi.blocks[0].indices == [0]
        && prob.psi.blocks[1].indices == (1..n).collect::<Vec<_>>()
        && prob.psi.blocks[1].func.exponent == Exponent::Finite(2.0)
        && prob.l() == 1
        && prob.ineq_lin[(0, 0)] == 1.0
        && prob.ineq_lin.row(0).iter().skip(1).all(|&x| x == 0.0)
        && prob.ineq_psi.row(0).iter().copied().eq([0.0, -1.0])
        && prob.ineq_rhs[0] == 0.0
        && prob.d.iter().all(|&x| x == 0.0)
        && prob.eq_psi.iter().all(|&x| x == 0.0);
    if !shape_ok {
        return Err(Error::Unsupported("dual does not come from a second-order cone program".into()));
    }
    Ok(SocpDual {
        a: prob.eq_lin.clone(),
        b: prob.eq_rhs.clone(),
        c: prob.c.clone(),
    })
}

/// One atom term `weight · f(matrix · x − offset)` of a gauge-type problem. In the
/// objective `weight` is `α_i`; in a constraint `f(…) ≤ weight` it is `β_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTerm {
    pub weight: f64,
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub exponent: Exponent,
}

impl GaugeTerm {
    pub fn new(weight: f64, matrix: DMatrix<f64>, offset: DVector<f64>, exponent: Exponent) -> Self {
        GaugeTerm {
            weight,
            matrix,
            offset,
            exponent,
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Where each piece of the stacked variable `x̂ = (x, y_1, …, y_s, z_1, …, z_t)`
/// and of the multipliers lives.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeLayout {
    pub n: usize,
    pub objective_rows: Vec<usize>,
    pub constraint_rows: Vec<usize>,
}

impl GaugeLayout {
    pub fn s(&self) -> usize {
        self.objective_rows.len()
    }

    pub fn t(&self) -> usize {
        self.constraint_rows.len()
    }

    /// Offset of `u_{1i}` in `u` (and of `y_i` after `x` in `x̂`).
    pub fn objective_offset(&self, i: usize) -> usize {
        self.objective_rows[..i].iter().sum()
    }

    /// Offset of `u_{2j}` in `u`.
    pub fn constraint_offset(&self, j: usize) -> usize {
        self.objective_rows.iter().sum::<usize>() + self.constraint_rows[..j].iter().sum::<usize>()
    }

    /// Index of the multiplier of `g_j(z_j) ≤ β_j` in `v`.
    pub fn constraint_multiplier(&self, j: usize) -> usize {
        1 + self.s() + j
    }

    pub fn u_len(&self) -> usize {
        self.objective_rows.iter().sum::<usize>() + self.constraint_rows.iter().sum::<usize>()
    }

    pub fn v_len(&self) -> usize {
        1 + self.s() + self.t()
    }
}

/// A reformulated problem with its mechanically derived, simplified dual.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReformulation {
    pub problem: PHOProblem,
    pub dual: DualProblem,
    pub layout: GaugeLayout,
}

fn selector(n: usize, rows: &[usize]) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(rows.len(), n);
    for (r, &j) in rows.iter().enumerate() {
        e[(r, j)] = 1.0;
    }
    e
}

/// Stacks `min Σ α_i f_i(A_i x − a_i) s.t. g_j(B_j x − b_j) ≤ β_j` into
///
/// ```text
/// min dᵀΨ(x̂)  s.t.  Â x̂ = b̂,  −K Ψ(x̂) ≥ −p
/// ```
///
/// with `Ψ(x̂) = (ψ(x), f_i(y_i), g_j(z_j))`, `d = (0, α, 0)`, `p = (0, 0, β)`,
/// `K = diag(0, 0, E_t)` and `Â = [A_i −E; B_j −E]`; `ψ` is a dummy 2-norm.
pub fn gauge_to_pho(n: usize, objective: &[GaugeTerm], constraints: &[GaugeTerm]) -> Result<GaugeReformulation> {
    for (what, terms) in [("objective", objective), ("constraint", constraints)] {
        for (i, t) in terms.iter().enumerate() {
            check_len("gauge term columns", n, t.matrix.ncols())?;
            check_len("gauge term offset", t.rows(), t.offset.len())?;
            if !(t.weight >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{what} term {i}: weight {} must be nonnegative",
                    t.weight
                )));
            }
            if t.rows() == 0 {
                return Err(Error::InvalidInput(format!("{what} term {i} has no rows")));
            }
        }
    }
    let layout = GaugeLayout {
        n,
        objective_rows: objective.iter().map(GaugeTerm::rows).collect(),
        constraint_rows: constraints.iter().map(GaugeTerm::rows).collect(),
    };
    let (s, t) = (layout.s(), layout.t());
    let rows = layout.u_len();
    let total = n + rows;
    let m = 1 + s + t;

    let mut blocks = vec![Block::new((0..n).collect(), Exponent::Finite(2.0))];
    let mut a_hat = DMatrix::zeros(rows, total);
    let mut b_hat = DVector::zeros(rows);
    let mut d = DVector::zeros(m);
    let mut p = DVector::zeros(m);
    let mut k = DMatrix::zeros(m, m);
    let mut row = 0;
    for (idx, term) in objective.iter().chain(constraints).enumerate() {
        let r = term.rows();
        let cols: Vec<usize> = (n + row..n + row + r).collect();
        a_hat.view_mut((row, 0), (r, n)).copy_from(&term.matrix);
        a_hat.view_mut((row, n + row), (r, r)).fill_with_identity();
        a_hat.view_mut((row, n + row), (r, r)).neg_mut();
        b_hat.rows_mut(row, r).copy_from(&term.offset);
        blocks.push(Block::new(cols, term.exponent));
        if idx < s {
            d[1 + idx] = term.weight;
        } else {
            p[1 + idx] = term.weight;
            k[(1 + idx, 1 + idx)] = 1.0;
        }
        row += r;
    }
    let problem = PHOProblem::unconstrained(DVector::zeros(total), d, VectorPH::new(blocks))
        .with_equalities(a_hat, DMatrix::zeros(rows, m), b_hat)
        .with_inequalities(DMatrix::zeros(m, total), -k, -p);
    let dual = build_simplified(&problem)?;
    Ok(GaugeReformulation {
        problem,
        dual,
        layout,
    })
}

/// Parameters of `min ‖Ax − b‖₂ + λ₁ Σ_{i<m′} ‖x_{I_i}‖_{p₁} + λ₂ Σ_{i≥m′} ‖x_{I_i}‖_{p₂}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLassoParams {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub groups: Vec<Vec<usize>>,
    pub m_prime: usize,
    pub p1: Exponent,
    pub p2: Exponent,
}

/// Group Lasso without the square on the loss: a gauge problem with one term per
/// group (row selector `E_{I_i}`, zero offset) and a final 2-norm term `(A, b)`
/// with unit weight.
pub fn group_lasso_to_pho(params: &GroupLassoParams) -> Result<GaugeReformulation> {
    let n = params.a.ncols();
    check_len("b", params.a.nrows(), params.b.len())?;
    let mut violations = Vec::new();
    let partition = VectorPH::new(
        params
            .groups
            .iter()
            .map(|g| Block::new(g.clone(), Exponent::Finite(2.0)))
            .collect(),
    );
    validate_blocks(&partition, n, &mut violations);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidInput(format!("groups: {v}")));
    }
    let m = params.groups.len();
    if !(0 < params.m_prime && params.m_prime < m) {
        return Err(Error::InvalidInput(format!(
            "need 0 < m' < {m}, found m' = {}",
            params.m_prime
        )));
    }
    let mut terms: Vec<GaugeTerm> = params
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let (w, e) = if i < params.m_prime {
                (params.lambda1, params.p1)
            } else {
                (params.lambda2, params.p2)
            };
            GaugeTerm::new(w, selector(n, g), DVector::zeros(g.len()), e)
        })
        .collect();
    terms.push(GaugeTerm::new(1.0, params.a.clone(), params.b.clone(), Exponent::Finite(2.0)));
    gauge_to_pho(n, &terms, &[])
}

/// Parameters of `min λ₁‖x‖_{p₁} + λ₂‖x‖_{p₂} s.t. ‖Ax − b‖₂ ≤ β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedLassoParams {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: Exponent,
    pub p2: Exponent,
}

/// Gauge problem with two objective terms `(λ_i, E_n, 0, ‖·‖_{p_i})` and one
/// constraint term `(β, A, b, ‖·‖₂)`.
pub fn constrained_lasso_to_pho(params: &ConstrainedLassoParams) -> Result<GaugeReformulation> {
    let n = params.a.ncols();
    check_len("b", params.a.nrows(), params.b.len())?;
    let eye = DMatrix::identity(n, n);
    let objective = [
        GaugeTerm::new(params.lambda1, eye.clone(), DVector::zeros(n), params.p1),
        GaugeTerm::new(params.lambda2, eye, DVector::zeros(n), params.p2),
    ];
    let constraints = [GaugeTerm::new(
        params.beta,
        params.a.clone(),
        params.b.clone(),
        Exponent::Finite(2.0),
    )];
    gauge_to_pho(n, &objective, &constraints)
}

/// One term `λ_i f_i(A_i x − a_i)` of a sum of norms; `λ_i` may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SumNormsTerm {
    pub lambda: f64,
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub exponent: Exponent,
}

/// Safeguard `c_i f_i(y_i) ≤ d_i` bounding each term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Safeguard {
    pub c: f64,
    pub d: f64,
}

impl Safeguard {
    /// `c = 1`, `d = 10³ (1 + ‖a_i‖₂)`.
    pub fn default_for(offset: &DVector<f64>) -> Self {
        Safeguard {
            c: 1.0,
            d: 1e3 * (1.0 + offset.norm()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumNormsReformulation {
    pub problem: PHOProblem,
    pub dual: DualProblem,
    pub safeguards: Vec<Safeguard>,
    /// Number of linear rows `Bx ≤ b`.
    pub linear_rows: usize,
    pub term_rows: Vec<usize>,
    /// Rows of the mechanical dual whose right-hand side carries a multiplier
    /// term absent from the reference display `f_i*(−u_i) ≤ λ_i + c_i`.
    pub display_mismatch: Vec<String>,
}

/// `min Σ λ_i f_i(A_i x − a_i) s.t. Bx ≤ b` with safeguards `c_i f_i(y_i) ≤ d_i`,
/// stacked over `x̂ = (x, y_1, …, y_s)` as
///
/// ```text
/// min dᵀΨ(x̂)  s.t.  Â x̂ = â,  H x̂ + K Ψ(x̂) ≥ p
/// ```
///
/// with `d = (0, λ)`, `p = (−b, −d_1, …, −d_s)`, `H = [−B 0; 0 0]` and
/// `K = [0; 0 −diag(c)]`.
pub fn sum_norms_to_pho(
    terms: &[SumNormsTerm],
    linear: Option<(&DMatrix<f64>, &DVector<f64>)>,
    safeguards: Option<&[Safeguard]>,
) -> Result<SumNormsReformulation> {
    let Some(first) = terms.first() else {
        return Err(Error::InvalidInput("at least one norm term is required".into()));
    };
    let n = first.matrix.ncols();
    for t in terms {
        check_len("term columns", n, t.matrix.ncols())?;
        check_len("term offset", t.matrix.nrows(), t.offset.len())?;
    }
    let guards: Vec<Safeguard> = match safeguards {
        Some(g) => {
            check_len("safeguards", terms.len(), g.len())?;
            g.to_vec()
        }
        None => terms.iter().map(|t| Safeguard::default_for(&t.offset)).collect(),
    };
    if let Some((i, g)) = guards.iter().enumerate().find(|(_, g)| !(g.c > 0.0 && g.d > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "safeguard {i}: c = {} and d = {} must be strictly positive",
            g.c, g.d
        )));
    }
    let (b_mat, b_vec) = match linear {
        Some((bm, bv)) => {
            check_len("B columns", n, bm.ncols())?;
            check_len("b", bm.nrows(), bv.len())?;
            (bm.clone(), bv.clone())
        }
        None => (DMatrix::zeros(0, n), DVector::zeros(0)),
    };
    let s = terms.len();
    let k = b_mat.nrows();
    let term_rows: Vec<usize> = terms.iter().map(|t| t.matrix.nrows()).collect();
    let rows: usize = term_rows.iter().sum();
    let total = n + rows;
    let m = 1 + s;

    let mut blocks = vec![Block::new((0..n).collect(), Exponent::Finite(2.0))];
    let mut a_hat = DMatrix::zeros(rows, total);
    let mut a_vec = DVector::zeros(rows);
    let mut d = DVector::zeros(m);
    let mut row = 0;
    for (i, t) in terms.iter().enumerate() {
        let r = t.matrix.nrows();
        a_hat.view_mut((row, 0), (r, n)).copy_from(&t.matrix);
        a_hat.view_mut((row, n + row), (r, r)).fill_with_identity();
        a_hat.view_mut((row, n + row), (r, r)).neg_mut();
        a_vec.rows_mut(row, r).copy_from(&t.offset);
        blocks.push(Block::new((n + row..n + row + r).collect(), t.exponent));
        d[1 + i] = t.lambda;
        row += r;
    }
    let mut h = DMatrix::zeros(k + s, total);
    h.view_mut((0, 0), (k, n)).copy_from(&(-&b_mat));
    let mut kk = DMatrix::zeros(k + s, m);
    let mut p = DVector::zeros(k + s);
    p.rows_mut(0, k).copy_from(&(-&b_vec));
    for (i, g) in guards.iter().enumerate() {
        kk[(k + i, 1 + i)] = -g.c;
        p[k + i] = -g.d;
    }
    let problem = PHOProblem::unconstrained(DVector::zeros(total), d, VectorPH::new(blocks))
        .with_equalities(a_hat, DMatrix::zeros(rows, m), a_vec)
        .with_inequalities(h, kk, p);
    let dual = build_simplified(&problem)?;

    let mut display_mismatch = Vec::new();
    for i in 0..s {
        let block = 1 + i;
        let coeff = -problem.ineq_psi[(k + i, block)];
        if coeff != 0.0 {
            display_mismatch.push(format!(
                "row {block}: mechanical right-hand side is λ_{i} + {coeff}·v[{}], reference display has the constant λ_{i} + {coeff}",
                k + i
            ));
        }
    }
    Ok(SumNormsReformulation {
        problem,
        dual,
        safeguards: guards,
        linear_rows: k,
        term_rows,
        display_mismatch,
    })
}

/// One linear row `coeffsᵀx (sense) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// `opt objectiveᵀx s.t. rows, x ∈ {0, 1}ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLp {
    pub direction: Direction,
    pub objective: Vec<f64>,
    #[serde(default)]
    pub constraints: Vec<LinearRow>,
}

impl BinaryLp {
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter().all(|&v| v == 0.0 || v == 1.0)
            && self.constraints.iter().all(|r| {
                let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match r.sense {
                    RowSense::Le => lhs <= r.rhs + tol,
                    RowSense::Ge => lhs >= r.rhs - tol,
                    RowSense::Eq => (lhs - r.rhs).abs() <= tol,
                }
            })
    }
}

/// A 0-1 program rewritten over `x′ = 2x − 1` with `|x′_i| = 1`.
///
/// The original objective at `x = (x′ + 1)/2` equals
/// `objective_sign · (c̃ᵀx′ + objective_offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryAvo {
    pub avo: AVOProblem,
    pub objective_sign: f64,
    pub objective_offset: f64,
}

impl BinaryAvo {
    pub fn encode(x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().map(|v| 2.0 * v - 1.0))
    }

    pub fn recover(x_prime: &DVector<f64>) -> Vec<f64> {
        x_prime.iter().map(|v| (v + 1.0) / 2.0).collect()
    }

    /// Original objective recovered from the rewritten one.
    pub fn original_objective(&self, x_prime: &DVector<f64>) -> f64 {
        self.objective_sign * (self.avo.c.dot(x_prime) + self.objective_offset)
    }
}

/// Rewrites a 0-1 linear program as an absolute value problem. The first `n`
/// equality rows are `|x′_i| = 1`; the original rows follow, equalities as
/// equalities and `≤` rows negated into `≥` rows. The objective is always
/// minimized.
pub fn binary_to_avo(lp: &BinaryLp) -> Result<BinaryAvo> {
    let n = lp.objective.len();
    if n == 0 {
        return Err(Error::InvalidInput("binary program has no variables".into()));
    }
    for r in &lp.constraints {
        check_len("constraint coefficients", n, r.coeffs.len())?;
    }
    let sign = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let c: DVector<f64> = DVector::from_iterator(n, lp.objective.iter().map(|v| sign * 0.5 * v));
    let offset = sign * 0.5 * lp.objective.iter().sum::<f64>();

    let eqs: Vec<&LinearRow> = lp.constraints.iter().filter(|r| r.sense == RowSense::Eq).collect();
    let ineqs: Vec<&LinearRow> = lp.constraints.iter().filter(|r| r.sense != RowSense::Eq).collect();
    let k = n + eqs.len();
    let mut a = DMatrix::zeros(k, n);
    let mut b_abs = DMatrix::zeros(k, n);
    let mut b = DVector::zeros(k);
    for i in 0..n {
        b_abs[(i, i)] = 1.0;
        b[i] = 1.0;
    }
    // gᵀx = ½gᵀx′ + ½Σg.
    let half_row = |r: &LinearRow, s: f64| -> (Vec<f64>, f64) {
        let coeffs = r.coeffs.iter().map(|g| s * 0.5 * g).collect();
        let rhs = s * (r.rhs - 0.5 * r.coeffs.iter().sum::<f64>());
        (coeffs, rhs)
    };
    for (q, r) in eqs.iter().enumerate() {
        let (coeffs, rhs) = half_row(r, 1.0);
        a.row_mut(n + q).copy_from_slice(&coeffs);
        b[n + q] = rhs;
    }
    let l = ineqs.len();
    let mut h = DMatrix::zeros(l, n);
    let mut p = DVector::zeros(l);
    for (q, r) in ineqs.iter().enumerate() {
        let s = if r.sense == RowSense::Ge { 1.0 } else { -1.0 };
        let (coeffs, rhs) = half_row(r, s);
        h.row_mut(q).copy_from_slice(&coeffs);
        p[q] = rhs;
    }
    Ok(BinaryAvo {
        avo: AVOProblem {
            c,
            d: DVector::zeros(n),
            eq_lin: a,
            eq_abs: b_abs,
            eq_rhs: b,
            ineq_lin: h,
            ineq_abs: DMatrix::zeros(l, n),
            ineq_rhs: p,
        },
        objective_sign: sign,
        objective_offset: offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{dual_residuals, primal_residuals};
    use crate::model::validate_problem;

    fn one_var_avo() -> AVOProblem {
        AVOProblem::inequality_form(
            DVector::from_vec(vec![1.0]),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, -0.5),
            DVector::from_vec(vec![1.0]),
        )
    }

    #[test]
    fn split_lp_shape() {
        let lp = avo_split_lp(&one_var_avo()).unwrap();
        assert_eq!(lp.objective.as_slice(), &[1.0, -1.0]);
        assert_eq!(lp.matrix, DMatrix::from_row_slice(1, 2, &[0.5, -1.5]));
        assert_eq!(lp.senses, vec![RowSense::Ge]);
        // y = (2, 0) is feasible with value 2.
        let y = DVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(lp.max_violation(&y), 0.0);
        assert_eq!(lp.objective_value(&y), 2.0);
    }

    #[test]
    fn split_lp_rejects_general_shapes() {
        let mut avo = one_var_avo();
        avo.d[0] = 1.0;
        assert!(matches!(avo_split_lp(&avo), Err(Error::Unsupported(_))));
    }

    #[test]
    fn avo_dual_feasible_interval() {
        let dual = avo_dual(&one_var_avo()).unwrap();
        // |u − 1| − 0.5u ≤ 0 ⇔ u ∈ [2/3, 2].
        for (u, ok) in [(0.5, false), (2.0 / 3.0 + 1e-12, true), (1.0, true), (2.0, true), (2.01, false)] {
            let v = dual.max_violation(&DVector::from_vec(vec![u]));
            assert_eq!(v <= 1e-12, ok, "u = {u}, violation {v}");
        }
        assert_eq!(dual.objective(&DVector::from_vec(vec![2.0])), 2.0);
    }

    #[test]
    fn avo_dual_split_form_is_lp_dual() {
        let avo = AVOProblem::inequality_form(
            DVector::from_vec(vec![1.0, -2.0]),
            DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.3, 0.1]),
            DMatrix::from_row_slice(3, 2, &[-0.5, 0.25, 1.0, -1.0, 0.0, 2.0]),
            DVector::from_vec(vec![1.0, 0.0, -1.0]),
        );
        let lhs = avo_dual(&avo).unwrap().split_form();
        let rhs = avo_split_lp(&avo).unwrap().dual().unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn lp_dual_of_dual_round_trips() {
        let lp = avo_split_lp(&one_var_avo()).unwrap();
        assert_eq!(lp.dual().unwrap().dual().unwrap(), lp);
    }

    #[test]
    fn dual_as_lp_rows() {
        let dual = build_dual(&one_var_avo().to_pho()).unwrap();
        let lp = dual_as_lp(&dual).unwrap();
        // v-only rows: (1 − 0.5) v ≤ 1 and (−1 − 0.5) v ≤ −1.
        assert_eq!(lp.matrix, DMatrix::from_row_slice(2, 1, &[0.5, -1.5]));
        assert_eq!(lp.rhs.as_slice(), &[1.0, -1.0]);
        assert_eq!(lp.lower, vec![Some(0.0)]);
    }

    #[test]
    fn simplify_examples() {
        let prob = PHOProblem::unconstrained(
            DVector::zeros(3),
            DVector::from_vec(vec![0.0, 1.0, -1.0]),
            VectorPH::abs(3),
        );
        let s = simplify_dual(&build_dual(&prob).unwrap());
        assert_eq!(s.equality_rows, vec![0]);
        assert_eq!(s.infeasible_rows, vec![2]);
        assert!(s.is_infeasible());

        let prob = PHOProblem::unconstrained(DVector::zeros(2), DVector::from_vec(vec![1.0, 2.0]), VectorPH::abs(2));
        let dual = build_dual(&prob).unwrap();
        assert_eq!(simplify_dual(&dual), dual);
    }

    #[test]
    fn socp_structure() {
        for n in 2..6 {
            let prob = socp_to_pho(&DVector::zeros(n), &DMatrix::zeros(1, n), &DVector::zeros(1)).unwrap();
            assert_eq!(prob.psi.blocks[0].indices, vec![0]);
            assert_eq!(prob.psi.blocks[1].indices, (1..n).collect::<Vec<_>>());
        }
        assert!(socp_to_pho(&DVector::zeros(1), &DMatrix::zeros(1, 1), &DVector::zeros(1)).is_err());
    }

    #[test]
    fn socp_two_variable_instance() {
        // min x₁ s.t. x₁ = 1, x₁ ≥ |x₂|: value 1.
        let c = DVector::from_vec(vec![1.0, 0.0]);
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0]);
        let prob = socp_to_pho(&c, &a, &b).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.5]);
        let r = primal_residuals(&prob, &x, 1e-12).unwrap();
        assert!(r.feasible);
        assert_eq!(r.objective, 1.0);

        let dual = simplify_dual(&build_dual(&prob).unwrap());
        assert_eq!(dual.equality_rows, vec![0]);
        let socp = socp_dual_simplify(&dual).unwrap();
        // u = 1, v = c₁ − u = 0 is feasible in both forms with value 1.
        let u = DVector::from_vec(vec![1.0]);
        assert!(socp.constraint(&u) <= 0.0);
        assert_eq!(socp.eliminated_v(&u), 0.0);
        let r = dual_residuals(&dual, &u, &DVector::from_vec(vec![0.0]), 1e-12).unwrap();
        assert!(r.feasible);
        assert_eq!(r.objective, 1.0);
        assert!(socp.constraint(&DVector::from_vec(vec![1.001])) > 0.0);
    }

    #[test]
    fn socp_dual_rejects_other_duals() {
        let prob = PHOProblem::unconstrained(DVector::zeros(2), DVector::zeros(2), VectorPH::abs(2));
        assert!(socp_dual_simplify(&build_dual(&prob).unwrap()).is_err());
    }

    #[test]
    fn gauge_layout_and_equality_row() {
        let n = 2;
        let obj = [GaugeTerm::new(1.0, DMatrix::identity(2, 2), DVector::zeros(2), Exponent::Finite(2.0))];
        let g = gauge_to_pho(n, &obj, &[]).unwrap();
        assert!(validate_problem(&g.problem).is_empty());
        assert_eq!(g.dual.equality_rows, vec![0]);
        assert_eq!(g.layout.v_len(), 2);
        // ‖−u₁₁‖₂ ≤ 1 and u₁₁ = 0 (equality): only u = 0 is feasible, value 0.
        let zero = DVector::zeros(2);
        assert!(dual_residuals(&g.dual, &zero, &zero, 1e-12).unwrap().feasible);
        let u = DVector::from_vec(vec![0.5, 0.0]);
        let alpha = g.problem.eq_lin.tr_mul(&u);
        assert_eq!(alpha[0], 0.5);
    }

    #[test]
    fn gauge_constraint_only_rows() {
        let n = 2;
        let cons = [GaugeTerm::new(3.0, DMatrix::identity(2, 2), DVector::zeros(2), Exponent::Infinity)];
        let g = gauge_to_pho(n, &[], &cons).unwrap();
        assert_eq!(g.layout.s(), 0);
        assert_eq!(g.layout.constraint_multiplier(0), 1);
        assert_eq!(g.problem.ineq_rhs.as_slice(), &[0.0, -3.0]);
        assert_eq!(g.problem.ineq_psi[(1, 1)], -1.0);
        assert_eq!(g.dual.psi_star.blocks[1].func.exponent, Exponent::Finite(1.0));
    }

    #[test]
    fn gauge_rejects_negative_weights() {
        let obj = [GaugeTerm::new(-1.0, DMatrix::identity(1, 1), DVector::zeros(1), Exponent::Finite(2.0))];
        assert!(gauge_to_pho(1, &obj, &[]).is_err());
    }

    fn lasso_params() -> ConstrainedLassoParams {
        ConstrainedLassoParams {
            a: DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 1.0]),
            b: DVector::from_vec(vec![1.0, -1.0]),
            beta: 0.5,
            lambda1: 1.0,
            lambda2: 0.3,
            p1: Exponent::Finite(0.5),
            p2: Exponent::Finite(2.0),
        }
    }

    #[test]
    fn constrained_lasso_matches_gauge_path() {
        let params = lasso_params();
        let direct = constrained_lasso_to_pho(&params).unwrap();
        let eye = DMatrix::identity(3, 3);
        let via_gauge = gauge_to_pho(
            3,
            &[
                GaugeTerm::new(1.0, eye.clone(), DVector::zeros(3), Exponent::Finite(0.5)),
                GaugeTerm::new(0.3, eye, DVector::zeros(3), Exponent::Finite(2.0)),
            ],
            &[GaugeTerm::new(0.5, params.a.clone(), params.b.clone(), Exponent::Finite(2.0))],
        )
        .unwrap();
        assert_eq!(direct, via_gauge);
        assert_eq!(direct.layout.constraint_multiplier(0), 3);
    }

    #[test]
    fn constrained_lasso_zero_lambda2_forces_equality() {
        let mut params = lasso_params();
        params.lambda2 = 0.0;
        let g = constrained_lasso_to_pho(&params).unwrap();
        assert_eq!(g.dual.equality_rows, vec![0, 2]);
    }

    #[test]
    fn group_lasso_validation() {
        let base = GroupLassoParams {
            a: DMatrix::identity(2, 2),
            b: DVector::from_vec(vec![1.0, 0.0]),
            lambda1: 0.5,
            lambda2: 0.5,
            groups: vec![vec![0], vec![1]],
            m_prime: 1,
            p1: Exponent::Finite(1.0),
            p2: Exponent::Finite(1.0),
        };
        let g = group_lasso_to_pho(&base).unwrap();
        assert_eq!(g.layout.s(), 3);
        assert_eq!(g.dual.equality_rows, vec![0]);

        let mut bad = base.clone();
        bad.m_prime = 2;
        assert!(group_lasso_to_pho(&bad).is_err());
        let mut bad = base.clone();
        bad.groups = vec![vec![0, 1], vec![1]];
        assert!(group_lasso_to_pho(&bad).is_err());

        let mut zero = base;
        zero.lambda1 = 0.0;
        zero.lambda2 = 0.0;
        let g = group_lasso_to_pho(&zero).unwrap();
        assert_eq!(g.dual.equality_rows, vec![0, 1, 2]);
    }

    #[test]
    fn sum_norms_structure() {
        let term = SumNormsTerm {
            lambda: 1.0,
            matrix: DMatrix::identity(2, 2),
            offset: DVector::zeros(2),
            exponent: Exponent::Finite(2.0),
        };
        let r = sum_norms_to_pho(std::slice::from_ref(&term), None, Some(&[Safeguard { c: 1.0, d: 10.0 }])).unwrap();
        assert!(validate_problem(&r.problem).is_empty());
        assert_eq!(r.linear_rows, 0);
        assert_eq!(r.dual.equality_rows, vec![0]);
        assert_eq!(r.display_mismatch.len(), 1);
        // u = 0, v = 0 is dual feasible with value 0; x = 0 is primal feasible with value 0.
        let u = DVector::zeros(2);
        let v = DVector::zeros(1);
        let dr = dual_residuals(&r.dual, &u, &v, 1e-12).unwrap();
        assert!(dr.feasible && dr.objective == 0.0);
        let pr = primal_residuals(&r.problem, &DVector::zeros(4), 1e-12).unwrap();
        assert!(pr.feasible && pr.objective == 0.0);

        let defaults = sum_norms_to_pho(std::slice::from_ref(&term), None, None).unwrap();
        assert_eq!(defaults.safeguards, vec![Safeguard { c: 1.0, d: 1e3 }]);

        assert!(sum_norms_to_pho(&[term], None, Some(&[Safeguard { c: 0.0, d: 1.0 }])).is_err());
    }

    #[test]
    fn sum_norms_with_linear_rows() {
        let term = SumNormsTerm {
            lambda: -1.0,
            matrix: DMatrix::identity(2, 2),
            offset: DVector::from_vec(vec![1.0, 1.0]),
            exponent: Exponent::Finite(1.0),
        };
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let rhs = DVector::from_vec(vec![3.0]);
        let r = sum_norms_to_pho(&[term], Some((&b, &rhs)), Some(&[Safeguard { c: 2.0, d: 5.0 }])).unwrap();
        assert_eq!(r.problem.ineq_lin.row(0).iter().take(2).copied().collect::<Vec<_>>(), vec![-1.0, -1.0]);
        assert_eq!(r.problem.ineq_rhs.as_slice(), &[-3.0, -5.0]);
        assert_eq!(r.problem.ineq_psi[(1, 1)], -2.0);
    }

    #[test]
    fn binary_single_variable() {
        // max x s.t. x ≤ 0.5 over {0, 1}: only x = 0.
        let lp = BinaryLp {
            direction: Direction::Maximize,
            objective: vec![1.0],
            constraints: vec![LinearRow {
                coeffs: vec![1.0],
                sense: RowSense::Le,
                rhs: 0.5,
            }],
        };
        let enc = binary_to_avo(&lp).unwrap();
        let prob = enc.avo.to_pho();
        let minus = DVector::from_vec(vec![-1.0]);
        let plus = DVector::from_vec(vec![1.0]);
        assert!(primal_residuals(&prob, &minus, 0.0).unwrap().feasible);
        assert!(!primal_residuals(&prob, &plus, 0.0).unwrap().feasible);
        assert_eq!(BinaryAvo::recover(&minus), vec![0.0]);
        assert_eq!(enc.original_objective(&minus), 0.0);
        assert_eq!(enc.original_objective(&plus), 1.0);
    }

    #[test]
    fn binary_without_constraints() {
        let lp = BinaryLp {
            direction: Direction::Minimize,
            objective: vec![1.0, 2.0],
            constraints: vec![],
        };
        let enc = binary_to_avo(&lp).unwrap();
        assert_eq!(enc.avo.eq_rhs.len(), 2);
        assert_eq!(enc.avo.eq_abs, DMatrix::identity(2, 2));
        let dual = build_dual(&enc.avo.to_pho()).unwrap();
        assert!(dual.is_linear_program());
        assert!(dual_as_lp(&dual).is_ok());
    }
}
