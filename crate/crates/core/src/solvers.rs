//! Desk-scale solvers.
//!
//! * [`simplex_lp`]: dense two-phase tableau simplex with Bland's rule;
//! * [`solve_subgradient`]: switching subgradient method for convex programs with a
//!   linear objective, and [`solve_dual_subgradient`] for the closed-form dual;
//! * [`brute_force_primal`]: grid search or sign-pattern enumeration;
//! * [`plant_feasible_instance`]: random problems with a known feasible point.

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::dual::{alpha_beta, build_dual, primal_objective, primal_residuals, tolerance_scale};
use crate::error::{check_len, Error, Result};
use crate::model::{DualProblem, Exponent, PHOProblem, VectorPH};
use crate::ph::{dual_argmax, eval_ph, eval_vector_ph};
use crate::sampling::{self, SeededRng};
use crate::transforms::{simplify_dual, Direction, LPProblem, RowSense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// Largest constraint violation at the current iterate.
    pub violation: f64,
    /// Smallest violation seen so far.
    pub floor: f64,
    #[serde(serialize_with = "ser_real_opt")]
    pub best_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Final basis (standard-form column indices) and LP multipliers `w`, feasible
    /// for [`LPProblem::dual`].
    Basis {
        basis: Vec<usize>,
        duals: Vec<f64>,
        #[serde(serialize_with = "ser_real")]
        dual_value: f64,
        dual_violation: f64,
    },
    Subgradient {
        best_point: Option<Vec<f64>>,
        history: Vec<HistoryEntry>,
    },
    Enumeration {
        candidates: usize,
        feasible: usize,
        failures: usize,
    },
}

/// Outcome of a solve. `value` is `+∞` for an infeasible minimization, `−∞` for an
/// unbounded one (signs flipped when maximizing) and NaN when unknown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub point: Vec<f64>,
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn point_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.point)
    }
}

fn ser_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn ser_real_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_real(x, s),
        None => s.serialize_none(),
    }
}

fn max_abs<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub const SIMPLEX_MAX_PIVOTS: usize = 50_000;
const PIVOT_EPS: f64 = 1e-9;

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][col] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
            }
        }
        self.basis[r] = col;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut rc = cost[..self.width].to_vec();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (v, t) in rc.iter_mut().zip(row) {
                    *v -= cb * t;
                }
            }
        }
        rc
    }

    /// Bland's rule; `Err(col)` reports an unbounded entering column.
    fn run(&mut self, cost: &[f64], allowed: usize, rc_tol: f64, pivots: &mut usize) -> Option<std::result::Result<(), usize>> {
        loop {
            if *pivots >= SIMPLEX_MAX_PIVOTS {
                return None;
            }
            let rc = self.reduced_costs(cost);
            let Some(col) = (0..allowed).find(|&j| rc[j] < -rc_tol) else {
                return Some(Ok(()));
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            if (tie && self.basis[r] < self.basis[lr]) || (!tie && ratio < lratio) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Some(Err(col));
            };
            self.pivot(r, col);
            *pivots += 1;
        }
    }
}

/// Column of the standard form and how it maps back to an original variable.
#[derive(Clone, Copy)]
enum ColumnRole {
    Var { j: usize, sign: f64 },
    Slack,
}

/// Dense two-phase simplex with Bland's anti-cycling rule.
///
/// Variables with a lower bound are shifted to start at zero and free variables
/// are split. Every row gets an artificial variable in phase one. On an optimal
/// solve the certificate carries multipliers `w` for [`LPProblem::dual`], read
/// from the reduced costs of the artificial columns; primal and dual feasibility
/// are both checked at `tol · (1 + max |data|)` before `Optimal` is reported.
pub fn simplex_lp(lp: &LPProblem, tol: f64) -> Result<SolveResult> {
    lp.check_dims()?;
    let (m, nv) = (lp.num_rows(), lp.num_vars());
    let dir_sign = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };

    let mut roles = Vec::new();
    for (j, l) in lp.lower.iter().enumerate() {
        roles.push(ColumnRole::Var { j, sign: 1.0 });
        if l.is_none() {
            roles.push(ColumnRole::Var { j, sign: -1.0 });
        }
    }
    let shift: Vec<f64> = lp.lower.iter().map(|l| l.unwrap_or(0.0)).collect();
    let shift_v = DVector::from_column_slice(&shift);
    let rhs = &lp.rhs - &lp.matrix * &shift_v;

    let mut slack_of_row = vec![None; m];
    for (r, s) in lp.senses.iter().enumerate() {
        if *s != RowSense::Eq {
            slack_of_row[r] = Some(roles.len());
            roles.push(ColumnRole::Slack);
        }
    }
    let n_real = roles.len();
    let width = n_real + m;
    let mut row_sign = vec![1.0; m];
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let mut row = vec![0.0; width + 1];
        for (c, role) in roles.iter().enumerate() {
            if let ColumnRole::Var { j, sign } = role {
                row[c] = sign * lp.matrix[(r, *j)];
            }
        }
        if let Some(c) = slack_of_row[r] {
            row[c] = if lp.senses[r] == RowSense::Le { 1.0 } else { -1.0 };
        }
        row[width] = rhs[r];
        if rhs[r] < 0.0 {
            row_sign[r] = -1.0;
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[n_real + r] = 1.0;
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis: (n_real..width).collect(),
        width,
    };

    let mut cost2 = vec![0.0; width];
    for (c, role) in roles.iter().enumerate() {
        if let ColumnRole::Var { j, sign } = role {
            cost2[c] = dir_sign * sign * lp.objective[*j];
        }
    }
    let cost_scale = 1.0 + max_abs(lp.objective.iter());
    let data_scale = tolerance_scale(rhs.as_slice()).max(1.0 + max_abs(lp.matrix.iter()));
    let mut pivots = 0;

    let mut cost1 = vec![0.0; width];
    cost1[n_real..].iter_mut().for_each(|v| *v = 1.0);
    let iter_limit = |pivots| SolveResult {
        status: SolveStatus::IterLimit,
        point: vec![f64::NAN; nv],
        value: f64::NAN,
        iterations: pivots,
        certificate: None,
    };
    match tab.run(&cost1, width, PIVOT_EPS, &mut pivots) {
        None => return Ok(iter_limit(pivots)),
        Some(Err(_)) => {
            return Ok(SolveResult {
                status: SolveStatus::NumericalFailure,
                point: vec![f64::NAN; nv],
                value: f64::NAN,
                iterations: pivots,
                certificate: None,
            })
        }
        Some(Ok(())) => {}
    }
    let infeasibility: f64 = (0..m).filter(|&r| tab.basis[r] >= n_real).map(|r| tab.rhs(r)).sum();
    if infeasibility > tol * data_scale {
        return Ok(SolveResult {
            status: SolveStatus::Infeasible,
            point: vec![f64::NAN; nv],
            value: dir_sign * f64::INFINITY,
            iterations: pivots,
            certificate: None,
        });
    }
    // Drive artificial variables out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n_real {
            if let Some(c) = (0..n_real).find(|&c| tab.rows[r][c].abs() > PIVOT_EPS) {
                tab.pivot(r, c);
                pivots += 1;
            }
        }
    }

    match tab.run(&cost2, n_real, PIVOT_EPS * cost_scale, &mut pivots) {
        None => return Ok(iter_limit(pivots)),
        Some(Err(_)) => {
            return Ok(SolveResult {
                status: SolveStatus::Unbounded,
                point: vec![f64::NAN; nv],
                value: -dir_sign * f64::INFINITY,
                iterations: pivots,
                certificate: None,
            })
        }
        Some(Ok(())) => {}
    }

    let mut y = shift_v.clone();
    for r in 0..m {
        let c = tab.basis[r];
        if c < n_real {
            if let ColumnRole::Var { j, sign } = roles[c] {
                y[j] += sign * tab.rhs(r);
            }
        }
    }
    let mut w = vec![0.0; m];
    for (r, wr) in w.iter_mut().enumerate() {
        let internal: f64 = (0..m).map(|i| cost2[tab.basis[i]] * tab.rows[i][n_real + r]).sum();
        let flipped = match (lp.direction, lp.senses[r]) {
            (Direction::Minimize, RowSense::Le) | (Direction::Maximize, RowSense::Ge) => -1.0,
            _ => 1.0,
        };
        *wr = dir_sign * flipped * row_sign[r] * internal;
    }
    let value = lp.objective_value(&y);
    let primal_violation = lp.max_violation(&y);
    let (dual_value, dual_violation) = match lp.dual() {
        Ok(d) => {
            let wv = DVector::from_column_slice(&w);
            (d.objective_value(&wv), d.max_violation(&wv))
        }
        Err(_) => (f64::NAN, 0.0),
    };
    let status = if primal_violation <= tol * data_scale && dual_violation <= tol * cost_scale.max(data_scale) {
        SolveStatus::Optimal
    } else {
        SolveStatus::NumericalFailure
    };
    Ok(SolveResult {
        status,
        point: y.iter().copied().collect(),
        value,
        iterations: pivots,
        certificate: Some(Certificate::Basis {
            basis: tab.basis.clone(),
            duals: w,
            dual_value,
            dual_violation,
        }),
    })
}

/// A convex program `max objᵀz s.t. g_i(z) ≤ 0, E z = e, z_j ≥ 0 (j ∈ N)` with
/// convex `g_i` available through values and subgradients.
pub trait ConvexProgram {
    fn dim(&self) -> usize;
    fn objective(&self) -> DVector<f64>;
    /// Values `g_i(z)`; `z` is feasible for these when every value is `≤ 0`.
    fn constraints(&self, z: &DVector<f64>) -> Vec<f64>;
    /// One subgradient of `g_i` at `z`.
    fn subgradient(&self, i: usize, z: &DVector<f64>) -> DVector<f64>;
    fn nonnegative(&self) -> Vec<usize> {
        Vec::new()
    }
    fn equalities(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientOptions {
    pub max_iter: usize,
    /// `σ` in the objective step `σ/√t · obj`; defaults to `1/(1 + ‖obj‖)`.
    pub step_scale: Option<f64>,
    pub start: Option<Vec<f64>>,
    /// Feasibility steps aim at `g = −margin (1 + ‖z‖∞)` so that landing points
    /// are strictly inside.
    pub margin: f64,
    /// Accepted residual `‖Ez − e‖∞ / (1 + ‖e‖∞)`.
    pub eq_tol: f64,
    /// Number of history entries kept (evenly spaced).
    pub history_len: usize,
}

impl Default for SubgradientOptions {
    fn default() -> Self {
        SubgradientOptions {
            max_iter: 100_000,
            step_scale: None,
            start: None,
            margin: 1e-10,
            eq_tol: 1e-12,
            history_len: 100,
        }
    }
}

impl SubgradientOptions {
    pub fn with_max_iter(max_iter: usize) -> Self {
        SubgradientOptions {
            max_iter,
            ..Default::default()
        }
    }
}

/// Projection onto `{Ez = e} ∩ {z_N ≥ 0}` by Dykstra's alternating projections.
struct Projector {
    affine: Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)>,
    nonneg: Vec<usize>,
}

impl Projector {
    fn new(prog: &(impl ConvexProgram + ?Sized)) -> Result<Self> {
        let affine = match prog.equalities() {
            Some((e, rhs)) if e.nrows() > 0 => {
                check_len("equality columns", prog.dim(), e.ncols())?;
                check_len("equality rhs", e.nrows(), rhs.len())?;
                let pinv = e
                    .clone()
                    .pseudo_inverse(1e-12)
                    .map_err(|m| Error::InvalidInput(format!("equality projection: {m}")))?;
                Some((e, rhs, pinv))
            }
            _ => None,
        };
        Ok(Projector {
            affine,
            nonneg: prog.nonnegative(),
        })
    }

    fn affine(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.affine {
            Some((e, rhs, pinv)) => z - pinv * (e * z - rhs),
            None => z.clone(),
        }
    }

    fn cone(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut out = z.clone();
        for &j in &self.nonneg {
            out[j] = out[j].max(0.0);
        }
        out
    }

    fn project(&self, z: &DVector<f64>) -> DVector<f64> {
        if self.affine.is_none() {
            return self.cone(z);
        }
        if self.nonneg.is_empty() {
            return self.affine(z);
        }
        let mut x = z.clone();
        let mut p = DVector::zeros(z.len());
        let mut q = DVector::zeros(z.len());
        for _ in 0..200 {
            let y = self.affine(&(&x + &p));
            p = &x + &p - &y;
            let next = self.cone(&(&y + &q));
            q = &y + &q - &next;
            let change = (&next - &x).amax();
            x = next;
            if change <= 1e-15 * (1.0 + x.amax()) {
                break;
            }
        }
        x
    }

    fn residual(&self, z: &DVector<f64>) -> f64 {
        match &self.affine {
            Some((e, rhs, _)) => (e * z - rhs).amax() / (1.0 + rhs.amax()),
            None => 0.0,
        }
    }
}

/// Switching subgradient method for `max objᵀz` over a convex set.
///
/// While the most violated constraint `g_i(z) > 0`, a Polyak step
/// `z ← z − (g_i + μ)/‖s‖² · s` with `s ∈ ∂g_i(z)` moves toward feasibility (ties go
/// to the lowest index); otherwise `z ← z + σ/√t · obj`. After every step the
/// iterate is projected onto the equality and sign constraints. Returns the best
/// feasible iterate (`Optimal`), or `IterLimit` with the violation history when
/// none was found. A vanishing subgradient at an infeasible point ends the run
/// early since no step can make progress.
pub fn solve_subgradient(prog: &(impl ConvexProgram + ?Sized), opts: &SubgradientOptions) -> Result<SolveResult> {
    let dim = prog.dim();
    let obj = prog.objective();
    check_len("objective", dim, obj.len())?;
    let sigma = opts.step_scale.unwrap_or(1.0 / (1.0 + obj.norm()));
    let projector = Projector::new(prog)?;
    let start = match &opts.start {
        Some(s) => {
            check_len("start", dim, s.len())?;
            DVector::from_column_slice(s)
        }
        None => DVector::zeros(dim),
    };
    let mut z = projector.project(&start);
    let stride = (opts.max_iter / opts.history_len.max(1)).max(1);
    let mut history = Vec::new();
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut floor = f64::INFINITY;
    let mut iterations = 0;

    for t in 1..=opts.max_iter.max(1) {
        iterations = t;
        let g = prog.constraints(&z);
        let mut worst: Option<(usize, f64)> = None;
        for (i, &gi) in g.iter().enumerate() {
            if worst.is_none_or(|(_, w)| gi > w) {
                worst = Some((i, gi));
            }
        }
        let worst_g = worst.map_or(f64::NEG_INFINITY, |(_, w)| w);
        let eq_res = projector.residual(&z);
        let violation = worst_g.max(0.0).max(if eq_res > opts.eq_tol { eq_res } else { 0.0 });
        floor = floor.min(violation);
        let feasible = worst_g <= 0.0 && eq_res <= opts.eq_tol;
        if feasible {
            let value = obj.dot(&z);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, z.clone()));
            }
        }
        if t % stride == 0 || t == 1 {
            history.push(HistoryEntry {
                iteration: t,
                violation,
                floor,
                best_value: best.as_ref().map(|(b, _)| *b),
            });
        }
        if worst_g > 0.0 {
            let (i, gi) = worst.expect("positive violation has an index");
            let s = prog.subgradient(i, &z);
            let ns = s.norm_squared();
            if ns == 0.0 || !ns.is_finite() {
                break;
            }
            let target = opts.margin * (1.0 + z.amax());
            z -= s * ((gi + target) / ns);
        } else {
            if feasible && obj.iter().all(|&v| v == 0.0) {
                break;
            }
            z += &obj * (sigma / (t as f64).sqrt());
        }
        z = projector.project(&z);
    }
    if history.last().is_none_or(|h| h.iteration != iterations) {
        let g = prog.constraints(&z);
        let violation = g.iter().fold(0.0f64, |m, &v| m.max(v));
        history.push(HistoryEntry {
            iteration: iterations,
            violation,
            floor: floor.min(violation),
            best_value: best.as_ref().map(|(b, _)| *b),
        });
    }
    Ok(match best {
        Some((value, point)) => SolveResult {
            status: SolveStatus::Optimal,
            point: point.iter().copied().collect(),
            value,
            iterations,
            certificate: Some(Certificate::Subgradient {
                best_point: Some(point.iter().copied().collect()),
                history,
            }),
        },
        None => SolveResult {
            status: SolveStatus::IterLimit,
            point: z.iter().copied().collect(),
            value: f64::NAN,
            iterations,
            certificate: Some(Certificate::Subgradient {
                best_point: None,
                history,
            }),
        },
    })
}

/// The closed-form dual as a [`ConvexProgram`] over `z = (u, v)`.
///
/// Rows flagged by [`simplify_dual`] as equalities become the linear constraints
/// `(Aᵀu + Hᵀv)_{I_i} = c_{I_i}`; every other block contributes
/// `g_i = ψ*_i(α_{I_i}) − β_i`.
pub struct DualProgram<'a> {
    dual: DualProblem,
    prob: &'a PHOProblem,
}

impl<'a> DualProgram<'a> {
    pub fn new(dual: &'a DualProblem) -> Self {
        DualProgram {
            dual: simplify_dual(dual),
            prob: &dual.base,
        }
    }

    fn split(&self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let k = self.prob.k();
        (z.rows(0, k).into_owned(), z.rows(k, self.prob.l()).into_owned())
    }

    fn inequality_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.prob.m()).filter(|i| !self.dual.equality_rows.contains(i))
    }
}

impl ConvexProgram for DualProgram<'_> {
    fn dim(&self) -> usize {
        self.prob.k() + self.prob.l()
    }

    fn objective(&self) -> DVector<f64> {
        let mut o = DVector::zeros(self.dim());
        o.rows_mut(0, self.prob.k()).copy_from(&self.prob.eq_rhs);
        o.rows_mut(self.prob.k(), self.prob.l()).copy_from(&self.prob.ineq_rhs);
        o
    }

    fn constraints(&self, z: &DVector<f64>) -> Vec<f64> {
        let (u, v) = self.split(z);
        let (alpha, beta) = alpha_beta(self.prob, &u, &v).expect("dimensions checked");
        self.inequality_rows()
            .map(|i| {
                let block = &self.dual.psi_star.blocks[i];
                let a = block.gather(&alpha);
                eval_ph(&block.func, a.as_slice()).expect("valid exponent") - beta[i]
            })
            .collect()
    }

    fn subgradient(&self, i: usize, z: &DVector<f64>) -> DVector<f64> {
        let row = self.inequality_rows().nth(i).expect("constraint index in range");
        let (u, v) = self.split(z);
        let (alpha, _) = alpha_beta(self.prob, &u, &v).expect("dimensions checked");
        let block = &self.prob.psi.blocks[row];
        let s = dual_argmax(&block.func, block.gather(&alpha).as_slice()).expect("valid exponent");
        let (k, l) = (self.prob.k(), self.prob.l());
        let mut g = DVector::zeros(k + l);
        for q in 0..k {
            g[q] = self.prob.eq_psi[(q, row)]
                + block.indices.iter().zip(&s).map(|(&j, sj)| self.prob.eq_lin[(q, j)] * sj).sum::<f64>();
        }
        for q in 0..l {
            g[k + q] = self.prob.ineq_psi[(q, row)]
                + block.indices.iter().zip(&s).map(|(&j, sj)| self.prob.ineq_lin[(q, j)] * sj).sum::<f64>();
        }
        g
    }

    fn nonnegative(&self) -> Vec<usize> {
        (self.prob.k()..self.dim()).collect()
    }

    fn equalities(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        let cols: Vec<usize> = self
            .dual
            .equality_rows
            .iter()
            .flat_map(|&i| self.prob.psi.blocks[i].indices.iter().copied())
            .collect();
        if cols.is_empty() {
            return None;
        }
        let (k, l) = (self.prob.k(), self.prob.l());
        let mut e = DMatrix::zeros(cols.len(), k + l);
        let mut rhs = DVector::zeros(cols.len());
        for (r, &j) in cols.iter().enumerate() {
            for q in 0..k {
                e[(r, q)] = self.prob.eq_lin[(q, j)];
            }
            for q in 0..l {
                e[(r, k + q)] = self.prob.ineq_lin[(q, j)];
            }
            rhs[r] = self.prob.c[j];
        }
        Some((e, rhs))
    }
}

/// Maximizes `bᵀu + pᵀv` over the closed-form dual; the point is `(u, v)`.
pub fn solve_dual_subgradient(dual: &DualProblem, opts: &SubgradientOptions) -> Result<SolveResult> {
    solve_subgradient(&DualProgram::new(dual), opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BruteForceMode {
    /// Uniform grid over the box; `n ≤ 4`.
    Grid { resolution: f64 },
    /// One LP per sign pattern of `x`; singleton blocks only, `n ≤ 12`.
    SignPattern,
}

pub const GRID_MAX_DIM: usize = 4;
pub const GRID_MAX_POINTS: usize = 20_000_000;
pub const SIGN_PATTERN_MAX_DIM: usize = 12;

/// Best feasible point found by exhaustive search inside the box
/// `lo ≤ x_j ≤ hi`; its value is an upper bound on the optimum over the box.
/// Feasibility is tested by [`primal_residuals`] at `tol · (1 + max |rhs|)`.
pub fn brute_force_primal(prob: &PHOProblem, lo: f64, hi: f64, mode: BruteForceMode, tol: f64) -> Result<SolveResult> {
    prob.ensure_valid()?;
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!("empty box [{lo}, {hi}]")));
    }
    let rhs_scale = tolerance_scale(prob.eq_rhs.as_slice()).max(tolerance_scale(prob.ineq_rhs.as_slice()));
    match mode {
        BruteForceMode::Grid { resolution } => grid_search(prob, lo, hi, resolution, tol * rhs_scale),
        BruteForceMode::SignPattern => sign_patterns(prob, lo, hi, tol, rhs_scale),
    }
}

fn grid_search(prob: &PHOProblem, lo: f64, hi: f64, resolution: f64, tol: f64) -> Result<SolveResult> {
    let n = prob.n;
    if n > GRID_MAX_DIM {
        return Err(Error::Unsupported(format!("grid search needs n ≤ {GRID_MAX_DIM}, found {n}")));
    }
    if !(resolution > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput("grid needs a finite box and a positive resolution".into()));
    }
    let steps = ((hi - lo) / resolution).round().max(0.0) as usize;
    let per_dim = steps + 1;
    let total = per_dim.checked_pow(n as u32).filter(|&t| t <= GRID_MAX_POINTS).ok_or_else(|| {
        Error::Unsupported(format!("grid with {per_dim}^{n} points exceeds {GRID_MAX_POINTS}"))
    })?;
    let coord = |i: usize| {
        if steps == 0 {
            lo
        } else {
            lo + (i as f64) * (hi - lo) / (steps as f64)
        }
    };
    let mut idx = vec![0usize; n];
    let mut x = DVector::zeros(n);
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut feasible = 0;
    for _ in 0..total {
        for (xj, &ij) in x.iter_mut().zip(&idx) {
            *xj = coord(ij);
        }
        let r = primal_residuals(prob, &x, tol)?;
        if r.feasible {
            feasible += 1;
            if best.as_ref().is_none_or(|(b, _)| r.objective < *b) {
                best = Some((r.objective, x.clone()));
            }
        }
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
        }
    }
    let certificate = Some(Certificate::Enumeration {
        candidates: total,
        feasible,
        failures: 0,
    });
    Ok(match best {
        Some((value, x)) => SolveResult {
            status: SolveStatus::Optimal,
            point: x.iter().copied().collect(),
            value,
            iterations: total,
            certificate,
        },
        None => SolveResult {
            status: SolveStatus::Infeasible,
            point: vec![f64::NAN; n],
            value: f64::INFINITY,
            iterations: total,
            certificate,
        },
    })
}

fn sign_patterns(prob: &PHOProblem, lo: f64, hi: f64, tol: f64, rhs_scale: f64) -> Result<SolveResult> {
    let n = prob.n;
    if !prob.psi.all_singletons() {
        return Err(Error::Unsupported("sign-pattern search needs singleton blocks".into()));
    }
    if n > SIGN_PATTERN_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "sign-pattern search needs n ≤ {SIGN_PATTERN_MAX_DIM}, found {n}"
        )));
    }
    let mut block_of = vec![0; n];
    for (i, b) in prob.psi.blocks.iter().enumerate() {
        block_of[b.indices[0]] = i;
    }
    let (k, l) = (prob.k(), prob.l());
    let mut best: Option<(f64, DVector<f64>)> = None;
    let (mut feasible, mut failures, mut pivots) = (0, 0, 0);
    let mut unbounded = false;
    let total = 1usize << n;
    for pattern in 0..total {
        let sign: Vec<f64> = (0..n).map(|j| if pattern >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
        // x_j = s_j y_j with y_j ∈ [lower_j, upper_j].
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut empty = false;
        for &s in &sign {
            let (a, b) = if s > 0.0 { (lo.max(0.0), hi) } else { ((-hi).max(0.0), -lo) };
            empty |= a > b;
            lower.push(a);
            upper.push(b);
        }
        if empty {
            continue;
        }
        let bounded: Vec<usize> = (0..n).filter(|&j| upper[j].is_finite()).collect();
        let rows = k + l + bounded.len();
        let mut mat = DMatrix::zeros(rows, n);
        let mut rhs = DVector::zeros(rows);
        let mut senses = Vec::with_capacity(rows);
        let mut obj = DVector::zeros(n);
        for j in 0..n {
            let i = block_of[j];
            obj[j] = sign[j] * prob.c[j] + prob.d[i];
            for q in 0..k {
                mat[(q, j)] = sign[j] * prob.eq_lin[(q, j)] + prob.eq_psi[(q, i)];
            }
            for q in 0..l {
                mat[(k + q, j)] = sign[j] * prob.ineq_lin[(q, j)] + prob.ineq_psi[(q, i)];
            }
        }
        rhs.rows_mut(0, k).copy_from(&prob.eq_rhs);
        rhs.rows_mut(k, l).copy_from(&prob.ineq_rhs);
        senses.extend(std::iter::repeat_n(RowSense::Eq, k));
        senses.extend(std::iter::repeat_n(RowSense::Ge, l));
        for (r, &j) in bounded.iter().enumerate() {
            mat[(k + l + r, j)] = 1.0;
            rhs[k + l + r] = upper[j];
            senses.push(RowSense::Le);
        }
        let lp = LPProblem {
            direction: Direction::Minimize,
            objective: obj,
            matrix: mat,
            rhs,
            senses,
            lower: lower.into_iter().map(Some).collect(),
        };
        let res = simplex_lp(&lp, tol)?;
        pivots += res.iterations;
        match res.status {
            SolveStatus::Optimal => {
                let x = DVector::from_iterator(n, res.point.iter().zip(&sign).map(|(y, s)| s * y));
                let r = primal_residuals(prob, &x, tol * rhs_scale * 10.0)?;
                if !r.feasible {
                    failures += 1;
                    continue;
                }
                feasible += 1;
                if best.as_ref().is_none_or(|(b, _)| r.objective < *b) {
                    best = Some((r.objective, x));
                }
            }
            SolveStatus::Unbounded => unbounded = true,
            SolveStatus::Infeasible => {}
            SolveStatus::IterLimit | SolveStatus::NumericalFailure => failures += 1,
        }
    }
    let certificate = Some(Certificate::Enumeration {
        candidates: total,
        feasible,
        failures,
    });
    Ok(if unbounded {
        SolveResult {
            status: SolveStatus::Unbounded,
            point: vec![f64::NAN; n],
            value: f64::NEG_INFINITY,
            iterations: pivots,
            certificate,
        }
    } else {
        match best {
            Some((value, x)) => SolveResult {
                status: SolveStatus::Optimal,
                point: x.iter().copied().collect(),
                value,
                iterations: pivots,
                certificate,
            },
            None => SolveResult {
                status: SolveStatus::Infeasible,
                point: vec![f64::NAN; n],
                value: f64::INFINITY,
                iterations: pivots,
                certificate,
            },
        }
    })
}

/// Parameters of [`plant_feasible_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    /// Contiguous blocks `(dimension, exponent)`.
    pub blocks: Vec<(usize, Exponent)>,
    pub k: usize,
    pub l: usize,
    pub seed: u64,
    /// Standard deviation of the planted point.
    pub scale: f64,
    /// Inequality slacks are drawn uniformly from `[0, slack]`.
    pub slack: f64,
    /// When set, also plants a dual point with every block inequality holding
    /// with at least this margin.
    pub dual_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub problem: PHOProblem,
    pub x0: DVector<f64>,
    /// Strictly feasible `(u₀, v₀)` when a dual was planted.
    pub dual_point: Option<(DVector<f64>, DVector<f64>)>,
}

fn abs_normal_vector(rng: &mut SeededRng, n: usize) -> DVector<f64> {
    sampling::normal_vector(rng, n).map(f64::abs)
}

/// Draws `c`, `d ≥ 0`, `A`, `B`, `H`, `K` and `x₀`, then sets
/// `b = Ax₀ + BΨ(x₀)` and `p = Hx₀ + KΨ(x₀) − slack`.
///
/// With a dual plant, `u₀`, `v₀ ≥ 0` and `α₀` are drawn and `c`, `d` are replaced by
/// `c = Aᵀu₀ + Hᵀv₀ − α₀` and `d_i = max(0, ψ*_i(α₀) + (Bᵀu₀ + Kᵀv₀)_i) + margin`,
/// which keeps `d ≥ 0` and makes `(u₀, v₀)` strictly dual feasible.
pub fn plant_feasible_instance(spec: &PlantSpec) -> Result<PlantedInstance> {
    let psi = VectorPH::contiguous(&spec.blocks);
    let n = psi.n();
    let m = psi.m();
    let (k, l) = (spec.k, spec.l);
    if !(spec.scale > 0.0) || !(spec.slack >= 0.0) {
        return Err(Error::InvalidInput("scale must be positive and slack nonnegative".into()));
    }
    let mut rng = sampling::rng(spec.seed);
    let x0 = sampling::normal_vector(&mut rng, n) * spec.scale;
    let mut c = sampling::normal_vector(&mut rng, n);
    let mut d = abs_normal_vector(&mut rng, m);
    let a = sampling::normal_matrix(&mut rng, k, n);
    let b_mat = sampling::normal_matrix(&mut rng, k, m);
    let h = sampling::normal_matrix(&mut rng, l, n);
    let k_mat = sampling::normal_matrix(&mut rng, l, m);
    let slack = DVector::from_fn(l, |_, _| spec.slack * rand::Rng::random::<f64>(&mut rng));

    let mut prob = PHOProblem::unconstrained(c.clone(), d.clone(), psi);
    prob.ensure_valid()?;
    let psi_x0 = eval_vector_ph(&prob.psi, &x0)?;
    let b = &a * &x0 + &b_mat * &psi_x0;
    let p = &h * &x0 + &k_mat * &psi_x0 - slack;

    let mut dual_point = None;
    if let Some(margin) = spec.dual_margin {
        if !(margin > 0.0) {
            return Err(Error::InvalidInput("dual margin must be positive".into()));
        }
        let u0 = sampling::normal_vector(&mut rng, k);
        let v0 = abs_normal_vector(&mut rng, l);
        let alpha0 = sampling::normal_vector(&mut rng, n);
        c = a.tr_mul(&u0) + h.tr_mul(&v0) - &alpha0;
        let shift = b_mat.tr_mul(&u0) + k_mat.tr_mul(&v0);
        for (i, block) in prob.psi.blocks.iter().enumerate() {
            let star = crate::ph::eval_dual_ph(&block.func, block.gather(&alpha0).as_slice())?;
            d[i] = (star + shift[i]).max(0.0) + margin;
        }
        dual_point = Some((u0, v0));
    }
    prob.c = c;
    prob.d = d;
    let problem = prob.with_equalities(a, b_mat, b).with_inequalities(h, k_mat, p);
    problem.ensure_valid()?;
    Ok(PlantedInstance {
        problem,
        x0,
        dual_point,
    })
}

/// `cᵀx + dᵀΨ(x)` at the planted point.
pub fn planted_value(inst: &PlantedInstance) -> Result<f64> {
    primal_objective(&inst.problem, &inst.x0)
}

/// Builds the dual of a planted instance and checks the planted dual point.
pub fn planted_dual(inst: &PlantedInstance) -> Result<DualProblem> {
    build_dual(&inst.problem)
}
