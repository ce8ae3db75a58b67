//! Construction of the closed-form dual, the Lagrangian, and the exact evaluation of
//! the Lagrangian dual function
//!
//! ```text
//! ω(u, v) = inf_x L(x, u, v)
//!         = bᵀu + pᵀv   if ψ*_i(α_{I_i}) ≤ β_i for every block i,
//!         = −∞          otherwise,
//! ```
//!
//! with `α = Aᵀu + Hᵀv − c` and `β = d − Bᵀu − Kᵀv`. When a block violates its
//! inequality, moving that block along the dual-ball maximizer of `α_{I_i}` drives
//! the Lagrangian down linearly; when every block satisfies it, `L(x) ≥ bᵀu + pᵀv`
//! by the generalized Hölder inequality, with equality at `x = 0`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::model::{DualProblem, ExtendedValue, PHOProblem};
use crate::ph::{dual_argmax, dual_vector_ph, eval_ph, eval_vector_ph};

/// Relative slack used when testing `ψ*_i(α) ≤ β_i`.
pub const BOUNDARY_REL_TOL: f64 = 1e-9;

/// Points with `ψ*_i(α) − β_i` at most this value count as satisfying the block.
pub fn boundary_slack(beta_i: f64) -> f64 {
    BOUNDARY_REL_TOL * (1.0 + beta_i.abs())
}

/// `1 + max |v|`: the scale applied to absolute tolerances.
pub fn tolerance_scale(values: &[f64]) -> f64 {
    1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Builds the closed-form dual. No numerical work happens here: the dual carries
/// the problem and the dual exponent of every block.
pub fn build_dual(prob: &PHOProblem) -> Result<DualProblem> {
    prob.ensure_valid()?;
    Ok(DualProblem {
        base: prob.clone(),
        psi_star: dual_vector_ph(&prob.psi)?,
        equality_rows: Vec::new(),
        infeasible_rows: Vec::new(),
    })
}

fn check_multipliers(prob: &PHOProblem, u: &DVector<f64>, v: &DVector<f64>) -> Result<()> {
    check_len("u", prob.k(), u.len())?;
    check_len("v", prob.l(), v.len())
}

/// `α = Aᵀu + Hᵀv − c` and `β = d − Bᵀu − Kᵀv`.
pub fn alpha_beta(
    prob: &PHOProblem,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_multipliers(prob, u, v)?;
    let alpha = prob.eq_lin.tr_mul(u) + prob.ineq_lin.tr_mul(v) - &prob.c;
    let beta = &prob.d - prob.eq_psi.tr_mul(u) - prob.ineq_psi.tr_mul(v);
    Ok((alpha, beta))
}

/// Dual objective `bᵀu + pᵀv`.
pub fn dual_objective(prob: &PHOProblem, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_multipliers(prob, u, v)?;
    Ok(prob.eq_rhs.dot(u) + prob.ineq_rhs.dot(v))
}

/// `L(x,u,v) = cᵀx + dᵀΨ(x) + uᵀ(b − Ax − BΨ(x)) + vᵀ(p − Hx − KΨ(x))`.
///
/// `v` may have any sign here.
pub fn lagrangian(prob: &PHOProblem, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_multipliers(prob, u, v)?;
    let psi_x = eval_vector_ph(&prob.psi, x)?;
    let eq_gap = &prob.eq_rhs - &prob.eq_lin * x - &prob.eq_psi * &psi_x;
    let ineq_gap = &prob.ineq_rhs - &prob.ineq_lin * x - &prob.ineq_psi * &psi_x;
    Ok(prob.c.dot(x) + prob.d.dot(&psi_x) + u.dot(&eq_gap) + v.dot(&ineq_gap))
}

/// The same Lagrangian regrouped as `bᵀu + pᵀv − αᵀx + βᵀΨ(x)`.
pub fn lagrangian_regrouped(
    prob: &PHOProblem,
    x: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let (alpha, beta) = alpha_beta(prob, u, v)?;
    let psi_x = eval_vector_ph(&prob.psi, x)?;
    Ok(dual_objective(prob, u, v)? - alpha.dot(x) + beta.dot(&psi_x))
}

/// A ray along which the Lagrangian decreases without bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceWitness {
    /// Violating block `i0`.
    pub block: usize,
    /// Dual-ball maximizer of `α_{I_{i0}}`.
    pub xhat: Vec<f64>,
    /// `ψ_{i0}(x̂)`, at most one.
    pub psi_xhat: f64,
    /// `β_{i0} − ψ*_{i0}(α_{I_{i0}})`, strictly negative.
    pub slope_bound: f64,
    /// Constant part of the Lagrangian along the ray.
    pub gamma: f64,
    /// Base point: `α` with every block but `i0` kept.
    pub alpha: Vec<f64>,
    pub block_indices: Vec<usize>,
}

impl DivergenceWitness {
    /// `ᾱ(λ)`: `α` with block `i0` replaced by `λ x̂`.
    pub fn ray(&self, lambda: f64) -> DVector<f64> {
        let mut x = DVector::from_column_slice(&self.alpha);
        for (&j, &xh) in self.block_indices.iter().zip(&self.xhat) {
            x[j] = lambda * xh;
        }
        x
    }

    /// Upper bound `γ + λ ψ(x̂) (β_{i0} − ψ*_{i0}(α))` on `L(ᾱ(λ))`.
    pub fn bound(&self, lambda: f64) -> f64 {
        self.gamma + lambda * self.psi_xhat * self.slope_bound
    }

    /// Smallest `λ` with `bound(λ) ≤ level`.
    pub fn lambda_reaching(&self, level: f64) -> f64 {
        let rate = self.psi_xhat * self.slope_bound;
        ((level - self.gamma) / rate).max(0.0)
    }
}

/// Value of `ω(u, v)` together with the quantities that determine it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaResult {
    pub value: ExtendedValue,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `ψ*_i(α_{I_i})` per block.
    pub dual_values: Vec<f64>,
    pub violating_block: Option<usize>,
    pub witness: Option<DivergenceWitness>,
}

/// Exact `ω(u, v)`; `v` must be nonnegative.
///
/// A block counts as violated when `ψ*_i(α_{I_i}) > β_i + 1e-9 (1 + |β_i|)`. The
/// witness is built on the block with the largest violation (lowest index on ties).
pub fn omega(prob: &PHOProblem, u: &DVector<f64>, v: &DVector<f64>) -> Result<OmegaResult> {
    let (alpha, beta) = alpha_beta(prob, u, v)?;
    if let Some(i) = v.iter().position(|&x| x < 0.0) {
        return Err(Error::InvalidInput(format!("v[{i}] = {} is negative", v[i])));
    }
    let psi_star = dual_vector_ph(&prob.psi)?;
    let dual_values = eval_vector_ph(&psi_star, &alpha)?;

    let mut worst: Option<(usize, f64)> = None;
    for i in 0..prob.m() {
        let excess = dual_values[i] - beta[i];
        if excess > boundary_slack(beta[i]) && worst.is_none_or(|(_, w)| excess > w) {
            worst = Some((i, excess));
        }
    }

    let value;
    let mut witness = None;
    match worst {
        None => value = ExtendedValue::Finite(dual_objective(prob, u, v)?),
        Some((i0, _)) => {
            value = ExtendedValue::NegInf;
            let block = &prob.psi.blocks[i0];
            let alpha_i0 = block.gather(&alpha);
            let xhat = dual_argmax(&block.func, alpha_i0.as_slice())?;
            let psi_xhat = eval_ph(&block.func, &xhat)?;
            let mut gamma = dual_objective(prob, u, v)?;
            for (i, b) in prob.psi.blocks.iter().enumerate() {
                if i == i0 {
                    continue;
                }
                let a = b.gather(&alpha);
                gamma += -a.dot(&a) + beta[i] * eval_ph(&b.func, a.as_slice())?;
            }
            witness = Some(DivergenceWitness {
                block: i0,
                xhat,
                psi_xhat,
                slope_bound: beta[i0] - dual_values[i0],
                gamma,
                alpha: alpha.iter().copied().collect(),
                block_indices: block.indices.clone(),
            });
        }
    }
    Ok(OmegaResult {
        value,
        alpha: alpha.iter().copied().collect(),
        beta: beta.iter().copied().collect(),
        dual_values: dual_values.iter().copied().collect(),
        violating_block: worst.map(|(i, _)| i),
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimalResiduals {
    pub objective: f64,
    /// `max |Ax + BΨ(x) − b|`.
    pub eq_residual: f64,
    /// `max (p − Hx − KΨ(x))₊`.
    pub ineq_violation: f64,
    pub feasible: bool,
}

/// Primal objective `cᵀx + dᵀΨ(x)`.
pub fn primal_objective(prob: &PHOProblem, x: &DVector<f64>) -> Result<f64> {
    let psi_x = eval_vector_ph(&prob.psi, x)?;
    Ok(prob.c.dot(x) + prob.d.dot(&psi_x))
}

pub fn primal_residuals(prob: &PHOProblem, x: &DVector<f64>, tol: f64) -> Result<PrimalResiduals> {
    check_len("x", prob.n, x.len())?;
    let psi_x = eval_vector_ph(&prob.psi, x)?;
    let eq = &prob.eq_lin * x + &prob.eq_psi * &psi_x - &prob.eq_rhs;
    let ineq = &prob.ineq_rhs - &prob.ineq_lin * x - &prob.ineq_psi * &psi_x;
    let eq_residual = eq.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let ineq_violation = ineq.iter().fold(0.0f64, |m, r| m.max(*r));
    Ok(PrimalResiduals {
        objective: prob.c.dot(x) + prob.d.dot(&psi_x),
        eq_residual,
        ineq_violation,
        feasible: eq_residual <= tol && ineq_violation <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualResiduals {
    pub objective: f64,
    /// `max_i (ψ*_i(α_{I_i}) + (Bᵀu + Kᵀv)_i − d_i)₊`.
    pub constraint_violation: f64,
    /// `max (−v)₊`.
    pub v_violation: f64,
    pub feasible: bool,
}

pub fn dual_residuals(dual: &DualProblem, u: &DVector<f64>, v: &DVector<f64>, tol: f64) -> Result<DualResiduals> {
    let prob = &dual.base;
    let (alpha, beta) = alpha_beta(prob, u, v)?;
    let values = eval_vector_ph(&dual.psi_star, &alpha)?;
    let constraint_violation = values
        .iter()
        .zip(beta.iter())
        .fold(0.0f64, |m, (s, b)| m.max(s - b));
    let v_violation = v.iter().fold(0.0f64, |m, x| m.max(-x));
    Ok(DualResiduals {
        objective: dual_objective(prob, u, v)?,
        constraint_violation,
        v_violation,
        feasible: constraint_violation <= tol && v_violation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Exponent, VectorPH};
    use nalgebra::DMatrix;

    /// min |x| s.t. x ≥ 1 written as c = 0, d = 1, H = [1], K = [0], p = [1].
    pub(crate) fn one_var() -> PHOProblem {
        PHOProblem::unconstrained(DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0]), VectorPH::abs(1))
            .with_inequalities(
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, 0.0),
                DVector::from_vec(vec![1.0]),
            )
    }

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    fn empty() -> DVector<f64> {
        DVector::zeros(0)
    }

    #[test]
    fn build_dual_examples() {
        let dual = build_dual(&one_var()).unwrap();
        assert_eq!(dual.psi_star.blocks[0].func.exponent, Exponent::Infinity);

        let psi = VectorPH::contiguous(&[(2, Exponent::Finite(2.0)), (1, Exponent::Finite(2.0))]);
        let prob = PHOProblem::unconstrained(DVector::zeros(3), DVector::zeros(2), psi);
        let dual = build_dual(&prob).unwrap();
        assert!(dual
            .psi_star
            .blocks
            .iter()
            .all(|b| b.func.exponent == Exponent::Finite(2.0)));

        let mut bad = one_var();
        bad.d = DVector::zeros(2);
        assert!(matches!(build_dual(&bad), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn lagrangian_examples() {
        let prob = one_var();
        // x = 0: bᵀu + pᵀv.
        assert_eq!(lagrangian(&prob, &vec1(0.0), &empty(), &vec1(2.0)).unwrap(), 2.0);
        // v = 2, x = 5: 2 − 2·5 + |5| = −3 by both forms.
        assert_eq!(lagrangian(&prob, &vec1(5.0), &empty(), &vec1(2.0)).unwrap(), -3.0);
        assert_eq!(lagrangian_regrouped(&prob, &vec1(5.0), &empty(), &vec1(2.0)).unwrap(), -3.0);
        // multipliers zero: primal objective.
        assert_eq!(lagrangian(&prob, &vec1(-4.0), &empty(), &vec1(0.0)).unwrap(), 4.0);
    }

    #[test]
    fn omega_examples() {
        let prob = one_var();
        let r = omega(&prob, &empty(), &vec1(0.5)).unwrap();
        assert_eq!(r.value, ExtendedValue::Finite(0.5));
        assert_eq!(r.alpha, vec![0.5]);
        assert_eq!(r.beta, vec![1.0]);
        // Grid minimization of L over [−100, 100] agrees.
        let grid_min = (0..=200_000)
            .map(|i| -100.0 + i as f64 * 1e-3)
            .map(|x| lagrangian(&prob, &vec1(x), &empty(), &vec1(0.5)).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((grid_min - 0.5).abs() < 1e-12);

        let r = omega(&prob, &empty(), &vec1(2.0)).unwrap();
        assert_eq!(r.value, ExtendedValue::NegInf);
        let w = r.witness.unwrap();
        assert_eq!(w.block, 0);
        assert_eq!(w.xhat, vec![1.0]);
        assert_eq!(w.slope_bound, -1.0);
        for lambda in [1.0, 10.0, 1e3] {
            let l = lagrangian(&prob, &w.ray(lambda), &empty(), &vec1(2.0)).unwrap();
            assert_eq!(l, 2.0 - lambda);
            assert!(l <= w.bound(lambda) + 1e-12);
        }

        let zero_c = PHOProblem::unconstrained(DVector::zeros(2), DVector::from_vec(vec![0.0, 3.0]), VectorPH::abs(2));
        let r = omega(&zero_c, &empty(), &empty()).unwrap();
        assert_eq!(r.value, ExtendedValue::Finite(0.0));

        assert!(omega(&prob, &empty(), &vec1(-1.0)).is_err());
    }

    #[test]
    fn boundary_band_is_finite() {
        let prob = one_var();
        let r = omega(&prob, &empty(), &vec1(1.0 + 1e-10)).unwrap();
        assert!(r.value.is_finite());
    }

    #[test]
    fn primal_residual_examples() {
        let prob = one_var();
        let r = primal_residuals(&prob, &vec1(1.0), 1e-9).unwrap();
        assert_eq!(r.objective, 1.0);
        assert!(r.feasible);
        let r = primal_residuals(&prob, &vec1(0.5), 1e-9).unwrap();
        assert_eq!(r.ineq_violation, 0.5);
        assert!(!r.feasible);
    }

    #[test]
    fn dual_residual_examples() {
        let dual = build_dual(&one_var()).unwrap();
        let r = dual_residuals(&dual, &empty(), &vec1(1.0), 1e-9).unwrap();
        assert!(r.feasible);
        assert_eq!(r.objective, 1.0);
        let r = dual_residuals(&dual, &empty(), &vec1(1.5), 1e-9).unwrap();
        assert_eq!(r.constraint_violation, 0.5);
        assert!(!r.feasible);

        let zero_c = PHOProblem::unconstrained(DVector::zeros(2), DVector::from_vec(vec![0.0, 3.0]), VectorPH::abs(2));
        let r = dual_residuals(&build_dual(&zero_c).unwrap(), &empty(), &empty(), 1e-9).unwrap();
        assert!(r.feasible);
        assert_eq!(r.objective, 0.0);
    }
}
