//! Evaluation of p-norm atoms, their duals, dual-ball maximizers, and numerical
//! checks of positive homogeneity.
//!
//! For `p ∈ (0, ∞]` the dual function `ψ*(y) = sup{xᵀy : ψ(x) ≤ 1}` of `‖·‖_p` is
//! again a norm, `‖·‖_q`, with `q = p/(p−1)` for `p > 1`, `q = ∞` for `p ∈ (0, 1]`
//! and `q = 1` for `p = ∞`. For `p < 1` the unit ball is not convex, but it still
//! contains the signed coordinate vectors and sits inside the 1-norm ball, so the
//! supremum is `‖y‖_∞`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::model::{Exponent, ScalarPH, VectorPH};
use crate::sampling::{self, SeededRng};

/// Largest atom dimension accepted by [`oracle_dual_ph`].
pub const ORACLE_MAX_DIM: usize = 6;

/// `‖x‖_p` without dimension checks.
///
/// Computed as `‖x‖_∞ · ‖x/‖x‖_∞‖_p`, so `|x_i|^p` never overflows or underflows
/// even for small `p`.
pub fn pnorm(exponent: Exponent, x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    match exponent {
        Exponent::Infinity => scale,
        Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(2.0) => {
            scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
        }
        Exponent::Finite(p) => {
            let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
            scale * s.powf(1.0 / p)
        }
    }
}

/// `ψ(x)` for one atom.
pub fn eval_ph(func: &ScalarPH, x: &[f64]) -> Result<f64> {
    check_len("ψ argument", func.dim, x.len())?;
    if !func.exponent.is_valid() {
        return Err(invalid_exponent(func.exponent));
    }
    Ok(pnorm(func.exponent, x))
}

/// `Ψ(x)`, one entry per block.
pub fn eval_vector_ph(psi: &VectorPH, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_len("Ψ argument", psi.n(), x.len())?;
    let mut out = DVector::zeros(psi.m());
    for (i, block) in psi.blocks.iter().enumerate() {
        if let Some(&j) = block.indices.iter().find(|&&j| j >= x.len()) {
            return Err(Error::InvalidInput(format!("block {i} index {j} out of range")));
        }
        out[i] = eval_ph(&block.func, block.gather(x).as_slice())?;
    }
    Ok(out)
}

fn invalid_exponent(e: Exponent) -> Error {
    match e {
        Exponent::Finite(p) => Error::InvalidExponent(p),
        Exponent::Infinity => unreachable!("infinity is always a valid exponent"),
    }
}

/// Exponent of the dual norm.
pub fn dual_exponent(p: Exponent) -> Result<Exponent> {
    match p {
        Exponent::Infinity => Ok(Exponent::Finite(1.0)),
        Exponent::Finite(v) if !(v.is_finite() && v > 0.0) => Err(Error::InvalidExponent(v)),
        Exponent::Finite(v) if v <= 1.0 => Ok(Exponent::Infinity),
        Exponent::Finite(v) => Ok(Exponent::Finite(v / (v - 1.0))),
    }
}

/// The dual atom `ψ*` as a p-norm atom.
pub fn dual_atom(func: &ScalarPH) -> Result<ScalarPH> {
    Ok(func.with_exponent(dual_exponent(func.exponent)?))
}

/// `Ψ*` with the block structure of `psi`.
pub fn dual_vector_ph(psi: &VectorPH) -> Result<VectorPH> {
    let mut out = psi.clone();
    for block in &mut out.blocks {
        block.func = dual_atom(&block.func)?;
    }
    Ok(out)
}

/// `ψ*(y)` in closed form.
pub fn eval_dual_ph(func: &ScalarPH, y: &[f64]) -> Result<f64> {
    check_len("ψ* argument", func.dim, y.len())?;
    Ok(pnorm(dual_exponent(func.exponent)?, y))
}

/// `Ψ*(y)`, one entry per block.
pub fn eval_vector_dual_ph(psi: &VectorPH, y: &DVector<f64>) -> Result<DVector<f64>> {
    eval_vector_ph(&dual_vector_ph(psi)?, y)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lowest index attaining `max_i |y_i|`.
pub fn argmax_abs(y: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in y.iter().enumerate() {
        if v.abs() > y[best].abs() {
            best = i;
        }
    }
    best
}

/// A maximizer `x̂` of `xᵀy` over the unit ball `{ψ(x) ≤ 1}`.
///
/// * `p ∈ (0, 1]`: `sign(y_{i0}) e_{i0}` with `i0` the lowest index of `max |y_i|`;
/// * `p ∈ (1, ∞)`: the Hölder equality point `sign(y_i)|y_i|^{q−1} / ‖y‖_q^{q−1}`;
/// * `p = ∞`: `sign(y)`.
///
/// Returns the zero vector for `y = 0`. The vector is also a subgradient of `ψ*` at
/// `y`.
pub fn dual_argmax(func: &ScalarPH, y: &[f64]) -> Result<Vec<f64>> {
    check_len("ψ* argument", func.dim, y.len())?;
    let mut x = vec![0.0; y.len()];
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(x);
    }
    match func.exponent {
        Exponent::Infinity => {
            for (xi, &yi) in x.iter_mut().zip(y) {
                *xi = sign(yi);
            }
        }
        Exponent::Finite(p) if p <= 1.0 => {
            if !(p > 0.0) {
                return Err(Error::InvalidExponent(p));
            }
            let i0 = argmax_abs(y);
            x[i0] = sign(y[i0]);
        }
        Exponent::Finite(p) => {
            if !p.is_finite() {
                return Err(Error::InvalidExponent(p));
            }
            let q = p / (p - 1.0);
            let t: Vec<f64> = y.iter().map(|v| v / scale).collect();
            let norm_q = pnorm(Exponent::Finite(q), &t);
            for (xi, &ti) in x.iter_mut().zip(&t) {
                *xi = sign(ti) * (ti.abs() / norm_q).powf(q - 1.0);
            }
        }
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Direct numerical lower estimate of `sup{xᵀy : ψ(x) ≤ 1}`.
///
/// Candidates are points `x/ψ(x)` on the unit ψ-sphere: all signed coordinate
/// vectors, `budget/2` Gaussian directions, and `budget/2` steps of a (1+1)
/// evolution strategy started from the best candidate. Nothing here uses the
/// closed-form dual, so it serves as an independent oracle for it.
pub fn oracle_dual_ph(func: &ScalarPH, y: &[f64], budget: usize, seed: u64) -> Result<f64> {
    check_len("ψ* argument", func.dim, y.len())?;
    if func.dim > ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "oracle dimension {} exceeds {ORACLE_MAX_DIM}",
            func.dim
        )));
    }
    let n = func.dim;
    let project = |x: &mut Vec<f64>| -> bool {
        let r = pnorm(func.exponent, x);
        if r > 0.0 && r.is_finite() {
            x.iter_mut().for_each(|v| *v /= r);
            true
        } else {
            false
        }
    };

    let mut best = vec![0.0; n];
    let mut best_val = 0.0;
    let consider = |x: &[f64], best: &mut Vec<f64>, best_val: &mut f64| {
        let v = dot(x, y);
        if v > *best_val {
            *best_val = v;
            best.copy_from_slice(x);
        }
    };

    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            if project(&mut e) {
                consider(&e, &mut best, &mut best_val);
            }
        }
    }

    let mut rng = sampling::rng(seed);
    let global = budget / 2;
    for _ in 0..global {
        let mut x: Vec<f64> = (0..n).map(|_| sampling::normal(&mut rng)).collect();
        if project(&mut x) {
            consider(&x, &mut best, &mut best_val);
        }
    }

    if best_val > 0.0 {
        let mut radius = 0.5;
        for _ in global..budget {
            let mut x: Vec<f64> = best
                .iter()
                .map(|v| v + radius * sampling::normal(&mut rng))
                .collect();
            let improved = project(&mut x) && dot(&x, y) > best_val;
            if improved {
                consider(&x, &mut best, &mut best_val);
                radius = (radius * 2.0).min(1.0);
            } else {
                radius = (radius * 0.84).max(1e-12);
            }
        }
    }
    Ok(best_val)
}

/// Outcome of [`check_ph_properties`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PHCheckReport {
    pub trials: usize,
    /// Largest `|ψ(λx) − λψ(x)| / (λψ(x))` observed.
    pub max_homogeneity_violation: f64,
    pub nonnegativity_ok: bool,
    /// `ψ(x) > 0` for every sampled `x ≠ 0`.
    pub positivity_ok: bool,
    pub worst_case_input: Vec<f64>,
    pub worst_case_scale: f64,
    /// `ψ(0)`; the first trial is always the origin.
    pub zero_value: f64,
}

/// Samples `(x, λ)` with heavy-tailed `x` and `λ ∈ [1e-6, 1e3]`, and checks
/// `ψ(λx) = λψ(x)`, `ψ ≥ 0`, and `ψ(x) > 0` for `x ≠ 0`.
pub fn check_ph_properties(func: &ScalarPH, trials: usize, seed: u64) -> Result<PHCheckReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut rng = sampling::rng(seed);
    let mut report = PHCheckReport {
        trials,
        max_homogeneity_violation: 0.0,
        nonnegativity_ok: true,
        positivity_ok: true,
        worst_case_input: vec![0.0; func.dim],
        worst_case_scale: 1.0,
        zero_value: 0.0,
    };
    for t in 0..trials {
        let x = if t == 0 {
            DVector::zeros(func.dim)
        } else {
            sampling::heavy_tailed(&mut rng, func.dim)
        };
        let lambda = if t == 0 {
            1.0
        } else {
            sampling::log_uniform(&mut rng, -6.0, 3.0)
        };
        let fx = eval_ph(func, x.as_slice())?;
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let fsx = eval_ph(func, &scaled)?;
        if t == 0 {
            report.zero_value = fx;
        }
        if fx < 0.0 || fsx < 0.0 {
            report.nonnegativity_ok = false;
        }
        let nonzero = x.iter().any(|&v| v != 0.0);
        if nonzero && fx <= 0.0 {
            report.positivity_ok = false;
        }
        let target = lambda * fx;
        let violation = (fsx - target).abs() / target.max(f64::MIN_POSITIVE);
        let violation = if target == 0.0 && fsx == 0.0 { 0.0 } else { violation };
        if violation > report.max_homogeneity_violation {
            report.max_homogeneity_violation = violation;
            report.worst_case_input = x.iter().copied().collect();
            report.worst_case_scale = lambda;
        }
    }
    Ok(report)
}

/// Draws a nonzero random direction; used by tests and suites.
pub fn random_direction(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| sampling::normal(rng)).collect();
        if x.iter().any(|&v| v != 0.0) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn atom(p: f64, dim: usize) -> ScalarPH {
        ScalarPH::pnorm(Exponent::Finite(p), dim)
    }

    fn inf(dim: usize) -> ScalarPH {
        ScalarPH::pnorm(Exponent::Infinity, dim)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_ph(&atom(2.0, 2), &[3.0, 4.0]).unwrap(), 5.0);
        // (|1|^{1/2} + |1|^{1/2})^2 computed independently.
        let direct = (1f64.sqrt() + 1f64.sqrt()).powi(2);
        assert_relative_eq!(eval_ph(&atom(0.5, 2), &[1.0, 1.0]).unwrap(), direct, max_relative = 1e-15);
        assert_eq!(eval_ph(&inf(2), &[-2.0, 1.0]).unwrap(), 2.0);
        assert!(eval_ph(&atom(2.0, 3), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn small_exponent_does_not_overflow() {
        // 1e300^(1/0.1) overflows without rescaling.
        let v = eval_ph(&atom(0.1, 2), &[1e300, 0.0]).unwrap();
        assert_relative_eq!(v, 1e300, max_relative = 1e-12);
        let v = eval_ph(&atom(0.1, 2), &[1e-300, 1e-300]).unwrap();
        assert_relative_eq!(v, 1e-300 * 2f64.powi(10), max_relative = 1e-12);
    }

    #[test]
    fn vector_eval() {
        use crate::model::Block;
        let psi = VectorPH::new(vec![
            Block::new(vec![0], Exponent::Finite(1.0)),
            Block::new(vec![1, 2], Exponent::Finite(2.0)),
        ]);
        let v = eval_vector_ph(&psi, &DVector::from_vec(vec![-3.0, 3.0, 4.0])).unwrap();
        assert_eq!(v.as_slice(), &[3.0, 5.0]);
        let z = eval_vector_ph(&psi, &DVector::zeros(3)).unwrap();
        assert_eq!(z.as_slice(), &[0.0, 0.0]);
        let single = VectorPH::new(vec![Block::new(vec![0, 1], Exponent::Infinity)]);
        let v = eval_vector_ph(&single, &DVector::from_vec(vec![1.0, -7.0])).unwrap();
        assert_eq!(v.as_slice(), &[7.0]);
    }

    #[test]
    fn dual_exponent_rule() {
        assert_eq!(dual_exponent(Exponent::Finite(2.0)).unwrap(), Exponent::Finite(2.0));
        assert_eq!(dual_exponent(Exponent::Finite(0.5)).unwrap(), Exponent::Infinity);
        assert_eq!(dual_exponent(Exponent::Finite(1.0)).unwrap(), Exponent::Infinity);
        assert_eq!(dual_exponent(Exponent::Infinity).unwrap(), Exponent::Finite(1.0));
        assert_eq!(dual_exponent(Exponent::Finite(3.0)).unwrap(), Exponent::Finite(1.5));
        assert!(dual_exponent(Exponent::Finite(0.0)).is_err());
        assert!(dual_exponent(Exponent::Finite(-2.0)).is_err());
    }

    #[test]
    fn dual_eval_examples() {
        assert_relative_eq!(eval_dual_ph(&atom(2.0, 2), &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(eval_dual_ph(&atom(0.5, 2), &[3.0, -4.0]).unwrap(), 4.0);
        for p in [0.5, 1.0, 2.0, 3.0] {
            assert_eq!(eval_dual_ph(&atom(p, 3), &[0.0; 3]).unwrap(), 0.0);
        }
    }

    #[test]
    fn argmax_examples() {
        let x = dual_argmax(&atom(0.5, 2), &[3.0, -4.0]).unwrap();
        assert_eq!(x, vec![0.0, -1.0]);
        assert_eq!(dot(&x, &[3.0, -4.0]), 4.0);

        let x = dual_argmax(&atom(2.0, 2), &[3.0, 4.0]).unwrap();
        assert_relative_eq!(x[0], 0.6, max_relative = 1e-14);
        assert_relative_eq!(x[1], 0.8, max_relative = 1e-14);
        assert_relative_eq!(pnorm(Exponent::Finite(2.0), &x), 1.0, max_relative = 1e-14);
        assert_relative_eq!(dot(&x, &[3.0, 4.0]), 5.0, max_relative = 1e-14);

        let y = [-2.0, 0.0, 1.0];
        let x = dual_argmax(&inf(3), &y).unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        assert_eq!(dot(&x, &y), 3.0);

        assert_eq!(dual_argmax(&atom(1.5, 2), &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn argmax_ties_pick_lowest_index() {
        let x = dual_argmax(&atom(1.0, 3), &[2.0, -2.0, 1.0]).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0]);
        let x = dual_argmax(&atom(0.3, 3), &[1.0, -3.0, 3.0]).unwrap();
        assert_eq!(x, vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn oracle_examples() {
        let v = oracle_dual_ph(&atom(1.0, 2), &[1.0, 1.0], 100_000, 1).unwrap();
        assert!((0.98..=1.0 + 1e-9).contains(&v), "{v}");
        let v = oracle_dual_ph(&atom(0.5, 2), &[3.0, -4.0], 100_000, 2).unwrap();
        assert!((0.98 * 4.0..=4.0 + 1e-9).contains(&v), "{v}");
        assert_eq!(oracle_dual_ph(&atom(2.0, 3), &[0.0; 3], 1000, 3).unwrap(), 0.0);
        assert!(oracle_dual_ph(&atom(2.0, 7), &[1.0; 7], 10, 0).is_err());
    }

    #[test]
    fn ph_checks() {
        let r = check_ph_properties(&atom(2.0, 3), 10_000, 11).unwrap();
        assert!(r.max_homogeneity_violation <= 1e-12, "{r:?}");
        assert!(r.nonnegativity_ok && r.positivity_ok);

        let r = check_ph_properties(&atom(0.5, 3), 10_000, 12).unwrap();
        assert!(r.max_homogeneity_violation <= 1e-9, "{r:?}");
        assert!(r.nonnegativity_ok && r.positivity_ok);

        let r = check_ph_properties(&inf(2), 1, 13).unwrap();
        assert_eq!(r.zero_value, 0.0);
        assert!(r.positivity_ok);
        assert!(check_ph_properties(&inf(2), 0, 13).is_err());
    }
}
