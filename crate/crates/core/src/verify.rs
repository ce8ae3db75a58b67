//! Numerical checks of the duality relations on small instances.
//!
//! Every suite is a deterministic function of its arguments and seed: instances are
//! drawn from per-index sub-seeds, evaluated in parallel, and collected in index
//! order. Reports serialize to JSON.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dual::{
    boundary_slack, build_dual, dual_objective, dual_residuals, lagrangian, omega, primal_residuals,
    tolerance_scale,
};
use crate::error::{Error, Result};
use crate::model::{DualProblem, Exponent, ExtendedValue, PHOProblem, VectorPH};
use crate::ph::{dual_argmax, eval_ph, eval_vector_dual_ph, eval_vector_ph};
use crate::sampling::{self, sub_seed, SeededRng};
use crate::solvers::{
    brute_force_primal, plant_feasible_instance, simplex_lp, solve_dual_subgradient, solve_subgradient,
    BruteForceMode, Certificate, ConvexProgram, PlantSpec, PlantedInstance, SolveResult, SolveStatus,
    SubgradientOptions,
};
use crate::transforms::{
    avo_dual, avo_split_lp, binary_to_avo, constrained_lasso_to_pho, dual_as_lp, gauge_to_pho,
    group_lasso_to_pho, simplify_dual, socp_dual_simplify, socp_to_pho, sum_norms_to_pho, AVOProblem,
    BinaryAvo, BinaryLp, ConstrainedLassoParams, Direction, GaugeTerm, GroupLassoParams, LinearRow, RowSense,
    Safeguard, SumNormsTerm,
};

/// Relative tolerance for weak duality, the Hölder inequalities and the
/// Lagrangian lower bound.
pub const EXACT_TOL: f64 = 1e-9;
/// Level the witness ray must push the Lagrangian below.
pub const DIVERGENCE_LEVEL: f64 = -1e6;
/// Absolute slack for feasible-set membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Relative agreement required between subgradient optimal values.
pub const VALUE_TOL: f64 = 1e-3;
/// Relative agreement required between simplex optimal values.
pub const LP_VALUE_TOL: f64 = 1e-8;
/// Primal points count as feasible at this multiple of `1 + max |rhs|`.
const PRIMAL_FEAS_TOL: f64 = 1e-12;
/// Dual points count as feasible at this multiple of `1 + max |β|`.
const DUAL_FEAS_TOL: f64 = 1e-11;

pub const SUITE_EXPONENTS: [Exponent; 4] = [
    Exponent::Finite(0.5),
    Exponent::Finite(1.0),
    Exponent::Finite(2.0),
    Exponent::Infinity,
];

fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    rand::Rng::random_range(rng, lo..hi)
}

fn index(rng: &mut SeededRng, lo: usize, hi_inclusive: usize) -> usize {
    rand::Rng::random_range(rng, lo..=hi_inclusive)
}

/// Contiguous blocks of size 1 to 3 covering `n` variables, exponents drawn from
/// [`SUITE_EXPONENTS`].
pub fn random_block_spec(rng: &mut SeededRng, n: usize) -> Vec<(usize, Exponent)> {
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let dim = index(rng, 1, left.min(3));
        blocks.push((dim, SUITE_EXPONENTS[index(rng, 0, SUITE_EXPONENTS.len() - 1)]));
        left -= dim;
    }
    blocks
}

/// The `index`-th planted instance of a suite. Every fifth instance has no
/// planted dual point.
pub fn suite_instance(index_: usize, max_n: usize, seed: u64) -> Result<PlantedInstance> {
    if max_n == 0 {
        return Err(Error::InvalidInput("max_n must be at least 1".into()));
    }
    let s = sub_seed(seed, index_ as u64);
    let mut rng = sampling::rng(s);
    let n = index(&mut rng, 1, max_n);
    let blocks = random_block_spec(&mut rng, n);
    let k = index(&mut rng, 0, 2.min(n - 1));
    let l = index(&mut rng, 1, 3);
    let slack = if index_.is_multiple_of(3) { 0.0 } else { 0.5 };
    plant_feasible_instance(&PlantSpec {
        blocks,
        k,
        l,
        seed: sub_seed(s, 1),
        scale: 1.0,
        slack,
        dual_margin: (index_ % 5 != 4).then_some(0.1),
    })
}

fn rhs_scale(prob: &PHOProblem) -> f64 {
    tolerance_scale(prob.eq_rhs.as_slice()).max(tolerance_scale(prob.ineq_rhs.as_slice()))
}

fn primal_feasible(prob: &PHOProblem, x: &DVector<f64>) -> Result<Option<f64>> {
    let r = primal_residuals(prob, x, PRIMAL_FEAS_TOL * rhs_scale(prob))?;
    Ok(r.feasible.then_some(r.objective))
}

fn dual_feasible(dual: &DualProblem, u: &DVector<f64>, v: &DVector<f64>) -> Result<Option<f64>> {
    let (_, beta) = crate::dual::alpha_beta(&dual.base, u, v)?;
    let r = dual_residuals(dual, u, v, DUAL_FEAS_TOL * tolerance_scale(beta.as_slice()))?;
    Ok(r.feasible.then_some(r.objective))
}

fn ext_max(values: impl IntoIterator<Item = f64>) -> ExtendedValue {
    values
        .into_iter()
        .fold(ExtendedValue::NegInf, |acc, v| match acc {
            ExtendedValue::Finite(a) if a >= v => acc,
            _ => ExtendedValue::Finite(v),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub instance: usize,
    pub seed: u64,
    pub n: usize,
    pub exponents: Vec<Exponent>,
    pub primal_at_x0: Option<f64>,
    pub primal_brute: Option<f64>,
    /// Smallest feasible primal value seen (an upper bound on the optimum).
    pub primal_best: ExtendedValue,
    pub dual_planted: Option<f64>,
    pub dual_solver: Option<f64>,
    /// Largest feasible dual value seen (a lower bound on the dual optimum).
    pub dual_best: ExtendedValue,
    pub gap: ExtendedValue,
    pub primal_points: usize,
    pub dual_points: usize,
    pub pairs_checked: usize,
    /// Smallest `(primal − dual) / scale` over all pairs.
    pub min_scaled_gap: Option<f64>,
    pub weak_duality_ok: bool,
}

/// Checks `cᵀx + dᵀΨ(x) ≥ bᵀu + pᵀv` on every pair of feasible points. The
/// tolerance is `1e-9 · (1 + max(|primal|, |dual|, ‖Ψ(x)‖₁))`, the last term
/// bounding how far the feasibility slack of `(u, v)` can move the gap.
pub fn duality_report(
    prob: &PHOProblem,
    primal_points: &[DVector<f64>],
    dual_points: &[(DVector<f64>, DVector<f64>)],
    instance: usize,
    seed: u64,
) -> Result<DualityReport> {
    let dual = build_dual(prob)?;
    let mut primal = Vec::new();
    for x in primal_points {
        if let Some(val) = primal_feasible(prob, x)? {
            let psi_sum = eval_vector_ph(&prob.psi, x)?.iter().sum::<f64>();
            primal.push((val, psi_sum));
        }
    }
    let mut duals = Vec::new();
    for (u, v) in dual_points {
        if let Some(val) = dual_feasible(&dual, u, v)? {
            duals.push(val);
        }
    }
    let mut min_scaled: Option<f64> = None;
    let mut ok = true;
    for &(pv, psi_sum) in &primal {
        for &dv in &duals {
            let scale = 1.0 + pv.abs().max(dv.abs()).max(psi_sum);
            let scaled = (pv - dv) / scale;
            ok &= scaled >= -EXACT_TOL;
            min_scaled = Some(min_scaled.map_or(scaled, |m: f64| m.min(scaled)));
        }
    }
    let primal_best = primal
        .iter()
        .map(|p| p.0)
        .fold(ExtendedValue::PosInf, |acc, v| match acc {
            ExtendedValue::Finite(a) if a <= v => acc,
            _ => ExtendedValue::Finite(v),
        });
    let dual_best = ext_max(duals.iter().copied());
    let gap = match (primal_best, dual_best) {
        (ExtendedValue::Finite(p), ExtendedValue::Finite(d)) => ExtendedValue::Finite(p - d),
        _ => ExtendedValue::PosInf,
    };
    Ok(DualityReport {
        instance,
        seed,
        n: prob.n,
        exponents: prob.psi.blocks.iter().map(|b| b.func.exponent).collect(),
        primal_at_x0: None,
        primal_brute: None,
        primal_best,
        dual_planted: None,
        dual_solver: None,
        dual_best,
        gap,
        primal_points: primal.len(),
        dual_points: duals.len(),
        pairs_checked: primal.len() * duals.len(),
        min_scaled_gap: min_scaled,
        weak_duality_ok: ok,
    })
}

/// Iteration budget of the subgradient solves inside the suites.
pub const SUITE_SUBGRADIENT_ITERS: usize = 20_000;

fn weak_duality_instance(i: usize, max_n: usize, seed: u64) -> Result<DualityReport> {
    let inst = suite_instance(i, max_n, seed)?;
    let prob = &inst.problem;
    let mut rng = sampling::rng(sub_seed(sub_seed(seed, i as u64), 2));

    let mut primal_points = vec![inst.x0.clone()];
    if prob.k() == 0 {
        for _ in 0..200 {
            let r = sampling::log_uniform(&mut rng, -3.0, 1.0);
            primal_points.push(&inst.x0 + sampling::normal_vector(&mut rng, prob.n) * r);
        }
    }
    let brute = if prob.psi.all_singletons() {
        Some(brute_force_primal(prob, -1e3, 1e3, BruteForceMode::SignPattern, 1e-9)?)
    } else if prob.k() == 0 && prob.n <= 3 {
        Some(brute_force_primal(prob, -4.0, 4.0, BruteForceMode::Grid { resolution: 0.5 }, 0.0)?)
    } else {
        None
    };
    let brute_value = brute.as_ref().filter(|r| r.is_optimal()).map(|r| r.value);
    if let Some(r) = brute.as_ref().filter(|r| r.is_optimal()) {
        primal_points.push(r.point_vector());
    }

    let dual = build_dual(prob)?;
    let (k, l) = (prob.k(), prob.l());
    let mut dual_points = vec![(DVector::zeros(k), DVector::zeros(l))];
    if let Some(dp) = &inst.dual_point {
        dual_points.push(dp.clone());
    }
    let solved = solve_dual_subgradient(&dual, &SubgradientOptions::with_max_iter(SUITE_SUBGRADIENT_ITERS))?;
    let solver_value = solved.is_optimal().then_some(solved.value);
    if solved.is_optimal() {
        let z = solved.point_vector();
        dual_points.push((z.rows(0, k).into_owned(), z.rows(k, l).into_owned()));
    }

    let mut report = duality_report(prob, &primal_points, &dual_points, i, seed)?;
    report.primal_at_x0 = primal_feasible(prob, &inst.x0)?;
    report.primal_brute = brute_value;
    report.dual_planted = match &inst.dual_point {
        Some((u, v)) => Some(dual_objective(prob, u, v)?),
        None => None,
    };
    report.dual_solver = solver_value;
    Ok(report)
}

/// Weak duality on `num_instances` planted instances with `n ≤ max_n` and mixed
/// exponents. Primal points: the planted point, random feasible perturbations of
/// it and the brute-force optimum when available. Dual points: the origin, the
/// planted dual point and the subgradient solution, each kept only if feasible.
pub fn weak_duality_suite(num_instances: usize, max_n: usize, seed: u64) -> Result<Vec<DualityReport>> {
    (0..num_instances)
        .into_par_iter()
        .map(|i| weak_duality_instance(i, max_n, seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Report {
    pub exponents: Vec<Exponent>,
    pub trials: usize,
    pub seed: u64,
    /// Samples with some `ψ*_i(y) < 0`.
    pub nonnegativity_violations: usize,
    /// Samples with `Ψ(x)ᵀΨ*(y) < xᵀy` beyond tolerance.
    pub holder_violations: usize,
    /// Samples where some block has `ψ_i(x)ψ*_i(y) < x_{I_i}ᵀy_{I_i}` beyond tolerance.
    pub block_violations: usize,
    /// Smallest `(Ψ(x)ᵀΨ*(y) − xᵀy) / scale`.
    pub worst_margin: f64,
    pub worst_x: Vec<f64>,
    pub worst_y: Vec<f64>,
    /// Margins at `x = 0` and at `y = 0`.
    pub zero_x_margin: f64,
    pub zero_y_margin: f64,
    /// Largest `|Ψ(x)ᵀΨ*(y) − xᵀy| / scale` over pairs built to attain equality.
    pub equality_case_gap: f64,
    pub ok: bool,
}

struct Prop1Chunk {
    nonneg: usize,
    holder: usize,
    block: usize,
    worst: (f64, Vec<f64>, Vec<f64>),
}

fn prop1_margin(psi: &VectorPH, x: &DVector<f64>, y: &DVector<f64>) -> Result<(f64, bool, bool, bool)> {
    let px = eval_vector_ph(psi, x)?;
    let py = eval_vector_dual_ph(psi, y)?;
    let nonneg = py.iter().all(|&v| v >= 0.0);
    let mut block_ok = true;
    for (i, b) in psi.blocks.iter().enumerate() {
        let xb = b.gather(x);
        let yb = b.gather(y);
        let lhs = px[i] * py[i];
        let rhs = xb.dot(&yb);
        let scale = 1.0 + lhs.abs() + xb.iter().zip(yb.iter()).map(|(a, c)| (a * c).abs()).sum::<f64>();
        block_ok &= lhs - rhs >= -EXACT_TOL * scale;
    }
    let lhs = px.dot(&py);
    let rhs = x.dot(y);
    let scale = 1.0 + lhs.abs() + x.iter().zip(y.iter()).map(|(a, c)| (a * c).abs()).sum::<f64>();
    let margin = (lhs - rhs) / scale;
    Ok((margin, nonneg, margin >= -EXACT_TOL, block_ok))
}

const PROP1_CHUNKS: usize = 16;

/// `Ψ*(y) ≥ 0` and `Ψ(x)ᵀΨ*(y) ≥ xᵀy` on `trials` heavy-tailed pairs, plus the
/// cases `x = 0`, `y = 0` and pairs `x = t · argmax` that attain equality.
pub fn prop1_suite(psi: &VectorPH, trials: usize, seed: u64) -> Result<Prop1Report> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut violations = Vec::new();
    crate::model::validate_blocks(psi, psi.n(), &mut violations);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidInput(v.to_string()));
    }
    let n = psi.n();
    let chunks: Vec<Prop1Chunk> = (0..PROP1_CHUNKS)
        .into_par_iter()
        .map(|c| -> Result<Prop1Chunk> {
            let count = trials / PROP1_CHUNKS + usize::from(c < trials % PROP1_CHUNKS);
            let mut rng = sampling::rng(sub_seed(seed, c as u64));
            let mut out = Prop1Chunk {
                nonneg: 0,
                holder: 0,
                block: 0,
                worst: (f64::INFINITY, vec![], vec![]),
            };
            for t in 0..count {
                let x = sampling::heavy_tailed(&mut rng, n);
                let y = if t % 2 == 0 {
                    sampling::heavy_tailed(&mut rng, n)
                } else {
                    sampling::normal_vector(&mut rng, n)
                };
                let (margin, nonneg, holder, block) = prop1_margin(psi, &x, &y)?;
                out.nonneg += usize::from(!nonneg);
                out.holder += usize::from(!holder);
                out.block += usize::from(!block);
                if margin < out.worst.0 {
                    out.worst = (margin, x.iter().copied().collect(), y.iter().copied().collect());
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rng = sampling::rng(sub_seed(seed, PROP1_CHUNKS as u64));
    let probe = sampling::normal_vector(&mut rng, n);
    let zero = DVector::zeros(n);
    let zero_x = prop1_margin(psi, &zero, &probe)?;
    let zero_y = prop1_margin(psi, &probe, &zero)?;

    let mut equality_case_gap = 0.0f64;
    for _ in 0..100 {
        let y = sampling::normal_vector(&mut rng, n);
        let mut x = DVector::zeros(n);
        for b in &psi.blocks {
            let t = sampling::log_uniform(&mut rng, -2.0, 2.0);
            let xhat = dual_argmax(&b.func, b.gather(&y).as_slice())?;
            for (&j, v) in b.indices.iter().zip(xhat) {
                x[j] = t * v;
            }
        }
        equality_case_gap = equality_case_gap.max(prop1_margin(psi, &x, &y)?.0.abs());
    }

    let mut report = Prop1Report {
        exponents: psi.blocks.iter().map(|b| b.func.exponent).collect(),
        trials,
        seed,
        nonnegativity_violations: 0,
        holder_violations: 0,
        block_violations: 0,
        worst_margin: f64::INFINITY,
        worst_x: vec![],
        worst_y: vec![],
        zero_x_margin: zero_x.0,
        zero_y_margin: zero_y.0,
        equality_case_gap,
        ok: false,
    };
    for c in chunks {
        report.nonnegativity_violations += c.nonneg;
        report.holder_violations += c.holder;
        report.block_violations += c.block;
        if c.worst.0 < report.worst_margin {
            report.worst_margin = c.worst.0;
            report.worst_x = c.worst.1;
            report.worst_y = c.worst.2;
        }
    }
    report.ok = report.nonnegativity_violations == 0
        && report.holder_violations == 0
        && report.block_violations == 0
        && zero_x.1
        && zero_x.2
        && zero_y.2
        && equality_case_gap <= EXACT_TOL;
    Ok(report)
}

/// Block configurations exercised by the default Hölder-inequality suite.
pub fn prop1_configurations() -> Vec<VectorPH> {
    let e = SUITE_EXPONENTS;
    vec![
        VectorPH::contiguous(&[(1, e[0]), (2, e[1]), (3, e[2]), (2, e[3])]),
        VectorPH::contiguous(&[(4, e[0])]),
        VectorPH::contiguous(&[(3, e[2]), (3, e[3])]),
        VectorPH::contiguous(&[(2, Exponent::Finite(0.7)), (2, Exponent::Finite(1.5)), (2, Exponent::Finite(3.0))]),
        VectorPH::abs(5),
    ]
}

/// Magnitude of the terms of `L(x, u, v)` in its defining form, used to scale
/// rounding tolerances.
struct LagrangianScale {
    base: f64,
    per_x: DVector<f64>,
    per_psi: DVector<f64>,
}

impl LagrangianScale {
    fn new(prob: &PHOProblem, u: &DVector<f64>, v: &DVector<f64>) -> Self {
        let (au, av) = (u.abs(), v.abs());
        LagrangianScale {
            base: 1.0 + prob.eq_rhs.abs().dot(&au) + prob.ineq_rhs.abs().dot(&av),
            per_x: prob.c.abs() + prob.eq_lin.abs().tr_mul(&au) + prob.ineq_lin.abs().tr_mul(&av),
            per_psi: prob.d.abs() + prob.eq_psi.abs().tr_mul(&au) + prob.ineq_psi.abs().tr_mul(&av),
        }
    }

    fn at(&self, x: &DVector<f64>, psi_x: &DVector<f64>) -> f64 {
        self.base + x.abs().dot(&self.per_x) + psi_x.abs().dot(&self.per_psi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub block: usize,
    pub slope_bound: f64,
    pub gamma: f64,
    pub psi_xhat: f64,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
    pub ray_norms: Vec<f64>,
    /// `L` strictly decreasing for `λ ≥ 10`.
    pub decreasing: bool,
    /// `L(ᾱ(λ)) ≤ γ + λψ(x̂)(β − ψ*)` up to rounding at every `λ`.
    pub below_bound: bool,
    /// `‖ᾱ(λ)‖∞` nondecreasing and at least `λ‖x̂‖∞` at the last `λ`.
    pub grows: bool,
    /// Coordinates outside the violating block never move.
    pub only_block_moves: bool,
    pub divergence_lambda: f64,
    pub divergence_value: f64,
    /// `L ≤ −10⁶` at `divergence_lambda`.
    pub diverges: bool,
    pub ok: bool,
}

pub const LEMMA1_LAMBDAS: [f64; 7] = [1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6];

/// Follows the witness ray of `ω(u, v) = −∞`. Errors when `ω` is finite.
pub fn lemma1_witness_check(prob: &PHOProblem, u: &DVector<f64>, v: &DVector<f64>) -> Result<Lemma1Report> {
    let om = omega(prob, u, v)?;
    let Some(w) = om.witness else {
        return Err(Error::InvalidInput("ω(u, v) is finite; there is no divergence witness".into()));
    };
    let scale = LagrangianScale::new(prob, u, v);
    let base = DVector::from_column_slice(&w.alpha);
    let mut values = Vec::new();
    let mut bounds = Vec::new();
    let mut norms = Vec::new();
    let mut below_bound = true;
    let mut only_block_moves = true;
    for &lambda in &LEMMA1_LAMBDAS {
        let x = w.ray(lambda);
        let psi_x = eval_vector_ph(&prob.psi, &x)?;
        let val = lagrangian(prob, &x, u, v)?;
        let bound = w.bound(lambda);
        below_bound &= val <= bound + EXACT_TOL * scale.at(&x, &psi_x);
        for j in 0..prob.n {
            if !w.block_indices.contains(&j) {
                only_block_moves &= x[j] == base[j];
            }
        }
        values.push(val);
        bounds.push(bound);
        norms.push(x.amax());
    }
    let decreasing = values[1..].windows(2).all(|p| p[1] < p[0]);
    let xhat_norm = w.xhat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let last = LEMMA1_LAMBDAS.len() - 1;
    let grows = norms[1..].windows(2).all(|p| p[1] >= p[0]) && norms[last] >= LEMMA1_LAMBDAS[last] * xhat_norm;
    let divergence_lambda = 2.0 * w.lambda_reaching(DIVERGENCE_LEVEL) + 1.0;
    let divergence_value = lagrangian(prob, &w.ray(divergence_lambda), u, v)?;
    let diverges = divergence_value <= DIVERGENCE_LEVEL;
    Ok(Lemma1Report {
        block: w.block,
        slope_bound: w.slope_bound,
        gamma: w.gamma,
        psi_xhat: w.psi_xhat,
        lambdas: LEMMA1_LAMBDAS.to_vec(),
        values,
        bounds,
        ray_norms: norms,
        decreasing,
        below_bound,
        grows,
        only_block_moves,
        divergence_lambda,
        divergence_value,
        diverges,
        ok: decreasing && below_bound && grows && only_block_moves && diverges,
    })
}

/// Multiplier points around the planted dual point (or the origin): the center
/// itself, then perturbations with radii log-uniform in `[10⁻², 10]` and `v`
/// reflected into `v ≥ 0`.
pub fn multiplier_points(inst: &PlantedInstance, count: usize, seed: u64) -> Vec<(DVector<f64>, DVector<f64>)> {
    let (k, l) = (inst.problem.k(), inst.problem.l());
    let (u0, v0) = inst
        .dual_point
        .clone()
        .unwrap_or_else(|| (DVector::zeros(k), DVector::zeros(l)));
    let mut rng = sampling::rng(seed);
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push((u0.clone(), v0.clone()));
    }
    let center = 1.0 + u0.amax().max(v0.amax());
    while out.len() < count {
        let r = sampling::log_uniform(&mut rng, -2.0, 1.0) * center;
        let u = &u0 + sampling::normal_vector(&mut rng, k) * r;
        let v = (&v0 + sampling::normal_vector(&mut rng, l) * r).abs();
        out.push((u, v));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub block: usize,
    pub lambda: f64,
    pub value: f64,
    pub diverges: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Point {
    pub index: usize,
    pub omega: ExtendedValue,
    pub dual_value: f64,
    /// `max_i ψ*_i(α_{I_i}) − β_i`.
    pub max_excess: f64,
    /// Dual residual test (no slack) agrees with the classification of `ω`, up to
    /// the boundary band.
    pub classification_consistent: bool,
    pub min_sampled_l: Option<f64>,
    /// Smallest `(L(x) − bᵀu − pᵀv) / scale` over the samples.
    pub min_scaled_margin: Option<f64>,
    pub samples_below: usize,
    /// `L(0, u, v) == bᵀu + pᵀv` exactly.
    pub l_at_zero_exact: Option<bool>,
    pub witness: Option<WitnessSummary>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub instance: usize,
    pub seed: u64,
    pub x_samples: usize,
    pub points: Vec<Theorem2Point>,
    pub finite_points: usize,
    pub neg_inf_points: usize,
    /// `max ω` over the points.
    pub sup_omega: ExtendedValue,
    /// `max bᵀu + pᵀv` over the dual-feasible points.
    pub sup_dual_objective: ExtendedValue,
    pub values_agree: bool,
    pub ok: bool,
}

/// Compares `ω(u, v)` with direct minimization of `L(·, u, v)` over `x = 0` and
/// `x_samples − 1` heavy-tailed samples at every point, and follows the witness
/// ray on the `−∞` branch.
pub fn theorem2_check(
    prob: &PHOProblem,
    points: &[(DVector<f64>, DVector<f64>)],
    x_samples: usize,
    seed: u64,
) -> Result<Theorem2Report> {
    let dual = build_dual(prob)?;
    let mut rng = sampling::rng(seed);
    let xs: Vec<DVector<f64>> = (0..x_samples.max(1))
        .map(|t| {
            if t == 0 {
                DVector::zeros(prob.n)
            } else {
                sampling::heavy_tailed(&mut rng, prob.n)
            }
        })
        .collect();
    let psi_xs: Vec<DVector<f64>> = xs.iter().map(|x| eval_vector_ph(&prob.psi, x)).collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(points.len());
    for (idx, (u, v)) in points.iter().enumerate() {
        let om = omega(prob, u, v)?;
        let dv = dual_objective(prob, u, v)?;
        let (max_excess, in_band) = om
            .dual_values
            .iter()
            .zip(&om.beta)
            .map(|(s, b)| (s - b, s - b > 0.0 && s - b <= boundary_slack(*b)))
            .fold((f64::NEG_INFINITY, false), |(m, band), (e, ib)| (m.max(e), band || ib));
        let strict_feasible = dual_residuals(&dual, u, v, 0.0)?.feasible;
        let classification_consistent = strict_feasible == om.value.is_finite() || in_band;
        let mut point = Theorem2Point {
            index: idx,
            omega: om.value,
            dual_value: dv,
            max_excess,
            classification_consistent,
            min_sampled_l: None,
            min_scaled_margin: None,
            samples_below: 0,
            l_at_zero_exact: None,
            witness: None,
            ok: false,
        };
        match om.value {
            ExtendedValue::Finite(w) => {
                let scale = LagrangianScale::new(prob, u, v);
                let mut min_l = f64::INFINITY;
                let mut min_margin = f64::INFINITY;
                for (x, px) in xs.iter().zip(&psi_xs) {
                    let l = lagrangian(prob, x, u, v)?;
                    let margin = (l - w) / scale.at(x, px);
                    min_l = min_l.min(l);
                    min_margin = min_margin.min(margin);
                    point.samples_below += usize::from(margin < -EXACT_TOL);
                }
                let at_zero = lagrangian(prob, &DVector::zeros(prob.n), u, v)? == dv;
                point.min_sampled_l = Some(min_l);
                point.min_scaled_margin = Some(min_margin);
                point.l_at_zero_exact = Some(at_zero);
                point.ok = point.samples_below == 0 && at_zero && w == dv && classification_consistent;
            }
            _ => {
                let r = lemma1_witness_check(prob, u, v)?;
                point.ok = r.diverges && classification_consistent;
                point.witness = Some(WitnessSummary {
                    block: r.block,
                    lambda: r.divergence_lambda,
                    value: r.divergence_value,
                    diverges: r.diverges,
                });
            }
        }
        out.push(point);
    }
    let sup_omega = ext_max(out.iter().filter_map(|p| p.omega.finite()));
    let mut feasible_values = Vec::new();
    for ((u, v), p) in points.iter().zip(&out) {
        let (_, beta) = crate::dual::alpha_beta(prob, u, v)?;
        let slack = beta.iter().fold(0.0f64, |m, b| m.max(boundary_slack(*b)));
        if dual_residuals(&dual, u, v, slack)?.feasible {
            feasible_values.push(p.dual_value);
        }
    }
    let sup_dual_objective = ext_max(feasible_values);
    let values_agree = sup_omega == sup_dual_objective;
    let finite_points = out.iter().filter(|p| p.omega.is_finite()).count();
    let ok = values_agree && out.iter().all(|p| p.ok);
    Ok(Theorem2Report {
        instance: 0,
        seed,
        x_samples: xs.len(),
        neg_inf_points: out.len() - finite_points,
        finite_points,
        points: out,
        sup_omega,
        sup_dual_objective,
        values_agree,
        ok,
    })
}

/// [`theorem2_check`] on planted instances with `points` multiplier points each.
pub fn theorem2_suite(num_instances: usize, points: usize, x_samples: usize, seed: u64) -> Result<Vec<Theorem2Report>> {
    (0..num_instances)
        .into_par_iter()
        .map(|i| {
            let inst = suite_instance(i, 6, seed)?;
            let s = sub_seed(seed, i as u64);
            let pts = multiplier_points(&inst, points, sub_seed(s, 3));
            let mut r = theorem2_check(&inst.problem, &pts, x_samples, sub_seed(s, 4))?;
            r.instance = i;
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Outcome {
    pub instance: usize,
    /// `None` when no probed multiplier point has `ω = −∞`.
    pub report: Option<Lemma1Report>,
}

/// [`lemma1_witness_check`] on the first multiplier point with `ω = −∞` of each
/// planted instance. Probes the usual multiplier points first, then rays of
/// radius up to `10⁸` around the center.
pub fn lemma1_suite(num_instances: usize, seed: u64) -> Result<Vec<Lemma1Outcome>> {
    (0..num_instances)
        .into_par_iter()
        .map(|i| {
            let inst = suite_instance(i, 6, seed)?;
            let prob = &inst.problem;
            let s = sub_seed(seed, i as u64);
            let mut pts = multiplier_points(&inst, 200, sub_seed(s, 5));
            let (u0, v0) = pts[0].clone();
            let mut rng = sampling::rng(sub_seed(s, 6));
            for e in 2..=8 {
                for _ in 0..20 {
                    let r = 10f64.powi(e);
                    let u = &u0 + sampling::normal_vector(&mut rng, prob.k()) * r;
                    let v = (&v0 + sampling::normal_vector(&mut rng, prob.l()) * r).abs();
                    pts.push((u, v));
                }
            }
            for (u, v) in &pts {
                if !omega(prob, u, v)?.value.is_finite() {
                    return Ok(Lemma1Outcome {
                        instance: i,
                        report: Some(lemma1_witness_check(prob, u, v)?),
                    });
                }
            }
            Ok(Lemma1Outcome { instance: i, report: None })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvoReport {
    pub instance: usize,
    pub seed: u64,
    pub n: usize,
    pub rows: usize,
    pub split_status: SolveStatus,
    pub split_value: f64,
    pub split_dual_value: f64,
    pub dual_status: SolveStatus,
    pub dual_value: f64,
    pub brute_status: SolveStatus,
    pub brute_value: f64,
    /// `|split − (D_a)| / (1 + max |value|)`.
    pub lp_value_gap: f64,
    pub lp_values_agree: bool,
    /// `(D_a) ≤ brute-force primal` up to tolerance.
    pub weak_duality_ok: bool,
    /// Observed `primal − dual`; zero means no duality gap on this instance.
    pub observed_gap: f64,
    pub ok: bool,
}

/// A random inequality-form absolute value problem with a planted feasible `x₀`
/// and a planted `u₀ ≥ 0` feasible for `|Aᵀu − c| + Bᵀu ≤ 0`, so that the split
/// relaxation is bounded.
pub fn random_avo(n: usize, rows: usize, seed: u64) -> AVOProblem {
    let mut rng = sampling::rng(seed);
    let a = sampling::normal_matrix(&mut rng, rows, n);
    let mut b_abs = sampling::normal_matrix(&mut rng, rows, n);
    let x0 = sampling::normal_vector(&mut rng, n);
    let u0 = sampling::normal_vector(&mut rng, rows).map(|v| v.abs() + 0.1);
    let w = sampling::normal_vector(&mut rng, n) * 0.5;
    let uu = u0.norm_squared();
    for j in 0..n {
        let excess = b_abs.column(j).dot(&u0) + w[j].abs() + 0.05;
        if excess > 0.0 {
            let col = b_abs.column(j) - &u0 * (excess / uu);
            b_abs.set_column(j, &col);
        }
    }
    let c = a.tr_mul(&u0) + w;
    let slack = DVector::from_fn(rows, |_, _| uniform(&mut rng, 0.0, 0.5));
    let b = &a * &x0 + &b_abs * x0.abs() - slack;
    AVOProblem::inequality_form(c, a, b_abs, b)
}

fn avo_report(avo: &AVOProblem, instance: usize, seed: u64) -> Result<AvoReport> {
    let split = simplex_lp(&avo_split_lp(avo)?, 1e-9)?;
    let split_dual_value = match &split.certificate {
        Some(Certificate::Basis { dual_value, .. }) => *dual_value,
        _ => f64::NAN,
    };
    let dual = simplex_lp(&avo_dual(avo)?.split_form(), 1e-9)?;
    let brute = brute_force_primal(&avo.to_pho(), f64::NEG_INFINITY, f64::INFINITY, BruteForceMode::SignPattern, 1e-9)?;
    let scale = 1.0 + split.value.abs().max(dual.value.abs());
    let lp_value_gap = (split.value - dual.value).abs() / scale;
    let lp_values_agree = split.is_optimal() && dual.is_optimal() && lp_value_gap <= LP_VALUE_TOL;
    let weak_scale = 1.0 + dual.value.abs().max(brute.value.abs());
    let weak_duality_ok = brute.is_optimal() && dual.is_optimal() && dual.value <= brute.value + LP_VALUE_TOL * weak_scale;
    Ok(AvoReport {
        instance,
        seed,
        n: avo.n(),
        rows: avo.ineq_rhs.len(),
        split_status: split.status,
        split_value: split.value,
        split_dual_value,
        dual_status: dual.status,
        dual_value: dual.value,
        brute_status: brute.status,
        brute_value: brute.value,
        lp_value_gap,
        lp_values_agree,
        weak_duality_ok,
        observed_gap: brute.value - dual.value,
        ok: lp_values_agree && weak_duality_ok,
    })
}

/// Split relaxation, closed-form dual and sign-pattern primal on random
/// absolute value problems with `n ≤ max_n`.
pub fn avo_suite(num_instances: usize, max_n: usize, seed: u64) -> Result<Vec<AvoReport>> {
    if max_n == 0 {
        return Err(Error::InvalidInput("max_n must be at least 1".into()));
    }
    (0..num_instances)
        .into_par_iter()
        .map(|i| {
            let s = sub_seed(seed, i as u64);
            let mut rng = sampling::rng(s);
            let n = index(&mut rng, 1, max_n);
            let rows = index(&mut rng, 1, n + 2);
            avo_report(&random_avo(n, rows, sub_seed(s, 1)), i, seed)
        })
        .collect()
}

/// The one-variable instance `min x s.t. x − 0.5|x| ≥ 1`.
pub fn one_var_avo() -> AVOProblem {
    AVOProblem::inequality_form(
        DVector::from_vec(vec![1.0]),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, -0.5),
        DVector::from_vec(vec![1.0]),
    )
}

pub fn one_var_avo_report() -> Result<AvoReport> {
    avo_report(&one_var_avo(), 0, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryReport {
    pub instance: usize,
    pub seed: u64,
    pub n: usize,
    pub rows: usize,
    pub binary_feasible: usize,
    /// Every feasible binary point maps to a feasible AVO point and back.
    pub round_trip_ok: bool,
    /// Objective values agree exactly after the round trip.
    pub objective_exact: bool,
    /// Infeasible binary points map to infeasible AVO points.
    pub infeasible_preserved: bool,
    pub dual_is_lp: bool,
    pub ok: bool,
}

/// A binary program with integer data in `[−3, 3]`.
pub fn random_binary_lp(n: usize, seed: u64) -> BinaryLp {
    let mut rng = sampling::rng(seed);
    let int = |rng: &mut SeededRng| index(rng, 0, 6) as f64 - 3.0;
    let rows = index(&mut rng, 1, 3);
    let constraints = (0..rows)
        .map(|_| {
            let coeffs: Vec<f64> = (0..n).map(|_| int(&mut rng)).collect();
            let sense = [RowSense::Le, RowSense::Ge, RowSense::Eq][index(&mut rng, 0, 2)];
            let rhs = int(&mut rng);
            LinearRow { coeffs, sense, rhs }
        })
        .collect();
    let direction = if index(&mut rng, 0, 1) == 0 {
        Direction::Minimize
    } else {
        Direction::Maximize
    };
    BinaryLp {
        direction,
        objective: (0..n).map(|_| int(&mut rng)).collect(),
        constraints,
    }
}

pub fn binary_report(lp: &BinaryLp, instance: usize, seed: u64) -> Result<BinaryReport> {
    let n = lp.objective.len();
    let enc = binary_to_avo(lp)?;
    let prob = enc.avo.to_pho();
    let mut feasible = 0;
    let (mut round_trip, mut exact, mut preserved) = (true, true, true);
    for bits in 0..(1usize << n) {
        let x: Vec<f64> = (0..n).map(|j| (bits >> j & 1) as f64).collect();
        let xp = BinaryAvo::encode(&x);
        let avo_ok = primal_residuals(&prob, &xp, 0.0)?.feasible;
        if lp.is_feasible(&x, 0.0) {
            feasible += 1;
            round_trip &= avo_ok && BinaryAvo::recover(&xp) == x;
            exact &= enc.original_objective(&xp) == lp.objective_value(&x);
        } else {
            preserved &= !avo_ok;
        }
    }
    let dual = build_dual(&prob)?;
    let dual_is_lp = dual.is_linear_program() && dual_as_lp(&dual).is_ok();
    Ok(BinaryReport {
        instance,
        seed,
        n,
        rows: lp.constraints.len(),
        binary_feasible: feasible,
        round_trip_ok: round_trip,
        objective_exact: exact,
        infeasible_preserved: preserved,
        dual_is_lp,
        ok: round_trip && exact && preserved && dual_is_lp,
    })
}

pub fn binary_suite(num_instances: usize, max_n: usize, seed: u64) -> Result<Vec<BinaryReport>> {
    if max_n == 0 {
        return Err(Error::InvalidInput("max_n must be at least 1".into()));
    }
    (0..num_instances)
        .into_par_iter()
        .map(|i| {
            let s = sub_seed(seed, i as u64);
            let mut rng = sampling::rng(s);
            let n = index(&mut rng, 1, max_n);
            binary_report(&random_binary_lp(n, sub_seed(s, 1)), i, seed)
        })
        .collect()
}

// Transcriptions of the displayed duals of the five examples, written directly
// from their formulas and sharing no code with the mechanical dual.

fn literal_q(p: Exponent) -> Option<f64> {
    match p {
        Exponent::Infinity => Some(1.0),
        Exponent::Finite(p) if p > 1.0 => Some(p / (p - 1.0)),
        Exponent::Finite(_) => None,
    }
}

/// `‖w‖_q` (`q = None` is the ∞-norm) and a subgradient.
fn norm_with_grad(q: Option<f64>, w: &[f64]) -> (f64, Vec<f64>) {
    let mut g = vec![0.0; w.len()];
    match q {
        None => {
            let mut best = 0;
            for (i, v) in w.iter().enumerate() {
                if v.abs() > w[best].abs() {
                    best = i;
                }
            }
            let val = w.get(best).map_or(0.0, |v| v.abs());
            if val > 0.0 {
                g[best] = w[best].signum();
            }
            (val, g)
        }
        Some(1.0) => {
            for (gi, v) in g.iter_mut().zip(w) {
                *gi = if *v == 0.0 { 0.0 } else { v.signum() };
            }
            (w.iter().map(|v| v.abs()).sum(), g)
        }
        Some(q) => {
            let m = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m == 0.0 {
                return (0.0, g);
            }
            let s: f64 = w.iter().map(|v| (v.abs() / m).powf(q)).sum();
            let val = m * s.powf(1.0 / q);
            for (gi, v) in g.iter_mut().zip(w) {
                *gi = v.signum() * (v.abs() / val).powf(q - 1.0);
                if *v == 0.0 {
                    *gi = 0.0;
                }
            }
            (val, g)
        }
    }
}

/// One constraint `‖M z + r‖_q + aᵀz ≤ rhs` of a transcribed dual.
struct NormRow {
    q: Option<f64>,
    m: DMatrix<f64>,
    r: DVector<f64>,
    a: DVector<f64>,
    rhs: f64,
}

impl NormRow {
    fn eval(&self, z: &DVector<f64>) -> (f64, DVector<f64>) {
        let w = &self.m * z + &self.r;
        let (val, g) = norm_with_grad(self.q, w.as_slice());
        let grad = self.m.tr_mul(&DVector::from_vec(g)) + &self.a;
        (val + self.a.dot(z) - self.rhs, grad)
    }
}

struct LiteralDual {
    objective: DVector<f64>,
    rows: Vec<NormRow>,
    nonneg: Vec<usize>,
    equalities: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl ConvexProgram for LiteralDual {
    fn dim(&self) -> usize {
        self.objective.len()
    }

    fn objective(&self) -> DVector<f64> {
        self.objective.clone()
    }

    fn constraints(&self, z: &DVector<f64>) -> Vec<f64> {
        self.rows.iter().map(|r| r.eval(z).0).collect()
    }

    fn subgradient(&self, i: usize, z: &DVector<f64>) -> DVector<f64> {
        self.rows[i].eval(z).1
    }

    fn nonnegative(&self) -> Vec<usize> {
        self.nonneg.clone()
    }

    fn equalities(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        self.equalities.clone()
    }
}

impl LiteralDual {
    fn member(&self, z: &DVector<f64>) -> bool {
        self.rows.iter().all(|r| r.eval(z).0 <= MEMBERSHIP_TOL)
            && self.nonneg.iter().all(|&j| z[j] >= 0.0)
            && self
                .equalities
                .as_ref()
                .is_none_or(|(e, rhs)| (e * z - rhs).amax() <= MEMBERSHIP_TOL)
    }
}

/// Selects columns `offset..offset+len` of a `dim`-column row space.
fn picker(len: usize, offset: usize, dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(len, dim);
    for i in 0..len {
        m[(i, offset + i)] = 1.0;
    }
    m
}

fn unit(dim: usize, j: usize) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[j] = 1.0;
    e
}

/// Membership in the mechanically derived dual: equality rows within
/// [`MEMBERSHIP_TOL`], block rows `ψ*_i(α) ≤ β_i + tol`, `v ≥ 0`.
fn mechanical_member(dual: &DualProblem, u: &DVector<f64>, v: &DVector<f64>) -> Result<bool> {
    if v.iter().any(|&x| x < 0.0) {
        return Ok(false);
    }
    let (alpha, beta) = crate::dual::alpha_beta(&dual.base, u, v)?;
    let simplified = simplify_dual(dual);
    for (i, b) in simplified.psi_star.blocks.iter().enumerate() {
        let a = b.gather(&alpha);
        let ok = if simplified.equality_rows.contains(&i) {
            a.amax() <= MEMBERSHIP_TOL
        } else {
            eval_ph(&b.func, a.as_slice())? <= beta[i] + MEMBERSHIP_TOL
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Instance parameters for [`example_crosscheck`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleParams {
    pub n: usize,
    pub p1: Exponent,
    pub p2: Exponent,
    /// `None` draws `λ₂` at random.
    pub lambda2: Option<f64>,
    pub samples: usize,
    pub solve_iters: usize,
}

impl ExampleParams {
    pub fn for_example(example: u8) -> Self {
        ExampleParams {
            n: if example == 3 { 4 } else { 3 },
            p1: Exponent::Finite(0.5),
            p2: Exponent::Finite(2.0),
            lambda2: None,
            samples: 1000,
            solve_iters: 400_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongDualityCheck {
    pub expected: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleReport {
    pub example: u8,
    pub seed: u64,
    pub samples: usize,
    pub literal_feasible: usize,
    pub mechanical_feasible: usize,
    pub disagreements: usize,
    /// Disagreements between the mechanical dual and an auxiliary form: the
    /// eliminated cone dual (example 1) or the dual exactly as displayed
    /// (example 5).
    pub auxiliary_disagreements: Option<usize>,
    pub display_mismatch: Vec<String>,
    pub mechanical_value: Option<f64>,
    pub literal_value: Option<f64>,
    pub converged: bool,
    pub values_agree: Option<bool>,
    pub strong_duality: Option<StrongDualityCheck>,
    pub ok: bool,
}

type Lift = dyn Fn(&DVector<f64>) -> (DVector<f64>, DVector<f64>) + Send + Sync;
type Membership = dyn Fn(&DVector<f64>) -> bool + Send + Sync;

/// A literal dual with its lift `z ↦ (u, v)` into the mechanical dual, a strictly
/// feasible center for sampling and an optional projection of samples onto the
/// literal equalities.
struct ExampleCase {
    mechanical: DualProblem,
    literal: LiteralDual,
    lift: Box<Lift>,
    center: DVector<f64>,
    repair: Box<dyn Fn(DVector<f64>) -> DVector<f64> + Send + Sync>,
    auxiliary: Option<Box<Membership>>,
    display_mismatch: Vec<String>,
    strong_duality: Option<StrongDualityCheck>,
}

fn identity_repair() -> Box<dyn Fn(DVector<f64>) -> DVector<f64> + Send + Sync> {
    Box::new(|z| z)
}

fn split_uv(z: &DVector<f64>, k: usize) -> (DVector<f64>, DVector<f64>) {
    (z.rows(0, k).into_owned(), z.rows(k, z.len() - k).into_owned())
}

fn example1(params: &ExampleParams, rng: &mut SeededRng) -> Result<ExampleCase> {
    let n = params.n.max(2);
    let k = 2;
    let a = sampling::normal_matrix(rng, k, n);
    let tail = sampling::normal_vector(rng, n - 1);
    let mut x0 = DVector::zeros(n);
    x0[0] = tail.norm() + 1.0;
    x0.rows_mut(1, n - 1).copy_from(&tail);
    let b = &a * &x0;
    let u0 = sampling::normal_vector(rng, k);
    let s_tail = sampling::normal_vector(rng, n - 1);
    let mut s0 = DVector::zeros(n);
    s0[0] = s_tail.norm() + 1.0;
    s0.rows_mut(1, n - 1).copy_from(&s_tail);
    let c = a.tr_mul(&u0) + s0;

    let prob = socp_to_pho(&c, &a, &b)?;
    let mechanical = simplify_dual(&build_dual(&prob)?);
    let socp = socp_dual_simplify(&mechanical)?;

    // c − Aᵀu in the second-order cone: ‖c₂ − (Aᵀu)₂‖₂ + (Aᵀu)₁ ≤ c₁.
    let at = a.transpose();
    let literal = LiteralDual {
        objective: b.clone(),
        rows: vec![NormRow {
            q: Some(2.0),
            m: -at.rows(1, n - 1).into_owned(),
            r: c.rows(1, n - 1).into_owned(),
            a: at.row(0).transpose(),
            rhs: c[0],
        }],
        nonneg: vec![],
        equalities: None,
    };
    let (a2, c2) = (a.clone(), c.clone());
    let lift = Box::new(move |u: &DVector<f64>| {
        let v = c2[0] - a2.column(0).dot(u);
        (u.clone(), DVector::from_vec(vec![v]))
    });

    // min x₁ + 0.5x₂ s.t. x₁ = 2, x₁ ≥ |x₂|: optimum 1 at x = (2, −2), dual u = 0.5.
    let hand = socp_to_pho(
        &DVector::from_vec(vec![1.0, 0.5]),
        &DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        &DVector::from_vec(vec![2.0]),
    )?;
    let primal = brute_force_primal(&hand, f64::NEG_INFINITY, f64::INFINITY, BruteForceMode::SignPattern, 1e-12)?;
    let hand_dual = simplify_dual(&build_dual(&hand)?);
    let dual = simplex_lp(&dual_as_lp(&hand_dual)?, 1e-12)?;
    let agree = primal.is_optimal()
        && dual.is_optimal()
        && (primal.value - 1.0).abs() <= 1e-6
        && (dual.value - 1.0).abs() <= 1e-6
        && (primal.value - dual.value).abs() <= 1e-6;

    Ok(ExampleCase {
        mechanical,
        literal,
        lift,
        center: u0,
        repair: identity_repair(),
        auxiliary: Some(Box::new(move |u| socp.constraint(u) <= MEMBERSHIP_TOL)),
        display_mismatch: vec![],
        strong_duality: Some(StrongDualityCheck {
            expected: 1.0,
            primal_value: primal.value,
            dual_value: dual.value,
            agree,
        }),
    })
}

fn equality_projection(e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    e.clone()
        .pseudo_inverse(1e-12)
        .map_err(|m| Error::InvalidInput(format!("projection: {m}")))
}

fn example2(params: &ExampleParams, rng: &mut SeededRng) -> Result<ExampleCase> {
    let n = params.n;
    let exps = [params.p1, params.p2];
    let objective: Vec<GaugeTerm> = exps
        .iter()
        .map(|&p| {
            GaugeTerm::new(
                uniform(rng, 0.5, 2.0),
                sampling::normal_matrix(rng, 2, n),
                sampling::normal_vector(rng, 2),
                p,
            )
        })
        .collect();
    let constraints = vec![GaugeTerm::new(
        uniform(rng, 0.5, 2.0),
        sampling::normal_matrix(rng, 2, n),
        sampling::normal_vector(rng, 2),
        Exponent::Finite(2.0),
    )];
    let g = gauge_to_pho(n, &objective, &constraints)?;
    let terms: Vec<&GaugeTerm> = objective.iter().chain(&constraints).collect();
    let rows: usize = terms.iter().map(|t| t.rows()).sum();
    let t = constraints.len();
    let dim = rows + t;

    // max Σ aᵢᵀu₁ᵢ + Σ bⱼᵀu₂ⱼ − Σ βⱼ vⱼ  s.t.  Σ Aᵢᵀu₁ᵢ + Σ Bⱼᵀu₂ⱼ = 0,
    // fᵢ*(−u₁ᵢ) ≤ αᵢ,  gⱼ*(−u₂ⱼ) ≤ vⱼ.
    let mut obj = DVector::zeros(dim);
    let mut eq = DMatrix::zeros(n, dim);
    let mut lit_rows = Vec::new();
    let mut off = 0;
    for (idx, term) in terms.iter().enumerate() {
        let r = term.rows();
        obj.rows_mut(off, r).copy_from(&term.offset);
        eq.view_mut((0, off), (n, r)).copy_from(&term.matrix.transpose());
        let (a, rhs) = if idx < objective.len() {
            (DVector::zeros(dim), term.weight)
        } else {
            let j = idx - objective.len();
            obj[rows + j] = -term.weight;
            (-unit(dim, rows + j), 0.0)
        };
        lit_rows.push(NormRow {
            q: literal_q(term.exponent),
            m: -picker(r, off, dim),
            r: DVector::zeros(r),
            a,
            rhs,
        });
        off += r;
    }
    let pinv = equality_projection(&eq)?;
    let eq2 = eq.clone();
    let repair = Box::new(move |z: DVector<f64>| {
        let res = &eq2 * &z;
        &z - &pinv * res
    });
    let literal = LiteralDual {
        objective: obj,
        rows: lit_rows,
        nonneg: vec![],
        equalities: Some((eq, DVector::zeros(n))),
    };
    let layout = g.layout.clone();
    let lift = Box::new(move |z: &DVector<f64>| {
        let u = z.rows(0, rows).into_owned();
        let mut v = DVector::zeros(layout.v_len());
        for j in 0..layout.t() {
            v[layout.constraint_multiplier(j)] = z[rows + j];
        }
        (u, v)
    });
    let mut center = DVector::zeros(dim);
    center.rows_mut(rows, t).fill(1.0);
    Ok(ExampleCase {
        mechanical: g.dual,
        literal,
        lift,
        center,
        repair,
        auxiliary: None,
        display_mismatch: vec![],
        strong_duality: None,
    })
}

fn example3(params: &ExampleParams, rng: &mut SeededRng) -> Result<ExampleCase> {
    let n = params.n.max(2);
    let rows = 3;
    let half = n / 2;
    let groups = vec![(0..half).collect::<Vec<_>>(), (half..n).collect()];
    let lambda1 = uniform(rng, 0.3, 1.0);
    let lambda2 = params.lambda2.unwrap_or_else(|| uniform(rng, 0.3, 1.0));
    let a = sampling::normal_matrix(rng, rows, n);
    let b = sampling::normal_vector(rng, rows);
    let g = group_lasso_to_pho(&GroupLassoParams {
        a: a.clone(),
        b: b.clone(),
        lambda1,
        lambda2,
        groups: groups.clone(),
        m_prime: 1,
        p1: params.p1,
        p2: params.p2,
    })?;
    // max bᵀu s.t. ‖(Aᵀ)_{I_i} u‖_{q_i} ≤ λ_i, ‖−u‖₂ ≤ 1.
    let at = a.transpose();
    let mut lit_rows: Vec<NormRow> = groups
        .iter()
        .enumerate()
        .map(|(i, gr)| {
            let m = DMatrix::from_fn(gr.len(), rows, |r, c| at[(gr[r], c)]);
            let (p, lam) = if i == 0 { (params.p1, lambda1) } else { (params.p2, lambda2) };
            NormRow {
                q: literal_q(p),
                m,
                r: DVector::zeros(gr.len()),
                a: DVector::zeros(rows),
                rhs: lam,
            }
        })
        .collect();
    lit_rows.push(NormRow {
        q: Some(2.0),
        m: -DMatrix::identity(rows, rows),
        r: DVector::zeros(rows),
        a: DVector::zeros(rows),
        rhs: 1.0,
    });
    let literal = LiteralDual {
        objective: b,
        rows: lit_rows,
        nonneg: vec![],
        equalities: None,
    };
    let layout = g.layout.clone();
    let lift = Box::new(move |u: &DVector<f64>| {
        let atu = at.clone() * u;
        let mut full = DVector::zeros(layout.u_len());
        for (i, gr) in groups.iter().enumerate() {
            let off = layout.objective_offset(i);
            for (r, &j) in gr.iter().enumerate() {
                full[off + r] = -atu[j];
            }
        }
        let off = layout.objective_offset(groups.len());
        full.rows_mut(off, rows).copy_from(u);
        (full, DVector::zeros(layout.v_len()))
    });
    Ok(ExampleCase {
        mechanical: g.dual,
        literal,
        lift,
        center: DVector::zeros(rows),
        repair: identity_repair(),
        auxiliary: None,
        display_mismatch: vec![],
        strong_duality: None,
    })
}

fn example4(params: &ExampleParams, rng: &mut SeededRng) -> Result<ExampleCase> {
    let n = params.n;
    let rows = 2;
    let a = sampling::normal_matrix(rng, rows, n);
    let b = sampling::normal_vector(rng, rows);
    let beta = uniform(rng, 0.2, 1.0);
    let lambda1 = uniform(rng, 0.3, 1.0);
    let lambda2 = params.lambda2.unwrap_or_else(|| uniform(rng, 0.3, 1.0));
    let g = constrained_lasso_to_pho(&ConstrainedLassoParams {
        a: a.clone(),
        b: b.clone(),
        beta,
        lambda1,
        lambda2,
        p1: params.p1,
        p2: params.p2,
    })?;
    let reduced = lambda2 == 0.0;
    let at = a.transpose();
    // z = (u₁, u₂, v), or (u₂, v) when λ₂ = 0 forces u₁ = 0.
    let n1 = if reduced { 0 } else { n };
    let dim = n1 + rows + 1;
    let iv = dim - 1;
    let mut obj = DVector::zeros(dim);
    obj.rows_mut(n1, rows).copy_from(&b);
    obj[iv] = -beta;
    let mut m1 = DMatrix::zeros(n, dim);
    if !reduced {
        m1.view_mut((0, 0), (n, n)).fill_with_identity();
    }
    m1.view_mut((0, n1), (n, rows)).copy_from(&at);
    let mut lit_rows = vec![NormRow {
        q: literal_q(params.p1),
        m: m1,
        r: DVector::zeros(n),
        a: DVector::zeros(dim),
        rhs: lambda1,
    }];
    if !reduced {
        lit_rows.push(NormRow {
            q: literal_q(params.p2),
            m: -picker(n, 0, dim),
            r: DVector::zeros(n),
            a: DVector::zeros(dim),
            rhs: lambda2,
        });
    }
    lit_rows.push(NormRow {
        q: Some(2.0),
        m: -picker(rows, n1, dim),
        r: DVector::zeros(rows),
        a: -unit(dim, iv),
        rhs: 0.0,
    });
    let literal = LiteralDual {
        objective: obj,
        rows: lit_rows,
        nonneg: vec![],
        equalities: None,
    };
    let layout = g.layout.clone();
    let lift = Box::new(move |z: &DVector<f64>| {
        let u1 = if reduced { DVector::zeros(n) } else { z.rows(0, n).into_owned() };
        let u2 = z.rows(n1, rows).into_owned();
        let mut u = DVector::zeros(layout.u_len());
        let u11 = -(&u1 + &at * &u2);
        u.rows_mut(layout.objective_offset(0), n).copy_from(&u11);
        u.rows_mut(layout.objective_offset(1), n).copy_from(&u1);
        u.rows_mut(layout.constraint_offset(0), rows).copy_from(&u2);
        let mut v = DVector::zeros(layout.v_len());
        v[layout.constraint_multiplier(0)] = z[iv];
        (u, v)
    });
    Ok(ExampleCase {
        mechanical: g.dual,
        literal,
        lift,
        center: unit(dim, iv),
        repair: identity_repair(),
        auxiliary: None,
        display_mismatch: vec![],
        strong_duality: None,
    })
}

fn example5(params: &ExampleParams, rng: &mut SeededRng) -> Result<ExampleCase> {
    let n = params.n;
    let x0 = sampling::normal_vector(rng, n);
    let lambdas = [1.0, -0.5];
    let exps = [params.p2, Exponent::Finite(1.0)];
    let terms: Vec<SumNormsTerm> = lambdas
        .iter()
        .zip(exps)
        .map(|(&lambda, exponent)| {
            let matrix = sampling::normal_matrix(rng, 2, n);
            let offset = &matrix * &x0 + sampling::normal_vector(rng, 2) * 0.1;
            SumNormsTerm {
                lambda,
                matrix,
                offset,
                exponent,
            }
        })
        .collect();
    let k = 2;
    let b_mat = sampling::normal_matrix(rng, k, n);
    let b_vec = &b_mat * &x0 + sampling::normal_vector(rng, k).abs();
    let guards = vec![Safeguard { c: 1.5, d: 10.0 }; terms.len()];
    let r = sum_norms_to_pho(&terms, Some((&b_mat, &b_vec)), Some(&guards))?;

    let s = terms.len();
    let rows: usize = terms.iter().map(|t| t.matrix.nrows()).sum();
    let dim = rows + k + s;
    // max Σ aᵢᵀuᵢ − bᵀv₁ − Σ dᵢ v_{i+1}  s.t.  Σ Aᵢᵀuᵢ − Bᵀv₁ = 0,
    // fᵢ*(−uᵢ) ≤ λᵢ + cᵢ v_{i+1},  v ≥ 0.
    let build = |as_printed: bool| {
        let mut obj = DVector::zeros(dim);
        let mut eq = DMatrix::zeros(n, dim);
        let mut lit_rows = Vec::new();
        let mut off = 0;
        for (i, t) in terms.iter().enumerate() {
            let m = t.matrix.nrows();
            obj.rows_mut(off, m).copy_from(&t.offset);
            eq.view_mut((0, off), (n, m)).copy_from(&t.matrix.transpose());
            obj[rows + k + i] = -guards[i].d;
            let (a, rhs) = if as_printed {
                (DVector::zeros(dim), t.lambda + guards[i].c)
            } else {
                (-unit(dim, rows + k + i) * guards[i].c, t.lambda)
            };
            lit_rows.push(NormRow {
                q: literal_q(t.exponent),
                m: -picker(m, off, dim),
                r: DVector::zeros(m),
                a,
                rhs,
            });
            off += m;
        }
        obj.rows_mut(rows, k).copy_from(&(-&b_vec));
        eq.view_mut((0, rows), (n, k)).copy_from(&(-b_mat.transpose()));
        LiteralDual {
            objective: obj,
            rows: lit_rows,
            nonneg: (rows..dim).collect(),
            equalities: Some((eq, DVector::zeros(n))),
        }
    };
    let literal = build(false);
    let printed = build(true);
    let eq_u = literal.equalities.as_ref().expect("built with equalities").0.columns(0, rows).into_owned();
    let eq_v = literal.equalities.as_ref().expect("built with equalities").0.columns(rows, k).into_owned();
    let pinv = equality_projection(&eq_u)?;
    let repair = Box::new(move |mut z: DVector<f64>| {
        for j in rows..dim {
            z[j] = z[j].abs();
        }
        let u = z.rows(0, rows).into_owned();
        let residual = &eq_u * &u + &eq_v * z.rows(rows, k);
        let fixed = u - &pinv * residual;
        z.rows_mut(0, rows).copy_from(&fixed);
        z
    });
    let mut center = DVector::zeros(dim);
    for (i, t) in terms.iter().enumerate() {
        center[rows + k + i] = 1.0 + t.lambda.abs() / guards[i].c;
    }
    Ok(ExampleCase {
        mechanical: r.dual,
        literal,
        lift: Box::new(move |z| split_uv(z, rows)),
        center,
        repair,
        auxiliary: Some(Box::new(move |z| printed.member(z))),
        display_mismatch: r.display_mismatch,
        strong_duality: None,
    })
}

fn converged(res: &SolveResult) -> bool {
    let Some(Certificate::Subgradient { history, .. }) = &res.certificate else {
        return false;
    };
    let half = res.iterations / 2;
    let mid = history.iter().rev().find(|h| h.iteration <= half).and_then(|h| h.best_value);
    match mid {
        Some(m) => res.is_optimal() && (res.value - m).abs() <= 1e-4 * (1.0 + res.value.abs()),
        None => false,
    }
}

/// Builds the example's problem, derives and simplifies its dual mechanically,
/// and compares it with an independent transcription of the displayed dual:
/// feasible-set membership on `params.samples` points around a strictly feasible
/// center, and optimal values when both subgradient solves converge.
pub fn example_crosscheck(example: u8, params: &ExampleParams, seed: u64) -> Result<ExampleReport> {
    let mut rng = sampling::rng(seed);
    let case = match example {
        1 => example1(params, &mut rng)?,
        2 => example2(params, &mut rng)?,
        3 => example3(params, &mut rng)?,
        4 => example4(params, &mut rng)?,
        5 => example5(params, &mut rng)?,
        other => return Err(Error::InvalidInput(format!("no example {other}; expected 1 to 5"))),
    };
    let dim = case.literal.dim();
    let center_scale = 1.0 + case.center.amax();
    let (mut lit_in, mut mech_in, mut disagree, mut aux_disagree) = (0, 0, 0, 0);
    for _ in 0..params.samples {
        let r = sampling::log_uniform(&mut rng, -2.0, 1.0) * center_scale;
        let z = (case.repair)(&case.center + sampling::normal_vector(&mut rng, dim) * r);
        let lit = case.literal.member(&z);
        let (u, v) = (case.lift)(&z);
        let mech = mechanical_member(&case.mechanical, &u, &v)?;
        lit_in += usize::from(lit);
        mech_in += usize::from(mech);
        disagree += usize::from(lit != mech);
        if let Some(aux) = &case.auxiliary {
            aux_disagree += usize::from(aux(&z) != mech);
        }
    }

    let opts = SubgradientOptions::with_max_iter(params.solve_iters);
    let mech = solve_dual_subgradient(&case.mechanical, &opts)?;
    let lit = solve_subgradient(&case.literal, &opts)?;
    let both = converged(&mech) && converged(&lit);
    let values_agree = both.then(|| {
        (mech.value - lit.value).abs() <= VALUE_TOL * (1.0 + mech.value.abs().max(lit.value.abs()))
    });
    let mixed = lit_in > 0 && lit_in < params.samples;
    let aux_ok = example == 5 || aux_disagree == 0;
    let ok = disagree == 0
        && mixed
        && aux_ok
        && values_agree != Some(false)
        && case.strong_duality.as_ref().is_none_or(|s| s.agree);
    Ok(ExampleReport {
        example,
        seed,
        samples: params.samples,
        literal_feasible: lit_in,
        mechanical_feasible: mech_in,
        disagreements: disagree,
        auxiliary_disagreements: case.auxiliary.as_ref().map(|_| aux_disagree),
        display_mismatch: case.display_mismatch,
        mechanical_value: mech.is_optimal().then_some(mech.value),
        literal_value: lit.is_optimal().then_some(lit.value),
        converged: both,
        values_agree,
        strong_duality: case.strong_duality,
        ok,
    })
}

/// Cross-checks for all five examples with their default parameters.
pub fn examples_suite(seed: u64) -> Result<Vec<ExampleReport>> {
    (1..=5u8)
        .into_par_iter()
        .map(|e| example_crosscheck(e, &ExampleParams::for_example(e), sub_seed(seed, e as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> PHOProblem {
        PHOProblem::unconstrained(DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0]), VectorPH::abs(1))
            .with_inequalities(
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, 0.0),
                DVector::from_vec(vec![1.0]),
            )
    }

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    #[test]
    fn one_var_strong_duality() {
        let r = duality_report(&one_var(), &[v1(1.0)], &[(DVector::zeros(0), v1(1.0))], 0, 0).unwrap();
        assert_eq!(r.gap, ExtendedValue::Finite(0.0));
        assert!(r.weak_duality_ok);
        assert_eq!(r.pairs_checked, 1);
    }

    #[test]
    fn infeasible_dual_is_trivially_ok() {
        let mut prob = one_var();
        prob.d[0] = -1.0;
        let r = duality_report(&prob, &[v1(1.0)], &[(DVector::zeros(0), v1(0.0))], 0, 0).unwrap();
        assert_eq!(r.dual_best, ExtendedValue::NegInf);
        assert!(r.weak_duality_ok);
    }

    #[test]
    fn lemma1_one_var() {
        let r = lemma1_witness_check(&one_var(), &DVector::zeros(0), &v1(2.0)).unwrap();
        assert!(r.ok, "{r:?}");
        // L(λ) = 2 − λ along x = λ.
        assert_eq!(r.values[1], 2.0 - 10.0);
        assert!(lemma1_witness_check(&one_var(), &DVector::zeros(0), &v1(1.0)).is_err());
    }

    #[test]
    fn lemma1_only_violating_block_moves() {
        let psi = VectorPH::contiguous(&[(2, Exponent::Finite(2.0)), (1, Exponent::Finite(1.0))]);
        let prob = PHOProblem::unconstrained(DVector::from_vec(vec![3.0, 4.0, 0.1]), DVector::from_vec(vec![1.0, 1.0]), psi);
        let r = lemma1_witness_check(&prob, &DVector::zeros(0), &DVector::zeros(0)).unwrap();
        assert_eq!(r.block, 0);
        assert!(r.only_block_moves && r.ok);
    }

    #[test]
    fn theorem2_one_var_points() {
        let pts = [(DVector::zeros(0), v1(1.0)), (DVector::zeros(0), v1(0.5)), (DVector::zeros(0), v1(2.0))];
        let r = theorem2_check(&one_var(), &pts, 2000, 1).unwrap();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.points[0].omega, ExtendedValue::Finite(1.0));
        assert_eq!(r.points[0].min_sampled_l, Some(1.0));
        assert_eq!(r.points[1].omega, ExtendedValue::Finite(0.5));
        assert_eq!(r.points[2].omega, ExtendedValue::NegInf);
        assert_eq!(r.sup_omega, ExtendedValue::Finite(1.0));
    }

    #[test]
    fn prop1_default_config() {
        for psi in prop1_configurations() {
            let r = prop1_suite(&psi, 2000, 7).unwrap();
            assert!(r.ok, "{r:?}");
            assert_eq!(r.zero_x_margin, 0.0);
        }
    }

    #[test]
    fn avo_one_var() {
        let r = one_var_avo_report().unwrap();
        assert!(r.ok);
        assert!((r.split_value - 2.0).abs() < 1e-12 && (r.dual_value - 2.0).abs() < 1e-12);
        assert!((r.brute_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_and_sum_norms_examples() {
        let r = example_crosscheck(2, &ExampleParams::for_example(2), 11).unwrap();
        assert!(r.ok, "{r:?}");
        let r = example_crosscheck(5, &ExampleParams::for_example(5), 12).unwrap();
        assert_eq!(r.disagreements, 0, "{r:?}");
        assert!(r.auxiliary_disagreements.unwrap() > 0, "{r:?}");
        assert!(!r.display_mismatch.is_empty());
        assert!(r.ok, "{r:?}");
    }

    #[test]
    fn literal_q_rule() {
        assert_eq!(literal_q(Exponent::Finite(0.5)), None);
        assert_eq!(literal_q(Exponent::Finite(1.0)), None);
        assert_eq!(literal_q(Exponent::Finite(2.0)), Some(2.0));
        assert_eq!(literal_q(Exponent::Infinity), Some(1.0));
    }

    #[test]
    fn norm_gradients() {
        let (v, g) = norm_with_grad(Some(2.0), &[3.0, 4.0]);
        assert!((v - 5.0).abs() < 1e-15);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        let (v, g) = norm_with_grad(None, &[1.0, -3.0, 3.0]);
        assert_eq!((v, g), (3.0, vec![0.0, -1.0, 0.0]));
    }
}
