//! `pho`: validate, dualize, reformulate, evaluate, solve and check positively
//! homogeneous optimization problems stored as JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use pho_core::dual::{build_dual, omega, primal_residuals};
use pho_core::format::{
    dual_from_json, dual_to_json, from_json, matrix_from_rows, problem_from_json, problem_to_json,
    report_to_json,
};
use pho_core::model::{DualProblem, Exponent, PHOProblem};
use pho_core::ph::{eval_vector_dual_ph, eval_vector_ph};
use pho_core::solvers::{brute_force_primal, simplex_lp, solve_dual_subgradient, BruteForceMode, SubgradientOptions};
use pho_core::transforms::{
    binary_to_avo, constrained_lasso_to_pho, dual_as_lp, gauge_to_pho, group_lasso_to_pho, simplify_dual,
    socp_to_pho, sum_norms_to_pho, AVOProblem, BinaryLp, ConstrainedLassoParams, Direction, GaugeTerm,
    GroupLassoParams, LPProblem, RowSense, Safeguard, SumNormsTerm,
};
use pho_core::verify;
use pho_core::{validate_problem, Error};
use serde::{Deserialize, Serialize};

const PROBLEM_SCHEMA: &str = "\
PROBLEM FILE (JSON, 0-based indices, matrices as lists of rows):
  n       number of variables
  c       linear objective coefficients, length n
  d       coefficients of the atom values Ψ(x), one per block
  blocks  list of {\"indices\": [int], \"p\": number | \"inf\"}; must partition 0..n
  eq      optional {\"A\": k×n, \"B\": k×m, \"b\": k}   for A x + B Ψ(x) = b
  ineq    optional {\"H\": l×n, \"K\": l×m, \"p\": l}   for H x + K Ψ(x) ≥ p
The problem is: minimize cᵀx + dᵀΨ(x) where Ψ_i(x) = ‖x_{blocks[i]}‖_{p_i}.";

const DUAL_SCHEMA: &str = "\
DUAL FILE (JSON): {\"dual\": {
  problem          the primal problem file
  dual_exponents   dual exponent q_i of each block (\"inf\" for p ≤ 1)
  equality_rows    blocks whose constraint reduced to α_I = 0 (optional)
  infeasible_rows  blocks whose constraint can never hold (optional)}}
The dual is: maximize bᵀu + pᵀv s.t. ‖α_{I_i}‖_{q_i} ≤ β_i, v ≥ 0, with
α = Aᵀu + Hᵀv − c and β = d − Bᵀu − Kᵀv.";

const TRANSFORM_SCHEMAS: &str = "\
PARAMETER FILES (JSON; matrices as lists of rows, exponents number | \"inf\"):
  avo          {\"c\", \"a\", \"b_abs\", \"b\"}: min cᵀx s.t. A x + B|x| ≥ b
  socp         {\"c\", \"a\", \"b\"}: min cᵀx s.t. A x = b, x₁ ≥ ‖x₂..ₙ‖₂ (n ≥ 2)
  gauge        {\"n\", \"objective\": [term], \"constraints\": [term]} with
               term = {\"weight\", \"matrix\", \"offset\", \"p\"}:
               min Σ weight·‖M x − offset‖_p s.t. ‖M x − offset‖_p ≤ weight
  group-lasso  {\"a\", \"b\", \"lambda1\", \"lambda2\", \"groups\": [[int]], \"m_prime\", \"p1\", \"p2\"}:
               min λ₁Σ_{i<m'}‖x_{G_i}‖_{p1} + λ₂Σ_{i≥m'}‖x_{G_i}‖_{p2} + ‖A x − b‖₂
  lasso        {\"a\", \"b\", \"beta\", \"lambda1\", \"lambda2\", \"p1\", \"p2\"}:
               min λ₁‖x‖_{p1} + λ₂‖x‖_{p2} s.t. ‖A x − b‖₂ ≤ β
  sum-norms    {\"terms\": [{\"lambda\", \"matrix\", \"offset\", \"p\"}],
                \"linear\": {\"b_mat\", \"b\"} (optional, B x ≤ b),
                \"safeguards\": [{\"c\", \"d\"}] (optional, default c = 1, d = 1000(1 + ‖offset‖))}:
               min Σ λ_i‖A_i x − a_i‖_{p_i}, λ_i of any sign
  binary       {\"direction\": \"minimize\" | \"maximize\", \"objective\",
                \"constraints\": [{\"coeffs\", \"sense\": \"<=\" | \"=\" | \">=\", \"rhs\"}]}:
               optimize over x ∈ {0, 1}ⁿ
Outputs <stem>.problem.json and <stem>.dual.json (simplified dual) next to the
parameter file, or in --out-dir, and prints a summary report.";

const EVAL_SCHEMA: &str = "\
POINT FILES (JSON):
  --ph     {\"x\": [n numbers]} or a bare array
  --omega  {\"u\": [k numbers], \"v\": [l numbers]} with v ≥ 0
--omega prints \"-inf\" and the violating block with its divergence ray when
some block has ‖α_I‖_q > β_I.";

const SOLVE_SCHEMA: &str = "\
INPUTS:
  --dual F    dual file (or a problem file, which is dualized first); projected
              subgradient ascent, point = (u, v)
  --lp F      LP file {\"direction\", \"objective\", \"matrix\", \"rhs\",
              \"senses\": [\"<=\" | \"=\" | \">=\"], \"lower\": [number | null] (optional,
              default 0)}, or a dual file whose dual is linear; two-phase simplex
  --brute F   problem file; exhaustive search on the box [-B, B]ⁿ: sign patterns
              when every block is a singleton, a grid otherwise (n ≤ 4)";

#[derive(Parser)]
#[command(name = "pho", version, about = "Positively homogeneous optimization toolkit", after_long_help = PROBLEM_SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file and print every invariant violation.
    #[command(after_long_help = PROBLEM_SCHEMA)]
    Validate { file: PathBuf },
    /// Build the closed-form dual and write it to <stem>.dual.json.
    #[command(after_long_help = DUAL_SCHEMA)]
    Dualize {
        file: PathBuf,
        /// Mark equality and infeasible rows.
        #[arg(long)]
        simplify: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Reformulate a problem class into PHO form.
    #[command(after_long_help = TRANSFORM_SCHEMAS)]
    Transform {
        #[arg(long, value_enum)]
        kind: Kind,
        params: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate Ψ(x) or the dual function ω(u, v).
    #[command(after_long_help = EVAL_SCHEMA)]
    Eval(EvalArgs),
    /// Solve a dual, an LP or a small primal.
    #[command(after_long_help = SOLVE_SCHEMA)]
    Solve(SolveArgs),
    /// Run a verification suite; exit 0 iff every check passes.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random instances (default depends on the suite).
        #[arg(long)]
        instances: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Avo,
    Socp,
    Gauge,
    GroupLasso,
    Lasso,
    SumNorms,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    WeakDuality,
    Prop1,
    Lemma1,
    Theorem2,
    Examples,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "target")]
struct EvalTarget {
    /// Problem file; evaluate Ψ(x), Ψ*(x) and the primal residuals at --at.
    #[arg(long)]
    ph: Option<PathBuf>,
    /// Problem file; evaluate ω(u, v) at --at.
    #[arg(long)]
    omega: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    target: EvalTarget,
    #[arg(long)]
    at: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SolveTarget {
    #[arg(long)]
    dual: Option<PathBuf>,
    #[arg(long)]
    lp: Option<PathBuf>,
    #[arg(long)]
    brute: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    target: SolveTarget,
    /// Half-width of the brute-force box.
    #[arg(long = "box", default_value_t = 10.0)]
    bound: f64,
    /// Grid spacing for non-singleton blocks (default: box / 10).
    #[arg(long)]
    resolution: Option<f64>,
    /// Iteration limit of the subgradient method.
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    /// Exit 1: a valid input that fails a check or an operation.
    Semantic(String),
    /// Exit 2: unreadable or malformed input.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Input(e.to_string()),
            other => Failure::Semantic(other.to_string()),
        }
    }
}

type CliResult = std::result::Result<bool, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Semantic(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::Parse(msg) => Failure::Input(format!("{}: {msg}", path.display())),
        other => Failure::Semantic(format!("{}: {other}", path.display())),
    }
}

fn load_problem(path: &Path) -> std::result::Result<PHOProblem, Failure> {
    problem_from_json(&read(path)?).map_err(|e| located(path, e))
}

fn load_valid_problem(path: &Path) -> std::result::Result<PHOProblem, Failure> {
    let prob = load_problem(path)?;
    prob.ensure_valid().map_err(|e| located(path, e))?;
    Ok(prob)
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, Failure> {
    from_json(&read(path)?).map_err(|e| located(path, e))
}

fn is_dual_file(text: &str) -> bool {
    from_json::<serde_json::Value>(text).is_ok_and(|v| v.get("dual").is_some())
}

fn load_dual(path: &Path) -> std::result::Result<DualProblem, Failure> {
    let text = read(path)?;
    let dual = if is_dual_file(&text) {
        dual_from_json(&text).map_err(|e| located(path, e))?
    } else {
        let prob = problem_from_json(&text).map_err(|e| located(path, e))?;
        prob.ensure_valid().map_err(|e| located(path, e))?;
        build_dual(&prob)?
    };
    dual.base.ensure_valid().map_err(|e| located(path, e))?;
    Ok(dual)
}

fn sibling(path: &Path, dir: Option<&Path>, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let stem = stem.strip_suffix(".dual").unwrap_or(&stem).to_owned();
    let dir = dir.map_or_else(|| path.parent().unwrap_or(Path::new("")).to_path_buf(), Path::to_path_buf);
    dir.join(format!("{stem}{suffix}"))
}

fn vector(v: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(v)
}

fn matrix(what: &str, rows: &[Vec<f64>], cols: usize) -> std::result::Result<DMatrix<f64>, Failure> {
    matrix_from_rows(what, rows, cols).map_err(Failure::from)
}

fn validate(file: &Path) -> CliResult {
    let prob = load_problem(file)?;
    let report = validate_problem(&prob);
    if report.is_empty() {
        println!("{}: valid", file.display());
    } else {
        print!("{}: invalid\n{report}", file.display());
    }
    Ok(report.is_empty())
}

fn dualize(file: &Path, simplify: bool, output: Option<PathBuf>) -> CliResult {
    let prob = load_valid_problem(file)?;
    let mut dual = build_dual(&prob)?;
    if simplify {
        dual = simplify_dual(&dual);
    }
    let out = output.unwrap_or_else(|| sibling(file, None, ".dual.json"));
    write(&out, &dual_to_json(&dual))?;
    println!("{}", out.display());
    Ok(true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AvoParams {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b_abs: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SocpParams {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermParams {
    weight: f64,
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    p: Exponent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeParams {
    n: usize,
    objective: Vec<TermParams>,
    #[serde(default)]
    constraints: Vec<TermParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupLassoFile {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lambda1: f64,
    lambda2: f64,
    groups: Vec<Vec<usize>>,
    m_prime: usize,
    p1: Exponent,
    p2: Exponent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LassoFile {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    beta: f64,
    lambda1: f64,
    lambda2: f64,
    p1: Exponent,
    p2: Exponent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SumNormsTermFile {
    lambda: f64,
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    p: Exponent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearFile {
    b_mat: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SafeguardFile {
    c: f64,
    d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SumNormsFile {
    terms: Vec<SumNormsTermFile>,
    linear: Option<LinearFile>,
    safeguards: Option<Vec<SafeguardFile>>,
}

#[derive(Serialize)]
struct TransformSummary {
    kind: &'static str,
    problem_file: String,
    dual_file: String,
    n: usize,
    blocks: usize,
    equality_rows: Vec<usize>,
    infeasible_rows: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

fn term(t: TermParams, n: usize, what: &str) -> std::result::Result<GaugeTerm, Failure> {
    Ok(GaugeTerm::new(t.weight, matrix(what, &t.matrix, n)?, vector(t.offset), t.p))
}

fn cols(rows: &[Vec<f64>]) -> usize {
    rows.first().map_or(0, Vec::len)
}

fn transform(kind: Kind, params: &Path, out_dir: Option<PathBuf>) -> CliResult {
    let (name, problem, dual, notes) = match kind {
        Kind::Avo => {
            let p: AvoParams = parse(params)?;
            let n = p.c.len();
            let avo = AVOProblem::inequality_form(vector(p.c), matrix("a", &p.a, n)?, matrix("b_abs", &p.b_abs, n)?, vector(p.b));
            let prob = avo.to_pho();
            prob.ensure_valid()?;
            let dual = simplify_dual(&build_dual(&prob)?);
            ("avo", prob, dual, vec![])
        }
        Kind::Socp => {
            let p: SocpParams = parse(params)?;
            let n = p.c.len();
            let prob = socp_to_pho(&vector(p.c), &matrix("a", &p.a, n)?, &vector(p.b))?;
            let dual = simplify_dual(&build_dual(&prob)?);
            ("socp", prob, dual, vec![])
        }
        Kind::Gauge => {
            let p: GaugeParams = parse(params)?;
            let obj = p.objective.into_iter().map(|t| term(t, p.n, "objective.matrix")).collect::<Result<Vec<_>, _>>()?;
            let con = p.constraints.into_iter().map(|t| term(t, p.n, "constraints.matrix")).collect::<Result<Vec<_>, _>>()?;
            let g = gauge_to_pho(p.n, &obj, &con)?;
            ("gauge", g.problem, g.dual, vec![])
        }
        Kind::GroupLasso => {
            let p: GroupLassoFile = parse(params)?;
            let g = group_lasso_to_pho(&GroupLassoParams {
                a: matrix("a", &p.a, 0)?,
                b: vector(p.b),
                lambda1: p.lambda1,
                lambda2: p.lambda2,
                groups: p.groups,
                m_prime: p.m_prime,
                p1: p.p1,
                p2: p.p2,
            })?;
            ("group-lasso", g.problem, g.dual, vec![])
        }
        Kind::Lasso => {
            let p: LassoFile = parse(params)?;
            let g = constrained_lasso_to_pho(&ConstrainedLassoParams {
                a: matrix("a", &p.a, 0)?,
                b: vector(p.b),
                beta: p.beta,
                lambda1: p.lambda1,
                lambda2: p.lambda2,
                p1: p.p1,
                p2: p.p2,
            })?;
            ("lasso", g.problem, g.dual, vec![])
        }
        Kind::SumNorms => {
            let p: SumNormsFile = parse(params)?;
            let n = p.terms.first().map_or(0, |t| cols(&t.matrix));
            let terms = p
                .terms
                .into_iter()
                .map(|t| {
                    Ok(SumNormsTerm {
                        lambda: t.lambda,
                        matrix: matrix("terms.matrix", &t.matrix, n)?,
                        offset: vector(t.offset),
                        exponent: t.p,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let linear = match p.linear {
                Some(l) => Some((matrix("linear.b_mat", &l.b_mat, n)?, vector(l.b))),
                None => None,
            };
            let guards: Option<Vec<Safeguard>> =
                p.safeguards.map(|g| g.into_iter().map(|s| Safeguard { c: s.c, d: s.d }).collect());
            let r = sum_norms_to_pho(&terms, linear.as_ref().map(|(m, v)| (m, v)), guards.as_deref())?;
            ("sum-norms", r.problem, r.dual, r.display_mismatch)
        }
        Kind::Binary => {
            let lp: BinaryLp = parse(params)?;
            let enc = binary_to_avo(&lp)?;
            let prob = enc.avo.to_pho();
            let dual = simplify_dual(&build_dual(&prob)?);
            let note = format!(
                "original objective = {} · (encoded objective) + {}",
                enc.objective_sign, enc.objective_offset
            );
            ("binary", prob, dual, vec![note])
        }
    };
    let dir = out_dir.as_deref();
    let problem_file = sibling(params, dir, ".problem.json");
    let dual_file = sibling(params, dir, ".dual.json");
    write(&problem_file, &problem_to_json(&problem))?;
    write(&dual_file, &dual_to_json(&dual))?;
    print!(
        "{}",
        report_to_json(&TransformSummary {
            kind: name,
            problem_file: problem_file.display().to_string(),
            dual_file: dual_file.display().to_string(),
            n: problem.n,
            blocks: problem.m(),
            equality_rows: dual.equality_rows.clone(),
            infeasible_rows: dual.infeasible_rows.clone(),
            notes,
        })
    );
    Ok(true)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointFile {
    Bare(Vec<f64>),
    Named { x: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MultiplierFile {
    #[serde(default)]
    u: Vec<f64>,
    #[serde(default)]
    v: Vec<f64>,
}

#[derive(Serialize)]
struct PhEval {
    psi: Vec<f64>,
    psi_star: Vec<f64>,
    residuals: pho_core::dual::PrimalResiduals,
}

fn eval(args: EvalArgs) -> CliResult {
    if let Some(file) = args.target.ph {
        let prob = load_valid_problem(&file)?;
        let x = match parse::<PointFile>(&args.at)? {
            PointFile::Bare(x) | PointFile::Named { x } => vector(x),
        };
        let out = PhEval {
            psi: eval_vector_ph(&prob.psi, &x)?.iter().copied().collect(),
            psi_star: eval_vector_dual_ph(&prob.psi, &x)?.iter().copied().collect(),
            residuals: primal_residuals(&prob, &x, 0.0)?,
        };
        print!("{}", report_to_json(&out));
    } else if let Some(file) = args.target.omega {
        let prob = load_valid_problem(&file)?;
        let m: MultiplierFile = parse(&args.at)?;
        let r = omega(&prob, &vector(m.u), &vector(m.v))?;
        print!("{}", report_to_json(&r));
    }
    Ok(true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LpFile {
    direction: Direction,
    objective: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    senses: Vec<RowSense>,
    lower: Option<Vec<Option<f64>>>,
}

fn load_lp(path: &Path) -> std::result::Result<LPProblem, Failure> {
    let text = read(path)?;
    if is_dual_file(&text) {
        let dual = simplify_dual(&load_dual(path)?);
        return Ok(dual_as_lp(&dual)?);
    }
    let f: LpFile = from_json(&text).map_err(|e| located(path, e))?;
    let n = f.objective.len();
    let lp = LPProblem {
        direction: f.direction,
        matrix: matrix("matrix", &f.matrix, n)?,
        objective: vector(f.objective),
        rhs: vector(f.rhs),
        lower: f.lower.unwrap_or_else(|| vec![Some(0.0); n]),
        senses: f.senses,
    };
    lp.check_dims()?;
    Ok(lp)
}

fn solve(args: SolveArgs) -> CliResult {
    let result = if let Some(f) = &args.target.dual {
        let dual = load_dual(f)?;
        solve_dual_subgradient(&dual, &SubgradientOptions::with_max_iter(args.max_iter))?
    } else if let Some(f) = &args.target.lp {
        simplex_lp(&load_lp(f)?, args.tol)?
    } else if let Some(f) = &args.target.brute {
        let prob = load_valid_problem(f)?;
        let mode = if prob.psi.all_singletons() {
            BruteForceMode::SignPattern
        } else {
            BruteForceMode::Grid {
                resolution: args.resolution.unwrap_or(args.bound / 10.0),
            }
        };
        brute_force_primal(&prob, -args.bound, args.bound, mode, args.tol)?
    } else {
        unreachable!("clap enforces one solve target")
    };
    print!("{}", report_to_json(&result));
    Ok(true)
}

#[derive(Serialize)]
struct SuiteOutput<T: Serialize> {
    suite: &'static str,
    seed: u64,
    passed: bool,
    results: T,
}

fn emit<T: Serialize>(suite: &'static str, seed: u64, passed: bool, results: T) -> CliResult {
    print!("{}", report_to_json(&SuiteOutput { suite, seed, passed, results }));
    Ok(passed)
}

fn check(suite: Suite, seed: u64, instances: Option<usize>) -> CliResult {
    match suite {
        Suite::WeakDuality => {
            let r = verify::weak_duality_suite(instances.unwrap_or(100), 6, seed)?;
            let ok = r.iter().all(|x| x.weak_duality_ok);
            emit("weak-duality", seed, ok, r)
        }
        Suite::Prop1 => {
            let r = verify::prop1_configurations()
                .iter()
                .enumerate()
                .map(|(i, psi)| verify::prop1_suite(psi, 10_000, pho_core::sampling::sub_seed(seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            let ok = r.iter().all(|x| x.ok);
            emit("prop1", seed, ok, r)
        }
        Suite::Lemma1 => {
            let r = verify::lemma1_suite(instances.unwrap_or(100), seed)?;
            let ok = r.iter().all(|o| o.report.as_ref().is_none_or(|x| x.ok)) && r.iter().any(|o| o.report.is_some());
            emit("lemma1", seed, ok, r)
        }
        Suite::Theorem2 => {
            let r = verify::theorem2_suite(instances.unwrap_or(100), 20, 10_000, seed)?;
            let ok = r.iter().all(|x| x.ok);
            emit("theorem2", seed, ok, r)
        }
        Suite::Examples => {
            let r = verify::examples_suite(seed)?;
            let ok = r.iter().all(|x| x.ok);
            emit("examples", seed, ok, r)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Dualize { file, simplify, output } => dualize(&file, simplify, output),
        Command::Transform { kind, params, out_dir } => transform(kind, &params, out_dir),
        Command::Eval(args) => eval(args),
        Command::Solve(args) => solve(args),
        Command::Check { suite, seed, instances } => check(suite, seed, instances),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Semantic(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
