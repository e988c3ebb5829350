//! `orthokit` command-line front end.
//!
//! Exit codes: 0 success, 1 parse or precondition error, 2 when `search`
//! finds a witness, 3 when `verify-theorem` reports violations.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use orthokit::approx_ortho::{check_approx, min_epsilon, reverse_triangle_bounds, ApproxRelationKind};
use orthokit::operator_analysis::{
    corollary_theta, fit_similarity_from_bounds, operator_bounds, perturb_similarity, random_rotation, theta,
    verify_preservation, LinearMapSpec,
};
use orthokit::search::{find_counterexample, ortho_set_2d, parallelogram_defect, SearchConfig};
use orthokit::{check_relation, Error, NormSpec, Relation, RelationKind, Vector, DEFAULT_TOL};

#[derive(Parser, Debug)]
#[command(name = "orthokit", version, about = "Orthogonality relations in finite-dimensional normed spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an exact or approximate relation on a pair.
    Check(CheckArgs),
    /// Trace the orthogonality set of a planar probe vector.
    OrthoSet(OrthoSetArgs),
    /// Operator norm, minimum modulus and similarity fit of a matrix.
    Operator(OperatorArgs),
    /// The preservation bound θ.
    Theta(ThetaArgs),
    /// Perturb a similarity and test approximate orthogonality preservation.
    VerifyTheorem(VerifyArgs),
    /// Look for a pair satisfying one relation and violating another.
    Search(SearchArgs),
    /// Minimal ε of an approximate relation, or the parallelogram defect.
    Defect(DefectArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Tolerance of exact relations and slack of verification checks.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value = "l2")]
    norm: NormSpec,
    /// Relation name: birkhoff, pythagorean, isosceles, roberts, rho,
    /// bisectrix, approx-w-ratio, approx-w-quad, approx-i-ratio, approx-i-quad.
    #[arg(long)]
    rel: String,
    #[arg(long, allow_hyphen_values = true)]
    x: Vector,
    #[arg(long, allow_hyphen_values = true)]
    y: Vector,
    /// ε for approximate relations.
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OrthoSetArgs {
    #[arg(long, default_value = "l2")]
    norm: NormSpec,
    #[arg(long)]
    rel: RelationKind,
    /// Probe vector in the plane.
    #[arg(long, allow_hyphen_values = true)]
    probe: Vector,
    /// Angular grid size (at least 360).
    #[arg(long, default_value_t = 3600)]
    steps: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OperatorArgs {
    /// Rows separated by `;`, entries by `,`, e.g. `2,0;0,3`.
    #[arg(long, allow_hyphen_values = true)]
    matrix: String,
    /// Domain norm.
    #[arg(long, default_value = "l2")]
    norm: NormSpec,
    /// Codomain norm; defaults to the domain norm.
    #[arg(long)]
    codomain_norm: Option<NormSpec>,
    /// Sphere samples when no closed form applies.
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, env = "ORTHOKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ThetaArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    phi1: f64,
    #[arg(long, default_value_t = 0.0)]
    phi2: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "l2")]
    norm: NormSpec,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Scale of the similarity `U = λ·R` with `R` a random rotation.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Use this matrix as `U` instead of `λ·R`.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Relative perturbation budget `‖T − U‖ ≤ ε‖U‖`.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    /// Test this target instead of the computed bound θ.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, env = "ORTHOKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value = "l2")]
    norm: NormSpec,
    #[arg(long)]
    from: RelationKind,
    #[arg(long)]
    to: RelationKind,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Restrict both vectors to the unit sphere.
    #[arg(long)]
    unit_sphere: bool,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, env = "ORTHOKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DefectArgs {
    #[arg(long, default_value = "l2")]
    norm: NormSpec,
    /// An approximate relation name, or `parallelogram`.
    #[arg(long)]
    rel: String,
    #[arg(long, allow_hyphen_values = true)]
    x: Vector,
    #[arg(long, allow_hyphen_values = true)]
    y: Vector,
    #[command(flatten)]
    common: Common,
}

/// What a subcommand produced: the document to print and the exit code.
struct Outcome {
    body: String,
    code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, code: 0 }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("values are finite or null")
}

/// One header row and one value row for flat objects.
fn flat_csv(v: &Value) -> Result<String, Error> {
    let Value::Object(map) = v else {
        return Err(Error::Precondition("csv output needs a flat object"));
    };
    let mut header = Vec::new();
    let mut row = Vec::new();
    for (k, v) in map {
        if v.is_object() || v.is_array() {
            return Err(Error::Precondition("csv output is not available for nested results"));
        }
        header.push(k.clone());
        row.push(match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        });
    }
    Ok(format!("{}\n{}\n", header.join(","), row.join(",")))
}

fn render(v: Value, format: Format) -> Result<String, Error> {
    match format {
        Format::Json => Ok(to_json(&v)),
        Format::Csv => flat_csv(&v),
    }
}

fn check(a: CheckArgs) -> Result<Outcome, Error> {
    let v = match Relation::parse(&a.rel, a.eps)? {
        Relation::Exact(kind) => {
            let v = check_relation(&a.norm, kind, &a.x, &a.y, a.common.tol)?;
            json!({
                "relation": kind.name(),
                "holds": v.holds,
                "defect": v.defect,
                "threshold": v.threshold,
            })
        }
        Relation::Approx(rel) => {
            let holds = check_approx(&a.norm, rel, &a.x, &a.y)?;
            let min = if a.x.is_zero() || a.y.is_zero() {
                Value::Null
            } else {
                json!(min_epsilon(&a.norm, &a.x, &a.y, rel.kind)?.value)
            };
            json!({
                "relation": rel.kind.name(),
                "eps": rel.eps.value(),
                "holds": holds,
                "min_epsilon": min,
            })
        }
    };
    Ok(Outcome::ok(render(v, a.common.format)?))
}

fn ortho_set(a: OrthoSetArgs) -> Result<Outcome, Error> {
    let set = ortho_set_2d(&a.norm, &a.probe, a.rel, a.steps, a.common.tol)?;
    Ok(Outcome::ok(match a.common.format {
        Format::Json => to_json(&set),
        Format::Csv => set.to_csv(&a.norm, std::f64::consts::TAU / a.steps as f64),
    }))
}

fn operator(a: OperatorArgs) -> Result<Outcome, Error> {
    let codomain = a.codomain_norm.unwrap_or_else(|| a.norm.clone());
    let t = LinearMapSpec::parse(&a.matrix, a.norm, codomain)?;
    let b = operator_bounds(&t, a.budget, a.seed)?;
    let fit = match fit_similarity_from_bounds(&b) {
        Ok(p) => json!(p),
        Err(Error::NotSimilarityCandidate) => Value::Null,
        Err(e) => return Err(e),
    };
    if a.common.format == Format::Csv {
        let v = json!({
            "op_norm": b.op_norm.value,
            "op_norm_method": b.op_norm.method.to_string(),
            "min_modulus": b.min_modulus.value,
            "min_modulus_method": b.min_modulus.method.to_string(),
            "lambda": fit.get("lambda"),
            "phi1": fit.get("phi1"),
            "phi2": fit.get("phi2"),
        });
        return Ok(Outcome::ok(flat_csv(&v)?));
    }
    Ok(Outcome::ok(to_json(&json!({
        "map": t,
        "op_norm": b.op_norm,
        "min_modulus": b.min_modulus,
        "similarity": fit,
    }))))
}

fn theta_cmd(a: ThetaArgs) -> Result<Outcome, Error> {
    let t = theta(a.delta, a.eps, a.phi1, a.phi2)?;
    let corollary = if a.eps == 0.0 {
        json!(corollary_theta(a.delta, a.phi1, a.phi2)?.value)
    } else {
        Value::Null
    };
    let v = json!({
        "theta": t.value,
        "vacuous": t.vacuous,
        "identity_residual": t.identity_residual,
        "corollary_theta": corollary,
    });
    Ok(Outcome::ok(render(v, a.common.format)?))
}

fn verify(a: VerifyArgs) -> Result<Outcome, Error> {
    if a.common.format == Format::Csv {
        return Err(Error::Precondition("verify-theorem reports are JSON only"));
    }
    if !(a.lambda.is_finite() && a.lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: a.lambda,
            constraint: "lambda must be finite and > 0",
        });
    }
    let u = match &a.matrix {
        Some(m) => LinearMapSpec::parse(m, a.norm.clone(), a.norm.clone())?,
        None => {
            let r = random_rotation(a.dim, a.seed)?;
            let scaled = r.into_iter().map(|row| row.into_iter().map(|v| a.lambda * v).collect()).collect();
            LinearMapSpec::new(scaled, a.norm.clone(), a.norm.clone())?
        }
    };
    let ub = operator_bounds(&u, orthokit::operator_analysis::DEFAULT_BUDGET, a.seed)?;
    let fit = fit_similarity_from_bounds(&ub)?;
    let p = perturb_similarity(&u, a.eps, a.seed)?;
    let th = theta(a.delta, a.eps, fit.phi1, fit.phi2)?;
    let mut out = json!({
        "u": u,
        "t": p.map,
        "perturbation_ratio": p.achieved_ratio,
        "similarity": fit,
        "delta": a.delta,
        "eps": a.eps,
        "theta": th.value,
        "vacuous": th.vacuous,
    });
    let target = a.theta.unwrap_or(th.value);
    if th.vacuous && a.theta.is_none() {
        let o = out.as_object_mut().expect("object");
        o.insert("trials".into(), json!(0));
        o.insert("violations".into(), json!(0));
        o.insert("worst_defect".into(), Value::Null);
        o.insert("witnesses".into(), json!([]));
        o.insert("flags".into(), json!(["vacuous_theta"]));
        return Ok(Outcome::ok(to_json(&out)));
    }
    let report = verify_preservation(&p.map, a.delta, target, a.trials, a.seed, a.common.tol)?;
    let code = if report.violations > 0 { 3 } else { 0 };
    if let (Some(o), Value::Object(r)) = (out.as_object_mut(), json!(report)) {
        o.extend(r);
    }
    Ok(Outcome {
        body: to_json(&out),
        code,
    })
}

fn search(a: SearchArgs) -> Result<Outcome, Error> {
    if a.common.format == Format::Csv {
        return Err(Error::Precondition("search results are JSON only"));
    }
    let cfg = SearchConfig {
        dim: a.dim,
        unit_sphere: a.unit_sphere,
        trials: a.trials,
        seed: a.seed,
        tol: a.common.tol,
    };
    let w = find_counterexample(&a.norm, a.from, a.to, &cfg)?;
    let code = if w.is_some() { 2 } else { 0 };
    let v = json!({
        "from": a.from,
        "to": a.to,
        "trials": a.trials,
        "witness": w,
    });
    Ok(Outcome {
        body: to_json(&v),
        code,
    })
}

fn defect(a: DefectArgs) -> Result<Outcome, Error> {
    let v = if a.rel == "parallelogram" {
        json!({
            "relation": "parallelogram",
            "defect": parallelogram_defect(&a.norm, &a.x, &a.y)?,
        })
    } else {
        let kind: ApproxRelationKind = a.rel.parse()?;
        let m = min_epsilon(&a.norm, &a.x, &a.y, kind)?;
        let (lo, hi) = reverse_triangle_bounds(&a.norm, &a.x, &a.y)?;
        json!({
            "relation": kind.name(),
            "min_epsilon": m.value,
            "saturated": m.saturated,
            "reverse_triangle_lower": lo,
            "reverse_triangle_upper": hi,
        })
    };
    Ok(Outcome::ok(render(v, a.common.format)?))
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Check(a) => check(a),
        Command::OrthoSet(a) => ortho_set(a),
        Command::Operator(a) => operator(a),
        Command::Theta(a) => theta_cmd(a),
        Command::VerifyTheorem(a) => verify(a),
        Command::Search(a) => search(a),
        Command::Defect(a) => defect(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.body);
            if !o.body.ends_with('\n') {
                println!();
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
