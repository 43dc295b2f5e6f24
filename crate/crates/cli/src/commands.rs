use mixbound::boundary::{boundary_test, component_count, patterns_of_kind, BoundaryStatus, EntryDist, PatternKind};
use mixbound::em::{log_likelihood, run_restarts, DataMatrix, EmOptions};
use mixbound::exactla::determinant;
use mixbound::families::{
    greencurve_matrix, rectangle_family, rectangle_in_model, uab_closed_form_mle, uab_counts, uab_in_model, uab_matrix,
};
use mixbound::harness::{run_experiment, DataDist, ExperimentConfig, Mode};
use mixbound::par::Execution;
use mixbound::rank3cert::{nnrank3_membership, nonneg_rank3_factorize, Verdict as Membership};
use mixbound::scalar::parse_rational;
use mixbound::{Error, Matrix, Result, Scalar};
use serde_json::{json, Value};

use crate::output::{emit, emit_text, load, matrix_json, read, to_value, write, write_matrix_file, Loaded};
use crate::{
    DataArg, DistArg, EmArgs, ExperimentArgs, ExperimentKind, FactorizeArgs, FamilyCommand, KindArg, MatrixArgs,
    PatternArgs, Verdict,
};

fn verdict_of(member: bool) -> Verdict {
    if member {
        Verdict::Ok
    } else {
        Verdict::Negative
    }
}

fn exact_only(loaded: Loaded, what: &str) -> Result<(Matrix<mixbound::Rational>, Option<f64>)> {
    match loaded {
        Loaded::Exact { matrix, perturbation } => Ok((matrix, perturbation)),
        Loaded::Float(_) => Err(Error::Config(format!(
            "{what} needs exact input; pass --backend exact or --backend promote"
        ))),
    }
}

pub fn em(args: EmArgs) -> Result<Verdict> {
    let counts = match load(&args.input, None)? {
        Loaded::Exact { matrix, .. } => DataMatrix::from_rational(&matrix)?,
        Loaded::Float(m) => DataMatrix::new(m)?,
    };
    let opts = EmOptions {
        max_iter: args.iterations,
        tol: args.tol,
        crit_tol: args.crit_tol,
    };
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let restarts = run_restarts(&counts, args.r, args.seed, args.restarts, &opts, exec)?;
    let best = restarts.best_run();
    if let Some(path) = &args.estimate_out {
        write_matrix_file(path, &best.p_hat)?;
    }
    let logliks: Vec<f64> = restarts.runs.iter().map(|r| r.loglik).collect();
    emit(
        &args.common,
        json!({
            "estimate": matrix_json(&best.p_hat),
            "params": to_value(&best.params)?,
            "loglik": best.loglik,
            "iterations": best.iterations,
            "converged": best.converged,
            "residuals": {
                "fixed_point": [best.fixed_point_residual.0, best.fixed_point_residual.1],
                "pt_r": best.critical.pt_r,
                "r_pt": best.critical.r_pt,
            },
            "critical": best.critical.critical,
            "rank": best.critical.rank_p,
            "degenerate_components": best.degenerate,
            "seed": best.seed,
            "best_restart": restarts.best,
            "restart_logliks": logliks,
        }),
    )?;
    Ok(Verdict::Ok)
}

pub fn nnrank3(args: MatrixArgs) -> Result<Verdict> {
    let loaded = load(&args.input, args.backend)?;
    let backend = loaded.backend_name();
    let perturbation = loaded.perturbation();
    let decision = match &loaded {
        Loaded::Exact { matrix, .. } => nnrank3_membership(matrix)?,
        Loaded::Float(m) => nnrank3_membership(m)?,
    };
    let mut value = to_value(&decision)?;
    value["backend"] = json!(backend);
    value["promotion_perturbation"] = json!(perturbation);
    emit(&args.common, value)?;
    Ok(verdict_of(decision.verdict != Membership::Out))
}

pub fn factorize(args: FactorizeArgs) -> Result<Verdict> {
    let loaded = load(&args.matrix.input, args.matrix.backend)?;
    let backend = loaded.backend_name();
    let (p, perturbation) = exact_only(loaded, "factorize")?;
    match nonneg_rank3_factorize(&p) {
        Ok((a, b)) => {
            if let Some(path) = &args.a_out {
                write_matrix_file(path, &a)?;
            }
            if let Some(path) = &args.b_out {
                write_matrix_file(path, &b)?;
            }
            emit(
                &args.matrix.common,
                json!({
                    "verdict": "in",
                    "a": matrix_json(&a),
                    "b": matrix_json(&b),
                    "backend": backend,
                    "promotion_perturbation": perturbation,
                }),
            )?;
            Ok(Verdict::Ok)
        }
        Err(Error::Refused(message)) => {
            emit(
                &args.matrix.common,
                json!({ "verdict": "out", "message": message, "backend": backend }),
            )?;
            Ok(Verdict::Negative)
        }
        Err(e) => Err(e),
    }
}

pub fn boundary(args: MatrixArgs) -> Result<Verdict> {
    let loaded = load(&args.input, args.backend)?;
    let backend = loaded.backend_name();
    let (p, perturbation) = exact_only(loaded, "boundary classification")?;
    let c = boundary_test(&p)?;
    let mut value = to_value(&c)?;
    value["backend"] = json!(backend);
    value["promotion_perturbation"] = json!(perturbation);
    emit(&args.common, value)?;
    Ok(verdict_of(c.status == BoundaryStatus::Interior))
}

pub fn patterns(args: PatternArgs) -> Result<Verdict> {
    let count = component_count(args.m, args.n)?;
    let mut value = json!({
        "m": args.m,
        "n": args.n,
        "coordinate": count.coordinate.to_string(),
        "kind_a": count.kind_a.to_string(),
        "kind_b": count.kind_b.to_string(),
        "total": count.total.to_string(),
        "dimension": count.dimension,
    });
    if !args.count_only {
        let kinds: &[PatternKind] = match args.kind {
            KindArg::A => &[PatternKind::A],
            KindArg::B => &[PatternKind::B],
            KindArg::All => &[PatternKind::A, PatternKind::B],
        };
        let list: Vec<_> = kinds.iter().flat_map(|&k| patterns_of_kind(args.m, args.n, k)).collect();
        value["patterns"] = to_value(&list)?;
    }
    emit(&args.common, value)?;
    Ok(Verdict::Ok)
}

fn parse_param(text: &str, name: &str) -> Result<mixbound::Rational> {
    parse_rational(text.trim()).ok_or_else(|| Error::Config(format!("{name} = {text:?} is not a rational number")))
}

pub fn family(cmd: FamilyCommand) -> Result<Verdict> {
    match cmd {
        FamilyCommand::Uab { a, b, mle, common } => {
            let u = uab_matrix(a, b)?;
            let counts = uab_counts(a, b);
            let in_model = uab_in_model(a, b)?;
            let mut value = json!({
                "a": a,
                "b": b,
                "matrix": matrix_json(&counts),
                "in_model": in_model,
                "membership": to_value(&nnrank3_membership(&counts)?.verdict)?,
            });
            if mle {
                let sol = uab_closed_form_mle(a, b)?;
                let logliks: Vec<f64> = sol.matrices.iter().map(|p| log_likelihood(&u, p)).collect();
                let matrices: Vec<Value> = match &sol.exact {
                    Some(ex) => ex.matrices.iter().map(matrix_json).collect(),
                    None => sol.matrices.iter().map(matrix_json).collect(),
                };
                value["mle"] = json!({
                    "t": sol.t,
                    "t_exact": sol.exact.as_ref().map(|e| e.t.to_text()),
                    "t_interval": [sol.t_interval.lo.to_text(), sol.t_interval.hi.to_text()],
                    "t_residual": sol.t_residual,
                    "s": sol.s, "u": sol.u, "v": sol.v, "w": sol.w, "r": sol.r,
                    "matrices": matrices,
                    "logliks": logliks,
                });
            }
            emit(&common, value)?;
            Ok(verdict_of(in_model))
        }
        FamilyCommand::Rectangle { a, b, common } => {
            let (a, b) = (parse_param(&a, "a")?, parse_param(&b, "b")?);
            let p = rectangle_family(&a, &b)?;
            let predicted = rectangle_in_model(&a, &b)?;
            let decision = nnrank3_membership(&p)?;
            emit(
                &common,
                json!({
                    "a": a.to_text(),
                    "b": b.to_text(),
                    "matrix": matrix_json(&p),
                    "in_model": predicted,
                    "membership": to_value(&decision.verdict)?,
                }),
            )?;
            Ok(verdict_of(decision.verdict.is_member()))
        }
        FamilyCommand::Green { x, y, common } => {
            let exact = (parse_rational(x.trim()), parse_rational(y.trim()));
            let (value, member) = match exact {
                (Some(xq), Some(yq)) if !x.contains(['.', 'e', 'E']) && !y.contains(['.', 'e', 'E']) => {
                    let p = greencurve_matrix(&xq, &yq);
                    let decision = nnrank3_membership(&p)?;
                    let member = decision.verdict.is_member();
                    let mut v = json!({
                        "matrix": matrix_json(&p),
                        "determinant": determinant(&p)?.to_text(),
                        "membership": to_value(&decision)?,
                    });
                    if member && p.is_nonnegative(0.0) {
                        v["boundary"] = to_value(&boundary_test(&p)?)?;
                    }
                    (v, member)
                }
                _ => {
                    let parse = |s: &str, name: &str| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("{name} = {s:?} is not a number")))
                    };
                    let p = greencurve_matrix(&parse(&x, "x")?, &parse(&y, "y")?);
                    let decision = nnrank3_membership(&p)?;
                    let member = decision.verdict.is_member();
                    (
                        json!({
                            "matrix": matrix_json(&p),
                            "determinant": determinant(&p)?,
                            "membership": to_value(&decision)?,
                        }),
                        member,
                    )
                }
            };
            emit(&common, value)?;
            Ok(verdict_of(member))
        }
    }
}

pub fn experiment(args: ExperimentArgs) -> Result<Verdict> {
    let mut cfg: ExperimentConfig = match &args.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| Error::Config(format!("bad config: {e}")))?,
        None => ExperimentConfig::default(),
    };
    let dist = |d: DistArg| match d {
        DistArg::Height => EntryDist::RationalHeight { max: args.max },
        DistArg::Unit => EntryDist::UnitRational { max: args.max },
        DistArg::Integers => EntryDist::Integers { lo: 1, hi: 4 },
    };
    cfg.mode = match (args.kind, cfg.mode) {
        (ExperimentKind::Table1, Mode::Table1 { data, scale }) => Mode::Table1 {
            data: args.data.map_or(data, data_dist),
            scale,
        },
        (ExperimentKind::Table1, _) => Mode::Table1 {
            data: args.data.map_or(DataDist::default(), data_dist),
            scale: 1e6,
        },
        (ExperimentKind::Planted, Mode::Planted { t }) => Mode::Planted { t: args.t.unwrap_or(t) },
        (ExperimentKind::Planted, _) => Mode::Planted { t: args.t.unwrap_or(10) },
        (ExperimentKind::BoundaryFraction, Mode::BoundaryFraction { dist: d, pattern }) => Mode::BoundaryFraction {
            dist: args.dist.map_or(d, dist),
            pattern,
        },
        (ExperimentKind::BoundaryFraction, _) => Mode::boundary_fraction(args.dist.map_or(EntryDist::default(), dist)),
    };
    if args.full_scale {
        cfg = cfg.full_scale();
    }
    macro_rules! set {
        ($($field:ident <- $arg:expr),*) => { $(if let Some(v) = $arg { cfg.$field = v; })* };
    }
    set!(m <- args.m, n <- args.n, r <- args.r, num_matrices <- args.num_matrices, num_restarts <- args.restarts,
         max_iter <- args.iterations, tol <- args.tol, crit_tol <- args.crit_tol, polish_iter <- args.polish,
         seed <- args.seed);
    cfg.classify_flagged |= args.classify;
    if args.sequential {
        cfg.exec = Execution::Sequential;
    }
    let report = run_experiment(&cfg)?;
    if let Some(path) = &args.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write(path, &String::from_utf8_lossy(&buf))?;
    }
    emit_text(&args.common, &report.to_json()?)?;
    Ok(Verdict::Ok)
}

fn data_dist(d: DataArg) -> DataDist {
    match d {
        DataArg::Uniform => DataDist::UniformEntries,
        DataArg::Simplex => DataDist::Simplex,
    }
}
