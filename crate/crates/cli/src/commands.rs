use anyhow::{anyhow, bail, ensure, Context, Result};
use rayon::prelude::*;

use qlb_core::certifier::{certify_lower_bound, certify_trial, sweep_function, CertifiedBound, SweepSummary};
use qlb_core::moments::{
    claim2_bruteforce, expected_trace_moment_exhaustive, mc_sample, moment_scale, trace_moment,
    PartitionSpec,
};
use qlb_core::seed::child_seed;
use qlb_core::transforms::{binomial_sum, format_bits, parse_bits};
use qlb_core::vandam::{choose_t, simulate_exact, simulate_sampled, success_probability_closed_form};
use qlb_core::{
    BooleanFunction, CertifyOptions, Family, MomentReport, NormOptions, OperatorMode, TruncatedOperator,
};

use crate::config::*;
use crate::output::{ResultRow, Value};

/// Rows to write, plus diagnostics for standard error. A `failure` is
/// reported after the rows are written and makes the exit status nonzero.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub notes: Vec<String>,
    pub failure: Option<String>,
}

pub fn run(command: &Command) -> Result<RunOutput> {
    ensure!(command.output().threads >= 1, "--threads must be at least 1");
    match command {
        Command::Vandam(a) => vandam(a),
        Command::Norm(a) => norm(a),
        Command::Certify(a) => certify(a),
        Command::Moments(a) => moments_cmd(a),
        Command::Claim1Sweep(a) => claim1(a),
        Command::Claim2Verify(a) => claim2(a),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| anyhow!("--seed is required for {what}"))
}

fn parse_family(name: &str) -> Result<Family> {
    Ok(name.parse::<Family>()?)
}

fn mode_of(args: &ModeArgs) -> Option<OperatorMode> {
    if args.dense {
        Some(OperatorMode::Dense)
    } else if args.matrix_free {
        Some(OperatorMode::MatrixFree)
    } else {
        None
    }
}

fn mode_name(mode: Option<OperatorMode>) -> &'static str {
    match mode {
        None => "auto",
        Some(OperatorMode::Dense) => "dense",
        Some(OperatorMode::MatrixFree) => "matrix_free",
    }
}

fn check_solver(s: &SolverArgs) -> Result<()> {
    ensure!(s.tol > 0.0, "--tol must be positive");
    ensure!(s.max_iter >= 1, "--max-iter must be at least 1");
    Ok(())
}

/// Resolves the function flags into a function and a descriptor.
fn resolve_function(args: &FunctionArgs, n: Option<u32>, seed: Option<u64>) -> Result<(BooleanFunction, String)> {
    if let Some(path) = &args.function_file {
        let f = BooleanFunction::read_truth_table(path).with_context(|| format!("reading {}", path.display()))?;
        if let Some(n) = n {
            ensure!(n == f.n(), "--n {n} disagrees with n={} in {}", f.n(), path.display());
        }
        return Ok((f, format!("file:{}", path.display())));
    }
    let n = n.ok_or_else(|| anyhow!("--n is required unless --function-file is given"))?;
    if let Some(name) = &args.family {
        let fam = parse_family(name)?;
        return Ok((BooleanFunction::from_family(fam, n)?, fam.name().to_string()));
    }
    let seed = require_seed(seed, "a uniformly random function")?;
    Ok((BooleanFunction::sample_uniform(n, seed)?, "uniform".to_string()))
}

fn vandam(a: &VandamArgs) -> Result<RunOutput> {
    let (len, x) = parse_bits(&a.x)?;
    ensure!(len == a.n, "--x has {len} bits but --n is {}", a.n);
    if let Some(eps) = a.eps {
        ensure!(eps > 0.0 && eps < 1.0, "--eps must lie in (0, 1)");
    }
    let choice = a.eps.map(|eps| choose_t(a.n, eps)).transpose()?;
    let t = match (a.t, choice) {
        (Some(t), _) => t,
        (None, Some(c)) => c.exact,
        (None, None) => bail!("give --t or --eps"),
    };
    let (outcome, seed) = if a.exact {
        (simulate_exact(a.n, t, x)?, a.seed)
    } else {
        ensure!(a.shots >= 1, "--shots must be at least 1");
        let seed = require_seed(a.seed, "sampled interrogation")?;
        (simulate_sampled(a.n, t, x, a.shots, seed)?, Some(seed))
    };
    let row = ResultRow::new("vandam")
        .with("n", a.n)
        .with("t", t)
        .with("eps", a.eps)
        .with("x", format_bits(x, a.n))
        .with("mode", if a.exact { "exact" } else { "sampled" })
        .with("shots", if a.exact { 0 } else { a.shots })
        .with("seed", seed)
        .with("queries", outcome.queries)
        .with("success_probability", outcome.success_probability)
        .with("closed_form", success_probability_closed_form(a.n, t)?)
        .with("recovered_fraction", outcome.recovered_fraction())
        .with("reference_t", choice.map(|c| c.reference));
    Ok(RunOutput {
        rows: vec![row],
        ..Default::default()
    })
}

fn norm(a: &NormArgs) -> Result<RunOutput> {
    check_solver(&a.solver)?;
    let (f, descriptor) = resolve_function(&a.function, a.n, a.seed)?;
    let n = f.n();
    let ts: Vec<u32> = match a.t {
        Some(t) => {
            ensure!(t <= n, "--t {t} exceeds n = {n}");
            vec![t]
        }
        None => (0..=n).collect(),
    };
    let mode = mode_of(&a.mode);
    let mut out = RunOutput::default();
    for t in ts {
        let op = match mode {
            Some(OperatorMode::Dense) => TruncatedOperator::dense(&f, t)?,
            Some(OperatorMode::MatrixFree) => TruncatedOperator::matrix_free(&f, t)?,
            None => TruncatedOperator::auto(&f, t)?,
        };
        let opts = NormOptions {
            tol: a.solver.tol,
            max_iter: a.solver.max_iter,
            seed: child_seed(a.seed.unwrap_or(0), u64::from(t)),
        };
        let est = op.spectral_norm(&opts)?;
        if !est.converged {
            out.failure = Some(format!("power iteration did not converge at T = {t}"));
        }
        out.rows.push(
            ResultRow::new("norm")
                .with("function", descriptor.as_str())
                .with("n", n)
                .with("t", t)
                .with("seed", a.seed)
                .with("tol", a.solver.tol)
                .with("max_iter", a.solver.max_iter)
                .with("mode", mode_name(mode))
                .with("b", op.dim())
                .with("method", est.method.name())
                .with("norm", est.value)
                .with("residual", est.residual)
                .with("iterations", est.iterations)
                .with("converged", est.converged),
        );
    }
    Ok(out)
}

fn certify_row(
    a: &CertifyArgs,
    trial: Option<u64>,
    seed: Option<u64>,
    n: u32,
    descriptor: &str,
    result: &qlb_core::Result<CertifiedBound>,
) -> ResultRow {
    let row = ResultRow::new("certify")
        .with("function", descriptor)
        .with("trial", trial)
        .with("seed", seed)
        .with("n", n)
        .with("eps", a.eps)
        .with("tol", a.solver.tol)
        .with("max_iter", a.solver.max_iter)
        .with("mode", mode_name(mode_of(&a.mode)))
        .with("search", if a.binary_search { "binary" } else { "scan" });
    match result {
        Ok(c) => row
            .with("lower_bound_t", c.lower_bound_t)
            .with("status", c.status.name())
            .with("upper_bound_t", c.upper_bound_t)
            .with("b_at_bound", c.b_at_bound)
            .with("log2_b_at_bound", c.log2_b_at_bound)
            .with("entropy_exponent_at_bound", c.entropy_exponent_at_bound)
            .with("evidence_t", Value::IntList(c.evidence.iter().map(|e| i128::from(e.t)).collect()))
            .with("norms", Value::FloatList(c.evidence.iter().map(|e| e.norm).collect()))
            .with(
                "methods",
                c.evidence.iter().map(|e| e.method.name()).collect::<Vec<_>>().join(";"),
            )
            .with("error", Value::Null),
        Err(e) => row
            .with("lower_bound_t", Value::Null)
            .with("status", "failed")
            .with("upper_bound_t", Value::Null)
            .with("b_at_bound", Value::Null)
            .with("log2_b_at_bound", Value::Null)
            .with("entropy_exponent_at_bound", Value::Null)
            .with("evidence_t", Value::IntList(Vec::new()))
            .with("norms", Value::FloatList(Vec::new()))
            .with("methods", "")
            .with("error", e.to_string()),
    }
}

fn certify(a: &CertifyArgs) -> Result<RunOutput> {
    check_solver(&a.solver)?;
    ensure!(a.eps > 0.0 && a.eps < 0.5, "--eps must lie in (0, 1/2)");
    let opts = CertifyOptions {
        tol: a.solver.tol,
        max_iter: a.solver.max_iter,
        seed: a.seed.unwrap_or(0),
        mode: mode_of(&a.mode),
        binary_search: a.binary_search,
        ..Default::default()
    };
    if a.function.family.is_some() || a.function.function_file.is_some() {
        ensure!(a.include_family.is_none(), "--include-family applies to random sweeps only");
        let (f, descriptor) = resolve_function(&a.function, a.n, a.seed)?;
        let result = certify_lower_bound(&f, &descriptor, a.eps, &opts);
        let row = certify_row(a, None, a.seed, f.n(), &descriptor, &result);
        result?;
        return Ok(RunOutput {
            rows: vec![row],
            ..Default::default()
        });
    }
    let n = a.n.ok_or_else(|| anyhow!("--n is required"))?;
    let seed = require_seed(a.seed, "a random certification sweep")?;
    ensure!(a.trials >= 1, "--trials must be at least 1");
    let inject = a.include_family.as_deref().map(parse_family).transpose()?;
    let results: Vec<_> = pool(a.output.threads)?.install(|| {
        (0..a.trials)
            .into_par_iter()
            .map(|i| {
                let (_, descriptor, trial_seed) = sweep_function(n, seed, i, inject)?;
                Ok((descriptor, trial_seed, certify_trial(n, a.eps, seed, i, inject, &opts)))
            })
            .collect::<qlb_core::Result<Vec<_>>>()
    })?;
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, (descriptor, trial_seed, res))| certify_row(a, Some(i as u64), Some(*trial_seed), n, descriptor, res))
        .collect();
    let ok: Vec<&CertifiedBound> = results.iter().filter_map(|(_, _, r)| r.as_ref().ok()).collect();
    let summary = SweepSummary::from_bounds(n, &ok, results.len() - ok.len());
    let note = format!(
        "summary: n={} trials={} failed={} certified={} lower_bound_t min={} median={} max={} fraction>=floor(n/4)={}",
        summary.n,
        summary.completed,
        summary.failed,
        summary.certified,
        summary.min,
        summary.median,
        summary.max,
        summary.fraction_at_least_quarter
    );
    Ok(RunOutput {
        rows,
        notes: vec![note],
        failure: None,
    })
}

fn moment_row(rep: &MomentReport, descriptor: &str, seed: Option<u64>) -> Result<ResultRow> {
    let scale = moment_scale(rep.n, rep.t, rep.k)?;
    let b = rep.b as f64;
    Ok(ResultRow::new("moments")
        .with("method", rep.method.name())
        .with("function", descriptor)
        .with("n", rep.n)
        .with("t", rep.t)
        .with("k", rep.k)
        .with("trials", rep.trials)
        .with("seed", seed)
        .with("b", rep.b)
        .with("value", rep.value)
        .with("exact", rep.exact.map(|r| r.to_string()))
        .with("stderr", rep.stderr)
        .with("scale", scale)
        .with("bound_ratio", rep.bound_ratio)
        .with(
            "closed_form_k1",
            (rep.k == 1).then(|| b * b / 2f64.powi(rep.n as i32)),
        ))
}

fn moments_cmd(a: &MomentsArgs) -> Result<RunOutput> {
    ensure!(a.k >= 1, "--k must be at least 1");
    let row = match a.method {
        MomentsMethodArg::Dense => {
            let (f, descriptor) = resolve_function(&a.function, a.n, a.seed)?;
            moment_row(&trace_moment(&f, a.t, a.k)?, &descriptor, a.seed)?
        }
        MomentsMethodArg::Exhaustive => {
            let n = a.n.ok_or_else(|| anyhow!("--n is required"))?;
            moment_row(&expected_trace_moment_exhaustive(n, a.t, a.k)?, "all", None)?
        }
        MomentsMethodArg::Mc => {
            let n = a.n.ok_or_else(|| anyhow!("--n is required"))?;
            let seed = require_seed(a.seed, "Monte Carlo moments")?;
            ensure!(a.trials >= 2, "--trials must be at least 2");
            let samples = pool(a.output.threads)?.install(|| {
                (0..a.trials)
                    .into_par_iter()
                    .map(|i| mc_sample(n, a.t, a.k, seed, i))
                    .collect::<qlb_core::Result<Vec<f64>>>()
            })?;
            moment_row(&MomentReport::from_samples(n, a.t, a.k, &samples)?, "uniform", Some(seed))?
        }
    };
    Ok(RunOutput {
        rows: vec![row],
        ..Default::default()
    })
}

struct TrialNorm {
    norm: f64,
    residual: f64,
    converged: bool,
    method: &'static str,
}

fn trial_norm(f: &BooleanFunction, t: u32, mode: Option<OperatorMode>, opts: &NormOptions) -> qlb_core::Result<TrialNorm> {
    let op = match mode {
        Some(OperatorMode::Dense) => TruncatedOperator::dense(f, t)?,
        Some(OperatorMode::MatrixFree) => TruncatedOperator::matrix_free(f, t)?,
        None => TruncatedOperator::auto(f, t)?,
    };
    let est = op.spectral_norm(opts)?;
    Ok(TrialNorm {
        norm: est.value,
        residual: est.residual,
        converged: est.converged,
        method: est.method.name(),
    })
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        c if c % 2 == 1 => sorted[c / 2],
        c => (sorted[c / 2 - 1] + sorted[c / 2]) / 2.0,
    }
}

fn claim1(a: &Claim1Args) -> Result<RunOutput> {
    check_solver(&a.solver)?;
    ensure!(a.t_rule > 0.0 && a.t_rule <= 0.5, "--t-rule must lie in (0, 1/2]");
    ensure!(a.eps > 0.0 && a.eps < 0.5, "--eps must lie in (0, 1/2)");
    ensure!(a.trials >= 1, "--trials must be at least 1");
    let seed = require_seed(a.seed, "claim1-sweep")?;
    let inject = a.include_family.as_deref().map(parse_family).transpose()?;
    let mode = Some(mode_of(&a.mode).unwrap_or(OperatorMode::MatrixFree));
    let threshold = 0.5 - a.eps;
    let workers = pool(a.output.threads)?;
    let mut out = RunOutput::default();
    for &n in &a.ns {
        ensure!((1..=qlb_core::transforms::MAX_BITS).contains(&n), "n = {n} outside 1..=26");
        let t = (a.t_rule * f64::from(n)).floor() as u32;
        let b = binomial_sum(n, t)?;
        let reference = (f64::from(n) * b as f64 / 2f64.powi(n as i32)).sqrt();
        let n_seed = child_seed(seed, u64::from(n));
        let base = |function: &str, trials: u64| {
            ResultRow::new("claim1-sweep")
                .with("function", function)
                .with("n", n)
                .with("t", t)
                .with("t_rule", a.t_rule)
                .with("trials", trials)
                .with("eps", a.eps)
                .with("seed", seed)
                .with("tol", a.solver.tol)
                .with("max_iter", a.solver.max_iter)
                .with("mode", mode_name(mode))
                .with("b", b)
                .with("reference_scale", reference)
        };
        let trials: Vec<qlb_core::Result<TrialNorm>> = workers.install(|| {
            (0..a.trials)
                .into_par_iter()
                .map(|i| {
                    let (f, _, trial_seed) = sweep_function(n, n_seed, i, None)?;
                    let opts = NormOptions {
                        tol: a.solver.tol,
                        max_iter: a.solver.max_iter,
                        seed: trial_seed,
                    };
                    trial_norm(&f, t, mode, &opts)
                })
                .collect()
        });
        let failed = trials.iter().filter(|r| r.is_err()).count();
        let ok: Vec<&TrialNorm> = trials.iter().filter_map(|r| r.as_ref().ok()).collect();
        let mut norms: Vec<f64> = ok.iter().map(|r| r.norm).collect();
        norms.sort_by(f64::total_cmp);
        let med = median(&norms);
        let refuting = ok
            .iter()
            .filter(|r| r.norm + a.solver.tol.max(r.residual) < threshold)
            .count();
        let method = ok.first().map_or("none", |r| r.method);
        for err in trials.iter().filter_map(|r| r.as_ref().err()) {
            out.notes.push(format!("n={n}: trial failed: {err}"));
        }
        out.rows.push(
            base("uniform", a.trials)
                .with("method", method)
                .with("median_norm", med)
                .with("max_norm", norms.last().copied())
                .with("ratio", med / reference)
                .with("nonconverged", ok.iter().filter(|r| !r.converged).count())
                .with("failed", failed)
                .with("fraction_refuting", refuting as f64 / ok.len().max(1) as f64),
        );
        if let Some(fam) = inject {
            let f = BooleanFunction::from_family(fam, n)?;
            let opts = NormOptions {
                tol: a.solver.tol,
                max_iter: a.solver.max_iter,
                seed: n_seed,
            };
            let r = trial_norm(&f, t, mode, &opts)?;
            let refutes = r.norm + a.solver.tol.max(r.residual) < threshold;
            out.rows.push(
                base(fam.name(), 1)
                    .with("method", r.method)
                    .with("median_norm", r.norm)
                    .with("max_norm", r.norm)
                    .with("ratio", r.norm / reference)
                    .with("nonconverged", usize::from(!r.converged))
                    .with("failed", 0usize)
                    .with("fraction_refuting", if refutes { 1.0 } else { 0.0 }),
            );
        }
    }
    Ok(out)
}

fn claim2(a: &Claim2Args) -> Result<RunOutput> {
    let spec: PartitionSpec = match (&a.parts, a.m) {
        (Some(p), _) => p.parse()?,
        (None, Some(m)) => PartitionSpec::whole(m)?,
        (None, None) => bail!("give --parts or --m"),
    };
    let res = claim2_bruteforce(a.n, a.t, &spec)?;
    let row = ResultRow::new("claim2-verify")
        .with("n", a.n)
        .with("t", a.t)
        .with("m", spec.m())
        .with("r", spec.r())
        .with("parts", spec.to_string())
        .with("all_parts_even", spec.all_parts_even())
        .with("b", res.b)
        .with("work", res.work)
        .with("sum", res.sum)
        .with("bound_value", res.bound_value)
        .with("ratio", res.ratio());
    Ok(RunOutput {
        rows: vec![row],
        ..Default::default()
    })
}
