use crate::config::{check_operator, ExperimentConfig, SolverKind, SolverParams, SolverPlan};
use crate::CliError;
use lrk_core::krylov::{gmres, lr_fgmres, lr_flsqr, lsqr, rs_lr_gmres, SolveOptions};
use lrk_core::nnr::{flexible_nnrp, irn_nnrp, svt, Discrepancy, FlexibleInner, IrnInner, Monitor, StepSize, Variant};
use lrk_core::problems::pgm::write_pgm16;
use lrk_core::problems::{export_spectrum, TestProblem};
use lrk_core::{unvec, SolveReport, StopReason};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Cross-check tolerance on `|projected − true|` residuals, scaled by
/// `max(1, ‖b‖)`.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed_override: Option<u64>,
    /// Upper bound on concurrently running solvers; `None` reads
    /// `LRK_THREADS` and falls back to the rayon default.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solver: String,
    pub min_rel_error: Option<f64>,
    /// 1-based iteration attaining `min_rel_error`.
    pub best_iter: Option<usize>,
    pub iterations: usize,
    pub final_residual: Option<f64>,
    pub stop_reason: StopReason,
    /// Largest projected-vs-true residual gap, in cross-check mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual_mismatch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: lrk_core::problems::ProblemSpec,
    pub rows: usize,
    pub cols: usize,
    pub noise_norm: f64,
    /// Keyed by solver label.
    pub solvers: BTreeMap<String, SolverSummary>,
}

/// Apply command-line overrides to a parsed config.
pub fn resolve(mut config: ExperimentConfig, opts: &RunOptions) -> ExperimentConfig {
    if let Some(seed) = opts.seed_override {
        config.problem = config.problem.with_seed(seed);
    }
    if let Some(out) = &opts.out {
        config.output_dir = out.clone();
    }
    config
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn thread_cap(opts: &RunOptions) -> Result<Option<usize>, CliError> {
    if let Some(t) = opts.threads {
        return Ok(Some(t.max(1)));
    }
    match std::env::var("LRK_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Some(t)),
            _ => Err(CliError::Config(format!("LRK_THREADS: expected a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Validate, build the problem, run every solver and write all artifacts.
///
/// Solver failures do not stop the other solvers; the summary lists the
/// ones that finished and the first failure is returned.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let config = resolve(config.clone(), opts);
    let plans = config.plan()?;
    let cap = thread_cap(opts)?;
    let problem = config
        .problem
        .build()
        .map_err(|e| CliError::Config(format!("problem: {e}")))?;
    check_operator(&plans, problem.op.rows(), problem.op.cols())?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cap {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<(String, SolverSummary), CliError>> = pool.install(|| {
        plans
            .par_iter()
            .map(|plan| run_one(plan, &config, &problem).map(|s| (plan.label.clone(), s)))
            .collect()
    });

    let mut summary = RunSummary {
        problem: config.problem.clone(),
        rows: problem.op.rows(),
        cols: problem.op.cols(),
        noise_norm: problem.noise_norm(),
        solvers: BTreeMap::new(),
    };
    let mut first_err = None;
    for r in results {
        match r {
            Ok((label, s)) => {
                summary.solvers.insert(label, s);
            }
            Err(e) => {
                log::error!("{e}");
                first_err.get_or_insert(e);
            }
        }
    }
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

fn solve(plan: &SolverPlan, config: &ExperimentConfig, problem: &TestProblem) -> lrk_core::Result<SolveReport> {
    let op = problem.op.as_ref();
    let b = &problem.b;
    let x_exact = problem.x_exact.as_slice();
    let discrepancy = config.discrepancy.then(|| Discrepancy {
        epsilon: problem.noise_norm(),
        theta: config.theta,
    });
    let options = |max_iter: usize, rule| {
        let mut o = SolveOptions::new(max_iter).with_exact(x_exact).with_lambda_rule(rule);
        if let Some(d) = discrepancy {
            o = o.with_discrepancy(d);
        }
        if config.cross_check_residuals {
            o = o.cross_checked();
        }
        o
    };
    match (&plan.params, plan.kind) {
        (SolverParams::Krylov { max_iter, lambda_rule }, SolverKind::Gmres) => gmres(op, b, &options(*max_iter, *lambda_rule)),
        (SolverParams::Krylov { max_iter, lambda_rule }, _) => lsqr(op, b, &options(*max_iter, *lambda_rule)),
        (
            SolverParams::LowRank {
                max_iter,
                lambda_rule,
                ranks,
            },
            kind,
        ) => {
            let o = options(*max_iter, *lambda_rule);
            if kind == SolverKind::LrFgmres {
                lr_fgmres(op, b, *ranks, &o)
            } else {
                lr_flsqr(op, b, *ranks, &o)
            }
        }
        (SolverParams::Restarted { max_iter, restart }, _) => {
            rs_lr_gmres(op, b, *restart, &options(*max_iter, Default::default()))
        }
        (SolverParams::Svt { max_iter, tau, delta }, _) => svt(
            op,
            b,
            *tau,
            &StepSize::Constant(*delta),
            &options(*max_iter, Default::default()),
        ),
        (SolverParams::Nnr(nnr), kind) => {
            let mut nnr = nnr.clone();
            if nnr.epsilon.is_none() {
                nnr.epsilon = discrepancy.map(|d| d.epsilon);
            }
            let monitor = Monitor {
                x_exact: Some(x_exact),
                cross_check: config.cross_check_residuals,
                record_iterates: false,
            };
            match kind {
                SolverKind::IrnGmresNnrp => irn_nnrp(op, b, &nnr, IrnInner::Arnoldi, monitor),
                SolverKind::IrnLsqrNnrp => irn_nnrp(op, b, &nnr, IrnInner::Gkb, monitor),
                SolverKind::FgmresNnrp => flexible_nnrp(op, b, &nnr, FlexibleInner::Farnoldi, Variant::Iterate, monitor),
                SolverKind::FlsqrNnrp => flexible_nnrp(op, b, &nnr, FlexibleInner::Fgk, Variant::Iterate, monitor),
                SolverKind::FgmresNnrpV => flexible_nnrp(op, b, &nnr, FlexibleInner::Farnoldi, Variant::BasisV, monitor),
                SolverKind::FlsqrNnrpV => flexible_nnrp(op, b, &nnr, FlexibleInner::Fgk, Variant::BasisV, monitor),
                other => unreachable!("{} has no nnr parameters", other.name()),
            }
        }
    }
}

fn run_one(plan: &SolverPlan, config: &ExperimentConfig, problem: &TestProblem) -> Result<SolverSummary, CliError> {
    let fail = |reason: String| CliError::Solver {
        label: plan.label.clone(),
        reason,
    };
    log::info!("running {} ({})", plan.label, plan.kind.name());
    let report = solve(plan, config, problem).map_err(|e| fail(e.to_string()))?;
    write_artifacts(plan, config, problem, &report)?;

    let mismatch = report.max_residual_mismatch();
    if config.cross_check_residuals && plan.kind.has_residual_identity() {
        let bnorm = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tol = CROSS_CHECK_TOL * bnorm.max(1.0);
        if let Some(m) = mismatch.filter(|&m| !(m <= tol)) {
            return Err(fail(format!("projected and true residuals differ by {m:e} (tolerance {tol:e})")));
        }
    }
    Ok(SolverSummary {
        solver: plan.kind.name().to_string(),
        min_rel_error: report.min_rel_error(),
        best_iter: report.best.map(|b| b.0),
        iterations: report.iterations.len(),
        final_residual: report.final_residual(),
        stop_reason: report.stop_reason,
        max_residual_mismatch: mismatch,
    })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Per-iteration metrics with header `iter,outer,rel_error,residual,lambda_hat`.
pub fn iterations_csv(report: &SolveReport) -> String {
    let mut s = String::from("iter,outer,rel_error,residual,lambda_hat\n");
    for r in &report.iterations {
        let err = r.rel_error.map_or_else(|| "nan".to_string(), fmt_f64);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.iter,
            r.outer,
            err,
            fmt_f64(r.residual),
            fmt_f64(r.lambda_hat)
        );
    }
    s
}

/// Normalized spectrum at the end of outer cycle `outer`, with header
/// `iteration,index,sigma`.
pub fn spectrum_csv(report: &SolveReport, outer: usize) -> Option<String> {
    let spectrum = report.spectra.get(outer)?;
    let single_loop = report.spectra.len() == 1;
    let iteration = report
        .iterations
        .iter()
        .rev()
        .find(|r| single_loop || r.outer == outer)
        .map_or(0, |r| r.iter);
    let mut s = String::from("iteration,index,sigma\n");
    for (i, v) in export_spectrum(spectrum).into_iter().enumerate() {
        let _ = writeln!(s, "{iteration},{},{}", i + 1, fmt_f64(v));
    }
    Some(s)
}

fn write_artifacts(
    plan: &SolverPlan,
    config: &ExperimentConfig,
    problem: &TestProblem,
    report: &SolveReport,
) -> Result<(), CliError> {
    let dir = &config.output_dir;
    let io = |path: PathBuf| move |source| CliError::Io { path, source };
    let label = &plan.label;

    let path = dir.join(format!("{label}_iterations.csv"));
    fs::write(&path, iterations_csv(report)).map_err(io(path.clone()))?;

    if config.emit_spectra {
        for k in 0..report.spectra.len() {
            let path = dir.join(format!("{label}_spectrum_outer{k}.csv"));
            let text = spectrum_csv(report, k).expect("index in range");
            fs::write(&path, text).map_err(io(path.clone()))?;
        }
    }
    if config.emit_images {
        let path = dir.join(format!("{label}_best.pgm"));
        let img = unvec(&report.best_x, problem.side()).map_err(|e| CliError::Solver {
            label: label.clone(),
            reason: e.to_string(),
        })?;
        let file = fs::File::create(&path).map_err(io(path.clone()))?;
        write_pgm16(BufWriter::new(file), &img).map_err(|e| CliError::Solver {
            label: label.clone(),
            reason: format!("writing {}: {e}", path.display()),
        })?;
    }
    Ok(())
}
