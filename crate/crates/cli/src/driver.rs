//! Mode dispatch and artifact writing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use embedded_fem::analysis::{
    continuation, initial_state, newton_solve, nisp_project, optimize, sg_newton_solve,
    ContinuationParam, NewtonResult, ShapeProblem, SolveError,
};
use embedded_fem::discretization::io::{solution_csv, solution_vtk};
use embedded_fem::graph::EvalTag;
use embedded_fem::morphing::{morph, ShapeMode};
use embedded_fem::physics::{max_temperature, Model, ModelError};
use embedded_fem::scalars::{BasisData, Pce};
use serde::Serialize;
use thiserror::Error;

use crate::config::{Mode, RunConfig, UqSettings};
use crate::verify::{self, Check};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 1,
            RunError::Config(_) | RunError::Io(_) => 2,
        }
    }
}

impl From<SolveError> for RunError {
    fn from(e: SolveError) -> Self {
        RunError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dump_graph: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonSummary {
    pub iterations: usize,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub history: Vec<f64>,
}

impl From<&NewtonResult> for NewtonSummary {
    fn from(r: &NewtonResult) -> Self {
        NewtonSummary {
            iterations: r.iterations(),
            initial_norm: r.history[0],
            final_norm: r.final_norm(),
            history: r.history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationRow {
    pub p: f64,
    pub g: f64,
    pub argmax_dof: usize,
    pub newton_iterations: usize,
    pub residual_norm: f64,
    pub bisections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeSummary {
    pub p: Vec<f64>,
    pub g: f64,
    pub gradient: Vec<f64>,
    pub accepted_steps: usize,
    pub converged: bool,
    pub failure: Option<String>,
    /// Dense sweep over the bounds of a one-parameter problem.
    pub sweep: Option<SweepSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub spacing: f64,
    pub argmin: f64,
    pub g_min: f64,
    /// `|p* - argmin| <= spacing`
    pub brackets_optimum: bool,
    /// Sign of the optimal deflection: "upward", "downward", or "none" when
    /// `|p*|` is below `1e-6` of the bound interval.
    pub deflection: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UqSummary {
    pub parameter: String,
    pub degree: usize,
    pub dof: usize,
    pub sg_coefficients: Vec<f64>,
    pub nisp_coefficients: Option<Vec<f64>>,
    pub newton_history: Vec<f64>,
    pub gmres_iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: String,
    pub dofs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonSummary>,
    /// Maximum temperature of the final state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_dof: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuation: Option<Vec<ContinuationRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uq: Option<UqSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<Vec<Check>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl Summary {
    fn new(mode: Mode, dofs: usize) -> Summary {
        Summary {
            mode: mode.name().into(),
            dofs,
            newton: None,
            g: None,
            argmax_dof: None,
            continuation: None,
            optimize: None,
            uq: None,
            verify: None,
            failure: None,
        }
    }
}

struct Output<'a>(&'a Path);

impl Output<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.0.join(name);
        fs::write(&path, contents).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    }

    fn solution(&self, model: &Model, x: &[f64], title: &str) -> Result<(), RunError> {
        self.write("solution.csv", &solution_csv(model.mesh(), x))?;
        self.write("solution.vtk", &solution_vtk(model.mesh(), x, title))
    }
}

fn config_error(e: ModelError) -> RunError {
    RunError::Config(e.to_string())
}

/// Run the configured mode, writing artifacts and `summary.json` into the
/// output directory. The summary is written even when the run fails numerically.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<Summary, RunError> {
    let mut model = Model::new(cfg.model.clone()).map_err(config_error)?;
    let peclet = cfg.model.max_peclet(model.mesh());
    if peclet > 2.0 {
        log::warn!("element Peclet number {peclet:.2} exceeds 2; the unstabilized transport term may oscillate");
    }
    let referenced = match cfg.mode {
        Mode::Continuation => Some(&cfg.continuation.parameter),
        Mode::Uq => Some(&cfg.uq.parameter),
        _ => None,
    };
    if let Some(name) = referenced {
        let shape = cfg.mode == Mode::Continuation && name == "shape";
        if !shape && !model.params().contains(name) {
            return Err(RunError::Config(format!(
                "parameter {name:?} is not registered; known: {}",
                model.params().list().join(", ")
            )));
        }
    }
    fs::create_dir_all(&cfg.output)
        .map_err(|e| RunError::Io(format!("{}: {e}", cfg.output.display())))?;
    let out = Output(&cfg.output);
    if opts.dump_graph {
        for tag in EvalTag::ALL {
            let (adjacency, dot) = model.graph_dump(tag);
            out.write(&format!("graph_{tag}.txt"), &adjacency)?;
            out.write(&format!("graph_{tag}.dot"), &dot)?;
        }
    }
    let mut summary = Summary::new(cfg.mode, model.num_dofs());
    let result = match cfg.mode {
        Mode::Solve => solve_mode(cfg, &mut model, &out, &mut summary),
        Mode::Continuation => continuation_mode(cfg, &mut model, &out, &mut summary),
        Mode::Optimize => optimize_mode(cfg, &mut model, &out, &mut summary),
        Mode::Uq => uq_mode(cfg, &mut model, &out, &mut summary),
        Mode::Verify => verify_mode(cfg, &mut model, &out, &mut summary),
    };
    if let Err(e) = &result {
        summary.failure = Some(e.to_string());
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    out.write("summary.json", &json)?;
    result.map(|_| summary)
}

fn solve(model: &mut Model, cfg: &RunConfig) -> Result<NewtonResult, SolveError> {
    let x0 = initial_state(model, &cfg.newton)?;
    newton_solve(model, &x0, &cfg.newton)
}

fn history_csv(history: &[f64]) -> String {
    let mut s = String::from("iteration,residual_norm\n");
    for (i, r) in history.iter().enumerate() {
        let _ = writeln!(s, "{i},{r:e}");
    }
    s
}

fn solve_mode(
    cfg: &RunConfig,
    model: &mut Model,
    out: &Output,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let r = solve(model, cfg)?;
    let m = max_temperature(&r.x);
    summary.newton = Some((&r).into());
    summary.g = Some(m.g);
    summary.argmax_dof = Some(m.dof);
    out.write("convergence.csv", &history_csv(&r.history))?;
    out.solution(model, &r.x, "solve")
}

fn continuation_mode(
    cfg: &RunConfig,
    model: &mut Model,
    out: &Output,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let c = &cfg.continuation;
    let param = if c.parameter == "shape" {
        if cfg.shape.params.mode != ShapeMode::OneParam {
            return Err(RunError::Config(
                "shape continuation needs shape.params = 1".into(),
            ));
        }
        ContinuationParam::Shape(cfg.shape.params.clone())
    } else {
        ContinuationParam::Model(c.parameter.clone())
    };
    let r = continuation(model, &param, (c.start, c.end), c.steps, None, &cfg.newton);
    let rows: Vec<ContinuationRow> = r
        .points
        .iter()
        .map(|p| ContinuationRow {
            p: p.p,
            g: p.g,
            argmax_dof: p.argmax_dof,
            newton_iterations: p.newton_iterations,
            residual_norm: p.residual_norm,
            bisections: p.bisections,
        })
        .collect();
    let mut csv = String::from("p,g,argmax_dof,newton_iterations,residual_norm,bisections\n");
    for p in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{:e},{}",
            p.p, p.g, p.argmax_dof, p.newton_iterations, p.residual_norm, p.bisections
        );
    }
    out.write("continuation.csv", &csv)?;
    if let Some(last) = rows.last() {
        summary.g = Some(last.g);
        summary.argmax_dof = Some(last.argmax_dof);
    }
    summary.continuation = Some(rows);
    if let Some(x) = &r.final_state {
        out.solution(model, x, "continuation")?;
    }
    match r.failure {
        Some(f) => Err(RunError::Numerical(f)),
        None => Ok(()),
    }
}

fn optimize_mode(
    cfg: &RunConfig,
    model: &mut Model,
    out: &Output,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let shape = cfg.shape.params.clone();
    let bounds = shape.bounds.clone();
    let mut problem = ShapeProblem::new(model, shape.clone(), cfg.newton);
    let r = optimize(
        &mut |p: &[f64]| problem.value_and_gradient(p),
        &cfg.shape.initial,
        &bounds,
        &cfg.optimize.config,
    );
    let mut csv = String::from("iteration");
    for k in 0..cfg.shape.initial.len() {
        let _ = write!(csv, ",p{k}");
    }
    csv.push_str(",g");
    for k in 0..cfg.shape.initial.len() {
        let _ = write!(csv, ",dg_dp{k}");
    }
    csv.push('\n');
    for (i, it) in r.history.iter().enumerate() {
        let _ = write!(csv, "{i}");
        for v in it.p.iter().chain([&it.g]).chain(&it.grad) {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    out.write("optimizer.csv", &csv)?;

    let n = cfg.optimize.sweep_points;
    let sweep = if shape.mode == ShapeMode::OneParam && n >= 2 && r.failure.is_none() {
        let (lo, hi) = bounds[0];
        let c = continuation(
            problem.model,
            &ContinuationParam::Shape(shape.clone()),
            (lo, hi),
            n,
            None,
            &cfg.newton,
        );
        let mut csv = String::from("p,g\n");
        for p in &c.points {
            let _ = writeln!(csv, "{},{}", p.p, p.g);
        }
        out.write("sweep.csv", &csv)?;
        if let Some(f) = c.failure {
            return Err(RunError::Numerical(format!("sweep: {f}")));
        }
        let best = c
            .points
            .iter()
            .min_by(|a, b| a.g.total_cmp(&b.g))
            .expect("sweep has points");
        let spacing = (hi - lo) / (n - 1) as f64;
        Some(SweepSummary {
            points: n,
            spacing,
            argmin: best.p,
            g_min: best.g,
            brackets_optimum: (r.p[0] - best.p).abs() <= spacing * (1.0 + 1e-12),
            deflection: deflection_sign(r.p[0], hi - lo).into(),
        })
    } else {
        None
    };

    // final state at the optimum for the field output
    let state = problem.solve_at(&r.p);
    summary.optimize = Some(OptimizeSummary {
        p: r.p.clone(),
        g: r.g,
        gradient: r.grad.clone(),
        accepted_steps: r.accepted_steps(),
        converged: r.converged,
        failure: r.failure.clone(),
        sweep,
    });
    let s = state?;
    summary.newton = Some((&s.newton).into());
    summary.g = Some(s.objective.g);
    summary.argmax_dof = Some(s.objective.dof);
    let mesh = morph(problem.model.base_mesh(), &shape, &r.p).map_err(SolveError::from)?;
    problem
        .model
        .set_mesh(mesh)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    out.solution(problem.model, &s.newton.x, "optimum")?;
    match r.failure {
        Some(f) => Err(RunError::Numerical(f)),
        None => Ok(()),
    }
}

pub fn deflection_sign(p: f64, width: f64) -> &'static str {
    if p.abs() <= 1e-6 * width {
        "none"
    } else if p > 0.0 {
        "upward"
    } else {
        "downward"
    }
}

/// Stochastic Galerkin solve of `uq` plus the projection oracle on the
/// temperature dof where the mean solution peaks.
pub fn sg_and_nisp(
    model: &mut Model,
    uq: &UqSettings,
    newton: &embedded_fem::analysis::NewtonConfig,
) -> Result<(UqSummary, Vec<f64>), SolveError> {
    let basis: Arc<BasisData> = BasisData::new(uq.degree);
    let mut coeffs = uq.coeffs.clone();
    coeffs.resize(uq.degree + 1, 0.0);
    let pce = Pce::new(coeffs, &basis)
        .map_err(|e| SolveError::Model(ModelError::Config(e.to_string())))?;
    let nominal = model
        .params()
        .get_value(&uq.parameter)
        .map_err(ModelError::from)?;
    let r = sg_newton_solve(
        model,
        &basis,
        &[(uq.parameter.as_str(), pce.clone())],
        None,
        newton,
    )?;
    model.set_sg_basis(None);
    let dof = max_temperature(&r.x[0]).dof;
    let sg: Vec<f64> = r.x.iter().map(|v| v[dof]).collect();
    let nisp = if uq.nisp_order > 0 {
        let c = nisp_project(&basis, uq.nisp_order, |xi| {
            model
                .params_mut()
                .set_parameter(&uq.parameter, pce.evaluate(xi))
                .map_err(ModelError::from)?;
            let x0 = initial_state(model, newton)?;
            Ok::<_, SolveError>(newton_solve(model, &x0, newton)?.x[dof])
        });
        model
            .params_mut()
            .set_parameter(&uq.parameter, nominal)
            .map_err(ModelError::from)?;
        Some(c?)
    } else {
        None
    };
    let summary = UqSummary {
        parameter: uq.parameter.clone(),
        degree: uq.degree,
        dof,
        sg_coefficients: sg,
        nisp_coefficients: nisp,
        newton_history: r.history,
        gmres_iterations: r.gmres_iterations,
    };
    Ok((summary, r.x.into_iter().next().expect("mean block")))
}

fn uq_mode(
    cfg: &RunConfig,
    model: &mut Model,
    out: &Output,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let (uq, mean) = sg_and_nisp(model, &cfg.uq, &cfg.newton)?;
    let mut csv = String::from("k,sg,nisp,relative_difference\n");
    for (k, s) in uq.sg_coefficients.iter().enumerate() {
        match uq.nisp_coefficients.as_ref().map(|c| c[k]) {
            Some(p) => {
                let _ = writeln!(csv, "{k},{s},{p},{:e}", (s - p).abs() / p.abs());
            }
            None => {
                let _ = writeln!(csv, "{k},{s},,");
            }
        }
    }
    out.write("sg_coefficients.csv", &csv)?;
    out.write("convergence.csv", &history_csv(&uq.newton_history))?;
    out.solution(model, &mean, "stochastic Galerkin mean")?;
    summary.g = Some(uq.sg_coefficients[0]);
    summary.argmax_dof = Some(uq.dof);
    summary.uq = Some(uq);
    Ok(())
}

fn verify_mode(
    cfg: &RunConfig,
    model: &mut Model,
    out: &Output,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let v = &cfg.verify;
    let mut checks = vec![
        verify::jacobian_check(&cfg.model, v.fd_states, v.seed)?,
        verify::mms_check(&v.mms_sizes, &cfg.newton)?,
    ];
    let uq = UqSettings {
        nisp_order: cfg.uq.nisp_order.max(2 * cfg.uq.degree),
        ..cfg.uq.clone()
    };
    let (sg, _) = sg_and_nisp(model, &uq, &cfg.newton)?;
    // the criterion covers the first four coefficients; the top one of a
    // truncated expansion carries the truncation error
    let k = sg.sg_coefficients.len().min(4);
    checks.extend(verify::sg_checks(
        &sg.sg_coefficients[..k],
        sg.nisp_coefficients.as_deref().unwrap_or(&[]),
    ));
    out.write("verify.csv", &verify::table_csv(&checks))?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    summary.verify = Some(checks);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(RunError::Numerical(format!(
            "checks failed: {}",
            failed.join(", ")
        )))
    }
}
