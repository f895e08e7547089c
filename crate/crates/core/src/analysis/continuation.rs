use super::linear::norm;
use super::newton::{initial_state, newton_solve, NewtonConfig};
use super::SolveError;
use crate::morphing::{morph, ShapeParams};
use crate::physics::{max_temperature, Model, ModelError};

/// Maximum number of step halvings before a continuation run aborts.
pub const MAX_BISECTIONS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuationParam {
    /// A parameter registered in the model's library.
    Model(String),
    /// A one-parameter shape deflection; each step morphs the base mesh.
    Shape(ShapeParams),
}

impl ContinuationParam {
    pub fn apply(&self, model: &mut Model, p: f64) -> Result<(), SolveError> {
        match self {
            ContinuationParam::Model(name) => Ok(model
                .params_mut()
                .set_parameter(name, p)
                .map_err(ModelError::from)?),
            ContinuationParam::Shape(shape) => {
                let mesh = morph(model.base_mesh(), shape, &[p])?;
                Ok(model.set_mesh(mesh)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationPoint {
    pub p: f64,
    pub g: f64,
    pub argmax_dof: usize,
    pub newton_iterations: usize,
    pub residual_norm: f64,
    pub solution_norm: f64,
    pub bisections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub points: Vec<ContinuationPoint>,
    /// Set when a step failed after all bisections; `points` is then partial.
    pub failure: Option<String>,
    pub final_state: Option<Vec<f64>>,
}

/// Natural continuation over `steps` uniformly spaced values in `[a, b]`,
/// using the previous solution as predictor.
pub fn continuation(
    model: &mut Model,
    param: &ContinuationParam,
    range: (f64, f64),
    steps: usize,
    x0: Option<&[f64]>,
    cfg: &NewtonConfig,
) -> ContinuationResult {
    let values: Vec<f64> = match steps {
        0 => vec![],
        1 => vec![range.0],
        n => (0..n)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let mut x = x0.map(|v| v.to_vec());
    let mut prev: Option<f64> = None;
    let mut points = Vec::with_capacity(values.len());
    for &p in &values {
        let mut bisections = 0;
        let start = match x.clone() {
            Some(s) => s,
            None => match param
                .apply(model, p)
                .and_then(|_| initial_state(model, cfg))
            {
                Ok(s) => s,
                Err(e) => {
                    return ContinuationResult {
                        points,
                        failure: Some(format!("initial state at p = {p}: {e}")),
                        final_state: None,
                    }
                }
            },
        };
        let outcome = match prev {
            None => param
                .apply(model, p)
                .and_then(|_| corrector(model, &start, cfg)),
            Some(from) => advance(model, param, from, p, start, cfg, 0, &mut bisections),
        };
        match outcome {
            Ok((xs, iterations, res)) => {
                let m = max_temperature(&xs);
                log::info!(
                    "continuation p = {p}: g = {} after {iterations} Newton iterations",
                    m.g
                );
                points.push(ContinuationPoint {
                    p,
                    g: m.g,
                    argmax_dof: m.dof,
                    newton_iterations: iterations,
                    residual_norm: res,
                    solution_norm: norm(&xs),
                    bisections,
                });
                x = Some(xs);
                prev = Some(p);
            }
            Err(e) => {
                return ContinuationResult {
                    points,
                    failure: Some(format!("step to p = {p} failed: {e}")),
                    final_state: x,
                };
            }
        }
    }
    ContinuationResult {
        points,
        failure: None,
        final_state: x,
    }
}

fn corrector(
    model: &mut Model,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, usize, f64), SolveError> {
    let mut x = x0.to_vec();
    model.dirichlet().impose(&mut x);
    let r = newton_solve(model, &x, cfg)?;
    let (it, res) = (r.iterations(), r.final_norm());
    Ok((r.x, it, res))
}

#[allow(clippy::too_many_arguments)]
fn advance(
    model: &mut Model,
    param: &ContinuationParam,
    from: f64,
    to: f64,
    x: Vec<f64>,
    cfg: &NewtonConfig,
    depth: usize,
    bisections: &mut usize,
) -> Result<(Vec<f64>, usize, f64), SolveError> {
    let attempt = param
        .apply(model, to)
        .and_then(|_| corrector(model, &x, cfg));
    match attempt {
        Ok(r) => Ok(r),
        Err(e) if depth >= MAX_BISECTIONS => Err(e),
        Err(e) => {
            log::warn!("continuation step {from} -> {to} failed ({e}); halving");
            *bisections += 1;
            let mid = 0.5 * (from + to);
            let (xm, _, _) = advance(model, param, from, mid, x, cfg, depth + 1, bisections)?;
            advance(model, param, mid, to, xm, cfg, depth + 1, bisections)
        }
    }
}
