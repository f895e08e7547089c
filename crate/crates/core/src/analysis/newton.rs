use super::linear::{norm, Factorization, GmresConfig, LinearSolverKind};
use super::SolveError;
use crate::assembly::CsrMatrix;
use crate::physics::{Model, NUM_EQS, PSI};

/// Anything Newton can drive.
pub trait NonlinearSystem {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>, SolveError>;
    fn residual_and_jacobian(&mut self, x: &[f64]) -> Result<(Vec<f64>, CsrMatrix), SolveError>;
}

impl NonlinearSystem for Model {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>, SolveError> {
        Ok(Model::residual(self, x)?)
    }

    fn residual_and_jacobian(&mut self, x: &[f64]) -> Result<(Vec<f64>, CsrMatrix), SolveError> {
        let out = self.jacobian(x)?;
        Ok((out.f, out.jac))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub linear: LinearSolverKind,
    pub gmres: GmresConfig,
    /// Step halvings allowed when a full step does not reduce `|f|`; 0 takes full steps.
    pub max_backtracks: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-14,
            max_iters: 25,
            linear: LinearSolverKind::Auto,
            gmres: GmresConfig::default(),
            max_backtracks: 10,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.gmres.tol > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.gmres.restart == 0 {
            return Err("GMRES restart must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    /// Residual 2-norm before each iteration and after the last one.
    pub history: Vec<f64>,
}

impl NewtonResult {
    pub fn iterations(&self) -> usize {
        self.history.len() - 1
    }

    pub fn final_norm(&self) -> f64 {
        *self.history.last().expect("history holds the initial norm")
    }
}

pub fn newton_solve(
    system: &mut dyn NonlinearSystem,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonResult, SolveError> {
    let mut x = x0.to_vec();
    let mut f = system.residual(&x)?;
    let f0 = norm(&f);
    let mut history = vec![f0];
    let done = |r: f64| r <= cfg.abs_tol || r <= cfg.rel_tol * f0;
    while !done(*history.last().unwrap()) {
        if history.len() > cfg.max_iters {
            return Err(SolveError::MaxIterations {
                iterations: cfg.max_iters,
                norm: *history.last().unwrap(),
            });
        }
        let (_, jac) = system.residual_and_jacobian(&x)?;
        let dx = Factorization::new(&jac, cfg.linear, cfg.gmres)?.solve(&f)?;
        let current = *history.last().unwrap();
        let mut lambda = 1.0;
        let mut step = 0;
        let r = loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi - lambda * d).collect();
            let outcome = system.residual(&trial);
            let ok = match &outcome {
                Ok(ft) => {
                    let rt = norm(ft);
                    rt.is_finite()
                        && (cfg.max_backtracks == 0 || rt <= (1.0 - 1e-4 * lambda) * current)
                }
                Err(_) => false,
            };
            if ok {
                f = outcome?;
                x = trial;
                break norm(&f);
            }
            if step == cfg.max_backtracks {
                return match outcome {
                    Err(e) if cfg.max_backtracks == 0 => Err(e),
                    Ok(_) if cfg.max_backtracks == 0 => Err(SolveError::Diverged),
                    _ => Err(SolveError::LineSearch {
                        iteration: history.len() - 1,
                        norm: current,
                    }),
                };
            }
            step += 1;
            lambda *= 0.5;
        };
        if step > 0 {
            log::debug!("newton step damped by {lambda}");
        }
        log::debug!("newton iteration {}: |f| = {r:.6e}", history.len());
        history.push(r);
    }
    Ok(NewtonResult { x, history })
}

/// Dirichlet values plus the potential solved with the temperature held at
/// its boundary values. The potential equation is linear once the
/// temperature is frozen, so one restricted Newton step solves it exactly.
/// Starting from zero potential instead lets Newton wander onto the
/// nonphysical high-temperature branch where the conductivity vanishes.
pub fn initial_state(model: &mut Model, cfg: &NewtonConfig) -> Result<Vec<f64>, SolveError> {
    let mut x = model.initial_guess();
    let out = model.jacobian(&x)?;
    let (mut f, mut jac) = (out.f, out.jac);
    for dof in 0..x.len() {
        if dof % NUM_EQS != PSI {
            jac.set_row_identity(dof);
            f[dof] = 0.0;
        }
    }
    let dx = Factorization::new(&jac, cfg.linear, cfg.gmres)?.solve(&f)?;
    for (xi, d) in x.iter_mut().zip(&dx) {
        *xi -= d;
    }
    Ok(x)
}

/// Convergence order estimates `log(r[k+1]/r[k]) / log(r[k]/r[k-1])` over the history.
pub fn order_estimates(history: &[f64]) -> Vec<f64> {
    history
        .windows(3)
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect()
}
