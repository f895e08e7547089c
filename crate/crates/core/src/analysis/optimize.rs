//! Projected BFGS with backtracking Armijo line search on a box.

use super::linear::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    /// Stop when the projected gradient norm falls below this.
    pub tol: f64,
    /// Stop when an accepted step is shorter than this.
    pub min_step: f64,
    pub max_iters: usize,
    pub armijo_c1: f64,
    pub max_backtracks: usize,
    /// First trial step length as a fraction of the smallest box width.
    pub initial_step: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            tol: 1e-6,
            min_step: 1e-8,
            max_iters: 50,
            armijo_c1: 1e-4,
            max_backtracks: 30,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub p: Vec<f64>,
    pub g: f64,
    pub grad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub p: Vec<f64>,
    pub g: f64,
    pub grad: Vec<f64>,
    /// Accepted iterates, starting with the initial point.
    pub history: Vec<Iterate>,
    pub converged: bool,
    /// Why the run stopped early (line search or evaluation failure).
    pub failure: Option<String>,
}

impl OptimizeResult {
    pub fn accepted_steps(&self) -> usize {
        self.history.len() - 1
    }
}

fn clamp(p: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    p.iter()
        .zip(bounds)
        .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
        .collect()
}

fn projected_gradient(p: &[f64], grad: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    let shifted: Vec<f64> = p.iter().zip(grad).map(|(a, b)| a - b).collect();
    p.iter()
        .zip(clamp(&shifted, bounds))
        .map(|(a, b)| a - b)
        .collect()
}

/// Minimize `f` over the box. `f` returns the value and gradient.
pub fn optimize<E: std::fmt::Display>(
    f: &mut dyn FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
    p0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &OptimizeConfig,
) -> OptimizeResult {
    let n = p0.len();
    let mut p = clamp(p0, bounds);
    let (mut g, mut grad) = match f(&p) {
        Ok(v) => v,
        Err(e) => {
            return OptimizeResult {
                p: p.clone(),
                g: f64::NAN,
                grad: vec![f64::NAN; n],
                history: vec![],
                converged: false,
                failure: Some(format!("initial evaluation failed: {e}")),
            }
        }
    };
    let mut history = vec![Iterate {
        p: p.clone(),
        g,
        grad: grad.clone(),
    }];
    let width = bounds
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(f64::INFINITY, f64::min);
    let mut h = identity(n);
    let mut failure = None;
    let mut converged = false;
    for it in 0..cfg.max_iters {
        if norm(&projected_gradient(&p, &grad, bounds)) <= cfg.tol {
            converged = true;
            break;
        }
        // Free variables only: components pinned at a bound by the gradient are frozen.
        let free: Vec<bool> = (0..n)
            .map(|i| {
                !((p[i] <= bounds[i].0 && grad[i] > 0.0) || (p[i] >= bounds[i].1 && grad[i] < 0.0))
            })
            .collect();
        let mut d: Vec<f64> = (0..n)
            .map(|i| {
                if free[i] {
                    -(0..n)
                        .filter(|&j| free[j])
                        .map(|j| h[i][j] * grad[j])
                        .sum::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        if dot(&d, &grad) >= 0.0 {
            h = identity(n);
            d = (0..n)
                .map(|i| if free[i] { -grad[i] } else { 0.0 })
                .collect();
        }
        let mut alpha = if it == 0 {
            (cfg.initial_step * width / norm(&d)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = clamp(
                &p.iter()
                    .zip(&d)
                    .map(|(a, b)| a + alpha * b)
                    .collect::<Vec<_>>(),
                bounds,
            );
            let step: Vec<f64> = trial.iter().zip(&p).map(|(a, b)| a - b).collect();
            if norm(&step) < cfg.min_step {
                break;
            }
            match f(&trial) {
                Ok((gt, gradt)) if gt <= g + cfg.armijo_c1 * dot(&grad, &step) => {
                    accepted = Some((trial, gt, gradt, step));
                    break;
                }
                Ok(_) => {}
                Err(e) => last_err = Some(e.to_string()),
            }
            alpha *= 0.5;
        }
        let Some((pn, gn, gradn, s)) = accepted else {
            // No acceptable step longer than min_step: stationary to within the step tolerance.
            if let Some(e) = last_err {
                failure = Some(format!("evaluation failed during line search: {e}"));
            } else {
                converged = true;
            }
            break;
        };
        let y: Vec<f64> = gradn.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            bfgs_update(&mut h, &s, &y, sy);
        }
        let short = norm(&s) < cfg.min_step;
        p = pn;
        g = gn;
        grad = gradn;
        history.push(Iterate {
            p: p.clone(),
            g,
            grad: grad.clone(),
        });
        log::info!("optimizer iteration {}: g = {g}, p = {p:?}", it + 1);
        if short {
            converged = true;
            break;
        }
    }
    OptimizeResult {
        p,
        g,
        grad,
        history,
        converged,
        failure,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Inverse-Hessian update `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -r * (s[i] * hy[j] + hy[i] * s[j]) + (r * r * yhy + r) * s[i] * s[j];
        }
    }
}
