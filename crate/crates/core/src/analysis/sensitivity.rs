use super::linear::{dot, Factorization};
use super::newton::{initial_state, newton_solve, NewtonConfig, NewtonResult};
use super::SolveError;
use crate::morphing::{mesh_sensitivity, morph, ShapeParams};
use crate::physics::{max_temperature, MaxTemperature, Model};

/// Forward-sensitivity reduced gradient: solve `J S_k = f_p[k]` and return
/// `-dg/dx . S_k` for each column. The objective has no explicit `p` dependence.
pub fn reduced_gradient(
    mut solve: impl FnMut(&[f64]) -> Result<Vec<f64>, SolveError>,
    fp: &[Vec<f64>],
    dgdx: &[f64],
) -> Result<Vec<f64>, SolveError> {
    fp.iter().map(|col| Ok(-dot(dgdx, &solve(col)?))).collect()
}

/// `g(p) = max T(solve(morph(p)))` and its reduced gradient.
pub struct ShapeProblem<'a> {
    pub model: &'a mut Model,
    pub shape: ShapeParams,
    pub newton: NewtonConfig,
    warm: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ShapeSolve {
    pub newton: NewtonResult,
    pub objective: MaxTemperature,
}

impl<'a> ShapeProblem<'a> {
    pub fn new(model: &'a mut Model, shape: ShapeParams, newton: NewtonConfig) -> Self {
        ShapeProblem {
            model,
            shape,
            newton,
            warm: None,
        }
    }

    /// Morph from the base mesh and solve, warm-started from the last state.
    pub fn solve_at(&mut self, p: &[f64]) -> Result<ShapeSolve, SolveError> {
        let mesh = morph(self.model.base_mesh(), &self.shape, p)?;
        self.model.set_mesh(mesh)?;
        let mut x0 = match self.warm.clone() {
            Some(w) => w,
            None => initial_state(self.model, &self.newton)?,
        };
        self.model.dirichlet().impose(&mut x0);
        let newton = newton_solve(self.model, &x0, &self.newton)?;
        self.warm = Some(newton.x.clone());
        let objective = max_temperature(&newton.x);
        Ok(ShapeSolve { newton, objective })
    }

    pub fn value(&mut self, p: &[f64]) -> Result<f64, SolveError> {
        Ok(self.solve_at(p)?.objective.g)
    }

    /// `df/dp` from ShapeTangent assembly at a converged state on `morph(p)`.
    pub fn shape_residual_derivative(
        &mut self,
        p: &[f64],
        x: &[f64],
    ) -> Result<Vec<Vec<f64>>, SolveError> {
        let xp = mesh_sensitivity(self.model.base_mesh(), &self.shape, p)?;
        Ok(self.model.shape_tangent(x, &xp)?.dfdp)
    }

    pub fn value_and_gradient(&mut self, p: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
        let s = self.solve_at(p)?;
        let x = &s.newton.x;
        let fp = self.shape_residual_derivative(p, x)?;
        let jac = self.model.jacobian(x)?.jac;
        let fact = Factorization::new(&jac, self.newton.linear, self.newton.gmres)?;
        let dgdx = s.objective.gradient(x.len());
        let grad = reduced_gradient(|b| fact.solve(b), &fp, &dgdx)?;
        Ok((s.objective.g, grad))
    }
}
