//! Coupled potential / heat model, its parameters and the max-temperature objective.

pub mod evaluators;
mod model;
mod params;

pub use model::{BcValue, DirichletBc, Geometry, Model, ModelConfig, ModelError, PointFn};
pub use params::{ParamAccessor, ParamCell, ParamError, ParameterLibrary};

use crate::discretization::Region;

pub const ALPHA: &str = "Alpha";
pub const BETA: &str = "Beta";
pub const SIGMA_PAD: &str = "SigmaPad";

/// Equation index of the potential and the temperature.
pub const PSI: usize = 0;
pub const TEMP: usize = 1;
pub const NUM_EQS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub sigma0: f64,
    pub kappa: f64,
    pub velocity: [f64; 2],
    pub beta: f64,
    pub t0: f64,
}

/// Per-region material constants. The pad `sigma0` here is only the initial
/// value of the `SigmaPad` parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    pub conductor: Material,
    pub pad: Material,
    pub slider: Material,
}

impl Default for MaterialTable {
    fn default() -> Self {
        let base = Material {
            sigma0: 100.0,
            kappa: 1.0,
            velocity: [0.0, 0.0],
            beta: 0.2,
            t0: 0.0,
        };
        MaterialTable {
            conductor: Material {
                velocity: [10.0, 0.0],
                ..base
            },
            pad: Material {
                sigma0: 35.0,
                ..base
            },
            slider: base,
        }
    }
}

impl MaterialTable {
    pub fn get(&self, r: Region) -> &Material {
        match r {
            Region::Conductor => &self.conductor,
            Region::Pad => &self.pad,
            Region::Slider => &self.slider,
        }
    }

    pub fn get_mut(&mut self, r: Region) -> &mut Material {
        match r {
            Region::Conductor => &mut self.conductor,
            Region::Pad => &mut self.pad,
            Region::Slider => &mut self.slider,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for r in Region::ALL {
            let m = self.get(r);
            if !(m.sigma0 > 0.0) || !(m.kappa > 0.0) {
                return Err(format!("{r}: sigma0 and kappa must be positive"));
            }
            if !m.beta.is_finite() || !m.t0.is_finite() || m.velocity.iter().any(|v| !v.is_finite())
            {
                return Err(format!("{r}: non-finite material constant"));
            }
        }
        Ok(())
    }
}

/// `g = max T` with the gradient `e_argmax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTemperature {
    pub g: f64,
    /// Global dof of the maximum; ties go to the lowest dof.
    pub dof: usize,
}

pub fn max_temperature(x: &[f64]) -> MaxTemperature {
    let mut best = MaxTemperature {
        g: f64::NEG_INFINITY,
        dof: TEMP,
    };
    for d in (TEMP..x.len()).step_by(NUM_EQS) {
        if x[d] > best.g {
            best = MaxTemperature { g: x[d], dof: d };
        }
    }
    best
}

impl MaxTemperature {
    pub fn gradient(&self, n: usize) -> Vec<f64> {
        let mut g = vec![0.0; n];
        g[self.dof] = 1.0;
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_picks_temperature_dofs() {
        // psi values are larger but ignored
        let x = [9.0, 1.0, 9.0, 5.0, 9.0, 3.0];
        let m = max_temperature(&x);
        assert_eq!((m.g, m.dof), (5.0, 3));
        assert_eq!(m.gradient(6), vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn ties_go_to_lowest_dof() {
        let m = max_temperature(&[0.0, 2.0, 0.0, 2.0, 0.0, 2.0]);
        assert_eq!(m.dof, 1);
    }

    #[test]
    fn non_max_perturbation_is_invisible() {
        let mut x = vec![0.0, 1.0, 0.0, 5.0, 0.0, 3.0];
        let g0 = max_temperature(&x).g;
        x[5] += 1.5;
        assert_eq!(max_temperature(&x).g, g0);
    }

    #[test]
    fn default_materials() {
        let m = MaterialTable::default();
        assert_eq!(m.conductor.velocity, [10.0, 0.0]);
        assert_eq!(m.slider.velocity, [0.0, 0.0]);
        assert_eq!(m.pad.sigma0, 35.0);
        assert!(m.validate().is_ok());
    }
}
