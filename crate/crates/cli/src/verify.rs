//! Built-in oracle suite: AD Jacobian against finite differences, a
//! manufactured-solution convergence study and stochastic Galerkin against
//! spectral projection.

use std::f64::consts::PI;
use std::sync::Arc;

use embedded_fem::analysis::{newton_solve, NewtonConfig, SolveError};
use embedded_fem::discretization::Region;
use embedded_fem::physics::{
    DirichletBc, Geometry, Material, MaterialTable, Model, ModelConfig, PointFn, PSI, TEMP,
};
use embedded_fem::quadrature::gauss_legendre;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64, detail: String) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail,
        }
    }
}

/// Random state with the Dirichlet values imposed; `psi` in `[0, 0.5]`, `T` in `[0, 1]`.
pub fn random_state(model: &Model, rng: &mut StdRng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..model.num_dofs())
        .map(|i| {
            if i % 2 == PSI {
                rng.gen_range(0.0..0.5)
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    model.dirichlet().impose(&mut x);
    x
}

/// Largest row-relative difference `max_j |J_ij - D_ij| / max_j |D_ij|` between
/// the assembled Jacobian and central differences of the residual.
pub fn jacobian_error(model: &mut Model, x: &[f64]) -> Result<f64, SolveError> {
    let n = x.len();
    let jac = model.jacobian(x)?.jac;
    let mut fd = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = model.residual(&xp)?;
        xp[j] = x[j] - h;
        let fm = model.residual(&xp)?;
        xp[j] = x[j];
        for i in 0..n {
            fd[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let mut worst: f64 = 0.0;
    for (i, row) in fd.iter().enumerate() {
        let scale = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let err = row
            .iter()
            .enumerate()
            .fold(0.0f64, |a, (j, v)| a.max((jac.get(i, j) - v).abs()));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

pub fn jacobian_check(config: &ModelConfig, states: usize, seed: u64) -> Result<Check, SolveError> {
    let mut model = Model::new(config.clone())?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let x = random_state(&model, &mut rng);
        worst = worst.max(jacobian_error(&mut model, &x)?);
    }
    Ok(Check::at_most(
        "jacobian_vs_fd",
        worst,
        1e-6,
        format!("{states} random states, {} dofs", model.num_dofs()),
    ))
}

fn mms_exact(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

/// Unit square, `kappa = 1`, `v = (1, 0)`, no potential, forcing from
/// `T = sin(pi x) sin(pi y)`.
pub fn mms_config(n: usize) -> ModelConfig {
    let m = Material {
        sigma0: 1.0,
        kappa: 1.0,
        velocity: [1.0, 0.0],
        beta: 0.0,
        t0: 0.0,
    };
    let forcing =
        |x: f64, y: f64| 2.0 * PI * PI * mms_exact(x, y) - PI * (PI * x).cos() * (PI * y).sin();
    ModelConfig {
        geometry: Geometry::Rectangle {
            lx: 1.0,
            ly: 1.0,
            nx: n,
            ny: n,
            region: Region::Conductor,
        },
        materials: MaterialTable {
            conductor: m,
            pad: m,
            slider: m,
        },
        bcs: vec![
            DirichletBc::constant("boundary", PSI, 0.0),
            DirichletBc::constant("boundary", TEMP, 0.0),
        ],
        forcing: Some(PointFn(Arc::new(forcing))),
        ..ModelConfig::demo()
    }
}

/// L2 error of the discrete temperature on the `n x n` unit-square grid.
pub fn mms_error(n: usize, newton: &NewtonConfig) -> Result<f64, SolveError> {
    let mut model = Model::new(mms_config(n))?;
    let x0 = model.initial_guess();
    let x = newton_solve(&mut model, &x0, newton)?.x;
    let (pts, wts) = gauss_legendre(4);
    let h = 1.0 / n as f64;
    let t = |i: usize, j: usize| x[2 * (j * (n + 1) + i) + TEMP];
    let mut err = 0.0;
    for j in 0..n {
        for i in 0..n {
            for (a, wa) in pts.iter().zip(&wts) {
                for (b, wb) in pts.iter().zip(&wts) {
                    let (s, r) = (0.5 * (a + 1.0), 0.5 * (b + 1.0));
                    let uh = (1.0 - s) * (1.0 - r) * t(i, j)
                        + s * (1.0 - r) * t(i + 1, j)
                        + s * r * t(i + 1, j + 1)
                        + (1.0 - s) * r * t(i, j + 1);
                    let e = uh - mms_exact((i as f64 + s) * h, (j as f64 + r) * h);
                    err += wa * wb * 0.25 * h * h * e * e;
                }
            }
        }
    }
    Ok(err.sqrt())
}

/// Observed orders between successive grids must lie within 0.15 of 2.
pub fn mms_check(sizes: &[usize], newton: &NewtonConfig) -> Result<Check, SolveError> {
    let errors = sizes
        .iter()
        .map(|&n| mms_error(n, newton))
        .collect::<Result<Vec<_>, _>>()?;
    let orders: Vec<f64> = errors
        .windows(2)
        .zip(sizes.windows(2))
        .map(|(e, s)| (e[0] / e[1]).ln() / (s[1] as f64 / s[0] as f64).ln())
        .collect();
    let worst = orders.iter().fold(0.0f64, |a, o| a.max((o - 2.0).abs()));
    let worst = if orders.is_empty() {
        f64::INFINITY
    } else {
        worst
    };
    Ok(Check::at_most(
        "mms_order",
        worst,
        0.15,
        format!("grids {sizes:?}, errors {errors:?}, orders {orders:?}"),
    ))
}

/// One check per chaos coefficient, relative to the projection value.
pub fn sg_checks(sg: &[f64], nisp: &[f64]) -> Vec<Check> {
    sg.iter()
        .zip(nisp)
        .enumerate()
        .map(|(k, (s, p))| {
            let rel = (s - p).abs() / p.abs();
            Check::at_most(
                format!("sg_vs_nisp_c{k}"),
                rel,
                1e-3,
                format!("sg {s:.10e}, projection {p:.10e}"),
            )
        })
        .collect()
}

pub fn table_csv(checks: &[Check]) -> String {
    let mut s = String::from("check,value,tolerance,passed,detail\n");
    for c in checks {
        s.push_str(&format!(
            "{},{:e},{:e},{},\"{}\"\n",
            c.name,
            c.value,
            c.tolerance,
            c.passed,
            c.detail.replace('"', "'")
        ));
    }
    s
}
