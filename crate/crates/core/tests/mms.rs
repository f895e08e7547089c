use std::f64::consts::PI;
use std::sync::Arc;

use embedded_fem::analysis::{newton_solve, NewtonConfig};
use embedded_fem::discretization::Region;
use embedded_fem::physics::*;
use embedded_fem::quadrature::gauss_legendre;

fn exact(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

/// `-lap T - v . grad T` for `v = (1, 0)`, matching the residual's transport sign.
fn forcing(x: f64, y: f64) -> f64 {
    2.0 * PI * PI * exact(x, y) - PI * (PI * x).cos() * (PI * y).sin()
}

fn config(n: usize) -> ModelConfig {
    let m = Material {
        sigma0: 1.0,
        kappa: 1.0,
        velocity: [1.0, 0.0],
        beta: 0.0,
        t0: 0.0,
    };
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

/// L2 error of the bilinear interpolant on the uniform `n x n` grid, 4x4 Gauss per cell.
fn l2_error(n: usize, x: &[f64]) -> f64 {
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
                    let e = uh - exact((i as f64 + s) * h, (j as f64 + r) * h);
                    err += wa * wb * 0.25 * h * h * e * e;
                }
            }
        }
    }
    err.sqrt()
}

#[test]
fn heat_equation_converges_at_second_order() {
    let errors: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let mut m = Model::new(config(n)).unwrap();
            let x0 = m.initial_guess();
            let r = newton_solve(&mut m, &x0, &NewtonConfig::default()).unwrap();
            assert!(r.x.iter().step_by(2).all(|&psi| psi == 0.0));
            l2_error(n, &r.x)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.15, "{errors:?} order {order}");
    }
}
