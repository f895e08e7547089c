use embedded_fem::analysis::*;
use embedded_fem::discretization::Region;
use embedded_fem::morphing::{mesh_sensitivity, morph, ShapeMode, ShapeParams};
use embedded_fem::physics::*;
use embedded_fem::scalars::{BasisData, Pce};

fn uniform(beta: f64, velocity: [f64; 2]) -> MaterialTable {
    let m = Material {
        sigma0: 1.0,
        kappa: 1.0,
        velocity,
        beta,
        t0: 0.0,
    };
    MaterialTable {
        conductor: m,
        pad: m,
        slider: m,
    }
}

/// Unit square of conductor, potential drop left to right, cold walls.
fn rect(n: usize, beta: f64) -> ModelConfig {
    ModelConfig {
        geometry: Geometry::Rectangle {
            lx: 1.0,
            ly: 1.0,
            nx: n,
            ny: n,
            region: Region::Conductor,
        },
        materials: uniform(beta, [0.0, 0.0]),
        bcs: vec![
            DirichletBc::constant("left", PSI, 0.0),
            DirichletBc::constant("right", PSI, 1.0),
            DirichletBc::constant("boundary", TEMP, 0.0),
        ],
        ..ModelConfig::demo()
    }
}

fn solve(m: &mut Model, cfg: &NewtonConfig) -> NewtonResult {
    let x0 = initial_state(m, cfg).unwrap();
    newton_solve(m, &x0, cfg).unwrap()
}

fn demo_beta(beta: f64) -> Model {
    let mut c = ModelConfig::demo();
    for r in Region::ALL {
        c.materials.get_mut(r).beta = beta;
    }
    Model::new(c).unwrap()
}

#[test]
fn heat_only_problem_takes_one_step() {
    let mut c = rect(8, 0.0);
    c.bcs[1] = DirichletBc::constant("right", PSI, 0.0);
    c.alpha = 3.0;
    let mut m = Model::new(c).unwrap();
    let x0 = m.initial_guess();
    let r = newton_solve(&mut m, &x0, &NewtonConfig::default()).unwrap();
    assert_eq!(r.iterations(), 1);
    assert!(r.final_norm() <= 1e-10);
}

#[test]
fn decoupled_demo_takes_one_step() {
    let mut m = demo_beta(0.0);
    let r = solve(&mut m, &NewtonConfig::default());
    assert_eq!(r.iterations(), 1, "{:?}", r.history);
    let tmax = max_temperature(&r.x).g;
    assert!((tmax - 2.8056).abs() < 1e-3, "{tmax}");
}

#[test]
fn coupled_demo_converges_quadratically() {
    let mut m = Model::demo().unwrap();
    let cfg = NewtonConfig {
        max_backtracks: 0,
        ..Default::default()
    };
    let r = solve(&mut m, &cfg);
    let orders = order_estimates(&r.history);
    assert!(r.iterations() >= 3, "{:?}", r.history);
    assert!(*orders.last().unwrap() >= 1.7, "{orders:?}");
    assert!(r.final_norm() <= 1e-10);
}

#[test]
fn exact_start_takes_no_steps() {
    let mut m = Model::demo().unwrap();
    let cfg = NewtonConfig::default();
    let r = solve(&mut m, &cfg);
    let again = newton_solve(&mut m, &r.x, &cfg).unwrap();
    assert_eq!(again.iterations(), 0);
    assert_eq!(again.x, r.x);
}

#[test]
fn iteration_cap_is_an_error() {
    let mut m = Model::demo().unwrap();
    let cfg = NewtonConfig {
        max_iters: 1,
        ..Default::default()
    };
    let x0 = initial_state(&mut m, &cfg).unwrap();
    assert!(matches!(
        newton_solve(&mut m, &x0, &cfg),
        Err(SolveError::MaxIterations { iterations: 1, .. })
    ));
}

#[test]
fn continuation_in_an_unused_parameter_is_flat() {
    // no pad elements, so the pad conductivity never enters the residual
    let mut m = Model::new(rect(6, 0.2)).unwrap();
    let r = continuation(
        &mut m,
        &ContinuationParam::Model(SIGMA_PAD.into()),
        (20.0, 50.0),
        2,
        None,
        &NewtonConfig::default(),
    );
    assert!(r.failure.is_none());
    assert_eq!(r.points.len(), 2);
    assert_eq!(r.points[0].g.to_bits(), r.points[1].g.to_bits());
}

#[test]
fn pad_conductivity_sweep_is_monotone() {
    let mut m = Model::demo().unwrap();
    let r = continuation(
        &mut m,
        &ContinuationParam::Model(SIGMA_PAD.into()),
        (20.0, 50.0),
        7,
        None,
        &NewtonConfig::default(),
    );
    assert!(r.failure.is_none(), "{:?}", r.failure);
    let ps: Vec<f64> = r.points.iter().map(|p| p.p).collect();
    assert_eq!(ps, [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]);
    let d: Vec<f64> = r
        .points
        .windows(2)
        .map(|w| w[1].g - w[0].g)
        .filter(|v| v.abs() > 1e-8)
        .collect();
    assert!(
        d.iter().all(|v| *v > 0.0) || d.iter().all(|v| *v < 0.0),
        "{d:?}"
    );
    // the 35 point matches an independent cold solve
    let mut fresh = Model::demo().unwrap();
    let g = max_temperature(&solve(&mut fresh, &NewtonConfig::default()).x).g;
    assert!((r.points[3].g - g).abs() < 1e-9);
}

#[test]
fn shape_continuation_morphs_each_step() {
    let mut m = Model::demo().unwrap();
    let shape = ShapeParams::new(ShapeMode::OneParam, -0.2, 0.2);
    let r = continuation(
        &mut m,
        &ContinuationParam::Shape(shape.clone()),
        (0.0, 0.1),
        3,
        None,
        &NewtonConfig::default(),
    );
    assert!(r.failure.is_none());
    assert!(r.points.windows(2).all(|w| w[1].g > w[0].g));
    let want = morph(m.base_mesh(), &shape, &[0.1]).unwrap();
    assert_eq!(m.mesh().coords(), want.coords());
}

#[test]
fn shape_tangent_matches_morph_differences() {
    let mut m = Model::demo().unwrap();
    let x = solve(&mut m, &NewtonConfig::default()).x;
    for mode in [ShapeMode::OneParam, ShapeMode::TwoParam] {
        let shape = ShapeParams::new(mode, -0.2, 0.2);
        let p: Vec<f64> = [0.04, -0.03][..mode.num_params()].to_vec();
        m.set_mesh(morph(m.base_mesh(), &shape, &p).unwrap())
            .unwrap();
        let xp = mesh_sensitivity(m.base_mesh(), &shape, &p).unwrap();
        let fp = m.shape_tangent(&x, &xp).unwrap().dfdp;
        for k in 0..p.len() {
            let h = 1e-5;
            let mut f = Vec::new();
            for s in [1.0, -1.0] {
                let mut q = p.clone();
                q[k] += s * h;
                m.set_mesh(morph(m.base_mesh(), &shape, &q).unwrap())
                    .unwrap();
                f.push(m.residual(&x).unwrap());
            }
            let fd: Vec<f64> = f[0]
                .iter()
                .zip(&f[1])
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let err = fd
                .iter()
                .zip(&fp[k])
                .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
            assert!(err <= 1e-5 * scale, "{mode:?} param {k}: {err} vs {scale}");
        }
    }
}

#[test]
fn reduced_gradient_matches_finite_differences() {
    let mut m = Model::demo().unwrap();
    let mut sp = ShapeProblem::new(
        &mut m,
        ShapeParams::new(ShapeMode::OneParam, -0.2, 0.2),
        NewtonConfig::default(),
    );
    for p in [0.05, -0.12] {
        let (_, grad) = sp.value_and_gradient(&[p]).unwrap();
        let h = 1e-4;
        let fd = (sp.value(&[p + h]).unwrap() - sp.value(&[p - h]).unwrap()) / (2.0 * h);
        assert!(
            (grad[0] - fd).abs() <= 1e-4 * fd.abs(),
            "p {p}: {} vs {fd}",
            grad[0]
        );
    }
}

#[test]
fn zero_mesh_sensitivity_gives_zero_gradient() {
    let mut m = Model::demo().unwrap();
    let x = solve(&mut m, &NewtonConfig::default()).x;
    let xp = vec![vec![0.0; 2 * m.mesh().num_nodes()]];
    let fp = m.shape_tangent(&x, &xp).unwrap().dfdp;
    let jac = m.jacobian(&x).unwrap().jac;
    let dgdx = max_temperature(&x).gradient(x.len());
    let g = reduced_gradient(
        |b| embedded_fem::analysis::linear::dense_solve(&jac.to_dense(), b),
        &fp,
        &dgdx,
    )
    .unwrap();
    assert_eq!(g[0], 0.0);
}

#[test]
fn degenerate_sg_is_the_deterministic_solve() {
    let cfg = NewtonConfig::default();
    let mut m = Model::demo().unwrap();
    let det = solve(&mut m, &cfg).x;
    let basis = BasisData::new(3);
    let pce = Pce::new([35.0, 0.0, 0.0, 0.0], &basis).unwrap();
    let r = sg_newton_solve(&mut m, &basis, &[(SIGMA_PAD, pce)], None, &cfg).unwrap();
    for (a, b) in r.x[0].iter().zip(&det) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
    assert!(r.x[1..].iter().flatten().all(|v| v.abs() <= 1e-12));
    // the expansion is cleared afterwards
    assert!(m.params().get_expansion(SIGMA_PAD).unwrap().is_none());
}

#[test]
fn sg_is_exact_for_a_source_linear_in_the_parameter() {
    let cfg = NewtonConfig::default();
    let mut c = rect(6, 0.0);
    c.bcs[1] = DirichletBc::constant("right", PSI, 0.0);
    let mut m = Model::new(c).unwrap();
    let basis = BasisData::new(2);
    let pce = Pce::new([2.0, 0.5, 0.0], &basis).unwrap();
    let r = sg_newton_solve(&mut m, &basis, &[(ALPHA, pce)], None, &cfg).unwrap();
    let centre = 2 * 24 + TEMP;
    let nisp = nisp_project(&basis, 4, |xi| {
        m.params_mut().set_parameter(ALPHA, 2.0 + 0.5 * xi).unwrap();
        Ok::<_, SolveError>(solve(&mut m, &cfg).x[centre])
    })
    .unwrap();
    for k in 0..3 {
        assert!(
            (r.x[k][centre] - nisp[k]).abs() <= 1e-12,
            "k {k}: {} vs {}",
            r.x[k][centre],
            nisp[k]
        );
    }
    assert!(nisp[0] > 0.0 && nisp[2].abs() < 1e-12);
}

#[test]
fn sg_converges_to_projection_with_degree() {
    // Truncation at degree 3 perturbs the top coefficient; degree 5 agrees on the first four.
    let cfg = NewtonConfig::default();
    let basis = BasisData::new(5);
    let pce = Pce::new([35.0, 15.0, 0.0, 0.0, 0.0, 0.0], &basis).unwrap();
    let mut m = Model::demo().unwrap();
    let r = sg_newton_solve(&mut m, &basis, &[(SIGMA_PAD, pce)], None, &cfg).unwrap();
    let dof = max_temperature(&r.x[0]).dof;
    let nisp = nisp_project(&basis, 8, |xi| {
        m.params_mut()
            .set_parameter(SIGMA_PAD, 35.0 + 15.0 * xi)
            .unwrap();
        Ok::<_, SolveError>(solve(&mut m, &cfg).x[dof])
    })
    .unwrap();
    for k in 0..4 {
        let rel = (r.x[k][dof] - nisp[k]).abs() / nisp[k].abs();
        assert!(rel <= 1e-3, "k {k}: {rel}");
    }
}
