use std::collections::BTreeMap;

use embedded_fem::assembly::Workset;
use embedded_fem::discretization::{Mesh, Region};
use embedded_fem::fields::{Dims, Extent, FieldKind, FieldTag};
use embedded_fem::graph::eval::{Jacobian, Residual, Tangent};
use embedded_fem::graph::{BuildContext, EvalType, EvaluatorGraph, GenericRegistrar, GraphError};
use embedded_fem::physics::evaluators::*;
use embedded_fem::physics::*;
use embedded_fem::scalars::Dual;
use std::sync::Arc;

const DIMS: Dims = Dims {
    cells: 2,
    nodes: 4,
    qps: 4,
    eqs: 2,
    dims: 2,
};

fn qp(name: &str) -> FieldTag {
    FieldTag::scalar(name, &[Extent::Cell, Extent::QuadPoint])
}

fn ws(region: Region, start: usize) -> Workset {
    Workset {
        index: 0,
        region,
        start,
        len: 2,
    }
}

/// A one-evaluator graph reading `T_q` from outside.
fn single<E: EvalType, R: GenericRegistrar>(
    r: &R,
    params: &mut ParameterLibrary,
    out: &str,
) -> EvaluatorGraph<E> {
    let mut ctx = BuildContext { params, dims: DIMS };
    let ev = r.build_for::<E>(&mut ctx).unwrap();
    EvaluatorGraph::build(vec![ev], &[qp(T_Q)], &[qp(out)], DIMS).unwrap()
}

fn library(alpha: f64, beta: f64, sigma_pad: f64) -> ParameterLibrary {
    let mut p = ParameterLibrary::new();
    p.register_parameter(ALPHA, alpha).unwrap();
    p.register_parameter(BETA, beta).unwrap();
    p.register_parameter(SIGMA_PAD, sigma_pad).unwrap();
    p
}

fn set_t<E: EvalType>(g: &mut EvaluatorGraph<E>, v: impl Fn(usize) -> E::S) {
    let s = g.slot(T_Q, FieldKind::Scalar).unwrap();
    for (i, t) in g
        .arena_mut()
        .scalar_mut(s)
        .data_mut()
        .iter_mut()
        .enumerate()
    {
        *t = v(i);
    }
}

fn read<E: EvalType>(g: &EvaluatorGraph<E>, name: &str) -> Vec<E::S> {
    let s = g.slot(name, FieldKind::Scalar).unwrap();
    g.arena().scalar(s).data().to_vec()
}

#[test]
fn source_term_values() {
    let mut params = library(1.0, 2.0, 35.0);
    let mut g = single::<Residual, _>(&SourceReg { forced: false }, &mut params, SOURCE);
    set_t(&mut g, |_| 3.0);
    g.execute(&ws(Region::Conductor, 0)).unwrap();
    assert!(read(&g, SOURCE).iter().all(|&s| s == 19.0));

    params.set_parameter(BETA, 0.0).unwrap();
    params.set_parameter(ALPHA, 2.0).unwrap();
    g.execute(&ws(Region::Conductor, 0)).unwrap();
    assert!(read(&g, SOURCE).iter().all(|&s| s == 2.0));
}

#[test]
fn source_term_parameter_tangent() {
    let mut params = library(1.0, 2.0, 35.0);
    let mut g = single::<Tangent, _>(&SourceReg { forced: false }, &mut params, SOURCE);
    params.seed_tangent(&[ALPHA, BETA]).unwrap();
    set_t(&mut g, |_| Dual::constant(3.0));
    g.execute(&ws(Region::Conductor, 0)).unwrap();
    for s in read(&g, SOURCE) {
        assert_eq!(*s.val(), 19.0);
        assert_eq!(s.dx(), &[1.0, 9.0]);
    }
}

fn pad_materials(beta: f64) -> Arc<MaterialTable> {
    let mut m = MaterialTable::default();
    m.pad.beta = beta;
    m.conductor.beta = beta;
    Arc::new(m)
}

#[test]
fn conductivity_values() {
    let mut params = library(0.0, 0.0, 35.0);
    let mut g = single::<Residual, _>(&ConductivityReg(pad_materials(0.1)), &mut params, SIGMA);
    set_t(&mut g, |_| 0.0);
    g.execute(&ws(Region::Pad, 0)).unwrap();
    assert!(read(&g, SIGMA).iter().all(|&s| s == 35.0));
    set_t(&mut g, |_| 10.0);
    g.execute(&ws(Region::Pad, 0)).unwrap();
    assert!(read(&g, SIGMA).iter().all(|&s| (s - 17.5).abs() < 1e-14));
    // the pad value follows the parameter
    params.set_parameter(SIGMA_PAD, 70.0).unwrap();
    g.execute(&ws(Region::Pad, 0)).unwrap();
    assert!(read(&g, SIGMA).iter().all(|&s| (s - 35.0).abs() < 1e-13));
    g.execute(&ws(Region::Conductor, 0)).unwrap();
    assert!(read(&g, SIGMA).iter().all(|&s| (s - 50.0).abs() < 1e-13));
}

#[test]
fn conductivity_temperature_derivative() {
    let mut params = library(0.0, 0.0, 35.0);
    let mut g = single::<Jacobian, _>(&ConductivityReg(pad_materials(0.1)), &mut params, SIGMA);
    set_t(&mut g, |_| Dual::variable(0.0, 0, 1));
    g.execute(&ws(Region::Conductor, 0)).unwrap();
    for s in read(&g, SIGMA) {
        assert_eq!(*s.val(), 100.0);
        assert!((s.dx()[0] + 100.0 * 0.1).abs() < 1e-12);
    }
}

#[test]
fn nonphysical_temperature_reports_element() {
    let mut params = library(0.0, 0.0, 35.0);
    let mut g = single::<Residual, _>(&ConductivityReg(pad_materials(0.1)), &mut params, SIGMA);
    set_t(&mut g, |i| if i >= 4 { -20.0 } else { 1.0 });
    match g.execute(&ws(Region::Pad, 40)) {
        Err(GraphError::Kernel { evaluator, source }) => {
            assert_eq!(evaluator, "Conductivity");
            assert_eq!(source.element, Some(41));
            assert!(source.message.contains("nonphysical"));
        }
        other => panic!("{other:?}"),
    }
}

// ---- whole-model checks on small meshes ----

fn material(sigma0: f64, kappa: f64, velocity: [f64; 2], beta: f64) -> Material {
    Material {
        sigma0,
        kappa,
        velocity,
        beta,
        t0: 0.0,
    }
}

fn uniform(m: Material) -> MaterialTable {
    MaterialTable {
        conductor: m,
        pad: m,
        slider: m,
    }
}

fn one_element(coords: [[f64; 2]; 4], materials: MaterialTable) -> Model {
    let mesh = Mesh::new(
        coords.to_vec(),
        vec![[0, 1, 2, 3]],
        vec![Region::Conductor],
        BTreeMap::new(),
    )
    .unwrap();
    let mut cfg = ModelConfig::demo();
    cfg.geometry = Geometry::Mesh(mesh);
    cfg.materials = materials;
    cfg.bcs.clear();
    Model::new(cfg).unwrap()
}

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Straight-line 2x2 Gauss evaluation on one bilinear quad: for each point,
/// `(phi, physical grad phi, |j| w)`.
fn oracle_points(x: &[[f64; 2]; 4]) -> Vec<([f64; 4], [[f64; 2]; 4], f64)> {
    let mut pts = Vec::new();
    for &eta in &GAUSS {
        for &xi in &GAUSS {
            let mut phi = [0.0; 4];
            let mut dref = [[0.0; 2]; 4];
            for i in 0..4 {
                let [a, b] = CORNERS[i];
                phi[i] = 0.25 * (1.0 + a * xi) * (1.0 + b * eta);
                dref[i] = [0.25 * a * (1.0 + b * eta), 0.25 * b * (1.0 + a * xi)];
            }
            let (mut j11, mut j12, mut j21, mut j22) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..4 {
                j11 += x[i][0] * dref[i][0];
                j12 += x[i][0] * dref[i][1];
                j21 += x[i][1] * dref[i][0];
                j22 += x[i][1] * dref[i][1];
            }
            let det = j11 * j22 - j12 * j21;
            let mut grad = [[0.0; 2]; 4];
            for i in 0..4 {
                let (gx, gy) = (dref[i][0], dref[i][1]);
                grad[i] = [(j22 * gx - j21 * gy) / det, (-j12 * gx + j11 * gy) / det];
            }
            pts.push((phi, grad, det));
        }
    }
    pts
}

const QUAD: [[f64; 2]; 4] = [[0.0, 0.0], [2.0, 0.2], [1.8, 1.5], [-0.1, 1.0]];

fn interleave(psi: [f64; 4], t: [f64; 4]) -> Vec<f64> {
    (0..4).flat_map(|i| [psi[i], t[i]]).collect()
}

#[test]
fn potential_residual_matches_element_stiffness() {
    let mut m = one_element(QUAD, uniform(material(1.0, 1.0, [0.0, 0.0], 0.0)));
    let psi = [0.3, -1.2, 0.7, 2.0];
    let f = m.residual(&interleave(psi, [0.0; 4])).unwrap();
    let mut k = [[0.0; 4]; 4];
    for (_, g, w) in oracle_points(&QUAD) {
        for i in 0..4 {
            for j in 0..4 {
                k[i][j] += (g[i][0] * g[j][0] + g[i][1] * g[j][1]) * w;
            }
        }
    }
    for i in 0..4 {
        let want: f64 = (0..4).map(|j| k[i][j] * psi[j]).sum();
        assert!(
            (f[2 * i] - want).abs() < 1e-13,
            "{i}: {} vs {want}",
            f[2 * i]
        );
    }
}

#[test]
fn linear_potential_is_discretely_harmonic() {
    let mut cfg = ModelConfig::demo();
    cfg.geometry = Geometry::Rectangle {
        lx: 1.0,
        ly: 1.0,
        nx: 4,
        ny: 4,
        region: Region::Slider,
    };
    cfg.bcs.clear();
    cfg.materials = uniform(material(1.0, 1.0, [0.0, 0.0], 0.0));
    let mut m = Model::new(cfg).unwrap();
    let x: Vec<f64> = m
        .mesh()
        .coords()
        .iter()
        .flat_map(|c| [0.4 * c[0] - 0.7 * c[1], 0.0])
        .collect();
    let f = m.residual(&x).unwrap();
    let interior = |n: usize| {
        let (i, j) = (n % 5, n / 5);
        (1..4).contains(&i) && (1..4).contains(&j)
    };
    for n in (0..25).filter(|&n| interior(n)) {
        assert!(f[2 * n].abs() < 1e-14, "{}", f[2 * n]);
    }
}

#[test]
fn joule_term_sign() {
    let g = 0.8;
    let (lx, ly) = (2.0, 0.5);
    let coords = [[0.0, 0.0], [lx, 0.0], [lx, ly], [0.0, ly]];
    let mut m = one_element(coords, uniform(material(1.0, 1.0, [0.0, 0.0], 0.0)));
    let psi = coords.map(|c| g * c[0]);
    let f = m.residual(&interleave(psi, [0.0; 4])).unwrap();
    for i in 0..4 {
        assert!(
            (f[2 * i + 1] + g * g * lx * ly / 4.0).abs() < 1e-14,
            "{}",
            f[2 * i + 1]
        );
    }
}

#[test]
fn heat_residual_zero_for_linear_temperature() {
    let mut cfg = ModelConfig::demo();
    cfg.geometry = Geometry::Rectangle {
        lx: 1.0,
        ly: 1.0,
        nx: 3,
        ny: 3,
        region: Region::Slider,
    };
    cfg.bcs.clear();
    let mut m = Model::new(cfg).unwrap();
    let x: Vec<f64> = m
        .mesh()
        .coords()
        .iter()
        .flat_map(|c| [0.0, 1.0 + c[0] + 2.0 * c[1]])
        .collect();
    let f = m.residual(&x).unwrap();
    for n in [5, 6, 9, 10] {
        assert!(f[2 * n + 1].abs() < 1e-13);
    }
}

/// Coupled weak form recomputed without the graph machinery.
fn oracle_residual(
    x: &[[f64; 2]; 4],
    m: &Material,
    alpha: f64,
    beta_s: f64,
    psi: [f64; 4],
    t: [f64; 4],
) -> Vec<f64> {
    let mut r = vec![0.0; 8];
    for (phi, g, w) in oracle_points(x) {
        let tq: f64 = (0..4).map(|i| phi[i] * t[i]).sum();
        let gp = [0, 1].map(|d| (0..4).map(|i| g[i][d] * psi[i]).sum::<f64>());
        let gt = [0, 1].map(|d| (0..4).map(|i| g[i][d] * t[i]).sum::<f64>());
        let sigma = m.sigma0 / (1.0 + m.beta * (tq - m.t0));
        let joule = sigma * (gp[0] * gp[0] + gp[1] * gp[1]);
        let source = alpha + beta_s * tq * tq;
        let conv = m.velocity[0] * gt[0] + m.velocity[1] * gt[1];
        for i in 0..4 {
            r[2 * i] += sigma * (gp[0] * g[i][0] + gp[1] * g[i][1]) * w;
            r[2 * i + 1] += (m.kappa * (gt[0] * g[i][0] + gt[1] * g[i][1])
                - conv * phi[i]
                - (joule + source) * phi[i])
                * w;
        }
    }
    r
}

#[test]
fn coupled_residual_matches_straight_line_oracle() {
    let mat = material(3.0, 0.7, [1.5, -0.4], 0.2);
    let mut m = one_element(QUAD, uniform(mat));
    m.params_mut().set_parameter(ALPHA, 0.3).unwrap();
    m.params_mut().set_parameter(BETA, 0.05).unwrap();
    m.params_mut().set_parameter(SIGMA_PAD, 3.0).unwrap();
    let psi = [0.1, 0.5, -0.3, 0.2];
    let t = [1.0, 2.5, 0.4, 3.0];
    let f = m.residual(&interleave(psi, t)).unwrap();
    let want = oracle_residual(&QUAD, &mat, 0.3, 0.05, psi, t);
    for i in 0..8 {
        assert!(
            (f[i] - want[i]).abs() < 1e-12 * (1.0 + want[i].abs()),
            "{i}: {} vs {}",
            f[i],
            want[i]
        );
    }
}

#[test]
fn conductivity_scaling_is_homogeneous() {
    let psi = [0.1, 0.5, -0.3, 0.2];
    let x = interleave(psi, [0.0; 4]);
    let run = |c: f64| {
        let mut m = one_element(QUAD, uniform(material(2.0 * c, 1.0, [0.0, 0.0], 0.3)));
        m.residual(&x).unwrap()
    };
    let (a, b) = (run(1.0), run(3.0));
    for i in 0..8 {
        // with T = 0 and no source the heat rows hold only the Joule term
        assert!(
            (b[i] - 3.0 * a[i]).abs() < 1e-13 * (1.0 + b[i].abs()),
            "{i}"
        );
    }
}

#[test]
fn temperature_independent_sigma_decouples_potential() {
    let mut cfg = ModelConfig::demo();
    for r in Region::ALL {
        cfg.materials.get_mut(r).beta = 0.0;
    }
    let mut m = Model::new(cfg).unwrap();
    let x: Vec<f64> = (0..m.num_dofs())
        .map(|i| ((i * 37 % 11) as f64) * 0.1)
        .collect();
    let j = m.jacobian(&x).unwrap().jac;
    for row in (PSI..m.num_dofs()).step_by(NUM_EQS) {
        if m.dirichlet().contains(row) {
            continue;
        }
        for col in (TEMP..m.num_dofs()).step_by(NUM_EQS) {
            assert_eq!(j.get(row, col), 0.0, "({row}, {col})");
        }
    }
}

fn random_state(m: &Model, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..m.num_dofs())
        .map(|i| {
            if i % NUM_EQS == PSI {
                rng.gen_range(0.0..0.5)
            } else {
                rng.gen_range(0.0..3.0)
            }
        })
        .collect();
    m.dirichlet().impose(&mut x);
    x
}

#[test]
fn parameter_tangent_matches_finite_differences() {
    let mut m = Model::demo().unwrap();
    m.params_mut().set_parameter(ALPHA, 0.5).unwrap();
    m.params_mut().set_parameter(BETA, 0.1).unwrap();
    let x = random_state(&m, 7);
    let names = [ALPHA, BETA, SIGMA_PAD];
    let tangent = m.param_tangent(&x, &names).unwrap();
    for (k, name) in names.iter().enumerate() {
        let p = m.params().get_value(name).unwrap();
        let h = 1e-6 * (1.0 + p.abs());
        m.params_mut().set_parameter(name, p + h).unwrap();
        let fp = m.residual(&x).unwrap();
        m.params_mut().set_parameter(name, p - h).unwrap();
        let fm = m.residual(&x).unwrap();
        m.params_mut().set_parameter(name, p).unwrap();
        let fd: Vec<f64> = fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = tangent.dfdp[k]
            .iter()
            .zip(&fd)
            .fold(0.0f64, |a, (t, f)| a.max((t - f).abs()));
        assert!(err <= 1e-6 * scale, "{name}: {err} vs scale {scale}");
    }
}

#[test]
fn directional_derivative_is_jacobian_times_vector() {
    let mut m = Model::demo().unwrap();
    let x = random_state(&m, 3);
    let v: Vec<f64> = (0..m.num_dofs())
        .map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5)
        .collect();
    let jv = m.directional(&x, &v).unwrap();
    let j = m.jacobian(&x).unwrap();
    let mut want = vec![0.0; v.len()];
    j.jac.matvec(&v, &mut want);
    let scale = want.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    for (a, b) in jv.dfdp[0].iter().zip(&want) {
        assert!((a - b).abs() <= 1e-12 * scale.max(1.0), "{a} vs {b}");
    }
    assert_eq!(jv.f, j.f);
}

#[test]
fn every_kernel_is_written_once() {
    let src = include_str!("../src/physics/evaluators.rs");
    let impls: Vec<&str> = src
        .lines()
        .filter(|l| l.contains("Evaluator<") && l.trim_start().starts_with("impl"))
        .collect();
    assert!(impls.len() >= 10);
    for l in impls {
        assert!(
            l.starts_with("impl<E: EvalType> Evaluator<E> for "),
            "type-specific kernel: {l}"
        );
    }
}
