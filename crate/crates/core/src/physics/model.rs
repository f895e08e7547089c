use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::evaluators::*;
use super::{
    MaterialTable, ParamError, ParameterLibrary, ALPHA, BETA, NUM_EQS, PSI, SIGMA_PAD, TEMP,
};
use crate::assembly::{
    assemble, build_worksets, AssemblyContext, AssemblyError, AssemblyInput, AssemblyType,
    Connectivity, CsrPattern, DirichletSet, JacobianOutput, SgJacobianOutput, TangentOutput,
    TangentSeed, Workset,
};
use crate::discretization::{BasisSet, DiscretizationError, Mesh, Region, SliderGeometry};
use crate::fields::{Dims, FieldTag};
use crate::graph::eval::{Jacobian, Residual, SgJacobian, SgResidual, ShapeTangent, Tangent};
use crate::graph::{
    instantiate_for_all_types, BuildContext, EvalTag, EvalType, EvaluatorGraph, GraphError,
    GraphSet, GraphSpec, Registrar,
};
use crate::scalars::BasisData;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("invalid model configuration: {0}")]
    Config(String),
}

/// Shared real function of the coordinates.
#[derive(Clone)]
pub struct PointFn(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl fmt::Debug for PointFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<function>")
    }
}

#[derive(Debug, Clone)]
pub enum BcValue {
    Constant(f64),
    Function(PointFn),
}

#[derive(Debug, Clone)]
pub struct DirichletBc {
    pub node_set: String,
    pub eq: usize,
    pub value: BcValue,
}

impl DirichletBc {
    pub fn constant(node_set: &str, eq: usize, v: f64) -> Self {
        DirichletBc {
            node_set: node_set.into(),
            eq,
            value: BcValue::Constant(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Slider(SliderGeometry),
    Rectangle {
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
        region: Region,
    },
    /// A ready-made mesh, e.g. read from the mesh text format.
    Mesh(Mesh),
}

impl Geometry {
    pub fn build(&self) -> Result<Mesh, DiscretizationError> {
        match self {
            Geometry::Slider(g) => Mesh::slider(g),
            Geometry::Rectangle {
                lx,
                ly,
                nx,
                ny,
                region,
            } => Mesh::rectangle(*lx, *ly, *nx, *ny, *region),
            Geometry::Mesh(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub geometry: Geometry,
    pub materials: MaterialTable,
    pub bcs: Vec<DirichletBc>,
    pub alpha: f64,
    pub beta_s: f64,
    /// Gauss points per direction.
    pub quad_order: usize,
    /// Elements per workset; 0 means one workset per region.
    pub workset_size: usize,
    pub threads: usize,
    /// Extra heat source evaluated at quadrature-point coordinates.
    pub forcing: Option<PointFn>,
}

impl ModelConfig {
    /// Conductor / pad / half-slider strip: `psi = 0` and `T = 0` at the
    /// conductor end, `psi = 0.5` on the symmetry plane.
    pub fn demo() -> Self {
        ModelConfig {
            geometry: Geometry::Slider(SliderGeometry::default()),
            materials: MaterialTable::default(),
            bcs: vec![
                DirichletBc::constant("conductor_end", PSI, 0.0),
                DirichletBc::constant("symmetry_plane", PSI, 0.5),
                DirichletBc::constant("conductor_end", TEMP, 0.0),
            ],
            alpha: 0.0,
            beta_s: 0.0,
            quad_order: 2,
            workset_size: 32,
            threads: 1,
            forcing: None,
        }
    }

    /// Largest element Peclet number `|v| h / (2 kappa)` over the mesh.
    pub fn max_peclet(&self, mesh: &Mesh) -> f64 {
        let mut pe: f64 = 0.0;
        for (e, el) in mesh.elements().iter().enumerate() {
            let m = self.materials.get(mesh.region(e));
            let speed = m.velocity[0].hypot(m.velocity[1]);
            let c = mesh.coords();
            let h = (0..4)
                .map(|i| {
                    let (a, b) = (c[el[i]], c[el[(i + 1) % 4]]);
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
                .fold(0.0, f64::max);
            pe = pe.max(speed * h / (2.0 * m.kappa));
        }
        pe
    }
}

/// Mesh, dof map, parameters and one graph set per worker thread.
pub struct Model {
    config: ModelConfig,
    base_mesh: Mesh,
    mesh: Mesh,
    conn: Connectivity,
    worksets: Vec<Workset>,
    pattern: Arc<CsrPattern>,
    dirichlet: DirichletSet,
    params: ParameterLibrary,
    graphs: Vec<GraphSet>,
    sg_basis: Option<Arc<BasisData>>,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Model, ModelError> {
        config.materials.validate().map_err(ModelError::Config)?;
        if config.threads == 0 {
            return Err(ModelError::Config("threads must be at least 1".into()));
        }
        let mesh = config.geometry.build()?;
        for bc in &config.bcs {
            if mesh.node_set(&bc.node_set).is_none() {
                return Err(ModelError::Config(format!(
                    "unknown node set {}",
                    bc.node_set
                )));
            }
            if bc.eq >= NUM_EQS {
                return Err(ModelError::Config(format!(
                    "equation index {} out of range",
                    bc.eq
                )));
            }
        }
        let conn = Connectivity::new(&mesh, NUM_EQS);
        let size = if config.workset_size == 0 {
            mesh.num_elements()
        } else {
            config.workset_size
        };
        let worksets = build_worksets(&mesh, size);
        let pattern = CsrPattern::from_connectivity(&conn);
        let basis = Arc::new(BasisSet::bilinear(config.quad_order)?);

        let mut params = ParameterLibrary::new();
        params.register_parameter(ALPHA, config.alpha)?;
        params.register_parameter(BETA, config.beta_s)?;
        params.register_parameter(SIGMA_PAD, config.materials.pad.sigma0)?;
        params.freeze();

        let dims = Dims {
            cells: worksets.iter().map(|w| w.len).max().unwrap_or(1),
            nodes: 4,
            qps: basis.num_qps(),
            eqs: NUM_EQS,
            dims: 2,
        };
        let spec = graph_spec(&config, basis, dims);
        let mut graphs = Vec::with_capacity(config.threads);
        for _ in 0..config.threads {
            let mut ctx = BuildContext {
                params: &mut params,
                dims,
            };
            graphs.push(instantiate_for_all_types(&spec, &EvalTag::ALL, &mut ctx)?);
        }
        let dirichlet = dirichlet_set(&config, &mesh);
        Ok(Model {
            config,
            base_mesh: mesh.clone(),
            mesh,
            conn,
            worksets,
            pattern,
            dirichlet,
            params,
            graphs,
            sg_basis: None,
        })
    }

    pub fn demo() -> Result<Model, ModelError> {
        Model::new(ModelConfig::demo())
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn num_dofs(&self) -> usize {
        self.conn.num_dofs()
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn base_mesh(&self) -> &Mesh {
        &self.base_mesh
    }

    pub fn worksets(&self) -> &[Workset] {
        &self.worksets
    }

    pub fn dirichlet(&self) -> &DirichletSet {
        &self.dirichlet
    }

    pub fn params(&self) -> &ParameterLibrary {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterLibrary {
        &mut self.params
    }

    pub fn graphs(&self) -> &GraphSet {
        &self.graphs[0]
    }

    /// Replace node coordinates; the connectivity must be unchanged.
    pub fn set_mesh(&mut self, mesh: Mesh) -> Result<(), ModelError> {
        if mesh.elements() != self.base_mesh.elements()
            || mesh.num_nodes() != self.base_mesh.num_nodes()
        {
            return Err(ModelError::Config(
                "mesh topology differs from the base mesh".into(),
            ));
        }
        self.dirichlet = dirichlet_set(&self.config, &mesh);
        self.mesh = mesh;
        Ok(())
    }

    pub fn set_sg_basis(&mut self, basis: Option<Arc<BasisData>>) {
        self.sg_basis = basis;
    }

    pub fn sg_basis(&self) -> Option<&Arc<BasisData>> {
        self.sg_basis.as_ref()
    }

    /// Zero state with Dirichlet values imposed.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.num_dofs()];
        self.dirichlet.impose(&mut x);
        x
    }

    pub fn assemble<A: AssemblyType>(
        &mut self,
        input: &AssemblyInput,
    ) -> Result<A::Output, ModelError> {
        let ctx = AssemblyContext {
            mesh: &self.mesh,
            conn: &self.conn,
            worksets: &self.worksets,
            dirichlet: &self.dirichlet,
            pattern: &self.pattern,
            sg_basis: self.sg_basis.as_ref(),
        };
        let mut gs: Vec<&mut EvaluatorGraph<A>> = self
            .graphs
            .iter_mut()
            .map(|s| s.get_mut::<A>().expect("every type is instantiated"))
            .collect();
        Ok(assemble(&ctx, &mut gs, input)?)
    }

    pub fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.assemble::<Residual>(&AssemblyInput::new(x))
    }

    pub fn jacobian(&mut self, x: &[f64]) -> Result<JacobianOutput, ModelError> {
        self.assemble::<Jacobian>(&AssemblyInput::new(x))
    }

    /// `df/dp` for the named parameters, one column each.
    pub fn param_tangent(
        &mut self,
        x: &[f64],
        names: &[&str],
    ) -> Result<TangentOutput, ModelError> {
        self.params.seed_tangent(names)?;
        let r = self.assemble::<Tangent>(
            &AssemblyInput::new(x).with_tangent(TangentSeed::Params(names.len())),
        );
        self.params.clear_seeds();
        r
    }

    /// `J v` without forming `J`.
    pub fn directional(&mut self, x: &[f64], v: &[f64]) -> Result<TangentOutput, ModelError> {
        self.assemble::<Tangent>(&AssemblyInput::new(x).with_tangent(TangentSeed::Direction(v)))
    }

    /// `df/dX dX/dp` for coordinate sensitivities `xp`.
    pub fn shape_tangent(
        &mut self,
        x: &[f64],
        xp: &[Vec<f64>],
    ) -> Result<TangentOutput, ModelError> {
        self.assemble::<ShapeTangent>(&AssemblyInput::new(x).with_xp(xp))
    }

    pub fn sg_residual(&mut self, sg_x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ModelError> {
        let x0 = sg_x.first().ok_or(AssemblyError::MissingInput(
            EvalTag::SgResidual,
            "a stochastic state",
        ))?;
        self.assemble::<SgResidual>(&AssemblyInput::stochastic(x0, sg_x))
    }

    pub fn sg_jacobian(&mut self, sg_x: &[Vec<f64>]) -> Result<SgJacobianOutput, ModelError> {
        let x0 = sg_x.first().ok_or(AssemblyError::MissingInput(
            EvalTag::SgJacobian,
            "a stochastic state",
        ))?;
        self.assemble::<SgJacobian>(&AssemblyInput::stochastic(x0, sg_x))
    }

    /// Adjacency text and DOT rendering of the graph for `tag`.
    pub fn graph_dump(&self, tag: EvalTag) -> (String, String) {
        fn dump<E: EvalType>(s: &GraphSet) -> (String, String) {
            let g = s.get::<E>().expect("every type is instantiated");
            (g.adjacency_text(), g.to_dot())
        }
        let s = &self.graphs[0];
        match tag {
            EvalTag::Residual => dump::<Residual>(s),
            EvalTag::Jacobian => dump::<Jacobian>(s),
            EvalTag::Tangent => dump::<Tangent>(s),
            EvalTag::ShapeTangent => dump::<ShapeTangent>(s),
            EvalTag::SgResidual => dump::<SgResidual>(s),
            EvalTag::SgJacobian => dump::<SgJacobian>(s),
        }
    }
}

fn graph_spec(config: &ModelConfig, basis: Arc<BasisSet>, dims: Dims) -> GraphSpec {
    let materials = Arc::new(config.materials.clone());
    let mut registrars: Vec<Arc<dyn Registrar>> = vec![
        Arc::new(SplitSolutionReg),
        Arc::new(BasisReg(basis.clone())),
        Arc::new(InterpolationReg {
            nodal: T_N,
            qp: T_Q,
            basis: basis.clone(),
        }),
        Arc::new(GradInterpolationReg {
            nodal: PSI_N,
            qp: GRAD_PSI_Q,
        }),
        Arc::new(GradInterpolationReg {
            nodal: T_N,
            qp: GRAD_T_Q,
        }),
        Arc::new(ConductivityReg(materials.clone())),
        Arc::new(ThermalConductivityReg(materials.clone())),
        Arc::new(JouleReg),
        Arc::new(SourceReg {
            forced: config.forcing.is_some(),
        }),
        Arc::new(PotentialResidualReg),
        Arc::new(HeatResidualReg(materials)),
        Arc::new(ResidualCombineReg),
    ];
    if let Some(f) = &config.forcing {
        registrars.push(Arc::new(CoordinatesReg(basis)));
        registrars.push(Arc::new(ForcingReg(f.0.clone())));
    }
    GraphSpec {
        registrars,
        externals: vec![FieldTag::x_local(), FieldTag::coords()],
        required: vec![FieldTag::residual_local()],
        dims,
    }
}

fn dirichlet_set(config: &ModelConfig, mesh: &Mesh) -> DirichletSet {
    let mut set = DirichletSet::new();
    for bc in &config.bcs {
        for &n in mesh
            .node_set(&bc.node_set)
            .expect("node sets checked at construction")
        {
            let v = match &bc.value {
                BcValue::Constant(v) => *v,
                BcValue::Function(f) => {
                    let c = mesh.coords()[n];
                    (f.0)(c[0], c[1])
                }
            };
            set.insert(n * NUM_EQS + bc.eq, v);
        }
    }
    set
}
