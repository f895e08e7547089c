//! Thermo-electric evaluators. Every kernel is written once against the
//! generic `(E::S, E::M)` pair.

use std::marker::PhantomData;
use std::sync::Arc;

use super::{MaterialTable, ParamCell};
use crate::assembly::Workset;
use crate::discretization::{
    compute_element_geometry, gradient_at_qp, integrate_scalar, integrate_vector,
    interpolate_to_qp, BasisSet, DiscretizationError, Region,
};
use crate::fields::{Extent::*, Field, FieldTag, Layout, OwnedField};
use crate::graph::{
    BuildContext, EvalType, Evaluator, FieldAccess, GenericRegistrar, GraphError, KernelError,
};
use crate::scalars::Scalar;

pub const PSI_N: &str = "psi_n";
pub const T_N: &str = "T_n";
pub const W_BF: &str = "wBF";
pub const W_GRAD_BF: &str = "wGradBF";
pub const GRAD_BF: &str = "gradBF";
pub const JAC_DET_W: &str = "jacDetW";
pub const COORDS_QP: &str = "coords_qp";
pub const T_Q: &str = "T_q";
pub const GRAD_T_Q: &str = "grad_T_q";
pub const GRAD_PSI_Q: &str = "grad_psi_q";
pub const SIGMA: &str = "sigma";
pub const KAPPA: &str = "kappa";
pub const JOULE: &str = "joule";
pub const SOURCE: &str = "source";
pub const FORCING: &str = "forcing";
pub const PSI_RESIDUAL: &str = "psi_residual";
pub const T_RESIDUAL: &str = "T_residual";

fn kernel_err(ws: &Workset, e: DiscretizationError) -> KernelError {
    match e {
        DiscretizationError::NonPositiveJacobian { element, det } => KernelError::at(
            ws.start + element,
            format!("non-positive Jacobian determinant {det}"),
        ),
        other => KernelError {
            element: None,
            message: other.to_string(),
        },
    }
}

fn nodal(name: &str) -> FieldTag {
    FieldTag::scalar(name, &[Cell, Node])
}

fn qp_scalar(name: &str) -> FieldTag {
    FieldTag::scalar(name, &[Cell, QuadPoint])
}

fn qp_vector(name: &str) -> FieldTag {
    FieldTag::scalar(name, &[Cell, QuadPoint, Dim])
}

fn w_bf() -> FieldTag {
    FieldTag::mesh(W_BF, &[Cell, Node, QuadPoint])
}

fn basis_grad(name: &str) -> FieldTag {
    FieldTag::mesh(name, &[Cell, Node, QuadPoint, Dim])
}

/// Splits the gathered `[Cell, Node, Eq]` solution into nodal potential and temperature.
pub struct SplitSolution<E>(PhantomData<E>);

impl<E: EvalType> Evaluator<E> for SplitSolution<E> {
    fn name(&self) -> &str {
        "SplitSolution"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::x_local()]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![nodal(PSI_N), nodal(T_N)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let x = f.dep_scalar(0);
        for eq in 0..2 {
            let out = f.out_scalar(eq);
            for c in 0..ws.len {
                for n in 0..4 {
                    out[(c, n)] = x[(c, n, eq)].clone();
                }
            }
        }
        Ok(())
    }
}

/// Physical basis gradients and quadrature-weighted basis values from the coordinates.
pub struct ComputeBasisFunctions<E> {
    basis: Arc<BasisSet>,
    _e: PhantomData<E>,
}

impl<E: EvalType> Evaluator<E> for ComputeBasisFunctions<E> {
    fn name(&self) -> &str {
        "ComputeBasisFunctions"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::coords()]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![
            FieldTag::mesh(JAC_DET_W, &[Cell, QuadPoint]),
            basis_grad(GRAD_BF),
            w_bf(),
            basis_grad(W_GRAD_BF),
        ]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let coords = f.dep_mesh(0);
        let [OwnedField::Mesh(jdw), OwnedField::Mesh(grad), OwnedField::Mesh(wbf), OwnedField::Mesh(wgbf)] =
            f.outputs_mut()
        else {
            unreachable!("declared four mesh outputs")
        };
        compute_element_geometry(coords, &self.basis, ws.len, jdw, grad, wbf, wgbf)
            .map_err(|e| kernel_err(ws, e))
    }
}

/// Physical coordinates of the quadrature points.
pub struct CoordinatesAtQP<E> {
    basis: Arc<BasisSet>,
    _e: PhantomData<E>,
}

impl<E: EvalType> Evaluator<E> for CoordinatesAtQP<E> {
    fn name(&self) -> &str {
        "CoordinatesAtQP"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::coords()]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::mesh(COORDS_QP, &[Cell, QuadPoint, Dim])]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let x = f.dep_mesh(0);
        let out = f.out_mesh(0);
        for c in 0..ws.len {
            for q in 0..self.basis.num_qps() {
                for d in 0..2 {
                    let mut s = x[(c, 0, d)].clone() * self.basis.value(0, q);
                    for i in 1..4 {
                        s += x[(c, i, d)].clone() * self.basis.value(i, q);
                    }
                    out[(c, q, d)] = s;
                }
            }
        }
        Ok(())
    }
}

/// Nodal values to quadrature points.
pub struct DofInterpolation<E> {
    nodal: &'static str,
    qp: &'static str,
    basis: Arc<BasisSet>,
    _e: PhantomData<E>,
}

impl<E: EvalType> Evaluator<E> for DofInterpolation<E> {
    fn name(&self) -> &str {
        self.qp
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![nodal(self.nodal)]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(self.qp)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let u = f.dep_scalar(0);
        interpolate_to_qp(u, &self.basis, ws.len, f.out_scalar(0)).map_err(|e| kernel_err(ws, e))
    }
}

/// Nodal values to quadrature-point gradients.
pub struct DofGradInterpolation<E> {
    nodal: &'static str,
    qp: &'static str,
    _e: PhantomData<E>,
}

impl<E: EvalType> Evaluator<E> for DofGradInterpolation<E> {
    fn name(&self) -> &str {
        self.qp
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![nodal(self.nodal), basis_grad(GRAD_BF)]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![qp_vector(self.qp)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let u = f.dep_scalar(0);
        let g = f.dep_mesh(1);
        gradient_at_qp(u, g, ws.len, f.out_scalar(0)).map_err(|e| kernel_err(ws, e))
    }
}

/// `sigma = sigma0 / (1 + beta (T - T0))`; the pad value is a model parameter.
pub struct Conductivity<E: EvalType> {
    materials: Arc<MaterialTable>,
    sigma_pad: Arc<ParamCell<E::S>>,
}

impl<E: EvalType> Evaluator<E> for Conductivity<E> {
    fn name(&self) -> &str {
        "Conductivity"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(T_Q)]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(SIGMA)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let t = f.dep_scalar(0);
        let m = self.materials.get(ws.region);
        let sigma0: E::S = match ws.region {
            Region::Pad => self.sigma_pad.get(),
            _ => E::S::from(m.sigma0),
        };
        let out = f.out_scalar(0);
        let nq = t.extent(1);
        for c in 0..ws.len {
            for q in 0..nq {
                let denom = (t[(c, q)].clone() - m.t0) * m.beta + 1.0;
                if !(denom.value() > 0.0) {
                    return Err(KernelError::at(
                        ws.start + c,
                        format!(
                            "nonphysical state: 1 + beta (T - T0) = {} <= 0",
                            denom.value()
                        ),
                    ));
                }
                out[(c, q)] = sigma0.clone() / denom;
            }
        }
        Ok(())
    }
}

/// Region-wise constant thermal conductivity.
pub struct ThermalConductivity<E> {
    materials: Arc<MaterialTable>,
    _e: PhantomData<E>,
}

impl<E: EvalType> Evaluator<E> for ThermalConductivity<E> {
    fn name(&self) -> &str {
        "ThermalConductivity"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(T_Q)]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(KAPPA)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let k = self.materials.get(ws.region).kappa;
        let out = f.out_scalar(0);
        let nq = out.extent(1);
        for c in 0..ws.len {
            for q in 0..nq {
                out[(c, q)] = E::S::from(k);
            }
        }
        Ok(())
    }
}

/// `sigma |grad psi|^2`
pub struct JouleHeating<E>(PhantomData<E>);

impl<E: EvalType> Evaluator<E> for JouleHeating<E> {
    fn name(&self) -> &str {
        "JouleHeating"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(SIGMA), qp_vector(GRAD_PSI_Q)]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(JOULE)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let sigma = f.dep_scalar(0);
        let g = f.dep_scalar(1);
        let out = f.out_scalar(0);
        for c in 0..ws.len {
            for q in 0..sigma.extent(1) {
                let gx = g[(c, q, 0)].clone();
                let gy = g[(c, q, 1)].clone();
                out[(c, q)] = sigma[(c, q)].clone() * (gx.clone() * gx + gy.clone() * gy);
            }
        }
        Ok(())
    }
}

/// `s = alpha + beta_s T^2`, plus an optional prescribed forcing.
pub struct SourceTerm<E: EvalType> {
    alpha: Arc<ParamCell<E::S>>,
    beta: Arc<ParamCell<E::S>>,
    forced: bool,
}

impl<E: EvalType> Evaluator<E> for SourceTerm<E> {
    fn name(&self) -> &str {
        "SourceTerm"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        let mut d = vec![qp_scalar(T_Q)];
        if self.forced {
            d.push(FieldTag::real(FORCING, &[Cell, QuadPoint]));
        }
        d
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![qp_scalar(SOURCE)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let u = f.dep_scalar(0);
        let forcing = self.forced.then(|| f.dep_real(1));
        let (alpha, beta) = (self.alpha.get(), self.beta.get());
        let out = f.out_scalar(0);
        for c in 0..ws.len {
            for q in 0..u.extent(1) {
                let t = u[(c, q)].clone();
                let mut s = alpha.clone() + beta.clone() * t.clone() * t;
                if let Some(fr) = forcing {
                    s = s + fr[(c, q)];
                }
                out[(c, q)] = s;
            }
        }
        Ok(())
    }
}

/// Prescribed heat forcing evaluated at the quadrature-point coordinates.
pub struct Forcing<E> {
    function: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    _e: PhantomData<E>,
}

impl<E: EvalType> Evaluator<E> for Forcing<E> {
    fn name(&self) -> &str {
        "Forcing"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::mesh(COORDS_QP, &[Cell, QuadPoint, Dim])]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::real(FORCING, &[Cell, QuadPoint])]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let x = f.dep_mesh(0);
        let out = f.out_real(0);
        for c in 0..ws.len {
            for q in 0..out.extent(1) {
                out[(c, q)] = (self.function)(x[(c, q, 0)].value(), x[(c, q, 1)].value());
            }
        }
        Ok(())
    }
}

/// `R_psi(i) = int sigma grad psi . grad phi_i`
pub struct PotentialResidual<E>(PhantomData<E>);

impl<E: EvalType> Evaluator<E> for PotentialResidual<E> {
    fn name(&self) -> &str {
        "PotentialResidual"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![
            qp_scalar(SIGMA),
            qp_vector(GRAD_PSI_Q),
            basis_grad(W_GRAD_BF),
        ]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![nodal(PSI_RESIDUAL)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let sigma = f.dep_scalar(0);
        let g = f.dep_scalar(1);
        let wgbf = f.dep_mesh(2);
        let out = f.out_scalar(0);
        out.fill_constant(0.0);
        integrate_sigma_flux(out, sigma, g, wgbf, ws.len);
        Ok(())
    }
}

fn integrate_sigma_flux<S: Scalar + From<M>, M: Scalar>(
    out: &mut Field<S>,
    coef: &Field<S>,
    grad: &Field<S>,
    wgbf: &Field<M>,
    ncells: usize,
) {
    let nq = coef.extent(1);
    for c in 0..ncells {
        for i in 0..4 {
            let mut s = S::zero();
            for q in 0..nq {
                let k = coef[(c, q)].clone();
                s += k.clone() * grad[(c, q, 0)].clone() * S::from(wgbf[(c, i, q, 0)].clone());
                s += k * grad[(c, q, 1)].clone() * S::from(wgbf[(c, i, q, 1)].clone());
            }
            out[(c, i)] += s;
        }
    }
}

/// `R_T(i) = int kappa grad T . grad phi_i - (v . grad T) phi_i - (joule + s) phi_i`
pub struct HeatResidual<E: EvalType> {
    materials: Arc<MaterialTable>,
    flux: Field<E::S>,
    conv: Field<E::S>,
    heat: Field<E::S>,
}

impl<E: EvalType> Evaluator<E> for HeatResidual<E> {
    fn name(&self) -> &str {
        "HeatResidual"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![
            qp_scalar(KAPPA),
            qp_vector(GRAD_T_Q),
            qp_scalar(JOULE),
            qp_scalar(SOURCE),
            w_bf(),
            basis_grad(W_GRAD_BF),
        ]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![nodal(T_RESIDUAL)]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let kappa = f.dep_scalar(0);
        let gt = f.dep_scalar(1);
        let joule = f.dep_scalar(2);
        let source = f.dep_scalar(3);
        let wbf = f.dep_mesh(4);
        let wgbf = f.dep_mesh(5);
        let v = self.materials.get(ws.region).velocity;
        let out = f.out_scalar(0);
        let nq = kappa.extent(1);
        let (flux, conv, heat) = (&mut self.flux, &mut self.conv, &mut self.heat);
        for c in 0..ws.len {
            for q in 0..nq {
                let k = kappa[(c, q)].clone();
                let gx = gt[(c, q, 0)].clone();
                let gy = gt[(c, q, 1)].clone();
                flux[(c, q, 0)] = k.clone() * gx.clone();
                flux[(c, q, 1)] = k * gy.clone();
                conv[(c, q)] = -(gx * v[0] + gy * v[1]);
                heat[(c, q)] = -(joule[(c, q)].clone() + source[(c, q)].clone());
            }
        }
        out.fill_constant(0.0);
        integrate_vector(out, flux, wgbf, ws.len)
            .and_then(|_| integrate_scalar(out, conv, wbf, ws.len))
            .and_then(|_| integrate_scalar(out, heat, wbf, ws.len))
            .map_err(|e| kernel_err(ws, e))
    }
}

/// Interleaves the two equation residuals into `[Cell, Node, Eq]`.
pub struct ResidualCombine<E>(PhantomData<E>);

impl<E: EvalType> Evaluator<E> for ResidualCombine<E> {
    fn name(&self) -> &str {
        "ResidualCombine"
    }
    fn dependent_fields(&self) -> Vec<FieldTag> {
        vec![nodal(PSI_RESIDUAL), nodal(T_RESIDUAL)]
    }
    fn evaluated_fields(&self) -> Vec<FieldTag> {
        vec![FieldTag::residual_local()]
    }
    fn evaluate(&mut self, ws: &Workset, f: &mut FieldAccess<'_, E>) -> Result<(), KernelError> {
        let rp = f.dep_scalar(0);
        let rt = f.dep_scalar(1);
        let out = f.out_scalar(0);
        for c in 0..ws.len {
            for n in 0..4 {
                out[(c, n, 0)] = rp[(c, n)].clone();
                out[(c, n, 1)] = rt[(c, n)].clone();
            }
        }
        Ok(())
    }
}

// ---- registrars ----

pub struct SplitSolutionReg;
pub struct BasisReg(pub Arc<BasisSet>);
pub struct CoordinatesReg(pub Arc<BasisSet>);
pub struct InterpolationReg {
    pub nodal: &'static str,
    pub qp: &'static str,
    pub basis: Arc<BasisSet>,
}
pub struct GradInterpolationReg {
    pub nodal: &'static str,
    pub qp: &'static str,
}
pub struct ConductivityReg(pub Arc<MaterialTable>);
pub struct ThermalConductivityReg(pub Arc<MaterialTable>);
pub struct JouleReg;
pub struct SourceReg {
    pub forced: bool,
}
pub struct ForcingReg(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);
pub struct PotentialResidualReg;
pub struct HeatResidualReg(pub Arc<MaterialTable>);
pub struct ResidualCombineReg;

type Built<E> = Result<Box<dyn Evaluator<E>>, GraphError>;

impl GenericRegistrar for SplitSolutionReg {
    fn name(&self) -> &str {
        "SplitSolution"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(SplitSolution::<E>(PhantomData)))
    }
}

impl GenericRegistrar for BasisReg {
    fn name(&self) -> &str {
        "ComputeBasisFunctions"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(ComputeBasisFunctions::<E> {
            basis: self.0.clone(),
            _e: PhantomData,
        }))
    }
}

impl GenericRegistrar for CoordinatesReg {
    fn name(&self) -> &str {
        "CoordinatesAtQP"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(CoordinatesAtQP::<E> {
            basis: self.0.clone(),
            _e: PhantomData,
        }))
    }
}

impl GenericRegistrar for InterpolationReg {
    fn name(&self) -> &str {
        self.qp
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(DofInterpolation::<E> {
            nodal: self.nodal,
            qp: self.qp,
            basis: self.basis.clone(),
            _e: PhantomData,
        }))
    }
}

impl GenericRegistrar for GradInterpolationReg {
    fn name(&self) -> &str {
        self.qp
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(DofGradInterpolation::<E> {
            nodal: self.nodal,
            qp: self.qp,
            _e: PhantomData,
        }))
    }
}

impl GenericRegistrar for ConductivityReg {
    fn name(&self) -> &str {
        "Conductivity"
    }
    fn build_for<E: EvalType>(&self, ctx: &mut BuildContext<'_>) -> Built<E> {
        let sigma_pad = ctx.params.accessor::<E::S>(super::SIGMA_PAD, E::TAG)?;
        Ok(Box::new(Conductivity::<E> {
            materials: self.0.clone(),
            sigma_pad,
        }))
    }
}

impl GenericRegistrar for ThermalConductivityReg {
    fn name(&self) -> &str {
        "ThermalConductivity"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(ThermalConductivity::<E> {
            materials: self.0.clone(),
            _e: PhantomData,
        }))
    }
}

impl GenericRegistrar for JouleReg {
    fn name(&self) -> &str {
        "JouleHeating"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(JouleHeating::<E>(PhantomData)))
    }
}

impl GenericRegistrar for SourceReg {
    fn name(&self) -> &str {
        "SourceTerm"
    }
    fn build_for<E: EvalType>(&self, ctx: &mut BuildContext<'_>) -> Built<E> {
        let alpha = ctx.params.accessor::<E::S>(super::ALPHA, E::TAG)?;
        let beta = ctx.params.accessor::<E::S>(super::BETA, E::TAG)?;
        Ok(Box::new(SourceTerm::<E> {
            alpha,
            beta,
            forced: self.forced,
        }))
    }
}

impl GenericRegistrar for ForcingReg {
    fn name(&self) -> &str {
        "Forcing"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(Forcing::<E> {
            function: self.0.clone(),
            _e: PhantomData,
        }))
    }
}

impl GenericRegistrar for PotentialResidualReg {
    fn name(&self) -> &str {
        "PotentialResidual"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(PotentialResidual::<E>(PhantomData)))
    }
}

impl GenericRegistrar for HeatResidualReg {
    fn name(&self) -> &str {
        "HeatResidual"
    }
    fn build_for<E: EvalType>(&self, ctx: &mut BuildContext<'_>) -> Built<E> {
        let (c, q) = (ctx.dims.cells, ctx.dims.qps);
        let scalar = Layout::new(&[c, q]).map_err(GraphError::Field)?;
        Ok(Box::new(HeatResidual::<E> {
            materials: self.0.clone(),
            flux: Field::new("flux", Layout::new(&[c, q, 2]).map_err(GraphError::Field)?),
            conv: Field::new("conv", scalar.clone()),
            heat: Field::new("heat", scalar),
        }))
    }
}

impl GenericRegistrar for ResidualCombineReg {
    fn name(&self) -> &str {
        "ResidualCombine"
    }
    fn build_for<E: EvalType>(&self, _: &mut BuildContext<'_>) -> Built<E> {
        Ok(Box::new(ResidualCombine::<E>(PhantomData)))
    }
}
