//! One-call analysis of an immersion: jets, normal frame, fundamental data,
//! adapted frames, connection forms and compatibility residuals on a grid.

use num_complex::Complex64;

use crate::energy::{energy_report, stereographic_tail_area, EnergyReport};
use crate::error::Result;
use crate::frames::{
    build_frame_field, maurer_cartan_fd, mc_flatness_residual, mc_forms_analytic, FrameField, MCForms,
};
use crate::gauss_tension::{
    default_verdict_tolerance, harmonicity_verdict, special_property_residual, tension_matrix_direct, tension_vector,
    TensionData, Verdict,
};
use crate::grid::{Grid, ResidualStats};
use crate::immersion::{DerivativeMode, FdStep, ImmersionSpec, Jet2, SurfaceKind};
use crate::invariants::{build_normal_frame, fundamental_data, CompatibilityResiduals, InvariantFields, NormalFrame};
use crate::linalg5::CMat5;
use crate::loop_family::{associated_family, LoopSample, PathConfig};

/// Everything derived from an immersion on one grid.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub spec: ImmersionSpec,
    pub grid: Grid,
    pub jets: Vec<Jet2>,
    pub normals: NormalFrame,
    pub fields: InvariantFields,
    pub frames: FrameField,
    /// Connection forms assembled from the fundamental data.
    pub mc: MCForms,
    pub residuals: CompatibilityResiduals,
}

impl Analysis {
    /// Analyses `spec` on an `n x n` grid (the file lattice for sampled kinds).
    pub fn new(spec: ImmersionSpec, n: usize) -> Result<Self> {
        let grid = spec.grid(n)?;
        Self::on_grid(spec, grid)
    }

    pub fn on_grid(spec: ImmersionSpec, grid: Grid) -> Result<Self> {
        let jets = spec.jets_on_grid(&grid)?;
        Self::from_jets(spec, grid, jets)
    }

    pub fn from_jets(spec: ImmersionSpec, grid: Grid, jets: Vec<Jet2>) -> Result<Self> {
        let normals = build_normal_frame(&grid, &jets)?;
        Self::with_normals(spec, grid, jets, normals)
    }

    pub fn with_normals(spec: ImmersionSpec, grid: Grid, jets: Vec<Jet2>, normals: NormalFrame) -> Result<Self> {
        let fields = fundamental_data(&grid, &jets, &normals)?;
        let frames = build_frame_field(&grid, &jets, &normals)?;
        let mc = mc_forms_analytic(&fields)?;
        let residuals = fields.residuals();
        Ok(Analysis {
            spec,
            grid,
            jets,
            normals,
            fields,
            frames,
            mc,
            residuals,
        })
    }

    /// The same immersion with `(N1, N2)` rotated by a constant angle.
    pub fn rotated(&self, theta: f64) -> Result<Self> {
        Self::with_normals(
            self.spec.clone(),
            self.grid,
            self.jets.clone(),
            self.normals.rotated(theta),
        )
    }

    /// Convergence order of the pipeline: fourth for analytic or fixed-step
    /// jets, second when jets are differenced at the grid spacing.
    pub fn convergence_order(&self) -> u32 {
        match self.spec.mode {
            _ if self.spec.kind.is_sampled() => 2,
            DerivativeMode::FiniteDifference(FdStep::GridSpacing) => 2,
            _ => 4,
        }
    }

    pub fn gauss_curvature(&self) -> Vec<f64> {
        self.fields.gauss_curvature()
    }

    pub fn normal_curvature(&self) -> Vec<f64> {
        self.fields.normal_curvature()
    }

    /// `(A_fd, B_fd)` from differencing the adapted frames.
    pub fn mc_fd(&self) -> (Vec<CMat5>, Vec<CMat5>) {
        maurer_cartan_fd(&self.grid, &self.frames)
    }

    /// Largest `|A_fd - A|` over interior nodes.
    pub fn frame_consistency(&self) -> f64 {
        let (a_fd, _) = self.mc_fd();
        let d: Vec<f64> = a_fd.iter().zip(&self.mc.a).map(|(x, y)| (x - y).norm()).collect();
        ResidualStats::interior(&self.grid, &d).max
    }

    /// Flatness residual of the differenced connection forms.
    pub fn flatness(&self) -> Vec<f64> {
        let (a, b) = self.mc_fd();
        mc_flatness_residual(&self.grid, &a, &b)
    }

    pub fn special_property(&self) -> Vec<f64> {
        special_property_residual(&self.mc)
    }

    pub fn tension(&self) -> Vec<TensionData> {
        let m = tension_matrix_direct(&self.grid, &self.mc);
        tension_vector(&self.fields, &self.frames, &m)
    }

    pub fn default_tolerance(&self) -> f64 {
        default_verdict_tolerance(&self.grid, &self.mc, self.convergence_order())
    }

    /// Harmonicity verdict at `tol` (the default tolerance when `None`).
    pub fn verdict(&self, tol: Option<f64>) -> Verdict {
        let tol = tol.unwrap_or_else(|| self.default_tolerance());
        harmonicity_verdict(&self.grid, &self.tension(), tol)
    }

    /// Energy totals; sphere charts report the stereographic tail.
    pub fn energy(&self) -> EnergyReport {
        let tail = match self.spec.kind {
            SurfaceKind::EquatorialSphere { radius } => Some(stereographic_tail_area(radius)),
            _ => None,
        };
        energy_report(&self.grid, &self.fields, tail)
    }

    pub fn family(&self, lambdas: &[Complex64], cfg: &PathConfig) -> Result<Vec<LoopSample>> {
        associated_family(&self.grid, &self.mc, &self.fields, Some(&self.frames), lambdas, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg5::RVec5;

    #[test]
    fn rotation_keeps_gauge_invariant_outputs() {
        let spec = ImmersionSpec::analytic(SurfaceKind::Moebius {
            inner: Box::new(SurfaceKind::CliffordTorus),
            center: RVec5::new(0.0, 0.0, 0.2, 0.0, 0.0),
        })
        .unwrap();
        let a = Analysis::new(spec, 32).unwrap();
        let b = a.rotated(0.7).unwrap();
        let (ea, eb) = (a.energy(), b.energy());
        assert!((ea.energy - eb.energy).abs() < 1e-10 && (ea.willmore - eb.willmore).abs() < 1e-10);
        let (ka, kb) = (a.gauss_curvature(), b.gauss_curvature());
        assert!(ka.iter().zip(&kb).all(|(x, y)| (x - y).abs() < 1e-10));
        let (va, vb) = (a.verdict(None), b.verdict(None));
        assert!((va.max_m - vb.max_m).abs() < 1e-10 && (va.max_grad_h - vb.max_grad_h).abs() < 1e-10);
    }

    #[test]
    fn convergence_order_follows_the_jet_source() {
        let a = Analysis::new(ImmersionSpec::analytic(SurfaceKind::CliffordTorus).unwrap(), 16).unwrap();
        assert_eq!(a.convergence_order(), 4);
        let spec = ImmersionSpec::new(
            SurfaceKind::CliffordTorus,
            DerivativeMode::FiniteDifference(FdStep::GridSpacing),
        )
        .unwrap();
        assert_eq!(Analysis::new(spec, 16).unwrap().convergence_order(), 2);
    }
}
