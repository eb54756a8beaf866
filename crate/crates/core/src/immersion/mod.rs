//! Immersion sources and their 2-jets.
//!
//! An [`ImmersionSpec`] pairs a [`SurfaceKind`] (catalog surface, Möbius image
//! of another kind, or sampled grid file) with a [`DerivativeMode`]. Jets are
//! evaluated pointwise for analytic kinds and on the sample lattice for grid
//! files.

mod catalog;
mod grid_file;
mod moebius;

pub use catalog::{catalog_entries, veronese_chart_jet, CatalogEntry};
pub use grid_file::{read_grid_file, write_grid_file, GridData};
pub use moebius::moebius_transform;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Domain, FdOrder, Grid};
use crate::linalg5::{bilinear_c, hermitian, CVec5, RVec5};

/// Allowed deviation of `|f|` from 1 before a point is rejected as off-sphere.
pub const OFF_SPHERE_TOLERANCE: f64 = 1e-6;

/// Relative conformality defect accepted by [`conformal_factor`].
pub const CONFORMAL_TOLERANCE: f64 = 1e-2;

/// Below this `|f_x|` the immersion is treated as branched.
pub const BRANCH_POINT_TOLERANCE: f64 = 1e-10;

/// Default relative finite-difference step (fraction of the domain extent).
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-4;

/// Value, first and second partials of `f` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub f: RVec5,
    pub f_x: RVec5,
    pub f_y: RVec5,
    pub f_xx: RVec5,
    pub f_xy: RVec5,
    pub f_yy: RVec5,
}

impl Jet2 {
    /// `f_z = (f_x - i f_y) / 2`.
    pub fn f_z(&self) -> CVec5 {
        CVec5::from_fn(|k, _| Complex64::new(0.5 * self.f_x[k], -0.5 * self.f_y[k]))
    }

    /// `f_zz = (f_xx - f_yy - 2i f_xy) / 4`.
    pub fn f_zz(&self) -> CVec5 {
        CVec5::from_fn(|k, _| Complex64::new(0.25 * (self.f_xx[k] - self.f_yy[k]), -0.5 * self.f_xy[k]))
    }

    /// `f_{z zbar} = (f_xx + f_yy) / 4`.
    pub fn f_zbar_z(&self) -> RVec5 {
        (self.f_xx + self.f_yy) * 0.25
    }

    pub fn norm_deviation(&self) -> f64 {
        (self.f.norm() - 1.0).abs()
    }

    /// `max(|<f, f_x>|, |<f, f_y>|)`; zero for curves on the unit sphere.
    pub fn tangency_defect(&self) -> f64 {
        self.f.dot(&self.f_x).abs().max(self.f.dot(&self.f_y).abs())
    }

    fn check_on_sphere(&self, x: f64, y: f64) -> Result<()> {
        let deviation = self.norm_deviation();
        if !(deviation <= OFF_SPHERE_TOLERANCE) {
            return Err(Error::OffSphere { x, y, deviation });
        }
        Ok(())
    }
}

/// How finite-difference jets choose their step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    /// Fraction of the domain extent along each axis.
    Relative(f64),
    /// Fixed step in chart units.
    Absolute(f64),
    /// The spacing of the grid the jets are evaluated on.
    GridSpacing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference(FdStep),
}

impl DerivativeMode {
    pub fn default_fd() -> Self {
        DerivativeMode::FiniteDifference(FdStep::Relative(DEFAULT_RELATIVE_STEP))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    /// Stereographic chart `(2x, 2y, 1 - r^2, 0, 0) / (1 + r^2)` on `[-R, R]^2`.
    EquatorialSphere { radius: f64 },
    /// `(cos x, sin x, cos y, sin y, 0) / sqrt 2` on `[0, 2pi)^2`.
    CliffordTorus,
    /// `(a cos(x/a), a sin(x/a), b cos(y/b), b sin(y/b), 0)` on `[0, 2pi a) x [0, 2pi b)`.
    PmcTorus { a: f64, b: f64 },
    /// Samples of `f` on a lattice.
    GridFile(GridData),
    /// Image of `inner` under the Möbius map with center `center`, `|center| < 1`.
    Moebius { inner: Box<SurfaceKind>, center: RVec5 },
}

impl SurfaceKind {
    pub fn domain(&self) -> Domain {
        match self {
            SurfaceKind::EquatorialSphere { radius } => Domain {
                x_range: (-radius, *radius),
                y_range: (-radius, *radius),
                periodic_x: false,
                periodic_y: false,
                disk_radius: Some(*radius),
            },
            SurfaceKind::CliffordTorus => Domain {
                x_range: (0.0, 2.0 * PI),
                y_range: (0.0, 2.0 * PI),
                periodic_x: true,
                periodic_y: true,
                disk_radius: None,
            },
            SurfaceKind::PmcTorus { a, b } => Domain {
                x_range: (0.0, 2.0 * PI * a),
                y_range: (0.0, 2.0 * PI * b),
                periodic_x: true,
                periodic_y: true,
                disk_radius: None,
            },
            SurfaceKind::GridFile(data) => data.domain,
            SurfaceKind::Moebius { inner, .. } => inner.domain(),
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            SurfaceKind::EquatorialSphere { radius } => format!("equatorial_sphere(R={radius})"),
            SurfaceKind::CliffordTorus => "clifford_torus".to_string(),
            SurfaceKind::PmcTorus { a, b } => format!("pmc_torus(a={a}, b={b})"),
            SurfaceKind::GridFile(data) => format!("grid_file({})", data.path),
            SurfaceKind::Moebius { inner, center } => format!(
                "moebius({}, a=({}, {}, {}, {}, {}))",
                inner.id(),
                center[0],
                center[1],
                center[2],
                center[3],
                center[4]
            ),
        }
    }

    /// Whether the kind is (a Möbius image of) lattice samples.
    pub fn is_sampled(&self) -> bool {
        match self {
            SurfaceKind::GridFile(_) => true,
            SurfaceKind::Moebius { inner, .. } => inner.is_sampled(),
            _ => false,
        }
    }

    /// Closed-form value `f(x, y)`; sampled kinds have none.
    pub fn value(&self, x: f64, y: f64) -> Result<RVec5> {
        match self {
            SurfaceKind::GridFile(data) => Err(Error::InvalidSpec(format!(
                "grid file {} has no closed form away from its lattice",
                data.path
            ))),
            SurfaceKind::Moebius { inner, center } => Ok(moebius_transform(center, &inner.value(x, y)?)),
            _ => Ok(catalog::analytic_jet(self, x, y).f),
        }
    }

    fn analytic_jet(&self, x: f64, y: f64) -> Result<Jet2> {
        match self {
            SurfaceKind::Moebius { inner, center } => Ok(moebius::push_jet(center, &inner.analytic_jet(x, y)?)),
            SurfaceKind::GridFile(data) => Err(Error::InvalidSpec(format!(
                "grid file {} has no analytic jets",
                data.path
            ))),
            _ => Ok(catalog::analytic_jet(self, x, y)),
        }
    }

    /// Central differences of the closed form; Möbius images push the inner
    /// finite-difference jet through the exact derivative of the map.
    fn fd_jet(&self, x: f64, y: f64, hx: f64, hy: f64) -> Result<Jet2> {
        if let SurfaceKind::Moebius { inner, center } = self {
            return Ok(moebius::push_jet(center, &inner.fd_jet(x, y, hx, hy)?));
        }
        let v = |dx: f64, dy: f64| self.value(x + dx, y + dy);
        let c = v(0.0, 0.0)?;
        let (e, w, n, s) = (v(hx, 0.0)?, v(-hx, 0.0)?, v(0.0, hy)?, v(0.0, -hy)?);
        let (ne, nw, se, sw) = (v(hx, hy)?, v(-hx, hy)?, v(hx, -hy)?, v(-hx, -hy)?);
        Ok(Jet2 {
            f: c,
            f_x: (e - w) / (2.0 * hx),
            f_y: (n - s) / (2.0 * hy),
            f_xx: (e - c * 2.0 + w) / (hx * hx),
            f_yy: (n - c * 2.0 + s) / (hy * hy),
            f_xy: (ne - nw - se + sw) / (4.0 * hx * hy),
        })
    }
}

/// A validated immersion source together with its derivative mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSpec {
    pub kind: SurfaceKind,
    pub mode: DerivativeMode,
}

impl ImmersionSpec {
    /// Validates the kind's invariants. `pmc_torus` parameters are accepted when
    /// `a^2 + b^2 = 1` to `1e-6` and then normalized onto the unit circle.
    pub fn new(kind: SurfaceKind, mode: DerivativeMode) -> Result<Self> {
        let kind = validate_kind(kind)?;
        if let DerivativeMode::FiniteDifference(step) = mode {
            match step {
                FdStep::Relative(r) | FdStep::Absolute(r) if !(r > 0.0 && r.is_finite()) => {
                    return Err(Error::InvalidSpec(format!(
                        "finite-difference step must be positive, got {r}"
                    )));
                }
                _ => {}
            }
        }
        if kind.is_sampled() && mode == DerivativeMode::Analytic {
            return Err(Error::InvalidSpec(
                "grid-file immersions only support finite-difference jets".into(),
            ));
        }
        let spec = ImmersionSpec { kind, mode };
        spec.check_periodicity()?;
        Ok(spec)
    }

    pub fn analytic(kind: SurfaceKind) -> Result<Self> {
        Self::new(kind, DerivativeMode::Analytic)
    }

    pub fn domain(&self) -> Domain {
        self.kind.domain()
    }

    /// A square `n x n` grid on the spec's domain (or the file lattice for sampled kinds).
    pub fn grid(&self, n: usize) -> Result<Grid> {
        match self.sampled_data() {
            Some(data) => data.grid(),
            None => Grid::new(self.domain(), n, n),
        }
    }

    fn sampled_data(&self) -> Option<&GridData> {
        let mut kind = &self.kind;
        loop {
            match kind {
                SurfaceKind::GridFile(data) => return Some(data),
                SurfaceKind::Moebius { inner, .. } => kind = inner,
                _ => return None,
            }
        }
    }

    fn check_periodicity(&self) -> Result<()> {
        if self.kind.is_sampled() {
            return Ok(());
        }
        let d = self.domain();
        for s in 0..16 {
            let t = s as f64 / 16.0;
            let y = d.y_range.0 + t * (d.y_range.1 - d.y_range.0);
            let x = d.x_range.0 + t * (d.x_range.1 - d.x_range.0);
            if d.periodic_x {
                let gap = (self.kind.value(d.x_range.0, y)? - self.kind.value(d.x_range.1, y)?).norm();
                if gap >= 1e-8 {
                    return Err(Error::InvalidSpec(format!(
                        "not periodic in x: gap {gap:.3e} at y = {y}"
                    )));
                }
            }
            if d.periodic_y {
                let gap = (self.kind.value(x, d.y_range.0)? - self.kind.value(x, d.y_range.1)?).norm();
                if gap >= 1e-8 {
                    return Err(Error::InvalidSpec(format!(
                        "not periodic in y: gap {gap:.3e} at x = {x}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn steps(&self, step: FdStep, spacing: Option<(f64, f64)>) -> Result<(f64, f64)> {
        let (lx, ly) = self.domain().extent();
        match step {
            FdStep::Relative(r) => Ok((r * lx, r * ly)),
            FdStep::Absolute(h) => Ok((h, h)),
            FdStep::GridSpacing => {
                spacing.ok_or_else(|| Error::InvalidSpec("grid-spacing steps need a grid; use jets_on_grid".into()))
            }
        }
    }

    /// 2-jet at `(x, y)` for analytic kinds.
    pub fn eval_jet(&self, x: f64, y: f64) -> Result<Jet2> {
        self.jet_with_spacing(x, y, None)
    }

    fn jet_with_spacing(&self, x: f64, y: f64, spacing: Option<(f64, f64)>) -> Result<Jet2> {
        if !self.domain().contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let jet = match self.mode {
            DerivativeMode::Analytic => self.kind.analytic_jet(x, y)?,
            DerivativeMode::FiniteDifference(step) => {
                let (hx, hy) = self.steps(step, spacing)?;
                self.kind.fd_jet(x, y, hx, hy)?
            }
        };
        jet.check_on_sphere(x, y)?;
        Ok(jet)
    }

    /// Jets at every node of `grid`, in node order.
    pub fn jets_on_grid(&self, grid: &Grid) -> Result<Vec<Jet2>> {
        if let Some(data) = self.sampled_data() {
            return self.sampled_jets(data, grid);
        }
        let spacing = Some((grid.dx(), grid.dy()));
        grid.map(|k| {
            let (x, y) = grid.point(k);
            self.jet_with_spacing(x, y, spacing)
        })
        .into_iter()
        .collect()
    }

    /// Second-order lattice differences of the samples, pushed through any Möbius layers.
    fn sampled_jets(&self, data: &GridData, grid: &Grid) -> Result<Vec<Jet2>> {
        let own = data.grid()?;
        if own != *grid {
            return Err(Error::InvalidSpec(format!(
                "grid file {} is sampled on {}x{}, analysis grid is {}x{}",
                data.path, own.nx, own.ny, grid.nx, grid.ny
            )));
        }
        let f = &data.samples;
        let fx = grid.d_dx(f, FdOrder::Second);
        let fy = grid.d_dy(f, FdOrder::Second);
        let fxx = grid.d_dxx(f, FdOrder::Second);
        let fyy = grid.d_dyy(f, FdOrder::Second);
        let fxy = grid.d_dy(&fx, FdOrder::Second);
        let mut centers = Vec::new();
        let mut kind = &self.kind;
        while let SurfaceKind::Moebius { inner, center } = kind {
            centers.push(*center);
            kind = inner;
        }
        (0..grid.len())
            .map(|k| {
                let mut jet = Jet2 {
                    f: f[k],
                    f_x: fx[k],
                    f_y: fy[k],
                    f_xx: fxx[k],
                    f_xy: fxy[k],
                    f_yy: fyy[k],
                };
                for center in centers.iter().rev() {
                    jet = moebius::push_jet(center, &jet);
                }
                let (x, y) = grid.point(k);
                jet.check_on_sphere(x, y)?;
                Ok(jet)
            })
            .collect()
    }
}

fn validate_kind(kind: SurfaceKind) -> Result<SurfaceKind> {
    match kind {
        SurfaceKind::EquatorialSphere { radius } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "sphere chart radius must be positive, got {radius}"
                )));
            }
            Ok(SurfaceKind::EquatorialSphere { radius })
        }
        SurfaceKind::PmcTorus { a, b } => {
            if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "pmc_torus needs 0 < a, b < 1, got a = {a}, b = {b}"
                )));
            }
            let r2 = a * a + b * b;
            if (r2 - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidSpec(format!("pmc_torus needs a^2 + b^2 = 1, got {r2}")));
            }
            let r = r2.sqrt();
            Ok(SurfaceKind::PmcTorus { a: a / r, b: b / r })
        }
        SurfaceKind::Moebius { inner, center } => {
            if !(center.norm() < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "Möbius center must satisfy |a| < 1, got {}",
                    center.norm()
                )));
            }
            Ok(SurfaceKind::Moebius {
                inner: Box::new(validate_kind(*inner)?),
                center,
            })
        }
        other => Ok(other),
    }
}

/// `(<f_x, f_y>, |f_x|^2 - |f_y|^2)`.
pub fn conformality_residual(j: &Jet2) -> (f64, f64) {
    (j.f_x.dot(&j.f_y), j.f_x.norm_squared() - j.f_y.norm_squared())
}

/// Relative defect `max(|<f_x, f_y>|, ||f_x|^2 - |f_y|^2|) / |f_x|^2`.
pub fn conformality_defect(j: &Jet2) -> f64 {
    let (a, b) = conformality_residual(j);
    a.abs().max(b.abs()) / j.f_x.norm_squared().max(f64::MIN_POSITIVE)
}

/// Conformal factor `u` with `e^{2u} = hermitian(f_z, f_z)` (which is `|f_x|^2 / 2`
/// for conformal jets). `(x, y)` only labels errors.
pub fn conformal_factor(j: &Jet2, x: f64, y: f64) -> Result<f64> {
    let norm = j.f_x.norm();
    if !(norm >= BRANCH_POINT_TOLERANCE) {
        return Err(Error::DegenerateImmersion { x, y, norm });
    }
    let defect = conformality_defect(j);
    if !(defect <= CONFORMAL_TOLERANCE) {
        return Err(Error::NotConformal { x, y, defect });
    }
    let fz = j.f_z();
    Ok(0.5 * hermitian(&fz, &fz).re.ln())
}

/// `xi_1^2 + xi_2^2`, the normal part of `<f_zz, f_zz>`; vanishes for isotropic immersions.
pub fn isotropy_indicator(j: &Jet2, n1: &RVec5, n2: &RVec5) -> Complex64 {
    let fzz = j.f_zz();
    let xi1 = bilinear_c(&fzz, &crate::linalg5::complexify(n1));
    let xi2 = bilinear_c(&fzz, &crate::linalg5::complexify(n2));
    xi1 * xi1 + xi2 * xi2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsotropyClass {
    Isotropic,
    Superconformal,
}

impl std::fmt::Display for IsotropyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IsotropyClass::Isotropic => "isotropic",
            IsotropyClass::Superconformal => "superconformal",
        })
    }
}

/// Isotropic when the indicator vanishes (to `tol`) over the whole grid.
pub fn classify_isotropy(indicators: &[Complex64], tol: f64) -> IsotropyClass {
    if indicators.iter().all(|z| z.norm() <= tol) {
        IsotropyClass::Isotropic
    } else {
        IsotropyClass::Superconformal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn clifford() -> ImmersionSpec {
        ImmersionSpec::analytic(SurfaceKind::CliffordTorus).unwrap()
    }

    fn sphere() -> ImmersionSpec {
        ImmersionSpec::analytic(SurfaceKind::EquatorialSphere { radius: 1.0 }).unwrap()
    }

    fn pmc() -> ImmersionSpec {
        ImmersionSpec::analytic(SurfaceKind::PmcTorus {
            a: 0.75f64.sqrt(),
            b: 0.5,
        })
        .unwrap()
    }

    fn moebius(center: RVec5) -> ImmersionSpec {
        ImmersionSpec::analytic(SurfaceKind::Moebius {
            inner: Box::new(SurfaceKind::CliffordTorus),
            center,
        })
        .unwrap()
    }

    fn assert_vec(a: RVec5, b: RVec5, tol: f64) {
        assert!((a - b).norm() <= tol, "{a:?} != {b:?}");
    }

    #[test]
    fn clifford_jet_at_origin() {
        let j = clifford().eval_jet(0.0, 0.0).unwrap();
        let s = FRAC_1_SQRT_2;
        assert_vec(j.f, RVec5::new(s, 0.0, s, 0.0, 0.0), 1e-15);
        assert_vec(j.f_x, RVec5::new(0.0, s, 0.0, 0.0, 0.0), 1e-15);
        assert_vec(j.f_xx, RVec5::new(-s, 0.0, 0.0, 0.0, 0.0), 1e-15);
    }

    #[test]
    fn sphere_jet_at_origin_matches_fd_oracle() {
        let j = sphere().eval_jet(0.0, 0.0).unwrap();
        assert_vec(j.f, RVec5::new(0.0, 0.0, 1.0, 0.0, 0.0), 1e-15);
        assert_vec(j.f_x, RVec5::new(2.0, 0.0, 0.0, 0.0, 0.0), 1e-15);
        let fd = ImmersionSpec::new(
            SurfaceKind::EquatorialSphere { radius: 1.0 },
            DerivativeMode::FiniteDifference(FdStep::Absolute(1e-4)),
        )
        .unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.2), (-0.7, 0.5)] {
            let a = sphere().eval_jet(x, y).unwrap();
            let b = fd.eval_jet(x, y).unwrap();
            assert_vec(a.f_x, b.f_x, 1e-7);
            assert_vec(a.f_y, b.f_y, 1e-7);
        }
    }

    #[test]
    fn analytic_second_derivatives_match_independent_differences() {
        // Oracle: fourth-order central differences of the closed-form value.
        let specs = [
            clifford(),
            sphere(),
            pmc(),
            moebius(RVec5::new(0.3, 0.0, 0.0, 0.0, 0.0)),
        ];
        let h = 1e-3;
        for spec in &specs {
            for &(x, y) in &[(0.2f64, 0.3f64), (0.5, 0.1), (0.7, 0.9)] {
                let j = spec.eval_jet(x, y).unwrap();
                let f = |dx: f64, dy: f64| spec.kind.value(x + dx, y + dy).unwrap();
                let d1 = |e: RVec5, w: RVec5, ee: RVec5, ww: RVec5| (ww - ee + (e - w) * 8.0) / (12.0 * h);
                let fx = d1(f(h, 0.0), f(-h, 0.0), f(2.0 * h, 0.0), f(-2.0 * h, 0.0));
                let fy = d1(f(0.0, h), f(0.0, -h), f(0.0, 2.0 * h), f(0.0, -2.0 * h));
                let fxx =
                    (f(h, 0.0) * 16.0 + f(-h, 0.0) * 16.0 - f(2.0 * h, 0.0) - f(-2.0 * h, 0.0) - f(0.0, 0.0) * 30.0)
                        / (12.0 * h * h);
                let fxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                assert_vec(j.f_x, fx, 1e-9);
                assert_vec(j.f_y, fy, 1e-9);
                assert_vec(j.f_xx, fxx, 1e-6);
                assert_vec(j.f_xy, fxy, 1e-5);
            }
        }
    }

    #[test]
    fn jets_are_unit_and_tangent() {
        let specs = [
            clifford(),
            sphere(),
            pmc(),
            moebius(RVec5::new(0.0, 0.0, 0.2, 0.0, 0.0)),
        ];
        for spec in &specs {
            let grid = spec.grid(16).unwrap();
            for j in spec.jets_on_grid(&grid).unwrap() {
                assert!(j.norm_deviation() < 1e-12);
                assert!(j.tangency_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn conformality_of_catalog_and_moebius_images() {
        let specs = [
            clifford(),
            sphere(),
            pmc(),
            moebius(RVec5::new(0.3, 0.0, 0.0, 0.0, 0.0)),
        ];
        for spec in &specs {
            let grid = spec.grid(12).unwrap();
            for j in spec.jets_on_grid(&grid).unwrap() {
                let (a, b) = conformality_residual(&j);
                assert!(a.abs() < 1e-8 && b.abs() < 1e-8, "{a} {b}");
            }
        }
    }

    #[test]
    fn non_conformal_map_is_detected() {
        // (a cos x, a sin x, b cos 2y, b sin 2y, 0): |f_x|^2 - |f_y|^2 = a^2 - 4 b^2
        let (a, b) = (0.8f64, 0.6f64);
        let (x, y) = (0.4f64, 1.1f64);
        let j = Jet2 {
            f: RVec5::new(a * x.cos(), a * x.sin(), b * (2.0 * y).cos(), b * (2.0 * y).sin(), 0.0),
            f_x: RVec5::new(-a * x.sin(), a * x.cos(), 0.0, 0.0, 0.0),
            f_y: RVec5::new(0.0, 0.0, -2.0 * b * (2.0 * y).sin(), 2.0 * b * (2.0 * y).cos(), 0.0),
            f_xx: RVec5::zeros(),
            f_xy: RVec5::zeros(),
            f_yy: RVec5::zeros(),
        };
        let (_, second) = conformality_residual(&j);
        assert_abs_diff_eq!(second, a * a - 4.0 * b * b, epsilon = 1e-14);
        assert!(matches!(conformal_factor(&j, x, y), Err(Error::NotConformal { .. })));
    }

    #[test]
    fn conformal_factor_examples() {
        let j = clifford().eval_jet(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(conformal_factor(&j, 1.0, 2.0).unwrap(), -(2f64.ln()), epsilon = 1e-14);
        let j = sphere().eval_jet(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            conformal_factor(&j, 0.0, 0.0).unwrap(),
            0.5 * 2f64.ln(),
            epsilon = 1e-14
        );
        let j = pmc().eval_jet(0.4, 0.2).unwrap();
        assert_abs_diff_eq!(
            conformal_factor(&j, 0.4, 0.2).unwrap(),
            -0.5 * 2f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn branch_point_is_rejected() {
        let j = Jet2 {
            f: RVec5::new(1.0, 0.0, 0.0, 0.0, 0.0),
            f_x: RVec5::zeros(),
            f_y: RVec5::zeros(),
            f_xx: RVec5::zeros(),
            f_xy: RVec5::zeros(),
            f_yy: RVec5::zeros(),
        };
        assert!(matches!(
            conformal_factor(&j, 0.0, 0.0),
            Err(Error::DegenerateImmersion { .. })
        ));
    }

    #[test]
    fn isotropy_indicator_examples() {
        let s = FRAC_1_SQRT_2;
        // Clifford normals at (x, y): N1 = (cos x, sin x, -cos y, -sin y, 0)/sqrt2, N2 = e4
        let (x, y) = (0.3f64, 1.2f64);
        let j = clifford().eval_jet(x, y).unwrap();
        let n1 = RVec5::new(x.cos(), x.sin(), -y.cos(), -y.sin(), 0.0) * s;
        let n2 = RVec5::new(0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(isotropy_indicator(&j, &n1, &n2).re, 1.0 / 16.0, epsilon = 1e-14);
        let (a, b) = (0.75f64.sqrt(), 0.5);
        let j = pmc().eval_jet(x, y).unwrap();
        let n1 = RVec5::new(
            b * (x / a).cos(),
            b * (x / a).sin(),
            -a * (y / b).cos(),
            -a * (y / b).sin(),
            0.0,
        );
        assert_abs_diff_eq!(isotropy_indicator(&j, &n1, &n2).re, 1.0 / 3.0, epsilon = 1e-14);
        let j = sphere().eval_jet(0.2, 0.1).unwrap();
        let e3 = RVec5::new(0.0, 0.0, 0.0, 1.0, 0.0);
        assert_abs_diff_eq!(isotropy_indicator(&j, &e3, &n2).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(
            classify_isotropy(&[Complex64::new(0.0, 0.0)], 1e-10),
            IsotropyClass::Isotropic
        );
    }

    #[test]
    fn fd_jets_converge_at_second_order() {
        let spec = |h: f64| {
            ImmersionSpec::new(
                SurfaceKind::Moebius {
                    inner: Box::new(SurfaceKind::CliffordTorus),
                    center: RVec5::new(0.3, 0.0, 0.0, 0.0, 0.0),
                },
                DerivativeMode::FiniteDifference(FdStep::Absolute(h)),
            )
            .unwrap()
        };
        let exact = moebius(RVec5::new(0.3, 0.0, 0.0, 0.0, 0.0));
        let err = |h: f64| {
            let s = spec(h);
            (0..20)
                .map(|k| {
                    let (x, y) = (0.31 * k as f64, 0.17 * k as f64 + 0.05);
                    let a = exact.eval_jet(x, y).unwrap();
                    let b = s.eval_jet(x, y).unwrap();
                    [
                        a.f_x - b.f_x,
                        a.f_y - b.f_y,
                        a.f_xx - b.f_xx,
                        a.f_xy - b.f_xy,
                        a.f_yy - b.f_yy,
                    ]
                    .iter()
                    .map(|d| d.amax())
                    .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ImmersionSpec::analytic(SurfaceKind::PmcTorus { a: 0.9, b: 0.5 }).is_err());
        assert!(ImmersionSpec::analytic(SurfaceKind::Moebius {
            inner: Box::new(SurfaceKind::CliffordTorus),
            center: RVec5::new(1.0, 0.0, 0.0, 0.0, 0.0),
        })
        .is_err());
        assert!(matches!(clifford().eval_jet(7.0, 0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn pmc_parameters_are_normalized() {
        let s = ImmersionSpec::analytic(SurfaceKind::PmcTorus { a: 0.8660254, b: 0.5 }).unwrap();
        match s.kind {
            SurfaceKind::PmcTorus { a, b } => assert_abs_diff_eq!(a * a + b * b, 1.0, epsilon = 1e-15),
            _ => unreachable!(),
        }
    }
}
