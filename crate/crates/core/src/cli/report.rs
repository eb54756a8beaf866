//! The `verify` residual suite: every internal-consistency check with its
//! threshold, and the CSV it is reported in.

use std::fmt::Write as _;

use crate::cli::config::Tolerances;
use crate::energy::{density_identity_residual, energy_density, min_willmore_integrand};
use crate::error::Error;
use crate::grid::{Grid, ResidualStats};
use crate::immersion::{conformality_defect, SurfaceKind};
use crate::numfmt::fmt_num;
use crate::pipeline::Analysis;

pub const VERIFY_HEADER: &str = "check,max,rms,threshold,pass";

/// Angle of the constant normal rotation used by the gauge checks.
pub const GAUGE_ANGLE: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub max: f64,
    pub rms: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `max <= threshold`.
    pub fn upper(name: &str, stats: ResidualStats, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            max: stats.max,
            rms: stats.rms,
            threshold,
            pass: stats.max <= threshold,
        }
    }

    /// A single scalar `|value| <= threshold`.
    pub fn scalar(name: &str, value: f64, threshold: f64) -> Self {
        let v = value.abs();
        Self::upper(name, ResidualStats { max: v, rms: v }, threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(VERIFY_HEADER);
        out.push('\n');
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.name,
                fmt_num(c.max),
                fmt_num(c.rms),
                fmt_num(c.threshold),
                u8::from(c.pass)
            );
        }
        out
    }
}

/// Grid spacing relative to the chart extent, about `1/n`.
pub fn relative_spacing(grid: &Grid) -> f64 {
    let (lx, ly) = grid.domain.extent();
    (grid.dx() / lx).max(grid.dy() / ly)
}

/// Discretisation allowance `max(1e-6, C h^p)` with `C = 1e4` at fourth
/// order and `C = 1e2` at second order.
pub fn auto_threshold(grid: &Grid, order: u32) -> f64 {
    let h = relative_spacing(grid);
    let c = if order >= 4 { 1e4 } else { 1e2 };
    (c * h.powi(order as i32)).max(1e-6)
}

fn stats_all(values: &[f64]) -> ResidualStats {
    let nodes: Vec<usize> = (0..values.len()).collect();
    ResidualStats::over(values, &nodes)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> ResidualStats {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    stats_all(&d)
}

/// Runs the full suite on an analysed immersion.
pub fn verify_analysis(a: &Analysis, tol: &Tolerances) -> crate::Result<VerificationReport> {
    let order = a.convergence_order();
    let auto = auto_threshold(&a.grid, order);
    let structure = tol.structure.unwrap_or(auto);
    let frame = tol.frame.unwrap_or(auto);
    let flatness = tol.flatness.unwrap_or(auto);
    let mut checks = Vec::new();

    let on_sphere: Vec<f64> = a.jets.iter().map(|j| j.norm_deviation()).collect();
    checks.push(Check::upper("on_sphere", stats_all(&on_sphere), tol.on_sphere));
    let conf: Vec<f64> = a.jets.iter().map(conformality_defect).collect();
    checks.push(Check::upper(
        "conformality",
        ResidualStats::interior(&a.grid, &conf),
        structure,
    ));
    checks.push(Check::scalar(
        "orthogonality",
        a.frames.max_orthogonality_defect(),
        tol.orthogonality,
    ));

    let r = &a.residuals;
    for (name, values) in [
        ("gauss", &r.res_g),
        ("codazzi_1", &r.res_c1),
        ("codazzi_2", &r.res_c2),
        ("ricci", &r.res_r),
    ] {
        checks.push(Check::upper(name, ResidualStats::interior(&a.grid, values), structure));
    }

    let (a_fd, b_fd) = a.mc_fd();
    let gap: Vec<f64> = a_fd.iter().zip(&a.mc.a).map(|(x, y)| (x - y).norm()).collect();
    checks.push(Check::upper(
        "frame_consistency",
        ResidualStats::interior(&a.grid, &gap),
        frame,
    ));
    let flat = crate::frames::mc_flatness_residual(&a.grid, &a_fd, &b_fd);
    checks.push(Check::upper(
        "flatness",
        ResidualStats::interior(&a.grid, &flat),
        flatness,
    ));
    checks.push(Check::upper(
        "special_property",
        stats_all(&a.special_property()),
        tol.special,
    ));

    let v = a.verdict(tol.verdict);
    checks.push(Check::scalar("tension_route_gap", v.route_gap, auto));
    checks.push(Check::scalar("tension_sparsity", v.sparsity, auto));
    let realness = v.realness.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::scalar("tension_realness", realness, 1e-8));
    checks.push(Check::scalar(
        "verdict_consistency",
        f64::from(u8::from(!v.consistent())),
        0.0,
    ));

    let scale = a.fields.data.iter().map(energy_density).fold(1.0, f64::max);
    checks.push(Check::scalar(
        "density_identity",
        density_identity_residual(&a.fields),
        1e-10 * scale,
    ));
    let wmin = min_willmore_integrand(&a.fields);
    checks.push(Check::scalar("willmore_nonnegative", wmin.min(0.0), 1e-8));

    let e = a.energy();
    let energy_tol = tol.energy.unwrap_or(auto * e.energy.abs().max(1.0));
    checks.push(Check::scalar("energy_identity", e.identity_residual, energy_tol));
    if e.genus == 1 {
        checks.push(Check::scalar("gauss_bonnet", e.total_k, energy_tol));
    }
    let tail = e.tail.unwrap_or(0.0);
    checks.push(Check::scalar(
        "genus_bound",
        (e.bound_slack + tail).min(0.0),
        energy_tol + disk_band(a),
    ));

    let b = a.rotated(GAUGE_ANGLE)?;
    let fa = &a.fields.data;
    let fb = &b.fields.data;
    let pick = |f: &dyn Fn(&crate::invariants::FundamentalData) -> f64,
                d: &[crate::invariants::FundamentalData]|
     -> Vec<f64> { d.iter().map(f).collect() };
    let gauge_rows: [(&str, ResidualStats); 8] = [
        ("gauge_K", max_abs_diff(&a.gauss_curvature(), &b.gauss_curvature())),
        (
            "gauge_Kperp",
            max_abs_diff(&a.normal_curvature(), &b.normal_curvature()),
        ),
        (
            "gauge_norm_H",
            max_abs_diff(
                &pick(&|d| d.mean_curvature_sq().sqrt(), fa),
                &pick(&|d| d.mean_curvature_sq().sqrt(), fb),
            ),
        ),
        (
            "gauge_hopf",
            max_abs_diff(&pick(&|d| d.hopf_sq(), fa), &pick(&|d| d.hopf_sq(), fb)),
        ),
        ("gauge_res_G", max_abs_diff(&r.res_g, &b.residuals.res_g)),
        (
            "gauge_res_codazzi",
            max_abs_diff(&r.codazzi_norm(), &b.residuals.codazzi_norm()),
        ),
        ("gauge_res_R", max_abs_diff(&r.res_r, &b.residuals.res_r)),
        ("gauge_energy", {
            let eb = b.energy();
            let d = (e.energy - eb.energy).abs().max((e.willmore - eb.willmore).abs());
            ResidualStats { max: d, rms: d }
        }),
    ];
    for (name, s) in gauge_rows {
        checks.push(Check::upper(name, s, tol.gauge));
    }
    Ok(VerificationReport { checks })
}

/// Energy a masked disk chart can miss in its stair-stepped boundary band:
/// perimeter x spacing x largest energy per unit coordinate area.
fn disk_band(a: &Analysis) -> f64 {
    let Some(r) = a.grid.domain.disk_radius else {
        return 0.0;
    };
    let peak = a
        .fields
        .data
        .iter()
        .map(|d| 2.0 * (2.0 * d.u).exp() * energy_density(d))
        .fold(0.0, f64::max);
    2.0 * std::f64::consts::PI * r * a.grid.dx().max(a.grid.dy()) * peak
}

/// Report for an input the pipeline rejected: the failing check is listed
/// with the measured defect. Returns `None` for errors that are not checks.
pub fn rejected_input(kind: &SurfaceKind, error: &Error, tol: &Tolerances) -> Option<VerificationReport> {
    let check = match error {
        Error::OffSphere { deviation, .. } => {
            let max = match sampled_data(kind) {
                Some(d) => d.max_norm_deviation().0.max(*deviation),
                None => *deviation,
            };
            Check::scalar("on_sphere", max, tol.on_sphere)
        }
        Error::NotConformal { defect, .. } => {
            Check::scalar("conformality", *defect, crate::immersion::CONFORMAL_TOLERANCE)
        }
        Error::DegenerateImmersion { norm, .. } => Check {
            name: "immersion".into(),
            max: *norm,
            rms: *norm,
            threshold: crate::immersion::BRANCH_POINT_TOLERANCE,
            pass: false,
        },
        Error::FrameObstruction { .. } | Error::DegenerateFrame(_) => Check {
            name: "normal_frame".into(),
            max: f64::NAN,
            rms: f64::NAN,
            threshold: 0.0,
            pass: false,
        },
        _ => return None,
    };
    Some(VerificationReport {
        checks: vec![Check { pass: false, ..check }],
    })
}

fn sampled_data(kind: &SurfaceKind) -> Option<&crate::immersion::GridData> {
    match kind {
        SurfaceKind::GridFile(d) => Some(d),
        SurfaceKind::Moebius { inner, .. } => sampled_data(inner),
        _ => None,
    }
}
