//! Gauss map into the flag manifold, its tension and the harmonicity verdict.
//!
//! The tension of the Gauss map is represented in frame coordinates by
//! `M = dA_p/dzbar + [B_k, A_p]`, whose only nonzero entries are the
//! tangent–normal blocks carrying `A1, A2` (real) and `B1, B2` (imaginary).
//! The Gauss map is harmonic exactly when the mean curvature vector is parallel.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;

use crate::frames::{FrameField, MCForms};
use crate::grid::{Grid, ResidualStats};
use crate::invariants::InvariantFields;
use crate::linalg5::{
    bilinear_c, bracket, complexify, hermitian, isotropic_combo, project_kp, CMat5, CVec5, RMat5, RVec5, I,
};

/// A point of the flag manifold as three spanning vectors:
/// `X0 = R F0`, `X1 = C (F1 - i F2)`, `X2 = C (N1 - i N2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlagPoint {
    pub x0: RVec5,
    pub x1: CVec5,
    pub x2: CVec5,
}

impl FlagPoint {
    /// Homogeneous projection to the sphere.
    pub fn projection(&self) -> RVec5 {
        self.x0
    }

    /// Largest bilinear or Hermitian pairing between distinct lines, and
    /// bilinear self-pairing of the isotropic lines.
    pub fn orthogonality_defect(&self) -> f64 {
        let x0 = complexify(&self.x0);
        [
            bilinear_c(&self.x1, &self.x1).norm(),
            bilinear_c(&self.x2, &self.x2).norm(),
            bilinear_c(&x0, &self.x1).norm(),
            bilinear_c(&x0, &self.x2).norm(),
            bilinear_c(&self.x1, &self.x2).norm(),
            hermitian(&self.x1, &self.x2).norm(),
            hermitian(&x0, &self.x1).norm(),
            hermitian(&x0, &self.x2).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Hermitian angle between the complex lines spanned by `v` and `w`.
pub fn line_angle(v: &CVec5, w: &CVec5) -> f64 {
    let c = hermitian(v, w).norm() / (v.norm() * w.norm());
    c.min(1.0).acos()
}

pub fn gauss_map(frame: &RMat5) -> FlagPoint {
    let col = |c: usize| frame.column(c).into_owned();
    FlagPoint {
        x0: col(0),
        x1: isotropic_combo(&col(1), &col(2)),
        x2: isotropic_combo(&col(3), &col(4)),
    }
}

/// `M = dA_p/dzbar + [B_k, A_p]` per node.
pub fn tension_matrix_direct(grid: &Grid, mc: &MCForms) -> Vec<CMat5> {
    let dp = grid.d_zbar(&mc.a_p);
    grid.map(|k| dp[k] + bracket(&mc.b_k[k], &mc.a_p[k]))
}

/// Largest entry of `M` outside the tangent–normal blocks (row/column 0,
/// tangent–tangent and normal–normal blocks must vanish).
pub fn sparsity_defect(m: &CMat5) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let tangent_normal =
                (matches!(i, 1 | 2) && matches!(j, 3 | 4)) || (matches!(i, 3 | 4) && matches!(j, 1 | 2));
            if !tangent_normal {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// `[A1, A2, B1, B2]` from the fundamental data (Codazzi form), where with
/// `c = e^u / sqrt2`:
/// `A1 = c(dh1 + dbar h1 + h2(sigma + conj sigma))`,
/// `A2 = c(dh2 + dbar h2 - h1(sigma + conj sigma))`,
/// `B1 = c(dh1 - dbar h1 + h2(sigma - conj sigma))`,
/// `B2 = c(dh2 - dbar h2 - h1(sigma - conj sigma))`.
pub fn tension_coeffs(fields: &InvariantFields) -> Vec<[Complex64; 4]> {
    (0..fields.len())
        .map(|k| {
            let d = &fields.data[k];
            let c = d.u.exp() * FRAC_1_SQRT_2;
            let (dh1, dh2) = (fields.h_z[0][k], fields.h_z[1][k]);
            let (bh1, bh2) = (fields.h_zbar[0][k], fields.h_zbar[1][k]);
            let sp = d.sigma + d.sigma.conj();
            let sm = d.sigma - d.sigma.conj();
            [
                (dh1 + bh1 + d.h2 * sp) * c,
                (dh2 + bh2 - d.h1 * sp) * c,
                (dh1 - bh1 + d.h2 * sm) * c,
                (dh2 - bh2 - d.h1 * sm) * c,
            ]
        })
        .collect()
}

/// The tension matrix predicted by the coefficients: `M(1,3) = -A1`,
/// `M(1,4) = -A2`, `M(2,3) = -i B1`, `M(2,4) = -i B2`, skew-symmetric.
pub fn tension_matrix_from_coeffs(c: &[Complex64; 4]) -> CMat5 {
    let mut m = CMat5::zeros();
    let entries = [
        ((1, 3), -c[0]),
        ((1, 4), -c[1]),
        ((2, 3), -I * c[2]),
        ((2, 4), -I * c[3]),
    ];
    for ((i, j), v) in entries {
        m[(i, j)] = v;
        m[(j, i)] = -v;
    }
    m
}

/// Per-node tension data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensionData {
    pub m: CMat5,
    pub coeffs: [Complex64; 4],
    /// Normal derivative of `H` along `d/dz` in the `(N1, N2)` frame.
    pub grad_h: [Complex64; 2],
    /// Tension vector `(-A1 + i A2) F1 + (-i B1 + B2) F2`.
    pub psi: CVec5,
}

impl TensionData {
    pub fn grad_h_norm(&self) -> f64 {
        (self.grad_h[0].norm_sqr() + self.grad_h[1].norm_sqr()).sqrt()
    }
}

pub fn tension_vector(fields: &InvariantFields, frames: &FrameField, m: &[CMat5]) -> Vec<TensionData> {
    let coeffs = tension_coeffs(fields);
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let scale = SQRT_2 * fields.data[k].u.exp();
            let f = &frames.frames[k];
            let f1 = complexify(&f.column(1).into_owned());
            let f2 = complexify(&f.column(2).into_owned());
            TensionData {
                m: m[k],
                coeffs: *c,
                grad_h: [(c[0] + c[2]) / scale, (c[1] + c[3]) / scale],
                psi: f1 * (-c[0] + I * c[1]) + f2 * (-I * c[2] + c[3]),
            }
        })
        .collect()
}

/// `|[A_p, B_p]_p|` per node; vanishes for the Gauss map of any conformal immersion.
pub fn special_property_residual(mc: &MCForms) -> Vec<f64> {
    mc.a_p
        .iter()
        .zip(&mc.b_p)
        .map(|(a, b)| project_kp(&bracket(a, b)).p_part.norm())
        .collect()
}

/// Outcome of the two harmonicity indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub tolerance: f64,
    pub max_m: f64,
    pub max_grad_h: f64,
    pub harmonic_by_m: bool,
    pub harmonic_by_grad_h: bool,
    /// `max |Im A1|, |Im A2|, |Re B1|, |Re B2|`.
    pub realness: [f64; 4],
    /// Largest entry of `M` outside its structural pattern.
    pub sparsity: f64,
    /// Largest `|M_direct - M_from_coeffs|`.
    pub route_gap: f64,
}

impl Verdict {
    pub fn consistent(&self) -> bool {
        self.harmonic_by_m == self.harmonic_by_grad_h
    }

    pub fn harmonic(&self) -> bool {
        self.harmonic_by_m && self.harmonic_by_grad_h
    }

    pub fn label(&self) -> &'static str {
        match (self.harmonic_by_m, self.harmonic_by_grad_h) {
            (true, true) => "HARMONIC",
            (false, false) => "NOT HARMONIC",
            _ => "INCONSISTENT",
        }
    }
}

/// Verdict over interior nodes at tolerance `tol`.
pub fn harmonicity_verdict(grid: &Grid, data: &[TensionData], tol: f64) -> Verdict {
    let nodes = grid.interior_indices();
    let max_of = |f: &dyn Fn(&TensionData) -> f64| nodes.iter().map(|&k| f(&data[k])).fold(0.0, f64::max);
    let max_m = max_of(&|t| t.m.norm());
    let max_grad_h = max_of(&|t| t.grad_h_norm());
    Verdict {
        tolerance: tol,
        max_m,
        max_grad_h,
        harmonic_by_m: max_m <= tol,
        harmonic_by_grad_h: max_grad_h <= tol,
        realness: [
            max_of(&|t| t.coeffs[0].im.abs()),
            max_of(&|t| t.coeffs[1].im.abs()),
            max_of(&|t| t.coeffs[2].re.abs()),
            max_of(&|t| t.coeffs[3].re.abs()),
        ],
        sparsity: max_of(&|t| sparsity_defect(&t.m)),
        route_gap: max_of(&|t| (t.m - tension_matrix_from_coeffs(&t.coeffs)).norm()),
    }
}

/// `max(1e-6, 50 h^p scale)`: `h` the coarsest spacing relative to the chart
/// extent (about `1/n`), `p` the convergence order of the pipeline,
/// `scale = max |A_p|`.
pub fn default_verdict_tolerance(grid: &Grid, mc: &MCForms, order: u32) -> f64 {
    let (lx, ly) = grid.domain.extent();
    let h = (grid.dx() / lx).max(grid.dy() / ly);
    let scale = ResidualStats::interior(grid, &mc.a_p.iter().map(|m| m.norm()).collect::<Vec<_>>()).max;
    (50.0 * h.powi(order as i32) * scale).max(1e-6)
}
