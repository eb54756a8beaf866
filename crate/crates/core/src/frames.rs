//! Adapted SO(5) frames `(f, F1, F2, N1, N2)` and their Maurer–Cartan forms
//! `A = F^T F_z`, `B = F^T F_zbar = conj(A)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::immersion::Jet2;
use crate::invariants::{tangent_basis, FundamentalData, InvariantFields, NormalFrame};
use crate::linalg5::{bracket, complexify_mat, project_kp, skew_defect, split_kp, CMat5, RMat5, RVec5, I};

/// Allowed `|F^T F - I|` for an adapted frame.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Orthogonal frame with columns `(f, F1, F2, N1, N2)` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub frames: Vec<RMat5>,
}

impl FrameField {
    pub fn max_orthogonality_defect(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| (f.transpose() * f - RMat5::identity()).norm())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, c: usize) -> Vec<RVec5> {
        self.frames.iter().map(|f| f.column(c).into_owned()).collect()
    }
}

/// Adapted frame in the coordinate gauge `F1 ∥ f_x`: for conformal jets
/// `F1 = f_x / (sqrt2 e^u)` and `F2 = f_y / (sqrt2 e^u)`.
pub fn build_adapted_frame(j: &Jet2, n1: &RVec5, n2: &RVec5) -> Result<RMat5> {
    let t = tangent_basis(j);
    let f = RMat5::from_columns(&[t[0], t[1], t[2], *n1, *n2]);
    let defect = (f.transpose() * f - RMat5::identity()).norm();
    if !(defect <= ORTHOGONALITY_TOLERANCE) {
        return Err(Error::DegenerateFrame(format!(
            "adapted frame is not orthogonal: |F^T F - I| = {defect:.3e}"
        )));
    }
    Ok(f)
}

pub fn build_frame_field(grid: &Grid, jets: &[Jet2], normals: &NormalFrame) -> Result<FrameField> {
    let frames = grid
        .map(|k| build_adapted_frame(&jets[k], &normals.n1[k], &normals.n2[k]))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(FrameField { frames })
}

/// `a_i = (e^{-u} xi_i + e^u h_i)/sqrt2`, `b_i = (e^{-u} xi_i - e^u h_i)/sqrt2`, as `[a1, a2, b1, b2]`.
pub fn aibi(fd: &FundamentalData) -> [Complex64; 4] {
    let (e, em) = (fd.u.exp(), (-fd.u).exp());
    let s = FRAC_1_SQRT_2;
    [
        (fd.xi1 * em + e * fd.h1) * s,
        (fd.xi2 * em + e * fd.h2) * s,
        (fd.xi1 * em - e * fd.h1) * s,
        (fd.xi2 * em - e * fd.h2) * s,
    ]
}

/// The connection matrix `A` of the adapted frame from the fundamental data.
pub fn assemble_a_analytic(fd: &FundamentalData) -> CMat5 {
    let c = Complex64::new(fd.u.exp() * FRAC_1_SQRT_2, 0.0);
    let [a1, a2, b1, b2] = aibi(fd);
    let z = Complex64::new(0.0, 0.0);
    let iuz = I * fd.u_z;
    let s = fd.sigma;
    CMat5::from_row_slice(&[
        z,
        -c,
        I * c,
        z,
        z,
        c,
        z,
        iuz,
        -a1,
        -a2,
        -I * c,
        -iuz,
        z,
        -I * b1,
        -I * b2,
        z,
        a1,
        I * b1,
        z,
        s,
        z,
        a2,
        I * b2,
        -s,
        z,
    ])
}

/// `A = F^T dF/dz`, `B = F^T dF/dzbar` by finite differences of the frame entries.
pub fn maurer_cartan_fd(grid: &Grid, frames: &FrameField) -> (Vec<CMat5>, Vec<CMat5>) {
    let dz = grid.d_z(&frames.frames);
    let dzbar = grid.d_zbar(&frames.frames);
    let ft: Vec<CMat5> = frames.frames.iter().map(|f| complexify_mat(&f.transpose())).collect();
    let a = ft.par_iter().zip(dz.par_iter()).map(|(t, d)| t * d).collect();
    let b = ft.par_iter().zip(dzbar.par_iter()).map(|(t, d)| t * d).collect();
    (a, b)
}

/// `|dA/dzbar - dB/dz - [A, B]|` (Frobenius) per node.
pub fn mc_flatness_residual(grid: &Grid, a: &[CMat5], b: &[CMat5]) -> Vec<f64> {
    let a_zbar = grid.d_zbar(a);
    let b_z = grid.d_z(b);
    grid.map(|k| (a_zbar[k] - b_z[k] - bracket(&a[k], &b[k])).norm())
}

/// Maurer–Cartan forms with their `k`/`p` parts and the scalar entries
/// `[a1, a2, b1, b2]` read back from `A`.
#[derive(Debug, Clone)]
pub struct MCForms {
    pub a: Vec<CMat5>,
    pub b: Vec<CMat5>,
    pub a_k: Vec<CMat5>,
    pub a_p: Vec<CMat5>,
    pub b_k: Vec<CMat5>,
    pub b_p: Vec<CMat5>,
    pub coeffs: Vec<[Complex64; 4]>,
}

impl MCForms {
    /// Largest difference between the entries read from `A` and the values from the invariants.
    pub fn aibi_mismatch(&self, fields: &InvariantFields) -> f64 {
        self.coeffs
            .iter()
            .zip(&fields.data)
            .map(|(c, d)| {
                let e = aibi(d);
                (0..4).map(|i| (c[i] - e[i]).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Splits every `A` (and `B = conj(A)`) into `k + p`.
pub fn kp_fields(a: Vec<CMat5>) -> Result<MCForms> {
    let b: Vec<CMat5> = a.iter().map(|m| m.map(|z| z.conj())).collect();
    let sa = a.iter().map(split_kp).collect::<Result<Vec<_>>>()?;
    let sb: Vec<_> = b.iter().map(project_kp).collect();
    let coeffs = a
        .iter()
        .map(|m| [m[(3, 1)], m[(4, 1)], -I * m[(3, 2)], -I * m[(4, 2)]])
        .collect();
    Ok(MCForms {
        a_k: sa.iter().map(|s| s.k_part).collect(),
        a_p: sa.iter().map(|s| s.p_part).collect(),
        b_k: sb.iter().map(|s| s.k_part).collect(),
        b_p: sb.iter().map(|s| s.p_part).collect(),
        a,
        b,
        coeffs,
    })
}

/// Analytic `A` at every node, split into `k + p`.
pub fn mc_forms_analytic(fields: &InvariantFields) -> Result<MCForms> {
    let a: Vec<CMat5> = fields.data.par_iter().map(assemble_a_analytic).collect();
    if let Some(d) = a.iter().map(skew_defect).find(|d| *d > 1e-12) {
        return Err(Error::NonSkewInput {
            defect: d,
            tolerance: 1e-12,
        });
    }
    kp_fields(a)
}
