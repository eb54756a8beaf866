//! Fundamental data `(u, h1, h2, xi1, xi2, sigma)`, curvatures and the
//! Gauss/Codazzi/Ricci compatibility residuals over a grid.
//!
//! Everything is computed in two phases: nodewise values from jets and the
//! normal frame, then finite differences of the completed fields.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, ResidualStats};
use crate::immersion::{conformal_factor, Jet2};
use crate::linalg5::{hermitian, CVec5, RMat5, RVec5};

/// Projected normals shorter than this mark a degenerate propagation step.
const MIN_PROJECTED_NORM: f64 = 0.1;

/// Orthonormal basis `(t0, t1, t2)` of `span(f, f_x, f_y)` by Gram–Schmidt.
pub fn tangent_basis(j: &Jet2) -> [RVec5; 3] {
    let t0 = j.f.normalize();
    let t1 = (j.f_x - t0 * t0.dot(&j.f_x)).normalize();
    let t2 = (j.f_y - t0 * t0.dot(&j.f_y) - t1 * t1.dot(&j.f_y)).normalize();
    [t0, t1, t2]
}

fn project_normal(v: &RVec5, t: &[RVec5; 3]) -> RVec5 {
    t.iter().fold(*v, |acc, ti| acc - ti * ti.dot(v))
}

/// Orthonormal normal frame `(N1, N2)` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFrame {
    pub n1: Vec<RVec5>,
    pub n2: Vec<RVec5>,
    /// Rotation angle needed to close the propagated frame around a periodic
    /// `x` axis (before it was distributed along the row).
    pub closing_mismatch_x: Option<f64>,
    /// Largest closing angle over the columns for a periodic `y` axis.
    pub closing_mismatch_y: Option<f64>,
}

impl NormalFrame {
    /// Rotates `(N1, N2)` by the constant angle `theta` at every node.
    pub fn rotated(&self, theta: f64) -> NormalFrame {
        let (s, c) = theta.sin_cos();
        NormalFrame {
            n1: self.n1.iter().zip(&self.n2).map(|(a, b)| a * c + b * s).collect(),
            n2: self.n1.iter().zip(&self.n2).map(|(a, b)| b * c - a * s).collect(),
            ..self.clone()
        }
    }

    /// Smallest `<N_i(node), N_i(neighbour)>` over grid edges (including periodic wraps).
    pub fn min_neighbour_alignment(&self, grid: &Grid) -> f64 {
        let mut worst = f64::INFINITY;
        for k in 0..grid.len() {
            let (i, j) = grid.coords(k);
            let mut neighbours = Vec::with_capacity(2);
            if i + 1 < grid.nx {
                neighbours.push(grid.index(i + 1, j));
            } else if grid.domain.periodic_x {
                neighbours.push(grid.index(0, j));
            }
            if j + 1 < grid.ny {
                neighbours.push(grid.index(i, j + 1));
            } else if grid.domain.periodic_y {
                neighbours.push(grid.index(i, 0));
            }
            for m in neighbours {
                worst = worst.min(self.n1[k].dot(&self.n1[m])).min(self.n2[k].dot(&self.n2[m]));
            }
        }
        worst
    }

    /// Largest violation of orthonormality and normality to `(f, f_x, f_y)`.
    pub fn max_defect(&self, jets: &[Jet2]) -> f64 {
        jets.iter()
            .zip(self.n1.iter().zip(&self.n2))
            .map(|(j, (a, b))| {
                [
                    (a.norm() - 1.0).abs(),
                    (b.norm() - 1.0).abs(),
                    a.dot(b).abs(),
                    a.dot(&j.f).abs(),
                    b.dot(&j.f).abs(),
                    a.dot(&j.f_x).abs() / j.f_x.norm(),
                    b.dot(&j.f_x).abs() / j.f_x.norm(),
                    a.dot(&j.f_y).abs() / j.f_y.norm(),
                    b.dot(&j.f_y).abs() / j.f_y.norm(),
                ]
                .into_iter()
                .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Closest orthonormal pair (polar factor) to the projections of `(p1, p2)`
/// onto the normal plane spanned under `t`.
fn transport(p1: &RVec5, p2: &RVec5, t: &[RVec5; 3], node: (usize, usize)) -> Result<(RVec5, RVec5)> {
    let m1 = project_normal(p1, t);
    let m2 = project_normal(p2, t);
    let g = Matrix2::new(m1.dot(&m1), m1.dot(&m2), m1.dot(&m2), m2.dot(&m2));
    let det = g.determinant();
    let smallest = 0.5 * (g.trace() - ((g[(0, 0)] - g[(1, 1)]).powi(2) + 4.0 * g[(0, 1)].powi(2)).sqrt());
    if !(smallest > MIN_PROJECTED_NORM * MIN_PROJECTED_NORM) {
        return Err(Error::FrameObstruction {
            i: node.0,
            j: node.1,
            reason: format!(
                "normal plane turned by nearly 90 degrees (projected norm {:.3e})",
                smallest.max(0.0).sqrt()
            ),
        });
    }
    // G^{-1/2} from the closed-form square root of a 2x2 SPD matrix
    let s = det.sqrt();
    let root = (g + Matrix2::identity() * s) / (g.trace() + 2.0 * s).sqrt();
    let w = root.try_inverse().expect("positive definite");
    Ok((m1 * w[(0, 0)] + m2 * w[(1, 0)], m1 * w[(0, 1)] + m2 * w[(1, 1)]))
}

fn rotate_pair(a: &RVec5, b: &RVec5, phi: f64) -> (RVec5, RVec5) {
    let (s, c) = phi.sin_cos();
    (a * c + b * s, b * c - a * s)
}

/// Angle `theta` with `p1 = cos(theta) n1 + sin(theta) n2`.
fn angle_between(p1: &RVec5, n1: &RVec5, n2: &RVec5) -> f64 {
    p1.dot(n2).atan2(p1.dot(n1))
}

/// Seed normals at the first node: the first ambient axis with a usable
/// normal projection becomes `N1`, the next independent one `N2`.
fn seed_normals(t: &[RVec5; 3]) -> Result<(RVec5, RVec5)> {
    let axes: Vec<RVec5> = (0..5)
        .map(|k| {
            let mut e = RVec5::zeros();
            e[k] = 1.0;
            e
        })
        .collect();
    let (k1, n1) = axes
        .iter()
        .enumerate()
        .map(|(k, e)| (k, project_normal(e, t)))
        .find(|(_, p)| p.norm() >= 0.45)
        .ok_or_else(|| Error::FrameObstruction {
            i: 0,
            j: 0,
            reason: "no ambient axis has a usable normal projection".into(),
        })?;
    let n1 = n1.normalize();
    let n2 = axes[k1 + 1..]
        .iter()
        .map(|e| {
            let p = project_normal(e, t);
            p - n1 * n1.dot(&p)
        })
        .find(|p| p.norm() >= 0.4)
        .or_else(|| {
            axes.iter()
                .map(|e| {
                    let p = project_normal(e, t);
                    p - n1 * n1.dot(&p)
                })
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        })
        .expect("five axes");
    Ok((n1, n2.normalize()))
}

/// Builds a smooth normal frame by discrete parallel transport from the first
/// node: along row 0, then up every column. On periodic axes the closing
/// rotation is spread linearly along the path so the field is single-valued.
/// `N2` is flipped globally if needed so that `(f, F1, F2, N1, N2)` has det +1.
pub fn build_normal_frame(grid: &Grid, jets: &[Jet2]) -> Result<NormalFrame> {
    assert_eq!(jets.len(), grid.len(), "jets do not match grid");
    let bases: Vec<[RVec5; 3]> = jets.par_iter().map(tangent_basis).collect();
    let (nx, ny) = (grid.nx, grid.ny);

    let (s1, s2) = seed_normals(&bases[0])?;
    let mut row = vec![(s1, s2); nx];
    for i in 1..nx {
        let prev = row[i - 1];
        row[i] = transport(&prev.0, &prev.1, &bases[grid.index(i, 0)], (i, 0))?;
    }
    let mut closing_mismatch_x = None;
    if grid.domain.periodic_x {
        let last = row[nx - 1];
        let (p1, _) = transport(&last.0, &last.1, &bases[0], (0, 0))?;
        let theta = angle_between(&p1, &s1, &s2);
        for (i, pair) in row.iter_mut().enumerate() {
            *pair = rotate_pair(&pair.0, &pair.1, -theta * i as f64 / nx as f64);
        }
        closing_mismatch_x = Some(theta);
    }

    let periodic_y = grid.domain.periodic_y;
    let columns: Vec<(Vec<(RVec5, RVec5)>, f64)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![row[i]; ny];
            for j in 1..ny {
                let prev = col[j - 1];
                col[j] = transport(&prev.0, &prev.1, &bases[grid.index(i, j)], (i, j))?;
            }
            let mut theta = 0.0;
            if periodic_y {
                let last = col[ny - 1];
                let (p1, _) = transport(&last.0, &last.1, &bases[grid.index(i, 0)], (i, 0))?;
                theta = angle_between(&p1, &col[0].0, &col[0].1);
                for (j, pair) in col.iter_mut().enumerate() {
                    *pair = rotate_pair(&pair.0, &pair.1, -theta * j as f64 / ny as f64);
                }
            }
            Ok((col, theta))
        })
        .collect::<Result<_>>()?;

    let closing_mismatch_y = periodic_y.then(|| columns.iter().map(|(_, t)| t.abs()).fold(0.0, f64::max));
    let mut n1 = vec![RVec5::zeros(); grid.len()];
    let mut n2 = vec![RVec5::zeros(); grid.len()];
    for (i, (col, _)) in columns.iter().enumerate() {
        for (j, pair) in col.iter().enumerate() {
            let k = grid.index(i, j);
            n1[k] = pair.0;
            n2[k] = pair.1;
        }
    }

    let t = &bases[0];
    let det = RMat5::from_columns(&[t[0], t[1], t[2], n1[0], n2[0]]).determinant();
    if det < 0.0 {
        n2.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(NormalFrame {
        n1,
        n2,
        closing_mismatch_x,
        closing_mismatch_y,
    })
}

/// Pointwise fundamental data of the immersion in the frame `(N1, N2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalData {
    pub u: f64,
    pub u_z: Complex64,
    pub h1: f64,
    pub h2: f64,
    pub xi1: Complex64,
    pub xi2: Complex64,
    pub sigma: Complex64,
}

impl FundamentalData {
    pub fn mean_curvature_sq(&self) -> f64 {
        self.h1 * self.h1 + self.h2 * self.h2
    }

    pub fn hopf_sq(&self) -> f64 {
        self.xi1.norm_sqr() + self.xi2.norm_sqr()
    }
}

/// `K = 1 + |H|^2 - e^{-4u}(|xi1|^2 + |xi2|^2)`.
pub fn gauss_curvature(fd: &FundamentalData) -> f64 {
    1.0 + fd.mean_curvature_sq() - (-4.0 * fd.u).exp() * fd.hopf_sq()
}

fn pair(v: &CVec5, w: &RVec5) -> Complex64 {
    v.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

/// Fundamental data over a grid together with the first-derivative fields the
/// residuals need.
#[derive(Debug, Clone)]
pub struct InvariantFields {
    pub data: Vec<FundamentalData>,
    pub u_zbar_z: Vec<f64>,
    pub sigma_zbar: Vec<Complex64>,
    pub h_z: [Vec<Complex64>; 2],
    pub h_zbar: [Vec<Complex64>; 2],
    pub xi_zbar: [Vec<Complex64>; 2],
}

/// Residuals of the Gauss, Codazzi (two components) and Ricci equations.
#[derive(Debug, Clone)]
pub struct CompatibilityResiduals {
    pub res_g: Vec<f64>,
    pub res_c1: Vec<f64>,
    pub res_c2: Vec<f64>,
    pub res_r: Vec<f64>,
}

impl CompatibilityResiduals {
    /// `sqrt(res_c1^2 + res_c2^2)`; unlike the components it is independent of the normal gauge.
    pub fn codazzi_norm(&self) -> Vec<f64> {
        self.res_c1.iter().zip(&self.res_c2).map(|(a, b)| a.hypot(*b)).collect()
    }

    pub fn stats(&self, grid: &Grid) -> [(&'static str, ResidualStats); 4] {
        [
            ("gauss", ResidualStats::interior(grid, &self.res_g)),
            ("codazzi1", ResidualStats::interior(grid, &self.res_c1)),
            ("codazzi2", ResidualStats::interior(grid, &self.res_c2)),
            ("ricci", ResidualStats::interior(grid, &self.res_r)),
        ]
    }
}

/// Components of the normal derivative of `H` along `d/dz` by two routes.
#[derive(Debug, Clone)]
pub struct NormalDerivativeH {
    /// `(dh1 + h2 sigma, dh2 - h1 sigma)`.
    pub direct: Vec<[Complex64; 2]>,
    /// `e^{-2u}(dbar xi1 + xi2 conj(sigma), dbar xi2 - xi1 conj(sigma))`.
    pub codazzi: Vec<[Complex64; 2]>,
    pub difference: Vec<f64>,
}

/// Computes the fundamental data. `sigma` is the antisymmetrized pairing
/// `(<d_z N2, N1> - <d_z N1, N2>) / 2`, which equals `<d_z N2, N1>` for an
/// exactly orthonormal frame and is unchanged by constant normal rotations.
pub fn fundamental_data(grid: &Grid, jets: &[Jet2], normals: &NormalFrame) -> Result<InvariantFields> {
    assert_eq!(jets.len(), grid.len(), "jets do not match grid");
    let u: Vec<f64> = grid
        .map(|k| {
            let (x, y) = grid.point(k);
            conformal_factor(&jets[k], x, y)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(fields_from_u(grid, jets, normals, u))
}

/// As [`fundamental_data`] but without the conformality check: `u` is read
/// from `e^{2u} = <f_z, conj f_z>` whatever the defect. Used for maps whose
/// conformality is itself a diagnostic.
pub fn fundamental_data_unchecked(grid: &Grid, jets: &[Jet2], normals: &NormalFrame) -> InvariantFields {
    assert_eq!(jets.len(), grid.len(), "jets do not match grid");
    let u: Vec<f64> = jets
        .iter()
        .map(|j| {
            let fz = j.f_z();
            0.5 * hermitian(&fz, &fz).re.ln()
        })
        .collect();
    fields_from_u(grid, jets, normals, u)
}

fn fields_from_u(grid: &Grid, jets: &[Jet2], normals: &NormalFrame, u: Vec<f64>) -> InvariantFields {
    let u_z = grid.d_z(&u);
    let dn1 = grid.d_z(&normals.n1);
    let dn2 = grid.d_z(&normals.n2);

    let data: Vec<FundamentalData> = grid.map(|k| {
        let j = &jets[k];
        let (n1, n2) = (&normals.n1[k], &normals.n2[k]);
        let lap = j.f_zbar_z();
        let fzz = j.f_zz();
        let e = (-2.0 * u[k]).exp();
        FundamentalData {
            u: u[k],
            u_z: u_z[k],
            h1: e * lap.dot(n1),
            h2: e * lap.dot(n2),
            xi1: pair(&fzz, n1),
            xi2: pair(&fzz, n2),
            sigma: 0.5 * (pair(&dn2[k], n1) - pair(&dn1[k], n2)),
        }
    });

    let h1: Vec<f64> = data.iter().map(|d| d.h1).collect();
    let h2: Vec<f64> = data.iter().map(|d| d.h2).collect();
    let xi1: Vec<Complex64> = data.iter().map(|d| d.xi1).collect();
    let xi2: Vec<Complex64> = data.iter().map(|d| d.xi2).collect();
    let sigma: Vec<Complex64> = data.iter().map(|d| d.sigma).collect();
    InvariantFields {
        u_zbar_z: grid.d_zzbar(&u),
        sigma_zbar: grid.d_zbar(&sigma),
        h_z: [grid.d_z(&h1), grid.d_z(&h2)],
        h_zbar: [grid.d_zbar(&h1), grid.d_zbar(&h2)],
        xi_zbar: [grid.d_zbar(&xi1), grid.d_zbar(&xi2)],
        data,
    }
}

impl InvariantFields {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn gauss_curvature(&self) -> Vec<f64> {
        self.data.iter().map(gauss_curvature).collect()
    }

    /// Curvature of the induced metric from the conformal factor: `-2 e^{-2u} u_{z zbar}`.
    pub fn intrinsic_curvature(&self) -> Vec<f64> {
        self.data
            .iter()
            .zip(&self.u_zbar_z)
            .map(|(d, l)| -2.0 * (-2.0 * d.u).exp() * l)
            .collect()
    }

    /// `K_perp = -e^{-2u} Im(sigma_zbar)`.
    pub fn normal_curvature(&self) -> Vec<f64> {
        self.data
            .iter()
            .zip(&self.sigma_zbar)
            .map(|(d, s)| -(-2.0 * d.u).exp() * s.im)
            .collect()
    }

    pub fn residuals(&self) -> CompatibilityResiduals {
        let n = self.len();
        let mut out = CompatibilityResiduals {
            res_g: Vec::with_capacity(n),
            res_c1: Vec::with_capacity(n),
            res_c2: Vec::with_capacity(n),
            res_r: Vec::with_capacity(n),
        };
        for k in 0..n {
            let d = &self.data[k];
            let e2 = (2.0 * d.u).exp();
            let em2 = 1.0 / e2;
            let (dh1, dh2) = (self.h_z[0][k], self.h_z[1][k]);
            let (dx1, dx2) = (self.xi_zbar[0][k], self.xi_zbar[1][k]);
            let s = d.sigma;
            out.res_g
                .push((2.0 * self.u_zbar_z[k] - em2 * d.hopf_sq() + e2 * (1.0 + d.mean_curvature_sq())).abs());
            out.res_c1
                .push((e2 * (dh1 + d.h2 * s) - (dx1 + d.xi2 * s.conj())).norm());
            out.res_c2
                .push((e2 * (dh2 - d.h1 * s) - (dx2 - d.xi1 * s.conj())).norm());
            out.res_r
                .push((self.sigma_zbar[k].im + em2 * (d.xi1 * d.xi2.conj()).im).abs());
        }
        out
    }

    pub fn normal_derivative_h(&self) -> NormalDerivativeH {
        let n = self.len();
        let mut direct = Vec::with_capacity(n);
        let mut codazzi = Vec::with_capacity(n);
        let mut difference = Vec::with_capacity(n);
        for k in 0..n {
            let d = &self.data[k];
            let s = d.sigma;
            let em2 = (-2.0 * d.u).exp();
            let a = [self.h_z[0][k] + d.h2 * s, self.h_z[1][k] - d.h1 * s];
            let b = [
                em2 * (self.xi_zbar[0][k] + d.xi2 * s.conj()),
                em2 * (self.xi_zbar[1][k] - d.xi1 * s.conj()),
            ];
            difference.push(((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt());
            direct.push(a);
            codazzi.push(b);
        }
        NormalDerivativeH {
            direct,
            codazzi,
            difference,
        }
    }
}
