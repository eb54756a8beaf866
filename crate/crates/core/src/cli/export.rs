//! CSV, mesh and OBJ writers. All numbers go through [`fmt_num`], so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::energy::energy_density;
use crate::gauss_tension::TensionData;
use crate::grid::Grid;
use crate::linalg5::RVec5;
use crate::numfmt::fmt_num;
use crate::pipeline::Analysis;
use crate::Result;

pub const FIELDS_HEADER: &str =
    "x,y,u,h1,h2,re_xi1,im_xi1,re_xi2,im_xi2,re_sigma,im_sigma,K,Kperp,res_G,res_C1,res_C2,res_R,density";

pub const TENSION_HEADER: &str =
    "x,y,re_A1,im_A1,re_A2,im_A2,re_B1,im_B1,re_B2,im_B2,norm_M,norm_gradH,norm_psi,special";

fn row(values: &[f64]) -> String {
    values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",")
}

pub fn fields_csv(a: &Analysis) -> String {
    let k = a.gauss_curvature();
    let kp = a.normal_curvature();
    let r = &a.residuals;
    let mut out = String::with_capacity(a.grid.len() * 300);
    out.push_str(FIELDS_HEADER);
    out.push('\n');
    for n in 0..a.grid.len() {
        let (x, y) = a.grid.point(n);
        let d = &a.fields.data[n];
        let _ = writeln!(
            out,
            "{}",
            row(&[
                x,
                y,
                d.u,
                d.h1,
                d.h2,
                d.xi1.re,
                d.xi1.im,
                d.xi2.re,
                d.xi2.im,
                d.sigma.re,
                d.sigma.im,
                k[n],
                kp[n],
                r.res_g[n],
                r.res_c1[n],
                r.res_c2[n],
                r.res_r[n],
                energy_density(d),
            ])
        );
    }
    out
}

pub fn tension_csv(grid: &Grid, data: &[TensionData], special: &[f64]) -> String {
    let mut out = String::with_capacity(grid.len() * 300);
    out.push_str(TENSION_HEADER);
    out.push('\n');
    for (n, t) in data.iter().enumerate() {
        let (x, y) = grid.point(n);
        let c = &t.coeffs;
        let _ = writeln!(
            out,
            "{}",
            row(&[
                x,
                y,
                c[0].re,
                c[0].im,
                c[1].re,
                c[1].im,
                c[2].re,
                c[2].im,
                c[3].re,
                c[3].im,
                t.m.norm(),
                t.grad_h_norm(),
                t.psi.norm(),
                special[n],
            ])
        );
    }
    out
}

/// `S4MESH nx ny` then `x y f0 f1 f2 f3 f4` per node. `tokens`, when given,
/// replaces the formatted `f` columns verbatim (pass-through of input files).
pub fn mesh_text(grid: &Grid, f: &[RVec5], tokens: Option<&[[String; 5]]>) -> String {
    let mut out = format!("S4MESH {} {}\n", grid.nx, grid.ny);
    for n in 0..grid.len() {
        let (x, y) = grid.point(n);
        let cols = match tokens {
            Some(t) => t[n].join(" "),
            None => (0..5).map(|c| fmt_num(f[n][c])).collect::<Vec<_>>().join(" "),
        };
        let _ = writeln!(out, "{} {} {}", fmt_num(x), fmt_num(y), cols);
    }
    out
}

/// Orthographic OBJ view of the mesh on ambient axes `axes`, quads wrapped
/// across periodic axes.
pub fn obj_text(grid: &Grid, f: &[RVec5], axes: [usize; 3]) -> String {
    let mut out = format!("# orthographic view on axes {} {} {}\n", axes[0], axes[1], axes[2]);
    for v in f {
        let _ = writeln!(
            out,
            "v {} {} {}",
            fmt_num(v[axes[0]]),
            fmt_num(v[axes[1]]),
            fmt_num(v[axes[2]])
        );
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let cells_x = if grid.domain.periodic_x { nx } else { nx - 1 };
    let cells_y = if grid.domain.periodic_y { ny } else { ny - 1 };
    for j in 0..cells_y {
        for i in 0..cells_x {
            let v = |i: usize, j: usize| grid.index(i % nx, j % ny) + 1;
            let _ = writeln!(out, "f {} {} {} {}", v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
        }
    }
    out
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
