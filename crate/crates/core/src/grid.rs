//! Rectangular coordinate charts, uniform grids and finite differences.
//!
//! Nodes are stored row-major with `y` outer: `index(i, j) = j * nx + i`.
//! On periodic axes the right endpoint is excluded and stencils wrap; on
//! open axes one-sided stencils of the same order are used at the edges.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg5::{CMat5, CVec5, RMat5, RVec5};

/// Minimum nodes per axis.
pub const MIN_NODES: usize = 8;

/// Nodes excluded from residual statistics next to an open boundary.
pub const BOUNDARY_LAYERS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub periodic_x: bool,
    pub periodic_y: bool,
    /// Quadrature is restricted to `x^2 + y^2 <= r^2` when set.
    pub disk_radius: Option<f64>,
}

impl Domain {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), periodic_x: bool, periodic_y: bool) -> Result<Self> {
        if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
            return Err(Error::InvalidSpec(format!(
                "empty domain [{}, {}] x [{}, {}]",
                x_range.0, x_range.1, y_range.0, y_range.1
            )));
        }
        Ok(Domain {
            x_range,
            y_range,
            periodic_x,
            periodic_y,
            disk_radius: None,
        })
    }

    pub fn with_disk(mut self, radius: f64) -> Self {
        self.disk_radius = Some(radius);
        self
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let slack_x = 1e-12 * (self.x_range.1 - self.x_range.0);
        let slack_y = 1e-12 * (self.y_range.1 - self.y_range.0);
        x >= self.x_range.0 - slack_x
            && x <= self.x_range.1 + slack_x
            && y >= self.y_range.0 - slack_y
            && y <= self.y_range.1 + slack_y
    }

    /// Genus implied by the chart topology: a doubly periodic chart is a torus.
    pub fn genus(&self) -> u32 {
        u32::from(self.periodic_x && self.periodic_y)
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.x_range.1 - self.x_range.0, self.y_range.1 - self.y_range.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Second,
    Fourth,
}

/// Order used for derivatives of derived scalar and matrix fields.
pub const FIELD_ORDER: FdOrder = FdOrder::Fourth;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub domain: Domain,
}

impl Grid {
    pub fn new(domain: Domain, nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidSpec(format!(
                "grid {nx}x{ny} is too small (need at least {MIN_NODES} nodes per axis)"
            )));
        }
        Ok(Grid { nx, ny, domain })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        let (lx, _) = self.domain.extent();
        if self.domain.periodic_x {
            lx / self.nx as f64
        } else {
            lx / (self.nx - 1) as f64
        }
    }

    pub fn dy(&self) -> f64 {
        let (_, ly) = self.domain.extent();
        if self.domain.periodic_y {
            ly / self.ny as f64
        } else {
            ly / (self.ny - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.domain.x_range.0 + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.domain.y_range.0 + j as f64 * self.dy()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.coords(k);
        (self.x(i), self.y(j))
    }

    /// Node is away from every open boundary by at least [`BOUNDARY_LAYERS`].
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let ok = |k: usize, n: usize, periodic: bool| periodic || (k >= BOUNDARY_LAYERS && k + BOUNDARY_LAYERS < n);
        ok(i, self.nx, self.domain.periodic_x) && ok(j, self.ny, self.domain.periodic_y)
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| {
                let (i, j) = self.coords(k);
                self.is_interior(i, j)
            })
            .collect()
    }

    /// Whether the node enters the quadrature (disk mask, if any).
    pub fn in_quadrature(&self, k: usize) -> bool {
        match self.domain.disk_radius {
            Some(r) => {
                let (x, y) = self.point(k);
                x * x + y * y <= r * r
            }
            None => true,
        }
    }

    /// Order-preserving parallel map over node indices.
    pub fn map<U, F>(&self, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        (0..self.len()).into_par_iter().map(f).collect()
    }

    fn axis_len(&self, axis: Axis) -> (usize, bool, f64) {
        match axis {
            Axis::X => (self.nx, self.domain.periodic_x, self.dx()),
            Axis::Y => (self.ny, self.domain.periodic_y, self.dy()),
        }
    }

    fn diff<T: FieldValue>(&self, field: &[T], axis: Axis, second: bool, order: FdOrder) -> Vec<T> {
        assert_eq!(field.len(), self.len(), "field does not match grid");
        let (n, periodic, h) = self.axis_len(axis);
        let scale = if second { 1.0 / (h * h) } else { 1.0 / h };
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = self.coords(k);
                let pos = match axis {
                    Axis::X => i,
                    Axis::Y => j,
                };
                let stencil = Stencil::select(order, second, pos, n, periodic);
                let fetch = |offset: isize| {
                    let mut p = pos as isize + offset;
                    if periodic {
                        p = p.rem_euclid(n as isize);
                    }
                    let p = p as usize;
                    match axis {
                        Axis::X => field[self.index(p, j)],
                        Axis::Y => field[self.index(i, p)],
                    }
                };
                stencil.apply(fetch, scale)
            })
            .collect()
    }

    pub fn d_dx<T: FieldValue>(&self, field: &[T], order: FdOrder) -> Vec<T> {
        self.diff(field, Axis::X, false, order)
    }

    pub fn d_dy<T: FieldValue>(&self, field: &[T], order: FdOrder) -> Vec<T> {
        self.diff(field, Axis::Y, false, order)
    }

    pub fn d_dxx<T: FieldValue>(&self, field: &[T], order: FdOrder) -> Vec<T> {
        self.diff(field, Axis::X, true, order)
    }

    pub fn d_dyy<T: FieldValue>(&self, field: &[T], order: FdOrder) -> Vec<T> {
        self.diff(field, Axis::Y, true, order)
    }

    /// `d/dz = (d/dx - i d/dy) / 2` at [`FIELD_ORDER`].
    pub fn d_z<T: Wirtinger>(&self, field: &[T]) -> Vec<T::Out> {
        let dx = self.d_dx(field, FIELD_ORDER);
        let dy = self.d_dy(field, FIELD_ORDER);
        dx.into_iter().zip(dy).map(|(a, b)| T::dz(a, b)).collect()
    }

    /// `d/dzbar = (d/dx + i d/dy) / 2` at [`FIELD_ORDER`].
    pub fn d_zbar<T: Wirtinger>(&self, field: &[T]) -> Vec<T::Out> {
        let dx = self.d_dx(field, FIELD_ORDER);
        let dy = self.d_dy(field, FIELD_ORDER);
        dx.into_iter().zip(dy).map(|(a, b)| T::dzbar(a, b)).collect()
    }

    /// `d^2/(dz dzbar) = (d_xx + d_yy) / 4` at [`FIELD_ORDER`].
    pub fn d_zzbar<T: FieldValue>(&self, field: &[T]) -> Vec<T> {
        let xx = self.d_dxx(field, FIELD_ORDER);
        let yy = self.d_dyy(field, FIELD_ORDER);
        xx.into_iter().zip(yy).map(|(a, b)| a.plus(b).scaled(0.25)).collect()
    }
}

struct Stencil {
    offsets: &'static [isize],
    coeffs: &'static [f64],
    negate: bool,
    mirror: bool,
}

impl Stencil {
    fn select(order: FdOrder, second: bool, pos: usize, n: usize, periodic: bool) -> Stencil {
        use stencils::*;
        let from_end = n - 1 - pos;
        let (offsets, coeffs, edge) = match (order, second) {
            (FdOrder::Second, false) => match (periodic, pos.min(from_end)) {
                (false, 0) => (&O2_D1_EDGE_OFF[..], &O2_D1_EDGE[..], true),
                _ => (&O2_D1_OFF[..], &O2_D1[..], false),
            },
            (FdOrder::Second, true) => match (periodic, pos.min(from_end)) {
                (false, 0) => (&O2_D2_EDGE_OFF[..], &O2_D2_EDGE[..], true),
                _ => (&O2_D2_OFF[..], &O2_D2[..], false),
            },
            (FdOrder::Fourth, false) => match (periodic, pos.min(from_end)) {
                (false, 0) => (&O4_D1_EDGE0_OFF[..], &O4_D1_EDGE0[..], true),
                (false, 1) => (&O4_D1_EDGE1_OFF[..], &O4_D1_EDGE1[..], true),
                _ => (&O4_D1_OFF[..], &O4_D1[..], false),
            },
            (FdOrder::Fourth, true) => match (periodic, pos.min(from_end)) {
                (false, 0) => (&O4_D2_EDGE0_OFF[..], &O4_D2_EDGE0[..], true),
                (false, 1) => (&O4_D2_EDGE1_OFF[..], &O4_D2_EDGE1[..], true),
                _ => (&O4_D2_OFF[..], &O4_D2[..], false),
            },
        };
        // Right-edge stencils are the left-edge ones reflected; odd derivatives flip sign.
        let mirror = edge && from_end < pos;
        Stencil {
            offsets,
            coeffs,
            negate: mirror && !second,
            mirror,
        }
    }

    fn apply<T: FieldValue>(&self, fetch: impl Fn(isize) -> T, scale: f64) -> T {
        let sign = if self.negate { -1.0 } else { 1.0 };
        let mut acc: Option<T> = None;
        for (&o, &c) in self.offsets.iter().zip(self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let off = if self.mirror { -o } else { o };
            let term = fetch(off).scaled(c * sign * scale);
            acc = Some(match acc {
                Some(a) => a.plus(term),
                None => term,
            });
        }
        acc.expect("stencil has a nonzero coefficient")
    }
}

mod stencils {
    pub const O2_D1_OFF: [isize; 2] = [-1, 1];
    pub const O2_D1: [f64; 2] = [-0.5, 0.5];
    pub const O2_D1_EDGE_OFF: [isize; 3] = [0, 1, 2];
    pub const O2_D1_EDGE: [f64; 3] = [-1.5, 2.0, -0.5];
    pub const O2_D2_OFF: [isize; 3] = [-1, 0, 1];
    pub const O2_D2: [f64; 3] = [1.0, -2.0, 1.0];
    pub const O2_D2_EDGE_OFF: [isize; 4] = [0, 1, 2, 3];
    pub const O2_D2_EDGE: [f64; 4] = [2.0, -5.0, 4.0, -1.0];

    const T: f64 = 1.0 / 12.0;
    pub const O4_D1_OFF: [isize; 4] = [-2, -1, 1, 2];
    pub const O4_D1: [f64; 4] = [T, -8.0 * T, 8.0 * T, -T];
    pub const O4_D1_EDGE0_OFF: [isize; 5] = [0, 1, 2, 3, 4];
    pub const O4_D1_EDGE0: [f64; 5] = [-25.0 * T, 48.0 * T, -36.0 * T, 16.0 * T, -3.0 * T];
    pub const O4_D1_EDGE1_OFF: [isize; 5] = [-1, 0, 1, 2, 3];
    pub const O4_D1_EDGE1: [f64; 5] = [-3.0 * T, -10.0 * T, 18.0 * T, -6.0 * T, T];
    pub const O4_D2_OFF: [isize; 5] = [-2, -1, 0, 1, 2];
    pub const O4_D2: [f64; 5] = [-T, 16.0 * T, -30.0 * T, 16.0 * T, -T];
    pub const O4_D2_EDGE0_OFF: [isize; 6] = [0, 1, 2, 3, 4, 5];
    pub const O4_D2_EDGE0: [f64; 6] = [45.0 * T, -154.0 * T, 214.0 * T, -156.0 * T, 61.0 * T, -10.0 * T];
    pub const O4_D2_EDGE1_OFF: [isize; 6] = [-1, 0, 1, 2, 3, 4];
    pub const O4_D2_EDGE1: [f64; 6] = [10.0 * T, -15.0 * T, -4.0 * T, 14.0 * T, -6.0 * T, T];
}

/// Values that finite-difference stencils can combine.
pub trait FieldValue: Copy + Send + Sync {
    fn scaled(self, s: f64) -> Self;
    fn plus(self, other: Self) -> Self;
}

impl FieldValue for f64 {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
}

impl FieldValue for Complex64 {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
}

impl<const R: usize, const C: usize> FieldValue for SMatrix<f64, R, C> {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
}

impl<const R: usize, const C: usize> FieldValue for SMatrix<Complex64, R, C> {
    fn scaled(self, s: f64) -> Self {
        self * Complex64::new(s, 0.0)
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
}

/// Fields whose complex derivatives `d/dz`, `d/dzbar` can be formed from `d/dx`, `d/dy`.
pub trait Wirtinger: FieldValue {
    type Out: FieldValue;
    fn dz(dx: Self, dy: Self) -> Self::Out;
    fn dzbar(dx: Self, dy: Self) -> Self::Out;
}

impl Wirtinger for f64 {
    type Out = Complex64;
    fn dz(dx: f64, dy: f64) -> Complex64 {
        Complex64::new(0.5 * dx, -0.5 * dy)
    }
    fn dzbar(dx: f64, dy: f64) -> Complex64 {
        Complex64::new(0.5 * dx, 0.5 * dy)
    }
}

impl Wirtinger for Complex64 {
    type Out = Complex64;
    fn dz(dx: Self, dy: Self) -> Self {
        (dx - Complex64::i() * dy) * 0.5
    }
    fn dzbar(dx: Self, dy: Self) -> Self {
        (dx + Complex64::i() * dy) * 0.5
    }
}

impl Wirtinger for RVec5 {
    type Out = CVec5;
    fn dz(dx: Self, dy: Self) -> CVec5 {
        SVector::from_fn(|k, _| Complex64::new(0.5 * dx[k], -0.5 * dy[k]))
    }
    fn dzbar(dx: Self, dy: Self) -> CVec5 {
        SVector::from_fn(|k, _| Complex64::new(0.5 * dx[k], 0.5 * dy[k]))
    }
}

impl Wirtinger for RMat5 {
    type Out = CMat5;
    fn dz(dx: Self, dy: Self) -> CMat5 {
        SMatrix::from_fn(|r, c| Complex64::new(0.5 * dx[(r, c)], -0.5 * dy[(r, c)]))
    }
    fn dzbar(dx: Self, dy: Self) -> CMat5 {
        SMatrix::from_fn(|r, c| Complex64::new(0.5 * dx[(r, c)], 0.5 * dy[(r, c)]))
    }
}

impl Wirtinger for CMat5 {
    type Out = CMat5;
    fn dz(dx: Self, dy: Self) -> CMat5 {
        (dx - dy * Complex64::i()) * Complex64::new(0.5, 0.0)
    }
    fn dzbar(dx: Self, dy: Self) -> CMat5 {
        (dx + dy * Complex64::i()) * Complex64::new(0.5, 0.0)
    }
}

/// Pairwise (tree) summation; the order depends only on the input length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Max and RMS of a residual over a set of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
}

impl ResidualStats {
    pub fn over(values: &[f64], nodes: &[usize]) -> Self {
        if nodes.is_empty() {
            return ResidualStats::default();
        }
        let max = nodes.iter().map(|&k| values[k]).fold(0.0, f64::max);
        let squares: Vec<f64> = nodes.iter().map(|&k| values[k] * values[k]).collect();
        let rms = (pairwise_sum(&squares) / nodes.len() as f64).sqrt();
        ResidualStats { max, rms }
    }

    /// Statistics over the interior nodes of `grid`.
    pub fn interior(grid: &Grid, values: &[f64]) -> Self {
        Self::over(values, &grid.interior_indices())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn open_grid(n: usize) -> Grid {
        Grid::new(Domain::new((-0.7, 1.3), (0.2, 1.1), false, false).unwrap(), n, n + 3).unwrap()
    }

    fn poly_field(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let (x, y) = grid.point(k);
                f(x, y)
            })
            .collect()
    }

    #[test]
    fn fourth_order_stencils_are_exact_on_low_degree_polynomials() {
        let g = open_grid(12);
        let f = poly_field(&g, |x, y| {
            0.3 * x.powi(4) - x.powi(3) * y + 2.0 * y.powi(4) + x * y - 1.0
        });
        let fx = g.d_dx(&f, FdOrder::Fourth);
        let fy = g.d_dy(&f, FdOrder::Fourth);
        let fxx = g.d_dxx(&f, FdOrder::Fourth);
        let fyy = g.d_dyy(&f, FdOrder::Fourth);
        for k in 0..g.len() {
            let (x, y) = g.point(k);
            assert!(
                (fx[k] - (1.2 * x.powi(3) - 3.0 * x * x * y + y)).abs() < 1e-10,
                "fx at {k}"
            );
            assert!((fy[k] - (-x.powi(3) + 8.0 * y.powi(3) + x)).abs() < 1e-10, "fy at {k}");
            assert!((fxx[k] - (3.6 * x * x - 6.0 * x * y)).abs() < 1e-9, "fxx at {k}");
            assert!((fyy[k] - 24.0 * y * y).abs() < 1e-9, "fyy at {k}");
        }
        // second derivatives use 6-point one-sided stencils: exact through degree 5
        let q = poly_field(&g, |x, _| x.powi(5));
        let qxx = g.d_dxx(&q, FdOrder::Fourth);
        for (k, v) in qxx.iter().enumerate() {
            let (x, _) = g.point(k);
            assert!((v - 20.0 * x.powi(3)).abs() < 1e-8);
        }
    }

    #[test]
    fn second_order_stencils_are_exact_on_quadratics() {
        let g = open_grid(9);
        let f = poly_field(&g, |x, y| 1.5 * x * x - x * y + 0.25 * y * y + 3.0 * x);
        let fx = g.d_dx(&f, FdOrder::Second);
        let fyy = g.d_dyy(&f, FdOrder::Second);
        for k in 0..g.len() {
            let (x, y) = g.point(k);
            assert!((fx[k] - (3.0 * x - y + 3.0)).abs() < 1e-11);
            assert!((fyy[k] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_derivative_converges_at_fourth_order() {
        let err = |n: usize| {
            let g = Grid::new(Domain::new((0.0, 2.0 * PI), (0.0, 2.0 * PI), true, true).unwrap(), n, n).unwrap();
            let f = poly_field(&g, |x, y| (2.0 * x).sin() * y.cos());
            let fz = g.d_z(&f);
            (0..g.len())
                .map(|k| {
                    let (x, y) = g.point(k);
                    let exact = Complex64::new((2.0 * x).cos() * y.cos(), 0.5 * (2.0 * x).sin() * y.sin());
                    (fz[k] - exact).norm()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn interior_excludes_open_boundary_layers() {
        let g = open_grid(10);
        assert!(!g.is_interior(1, 5));
        assert!(g.is_interior(2, 2));
        assert!(!g.is_interior(8, 5));
        let p = Grid::new(Domain::new((0.0, 1.0), (0.0, 1.0), true, true).unwrap(), 8, 8).unwrap();
        assert_eq!(p.interior_indices().len(), 64);
    }

    #[test]
    fn pairwise_sum_is_exact_for_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }
}
