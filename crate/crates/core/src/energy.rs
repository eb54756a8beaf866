//! Normal energy of the Gauss map, Willmore energy, total curvature and the
//! identity `E = 4 pi W + int K dA` with the genus lower bound.

use std::f64::consts::PI;

use crate::grid::{pairwise_sum, Grid};
use crate::invariants::{gauss_curvature, FundamentalData, InvariantFields};

/// `1 + h1^2 + h2^2 + e^{-4u}(|xi1|^2 + |xi2|^2)`.
pub fn energy_density(fd: &FundamentalData) -> f64 {
    1.0 + fd.mean_curvature_sq() + (-4.0 * fd.u).exp() * fd.hopf_sq()
}

/// `1 + |H|^2 - K`, nonnegative by the Gauss equation.
pub fn willmore_integrand(fd: &FundamentalData) -> f64 {
    1.0 + fd.mean_curvature_sq() - gauss_curvature(fd)
}

/// Coordinate quadrature weight of node `k`: `h` per periodic axis, composite
/// trapezoid (half weight at the two ends) per open axis, zero outside the
/// disk mask.
pub fn quadrature_weight(grid: &Grid, k: usize) -> f64 {
    if !grid.in_quadrature(k) {
        return 0.0;
    }
    let (i, j) = grid.coords(k);
    let w = |idx: usize, n: usize, periodic: bool, h: f64| {
        if !periodic && (idx == 0 || idx == n - 1) {
            0.5 * h
        } else {
            h
        }
    };
    w(i, grid.nx, grid.domain.periodic_x, grid.dx()) * w(j, grid.ny, grid.domain.periodic_y, grid.dy())
}

/// Area element `dA = 2 e^{2u} dx dy` with quadrature weights.
pub fn area_elements(grid: &Grid, fields: &InvariantFields) -> Vec<f64> {
    grid.map(|k| 2.0 * (2.0 * fields.data[k].u).exp() * quadrature_weight(grid, k))
}

fn integrate(values: impl Iterator<Item = f64>, da: &[f64]) -> f64 {
    let terms: Vec<f64> = values.zip(da).map(|(v, a)| v * a).collect();
    pairwise_sum(&terms)
}

pub fn total_energy(grid: &Grid, fields: &InvariantFields) -> f64 {
    let da = area_elements(grid, fields);
    integrate(fields.data.iter().map(energy_density), &da)
}

pub fn willmore_energy(grid: &Grid, fields: &InvariantFields) -> f64 {
    let da = area_elements(grid, fields);
    integrate(fields.data.iter().map(willmore_integrand), &da) / (2.0 * PI)
}

/// Area of the stereographic sphere outside the chart disk of radius `r`.
pub fn stereographic_tail_area(r: f64) -> f64 {
    4.0 * PI / (1.0 + r * r)
}

/// Largest `|density - (2(1 + |H|^2) - K)|`.
pub fn density_identity_residual(fields: &InvariantFields) -> f64 {
    fields
        .data
        .iter()
        .map(|d| (energy_density(d) - (2.0 * (1.0 + d.mean_curvature_sq()) - gauss_curvature(d))).abs())
        .fold(0.0, f64::max)
}

/// Smallest Willmore integrand over the grid.
pub fn min_willmore_integrand(fields: &InvariantFields) -> f64 {
    fields.data.iter().map(willmore_integrand).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    pub willmore: f64,
    /// `int K dA` with the intrinsic curvature `-2 e^{-2u} u_{z zbar}`.
    pub total_k: f64,
    pub area: f64,
    /// `E - 4 pi W - total_K`.
    pub identity_residual: f64,
    /// `total_K / 2 pi`.
    pub euler_char_estimate: f64,
    /// Genus declared by the chart topology.
    pub genus: u32,
    /// `E - 2 pi (2 - 2g)`.
    pub bound_slack: f64,
    /// Area (and, for density one, energy) outside a truncated chart, when known.
    pub tail: Option<f64>,
}

impl EnergyReport {
    /// The genus bound holds up to `tol`; tori must also have strictly positive energy.
    pub fn bound_satisfied(&self, tol: f64) -> bool {
        self.bound_slack >= -tol && (self.genus == 0 || self.energy > 0.0)
    }

    /// Flat `key = value` lines.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        use crate::numfmt::fmt_num;
        let mut out = vec![
            ("E", fmt_num(self.energy)),
            ("W", fmt_num(self.willmore)),
            ("total_K", fmt_num(self.total_k)),
            ("area", fmt_num(self.area)),
            ("identity_residual", fmt_num(self.identity_residual)),
            ("euler_char_estimate", fmt_num(self.euler_char_estimate)),
            ("genus", self.genus.to_string()),
            ("bound_slack", fmt_num(self.bound_slack)),
        ];
        if let Some(t) = self.tail {
            out.push(("tail", fmt_num(t)));
        }
        out
    }
}

pub fn energy_report(grid: &Grid, fields: &InvariantFields, tail: Option<f64>) -> EnergyReport {
    let da = area_elements(grid, fields);
    let energy = integrate(fields.data.iter().map(energy_density), &da);
    let willmore = integrate(fields.data.iter().map(willmore_integrand), &da) / (2.0 * PI);
    let total_k = integrate(fields.intrinsic_curvature().into_iter(), &da);
    let area = pairwise_sum(&da);
    let genus = grid.domain.genus();
    EnergyReport {
        energy,
        willmore,
        total_k,
        area,
        identity_residual: energy - 4.0 * PI * willmore - total_k,
        euler_char_estimate: total_k / (2.0 * PI),
        genus,
        bound_slack: energy - 2.0 * PI * (2.0 - 2.0 * genus as f64),
        tail,
    }
}
