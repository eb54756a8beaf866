//! Closed-form jets of the built-in surfaces.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{Jet2, SurfaceKind};
use crate::linalg5::RVec5;

/// Value and partials of a scalar function up to order two.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScalarJet {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

/// Jet of `n / d` from the jets of numerator and denominator (quotient rule).
pub(crate) fn quotient(n: &Jet2, d: &ScalarJet) -> Jet2 {
    let g = n.f / d.v;
    let g_x = (n.f_x - g * d.x) / d.v;
    let g_y = (n.f_y - g * d.y) / d.v;
    let g_xx = (n.f_xx - g_x * (2.0 * d.x) - g * d.xx) / d.v;
    let g_yy = (n.f_yy - g_y * (2.0 * d.y) - g * d.yy) / d.v;
    let g_xy = (n.f_xy - g_x * d.y - g_y * d.x - g * d.xy) / d.v;
    Jet2 {
        f: g,
        f_x: g_x,
        f_y: g_y,
        f_xx: g_xx,
        f_xy: g_xy,
        f_yy: g_yy,
    }
}

/// Jets of the catalog kinds. Callers route composite kinds elsewhere.
pub(super) fn analytic_jet(kind: &SurfaceKind, x: f64, y: f64) -> Jet2 {
    match kind {
        SurfaceKind::CliffordTorus => {
            let s = FRAC_1_SQRT_2;
            let (sx, cx) = x.sin_cos();
            let (sy, cy) = y.sin_cos();
            Jet2 {
                f: RVec5::new(cx, sx, cy, sy, 0.0) * s,
                f_x: RVec5::new(-sx, cx, 0.0, 0.0, 0.0) * s,
                f_y: RVec5::new(0.0, 0.0, -sy, cy, 0.0) * s,
                f_xx: RVec5::new(-cx, -sx, 0.0, 0.0, 0.0) * s,
                f_xy: RVec5::zeros(),
                f_yy: RVec5::new(0.0, 0.0, -cy, -sy, 0.0) * s,
            }
        }
        SurfaceKind::PmcTorus { a, b } => {
            let (a, b) = (*a, *b);
            let (sx, cx) = (x / a).sin_cos();
            let (sy, cy) = (y / b).sin_cos();
            Jet2 {
                f: RVec5::new(a * cx, a * sx, b * cy, b * sy, 0.0),
                f_x: RVec5::new(-sx, cx, 0.0, 0.0, 0.0),
                f_y: RVec5::new(0.0, 0.0, -sy, cy, 0.0),
                f_xx: RVec5::new(-cx / a, -sx / a, 0.0, 0.0, 0.0),
                f_xy: RVec5::zeros(),
                f_yy: RVec5::new(0.0, 0.0, -cy / b, -sy / b, 0.0),
            }
        }
        SurfaceKind::EquatorialSphere { .. } => {
            let r2 = x * x + y * y;
            let n = Jet2 {
                f: RVec5::new(2.0 * x, 2.0 * y, 1.0 - r2, 0.0, 0.0),
                f_x: RVec5::new(2.0, 0.0, -2.0 * x, 0.0, 0.0),
                f_y: RVec5::new(0.0, 2.0, -2.0 * y, 0.0, 0.0),
                f_xx: RVec5::new(0.0, 0.0, -2.0, 0.0, 0.0),
                f_xy: RVec5::zeros(),
                f_yy: RVec5::new(0.0, 0.0, -2.0, 0.0, 0.0),
            };
            let d = ScalarJet {
                v: 1.0 + r2,
                x: 2.0 * x,
                y: 2.0 * y,
                xx: 2.0,
                xy: 0.0,
                yy: 2.0,
            };
            quotient(&n, &d)
        }
        SurfaceKind::GridFile(_) | SurfaceKind::Moebius { .. } => {
            unreachable!("composite kinds have no catalog jet")
        }
    }
}

/// Veronese surface of `S^2` in `S^4` read through the stereographic chart
/// `(x, y) -> (2x, 2y, 1 - r^2) / (1 + r^2)`.
///
/// It is minimal and isotropic with Gaussian curvature `1/3` and nonzero normal
/// curvature, which makes it a useful probe for normal-bundle quantities that
/// vanish on the catalog tori. It is not part of the catalog because its
/// chart has no closed periodic domain.
pub fn veronese_chart_jet(x: f64, y: f64) -> Jet2 {
    let p = analytic_jet(&SurfaceKind::EquatorialSphere { radius: 1.0 }, x, y);
    let s3 = 3f64.sqrt();
    // symmetric bilinear form whose diagonal is the quadratic Veronese map
    let q = |a: &RVec5, b: &RVec5| {
        RVec5::new(
            0.5 * s3 * (a[0] * b[1] + a[1] * b[0]),
            0.5 * s3 * (a[0] * b[2] + a[2] * b[0]),
            0.5 * s3 * (a[1] * b[2] + a[2] * b[1]),
            0.5 * s3 * (a[0] * b[0] - a[1] * b[1]),
            0.5 * (a[0] * b[0] + a[1] * b[1] - 2.0 * a[2] * b[2]),
        )
    };
    Jet2 {
        f: q(&p.f, &p.f),
        f_x: q(&p.f, &p.f_x) * 2.0,
        f_y: q(&p.f, &p.f_y) * 2.0,
        f_xx: (q(&p.f_x, &p.f_x) + q(&p.f, &p.f_xx)) * 2.0,
        f_xy: (q(&p.f_x, &p.f_y) + q(&p.f, &p.f_xy)) * 2.0,
        f_yy: (q(&p.f_y, &p.f_y) + q(&p.f, &p.f_yy)) * 2.0,
    }
}

/// A built-in surface with its closed-form reference values.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub parameters: &'static str,
    pub description: &'static str,
    pub expected: Vec<(&'static str, f64)>,
}

/// The built-in surfaces and the values the pipeline should reproduce.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    let pi2 = PI * PI;
    let s3 = 3f64.sqrt();
    vec![
        CatalogEntry {
            id: "equatorial_sphere",
            parameters: "radius (chart half-width, default 0.5)",
            description: "totally geodesic S^2 in S^4, stereographic chart (2x, 2y, 1 - r^2, 0, 0)/(1 + r^2)",
            expected: vec![
                ("u_at_origin", 0.5 * 2f64.ln()),
                ("H", 0.0),
                ("K", 1.0),
                ("energy_density", 1.0),
                ("E_closed_sphere", 4.0 * PI),
                ("W", 0.0),
            ],
        },
        CatalogEntry {
            id: "clifford_torus",
            parameters: "none",
            description: "minimal flat torus (cos x, sin x, cos y, sin y, 0)/sqrt2 on [0, 2pi)^2",
            expected: vec![
                ("u", -(2f64.ln())),
                ("H", 0.0),
                ("xi1", -0.25),
                ("K", 0.0),
                ("energy_density", 2.0),
                ("area", 2.0 * pi2),
                ("E", 4.0 * pi2),
                ("W", PI),
            ],
        },
        CatalogEntry {
            id: "pmc_torus",
            parameters: "a, b with a^2 + b^2 = 1 (values below for a = sqrt3/2, b = 1/2)",
            description: "flat torus (a cos(x/a), a sin(x/a), b cos(y/b), b sin(y/b), 0) with parallel mean curvature",
            expected: vec![
                ("u", -0.5 * 2f64.ln()),
                ("h1", 1.0 / s3),
                ("xi1", -1.0 / s3),
                ("K", 0.0),
                ("energy_density", 8.0 / 3.0),
                ("area", s3 * pi2),
                ("E", 8.0 * s3 / 3.0 * pi2),
                ("W", 2.0 * s3 / 3.0 * PI),
            ],
        },
        CatalogEntry {
            id: "moebius",
            parameters: "inner (catalog id), center a with |a| < 1",
            description: "image of a catalog surface under the conformal map p -> ((1-|a|^2)p + 2(1+<p,a>)a)/(1 + 2<p,a> + |a|^2)",
            expected: vec![("E_minus_4piW_minus_totalK", 0.0)],
        },
        CatalogEntry {
            id: "grid_file",
            parameters: "path to an S4GRID sample file",
            description: "externally sampled immersion; jets by second-order lattice differences",
            expected: vec![],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_rule_reproduces_known_jet() {
        // n = (x, y, 1, 0, 0), d = 1 + x: g = n / d, check against hand derivatives at (0.5, 2)
        let (x, y) = (0.5, 2.0);
        let n = Jet2 {
            f: RVec5::new(x, y, 1.0, 0.0, 0.0),
            f_x: RVec5::new(1.0, 0.0, 0.0, 0.0, 0.0),
            f_y: RVec5::new(0.0, 1.0, 0.0, 0.0, 0.0),
            f_xx: RVec5::zeros(),
            f_xy: RVec5::zeros(),
            f_yy: RVec5::zeros(),
        };
        let d = ScalarJet {
            v: 1.0 + x,
            x: 1.0,
            y: 0.0,
            xx: 0.0,
            xy: 0.0,
            yy: 0.0,
        };
        let g = quotient(&n, &d);
        let dd = 1.0 + x;
        // third component 1/(1+x): derivative -1/(1+x)^2, second 2/(1+x)^3
        assert!((g.f_x[2] + 1.0 / (dd * dd)).abs() < 1e-15);
        assert!((g.f_xx[2] - 2.0 / (dd * dd * dd)).abs() < 1e-15);
        // second component y/(1+x): mixed derivative -1/(1+x)^2
        assert!((g.f_xy[1] + 1.0 / (dd * dd)).abs() < 1e-15);
        // first component x/(1+x): second derivative -2/(1+x)^3
        assert!((g.f_xx[0] + 2.0 / (dd * dd * dd)).abs() < 1e-15);
    }

    #[test]
    fn veronese_jet_is_unit_conformal_and_consistent() {
        let h = 1e-4;
        for &(x, y) in &[(0.1, 0.2), (-0.4, 0.3), (0.6, -0.5)] {
            let j = veronese_chart_jet(x, y);
            assert!((j.f.norm() - 1.0).abs() < 1e-14);
            assert!(j.f_x.dot(&j.f_y).abs() < 1e-13);
            assert!((j.f_x.norm_squared() - j.f_y.norm_squared()).abs() < 1e-13);
            let fx = (veronese_chart_jet(x + h, y).f - veronese_chart_jet(x - h, y).f) / (2.0 * h);
            let fxy = (veronese_chart_jet(x, y + h).f_x - veronese_chart_jet(x, y - h).f_x) / (2.0 * h);
            assert!((fx - j.f_x).norm() < 1e-7);
            assert!((fxy - j.f_xy).norm() < 1e-6);
        }
    }

    #[test]
    fn catalog_lists_every_kind() {
        let ids: Vec<_> = catalog_entries().iter().map(|e| e.id).collect();
        for id in [
            "equatorial_sphere",
            "clifford_torus",
            "pmc_torus",
            "moebius",
            "grid_file",
        ] {
            assert!(ids.contains(&id));
        }
    }
}
