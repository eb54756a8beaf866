//! Conformal (Möbius) transformations of S^4 and their action on jets.

use super::catalog::{quotient, ScalarJet};
use super::Jet2;
use crate::linalg5::RVec5;

/// `((1 - |a|^2) p + 2(1 + <p, a>) a) / (1 + 2<p, a> + |a|^2)`, a conformal
/// diffeomorphism of the unit sphere for `|a| < 1`.
pub fn moebius_transform(a: &RVec5, p: &RVec5) -> RVec5 {
    let s = a.norm_squared();
    let t = p.dot(a);
    (p * (1.0 - s) + a * (2.0 * (1.0 + t))) / (1.0 + 2.0 * t + s)
}

/// Exact push-forward of a jet. Numerator and denominator of the map are
/// affine in `p`, so their jets follow from the jet of `p` by linearity.
pub(super) fn push_jet(a: &RVec5, p: &Jet2) -> Jet2 {
    let s = a.norm_squared();
    let linear = |v: &RVec5| v * (1.0 - s) + a * (2.0 * v.dot(a));
    let n = Jet2 {
        f: linear(&p.f) + a * 2.0,
        f_x: linear(&p.f_x),
        f_y: linear(&p.f_y),
        f_xx: linear(&p.f_xx),
        f_xy: linear(&p.f_xy),
        f_yy: linear(&p.f_yy),
    };
    let d = ScalarJet {
        v: 1.0 + 2.0 * p.f.dot(a) + s,
        x: 2.0 * p.f_x.dot(a),
        y: 2.0 * p.f_y.dot(a),
        xx: 2.0 * p.f_xx.dot(a),
        xy: 2.0 * p.f_xy.dot(a),
        yy: 2.0 * p.f_yy.dot(a),
    };
    quotient(&n, &d)
}
