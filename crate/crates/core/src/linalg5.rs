//! Fixed-size real/complex kernel on R^5 and C^5.
//!
//! Index convention: rows and columns `0..5` follow the frame column order
//! `(f, F1, F2, N1, N2)`. The Lie algebra so(5) splits as `k + p`, where
//! `k = so(2) + so(2)` is the stabiliser of the base flag and sits in the
//! entries `(1,2), (2,1), (3,4), (4,3)`; `p` is the complementary skew pattern.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RVec5 = SVector<f64, 5>;
pub type CVec5 = SVector<Complex64, 5>;
pub type RMat5 = SMatrix<f64, 5, 5>;
pub type CMat5 = SMatrix<Complex64, 5, 5>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative skewness tolerance used by [`split_kp`]: `1e-9 * (1 + |X|)`.
pub const SKEW_TOLERANCE: f64 = 1e-9;

/// Complex bilinear pairing `sum z_i w_i` (no conjugation).
pub fn bilinear_c(z: &CVec5, w: &CVec5) -> Complex64 {
    z.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

/// Hermitian pairing `sum z_i conj(w_i)`.
pub fn hermitian(z: &CVec5, w: &CVec5) -> Complex64 {
    z.iter().zip(w.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn complexify(v: &RVec5) -> CVec5 {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn complexify_mat(m: &RMat5) -> CMat5 {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `v - i w` for real `v, w`.
pub fn isotropic_combo(v: &RVec5, w: &RVec5) -> CVec5 {
    CVec5::from_fn(|k, _| Complex64::new(v[k], -w[k]))
}

/// Commutator `XY - YX`.
pub fn bracket(x: &CMat5, y: &CMat5) -> CMat5 {
    x * y - y * x
}

/// Frobenius norm of `X + X^T`.
pub fn skew_defect(x: &CMat5) -> f64 {
    (x + x.transpose()).norm()
}

/// Whether `(i, j)` belongs to the `k = so(2) + so(2)` block pattern.
pub fn is_k_entry(i: usize, j: usize) -> bool {
    matches!((i, j), (1, 2) | (2, 1) | (3, 4) | (4, 3))
}

/// Whether `(i, j)` belongs to the `p` pattern (tangent space of the flag manifold).
pub fn is_p_entry(i: usize, j: usize) -> bool {
    i != j && !is_k_entry(i, j)
}

/// Result of projecting a matrix onto `k` and `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPSplit {
    pub k_part: CMat5,
    pub p_part: CMat5,
}

/// Entrywise mask projection onto `k` and `p`, without a skewness check.
///
/// Any diagonal residue is carried in `k_part` so the two parts always sum to
/// the input.
pub fn project_kp(x: &CMat5) -> KPSplit {
    let zero = Complex64::new(0.0, 0.0);
    let p_part = CMat5::from_fn(|i, j| if is_p_entry(i, j) { x[(i, j)] } else { zero });
    let k_part = CMat5::from_fn(|i, j| if is_p_entry(i, j) { zero } else { x[(i, j)] });
    KPSplit { k_part, p_part }
}

/// Splits a skew-symmetric matrix into its `k` and `p` components.
pub fn split_kp(x: &CMat5) -> Result<KPSplit> {
    let tolerance = SKEW_TOLERANCE * (1.0 + x.norm());
    let defect = skew_defect(x);
    if defect > tolerance {
        return Err(Error::NonSkewInput { defect, tolerance });
    }
    Ok(project_kp(x))
}

/// A real skew-symmetric 5x5 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So5(RMat5);

impl So5 {
    /// Accepts `m` if it is skew within [`SKEW_TOLERANCE`] and stores its exact skew part.
    pub fn new(m: RMat5) -> Result<Self> {
        let tolerance = SKEW_TOLERANCE * (1.0 + m.norm());
        let defect = (m + m.transpose()).norm();
        if defect > tolerance {
            return Err(Error::NonSkewInput { defect, tolerance });
        }
        Ok(So5((m - m.transpose()) * 0.5))
    }

    /// The generator `E_ij - E_ji`.
    pub fn basis(i: usize, j: usize) -> Self {
        let mut m = RMat5::zeros();
        if i != j {
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
        }
        So5(m)
    }

    pub fn matrix(&self) -> &RMat5 {
        &self.0
    }
}

/// The normal metric `<A, B> = -1/2 tr(AB)` on so(5).
pub fn normal_inner(a: &So5, b: &So5) -> f64 {
    -0.5 * (a.0 * b.0).trace()
}

/// Complex-bilinear extension of the normal metric to complex matrices.
pub fn normal_pairing(a: &CMat5, b: &CMat5) -> Complex64 {
    -(a * b).trace() * 0.5
}

/// Polar retraction onto SO(5) by Newton averaging `Q <- (Q + Q^{-T}) / 2`.
///
/// Requires `det M > 0` and `|M^T M - I| < 0.5`.
pub fn retract_so5(m: &RMat5) -> Result<RMat5> {
    let drift = (m.transpose() * m - RMat5::identity()).norm();
    let det = m.determinant();
    if !(det > 0.0) || !(drift < 0.5) {
        return Err(Error::DegenerateFrame(format!(
            "cannot retract: det = {det:.3e}, |M^T M - I| = {drift:.3e}"
        )));
    }
    let mut q = *m;
    for _ in 0..30 {
        let inv_t = q
            .try_inverse()
            .ok_or_else(|| Error::DegenerateFrame("singular iterate in retraction".into()))?
            .transpose();
        let next = (q + inv_t) * 0.5;
        let step = (next - q).norm();
        q = next;
        if step < 1e-15 {
            break;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(k: usize) -> CVec5 {
        let mut v = CVec5::zeros();
        v[k] = c(1.0, 0.0);
        v
    }

    fn so5_c(i: usize, j: usize) -> CMat5 {
        complexify_mat(So5::basis(i, j).matrix())
    }

    #[test]
    fn bilinear_examples() {
        assert_eq!(bilinear_c(&e(0), &e(0)), c(1.0, 0.0));
        let iso = e(0) - e(1) * I;
        assert_abs_diff_eq!(bilinear_c(&iso, &iso).norm(), 0.0);
        let z = CVec5::new(c(1.0, 0.0), I, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let w = CVec5::new(I, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(bilinear_c(&z, &w), c(0.0, 2.0));
    }

    #[test]
    fn hermitian_examples() {
        let iso = e(0) - e(1) * I;
        assert_eq!(hermitian(&iso, &iso), c(2.0, 0.0));
        assert_eq!(hermitian(&e(0), &e(1)), c(0.0, 0.0));
        assert_eq!(hermitian(&(e(0) * I), &e(0)), I);
    }

    #[test]
    fn bracket_examples() {
        let x = so5_c(1, 2);
        assert_eq!(bracket(&x, &x), CMat5::zeros());
        assert_eq!(bracket(&so5_c(1, 2), &so5_c(2, 3)), so5_c(1, 3));
    }

    #[test]
    fn split_of_pure_p_and_pure_k() {
        let mut p = CMat5::zeros();
        for (k, (i, j)) in [(0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4)]
            .into_iter()
            .enumerate()
        {
            let v = c(k as f64 + 1.0, 0.5 * k as f64);
            p[(i, j)] = v;
            p[(j, i)] = -v;
        }
        let s = split_kp(&p).unwrap();
        assert_eq!(s.p_part, p);
        assert_eq!(s.k_part, CMat5::zeros());

        let k = so5_c(1, 2) * c(0.3, 0.0) + so5_c(3, 4) * c(-1.2, 0.0);
        let s = split_kp(&k).unwrap();
        assert_eq!(s.k_part, k);
        assert_eq!(s.p_part, CMat5::zeros());
    }

    #[test]
    fn split_rejects_non_skew() {
        let mut x = so5_c(0, 1);
        x[(2, 2)] = c(1e-3, 0.0);
        assert!(matches!(split_kp(&x), Err(Error::NonSkewInput { .. })));
    }

    #[test]
    fn normal_inner_examples() {
        let a = So5::basis(0, 1);
        assert_abs_diff_eq!(normal_inner(&a, &a), 1.0);
        assert_abs_diff_eq!(normal_inner(&a, &So5::basis(2, 3)), 0.0);
    }

    #[test]
    fn retraction_examples() {
        assert_abs_diff_eq!(
            retract_so5(&RMat5::identity()).unwrap(),
            RMat5::identity(),
            epsilon = 1e-15
        );
        let q = retract_so5(&(RMat5::identity() * 1.01)).unwrap();
        assert_abs_diff_eq!(q, RMat5::identity(), epsilon = 1e-14);
        assert!(retract_so5(&(RMat5::identity() * 2.0)).is_err());
        let mut flip = RMat5::identity();
        flip[(0, 0)] = -1.0;
        assert!(retract_so5(&flip).is_err());
    }

    fn skew_strategy() -> impl Strategy<Value = RMat5> {
        prop::collection::vec(-1.0f64..1.0, 10).prop_map(|v| {
            let mut m = RMat5::zeros();
            let mut k = 0;
            for i in 0..5 {
                for j in (i + 1)..5 {
                    m[(i, j)] = v[k];
                    m[(j, i)] = -v[k];
                    k += 1;
                }
            }
            m
        })
    }

    fn rotation_from(m: &RMat5) -> RMat5 {
        // exp of a skew matrix via its Taylor series
        let mut term = RMat5::identity();
        let mut sum = RMat5::identity();
        for n in 1..40 {
            term = term * m / n as f64;
            sum += term;
        }
        sum
    }

    proptest! {
        #[test]
        fn bracket_is_antisymmetric_and_jacobi(x in skew_strategy(), y in skew_strategy(), z in skew_strategy()) {
            let (x, y, z) = (complexify_mat(&x), complexify_mat(&y), complexify_mat(&z));
            prop_assert!((bracket(&x, &y) + bracket(&y, &x)).norm() < 1e-14);
            let jac = bracket(&x, &bracket(&y, &z)) + bracket(&y, &bracket(&z, &x)) + bracket(&z, &bracket(&x, &y));
            let scale = x.norm() * y.norm() * z.norm() + 1e-300;
            prop_assert!(jac.norm() / scale < 1e-12);
        }

        #[test]
        fn split_is_linear_idempotent_orthogonal(x in skew_strategy(), y in skew_strategy(), t in -2.0f64..2.0) {
            let xc = complexify_mat(&x);
            let yc = complexify_mat(&y);
            let s = split_kp(&xc).unwrap();
            prop_assert_eq!(s.k_part + s.p_part, xc);
            let again = split_kp(&s.p_part).unwrap();
            prop_assert_eq!(again.p_part, s.p_part);
            prop_assert_eq!(again.k_part, CMat5::zeros());
            let comb = split_kp(&(xc + yc * c(t, 0.0))).unwrap();
            let sy = split_kp(&yc).unwrap();
            prop_assert!((comb.p_part - (s.p_part + sy.p_part * c(t, 0.0))).norm() < 1e-14);
            let kr = So5::new(s.k_part.map(|v| v.re)).unwrap();
            let pr = So5::new(s.p_part.map(|v| v.re)).unwrap();
            prop_assert!(normal_inner(&kr, &pr).abs() < 1e-15);
        }

        #[test]
        fn reductive_bracket_relations(x in skew_strategy(), y in skew_strategy()) {
            let kx = project_kp(&complexify_mat(&x)).k_part;
            let ky = project_kp(&complexify_mat(&y)).k_part;
            let py = project_kp(&complexify_mat(&y)).p_part;
            prop_assert!(project_kp(&bracket(&kx, &ky)).p_part.norm() < 1e-14);
            prop_assert!(project_kp(&bracket(&kx, &py)).k_part.norm() < 1e-14);
        }

        #[test]
        fn bilinear_conj_is_hermitian(v in prop::collection::vec(-3.0f64..3.0, 20)) {
            let z = CVec5::from_fn(|k, _| c(v[k], v[k + 5]));
            let w = CVec5::from_fn(|k, _| c(v[k + 10], v[k + 15]));
            let lhs = bilinear_c(&z, &w.map(|x| x.conj()));
            prop_assert!((lhs - hermitian(&z, &w)).norm() < 1e-12);
        }

        #[test]
        fn retraction_matches_svd_polar_factor(x in skew_strategy(), q in prop::collection::vec(-1.0f64..1.0, 25)) {
            let r = rotation_from(&(x * 2.0));
            let perturbation = RMat5::from_iterator(q.into_iter());
            let m = r + perturbation * 1e-3;
            let out = retract_so5(&m).unwrap();
            prop_assert!((out.transpose() * out - RMat5::identity()).norm() < 1e-12);
            prop_assert!((out - r).norm() <= 1e-2);
            // reference polar factor U V^T from an SVD (itself accurate to ~1e-11)
            let svd = m.svd(true, true);
            let polar = svd.u.unwrap() * svd.v_t.unwrap();
            let diff = (out - polar).norm();
            prop_assert!(diff < 1e-10, "polar mismatch {}", diff);
        }
    }
}
