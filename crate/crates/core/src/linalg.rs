//! Small dense linear-algebra helpers shared by the simulators.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;

use crate::amp::{unit_phase, ONE, ZERO};
use crate::error::{Error, Result};

pub type Mat2 = SMatrix<Complex64, 2, 2>;
pub type Mat4 = SMatrix<Complex64, 4, 4>;
pub type Mat5 = SMatrix<Complex64, 5, 5>;

/// Tolerance for accepting a user-supplied matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Matrix–vector product with a fixed left-to-right summation order.
///
/// Both simulation pictures route their polarization unitaries through this
/// function, which keeps their results bit-identical.
pub fn apply_fixed<const N: usize>(m: &SMatrix<Complex64, N, N>, v: &[Complex64; N]) -> [Complex64; N] {
    let mut out = [ZERO; N];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (k, vk) in v.iter().enumerate() {
            acc += m[(j, k)] * vk;
        }
        *slot = acc;
    }
    out
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary<const N: usize>(m: &SMatrix<Complex64, N, N>) -> Result<()> {
    let dynamic = DMatrix::from_iterator(N, N, m.iter().copied());
    let deviation = unitarity_deviation(&dynamic);
    if deviation <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary { deviation })
    }
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn hadamard() -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Mat2::new(h, h, h, -h)
}

/// `diag(1, e^{iθ})` on `{H, V}`.
pub fn phase_gate(theta: f64) -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, unit_phase(theta))
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// A unitary whose first column is the unit vector `target`.
///
/// The construction is a phase on the first basis vector followed by a
/// Householder reflection: with `x = e^{iθ}e₀`, `θ = arg(target₀)`, the
/// product `x†·target` is real and `I − 2ww†/‖w‖²` with `w = x − target` maps
/// `x` onto `target`. When `target` is already `e₀` the result is exactly the
/// identity.
pub fn householder_completion(target: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let n = target.len();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let norm = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNITARY_TOL {
        return Err(Error::NonUnitNorm { norm });
    }
    let v = DVector::from_column_slice(target);
    let phase = if v[0] == ZERO { ONE } else { v[0] / v[0].norm() };
    let mut x = DVector::from_element(n, ZERO);
    x[0] = phase;
    let w = &x - &v;
    let w_norm_sqr = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut reflection = DMatrix::<Complex64>::identity(n, n);
    if w_norm_sqr > 0.0 {
        let scale = Complex64::new(2.0 / w_norm_sqr, 0.0);
        reflection -= (&w * w.adjoint()) * scale;
    }
    let mut diag = DMatrix::<Complex64>::identity(n, n);
    diag[(0, 0)] = phase;
    Ok(reflection * diag)
}

pub fn to_fixed<const N: usize>(m: &DMatrix<Complex64>) -> Result<SMatrix<Complex64, N, N>> {
    if m.nrows() != N || m.ncols() != N {
        return Err(Error::DimensionMismatch {
            expected: N,
            found: m.nrows(),
        });
    }
    Ok(SMatrix::from_fn(|r, c| m[(r, c)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn householder_of_first_basis_vector_is_identity() {
        let u = householder_completion(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(u, DMatrix::identity(4, 4));
    }

    #[test]
    fn householder_maps_first_column_to_target() {
        let target = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.3, 0.4).scale(0.5 / 0.5)];
        let norm = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let target: Vec<_> = target.iter().map(|z| z / norm).collect();
        let u = householder_completion(&target).unwrap();
        for (k, t) in target.iter().enumerate() {
            assert!((u[(k, 0)] - t).norm() < 1e-14);
        }
        assert!(unitarity_deviation(&u) < 1e-14);
    }

    #[test]
    fn householder_rejects_non_unit_targets() {
        assert!(matches!(
            householder_completion(&[c(2.0, 0.0), ZERO]),
            Err(Error::NonUnitNorm { .. })
        ));
    }

    #[test]
    fn fixed_order_product_matches_nalgebra() {
        let m = kron2(&hadamard(), &pauli_x());
        let v = [c(1.0, 0.5), c(0.0, -1.0), c(0.25, 0.0), c(-2.0, 1.0)];
        let ours = apply_fixed(&m, &v);
        let theirs = m * nalgebra::Vector4::from_column_slice(&v);
        for k in 0..4 {
            assert!((ours[k] - theirs[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn non_unitary_is_reported() {
        let m = Mat2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(check_unitary(&m), Err(Error::NotUnitary { .. })));
        check_unitary(&hadamard()).unwrap();
        check_unitary(&phase_gate(0.7)).unwrap();
    }
}
