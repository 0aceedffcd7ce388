//! Amplitudes in the truncated ring `C[κ, κ̄] / (total order ≥ 2)`.
//!
//! Every amplitude produced by a weakly pumped circuit has the form
//! `c00 + c10·κ + c01·κ̄`, where `κ = gα` is the pair-creation parameter.
//! Products drop `κ²`, `κκ̄` and `κ̄²`, so cancellations such as a
//! destructive inter-crystal phase come out as exact zeros instead of
//! small floating residues.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Multiplies by `i` without going through a general complex product.
#[inline]
pub fn times_i(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re)
}

/// Multiplies by `-i` without going through a general complex product.
#[inline]
pub fn times_neg_i(z: Complex64) -> Complex64 {
    Complex64::new(z.im, -z.re)
}

/// `e^{iθ}`, exact at integer multiples of π/2.
///
/// `sin(π)` is not zero in floating point, which would leave a residue of
/// order 1e-16 where the algebra demands a cancellation. Angles within a few
/// ulps of a quarter turn snap to `±1`, `±i`.
pub fn unit_phase(theta: f64) -> Complex64 {
    let quarter_turns = theta / FRAC_PI_2;
    let nearest = quarter_turns.round();
    if (quarter_turns - nearest).abs() <= 8.0 * f64::EPSILON * nearest.abs().max(1.0) {
        return match (nearest as i64).rem_euclid(4) {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
    }
    Complex64::new(theta.cos(), theta.sin())
}

/// Which coefficient of a [`PerturbAmp`] to select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    Zeroth,
    Kappa,
    KappaBar,
}

/// A first-order perturbative amplitude `c00 + c10·κ + c01·κ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbAmp {
    pub c00: Complex64,
    pub c10: Complex64,
    pub c01: Complex64,
}

impl PerturbAmp {
    pub const ZERO: PerturbAmp = PerturbAmp::new(ZERO, ZERO, ZERO);
    pub const ONE: PerturbAmp = PerturbAmp::new(ONE, ZERO, ZERO);

    pub const fn new(c00: Complex64, c10: Complex64, c01: Complex64) -> Self {
        PerturbAmp { c00, c10, c01 }
    }

    /// A pure order-zero amplitude.
    pub const fn constant(c: Complex64) -> Self {
        PerturbAmp::new(c, ZERO, ZERO)
    }

    /// `c·κ`.
    pub const fn kappa(c: Complex64) -> Self {
        PerturbAmp::new(ZERO, c, ZERO)
    }

    /// `c·κ̄`.
    pub const fn kappa_bar(c: Complex64) -> Self {
        PerturbAmp::new(ZERO, ZERO, c)
    }

    pub fn coefficient(&self, order: Order) -> Complex64 {
        match order {
            Order::Zeroth => self.c00,
            Order::Kappa => self.c10,
            Order::KappaBar => self.c01,
        }
    }

    /// Exact zero test; no tolerance.
    pub fn is_zero(&self) -> bool {
        self.c00 == ZERO && self.c10 == ZERO && self.c01 == ZERO
    }

    pub fn scale(&self, c: Complex64) -> Self {
        PerturbAmp::new(self.c00 * c, self.c10 * c, self.c01 * c)
    }

    /// Numerical value once `κ` is fixed; `κ̄` is its conjugate.
    pub fn evaluate(&self, kappa: Complex64) -> Complex64 {
        self.c00 + self.c10 * kappa + self.c01 * kappa.conj()
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &PerturbAmp) -> f64 {
        (self.c00 - other.c00)
            .norm()
            .max((self.c10 - other.c10).norm())
            .max((self.c01 - other.c01).norm())
    }
}

/// Truncated product: terms of total order ≥ 2 are dropped.
pub fn amp_mul(a: PerturbAmp, b: PerturbAmp) -> PerturbAmp {
    PerturbAmp::new(
        a.c00 * b.c00,
        a.c00 * b.c10 + a.c10 * b.c00,
        a.c00 * b.c01 + a.c01 * b.c00,
    )
}

impl Add for PerturbAmp {
    type Output = PerturbAmp;
    fn add(self, rhs: PerturbAmp) -> PerturbAmp {
        PerturbAmp::new(self.c00 + rhs.c00, self.c10 + rhs.c10, self.c01 + rhs.c01)
    }
}

impl AddAssign for PerturbAmp {
    fn add_assign(&mut self, rhs: PerturbAmp) {
        *self = *self + rhs;
    }
}

impl Sub for PerturbAmp {
    type Output = PerturbAmp;
    fn sub(self, rhs: PerturbAmp) -> PerturbAmp {
        PerturbAmp::new(self.c00 - rhs.c00, self.c10 - rhs.c10, self.c01 - rhs.c01)
    }
}

impl Neg for PerturbAmp {
    type Output = PerturbAmp;
    fn neg(self) -> PerturbAmp {
        PerturbAmp::new(-self.c00, -self.c10, -self.c01)
    }
}

impl Mul for PerturbAmp {
    type Output = PerturbAmp;
    fn mul(self, rhs: PerturbAmp) -> PerturbAmp {
        amp_mul(self, rhs)
    }
}

impl Mul<Complex64> for PerturbAmp {
    type Output = PerturbAmp;
    fn mul(self, rhs: Complex64) -> PerturbAmp {
        self.scale(rhs)
    }
}

impl fmt::Display for PerturbAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, sym) in [(self.c00, ""), (self.c10, "κ"), (self.c01, "κ̄")] {
            if c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i){}", c.re, c.im, sym)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_element() {
        let k = PerturbAmp::kappa(ONE);
        assert_eq!(amp_mul(PerturbAmp::ONE, k), k);
    }

    #[test]
    fn kappa_times_kappa_bar_truncates() {
        let p = amp_mul(PerturbAmp::kappa(ONE), PerturbAmp::kappa_bar(ONE));
        assert!(p.is_zero());
    }

    #[test]
    fn square_drops_kappa_squared() {
        // (1 - iκ)^2 = 1 - 2iκ + O(κ²)
        let a = PerturbAmp::new(ONE, c(0.0, -1.0), ZERO);
        assert_eq!(amp_mul(a, a), PerturbAmp::new(ONE, c(0.0, -2.0), ZERO));
    }

    #[test]
    fn unit_phase_is_exact_on_quarter_turns() {
        use std::f64::consts::PI;
        assert_eq!(unit_phase(0.0), ONE);
        assert_eq!(unit_phase(PI), -ONE);
        assert_eq!(unit_phase(-PI), -ONE);
        assert_eq!(unit_phase(PI / 2.0), I);
        assert_eq!(unit_phase(3.0 * PI / 2.0), -I);
        assert_eq!(unit_phase(2.0 * PI * 32.0 / 64.0), -ONE);
        assert_eq!(ONE + unit_phase(-PI), ZERO);
        let z = unit_phase(0.3);
        assert!((z - c(0.3f64.cos(), 0.3f64.sin())).norm() < 1e-15);
    }

    #[test]
    fn multiplying_by_i_matches_complex_product() {
        let z = c(0.25, -3.5);
        assert_eq!(times_i(z), z * I);
        assert_eq!(times_neg_i(z), z * -I);
        assert_eq!(times_i(times_neg_i(z)), z);
    }

    #[test]
    fn evaluate_uses_conjugate_for_kappa_bar() {
        let a = PerturbAmp::new(ONE, c(2.0, 0.0), c(0.0, 1.0));
        let k = c(0.0, 1.0);
        // 1 + 2i + i·(-i) = 2 + 2i
        assert_eq!(a.evaluate(k), c(2.0, 2.0));
    }

    // Dyadic rationals keep every product and sum exact, so the ring axioms
    // can be checked with `==`.
    fn dyadic() -> impl Strategy<Value = f64> {
        (-64i32..64).prop_map(|n| n as f64 / 8.0)
    }

    fn amp() -> impl Strategy<Value = PerturbAmp> {
        proptest::collection::vec(dyadic(), 6).prop_map(|v| {
            PerturbAmp::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn ring_axioms(a in amp(), b in amp(), d in amp()) {
            prop_assert_eq!((a * b) * d, a * (b * d));
            prop_assert_eq!(a * (b + d), a * b + a * d);
            prop_assert_eq!((a + b) * d, a * d + b * d);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a + b) + d, a + (b + d));
            prop_assert_eq!(a * PerturbAmp::ONE, a);
            prop_assert!((a - a).is_zero());
        }
    }
}
