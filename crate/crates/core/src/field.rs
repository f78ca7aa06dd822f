//! Prime-field arithmetic together with the additive character
//! `e(t) = exp(2πi t/p)` and the quadratic character `η`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest modulus accepted by [`FieldCtx::new`].
pub const MAX_PRIME: u64 = 1_000_000;

/// Absolute tolerance for "equals zero" tests on a sum whose terms have
/// total modulus `abs_mass`.
pub fn tolerance(abs_mass: f64) -> f64 {
    1e-9 * (1.0 + abs_mass)
}

/// A residue in `[0, p)`. Arithmetic goes through the owning [`FieldCtx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(u32);

impl Scalar {
    pub const ZERO: Scalar = Scalar(0);
    pub const ONE: Scalar = Scalar(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps a residue already known to be reduced.
    pub(crate) fn from_reduced(v: u32) -> Scalar {
        Scalar(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An odd prime field with its character tables. Immutable once built.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    chars: Vec<Complex64>,
    eta: Vec<i8>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx").field("p", &self.p).finish()
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut q = 3;
    while q * q <= n {
        if n.is_multiple_of(q) {
            return false;
        }
        q += 2;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

impl FieldCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p.is_multiple_of(2) {
            if p == 2 {
                return Err(Error::CharacteristicTwoUnsupported { p });
            }
            return Err(Error::NotPrime { p });
        }
        if !is_prime(p) {
            return Err(Error::NotPrime { p });
        }
        if p > MAX_PRIME {
            return Err(Error::InstanceTooLarge {
                what: "prime modulus",
                size: p as u128,
                cap: MAX_PRIME as u128,
            });
        }
        let chars = (0..p)
            .map(|t| Complex64::from_polar(1.0, TAU * t as f64 / p as f64))
            .collect();
        // Euler's criterion: t^((p-1)/2) is 1 for squares and p-1 otherwise.
        let half = (p - 1) / 2;
        let eta = (0..p)
            .map(|t| match pow_mod(t, half, p) {
                0 => 0,
                1 => 1,
                _ => -1,
            })
            .collect();
        Ok(FieldCtx { p: p as u32, chars, eta })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Reduces any integer into the field.
    pub fn scalar(&self, v: i64) -> Scalar {
        Scalar(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(((a.0 as u64 + b.0 as u64) % self.p as u64) as u32)
    }

    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(((a.0 as u64 + self.p as u64 - b.0 as u64) % self.p as u64) as u32)
    }

    pub fn neg(&self, a: Scalar) -> Scalar {
        self.sub(Scalar::ZERO, a)
    }

    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar((a.0 as u64 * b.0 as u64 % self.p as u64) as u32)
    }

    pub fn inv(&self, t: Scalar) -> Result<Scalar> {
        if t.is_zero() {
            return Err(Error::DivisionByZero { p: self.p });
        }
        Ok(Scalar(pow_mod(t.0 as u64, self.p as u64 - 2, self.p as u64) as u32))
    }

    pub fn additive_char(&self, t: Scalar) -> Complex64 {
        self.chars[t.0 as usize]
    }

    pub fn quadratic_char(&self, t: Scalar) -> i8 {
        self.eta[t.0 as usize]
    }

    /// Character value for a raw residue; `t` must already be reduced.
    #[inline]
    pub(crate) fn e(&self, t: u32) -> Complex64 {
        self.chars[t as usize]
    }

    /// Dot product of two coordinate vectors, reduced mod p.
    #[inline]
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        let p = self.p as u64;
        (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p) as u32
    }

    /// Iterator over all of `F` as scalars.
    pub fn elements(&self) -> impl Iterator<Item = Scalar> {
        (0..self.p).map(Scalar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_field_rejects_bad_moduli() {
        assert_eq!(FieldCtx::new(2).unwrap_err(), Error::CharacteristicTwoUnsupported { p: 2 });
        assert_eq!(FieldCtx::new(9).unwrap_err(), Error::NotPrime { p: 9 });
        assert_eq!(FieldCtx::new(1).unwrap_err(), Error::NotPrime { p: 1 });
        assert_eq!(FieldCtx::new(15).unwrap_err(), Error::NotPrime { p: 15 });
        assert!(FieldCtx::new(3).is_ok());
    }

    #[test]
    fn additive_char_values() {
        let f = FieldCtx::new(3).unwrap();
        assert_eq!(f.additive_char(Scalar::ZERO), Complex64::new(1.0, 0.0));
        let e1 = f.additive_char(f.scalar(1));
        assert!((e1 - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-12);
        let total: Complex64 = f.elements().map(|t| f.additive_char(t)).sum();
        assert!(total.norm() < 1e-12);
    }

    #[test]
    fn char_table_invariants() {
        for p in [3u64, 5, 7, 11, 97, 101] {
            let f = FieldCtx::new(p).unwrap();
            let mut total = Complex64::new(0.0, 0.0);
            for t in f.elements() {
                let c = f.additive_char(t);
                assert!((c.norm() - 1.0).abs() < 1e-12);
                total += c;
            }
            assert!(total.norm() < tolerance(p as f64));
            let plus = f.elements().filter(|&t| f.quadratic_char(t) == 1).count();
            let minus = f.elements().filter(|&t| f.quadratic_char(t) == -1).count();
            assert_eq!(plus, (p as usize - 1) / 2);
            assert_eq!(minus, (p as usize - 1) / 2);
            assert_eq!(f.quadratic_char(Scalar::ZERO), 0);
        }
    }

    #[test]
    fn quadratic_char_examples() {
        let f3 = FieldCtx::new(3).unwrap();
        assert_eq!(f3.quadratic_char(Scalar::ONE), 1);
        assert_eq!(f3.quadratic_char(f3.scalar(2)), -1);
        let f5 = FieldCtx::new(5).unwrap();
        assert_eq!(f5.quadratic_char(f5.scalar(4)), 1);
    }

    #[test]
    fn eta_matches_square_enumeration_and_is_multiplicative() {
        for p in (3..=97u64).filter(|&n| is_prime(n)) {
            let f = FieldCtx::new(p).unwrap();
            let squares: std::collections::HashSet<u32> =
                f.elements().skip(1).map(|s| f.mul(s, s).value()).collect();
            for a in f.elements().skip(1) {
                assert_eq!(f.quadratic_char(a) == 1, squares.contains(&a.value()));
                for b in f.elements().skip(1) {
                    assert_eq!(
                        f.quadratic_char(f.mul(a, b)),
                        f.quadratic_char(a) * f.quadratic_char(b)
                    );
                }
            }
        }
    }

    #[test]
    fn inverses() {
        let f = FieldCtx::new(5).unwrap();
        assert_eq!(f.inv(f.scalar(2)).unwrap(), f.scalar(3));
        assert_eq!(f.inv(Scalar::ONE).unwrap(), Scalar::ONE);
        assert_eq!(f.inv(Scalar::ZERO).unwrap_err(), Error::DivisionByZero { p: 5 });
        let f = FieldCtx::new(101).unwrap();
        for t in f.elements().skip(1) {
            assert_eq!(f.mul(t, f.inv(t).unwrap()), Scalar::ONE);
        }
    }

    #[test]
    fn scalar_reduction_is_euclidean() {
        let f = FieldCtx::new(7).unwrap();
        assert_eq!(f.scalar(-1), f.scalar(6));
        assert_eq!(f.scalar(15).value(), 1);
        assert_eq!(f.neg(f.scalar(3)), f.scalar(4));
    }
}
