//! Real quaternions `s + v1 e1 + v2 e2 + v3 e3` with `e1 e2 = e3` and `ei^2 = -1`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub s: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(s: f64, v1: f64, v2: f64, v3: f64) -> Self {
        Quaternion { s, v1, v2, v3 }
    }

    pub const fn scalar(s: f64) -> Self {
        Quaternion::new(s, 0.0, 0.0, 0.0)
    }

    pub const fn pure(v: [f64; 3]) -> Self {
        Quaternion::new(0.0, v[0], v[1], v[2])
    }

    /// Basis unit `e_{axis+1}` for axis 0, 1, 2.
    pub fn unit(axis: usize) -> Self {
        match axis {
            0 => Self::E1,
            1 => Self::E2,
            2 => Self::E3,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.s, -self.v1, -self.v2, -self.v3)
    }

    pub fn sc(self) -> f64 {
        self.s
    }

    pub fn vec(self) -> Self {
        Quaternion::new(0.0, self.v1, self.v2, self.v3)
    }

    pub fn vector(self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.v1, self.v2, self.v3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_pure(self) -> bool {
        self.s == 0.0
    }

    pub fn norm_sqr(self) -> f64 {
        self.s * self.s + self.v1 * self.v1 + self.v2 * self.v2 + self.v3 * self.v3
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean dot product of the four components, i.e. `Sc(conj(self) other)`.
    pub fn dot(self, other: Self) -> f64 {
        self.s * other.s + self.v1 * other.v1 + self.v2 * other.v2 + self.v3 * other.v3
    }

    pub fn scale(self, a: f64) -> Self {
        Quaternion::new(a * self.s, a * self.v1, a * self.v2, a * self.v3)
    }

    /// Left multiplication by the basis unit `e_{axis+1}`.
    #[inline]
    pub fn left_unit(self, axis: usize) -> Self {
        let Quaternion { s, v1, v2, v3 } = self;
        match axis {
            0 => Quaternion::new(-v1, s, -v3, v2),
            1 => Quaternion::new(-v2, v3, s, -v1),
            2 => Quaternion::new(-v3, -v2, v1, s),
            _ => panic!("axis {axis} out of range"),
        }
    }

    /// Splits the product of two pure quaternions into `(-x.y, x cross y)`.
    pub fn product_split(x: Self, y: Self) -> Result<(f64, Self), Error> {
        if !x.is_pure() || !y.is_pure() {
            return Err(Error::NotPure("product_split"));
        }
        let dot = x.v1 * y.v1 + x.v2 * y.v2 + x.v3 * y.v3;
        let cross = Quaternion::new(
            0.0,
            x.v2 * y.v3 - x.v3 * y.v2,
            x.v3 * y.v1 - x.v1 * y.v3,
            x.v1 * y.v2 - x.v2 * y.v1,
        );
        Ok((-dot, cross))
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.s * b.s - a.v1 * b.v1 - a.v2 * b.v2 - a.v3 * b.v3,
            a.s * b.v1 + a.v1 * b.s + a.v2 * b.v3 - a.v3 * b.v2,
            a.s * b.v2 - a.v1 * b.v3 + a.v2 * b.s + a.v3 * b.v1,
            a.s * b.v3 + a.v1 * b.v2 - a.v2 * b.v1 + a.v3 * b.s,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, a: f64) -> Quaternion {
        self.scale(a)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, b: Quaternion) -> Quaternion {
        Quaternion::new(self.s + b.s, self.v1 + b.v1, self.v2 + b.v2, self.v3 + b.v3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, b: Quaternion) -> Quaternion {
        Quaternion::new(self.s - b.s, self.v1 - b.v1, self.v2 - b.v2, self.v3 - b.v3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.s, -self.v1, -self.v2, -self.v3)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, b: Quaternion) {
        *self = *self + b;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, b: Quaternion) {
        *self = *self - b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> impl Strategy<Value = Quaternion> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
            .prop_map(|(a, b, c, d)| Quaternion::new(a, b, c, d))
    }

    fn pure() -> impl Strategy<Value = Quaternion> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b, c)| Quaternion::pure([a, b, c]))
    }

    // Product written out from the 4x4 left-multiplication matrix, row by row.
    fn table_mul(a: Quaternion, b: Quaternion) -> Quaternion {
        let m = [
            [a.s, -a.v1, -a.v2, -a.v3],
            [a.v1, a.s, -a.v3, a.v2],
            [a.v2, a.v3, a.s, -a.v1],
            [a.v3, -a.v2, a.v1, a.s],
        ];
        let x = b.to_array();
        let mut r = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                r[i] += m[i][j] * x[j];
            }
        }
        Quaternion::from_array(r)
    }

    #[test]
    fn basis_rules() {
        use Quaternion as Q;
        assert_eq!(Q::E1 * Q::E2, Q::E3);
        assert_eq!(Q::E2 * Q::E1, -Q::E3);
        assert_eq!(Q::E2 * Q::E3, Q::E1);
        assert_eq!(Q::E3 * Q::E1, Q::E2);
        for e in [Q::E1, Q::E2, Q::E3] {
            assert_eq!(e * e, -Q::ONE);
        }
        let x = Q::new(0.3, -1.0, 2.5, 4.0);
        assert_eq!(Q::ONE * x, x);
        assert_eq!(Q::E1 * Q::E1, Q::new(-1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn conjugation() {
        let x = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(x.conj(), Quaternion::new(1.0, -2.0, -3.0, -4.0));
        assert_eq!(x.conj().conj(), x);
        let one = Quaternion::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!((one.conj() * one).sc(), 4.0);
    }

    #[test]
    fn split_examples() {
        let (s, v) = Quaternion::product_split(Quaternion::E1, Quaternion::E2).unwrap();
        assert_eq!((s, v), (0.0, Quaternion::E3));
        let (s, v) = Quaternion::product_split(Quaternion::E3, Quaternion::E3).unwrap();
        assert_eq!((s, v), (-1.0, Quaternion::ZERO));
        assert!(Quaternion::product_split(Quaternion::ONE, Quaternion::E1).is_err());
    }

    #[test]
    fn left_unit_matches_product() {
        let x = Quaternion::new(0.7, -1.1, 2.0, 0.4);
        for a in 0..3 {
            assert_eq!(x.left_unit(a), Quaternion::unit(a) * x);
        }
    }

    proptest! {
        #[test]
        fn product_matches_table(a in q(), b in q()) {
            let p = a * b;
            let t = table_mul(a, b);
            for (x, y) in p.to_array().iter().zip(t.to_array()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn conj_reverses_product(a in q(), b in q()) {
            let l = (a * b).conj();
            let r = b.conj() * a.conj();
            for (x, y) in l.to_array().iter().zip(r.to_array()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn norm_is_multiplicative(a in q(), b in q()) {
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn norm_equals_conj_product(a in q()) {
            let n = (a.conj() * a).sc();
            prop_assert!((n - a.norm_sqr()).abs() <= 1e-12 * (1.0 + n));
            prop_assert_eq!(a.conj().conj(), a);
        }

        #[test]
        fn pure_products_split(x in pure(), y in pure()) {
            let (s, v) = Quaternion::product_split(x, y).unwrap();
            let p = x * y;
            prop_assert!((p.sc() - s).abs() <= 1e-12 * (1.0 + s.abs()));
            for (a, b) in p.vec().to_array().iter().zip(v.to_array()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            let sum = Quaternion::scalar(s) + v;
            for (a, b) in sum.to_array().iter().zip(p.to_array()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn associative(a in q(), b in q(), c in q()) {
            let l = (a * b) * c;
            let r = a * (b * c);
            for (x, y) in l.to_array().iter().zip(r.to_array()) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
        }
    }
}
