//! 2×2 matrices over arbitrary-precision integers.
//!
//! Transporter and automorph entries grow exponentially (they contain Pell
//! solutions), so everything here is BigInt.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Integer 2×2 matrix [[a, b], [c, d]].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Mat2 {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(BigInt::from(a), BigInt::from(b), BigInt::from(c), BigInt::from(d))
    }

    pub fn identity() -> Self {
        Mat2::from_i64(1, 0, 0, 1)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2 { a: self.a.clone(), b: self.c.clone(), c: self.b.clone(), d: self.d.clone() }
    }

    /// Inverse of a matrix with determinant ±1.
    pub fn inverse_unimodular(&self) -> Mat2 {
        let det = self.det();
        if det.is_one() {
            Mat2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
        } else if (-&det).is_one() {
            Mat2 { a: -&self.d, b: self.b.clone(), c: self.c.clone(), d: -&self.a }
        } else {
            panic!("inverse_unimodular on matrix with det {det}");
        }
    }

    pub fn pow(&self, mut e: u64) -> Mat2 {
        let mut base = self.clone();
        let mut acc = Mat2::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn is_plus_minus_identity(&self) -> bool {
        self.is_identity() || self.neg().is_identity()
    }

    /// Entries reduced into [0, n).
    pub fn mod_n(&self, n: u64) -> [u64; 4] {
        let m = BigInt::from(n);
        let red = |x: &BigInt| -> u64 {
            use num_traits::ToPrimitive;
            x.mod_floor_ref(&m).to_u64().expect("mod fits u64")
        };
        [red(&self.a), red(&self.b), red(&self.c), red(&self.d)]
    }

    /// True when the lower-left entry is divisible by n, i.e. the matrix lies
    /// in the level-n congruence pattern.
    pub fn in_gamma0(&self, n: u64) -> bool {
        (&self.c % BigInt::from(n)).is_zero()
    }

    pub fn entries_bounded_by(&self, bound: &BigInt) -> bool {
        self.a.abs() <= *bound && self.b.abs() <= *bound && self.c.abs() <= *bound && self.d.abs() <= *bound
    }
}

trait ModFloorRef {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt;
}

impl ModFloorRef for BigInt {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt {
        num_integer::Integer::mod_floor(self, m)
    }
}

/// Small helper for matrices reduced mod n, used to find the order of an
/// automorph in SL₂(Z/n) without big-integer blowup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mat2Mod {
    pub n: u64,
    pub e: [u64; 4],
}

impl Mat2Mod {
    pub fn from(m: &Mat2, n: u64) -> Self {
        Mat2Mod { n, e: m.mod_n(n) }
    }

    pub fn identity(n: u64) -> Self {
        Mat2Mod { n, e: [1 % n, 0, 0, 1 % n] }
    }

    pub fn mul(&self, rhs: &Mat2Mod) -> Mat2Mod {
        debug_assert_eq!(self.n, rhs.n);
        let n = self.n as u128;
        let a = self.e.map(|x| x as u128);
        let b = rhs.e.map(|x| x as u128);
        Mat2Mod {
            n: self.n,
            e: [
                ((a[0] * b[0] + a[1] * b[2]) % n) as u64,
                ((a[0] * b[1] + a[1] * b[3]) % n) as u64,
                ((a[2] * b[0] + a[3] * b[2]) % n) as u64,
                ((a[2] * b[1] + a[3] * b[3]) % n) as u64,
            ],
        }
    }
}
