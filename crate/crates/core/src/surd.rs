//! Exact arithmetic in ℚ(√M): numbers x + y√M with rational x, y.
//!
//! The cusp scaling matrices σ_a contain √[w², N]; conjugating through them
//! must decide integrality exactly, so those products are carried out here
//! instead of in floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// x + y√m with rational x, y; m is a fixed positive integer per value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub x: BigRational,
    pub y: BigRational,
    pub m: u64,
}

impl Surd {
    pub fn new(x: BigRational, y: BigRational, m: u64) -> Self {
        Surd { x, y, m }
    }

    pub fn from_int(v: i64, m: u64) -> Self {
        Surd::new(BigRational::from(BigInt::from(v)), BigRational::zero(), m)
    }

    pub fn rational(x: BigRational, m: u64) -> Self {
        Surd::new(x, BigRational::zero(), m)
    }

    /// y·√m
    pub fn root_multiple(y: BigRational, m: u64) -> Self {
        Surd::new(BigRational::zero(), y, m)
    }

    pub fn zero(m: u64) -> Self {
        Surd::from_int(0, m)
    }

    pub fn one(m: u64) -> Self {
        Surd::from_int(1, m)
    }

    pub fn add(&self, rhs: &Surd) -> Surd {
        debug_assert_eq!(self.m, rhs.m);
        Surd::new(&self.x + &rhs.x, &self.y + &rhs.y, self.m)
    }

    pub fn sub(&self, rhs: &Surd) -> Surd {
        debug_assert_eq!(self.m, rhs.m);
        Surd::new(&self.x - &rhs.x, &self.y - &rhs.y, self.m)
    }

    pub fn mul(&self, rhs: &Surd) -> Surd {
        debug_assert_eq!(self.m, rhs.m);
        let m = BigRational::from(BigInt::from(self.m));
        Surd::new(
            &self.x * &rhs.x + (&self.y * &rhs.y) * &m,
            &self.x * &rhs.y + &self.y * &rhs.x,
            self.m,
        )
    }

    pub fn neg(&self) -> Surd {
        Surd::new(-self.x.clone(), -self.y.clone(), self.m)
    }

    /// Multiplicative inverse via the conjugate; panics on zero.
    pub fn inverse(&self) -> Surd {
        let m = BigRational::from(BigInt::from(self.m));
        let norm = &self.x * &self.x - (&self.y * &self.y) * &m;
        assert!(!norm.is_zero(), "inverse of zero surd");
        Surd::new(&self.x / &norm, -(&self.y / &norm), self.m)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.is_rational() {
            Some(&self.x)
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.as_rational()?;
        if r.is_integer() {
            Some(r.to_integer())
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.x) + rational_to_f64(&self.y) * (self.m as f64).sqrt()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational fits f64 range")
}

/// 2×2 matrix over ℚ(√m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdMat2 {
    pub a: Surd,
    pub b: Surd,
    pub c: Surd,
    pub d: Surd,
}

impl SurdMat2 {
    pub fn new(a: Surd, b: Surd, c: Surd, d: Surd) -> Self {
        SurdMat2 { a, b, c, d }
    }

    pub fn mul(&self, rhs: &SurdMat2) -> SurdMat2 {
        SurdMat2 {
            a: self.a.mul(&rhs.a).add(&self.b.mul(&rhs.c)),
            b: self.a.mul(&rhs.b).add(&self.b.mul(&rhs.d)),
            c: self.c.mul(&rhs.a).add(&self.d.mul(&rhs.c)),
            d: self.c.mul(&rhs.b).add(&self.d.mul(&rhs.d)),
        }
    }

    pub fn det(&self) -> Surd {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    /// Inverse assuming det = 1 (the scaling matrices are chosen that way).
    pub fn inverse_det1(&self) -> SurdMat2 {
        debug_assert!(self.det().sub(&Surd::one(self.a.m)).is_zero());
        SurdMat2 {
            a: self.d.clone(),
            b: self.b.neg(),
            c: self.c.neg(),
            d: self.a.clone(),
        }
    }

    /// All four entries as exact integers, if they are.
    pub fn as_integer_mat(&self) -> Option<crate::mat2::Mat2> {
        Some(crate::mat2::Mat2::new(
            self.a.as_integer()?,
            self.b.as_integer()?,
            self.c.as_integer()?,
            self.d.as_integer()?,
        ))
    }
}
