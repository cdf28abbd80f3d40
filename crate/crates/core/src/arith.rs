//! Elementary exact integer arithmetic: factorization, the multiplicative
//! functions μ and φ, Kronecker symbols, divisor machinery and perfect-square
//! detection.
//!
//! Inputs here are structurally desk-scale (levels, divisors, traces,
//! discriminants); intermediates widen to u128 or use checked ops so that an
//! overflow aborts instead of wrapping.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not a discriminant: needs d > 0, d ≡ 0 or 1 (mod 4), d not a square")]
    NotInOmega(i64),
}

/// A positive non-square integer ≡ 0 or 1 (mod 4): an element of the
/// discriminant set Ω that indexes all class data in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Discriminant(u64);

impl Discriminant {
    pub fn new(d: i64) -> Result<Self, ArithError> {
        if is_in_omega(d) {
            Ok(Discriminant(d as u64))
        } else {
            Err(ArithError::NotInOmega(d))
        }
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// All discriminants up to and including `max`, ascending.
    pub fn range(max: u64) -> Vec<Discriminant> {
        (1..=max as i64).filter_map(|d| Discriminant::new(d).ok()).collect()
    }
}

impl std::fmt::Display for Discriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Prime factorization as an ordered list of (prime, exponent) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn reconstruct(&self) -> u64 {
        self.0
            .iter()
            .fold(1u64, |acc, &(p, e)| (0..e).fold(acc, |a, _| a.checked_mul(p).expect("overflow")))
    }
}

/// Complete prime factorization of n ≥ 1 (n = 1 gives the empty list).
///
/// Trial division up to 10⁶, then deterministic Brent-cycle rho with a
/// Miller-Rabin base set that is exact for u64.
pub fn factor(n: u64) -> Factorization {
    assert!(n >= 1, "factor requires n >= 1");
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        push(p, e);
    }
    let mut p = 7u64;
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0usize;
    while p <= 1_000_000 && p.saturating_mul(p) <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        push(p, e);
        p += wheel[wi];
        wi = (wi + 1) % wheel.len();
    }
    if m > 1 {
        if m < 10u64.pow(12) && is_prime_u64(m) {
            push(m, 1);
        } else {
            let mut stack = vec![m];
            let mut found: Vec<u64> = Vec::new();
            while let Some(x) = stack.pop() {
                if x == 1 {
                    continue;
                }
                if is_prime_u64(x) {
                    found.push(x);
                    continue;
                }
                let f = pollard_brent(x);
                stack.push(f);
                stack.push(x / f);
            }
            found.sort_unstable();
            let mut i = 0;
            while i < found.len() {
                let p = found[i];
                let mut e = 0;
                while i < found.len() && found[i] == p {
                    e += 1;
                    i += 1;
                }
                push(p, e);
            }
        }
    }
    out.sort_unstable();
    Factorization(out)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for u64 (the 12-base set is exact there).
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let f = |v: u64| (mulmod(v, v, n) + c) % n;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// All positive divisors of n, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let f = factor(n);
    let mut out = vec![1u64];
    for &(p, e) in f.pairs() {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk = pk.checked_mul(p).expect("overflow in divisors");
            for &d in &prev {
                out.push(d.checked_mul(pk).expect("overflow in divisors"));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Möbius function μ(n).
pub fn moebius(n: u64) -> i32 {
    let f = factor(n);
    if f.pairs().iter().any(|&(_, e)| e > 1) {
        0
    } else if f.pairs().len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Euler totient φ(n).
pub fn euler_phi(n: u64) -> u64 {
    let f = factor(n);
    let mut out = n;
    for &(p, _) in f.pairs() {
        out = out / p * (p - 1);
    }
    out
}

/// Sum of the positive divisors σ(n).
pub fn divisor_sum(n: u64) -> u64 {
    divisors(n).into_iter().try_fold(0u64, u64::checked_add).expect("overflow in divisor_sum")
}

/// Kronecker symbol (d/m) for m ≥ 1, completely multiplicative in m, with the
/// standard convention at m = 2: zero for even d, +1 for d ≡ ±1 (mod 8), −1
/// for d ≡ ±3 (mod 8).
pub fn kronecker(d: i64, m: u64) -> i32 {
    assert!(m >= 1, "kronecker requires m >= 1");
    assert!(m <= i64::MAX as u64);
    kronecker_signed(d, m as i64)
}

/// Full Kronecker symbol (a/b) for any integers (b may be 0 or negative).
pub fn kronecker_signed(mut a: i64, mut b: i64) -> i32 {
    // (2/a) for odd a, indexed by a mod 8
    const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut v = 0u32;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    let mut k: i32 = if v % 2 == 0 { 1 } else { TAB2[a.rem_euclid(8) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        debug_assert!(b > 0 && b % 2 == 1);
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TAB2[b.rem_euclid(8) as usize];
        }
        // reciprocity flip when both a, b ≡ 3 (mod 4); the bit trick is valid
        // in two's complement for negative a
        if (a & b & 2) != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

/// True iff no square divides n.
pub fn is_square_free(n: u64) -> bool {
    factor(n).pairs().iter().all(|&(_, e)| e == 1)
}

/// True iff d lies in the discriminant set: d > 0, d ≡ 0 or 1 (mod 4), and
/// d is not a perfect square.
pub fn is_in_omega(d: i64) -> bool {
    if d <= 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    if r != 0 && r != 1 {
        return false;
    }
    integer_sqrt_exact(d as u128).is_none()
}

/// The exact square root of q when q is a perfect square, else None.
pub fn integer_sqrt_exact(q: u128) -> Option<u128> {
    let r = num_integer::Roots::sqrt(&q);
    if r.checked_mul(r) == Some(q) {
        Some(r)
    } else {
        None
    }
}

/// Floor of the square root.
pub fn isqrt_u128(q: u128) -> u128 {
    num_integer::Roots::sqrt(&q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_examples() {
        assert_eq!(factor(1).pairs(), &[]);
        assert_eq!(factor(12).pairs(), &[(2, 2), (3, 1)]);
        assert_eq!(factor(9991).pairs(), &[(97, 1), (103, 1)]);
        for n in 1..2000u64 {
            assert_eq!(factor(n).reconstruct(), n);
        }
        // rho fallback path
        let big = 1_000_003u64 * 1_000_033;
        assert_eq!(factor(big).pairs(), &[(1_000_003, 1), (1_000_033, 1)]);
    }

    #[test]
    fn divisors_examples() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(6), vec![1, 2, 3, 6]);
        assert_eq!(divisors(30), vec![1, 2, 3, 5, 6, 10, 15, 30]);
    }

    #[test]
    fn moebius_examples_and_sum() {
        assert_eq!(moebius(1), 1);
        assert_eq!(moebius(4), 0);
        assert_eq!(moebius(6), 1);
        // sum over divisors is the indicator of n = 1
        for n in 1..=10_000u64 {
            let s: i32 = divisors(n).into_iter().map(moebius).sum();
            assert_eq!(s, i32::from(n == 1), "n={n}");
        }
    }

    #[test]
    fn phi_examples_and_oracle() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(6), 2);
        assert_eq!(euler_phi(30), 8);
        for n in 1..=1000u64 {
            let count = (1..=n).filter(|&a| gcd_u64(a, n) == 1).count() as u64;
            assert_eq!(euler_phi(n), count, "n={n}");
        }
    }

    #[test]
    fn divisor_sum_examples() {
        assert_eq!(divisor_sum(1), 1);
        assert_eq!(divisor_sum(6), 12);
        assert_eq!(divisor_sum(12), 28);
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(5, 1), 1);
        assert_eq!(kronecker(5, 11), 1); // 4² ≡ 5 (mod 11)
        assert_eq!(kronecker(5, 2), -1); // 5 ≡ 5 (mod 8)
        assert_eq!(kronecker(8, 2), 0);
        assert_eq!(kronecker(17, 2), 1); // 17 ≡ 1 (mod 8)
    }

    #[test]
    fn kronecker_matches_euler_criterion_at_odd_primes() {
        for p in (3..500u64).filter(|&p| is_prime_u64(p)) {
            for d in -60i64..=60 {
                let r = d.rem_euclid(p as i64) as u64;
                let expected = if r == 0 {
                    0
                } else {
                    let e = powmod(r, (p - 1) / 2, p);
                    if e == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(kronecker(d, p), expected, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_completely_multiplicative() {
        for d in -64i64..=64 {
            for m1 in 1..=256u64 {
                for m2 in 1..=64u64 {
                    assert_eq!(
                        kronecker(d, m1 * m2),
                        kronecker(d, m1) * kronecker(d, m2),
                        "d={d} m1={m1} m2={m2}"
                    );
                }
            }
        }
    }

    #[test]
    fn omega_examples() {
        assert!(is_in_omega(5));
        assert!(!is_in_omega(9));
        assert!(!is_in_omega(7));
        assert!(!is_in_omega(0));
        assert!(!is_in_omega(-4));
        assert!(is_in_omega(8));
        assert!(is_in_omega(12));
        assert_eq!(Discriminant::new(9991 * 4).is_ok(), true);
        assert_eq!(Discriminant::new(16), Err(ArithError::NotInOmega(16)));
    }

    #[test]
    fn integer_sqrt_examples() {
        assert_eq!(integer_sqrt_exact(0), Some(0));
        assert_eq!(integer_sqrt_exact(324), Some(18));
        assert_eq!(integer_sqrt_exact(24), None);
        for r in (0..=1_000_000u128).step_by(997) {
            assert_eq!(integer_sqrt_exact(r * r), Some(r));
            if r > 0 {
                assert_eq!(integer_sqrt_exact(r * r + 1), if r == 0 { Some(1) } else { None });
            }
        }
    }
}
