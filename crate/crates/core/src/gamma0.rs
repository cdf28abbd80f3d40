//! Cusp arithmetic of Γ₀(N) and the census of hyperbolic elements whose
//! fixed points are cusps (trivial centralizer), together with the
//! Y-independent finite sums they contribute, and the identity term.

use crate::arith::{self};
use crate::mat2::Mat2;
use crate::quadrature::{self, QuadConfig, QuadError};
use crate::surd::{Surd, SurdMat2};
use crate::transform::{self, TransformError};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Gamma0Error {
    #[error("trace {t} is not hyperbolic for n = {n} (needs t² > 4n)")]
    NotHyperbolic { t: i64, n: u64 },
    #[error("invalid cusp {u}/{w} for level {n}")]
    InvalidCusp { u: u64, w: u64, n: u64 },
    #[error("level {0} must be square-free here")]
    NotSquareFree(u64),
    #[error("gcd(n, N) must be 1, got n = {n}, N = {level}")]
    NotCoprime { n: u64, level: u64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// A cusp u/w of Γ₀(N) in the normal form gcd(u, w) = 1, w | N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cusp {
    pub u: u64,
    pub w: u64,
}

impl std::fmt::Display for Cusp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.u, self.w)
    }
}

impl Cusp {
    pub fn new(u: u64, w: u64, level: u64) -> Result<Self, Gamma0Error> {
        if w == 0 || level % w != 0 || u == 0 || arith::gcd_u64(u, w) != 1 {
            return Err(Gamma0Error::InvalidCusp { u, w, n: level });
        }
        Ok(Cusp { u, w })
    }

    /// The width parameter [w², N] entering the scaling matrix.
    pub fn scaling_modulus(&self, level: u64) -> u64 {
        (self.w as u128 * self.w as u128).lcm(&(level as u128)) as u64
    }
}

/// The scaling matrix σ_a for a cusp, kept symbolic: the entries live in
/// ℚ(√M) with M = [w², N].
#[derive(Debug, Clone)]
pub struct ScalingMatrix {
    pub cusp: Cusp,
    pub m: u64,
}

impl ScalingMatrix {
    pub fn new(cusp: Cusp, level: u64) -> Self {
        ScalingMatrix { cusp, m: cusp.scaling_modulus(level) }
    }

    pub fn matrix(&self) -> SurdMat2 {
        let m = self.m;
        let u = BigInt::from(self.cusp.u);
        let w = BigInt::from(self.cusp.w);
        let a = BigRational::new(u.clone(), w.clone());
        SurdMat2::new(
            Surd::root_multiple(a, m),
            Surd::zero(m),
            Surd::root_multiple(BigRational::from(BigInt::from(1)), m),
            Surd::root_multiple(BigRational::new(w, u * BigInt::from(m)), m),
        )
    }
}

/// ν(N) = Σ_{w|N} φ((w, N/w)).
pub fn cusp_count(level: u64) -> u64 {
    assert!(level >= 1);
    arith::divisors(level)
        .into_iter()
        .map(|w| arith::euler_phi(arith::gcd_u64(w, level / w)))
        .sum()
}

/// One canonical representative per cusp class: for each w | N, the minimal
/// u ≥ 1 with gcd(u, w) = 1 in each residue class mod (w, N/w).
pub fn enumerate_cusps(level: u64) -> Vec<Cusp> {
    assert!(level >= 1);
    let mut out = Vec::new();
    for w in arith::divisors(level) {
        let g = arith::gcd_u64(w, level / w);
        for r in 1..=g {
            if arith::gcd_u64(r, g) != 1 {
                continue;
            }
            let mut u = r;
            while arith::gcd_u64(u, w) != 1 {
                u += g;
            }
            out.push(Cusp { u, w });
        }
    }
    out
}

/// Γ₀(N)-equivalence of cusps: same w and u ≡ u₁ (mod (w, N/w)).
pub fn cusps_equivalent(c1: Cusp, c2: Cusp, level: u64) -> bool {
    if c1.w != c2.w {
        return false;
    }
    let g = arith::gcd_u64(c1.w, level / c1.w);
    c1.u % g == c2.u % g
}

/// The cusp class of an arbitrary boundary point p/q in lowest terms
/// (q = 0 meaning ∞), valid for square-free level: the class is determined
/// by gcd(q, N).
pub fn cusp_class_of_rational(q_denominator: &BigInt, level: u64) -> u64 {
    let g = q_denominator.gcd(&BigInt::from(level));
    let g = g.to_u64().expect("gcd fits");
    if g == 0 {
        level
    } else {
        g
    }
}

/// Generator of the stabilizer of a cusp: parabolic, c-entry [w², N].
pub fn stabilizer_generator(cusp: Cusp, level: u64) -> Mat2 {
    let m = cusp.scaling_modulus(level);
    let (u, w) = (cusp.u as i64, cusp.w as i64);
    let m = m as i64;
    debug_assert_eq!(m % (w * w), 0);
    let g = Mat2::from_i64(1 + m / w * u, -(m / (w * w)) * u * u, m, 1 - m / w * u);
    debug_assert!(g.det() == BigInt::from(1));
    g
}

/// Trivial-centralizer test for hyperbolic trace t at determinant n: the
/// fixed points are cusps iff t² − 4n is a (positive) perfect square;
/// equivalently t = (m + 4n/m)/2 for some divisor m | 4n, m ≠ 2√n.
pub fn split_test(t: i64, n: u64) -> Result<bool, Gamma0Error> {
    let t2 = (t as i128) * (t as i128);
    if t2 <= 4 * n as i128 {
        return Err(Gamma0Error::NotHyperbolic { t, n });
    }
    Ok(arith::integer_sqrt_exact((t2 - 4 * n as i128) as u128).is_some())
}

/// One admissible (cusp, b) pair of the census of elements fixing 1/w with
/// multiplier pair (a, d): the element is σ_a [[a, b], [0, d]] σ_a⁻¹ / √n.
#[derive(Debug, Clone)]
pub struct SplitHyperbolicDatum {
    pub a: u64,
    pub d: u64,
    /// The conjugation parameter b ∈ [0, |a−d|), rational with denominator
    /// dividing N/w.
    pub b: BigRational,
    pub cusp: Cusp,
    /// C = (a−d)w − b·w·N, the lower-left matrix entry; divisible by N.
    pub c_entry: BigInt,
    /// ℓ = gcd(C, bN) ≥ 1.
    pub ell: BigInt,
}

impl SplitHyperbolicDatum {
    /// bN as an exact integer.
    pub fn b_times_level(&self, level: u64) -> BigInt {
        let x = &self.b * BigRational::from(BigInt::from(level));
        debug_assert!(x.is_integer());
        x.to_integer()
    }

    /// The integer matrix √n·P = σ_a [[a, b], [0, d]] σ_a⁻¹, built through
    /// exact ℚ(√M) arithmetic and checked for integrality and N | C.
    pub fn matrix(&self, level: u64) -> Mat2 {
        let sigma = ScalingMatrix::new(self.cusp, level);
        let m = sigma.m;
        let s = sigma.matrix();
        let mid = SurdMat2::new(
            Surd::from_int(self.a as i64, m),
            Surd::rational(self.b.clone(), m),
            Surd::zero(m),
            Surd::from_int(self.d as i64, m),
        );
        let prod = s.mul(&mid).mul(&s.inverse_det1());
        let mat = prod.as_integer_mat().expect("census element must be integral");
        debug_assert_eq!(mat.det(), BigInt::from(self.a) * BigInt::from(self.d));
        debug_assert!(mat.in_gamma0(level));
        debug_assert_eq!(mat.c, self.c_entry);
        mat
    }
}

/// The census of Lemma-type split data: for each cusp 1/w of square-free N
/// and the ordered pair (a, d), the |a−d| admissible b values with N | C.
pub fn enumerate_split_data(n: u64, level: u64, a: u64, d: u64) -> Result<Vec<SplitHyperbolicDatum>, Gamma0Error> {
    if !arith::is_square_free(level) {
        return Err(Gamma0Error::NotSquareFree(level));
    }
    if arith::gcd_u64(n, level) != 1 {
        return Err(Gamma0Error::NotCoprime { n, level });
    }
    assert!(a as u128 * d as u128 == n as u128 && a != d, "need ad = n, a != d");
    let mut out = Vec::new();
    let diff = a as i64 - d as i64;
    for w in arith::divisors(level) {
        let nw = level / w; // N/w; (w, N/w) = 1 for square-free N
        // B·w ≡ (a − d)  (mod N/w)
        let w_inv = mod_inverse(w % nw, nw);
        let b0 = (diff.rem_euclid(nw as i64) as u64 * w_inv) % nw;
        for j in 0..diff.unsigned_abs() {
            let big_b = BigInt::from(b0) + BigInt::from(j) * BigInt::from(nw);
            // b = B·w/N ∈ [0, |a−d|)
            let b = BigRational::new(&big_b * BigInt::from(w), BigInt::from(level));
            debug_assert!(b >= BigRational::zero() && b < BigRational::from(BigInt::from(diff.abs())));
            let c_entry = BigInt::from(diff) * BigInt::from(w) - &big_b * BigInt::from(w) * BigInt::from(w);
            debug_assert!((&c_entry % BigInt::from(level)).is_zero());
            let ell = c_entry.gcd(&(&big_b * BigInt::from(w)));
            let ell = if ell.is_zero() { BigInt::from(1) } else { ell };
            let datum = SplitHyperbolicDatum {
                a,
                d,
                b,
                cusp: Cusp { u: 1, w },
                c_entry,
                ell,
            };
            debug_assert!(datum.matrix(level).in_gamma0(level));
            out.push(datum);
        }
    }
    Ok(out)
}

fn mod_inverse(a: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let e = (a as i64).extended_gcd(&(modulus as i64));
    assert!(e.gcd == 1, "{a} not invertible mod {modulus}");
    e.x.rem_euclid(modulus as i64) as u64
}

/// Whether the element of a census datum is Γ₀(N)-conjugate to its partner
/// with a and d exchanged: the gcd criterion gcd(|C|/ℓ, N) = w, equivalently
/// the two fixed points are Γ₀(N)-equivalent cusps.
pub fn paired_cusp_test(datum: &SplitHyperbolicDatum, level: u64) -> bool {
    let q = if datum.c_entry.is_zero() {
        BigInt::zero()
    } else {
        datum.c_entry.abs() / &datum.ell
    };
    cusp_class_of_rational(&q, level) == datum.cusp.w
}

/// Independent check of the pairing: extract the second fixed point from the
/// integer matrix (the roots of Cz² + (D−A)z − B are rational for split
/// elements) and compare its cusp class with the datum's cusp.
pub fn paired_cusp_oracle(datum: &SplitHyperbolicDatum, level: u64) -> bool {
    let mat = datum.matrix(level);
    let (a_m, b_m, c_m, d_m) = (&mat.a, &mat.b, &mat.c, &mat.d);
    if c_m.is_zero() {
        // fixed points: the cusp itself and ∞
        return cusp_class_of_rational(&BigInt::zero(), level) == datum.cusp.w;
    }
    let t = a_m + d_m;
    let n4 = BigInt::from(4) * (a_m * d_m - b_m * c_m);
    let disc = &t * &t - n4;
    let e = disc.sqrt();
    assert_eq!(&e * &e, disc, "split element must have square trace excess");
    let two_c = BigInt::from(2) * c_m;
    let r1_num = (a_m - d_m) + &e;
    let r2_num = (a_m - d_m) - &e;
    // identify which root is the datum's own cusp u/w
    let own = BigRational::new(BigInt::from(datum.cusp.u), BigInt::from(datum.cusp.w));
    let z1 = BigRational::new(r1_num, two_c.clone());
    let z2 = BigRational::new(r2_num, two_c);
    let other = if z1 == own {
        z2
    } else {
        debug_assert_eq!(z2, own);
        z1
    };
    cusp_class_of_rational(other.denom(), level) == datum.cusp.w
}

/// Matrix-scan oracle for the census count: enumerate every integer matrix
/// with det n, N | C, fixing 1/w, multiplier pair (a, d), with the
/// b-parameter ranging over `periods` admissibility periods, then count
/// Γ₀(N)-conjugacy classes by bounded conjugation search. The count must be
/// |a − d|.
pub fn split_census_matrix_oracle(
    n: u64,
    level: u64,
    w: u64,
    a: u64,
    d: u64,
    periods: u32,
) -> Result<usize, Gamma0Error> {
    if !arith::is_square_free(level) {
        return Err(Gamma0Error::NotSquareFree(level));
    }
    assert!(a as u128 * d as u128 == n as u128 && a != d);
    let diff = a as i64 - d as i64;
    let nw = (level / w) as i64;
    let wi = w as i64;
    // scan all integer B with |B| inside `periods` periods of the admissible
    // progression; keep matrices [[a − Bw, B], [w(a−d−Bw), d + Bw]] with N|C
    let period = diff.abs() * nw;
    let half = period * periods as i64;
    let mut elements = Vec::new();
    for big_b in -half..=half {
        let c = wi * (diff - big_b * wi);
        if c.rem_euclid(level as i64) != 0 {
            continue;
        }
        let m = Mat2::from_i64(a as i64 - big_b * wi, big_b, c, d as i64 + big_b * wi);
        debug_assert_eq!(m.det(), BigInt::from(n));
        elements.push(m);
    }
    // bounded conjugation search over Γ₀(N) elements with small entries
    let conj_bound = (2 * level as i64 * wi * (periods as i64 + 2)).max(64);
    let conjugators = gamma0_elements_bounded(level, conj_bound);
    let small: Vec<[i64; 4]> = elements
        .iter()
        .map(|m| {
            [
                m.a.to_i64().unwrap(),
                m.b.to_i64().unwrap(),
                m.c.to_i64().unwrap(),
                m.d.to_i64().unwrap(),
            ]
        })
        .collect();
    // all bounded conjugates of each element, as a lookup set
    let conj_i64 = |g: &[i64; 4], m: &[i64; 4]| -> [i64; 4] {
        // g⁻¹ m g with det g = 1
        let inv = [g[3], -g[1], -g[2], g[0]];
        let t = [
            inv[0] * m[0] + inv[1] * m[2],
            inv[0] * m[1] + inv[1] * m[3],
            inv[2] * m[0] + inv[3] * m[2],
            inv[2] * m[1] + inv[3] * m[3],
        ];
        [
            t[0] * g[0] + t[1] * g[2],
            t[0] * g[1] + t[1] * g[3],
            t[2] * g[0] + t[3] * g[2],
            t[2] * g[1] + t[3] * g[3],
        ]
    };
    let gens: Vec<[i64; 4]> = conjugators
        .iter()
        .map(|g| {
            [
                g.a.to_i64().unwrap(),
                g.b.to_i64().unwrap(),
                g.c.to_i64().unwrap(),
                g.d.to_i64().unwrap(),
            ]
        })
        .collect();
    let mut parent: Vec<usize> = (0..small.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    for (i, mi) in small.iter().enumerate() {
        let mut conjugates = std::collections::HashSet::new();
        for g in &gens {
            conjugates.insert(conj_i64(g, mi));
        }
        for (j, mj) in small.iter().enumerate() {
            if i == j || !conjugates.contains(mj) {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let mut roots = std::collections::BTreeSet::new();
    for i in 0..small.len() {
        let r = find(&mut parent, i);
        roots.insert(r);
    }
    Ok(roots.len())
}

/// All Γ₀(N) matrices with entries bounded by `bound` in absolute value.
fn gamma0_elements_bounded(level: u64, bound: i64) -> Vec<Mat2> {
    let mut out = Vec::new();
    let n = level as i64;
    let mut r = -(bound / n) * n;
    while r <= bound {
        for p in -bound..=bound {
            if num_integer::gcd(p, r) != 1 && !(p == 0 && r == 0) {
                continue;
            }
            // solve p·s − q·r = 1 in the entry box
            if r == 0 {
                if p == 1 {
                    for q in -bound..=bound {
                        out.push(Mat2::from_i64(1, q, 0, 1));
                    }
                } else if p == -1 {
                    for q in -bound..=bound {
                        out.push(Mat2::from_i64(-1, q, 0, -1));
                    }
                }
                continue;
            }
            if p == 0 {
                continue; // ps − qr = 1 with p = 0 needs qr = −1, |r| ≥ N ≥ 2 except N=1
            }
            // s ≡ p⁻¹ (mod |r|)
            let e = p.extended_gcd(&r);
            debug_assert_eq!(e.gcd.abs(), 1);
            let s0 = (e.x * e.gcd.signum()).rem_euclid(r.abs());
            let mut s = s0 - (bound / r.abs() + 2) * r.abs();
            while s <= bound {
                if s >= -bound {
                    let q_num = p * s - 1;
                    if q_num % r == 0 {
                        let q = q_num / r;
                        if q.abs() <= bound {
                            out.push(Mat2::from_i64(p, q, r, s));
                        }
                    }
                }
                s += r.abs();
            }
        }
        r += n;
    }
    out.retain(|m| m.det() == BigInt::from(1));
    out
}

/// The finite (Y-independent) part of the split-hyperbolic contribution:
/// the census log-sum weighted by g(ln a/d) plus the kernel integral term.
pub fn split_hyperbolic_finite_sum(
    n: u64,
    level: u64,
    s: Complex64,
    cfg: &QuadConfig,
) -> Result<Complex64, Gamma0Error> {
    if !arith::is_square_free(level) {
        return Err(Gamma0Error::NotSquareFree(level));
    }
    if arith::gcd_u64(n, level) != 1 {
        return Err(Gamma0Error::NotCoprime { n, level });
    }
    let tri = transform::SelbergTriple::new(s)?;
    let sqrt_n = (n as f64).sqrt();
    let nu = cusp_count(level) as f64;
    let mut log_part = Complex64::new(0.0, 0.0);
    let mut integral_part = Complex64::new(0.0, 0.0);
    for a in arith::divisors(n) {
        let d = n / a;
        if a == d {
            continue;
        }
        let diff = a as i64 - d as i64;
        let g_val = transform::transform_g_with(&tri, (a as f64 / d as f64).ln());
        // census log-sum; the data come out ordered by w ascending, then b
        for datum in enumerate_split_data(n, level, a, d)? {
            let ln_arg = census_log_argument(&datum, level);
            log_part += ln_arg / (diff.unsigned_abs() as f64) * g_val;
        }
        // ∫₁^∞ k((a−d)² t / n)·ln t/√(t−1) dt with t = 1 + τ²
        let alpha = (diff * diff) as f64 / n as f64;
        let f = |tau: f64| {
            let t = 1.0 + tau * tau;
            2.0 * transform::kernel_k(alpha * t, s) * t.ln()
        };
        let integral = quadrature::integrate_half_line(&f, 0.0, cfg)?.value;
        integral_part += 0.5 * nu * diff.unsigned_abs() as f64 * integral;
    }
    Ok(sqrt_n / 2.0 * log_part + integral_part)
}

/// ln{(a−d)²·w·N·[C²/ℓ², N]/C²} for a census datum, computed through exact
/// rationals; the C = 0 degeneration (second fixed point at ∞) contributes
/// ln(wN).
pub fn census_log_argument(datum: &SplitHyperbolicDatum, level: u64) -> f64 {
    let w = BigInt::from(datum.cusp.w);
    let nn = BigInt::from(level);
    let diff = BigInt::from(datum.a as i64 - datum.d as i64);
    let (num, den) = if datum.c_entry.is_zero() {
        (&w * &nn, BigInt::from(1))
    } else {
        let c2 = &datum.c_entry * &datum.c_entry;
        let q = &c2 / (&datum.ell * &datum.ell);
        let l = q.lcm(&nn);
        (&diff * &diff * &w * &nn * l, c2)
    };
    let num = num.to_f64().expect("log argument fits f64");
    let den = den.to_f64().expect("log argument fits f64");
    debug_assert!(num > 0.0 && den > 0.0);
    (num / den).ln()
}

/// Volume term: present only when n is a perfect square, where the identity
/// (scaled) lies in the Hecke family: (π/3)·N·Π_{p|N}(1 + 1/p).
pub fn identity_term(level: u64, n: u64) -> f64 {
    if arith::integer_sqrt_exact(n as u128).is_none() {
        return 0.0;
    }
    let index: f64 = arith::factor(level)
        .primes()
        .fold(level as f64, |acc, p| acc * (1.0 + 1.0 / p as f64));
    PI / 3.0 * index
}

/// Census self-consistency: the multiset of (cusp class of the second fixed
/// point) seen from (a, d) at w matches the census of (d, a) at each partner
/// class w′ in count.
pub fn census_pairing_counts(n: u64, level: u64, a: u64, d: u64) -> Result<BTreeMap<(u64, u64), usize>, Gamma0Error> {
    let mut out: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let data = enumerate_split_data(n, level, a, d)?;
    for datum in &data {
        let q = if datum.c_entry.is_zero() {
            BigInt::zero()
        } else {
            datum.c_entry.abs() / &datum.ell
        };
        let partner = cusp_class_of_rational(&q, level);
        *out.entry((datum.cusp.w, partner)).or_insert(0) += 1;
    }
    Ok(out)
}
