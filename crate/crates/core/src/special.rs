//! Complex special functions needed by the transform and scattering modules:
//! Γ(z) by a Lanczos approximation (≥ 13 significant digits), digamma by the
//! shifted Stirling series, and ζ(s), ζ′(s) by Euler-Maclaurin summation.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Lanczos coefficients for g = 607/128, n = 15 (Godfrey's set).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

/// log Γ(z) for Re z > 0 (principal determination of each log in the
/// Lanczos formula; continuous on the right half-plane).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    assert!(z.re > 0.0, "ln_gamma needs Re z > 0, got {z}");
    let mut x = Complex64::new(LANCZOS_C[0], 0.0);
    for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        x += c / (z + (k as f64 - 1.0));
    }
    let t = z + (LANCZOS_G - 0.5);
    (z - 0.5) * t.ln() - t + 0.5 * (2.0 * PI).ln() + x.ln()
}

/// Γ(z) anywhere off the non-positive integers, by reflection on the left
/// half-plane.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        ln_gamma(z).exp()
    } else {
        // Γ(z) Γ(1−z) = π / sin(πz)
        let s = (PI * z).sin();
        PI / (s * ln_gamma(Complex64::new(1.0, 0.0) - z).exp())
    }
}

/// Digamma ψ(z) for z off the non-positive integers.
pub fn digamma(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if z.re < 0.0 {
        // ψ(z) = ψ(1−z) − π cot(πz)
        let pi_z = PI * z;
        return digamma(Complex64::new(1.0, 0.0) - z) - PI * pi_z.cos() / pi_z.sin();
    }
    while z.re < 16.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    // Stirling: ψ(z) ~ ln z − 1/(2z) − Σ B₂ₖ/(2k z^{2k})
    let inv2 = 1.0 / (z * z);
    let series = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut corr = Complex64::new(0.0, 0.0);
    let mut p = inv2;
    for &c in &series {
        corr += c * p;
        p *= inv2;
    }
    acc + z.ln() - 0.5 / z - corr
}

const BERNOULLI_2K: [f64; 16] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
];

/// ζ(s) and ζ′(s) together by Euler-Maclaurin; valid for s ≠ 1 with
/// Re s > −20 and |Im s| within the range the correction terms cover
/// (comfortably |Im s| ≤ 100 at the M chosen here).
pub fn zeta_and_deriv(s: Complex64) -> (Complex64, Complex64) {
    assert!((s - Complex64::new(1.0, 0.0)).norm() > 1e-12, "zeta pole at s = 1");
    let m = (20.0 + 0.9 * s.im.abs()).ceil() as u32;
    let mf = m as f64;
    let ln_m = mf.ln();
    let mut z = Complex64::new(0.0, 0.0);
    let mut dz = Complex64::new(0.0, 0.0);
    for n in 1..m {
        let nf = n as f64;
        let t = (-s * nf.ln()).exp(); // n^{-s}
        z += t;
        dz -= nf.ln() * t;
    }
    let m_pow = (-s * ln_m).exp(); // M^{-s}
    // tail head: M^{1-s}/(s-1) + M^{-s}/2
    let sm1 = s - 1.0;
    z += m_pow * mf / sm1 + 0.5 * m_pow;
    dz += -ln_m * m_pow * mf / sm1 - m_pow * mf / (sm1 * sm1) - 0.5 * ln_m * m_pow;
    // Bernoulli corrections: B₂ₖ/(2k)! · (s)₂ₖ₋₁ · M^{1-s-2k}
    let mut fact = 1.0f64; // (2k)!
    for (i, &b2k) in BERNOULLI_2K.iter().enumerate() {
        let k = (i + 1) as u32;
        fact *= ((2 * k - 1) * (2 * k)) as f64;
        // pochhammer (s)_{2k-1} = s (s+1) ... (s + 2k - 2) and its derivative
        let mut poch = Complex64::new(1.0, 0.0);
        let mut poch_dlog = Complex64::new(0.0, 0.0);
        let mut singular = false;
        for j in 0..(2 * k - 1) {
            let f = s + j as f64;
            if f.norm() < 1e-14 {
                singular = true;
                break;
            }
            poch *= f;
            poch_dlog += 1.0 / f;
        }
        if singular {
            continue; // the term and its derivative handled as exactly zero factor region
        }
        let m_fac = (-(s + (2 * k - 1) as f64) * ln_m).exp(); // M^{-s-2k+1}
        let term = b2k / fact * poch * m_fac;
        z += term;
        dz += term * (poch_dlog - ln_m);
    }
    (z, dz)
}

pub fn zeta(s: Complex64) -> Complex64 {
    zeta_and_deriv(s).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_reference_values() {
        // Γ(1/2) = √π
        assert!((gamma(c(0.5, 0.0)) - PI.sqrt()).norm() < 1e-13);
        // Γ(5) = 24
        assert!((gamma(c(5.0, 0.0)) - 24.0).norm() < 1e-11);
        // Γ(1+i) reference from functional digits: 0.49801566811835604 − 0.15494982830181069 i
        let g = gamma(c(1.0, 1.0));
        assert!((g - c(0.49801566811835604, -0.15494982830181069)).norm() < 1e-13);
        // reflection: Γ(z)Γ(1−z) = π/sin(πz) at z = −0.3 + 0.2i
        let z = c(-0.3, 0.2);
        let lhs = gamma(z) * gamma(c(1.0, 0.0) - z);
        let rhs = PI / (PI * z).sin();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }

    #[test]
    fn gamma_recurrence_property() {
        for &z in &[c(0.7, 2.0), c(1.5, -40.0), c(0.1, 0.3), c(3.25, 11.0)] {
            let lhs = gamma(z + 1.0);
            let rhs = z * gamma(z);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1e-300), "z={z}");
        }
    }

    #[test]
    fn digamma_reference_values() {
        // ψ(1) = −γ
        let gamma_euler = 0.5772156649015328606;
        assert!((digamma(c(1.0, 0.0)) + gamma_euler).norm() < 1e-13);
        // ψ(1/2) = −γ − 2 ln 2
        assert!((digamma(c(0.5, 0.0)) + gamma_euler + 2.0 * 2.0f64.ln()).norm() < 1e-13);
        // recurrence ψ(z+1) = ψ(z) + 1/z
        for &z in &[c(0.3, 1.0), c(2.0, -5.0), c(-1.7, 0.4)] {
            let lhs = digamma(z + 1.0);
            let rhs = digamma(z) + 1.0 / z;
            assert!((lhs - rhs).norm() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn zeta_reference_values() {
        assert!((zeta(c(2.0, 0.0)) - PI * PI / 6.0).norm() < 1e-13);
        assert!((zeta(c(3.0, 0.0)) - 1.2020569031595942854).norm() < 1e-13);
        assert!((zeta(c(0.0, 0.0)) + 0.5).norm() < 1e-13);
        assert!((zeta(c(-1.0, 0.0)) + 1.0 / 12.0).norm() < 1e-13);
        // ζ′(0) = −½ ln(2π)
        let (_, dz) = zeta_and_deriv(c(0.0, 0.0));
        assert!((dz + 0.5 * (2.0 * PI).ln()).norm() < 1e-12);
        // first nontrivial zero
        let z = zeta(c(0.5, 14.134725141734693));
        assert!(z.norm() < 1e-9, "|zeta(rho_1)| = {}", z.norm());
    }

    #[test]
    fn zeta_deriv_matches_finite_difference() {
        let h = 1e-6;
        for &s in &[c(2.0, 3.0), c(1.0, 2.0), c(0.0, 20.0), c(1.0, -40.0)] {
            let (_, d) = zeta_and_deriv(s);
            let fd = (zeta(s + c(h, 0.0)) - zeta(s - c(h, 0.0))) / (2.0 * h);
            assert!((d - fd).norm() < 1e-7 * d.norm().max(1.0), "s={s} d={d} fd={fd}");
        }
    }
}
