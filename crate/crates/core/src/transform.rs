//! The kernel k(t) = (1 + t/4)^(−s), its transform pair g(u), h(r), and the
//! per-conjugacy-class weights (elliptic and hyperbolic).
//!
//! Closed forms carry the computation; each one is gated behind quadrature of
//! the defining integral in the test suite, and the quadrature oracles stay
//! exported so the verification paths can be re-run from the CLI.

use crate::quadrature::{self, QuadConfig, QuadError};
use crate::special;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("Re s must exceed 1/2, got {0}")]
    DomainS(Complex64),
    #[error("h(r) is evaluated within |Im r| < Re s − 1/2, got r = {0} at s = {1}")]
    DomainR(Complex64, Complex64),
    #[error("pole proximity: |s − 1/2 ∓ ir| < 1e-8 at r = {0}, s = {1}")]
    PoleProximity(Complex64, Complex64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("extrapolation did not settle: spread {0:.3e}")]
    NonConvergentExtrapolation(f64),
}

/// The spectral parameter with its constant c = 2√π·Γ(s−1/2)/Γ(s).
#[derive(Debug, Clone, Copy)]
pub struct SelbergTriple {
    pub s: Complex64,
    pub c_const: Complex64,
}

impl SelbergTriple {
    pub fn new(s: Complex64) -> Result<Self, TransformError> {
        if s.re <= 0.5 {
            return Err(TransformError::DomainS(s));
        }
        let c_const = 2.0 * PI.sqrt() * special::gamma(s - 0.5) / special::gamma(s);
        Ok(SelbergTriple { s, c_const })
    }
}

/// k(t) = (1 + t/4)^(−s), principal branch.
pub fn kernel_k(t: f64, s: Complex64) -> Complex64 {
    debug_assert!(t >= 0.0);
    Complex64::new(1.0 + t / 4.0, 0.0).powc(-s)
}

/// g(u) = c·(1 + w/4)^{1/2−s} with w = e^u + e^{−u} − 2; even in u.
pub fn transform_g(u: f64, s: Complex64) -> Result<Complex64, TransformError> {
    let tri = SelbergTriple::new(s)?;
    Ok(transform_g_with(&tri, u))
}

pub fn transform_g_with(tri: &SelbergTriple, u: f64) -> Complex64 {
    // 1 + w/4 = cosh²(u/2)
    let ch = (u / 2.0).cosh();
    tri.c_const * Complex64::new(ch * ch, 0.0).powc(Complex64::new(0.5, 0.0) - tri.s)
}

/// g by its defining integral ∫_w^∞ k(t)/√(t − w) dt (oracle path).
pub fn transform_g_quadrature(u: f64, s: Complex64, cfg: &QuadConfig) -> Result<Complex64, TransformError> {
    if s.re <= 0.5 {
        return Err(TransformError::DomainS(s));
    }
    let w = (u.exp() + (-u).exp()) - 2.0;
    // t = w + τ² removes the endpoint singularity
    let f = |tau: f64| 2.0 * kernel_k(w + tau * tau, s);
    Ok(quadrature::integrate_half_line(&f, 0.0, cfg)?.value)
}

/// h(r) = c·4^{s−1/2}·Γ(s−1/2+ir)Γ(s−1/2−ir)/Γ(2s−1).
///
/// The Beta-integral closed form is a derived convenience; the defining
/// Fourier integral [`transform_h_quadrature`] is its oracle.
pub fn transform_h(r: Complex64, s: Complex64) -> Result<Complex64, TransformError> {
    let tri = SelbergTriple::new(s)?;
    transform_h_with(&tri, r)
}

pub fn transform_h_with(tri: &SelbergTriple, r: Complex64) -> Result<Complex64, TransformError> {
    let s = tri.s;
    if r.im.abs() >= s.re - 0.5 {
        return Err(TransformError::DomainR(r, s));
    }
    let i = Complex64::new(0.0, 1.0);
    let a_plus = s - 0.5 + i * r;
    let a_minus = s - 0.5 - i * r;
    if a_plus.norm() < 1e-8 || a_minus.norm() < 1e-8 {
        return Err(TransformError::PoleProximity(r, s));
    }
    let four_pow = Complex64::new(4.0, 0.0).powc(s - 0.5);
    Ok(tri.c_const * four_pow * special::gamma(a_plus) * special::gamma(a_minus) / special::gamma(2.0 * s - 1.0))
}

/// h by the defining Fourier integral ∫ g(u) e^{iru} du (oracle path).
pub fn transform_h_quadrature(r: Complex64, s: Complex64, cfg: &QuadConfig) -> Result<Complex64, TransformError> {
    let tri = SelbergTriple::new(s)?;
    if r.im.abs() >= s.re - 0.5 {
        return Err(TransformError::DomainR(r, s));
    }
    // g decays like e^{-(Re s - 1/2)|u|}; truncate where the tail is dust
    let decay = s.re - 0.5 - r.im.abs();
    let ucut = (42.0 / decay).min(800.0);
    let i = Complex64::new(0.0, 1.0);
    let f = |u: f64| {
        let g = transform_g_with(&tri, u);
        g * ((i * r * u).exp() + (-i * r * u).exp())
    };
    Ok(quadrature::integrate(&f, 0.0, ucut, cfg)?.value)
}

/// Numerical residue of h at s → 1/2 + iκ against the closed-form target
/// 4^{1/2+iκ}·√π·Γ(iκ)/Γ(1/2+iκ).
#[derive(Debug, Clone, Copy)]
pub struct ResidueComparison {
    pub extrapolated: Complex64,
    pub closed_form: Complex64,
}

/// Evaluate (s_j − τ)·h_{s_j}(κ) along s_j = τ + δ_j and extrapolate δ → 0
/// by iterated Richardson elimination. The steps must decrease geometrically.
pub fn residue_factor(kappa: f64, deltas: &[f64]) -> Result<ResidueComparison, TransformError> {
    assert!(kappa > 0.0);
    assert!(deltas.len() >= 2);
    let tau = Complex64::new(0.5, kappa);
    let r = Complex64::new(kappa, 0.0);
    let mut rows: Vec<Complex64> = Vec::with_capacity(deltas.len());
    for &dl in deltas {
        let s = tau + dl;
        let h = transform_h(r, s)?;
        rows.push(dl * h);
    }
    // Neville extrapolation to delta = 0: (s − τ)·h is analytic in delta
    let n = rows.len();
    let mut table = rows.clone();
    let mut prev_last = table[n - 1];
    for level in 1..n {
        for j in (level..n).rev() {
            let num = deltas[j - level] * table[j] - deltas[j] * table[j - 1];
            table[j] = num / (deltas[j - level] - deltas[j]);
        }
        if level < n - 1 {
            prev_last = table[n - 1];
        }
    }
    let extrapolated = table[n - 1];
    let spread = (extrapolated - prev_last).norm();
    if spread > 1e-3 * extrapolated.norm().max(1e-6) {
        return Err(TransformError::NonConvergentExtrapolation(spread));
    }
    let i = Complex64::new(0.0, 1.0);
    let closed_form = Complex64::new(4.0, 0.0).powc(tau) * PI.sqrt() * special::gamma(i * kappa)
        / special::gamma(Complex64::new(0.5, kappa));
    Ok(ResidueComparison { extrapolated, closed_form })
}

/// Elliptic class weight (π/(2m·sinθ))·∫₀^∞ k(t)/√(t + 4sin²θ) dt.
pub fn elliptic_weight(theta: f64, m: u32, s: Complex64, cfg: &QuadConfig) -> Result<Complex64, TransformError> {
    assert!(theta > 0.0 && theta < PI, "theta must lie in (0, π)");
    assert!(m >= 1);
    if s.re <= 0.5 {
        return Err(TransformError::DomainS(s));
    }
    let sin_t = theta.sin();
    let shift = 4.0 * sin_t * sin_t;
    let f = |t: f64| kernel_k(t, s) / (t + shift).sqrt();
    let integral = quadrature::integrate_half_line(&f, 0.0, cfg)?.value;
    Ok(PI / (2.0 * m as f64 * sin_t) * integral)
}

/// Hyperbolic class weight ln(NP₁)/((NP)^{1/2} − (NP)^{−1/2})·g(ln NP).
pub fn hyperbolic_weight(norm_p: f64, norm_p1: f64, s: Complex64) -> Result<Complex64, TransformError> {
    assert!(norm_p > 1.0 && norm_p1 > 1.0);
    hyperbolic_weight_from_logs(norm_p.ln(), norm_p1.ln(), s)
}

/// The same weight from ln NP and ln NP₁ directly; norms of high-discriminant
/// generators overflow f64 while their logs stay small.
pub fn hyperbolic_weight_from_logs(ln_np: f64, ln_np1: f64, s: Complex64) -> Result<Complex64, TransformError> {
    assert!(ln_np > 0.0 && ln_np1 > 0.0);
    let tri = SelbergTriple::new(s)?;
    let denom = 2.0 * (ln_np / 2.0).sinh(); // NP^{1/2} − NP^{−1/2}
    Ok(ln_np1 / denom * transform_g_with(&tri, ln_np))
}

/// Oracle for the hyperbolic weight: the defining strip integral
/// ∫₁^{NP₁} dy/y² ∫ k((NP−1)²/NP · |z|²/y²) dx by nested quadrature.
pub fn hyperbolic_weight_quadrature(
    norm_p: f64,
    norm_p1: f64,
    s: Complex64,
    cfg: &QuadConfig,
) -> Result<Complex64, TransformError> {
    assert!(norm_p > 1.0 && norm_p1 > 1.0);
    if s.re <= 0.5 {
        return Err(TransformError::DomainS(s));
    }
    let q = (norm_p - 1.0) * (norm_p - 1.0) / norm_p;
    let inner_cfg = QuadConfig { tol: cfg.tol / 50.0, ..*cfg };
    let outer = |y: f64| -> Complex64 {
        let f = |x: f64| kernel_k(q * (x * x + y * y) / (4.0 * y * y), s);
        let half = quadrature::integrate_half_line(&f, 0.0, &inner_cfg).expect("inner quadrature");
        2.0 * half.value / (y * y)
    };
    Ok(quadrature::integrate(&outer, 1.0, norm_p1, cfg)?.value)
}
