//! Exact-arithmetic building blocks for the geometric (conjugacy-class) side
//! of the trace of Hecke operators T_n acting on Maass cusp forms for the
//! Hecke congruence groups Γ₀(N) of square-free level.
//!
//! The crate computes, exactly where the objects are integers and to a stated
//! tolerance where they are transcendental:
//!
//! - fundamental solutions of v² − du² = 4 and the units ε_d ([`pell`]),
//! - class numbers and Γ₀(N)-equivalence of indefinite binary quadratic
//!   forms ([`qforms`]),
//! - cusp combinatorics of Γ₀(N) and the census of hyperbolic elements whose
//!   fixed points are cusps ([`gamma0`]),
//! - the point-pair kernel (1 + t/4)^(−s) with its Selberg transform pair and
//!   per-conjugacy-class weights ([`transform`]),
//! - the Eisenstein scattering matrix for square-free level ([`scattering`]),
//! - hyperbolic conjugacy classes with non-trivial centralizer and their
//!   class sums ([`hyperbolic`]),
//! - the Dirichlet series L_n(s) and the assembled geometric side
//!   ([`lseries`]).
//!
//! Every analytic shortcut is paired with an independent oracle (direct
//! enumeration, defining-integral quadrature, or exact rational identity);
//! the integration tests exercise the pairs against each other.

pub mod arith;
pub mod gamma0;
pub mod hyperbolic;
pub mod lseries;
pub mod mat2;
pub mod pell;
pub mod qforms;
pub mod quadrature;
pub mod scattering;
pub mod special;
pub mod surd;
pub mod transform;

pub use arith::Discriminant;
