//! Exact-arithmetic calculators for the geometry of the supersingular locus
//! in the moduli of principally polarized abelian varieties in characteristic p.
//!
//! Everything here is exact: big-rational polynomial arithmetic in the
//! indeterminate `p`, the tautological ring in its square-free λ-monomial
//! basis, closed-form stratum classes and component counts, the ℓ-monomial
//! intersection calculus on the flag-type models for genus 3 and 4,
//! exhaustive point counting over small extension fields, and truncated
//! Witt-vector linear algebra for Newton-slope checks.

pub mod dieudonne;
pub mod exactpoly;
pub mod finitefield;
pub mod flagcalc;
pub mod strata;
pub mod tautring;

pub use exactpoly::{FactoredPPoly, PPoly, Rat, RatFn};
pub use tautring::TautClass;
