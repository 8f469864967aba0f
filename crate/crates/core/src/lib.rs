//! Exact cyclotomic polynomials, their coefficient heights, upper-bound
//! checks, and certified lower-bound witnesses built from Möbius-signed
//! sine products.

pub mod bounds;
pub mod cyclo;
pub mod error;
pub mod ntheory;
pub mod polyx;
pub mod scan;
pub mod witness;

pub use error::{Error, Result};
pub use polyx::{HighPrecisionMagnitude, IntPoly};
