//! Characteristic-2 algebra for the Verschiebung of a supersingular genus-2
//! curve: finite fields, truncated Laurent series, sparse polynomials, the
//! coordinate ring of the self-product, and Frobenius dynamics on P^3.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod gf2m;
pub mod laurent;
pub mod mpoly;
pub mod curve_algebra;
pub mod cert;
pub mod deformation;
pub mod dynamics;
pub mod verschiebung;
pub mod pipeline;

pub use error::{CurveError, FieldError, MapError, PolyError, SeriesError};
pub use gf2m::{FieldElement, FieldParams};
pub use laurent::LaurentSeries;
