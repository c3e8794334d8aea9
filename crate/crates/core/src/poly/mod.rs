//! Exact polynomial arithmetic.

pub mod multi;
pub mod parse;
pub mod resultant;
pub mod upoly;

pub use multi::{Monomial, MultiPoly};
pub use parse::{parse_grat, parse_poly, parse_rat, parse_value};
pub use resultant::{discriminant, resultant};
pub use upoly::UPoly;
