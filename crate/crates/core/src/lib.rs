//! Characteristic-p singularity invariants over `F_p[x_1, ..., x_n]`:
//! q-expansions, Hasse operators, the orders `nu^(q)` and `eta`, blowup
//! transforms of O^q-modules, and q-differential collections.

pub mod diffops;
pub mod error;
pub mod ffpoly;
pub mod geom;
pub mod ideals;
pub mod parse;
pub mod qdiff;
pub mod qmod;
pub mod verify;

pub use error::{Error, ErrorCategory, Result};
pub use ffpoly::{ExpVec, FieldScalar, Polynomial, Prime, QExpansion, Ring, RingRef};
pub use ideals::{Ideal, Order, PointSpec};
pub use parse::parse_poly;
