//! Exact computer algebra for groups of germs of holomorphic diffeomorphisms
//! of (ℂ, 0) and for polynomial differential forms.

pub mod affine;
pub mod cli;
pub mod cyclotomic;
pub mod error;
pub mod expr;
pub mod germs;
pub mod group_cert;
pub mod jets;
pub mod linearizer;
pub mod pforms;
pub mod registry;
mod search;

pub use cyclotomic::{CycloElem, Rational, Scalar};
pub use error::{Error, Result};
