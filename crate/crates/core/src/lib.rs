//! Verification engine for the existence of primitive elements of the form
//! beta*(gamma + a) in cubic and quartic extensions of finite fields.
//!
//! The crate decides membership of small prime powers q in the line set L_n
//! and translate set T_n by exhaustive search over reduced (beta, gamma)
//! classes, evaluates the sieve criteria that bound the possible exceptions
//! (with exact rational arithmetic throughout), and numerically validates the
//! character-sum bounds the sieves rest on.

pub mod arith;
pub mod charsum;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod search;
pub mod sieve;

pub use error::{Error, Result};
