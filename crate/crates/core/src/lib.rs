//! Carleman linearization of polynomial ODEs `x' = F_1 x + F_2 x^[2] + ... + F_k x^[k]`
//! with `f(0) = 0`.
//!
//! The crate is `no_std` (it only needs `alloc`) and covers the numeric side of
//! the pipeline:
//!
//! * [`tensor`]: sparse matrices, Kronecker products and powers, the sup norm
//!   and its logarithmic norm.
//! * [`model`]: the polynomial ODE data model and its compilation from
//!   monomial lists.
//! * [`carleman`]: transfer matrices, the truncated Carleman matrix and the
//!   reduction of degree-`k` systems to quadratic ones.
//! * [`bounds`]: the two explicit truncation-error envelopes, their horizons and
//!   the a-priori growth bound.
//! * [`sim`]: fixed-step RK4 integration of the nonlinear and truncated systems
//!   and measurement of the actual truncation error.
//! * [`verify`]: brute-force oracles (path sums, nested integrals, coefficient
//!   bounds) that check the combinatorial machinery behind the bounds.
//!
//! Parsing, file formats and the command-line tool live in the `carleman` crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod carleman;
mod error;
mod math;
pub mod model;
pub mod sim;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Monomial, PolyOde};
pub use tensor::{SizeGuard, SparseMatrix};
