//! File formats, the end-to-end pipeline and the `carleman` command-line tool
//! on top of [`carleman_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dsl;
pub mod formats;
pub mod input;
pub mod json;
pub mod pipeline;
pub mod selfcheck;
