#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Headless simulator of a small fire-fighting robot in a four-room arena.

pub mod arena;
pub mod geom;
pub mod navigator;
pub mod sensors;
pub mod vehicle;
pub mod campaign;
pub mod config;
pub mod record;
pub mod sim;
