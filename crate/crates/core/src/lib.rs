//! Constructive pipeline for wild smooth initial data of the 2D isentropic
//! Euler system with pressure p(ρ) = ρ².

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod cli;
pub mod config;
pub mod error;
pub mod euler_map;
pub mod initial_data;
pub mod ode_epsilon;
pub mod profiles;
pub mod quad;
pub mod real;
pub mod report;
pub mod roots;
pub mod subsolution;

pub use error::{Error, Result};
