//! Oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

pub mod minima_oracle;
