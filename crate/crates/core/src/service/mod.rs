//! Command-line and HTTP front ends over [`crate::pipeline::Pipeline`].

pub mod cli;
pub mod http;
