//! Command-line driver and read-only HTTP service for the `polyrec`
//! extraction pipeline.
//!
//! [`cli`] defines the `polyrec` command; [`pipeline`] runs the stages it
//! exposes; [`api`] serves a records file as JSON.

pub mod api;
pub mod cli;
pub mod config;
pub mod pipeline;
