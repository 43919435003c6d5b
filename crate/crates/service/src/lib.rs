//! HTTP API and command-line front end over `cmf-core`. Both surfaces share
//! the request and response types in [`api`].

pub mod api;
pub mod cli;
pub mod http;
pub mod snapshot;
