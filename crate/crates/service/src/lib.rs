//! Persistence, HTTP API and command-line binding for `phn-core`.
//!
//! [`store::Store`] keeps one append-only NDJSON event log per user.
//! [`api::Service`] answers requests from those logs; [`http`] puts it on
//! the wire.

pub mod api;
pub mod http;
pub mod store;

pub use api::{Request, Response, Service};
pub use store::Store;
