//! HTTP session service for planning a group and replanning as RSVPs arrive.
//!
//! `POST /sessions` stores a graph and solver settings, `POST /sessions/{id}/solve`
//! picks a group, `POST /sessions/{id}/rsvp` records answers and
//! `POST /sessions/{id}/replan` replaces members who declined while keeping the
//! confirmed ones. Errors come back as `{code, message}`.

pub mod api;
pub mod error;
pub mod session;
pub mod store;

pub use api::router;
pub use error::{ErrorBody, Result, ServiceError};
pub use session::{RsvpStatus, Session, SessionState};
pub use store::Store;
