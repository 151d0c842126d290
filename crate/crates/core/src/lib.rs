//! Short-length coding schemes for binary distributed hypothesis testing.

pub mod analysis;
pub mod codes;
pub mod error;
pub mod gf2;
pub mod par;
pub mod schemes;
pub mod sim;
pub mod sources;

pub use error::{Error, Result};
