//! Robust symbol-level precoding for the multiuser MISO downlink under
//! imperfect channel knowledge.

pub mod channel;
pub mod constellation;
pub mod dpcir;
pub mod error;
pub mod precoders;
pub mod sim;
pub mod socp;
pub mod validation;
pub use error::{Result, SlpError};
