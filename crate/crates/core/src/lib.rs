//! Static verification of temporal properties over multiple reconfiguration
//! paths of component-based architectures.

pub mod check;
pub mod cp;
pub mod error;
pub mod ftpl;
pub mod generate;
pub mod json;
pub mod lex;
pub mod model;
pub mod ops;
pub mod oracle;
pub mod path;

pub use error::{Error, ParseError, Result};
