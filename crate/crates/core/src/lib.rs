#![no_std]
extern crate alloc;

pub mod big_cell;
pub mod error;
pub mod exact;
pub mod hodge;
pub mod lie;
pub mod numeric;
pub mod orbit;
pub mod roots;
pub mod strong_orth;

pub use error::{Error, Result};
