//! Cryptanalysis workbench for combiner generators built from nonlinear
//! feedback shift registers, centred on the six-register Cipherbent6 cipher.

pub mod attack;
pub mod bits;
pub mod boolfun;
mod error;

pub use bits::BitBuf;
pub use error::{Error, Result};
pub mod combiner;
pub mod nlfsr;
pub mod wordalg;
