//! Process exit codes, one per error class.

use cipherbent_core::Error;

pub const OK: u8 = 0;
pub const OTHER: u8 = 1;
/// Command-line usage errors (reported by the argument parser).
pub const USAGE: u8 = 2;
pub const PARSE: u8 = 3;
/// Validation, domain and composition errors, and an unbiased mask.
pub const VALIDATION: u8 = 4;
pub const CAPACITY: u8 = 5;
/// The attack rejected the true candidate or no combination survived.
pub const MISS: u8 = 6;
/// Not enough keystream to reach the requested false-alarm rate.
pub const INFEASIBLE: u8 = 7;
/// Commitment or keystream regeneration did not match.
pub const VERIFICATION: u8 = 8;
pub const IO: u8 = 9;

pub fn code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => PARSE,
        Error::Validation(_) | Error::Domain(_) | Error::Composition(_) | Error::NoBias => VALIDATION,
        Error::Capacity(_) => CAPACITY,
        Error::Miss(_) => MISS,
        Error::Infeasible(_) => INFEASIBLE,
        Error::Io(_) => IO,
        Error::SearchFailure(_) => OTHER,
    }
}
