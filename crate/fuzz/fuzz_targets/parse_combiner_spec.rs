#![no_main]

use cipherbent_core::combiner::parse_combiner_spec;
use cipherbent_core::Error;
use libfuzzer_sys::fuzz_target;

const REGISTERS: &str = "register A 3\nx0\nx1\nregister B 4\nx0\nx3\nregister C 5\nx0\nx2\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut load = |name: &str| match name {
        "toy.reg" => Ok(REGISTERS.to_string()),
        other => Err(Error::Io(format!("{other}: not found"))),
    };
    let _ = parse_combiner_spec(text, &mut load);
});
