#![no_main]

use cipherbent_core::attack::{format_report_kv, parse_report_kv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_report_kv(text) {
        let again = parse_report_kv(&format_report_kv(&r)).expect("formatted report reparses");
        assert_eq!(again.fields(), r.fields());
    }
});
