#![no_main]

use dimacheck::expr::parse_constraint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_constraint(src) {
        assert_eq!(parse_constraint(&c.to_string()).as_ref(), Ok(&c));
    }
});
