#![no_main]

use dimacheck::expr::parse_update;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(u) = parse_update(src) {
        assert_eq!(parse_update(&u.to_string()).as_ref(), Ok(&u));
    }
});
