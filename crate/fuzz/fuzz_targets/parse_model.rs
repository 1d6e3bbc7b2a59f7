#![no_main]

use dimacheck::document::{automata_to_toml, parse_document, system_to_toml, Document};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    match parse_document(src) {
        Ok(Document::Automata(automata)) => {
            let printed = automata_to_toml(&automata);
            let again = parse_document(&printed).expect("printed automata parse");
            assert_eq!(again, Document::Automata(automata));
        }
        Ok(Document::System(cfg)) => {
            let printed = system_to_toml(&cfg);
            let again = parse_document(&printed).expect("printed system parses");
            assert_eq!(again, Document::System(cfg));
        }
        Err(_) => {}
    }
});
