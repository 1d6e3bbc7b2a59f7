use std::fs;
use std::path::PathBuf;

use dimacheck::document::{automata_to_toml, parse_document, system_to_toml, Document};
use dimacheck::expr::{parse_constraint, parse_update};
use dimacheck::report::AnalysisReport;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn model_seeds_round_trip() {
    for (path, src) in seeds("parse_model") {
        let doc = parse_document(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let printed = match &doc {
            Document::Automata(a) => automata_to_toml(a),
            Document::System(cfg) => system_to_toml(cfg),
        };
        assert_eq!(parse_document(&printed).unwrap(), doc, "{}", path.display());
    }
}

#[test]
fn constraint_seeds_round_trip() {
    for (path, src) in seeds("parse_constraint") {
        let c = parse_constraint(src.trim()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_constraint(&c.to_string()).unwrap(), c);
    }
}

#[test]
fn update_seeds_round_trip() {
    for (path, src) in seeds("parse_update") {
        let u = parse_update(src.trim()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_update(&u.to_string()).unwrap(), u);
    }
}

#[test]
fn report_seeds_round_trip() {
    for (path, src) in seeds("parse_report") {
        let r = AnalysisReport::from_jsonl(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(AnalysisReport::from_jsonl(&r.to_jsonl()).unwrap(), r);
    }
}
