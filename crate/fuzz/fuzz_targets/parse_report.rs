#![no_main]

use dimacheck::report::AnalysisReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(report) = AnalysisReport::from_jsonl(src) {
        let again = AnalysisReport::from_jsonl(&report.to_jsonl()).expect("printed report parses");
        assert_eq!(again, report);
    }
});
