#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::report::{emit_report, parse_report, ReportFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(report) = parse_report(text) else {
        return;
    };
    let json = emit_report(&report, ReportFormat::Json);
    let again = parse_report(&json).expect("emitted report parses");
    assert_eq!(emit_report(&again, ReportFormat::Json), json);
    let _ = emit_report(&report, ReportFormat::Csv);
});
