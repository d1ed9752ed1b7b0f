#![no_main]

use libfuzzer_sys::fuzz_target;
use pawnloss::game::{check_tsp_mechanism, TplvRule, TreeFixture};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(fixture) = TreeFixture::parse(text) else {
        return;
    };
    let Ok((tree, ai)) = fixture.build() else {
        return;
    };
    if let Ok(verdict) = check_tsp_mechanism(&TplvRule, &tree, &ai, 10_000) {
        assert!(verdict.is_tsp());
    }
});
