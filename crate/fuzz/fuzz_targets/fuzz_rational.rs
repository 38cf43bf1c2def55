#![no_main]

use conetorsion::olverpoly::{parse_rational, rational_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 4096 {
        return;
    }
    if let Ok(q) = parse_rational(text) {
        let back = parse_rational(&rational_to_string(&q)).expect("printed rational parses");
        assert_eq!(q, back);
    }
});
