#![no_main]

use conetorsion::config::{parse_mu_grid, MAX_MU_POINTS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_mu_grid(text) {
        assert!(!v.is_empty() && v.len() <= MAX_MU_POINTS);
        assert!(v.iter().all(|m| (1.0..=1e6).contains(m)));
    }
});
