#![no_main]

use conetorsion::config::{build_cross_section, RunConfig};
use conetorsion::Error;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match RunConfig::parse(text) {
        Ok(cfg) => {
            // Anything parse accepts must build and expose a valid grid.
            build_cross_section(&cfg.cross_section).expect("validated config builds");
            if let Some(mus) = cfg.mu_values().expect("validated grid") {
                assert!(mus.iter().all(|m| (1.0..=1e6).contains(m)));
            }
        }
        Err(Error::Config { path, .. }) => assert!(!path.is_empty()),
        Err(e) => panic!("config error without a path: {e}"),
    }
});
