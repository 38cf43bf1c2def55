//! Replays the fuzz seed corpora through the fuzz-target invariants, and
//! throws random text at every parser entry point.

use std::path::Path;

use conetorsion::config::{build_cross_section, parse_mu_grid, RunConfig, MAX_MU_POINTS};
use conetorsion::olverpoly::{parse_rational, rational_to_string};
use conetorsion::Error;
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

fn config_invariant(text: &str) -> bool {
    match RunConfig::parse(text) {
        Ok(cfg) => {
            build_cross_section(&cfg.cross_section).unwrap();
            if let Some(m) = cfg.mu_values().unwrap() {
                assert!(m.iter().all(|x| (1.0..=1e6).contains(x)));
            }
            true
        }
        Err(Error::Config { path, .. }) => {
            assert!(!path.is_empty());
            false
        }
        Err(e) => panic!("config error without a path: {e}"),
    }
}

fn mu_invariant(text: &str) -> bool {
    match parse_mu_grid(text) {
        Ok(v) => {
            assert!(!v.is_empty() && v.len() <= MAX_MU_POINTS);
            assert!(v.iter().all(|m| (1.0..=1e6).contains(m)));
            true
        }
        Err(_) => false,
    }
}

fn rational_invariant(text: &str) -> bool {
    match parse_rational(text) {
        Ok(q) => {
            assert_eq!(parse_rational(&rational_to_string(&q)).unwrap(), q);
            true
        }
        Err(_) => false,
    }
}

#[test]
fn config_seeds() {
    let got: Vec<(String, bool)> = seeds("fuzz_config").into_iter().map(|(n, t)| (n, config_invariant(&t))).collect();
    let expect = [
        ("bad_schema_odd_dim.json", false),
        ("both_cutoffs.json", false),
        ("sphere_table.json", true),
        ("t4_rank2.json", true),
        ("unit_square.json", true),
    ];
    let expect: Vec<(String, bool)> = expect.iter().map(|(n, b)| (n.to_string(), *b)).collect();
    assert_eq!(got, expect);
}

#[test]
fn mu_grid_seeds() {
    for (name, text) in seeds("fuzz_mu_grid") {
        assert_eq!(mu_invariant(&text), name != "reversed", "{name}");
    }
}

#[test]
fn rational_seeds() {
    for (name, text) in seeds("fuzz_rational") {
        assert_eq!(rational_invariant(&text), name != "zero_denominator", "{name}");
    }
}

proptest! {
    #[test]
    fn config_never_panics(s in "\\PC{0,200}") {
        config_invariant(&s);
    }

    #[test]
    fn config_mutations_never_panic(idx in 0usize..120, byte in any::<u8>()) {
        let base = r#"{"schema":1,"cross_section":{"family":"flat_torus","dim_n":2,"lattice_basis":[[1,0],[0,1]]},"mu_grid":"2..64"}"#;
        let mut b = base.as_bytes().to_vec();
        let i = idx % b.len();
        b[i] = byte;
        if let Ok(t) = std::str::from_utf8(&b) {
            config_invariant(t);
        }
    }

    #[test]
    fn mu_grid_never_panics(s in "[0-9.,e+\\- ]{0,40}") {
        mu_invariant(&s);
    }

    #[test]
    fn rational_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
        let text = format!("{n}/{d}");
        prop_assert!(rational_invariant(&text));
    }

    #[test]
    fn rational_never_panics(s in "[0-9/\\- ]{0,30}") {
        rational_invariant(&s);
    }
}
