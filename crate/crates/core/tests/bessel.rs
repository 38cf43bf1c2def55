use conetorsion::bessel::{modified_bessel, uniform_expansion, BesselKind};
use conetorsion::olverpoly::olver_pair;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// tests/oracles/bessel_series.py at 60 digits, rounded to f64:
// (ν, x, I, I′, K, K′).
const SERIES_REFERENCE: [(f64, f64, f64, f64, f64, f64); 4] = [
    (3.7, 2.1, 0.097_693_424_589_433_49, 0.193_111_768_347_887_35, 1.197_582_099_965_932, -2.507_060_021_220_4),
    (0.3, 0.05, 0.368_612_873_953_208_8, 2.218_764_471_511_775_6, 3.811_966_336_769_111, -31.312_374_962_907_423),
    (7.25, 11.5, 1_168.643_664_952_383, 1_345.484_655_489_650_5, 3.146_528_579_937_954e-5, -3.818_140_965_773_938e-5),
    (
        1.000_000_1,
        3.3,
        5.180_958_668_996_997,
        4.672_642_830_269_571,
        0.028_116_935_018_493_39,
        -0.033_130_916_336_805_07,
    ),
];

#[test]
fn matches_high_precision_series() {
    for &(nu, x, i, ip, k, kp) in &SERIES_REFERENCE {
        let b = modified_bessel(nu, x, false).unwrap();
        assert!(rel(b.i_val, i) < 1e-12, "I ν={nu} x={x}: {}", rel(b.i_val, i));
        assert!(rel(b.i_prime, ip) < 1e-12, "I′ ν={nu} x={x}");
        assert!(rel(b.k_val, k) < 1e-12, "K ν={nu} x={x}: {}", rel(b.k_val, k));
        assert!(rel(b.k_prime, kp) < 1e-12, "K′ ν={nu} x={x}");
    }
}

/// splitmix64 stream mapped to [0, 1).
struct Stream(u64);
impl Stream {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }
}

// e^{−x} I_ν(x) at large order, same script.
const LARGE_ORDER_REFERENCE: [(f64, f64, f64); 3] = [
    (100.3, 10.0, 1.995_031_439_601_583e-93),
    (200.0, 10.0, 4.056_649_805_112_031e-240),
    (150.5, 40.0, 5.298_577_542_247_41e-85),
];

#[test]
fn large_order_small_argument() {
    for &(nu, x, i) in &LARGE_ORDER_REFERENCE {
        let b = modified_bessel(nu, x, true).unwrap();
        assert!(rel(b.i_val, i) < 1e-14, "ν={nu} x={x}: {:e}", rel(b.i_val, i));
    }
}

#[test]
fn wronskian_grid() {
    let mut s = Stream(20_240_611);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let nu = 50.0 * s.next();
        let x = 0.1 + 49.9 * s.next();
        let b = modified_bessel(nu, x, true).unwrap();
        let w = b.k_val * b.i_prime - b.k_prime * b.i_val;
        worst = worst.max(rel(w, 1.0 / x));
    }
    assert!(worst <= 1e-12, "worst Wronskian error {worst:e}");
}

#[test]
fn uniform_within_truncation_estimate() {
    for &nu in &[30.0, 45.5, 80.0] {
        for &z in &[0.2, 1.0, 3.0] {
            let d = modified_bessel(nu, nu * z, true).unwrap();
            let ex = (nu * z).exp();
            for n in 1..=6 {
                let cases = [
                    (BesselKind::I, d.i_val * ex),
                    (BesselKind::IPrime, d.i_prime * ex),
                    (BesselKind::K, d.k_val / ex),
                    (BesselKind::KPrime, d.k_prime / ex),
                ];
                for (kind, direct) in cases {
                    let u = uniform_expansion(kind, nu, z, n).unwrap();
                    let err = (u.value - direct).abs();
                    assert!(
                        err <= u.truncation + 1e-12 * direct.abs(),
                        "{kind:?} ν={nu} z={z} N={n}: err {err:e} > est {:e}",
                        u.truncation
                    );
                }
            }
        }
    }
}

#[test]
fn first_olver_pair_against_bessel_values() {
    // ν(I_ν(νz)/lead − 1) → u_1(t), likewise v_1 from I′.
    let nu = 50.0;
    let (u1, v1) = olver_pair(1).unwrap();
    for &z in &[0.5, 1.0, 2.0] {
        let sq = (1.0f64 + z * z).sqrt();
        let t = 1.0 / sq;
        let xi = sq + (z / (1.0 + sq)).ln();
        let lead_i = (nu * xi).exp() / ((2.0 * std::f64::consts::PI * nu).sqrt() * sq.sqrt());
        let lead_ip = (nu * xi).exp() * sq.sqrt() / ((2.0 * std::f64::consts::PI * nu).sqrt() * z);
        let d = modified_bessel(nu, nu * z, false).unwrap();
        let est_u = nu * (d.i_val / lead_i - 1.0);
        let est_v = nu * (d.i_prime / lead_ip - 1.0);
        // next-order correction is O(1/ν)
        assert!((est_u - u1.eval(t, 0.0)).abs() < 2.0 / nu, "u1 at z={z}");
        assert!((est_v - v1.eval(t, 0.0)).abs() < 2.0 / nu, "v1 at z={z}");
    }
}

proptest! {
    #[test]
    fn derivative_recurrence(nu in 1.0f64..40.0, x in 0.1f64..60.0) {
        let a = modified_bessel(nu - 1.0, x, true).unwrap();
        let b = modified_bessel(nu, x, true).unwrap();
        let c = modified_bessel(nu + 1.0, x, true).unwrap();
        let ip = 0.5 * (a.i_val + c.i_val);
        prop_assert!(rel(b.i_prime, ip) <= 1e-11);
        let kp = -0.5 * (a.k_val + c.k_val);
        prop_assert!(rel(b.k_prime, kp) <= 1e-11);
    }

    #[test]
    fn uniform_expansion_relative_error(nu in 30.0f64..120.0, t in 0.2f64..1.0) {
        // error ≤ 10 ν^{−N} relative for an N-term truncation
        let z = (1.0 / (t * t) - 1.0).max(1e-6).sqrt();
        let d = modified_bessel(nu, nu * z, true).unwrap();
        let ex = (nu * z).exp();
        for n in 1..=6usize {
            let u = uniform_expansion(BesselKind::K, nu, z, n).unwrap();
            prop_assert!(rel(u.value, d.k_val / ex) <= 10.0 * nu.powi(-(n as i32)));
            let u = uniform_expansion(BesselKind::I, nu, z, n).unwrap();
            prop_assert!(rel(u.value, d.i_val * ex) <= 10.0 * nu.powi(-(n as i32)));
        }
    }
}
