//! Modified Bessel functions I_ν, K_ν and their derivatives for real ν ≥ 0,
//! x > 0, plus the small-argument and uniform large-order expansions.
//!
//! Evaluation follows Temme's series (x < 2) and Steed's continued fraction
//! (x ≥ 2) for K at the reduced order μ = ν − round(ν), upward recurrence for
//! K, and the continued fraction for I_{ν+1}/I_ν. I is then fixed by the
//! Wronskian, so `K I′ − K′ I = 1/x` holds to rounding by construction.

use crate::error::{Error, Result};
use crate::olverpoly;
use crate::special::gamma;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselQuad {
    pub i_val: f64,
    pub i_prime: f64,
    pub k_val: f64,
    pub k_prime: f64,
    /// When set, I and I′ carry a factor e^{−x}, K and K′ a factor e^{x}.
    pub scaled: bool,
}

/// Log-derivatives, free of any scaling: `I′/I` and `K′/K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselLogDerivs {
    pub i_ratio: f64,
    pub k_ratio: f64,
}

// Coefficients of 1/Γ(z) = Σ a_k z^k (k = 1..26).
const RGAMMA_SERIES: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary Γ quantities for |μ| ≤ ½:
/// (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)).
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+x) = Σ_{k≥1} a_k x^{k−1}
    let mut gampl = 0.0;
    let mut gammi = 0.0;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    for (idx, &a) in RGAMMA_SERIES.iter().enumerate().rev() {
        let k = idx + 1;
        gampl = gampl * mu + a;
        gammi = gammi * (-mu) + a;
        if k % 2 == 0 {
            // contributes −a_k μ^{k−2}
            gam1 = gam1 * mu * mu - a;
        } else {
            gam2 = gam2 * mu * mu + a;
        }
    }
    (gam1, gam2, gampl, gammi)
}

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-290;

struct Raw {
    i: f64,
    ip: f64,
    k: f64,
    kp: f64,
    /// true when i/ip carry e^{−x} and k/kp carry e^{x}
    scaled: bool,
    i_ratio: f64,
}

fn raw(nu: f64, x: f64, want_scaled: bool) -> Result<Raw> {
    if !nu.is_finite() || !x.is_finite() || nu.is_nan() || x.is_nan() {
        return Err(Error::InvalidArgument(format!("bessel(ν={nu}, x={x})")));
    }
    if nu < 0.0 || x <= 0.0 {
        return Err(Error::InvalidArgument(format!("bessel needs ν ≥ 0, x > 0; got ν={nu}, x={x}")));
    }
    let nl = (nu + 0.5).floor() as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    // CF1: I′_ν/I_ν.
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..1_000_000 {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!("I ratio continued fraction ν={nu} x={x}")));
    }
    let i_ratio = h;

    // Downward recurrence of the unnormalised I from ν to μ.
    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let mut ril1 = ril;
    let mut rip1 = ripl;
    for l in (1..=nl).rev() {
        // (μ + l)/x recomputed each step; a running `fact -= 1/x` drifts by
        // ~ν ulps, which dominates at large ν.
        let ritemp = (xmu + l as f64) / x * ril + ripl;
        ripl = (xmu + (l - 1) as f64) / x * ritemp + ril;
        ril = ritemp;
        if ril.abs() > 1e250 {
            ril *= 1e-250;
            ripl *= 1e-250;
            ril1 *= 1e-250;
            rip1 *= 1e-250;
        }
    }
    let f = ripl / ril;

    // K_μ, K_{μ+1}
    let (mut rkmu, mut rk1, k_scaled) = if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = std::f64::consts::PI * xmu;
        let fct = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let dd = -x2.ln();
        let e = xmu * dd;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fct * (gam1 * e.cosh() + gam2 * fact2 * dd);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut cc = 1.0;
        let d2 = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..100_000 {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= d2 / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * ff;
            sum += del;
            let del1 = cc * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NoConvergence(format!("Temme series ν={nu} x={x}")));
        }
        (sum, sum1 * xi2, false)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..1_000_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NoConvergence(format!("Steed continued fraction ν={nu} x={x}")));
        }
        let h = a1 * h;
        let rkmu = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
        let rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
        (rkmu, rk1, true)
    };
    let rkmup = xmu * xi * rkmu - rk1;
    let rimu = xi / (f * rkmu - rkmup);
    let mut ri = rimu * ril1 / ril;
    let mut rip = rimu * rip1 / ril;
    for i in 1..=nl {
        let rktemp = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
        if !rk1.is_finite() {
            return Err(Error::Overflow(format!("K_ν(x) for ν={nu}, x={x}")));
        }
    }
    let mut rk = rkmu;
    let mut rkp = nu * xi * rkmu - rk1;

    // Bring to the requested scaling.
    let ex = x.exp();
    match (k_scaled, want_scaled) {
        (true, false) => {
            if x > 700.0 {
                return Err(Error::Overflow(format!("unscaled I_ν(x) at x={x}; use the scaled variant")));
            }
            let emx = (-x).exp();
            rk *= emx;
            rkp *= emx;
            ri *= ex;
            rip *= ex;
        }
        (false, true) => {
            rk *= ex;
            rkp *= ex;
            let emx = 1.0 / ex;
            ri *= emx;
            rip *= emx;
        }
        _ => {}
    }
    if !(rk.is_finite() && rkp.is_finite() && ri.is_finite() && rip.is_finite()) {
        return Err(Error::Overflow(format!("Bessel values at ν={nu}, x={x}")));
    }
    Ok(Raw { i: ri, ip: rip, k: rk, kp: rkp, scaled: want_scaled, i_ratio })
}

/// I_ν(x), I′_ν(x), K_ν(x), K′_ν(x).
pub fn modified_bessel(nu: f64, x: f64, scaled: bool) -> Result<BesselQuad> {
    let r = raw(nu, x, scaled)?;
    Ok(BesselQuad { i_val: r.i, i_prime: r.ip, k_val: r.k, k_prime: r.kp, scaled: r.scaled })
}

/// `I′_ν(x)/I_ν(x)` and `K′_ν(x)/K_ν(x)`; never overflows.
pub fn log_derivatives(nu: f64, x: f64) -> Result<BesselLogDerivs> {
    let r = raw(nu, x, true)?;
    Ok(BesselLogDerivs { i_ratio: r.i_ratio, k_ratio: r.kp / r.k })
}

/// Leading small-argument forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallArgLeading {
    pub i_val: f64,
    pub i_prime: f64,
    pub k_val: f64,
    pub k_prime: f64,
}

pub fn small_argument_leading(nu: f64, z: f64) -> Result<SmallArgLeading> {
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("small-argument forms need ν > 0, got {nu}")));
    }
    if !(z > 0.0) {
        return Err(Error::InvalidArgument(format!("small-argument forms need z > 0, got {z}")));
    }
    let p = 2f64.powf(nu);
    let out = SmallArgLeading {
        i_val: z.powf(nu) / (p * gamma(nu + 1.0)),
        i_prime: z.powf(nu - 1.0) / (p * gamma(nu)),
        k_val: 0.5 * p * gamma(nu) / z.powf(nu),
        k_prime: -0.5 * p * gamma(nu + 1.0) / z.powf(nu + 1.0),
    };
    if [out.i_val, out.i_prime, out.k_val, out.k_prime].iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("small-argument forms at ν={nu}, z={z}")));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselKind {
    I,
    IPrime,
    K,
    KPrime,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformValue {
    pub value: f64,
    /// Σ |term_r| over the omitted orders r = N..=max_order. The first
    /// omitted term alone vanishes at zeros of u_N, v_N and undershoots near
    /// t = 1, where the low-order polynomials nearly cancel.
    pub truncation: f64,
}

/// Olver's uniform expansion of `kind` at argument νz, keeping
/// `1 + Σ_{r=1}^{N−1}` of the polynomial series.
pub fn uniform_expansion(kind: BesselKind, nu: f64, z: f64, n_terms: usize) -> Result<UniformValue> {
    if !(z > 0.0) || !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("uniform expansion needs ν, z > 0; got ν={nu}, z={z}")));
    }
    if n_terms == 0 {
        return Err(Error::InvalidArgument("uniform expansion needs N ≥ 1".into()));
    }
    let sq = (1.0 + z * z).sqrt();
    let t = 1.0 / sq;
    let xi = sq + (z / (1.0 + sq)).ln();
    let use_v = matches!(kind, BesselKind::IPrime | BesselKind::KPrime);
    let sgn = match kind {
        BesselKind::I | BesselKind::IPrime => 1.0,
        BesselKind::K | BesselKind::KPrime => -1.0,
    };
    let term = |r: usize| -> Result<f64> {
        let (u, v) = olverpoly::olver_pair(r)?;
        let p = if use_v { v } else { u };
        Ok(p.eval(t, 0.0) / (sgn * nu).powi(r as i32))
    };
    let mut series = 1.0;
    for r in 1..n_terms {
        series += term(r)?;
    }
    let top = olverpoly::max_order().max(n_terms);
    let mut omitted = 0.0;
    for r in n_terms..=top {
        omitted += term(r)?.abs();
    }
    let quarter = sq.sqrt();
    let pref = match kind {
        BesselKind::I => (nu * xi).exp() / ((2.0 * std::f64::consts::PI * nu).sqrt() * quarter),
        BesselKind::IPrime => (nu * xi).exp() * quarter / ((2.0 * std::f64::consts::PI * nu).sqrt() * z),
        BesselKind::K => (std::f64::consts::PI / (2.0 * nu)).sqrt() * (-nu * xi).exp() / quarter,
        BesselKind::KPrime => -(std::f64::consts::PI / (2.0 * nu)).sqrt() * (-nu * xi).exp() * quarter / z,
    };
    if !pref.is_finite() {
        return Err(Error::Overflow(format!("uniform expansion prefactor at ν={nu}, z={z}")));
    }
    Ok(UniformValue { value: pref * series, truncation: (pref * omitted).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.05, 0.7, 1.9, 2.0, 5.0, 33.0] {
            let b = modified_bessel(0.5, x, false).unwrap();
            let i = (2.0 / (PI * x)).sqrt() * x.sinh();
            let k = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(b.i_val, i) < 1e-13, "I x={x}");
            assert!(rel(b.k_val, k) < 1e-13, "K x={x}");
            let kp = -k * (1.0 + 1.0 / (2.0 * x));
            assert!(rel(b.k_prime, kp) < 1e-13);
        }
    }

    #[test]
    fn k0_small_argument_limit() {
        let x = 1e-8;
        let b = modified_bessel(0.0, x, false).unwrap();
        let lead = -(x / 2.0).ln() - crate::special::EULER_GAMMA;
        assert!((b.k_val - lead).abs() < 1e-12);
    }

    #[test]
    fn scaled_matches_unscaled() {
        for &(nu, x) in &[(0.3, 1.5), (2.7, 3.0), (10.0, 25.0)] {
            let a = modified_bessel(nu, x, false).unwrap();
            let s = modified_bessel(nu, x, true).unwrap();
            assert!(rel(s.i_val * x.exp(), a.i_val) < 1e-13);
            assert!(rel(s.k_prime * (-x).exp(), a.k_prime) < 1e-13);
        }
        assert!(matches!(modified_bessel(1.0, 800.0, false), Err(Error::Overflow(_))));
        assert!(modified_bessel(1.0, 800.0, true).is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(modified_bessel(f64::NAN, 1.0, false).is_err());
        assert!(modified_bessel(1.0, 0.0, false).is_err());
        assert!(small_argument_leading(0.0, 1.0).is_err());
    }

    #[test]
    fn near_integer_orders_are_continuous() {
        let x = 1.3;
        let a = modified_bessel(2.0, x, false).unwrap();
        for d in [1e-9, 1e-6, 1e-4] {
            for nu in [2.0 - d, 2.0 + d] {
                let b = modified_bessel(nu, x, false).unwrap();
                assert!(rel(b.k_val, a.k_val) < 10.0 * d, "ν={nu}");
            }
        }
    }

    #[test]
    fn small_argument_ratio() {
        let nu = 1.7;
        let z = 1e-7;
        let s = small_argument_leading(nu, z).unwrap();
        assert!(rel(s.i_prime / s.i_val, nu / z) < 1e-14);
        let b = modified_bessel(nu, z, false).unwrap();
        assert!(rel(b.i_val, s.i_val) < 1e-10);
        assert!(rel(b.k_val, s.k_val) < 1e-6);
    }

    #[test]
    fn uniform_large_order() {
        let (nu, z) = (100.0, 1.0);
        let d = modified_bessel(nu, nu * z, false).unwrap();
        let cases = [
            (BesselKind::I, d.i_val),
            (BesselKind::IPrime, d.i_prime),
            (BesselKind::K, d.k_val),
            (BesselKind::KPrime, d.k_prime),
        ];
        for (kind, direct) in cases {
            let u = uniform_expansion(kind, nu, z, 4).unwrap();
            assert!(rel(u.value, direct) < 1e-8, "{kind:?}");
        }
    }

    #[test]
    fn uniform_large_z_reduces_to_exponential() {
        // Relative gap to e^{−νz}√(π/2νz) behaves like e^{ν/(2z)} − 1.
        let nu = 20.0;
        let mut last = f64::INFINITY;
        for z in [5.0, 10.0, 30.0] {
            let u = uniform_expansion(BesselKind::K, nu, z, 1).unwrap();
            let lead = (PI / (2.0 * nu * z)).sqrt() * (-nu * z).exp();
            let gap = rel(u.value, lead);
            assert!(gap < (nu / z).exp() - 1.0, "z={z}: {gap}");
            assert!(gap < last);
            last = gap;
        }
    }
}
