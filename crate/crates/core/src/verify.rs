//! The identity suite behind `conetorsion verify`.

use std::f64::consts::PI;

use num::{One, Zero};
use serde::Serialize;

use crate::bessel::modified_bessel;
use crate::error::Result;
use crate::olverpoly::{d_poly, m_poly, rational_to_string, z_coeff, CoeffPolynomial, Rational};
use crate::spectra::{coclosed_spectrum, CrossSection};
use crate::torsion::{
    gy_det_ratio_oracle, harmonic_det, large_lambda_constant, model_det_ratio, res_term, t_eta_lambda, tors_term,
    ModelKind, ModelOperatorSpec, TorsionOptions,
};
use crate::zeta::{oracle::first_order_shifted, shifted_zeta_prime0, Sign};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed error (0 for exact checks that hold).
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn measured(name: &str, worst: f64, tolerance: f64, detail: String) -> Self {
        Check { name: name.into(), passed: worst <= tolerance, worst, tolerance, detail }
    }

    fn skipped(name: &str, why: &str) -> Self {
        Check { name: name.into(), passed: true, worst: 0.0, tolerance: 0.0, detail: format!("skipped: {why}") }
    }

    fn failed(name: &str, why: String) -> Self {
        Check { name: name.into(), passed: false, worst: f64::INFINITY, tolerance: 0.0, detail: why }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn pow_q(x: &Rational, r: usize) -> Rational {
    let mut p = Rational::one();
    for _ in 0..r {
        p *= x;
    }
    p
}

const TEST_ALPHAS: [(i64, i64); 5] = [(1, 2), (-1, 2), (3, 2), (-5, 2), (2, 7)];

/// M_r(1, α) = D_r(1) − (−α)^r/r, exactly, r = 1..6.
pub fn dm_identity() -> Check {
    let one = Rational::one();
    let mut bad = Vec::new();
    for r in 1..=6 {
        let (m, d) = match (m_poly(r), d_poly(r)) {
            (Ok(m), Ok(d)) => (m, d),
            (Err(e), _) | (_, Err(e)) => return Check::failed("DM identity", e.to_string()),
        };
        for &(an, ad) in &TEST_ALPHAS {
            let a = q(an, ad);
            let lhs = m.eval_exact(&one, &a);
            let rhs = d.eval_exact(&one, &a) - pow_q(&-a.clone(), r) / Rational::from_integer((r as i64).into());
            if lhs != rhs {
                bad.push(format!("r={r} α={}", rational_to_string(&a)));
            }
        }
    }
    exact("DM identity", bad)
}

/// Σ_b (z_{r,b}(−α) − z_{r,b}(α)) = ((−α)^r − α^r)/r, exactly, r = 1..6.
pub fn zrb_identity() -> Check {
    let zero = Rational::zero();
    let mut bad = Vec::new();
    for r in 1..=6 {
        for &(an, ad) in &TEST_ALPHAS {
            let a = q(an, ad);
            let mut s = Rational::zero();
            for b in 0..=r {
                let z = match z_coeff(r, b) {
                    Ok(z) => z,
                    Err(e) => return Check::failed("z_{r,b} sum identity", e.to_string()),
                };
                s += z.eval_exact(&zero, &-a.clone()) - z.eval_exact(&zero, &a);
            }
            let rhs = (pow_q(&-a.clone(), r) - pow_q(&a, r)) / Rational::from_integer((r as i64).into());
            if s != rhs {
                bad.push(format!("r={r} α={}", rational_to_string(&a)));
            }
        }
    }
    exact("z_{r,b} sum identity", bad)
}

/// M_2 against its known closed-form coefficients.
pub fn m2_table() -> Check {
    let expect = [
        ((2, 0), q(-3, 16)),
        ((2, 1), q(1, 2)),
        ((2, 2), q(-1, 2)),
        ((4, 0), q(5, 8)),
        ((4, 1), q(-1, 2)),
        ((6, 0), q(-7, 16)),
    ];
    let mut want = CoeffPolynomial::zero();
    for ((t, a), c) in expect {
        want = want.add(&CoeffPolynomial::monomial(c, t, a));
    }
    match m_poly(2) {
        Ok(m) if *m == want => exact("M_2 coefficients", vec![]),
        Ok(m) => exact("M_2 coefficients", vec![format!("got {m}")]),
        Err(e) => Check::failed("M_2 coefficients", e.to_string()),
    }
}

fn exact(name: &str, bad: Vec<String>) -> Check {
    Check {
        name: name.into(),
        passed: bad.is_empty(),
        worst: if bad.is_empty() { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail: if bad.is_empty() { "exact".into() } else { format!("mismatch at {}", bad.join(", ")) },
    }
}

/// splitmix64 mapped to [0, 1).
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// K I′ − K′ I = 1/x at 100 pseudo-random (ν, x).
pub fn wronskian(seed: u64) -> Check {
    let mut s = SplitMix(seed);
    let mut worst = 0.0f64;
    let mut at = (0.0, 0.0);
    for _ in 0..100 {
        let nu = 50.0 * s.next_f64();
        let x = 0.1 + 49.9 * s.next_f64();
        match modified_bessel(nu, x, true) {
            Ok(b) => {
                let w = b.k_val * b.i_prime - b.k_prime * b.i_val;
                let e = (w * x - 1.0).abs();
                if e > worst {
                    worst = e;
                    at = (nu, x);
                }
            }
            Err(e) => return Check::failed("Wronskian", format!("ν={nu} x={x}: {e}")),
        }
    }
    Check::measured("Wronskian", worst, 1e-12, format!("100 points, worst at ν={:.6}, x={:.6}", at.0, at.1))
}

pub const GRID_NU: [f64; 5] = [0.75, 1.0, 2.5, 5.0, 10.0];
pub const GRID_Z: [f64; 5] = [0.01, 0.3, 1.0, 2.0, 4.0];
pub const GRID_EPS: [f64; 3] = [0.1, 0.25, 0.5];

/// Closed-form ψ/φ ratios against the ODE oracle on the 5×5×3 grid (α = ½).
pub fn det_ratio_grid() -> Check {
    let mut worst = 0.0f64;
    let mut at = String::new();
    let mut count = 0;
    for kind in [ModelKind::PsiTruncated, ModelKind::PhiTruncated] {
        for &nu in &GRID_NU {
            for &z in &GRID_Z {
                for &eps in &GRID_EPS {
                    let s = ModelOperatorSpec { kind, nu, alpha: 0.5, epsilon: Some(eps) };
                    let (a, b) = match (model_det_ratio(&s, z), gy_det_ratio_oracle(&s, z)) {
                        (Ok(a), Ok(b)) => (a, b),
                        (Err(e), _) | (_, Err(e)) => {
                            return Check::failed(
                                "det ratio vs ODE oracle",
                                format!("{kind:?} ν={nu} z={z} ε={eps}: {e}"),
                            )
                        }
                    };
                    count += 1;
                    let e = (a / b - 1.0).abs();
                    if e > worst {
                        worst = e;
                        at = format!("{kind:?} ν={nu} z={z} ε={eps}");
                    }
                }
            }
        }
    }
    Check::measured("det ratio vs ODE oracle", worst, 1e-6, format!("{count} points, worst at {at}"))
}

/// Harmonic determinant against the Dirichlet ODE oracle.
pub fn harmonic_vs_oracle() -> Check {
    let mut worst = 0.0f64;
    for &alpha in &[0.5f64, -0.5, 1.5, 2.5] {
        for &eps in &GRID_EPS {
            let s = ModelOperatorSpec { kind: ModelKind::HarmonicH0, nu: alpha.abs(), alpha, epsilon: Some(eps) };
            match (harmonic_det(alpha, eps), gy_det_ratio_oracle(&s, 0.0)) {
                (Ok(a), Ok(b)) => worst = worst.max((a / b - 1.0).abs()),
                (Err(e), _) | (_, Err(e)) => return Check::failed("harmonic det vs ODE oracle", e.to_string()),
            }
        }
    }
    Check::measured("harmonic det vs ODE oracle", worst, 1e-6, "α ∈ {±½, 3/2, 5/2}, 3 values of ε".into())
}

/// Every ratio → 1 at z = 1e−6.
pub fn ratios_near_zero() -> Check {
    let mut worst = 0.0f64;
    for kind in [ModelKind::PsiFull, ModelKind::PhiFull, ModelKind::PsiTruncated, ModelKind::PhiTruncated] {
        for &nu in &GRID_NU {
            let s = ModelOperatorSpec { kind, nu, alpha: 0.5, epsilon: Some(0.25) };
            match model_det_ratio(&s, 1e-6) {
                Ok(v) => worst = worst.max((v - 1.0).abs()),
                Err(e) => return Check::failed("ratios at z = 1e-6", e.to_string()),
            }
        }
    }
    Check::measured("ratios at z = 1e-6", worst, 1e-8, "four kinds, five orders".into())
}

pub const REGULARIZATION_TRIPLES: [(f64, f64, f64); 3] = [(2.5, 0.5, 0.25), (3.5, 1.5, 0.25), (7.0, -0.5, 0.1)];

/// p → 0 at λ = −1e−8 and p → b at λ = −1e6.
pub fn regularization(n: usize) -> Check {
    let mut worst = 0.0f64;
    for &(nu, a, eps) in &REGULARIZATION_TRIPLES {
        let small = t_eta_lambda(nu, a, eps, -1e-8, n);
        let big = t_eta_lambda(nu, a, eps, -1e6, n);
        match (small, big) {
            (Ok(s), Ok(b)) => {
                // scale the two criteria onto one ratio
                worst = worst.max(s.p.abs() / 1e-6).max((b.p - large_lambda_constant(nu, a, n)).abs() / 1e-4);
            }
            (Err(e), _) | (_, Err(e)) => return Check::failed("p limits", e.to_string()),
        }
    }
    Check::measured("p limits", worst, 1.0, "|p(−1e−8)|/1e−6 and |p(−1e6) − b|/1e−4, worst of both".into())
}

/// Shifted ζ′(0, ±α) against the first-order Mellin oracle (n = 2 tori only;
/// the oracle's direct-lattice shells are too many in higher dimension).
pub fn zeta_exp(cs: &CrossSection, opts: &TorsionOptions) -> Check {
    let name = "shifted zeta vs first-order oracle";
    if !cs.is_torus() {
        return Check::skipped(name, "torus only");
    }
    if cs.dim() != 2 {
        return Check::skipped(name, "oracle limited to n = 2");
    }
    let mut worst = 0.0f64;
    for k in 0..cs.dim() {
        let run = || -> Result<f64> {
            let slice = coclosed_spectrum(cs, k, opts.cutoff_for(cs, k)?)?;
            let mut w = 0.0f64;
            for sign in [Sign::Plus, Sign::Minus] {
                let a = shifted_zeta_prime0(&slice, sign, opts.order.unwrap_or(cs.dim()), opts.k_tol)?;
                let (_, b) = first_order_shifted(cs, k, sign)?;
                w = w.max((a.value - b.value).abs());
            }
            Ok(w)
        };
        match run() {
            Ok(w) => worst = worst.max(w),
            Err(e) => return Check::failed(name, format!("k={k}: {e}")),
        }
    }
    Check::measured(name, worst, 1e-7, "all slices, both signs".into())
}

pub fn tors_duality(cs: &CrossSection, opts: &TorsionOptions) -> Check {
    let name = "Tors duality";
    if !cs.is_torus() {
        return Check::skipped(name, "torus only");
    }
    match tors_term(cs, opts) {
        Ok(t) => Check::measured(
            name,
            t.residual.abs(),
            1e-8,
            format!("half-range {:.15e}, full-range {:.15e}", t.dual_half_range, t.full_range),
        ),
        Err(e) => Check::failed(name, e.to_string()),
    }
}

/// For flat 2-tori: rank·∫B₁ = −rank·Vol/(8π).
pub fn anomaly_closed_form(cs: &CrossSection) -> Check {
    let name = "anomaly closed form";
    if !(cs.is_torus() && cs.dim() == 2) {
        return Check::skipped(name, "closed form known for flat 2-tori");
    }
    let expect = -(cs.bundle_rank() as f64) * cs.volume() / (8.0 * PI);
    match res_term(cs) {
        Ok((_, a)) => Check::measured(name, (a / expect - 1.0).abs(), 1e-10, format!("{a:.17e} vs {expect:.17e}")),
        Err(e) => Check::failed(name, e.to_string()),
    }
}

pub const WRONSKIAN_SEED: u64 = 20_240_611;

pub fn bessel_suite() -> Vec<Check> {
    vec![wronskian(WRONSKIAN_SEED)]
}

pub fn full_suite(cs: &CrossSection, opts: &TorsionOptions) -> Vec<Check> {
    vec![
        dm_identity(),
        zrb_identity(),
        m2_table(),
        wronskian(WRONSKIAN_SEED),
        det_ratio_grid(),
        harmonic_vs_oracle(),
        ratios_near_zero(),
        regularization(cs.dim()),
        zeta_exp(cs, opts),
        tors_duality(cs, opts),
        anomaly_closed_form(cs),
    ]
}
