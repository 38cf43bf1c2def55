//! Continuation of ζ_k(s) = Σ m(η) ν(η)^{-s} and of the shifted functions
//! ζ_k(s, ±α) = Σ m(η) (ν(η) ± α)^{-s}.
//!
//! With σ = s/2, Γ(σ) ζ_k(2σ) = ∫₀^∞ t^{σ−1} Θ(t) dt is split at t = 1:
//!
//! * t ≥ 1: Σ m ν^{−2σ} Γ(σ, ν²), level by level;
//! * t ≤ 1, torus closed form (W t^{−n/2} − a) e^{−α²t}: termwise exact, which
//!   carries every pole;
//! * t ≤ 1, Poisson remainder: Gauss–Kronrod, exponentially small integrand.

pub mod oracle;

use num::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::olverpoly::ExactDigamma;
use crate::quad::gauss_kronrod;
use crate::special::{digamma_int, factorial, gamma, rgamma, upper_gamma, KahanSum, EULER_GAMMA};
use crate::spectra::{HeatExpansion, SpectralSlice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    /// ν + α
    Plus,
    /// ν − α
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// F(σ) = pole/(σ − σ₀) + finite + O(σ − σ₀).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Laurent {
    pub pole: f64,
    pub finite: f64,
    pub err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Valued {
    pub value: f64,
    pub err: f64,
}

const POLE_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-15;

/// Σ_{j≥0} c^j/j! · 1/(σ − p + j), skipping the j with σ − p + j = 0, whose
/// coefficient is returned separately.
pub(crate) fn shifted_exp_series(c: f64, sigma: f64, p: f64) -> (f64, f64) {
    let mut sum = KahanSum::default();
    let mut pole = 0.0;
    let mut pow = 1.0;
    for j in 0..400 {
        if j > 0 {
            pow *= c / j as f64;
        }
        let d = sigma - p + j as f64;
        if d.abs() < POLE_TOL {
            pole += pow;
        } else {
            sum.add(pow / d);
        }
        if j as f64 > 2.0 * c.abs() + 5.0 && pow.abs() < 1e-20 * (1.0 + sum.value().abs()) {
            break;
        }
    }
    (sum.value(), pole)
}

/// Laurent data of F(σ) = Γ(σ) ζ_k(2σ) at σ₀.
pub fn mellin_laurent(slice: &SpectralSlice, sigma: f64) -> Result<Laurent> {
    let smooth = slice
        .heat
        .smooth
        .ok_or_else(|| Error::ExperimentalUnsupported("Mellin continuation of a tabulated spectrum".into()))?;
    let h = (slice.n / 2) as f64;
    let c = -slice.alpha * slice.alpha;

    let (w_sum, w_pole) = shifted_exp_series(c, sigma, h);
    let (z_sum, z_pole) = shifted_exp_series(c, sigma, 0.0);
    let small_exact = smooth.weyl * w_sum - smooth.zero * z_sum;
    let pole = smooth.weyl * w_pole - smooth.zero * z_pole;

    let poisson = slice.poisson.as_ref().expect("torus slice has Poisson data");
    let a2 = slice.alpha * slice.alpha;
    let rem = gauss_kronrod(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let v = poisson.lattice_value(t);
            if v == 0.0 {
                return 0.0;
            }
            smooth.weyl * t.powf(sigma - 1.0 - h) * (-a2 * t).exp() * v
        },
        0.0,
        1.0,
        QUAD_TOL,
        1e-13,
    )?;
    let shell_tail = poisson.lattice_tail(1.0);
    let rem_err = rem.err + smooth.weyl * shell_tail * (1.0 + (-sigma + 1.0 + h).max(0.0).exp());

    let big = upper_levels(slice, sigma)?;
    Ok(Laurent {
        pole,
        finite: small_exact + rem.value + big.value,
        err: rem_err + big.err + 1e-16 * small_exact.abs(),
    })
}

/// Σ m ν^{−2σ} Γ(σ, ν²) over the stored levels, plus the tail bound.
fn upper_levels(slice: &SpectralSlice, sigma: f64) -> Result<Valued> {
    let a2 = slice.alpha * slice.alpha;
    let terms: Vec<f64> = slice
        .levels
        .par_iter()
        .map(|l| {
            let x = l.eta + a2;
            upper_gamma(sigma, x).map(|g| l.mult as f64 * x.powf(-sigma) * g)
        })
        .collect::<Result<_>>()?;
    let s: KahanSum = terms.into_iter().collect();
    let tail = slice.tail_bound(|eta| {
        let x = eta + a2;
        upper_gamma(sigma, x).map(|g| x.powf(-sigma) * g).unwrap_or(f64::INFINITY)
    })?;
    Ok(Valued { value: s.value(), err: tail })
}

fn is_nonpositive_integer(x: f64) -> Option<u32> {
    if x <= POLE_TOL && (x - x.round()).abs() < POLE_TOL {
        Some((-x.round()) as u32)
    } else {
        None
    }
}

/// ζ_k(s) for real s. At a pole returns `Error::Pole`; see `zeta_finite_part`.
pub fn zeta_mellin(slice: &SpectralSlice, s: f64) -> Result<Valued> {
    let sigma = s / 2.0;
    let f = mellin_laurent(slice, sigma)?;
    if let Some(j) = is_nonpositive_integer(sigma) {
        // 1/Γ(σ) = (−1)^j j! (σ + j) + O((σ + j)²)
        let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
        let scale = sgn * factorial(j as usize);
        return Ok(Valued { value: scale * f.pole, err: (scale * f.err).abs() });
    }
    if f.pole != 0.0 {
        return Err(Error::Pole { s });
    }
    let rg = rgamma(sigma);
    Ok(Valued { value: f.finite * rg, err: f.err * rg.abs() })
}

/// Constant term of ζ_k at s; equal to the value when s is not a pole.
pub fn zeta_finite_part(slice: &SpectralSlice, s: f64) -> Result<Valued> {
    match zeta_mellin(slice, s) {
        Err(Error::Pole { .. }) => {}
        other => return other,
    }
    let q = s / 2.0;
    let f = mellin_laurent(slice, q)?;
    let psi = if (q - q.round()).abs() < POLE_TOL && q > 0.0 {
        digamma_int(q.round() as u32)
    } else {
        crate::special::digamma(q)
    };
    let rg = rgamma(q);
    Ok(Valued { value: (f.finite - f.pole * psi) * rg, err: f.err * rg.abs() })
}

/// Res_{s=2r} ζ_k(s) for r = 1..n/2, from the heat coefficients alone:
/// 2·c(t^{−r})/Γ(r).
pub fn zeta_residues(slice: &SpectralSlice) -> Result<Vec<f64>> {
    residues_from_heat(&slice.heat)
}

pub fn residues_from_heat(heat: &HeatExpansion) -> Result<Vec<f64>> {
    if heat.coeffs.len() != heat.n + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} heat coefficients, got {}",
            heat.n + 1,
            heat.coeffs.len()
        )));
    }
    Ok((1..=heat.n / 2).map(|r| 2.0 * heat.coeff_of_power(-(r as i32)) / gamma(r as f64)).collect())
}

/// Res_{s=r} ζ_k(s) for any integer r ≥ 1 (zero at odd r and r > n).
pub fn residue_at(residues: &[f64], r: usize) -> f64 {
    if r % 2 == 1 || r / 2 > residues.len() || r == 0 {
        0.0
    } else {
        residues[r / 2 - 1]
    }
}

/// (ζ_k(0), ζ_k′(0)).
pub fn zeta0_and_prime0(slice: &SpectralSlice) -> Result<(Valued, Valued)> {
    let f = mellin_laurent(slice, 0.0)?;
    // Γ(σ)Z(σ) = A/σ + B ⇒ Z(0) = A, Z′(0) = B + γA; ζ(s) = Z(s/2).
    let z0 = Valued { value: f.pole, err: 1e-16 * f.pole.abs() };
    let zp = Valued { value: 0.5 * (f.finite + EULER_GAMMA * f.pole), err: 0.5 * f.err };
    Ok((z0, zp))
}

/// K(0, ±α) with subtraction order p:
/// Σ m [−log(1 ± α/ν) − Σ_{r=1}^p (∓α)^r/(r ν^r)].
///
/// The terms r = p+1..q are resummed through ζ_k(r); the remainder
/// Σ m g_q(ν), g_q = Σ_{r>q} (∓α/ν)^r/r, is summed over the levels with a
/// counting-model tail bound. q grows until that bound is below `tol`.
pub fn k_series(slice: &SpectralSlice, sign: Sign, order: usize, tol: f64) -> Result<Valued> {
    let beta = sign.factor() * slice.alpha;
    if beta == 0.0 {
        return Ok(Valued { value: 0.0, err: 0.0 });
    }
    let x_of = |eta: f64| beta.abs() / (eta + beta * beta).sqrt();
    let mut q = order + 2;
    let tail = loop {
        let qq = q;
        let tail = slice.tail_bound(|eta| {
            let x = x_of(eta);
            x.powi(qq as i32 + 1) / ((qq + 1) as f64 * (1.0 - x))
        })?;
        if tail <= 0.5 * tol {
            break tail;
        }
        q += 2;
        if q > order + 120 {
            let need = slice.cutoff * 4.0;
            return Err(Error::CutoffInsufficient { tail, tol, required: need });
        }
    };
    let mut acc = KahanSum::default();
    let mut err = tail;
    for r in order + 1..=q {
        let z = zeta_finite_part(slice, r as f64)?;
        let coef = (-beta).powi(r as i32) / r as f64;
        acc.add(coef * z.value);
        err += (coef * z.err).abs();
    }
    let direct: Vec<f64> = slice
        .levels
        .par_iter()
        .map(|l| {
            let y = -beta / (l.eta + beta * beta).sqrt();
            let mut g = 0.0;
            let mut p = y.powi(q as i32);
            for r in q + 1..q + 400 {
                p *= y;
                let term = p / r as f64;
                g += term;
                if term.abs() < 1e-19 * g.abs().max(1e-300) {
                    break;
                }
            }
            l.mult as f64 * g
        })
        .collect();
    let d: KahanSum = direct.into_iter().collect();
    acc.add(d.value());
    Ok(Valued { value: acc.value(), err })
}

/// ζ_k(0, ±α) = ζ_k(0) + Σ_{r=1}^n ((∓α)^r/r) Res_{s=r} ζ_k.
pub fn shifted_zeta0(slice: &SpectralSlice, sign: Sign) -> Result<Valued> {
    let (z0, _) = zeta0_and_prime0(slice)?;
    let res = zeta_residues(slice)?;
    let beta = sign.factor() * slice.alpha;
    let mut acc = KahanSum::default();
    acc.add(z0.value);
    for r in 1..=slice.n {
        acc.add((-beta).powi(r as i32) / r as f64 * residue_at(&res, r));
    }
    Ok(Valued { value: acc.value(), err: z0.err })
}

/// ζ_k′(0, ±α) = ζ_k′(0) + K_p(0, ±α) + Σ_{r=1}^p ((∓α)^r/r)[Res_{s=r} ζ_k · (γ + ψ(r)) + PP ζ_k(r)],
/// where γ + ψ(r) = H_{r−1} is used exactly. Any p ≥ n gives the same value.
pub fn shifted_zeta_prime0(slice: &SpectralSlice, sign: Sign, order: usize, tol: f64) -> Result<Valued> {
    if order < slice.n {
        return Err(Error::InvalidArgument(format!("subtraction order {order} below n = {}", slice.n)));
    }
    let (_, zp) = zeta0_and_prime0(slice)?;
    let res = zeta_residues(slice)?;
    let k = k_series(slice, sign, order, tol)?;
    let beta = sign.factor() * slice.alpha;
    let mut acc = KahanSum::default();
    let mut err = zp.err + k.err;
    acc.add(zp.value);
    acc.add(k.value);
    for r in 1..=order {
        let coef = (-beta).powi(r as i32) / r as f64;
        let pp = zeta_finite_part(slice, r as f64)?;
        // γ + ψ(r): the γ parts cancel exactly.
        let harmonic = ExactDigamma::at(r as u32).rational.to_f64().unwrap_or(f64::NAN);
        acc.add(coef * (residue_at(&res, r) * harmonic + pp.value));
        err += (coef * pp.err).abs();
    }
    Ok(Valued { value: acc.value(), err })
}

/// All continuation artifacts of one slice.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ZetaEval {
    pub k: usize,
    pub alpha: f64,
    pub cutoff: f64,
    /// Res_{s=2r} for r = 1..n/2.
    pub residues: Vec<f64>,
    pub zeta0: Valued,
    pub zeta_prime0: Valued,
    /// PP ζ_k(r) for r = 1..n.
    pub pp_values: Vec<Valued>,
    /// Indexed [+, −].
    pub k_values: [Valued; 2],
    pub shifted0: [Valued; 2],
    pub shifted_prime0: [Valued; 2],
}

pub const DEFAULT_K_TOL: f64 = 1e-13;

pub fn zeta_eval(slice: &SpectralSlice, tol: f64) -> Result<ZetaEval> {
    let residues = zeta_residues(slice)?;
    let (zeta0, zeta_prime0) = zeta0_and_prime0(slice)?;
    let pp_values = (1..=slice.n).map(|r| zeta_finite_part(slice, r as f64)).collect::<Result<Vec<_>>>()?;
    let n = slice.n;
    let pair = |f: &dyn Fn(Sign) -> Result<Valued>| -> Result<[Valued; 2]> { Ok([f(Sign::Plus)?, f(Sign::Minus)?]) };
    Ok(ZetaEval {
        k: slice.k,
        alpha: slice.alpha,
        cutoff: slice.cutoff,
        residues,
        zeta0,
        zeta_prime0,
        pp_values,
        k_values: pair(&|s| k_series(slice, s, n, tol))?,
        shifted0: pair(&|s| shifted_zeta0(slice, s))?,
        shifted_prime0: pair(&|s| shifted_zeta_prime0(slice, s, n, tol))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{coclosed_spectrum, CrossSection};
    use std::f64::consts::PI;

    fn unit_slice(n: usize, k: usize) -> SpectralSlice {
        let cs = CrossSection::square_torus(n, 1.0, 1).unwrap();
        coclosed_spectrum(&cs, k, 80.0).unwrap()
    }

    #[test]
    fn residues_unit_square() {
        let s = unit_slice(2, 0);
        let r = zeta_residues(&s).unwrap();
        assert!((r[0] - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let big = CrossSection::square_torus(2, 2.0 * PI, 1).unwrap();
        let sb = coclosed_spectrum(&big, 0, 80.0).unwrap();
        assert!((zeta_residues(&sb).unwrap()[0] - 2.0 * PI).abs() < 1e-12);
        assert_eq!(residue_at(&r, 1), 0.0);
        assert_eq!(residue_at(&r, 3), 0.0);
    }

    #[test]
    fn zeta_at_zero_unit_square() {
        let (z0, _) = zeta0_and_prime0(&unit_slice(2, 0)).unwrap();
        assert!((z0.value - (-1.0 / (16.0 * PI) - 1.0)).abs() < 1e-14);
        // one coclosed mode per frequency in degree 1 as well
        let (z1, _) = zeta0_and_prime0(&unit_slice(2, 1)).unwrap();
        assert!((z1.value - (-1.0 / (16.0 * PI) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn shifted_zero_value_cancels() {
        let s = unit_slice(2, 0);
        for sign in [Sign::Plus, Sign::Minus] {
            let v = shifted_zeta0(&s, sign).unwrap();
            assert!((v.value + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_s_matches_direct_sum() {
        let cs = CrossSection::square_torus(2, 1.0, 1).unwrap();
        let s = coclosed_spectrum(&cs, 0, 4.0e6).unwrap();
        let direct: f64 = s.nus().map(|(nu, m)| m * nu.powf(-7.0)).sum();
        let small = coclosed_spectrum(&cs, 0, 80.0).unwrap();
        let m = zeta_mellin(&small, 7.0).unwrap();
        assert!((m.value - direct).abs() < 1e-10 * direct, "{} vs {direct}", m.value);
    }

    #[test]
    fn pole_is_reported() {
        let s = unit_slice(2, 0);
        assert!(matches!(zeta_mellin(&s, 2.0), Err(Error::Pole { .. })));
        assert!(zeta_finite_part(&s, 2.0).unwrap().value.is_finite());
    }

    #[test]
    fn residue_from_both_sides() {
        let s = unit_slice(2, 0);
        let res = zeta_residues(&s).unwrap()[0];
        let h = 1e-4;
        let up = zeta_mellin(&s, 2.0 + h).unwrap().value * h;
        let dn = zeta_mellin(&s, 2.0 - h).unwrap().value * -h;
        // h·ζ(2 ± h) = ±Res·… + h·PP; the symmetric mean cancels the PP term.
        assert!((0.5 * (up + dn) - res).abs() < 1e-6, "{up} {dn} {res}");
        let pp = zeta_finite_part(&s, 2.0).unwrap().value;
        let sym = 0.5 * (zeta_mellin(&s, 2.0 + h).unwrap().value + zeta_mellin(&s, 2.0 - h).unwrap().value);
        assert!((pp - sym).abs() < 1e-6, "{pp} vs {sym}");
    }

    #[test]
    fn k_series_zero_shift() {
        let s = unit_slice(2, 0).with_shift(0.0).unwrap();
        assert_eq!(k_series(&s, Sign::Plus, 2, 1e-13).unwrap().value, 0.0);
    }

    #[test]
    fn shift_zero_reduces_to_plain_derivative() {
        let s = unit_slice(2, 0).with_shift(0.0).unwrap();
        let (_, zp) = zeta0_and_prime0(&s).unwrap();
        let v = shifted_zeta_prime0(&s, Sign::Plus, 2, 1e-13).unwrap();
        assert!((v.value - zp.value).abs() < 1e-14);
    }
}
