//! Analytic torsion of the bounded cone: topological term, torsion-like
//! term, residue/anomaly term, the truncated cone, and the scaling study.

pub mod model;
pub mod ode;

use std::f64::consts::LN_2;

use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::olverpoly::{rational_from_f64, z_coeff, ExactDigamma, Rational};
use crate::special::{KahanSum, EULER_GAMMA};
use crate::spectra::{alpha, betti_numbers, coclosed_spectrum, cutoff_for_tolerance, theta_heat_coeffs, CrossSection};
use crate::zeta::{residues_from_heat, shifted_zeta_prime0, Sign, Valued, DEFAULT_K_TOL};

pub use model::{
    gy_det_ratio_oracle, harmonic_det, large_lambda_constant, model_det_log_ratio, model_det_ratio, t_eta_lambda,
    t_large_nu, ModelKind, ModelOperatorSpec, TP,
};

fn parity(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Numerical controls for the spectral terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionOptions {
    /// Target for the per-slice cutoff choice (ignored when `cutoff` is set).
    pub tolerance: f64,
    pub cutoff: Option<f64>,
    /// Target for the resummed K-series remainders.
    pub k_tol: f64,
    /// Subtraction order of the shifted-zeta expansion; `None` means n.
    pub order: Option<usize>,
}

impl Default for TorsionOptions {
    fn default() -> Self {
        Self { tolerance: 1e-15, cutoff: None, k_tol: DEFAULT_K_TOL, order: None }
    }
}

impl TorsionOptions {
    pub fn cutoff_for(&self, cs: &CrossSection, k: usize) -> Result<f64> {
        match self.cutoff {
            Some(c) => Ok(c),
            None => cutoff_for_tolerance(cs, k, self.tolerance),
        }
    }
}

/// (log 2/2)χ − Σ_{k<n/2} (−1)^k b_k (½ log(n−2k+1) + Σ_{l=0}^{n/2−k−1} log(2l+1)).
pub fn top_term(cs: &CrossSection) -> f64 {
    let n = cs.dim();
    let topo = betti_numbers(cs);
    let mut acc = KahanSum::default();
    acc.add(0.5 * LN_2 * topo.euler as f64);
    for k in 0..n / 2 {
        let mut inner = 0.5 * ((n - 2 * k + 1) as f64).ln();
        for l in 0..n / 2 - k {
            inner += ((2 * l + 1) as f64).ln();
        }
        acc.add(-parity(k) * topo.betti[k] as f64 * inner);
    }
    acc.value()
}

/// Σ_{b=0}^{2r} (z_{2r,b}(−α) − z_{2r,b}(α)) ψ(b+r), exactly, as (rational part,
/// γ coefficient). The γ coefficient is Σ_b of the differences.
pub fn z_digamma_sum(r: usize, alpha_k: f64) -> Result<(Rational, Rational)> {
    let a = rational_from_f64(alpha_k).ok_or_else(|| Error::InvalidArgument(format!("α = {alpha_k} not finite")))?;
    let zero = Rational::from_integer(0.into());
    let mut rat = zero.clone();
    let mut gam = zero.clone();
    for b in 0..=2 * r {
        let z = z_coeff(2 * r, b)?;
        let d = z.eval_exact(&zero, &-a.clone()) - z.eval_exact(&zero, &a);
        let psi = ExactDigamma::at((b + r) as u32);
        rat += d.clone() * psi.rational;
        gam += d * Rational::from_integer(psi.gamma_coeff.into());
    }
    Ok((rat, gam))
}

/// S_k = Σ_{r=1}^{n/2} Res_{s=2r} ζ_k · Σ_b (z_{2r,b}(−α_k) − z_{2r,b}(α_k)) ψ(b+r).
pub fn residue_digamma_sum(n: usize, k: usize, residues: &[f64]) -> Result<f64> {
    let a = alpha(n, k);
    let mut acc = KahanSum::default();
    for (i, res) in residues.iter().enumerate() {
        let (rat, gam) = z_digamma_sum(i + 1, a)?;
        let c = rat.to_f64().unwrap_or(f64::NAN) + gam.to_f64().unwrap_or(f64::NAN) * EULER_GAMMA;
        acc.add(res * c);
    }
    Ok(acc.value())
}

/// Σ_{k<n/2} (−1)^k S_k from the heat coefficients; works for tabulated spectra.
fn signed_residue_sum(cs: &CrossSection) -> Result<f64> {
    let n = cs.dim();
    let mut acc = KahanSum::default();
    for k in 0..n / 2 {
        let res = residues_from_heat(&theta_heat_coeffs(cs, k)?)?;
        acc.add(parity(k) * residue_digamma_sum(n, k, &res)?);
    }
    Ok(acc.value())
}

/// (res, anomaly_integral) with anomaly_integral = Σ_{k<n/2} ((−1)^{k+1}/2) S_k
/// and res = −anomaly_integral/2.
pub fn res_term(cs: &CrossSection) -> Result<(f64, f64)> {
    let anomaly = -0.5 * signed_residue_sum(cs)?;
    Ok((-0.5 * anomaly, anomaly))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TorsForm {
    FullRange,
    DualHalfRange,
}

/// Shifted-zeta data of one slice.
#[derive(Clone, Debug, Serialize)]
pub struct SliceTerms {
    pub k: usize,
    pub alpha: f64,
    /// Shift actually used (α_k/μ in the scaling study).
    pub shift: f64,
    pub betti: u64,
    pub cutoff: f64,
    pub level_count: usize,
    /// ζ_k′(0, +shift), ζ_k′(0, −shift).
    pub zeta_prime_plus: Valued,
    pub zeta_prime_minus: Valued,
    /// Res_{s=2r} ζ_k for r = 1..n/2.
    pub residues: Vec<f64>,
}

/// Evaluate slice k with shift α_k/μ (μ = 1 is the cone itself).
pub fn slice_terms(cs: &CrossSection, k: usize, opts: &TorsionOptions, mu: f64) -> Result<SliceTerms> {
    if !(mu >= 1.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("scaling factor μ must be ≥ 1, got {mu}")));
    }
    if !cs.is_torus() {
        return Err(Error::ExperimentalUnsupported(
            "shifted zeta derivatives need the torus heat remainder; round_sphere is limited to top and anomaly terms"
                .into(),
        ));
    }
    let n = cs.dim();
    let cutoff = opts.cutoff_for(cs, k)?;
    let base = coclosed_spectrum(cs, k, cutoff)?;
    let a = base.alpha;
    // α_k is half-integral for even n, so the α = 0 branch is unreachable.
    assert!(a != 0.0, "α_k vanished for even n");
    let slice = if mu == 1.0 { base } else { base.with_shift(a / mu)? };
    let order = opts.order.unwrap_or(n);
    let plus = shifted_zeta_prime0(&slice, Sign::Plus, order, opts.k_tol)?;
    let minus = shifted_zeta_prime0(&slice, Sign::Minus, order, opts.k_tol)?;
    Ok(SliceTerms {
        k,
        alpha: a,
        shift: slice.alpha,
        betti: slice.betti_k,
        cutoff,
        level_count: slice.levels.len(),
        zeta_prime_plus: plus,
        zeta_prime_minus: minus,
        residues: residues_from_heat(&slice.heat)?,
    })
}

pub fn all_slices(cs: &CrossSection, opts: &TorsionOptions, mu: f64) -> Result<Vec<SliceTerms>> {
    (0..cs.dim()).into_par_iter().map(|k| slice_terms(cs, k, opts, mu)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorsValue {
    /// ½ Σ_{k=0}^{n−1} (−1)^k ζ_k′(0, α_k)
    pub full_range: f64,
    /// ½ Σ_{k<n/2} (−1)^k (ζ_k′(0, α_k) − ζ_k′(0, −α_k))
    pub dual_half_range: f64,
    pub residual: f64,
    /// Propagated numerical error estimate of the half-range form.
    pub err: f64,
}

impl TorsValue {
    pub fn get(&self, form: TorsForm) -> f64 {
        match form {
            TorsForm::FullRange => self.full_range,
            TorsForm::DualHalfRange => self.dual_half_range,
        }
    }
}

pub fn tors_from_slices(n: usize, slices: &[SliceTerms]) -> Result<TorsValue> {
    let mut full = KahanSum::default();
    let mut half = KahanSum::default();
    let mut err = 0.0;
    for k in 0..n {
        let s = slices
            .iter()
            .find(|s| s.k == k)
            .ok_or_else(|| Error::InvalidArgument(format!("slice k={k} missing from the Tors assembly")))?;
        full.add(0.5 * parity(k) * s.zeta_prime_plus.value);
        if k < n / 2 {
            half.add(0.5 * parity(k) * (s.zeta_prime_plus.value - s.zeta_prime_minus.value));
            err += 0.5 * (s.zeta_prime_plus.err + s.zeta_prime_minus.err);
        }
    }
    let (f, h) = (full.value(), half.value());
    Ok(TorsValue { full_range: f, dual_half_range: h, residual: f - h, err })
}

pub fn tors_term(cs: &CrossSection, opts: &TorsionOptions) -> Result<TorsValue> {
    tors_from_slices(cs.dim(), &all_slices(cs, opts, 1.0)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceContribution {
    pub k: usize,
    pub alpha: f64,
    pub betti: u64,
    pub cutoff: f64,
    pub level_count: usize,
    pub zeta_prime_plus: Valued,
    pub zeta_prime_minus: Valued,
    pub residues: Vec<f64>,
    /// (−1)^k/2 · (ζ′(0,α) − ζ′(0,−α)) for k < n/2, else 0.
    pub tors_part: f64,
    /// ((−1)^{k+1}/2) S_k for k < n/2, else 0.
    pub anomaly_part: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub library_version: String,
    pub cutoffs: Vec<f64>,
    pub tolerance: f64,
    pub k_tolerance: f64,
    pub subtraction_order: usize,
    /// Filled by the caller when timing is requested; absent otherwise so
    /// that reports are reproducible byte for byte.
    pub wall_time_s: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionReport {
    pub top: f64,
    pub tors: f64,
    pub tors_full_range: f64,
    pub tors_residual: f64,
    pub tors_err: f64,
    pub res: f64,
    pub anomaly_integral: f64,
    #[serde(rename = "log_T")]
    pub log_t: f64,
    pub per_slice: Vec<SliceContribution>,
    pub provenance: Provenance,
}

pub fn report_from_slices(cs: &CrossSection, opts: &TorsionOptions, slices: &[SliceTerms]) -> Result<TorsionReport> {
    let n = cs.dim();
    let top = top_term(cs);
    let tv = tors_from_slices(n, slices)?;
    let mut anomaly = KahanSum::default();
    let mut per_slice = Vec::with_capacity(n);
    for s in slices {
        let (tp, ap) = if s.k < n / 2 {
            let sk = residue_digamma_sum(n, s.k, &s.residues)?;
            (0.5 * parity(s.k) * (s.zeta_prime_plus.value - s.zeta_prime_minus.value), -0.5 * parity(s.k) * sk)
        } else {
            (0.0, 0.0)
        };
        anomaly.add(ap);
        per_slice.push(SliceContribution {
            k: s.k,
            alpha: s.alpha,
            betti: s.betti,
            cutoff: s.cutoff,
            level_count: s.level_count,
            zeta_prime_plus: s.zeta_prime_plus,
            zeta_prime_minus: s.zeta_prime_minus,
            residues: s.residues.clone(),
            tors_part: tp,
            anomaly_part: ap,
        });
    }
    let anomaly = anomaly.value();
    let res = -0.5 * anomaly;
    Ok(TorsionReport {
        top,
        tors: tv.dual_half_range,
        tors_full_range: tv.full_range,
        tors_residual: tv.residual,
        tors_err: tv.err,
        res,
        anomaly_integral: anomaly,
        log_t: top + tv.dual_half_range + res,
        per_slice,
        provenance: Provenance {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            cutoffs: slices.iter().map(|s| s.cutoff).collect(),
            tolerance: opts.tolerance,
            k_tolerance: opts.k_tol,
            subtraction_order: opts.order.unwrap_or(n),
            wall_time_s: None,
        },
    })
}

/// log T(C(N)) = Top + Tors + Res.
pub fn log_torsion_cone(cs: &CrossSection, opts: &TorsionOptions) -> Result<TorsionReport> {
    let slices = all_slices(cs, opts, 1.0)?;
    report_from_slices(cs, opts, &slices)
}

/// Σ_{k=0}^n ((−1)^k/2) b_k log((1 − ε^{n−2k+1})/(n−2k+1)).
pub fn betti_log_sum(cs: &CrossSection, eps: f64) -> Result<f64> {
    model::check_epsilon(eps)?;
    let n = cs.dim() as i64;
    let topo = betti_numbers(cs);
    let mut acc = KahanSum::default();
    for (k, &b) in topo.betti.iter().enumerate() {
        let e = n - 2 * k as i64 + 1;
        let q = (1.0 - eps.powi(e as i32)) / e as f64;
        acc.add(0.5 * parity(k) * b as f64 * q.ln());
    }
    Ok(acc.value())
}

/// log T(C_ε(N)) = Σ_k ((−1)^k/2) b_k log((1−ε^{n−2k+1})/(n−2k+1))
///   + (log 2/2)χ + Σ_{k<n/2} ((−1)^k/2) S_k.
pub fn log_torsion_truncated(cs: &CrossSection, eps: f64) -> Result<f64> {
    let betti = betti_log_sum(cs, eps)?;
    let chi = betti_numbers(cs).euler as f64;
    Ok(betti + 0.5 * LN_2 * chi + 0.5 * signed_residue_sum(cs)?)
}

/// The five groups of log T(C_ε) − log T(C).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DifferenceTerms {
    pub betti_log: f64,
    pub odd_product_logs: f64,
    pub degree_logs: f64,
    /// Σ_{k<n/2} ((−1)^k/4) S_k; contains no ε.
    pub residue_sum: f64,
    /// Σ_{k<n/2} ((−1)^k/2)(ζ_k′(0,−α_k) − ζ_k′(0,α_k)).
    pub zeta_difference: f64,
    pub total: f64,
}

pub fn difference_from_slices(cs: &CrossSection, eps: f64, slices: &[SliceTerms]) -> Result<DifferenceTerms> {
    let n = cs.dim();
    let topo = betti_numbers(cs);
    let betti_log = betti_log_sum(cs, eps)?;
    let mut prod = KahanSum::default();
    let mut deg = KahanSum::default();
    let mut res = KahanSum::default();
    let mut zd = KahanSum::default();
    for k in 0..n / 2 {
        let b = topo.betti[k] as f64;
        for l in 0..n / 2 - k {
            prod.add(parity(k) * b * ((2 * l + 1) as f64).ln());
        }
        deg.add(0.5 * parity(k) * b * ((n - 2 * k + 1) as f64).ln());
        let s = slices
            .iter()
            .find(|s| s.k == k)
            .ok_or_else(|| Error::InvalidArgument(format!("slice k={k} missing from the difference formula")))?;
        res.add(0.25 * parity(k) * residue_digamma_sum(n, k, &s.residues)?);
        zd.add(0.5 * parity(k) * (s.zeta_prime_minus.value - s.zeta_prime_plus.value));
    }
    let mut total = KahanSum::default();
    let parts = [betti_log, prod.value(), deg.value(), res.value(), zd.value()];
    for p in parts {
        total.add(p);
    }
    Ok(DifferenceTerms {
        betti_log: parts[0],
        odd_product_logs: parts[1],
        degree_logs: parts[2],
        residue_sum: parts[3],
        zeta_difference: parts[4],
        total: total.value(),
    })
}

/// log T(C_ε(N)) − log T(C(N)) from the five-group difference formula.
pub fn torsion_difference(cs: &CrossSection, eps: f64, opts: &TorsionOptions) -> Result<DifferenceTerms> {
    model::check_epsilon(eps)?;
    let slices: Vec<SliceTerms> =
        (0..cs.dim() / 2).into_par_iter().map(|k| slice_terms(cs, k, opts, 1.0)).collect::<Result<_>>()?;
    difference_from_slices(cs, eps, &slices)
}

/// log of the Ray–Singer norm quotient for the product metric: Top + Tors.
pub fn rs_norm_product_metric(cs: &CrossSection, opts: &TorsionOptions) -> Result<f64> {
    Ok(top_term(cs) + tors_term(cs, opts)?.dual_half_range)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub mu: f64,
    pub tors: f64,
    /// |Tors|·μ/log μ; absent at μ = 1.
    pub bound_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingProfile {
    pub rows: Vec<ScalingRow>,
    /// max over the grid of |Tors|·μ/log μ.
    pub bound_constant: f64,
}

/// Tors(N, μ^{−2}g^N) over a grid of μ ≥ 1.
///
/// Rescaling multiplies every η by μ², so ζ_k(s, ±α, μ) = μ^{−s} ζ_k(s, ±α/μ)
/// on the unit spectrum with shift α/μ. The log μ terms cancel in the
/// half-range difference because ζ_k(0, α/μ) = ζ_k(0, −α/μ).
pub fn tors_scaling_profile(cs: &CrossSection, mus: &[f64], opts: &TorsionOptions) -> Result<ScalingProfile> {
    let n = cs.dim();
    let mut rows = Vec::with_capacity(mus.len());
    for &mu in mus {
        // The half-range form only needs k < n/2.
        let slices: Vec<SliceTerms> =
            (0..n / 2).into_par_iter().map(|k| slice_terms(cs, k, opts, mu)).collect::<Result<_>>()?;
        let mut acc = KahanSum::default();
        for s in &slices {
            acc.add(0.5 * parity(s.k) * (s.zeta_prime_plus.value - s.zeta_prime_minus.value));
        }
        let tors = acc.value();
        let bound_ratio = if mu > 1.0 { Some(tors.abs() * mu / mu.ln()) } else { None };
        rows.push(ScalingRow { mu, tors, bound_ratio });
    }
    let bound_constant = rows.iter().filter_map(|r| r.bound_ratio).fold(0.0, f64::max);
    Ok(ScalingProfile { rows, bound_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> CrossSection {
        CrossSection::square_torus(n, 1.0, 1).unwrap()
    }

    #[test]
    fn top_unit_square() {
        assert!((top_term(&unit(2)) + 0.5 * 3f64.ln()).abs() < 1e-15);
        let r2 = CrossSection::square_torus(2, 1.0, 2).unwrap();
        assert!((top_term(&r2) + 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn digamma_weights_square_torus() {
        // Σ_b (z_{2,b}(−½) − z_{2,b}(½)) ψ(b+1): γ drops out and the rational
        // part is ½, so S_0 = Res_{s=2}·½ = 1/(4π).
        let (rat, gam) = z_digamma_sum(1, 0.5).unwrap();
        assert_eq!(gam, Rational::from_integer(0.into()));
        assert_eq!(rat, Rational::new(1.into(), 2.into()));
    }

    #[test]
    fn anomaly_unit_square() {
        let (res, an) = res_term(&unit(2)).unwrap();
        assert!((an + 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!((res - 1.0 / (16.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn truncated_rejects_large_epsilon() {
        assert!(log_torsion_truncated(&unit(2), 1.0).is_err());
        assert!(log_torsion_truncated(&unit(2), 0.0).is_err());
    }

    #[test]
    fn scaling_at_unit_factor_is_tors() {
        let cs = unit(2);
        let opts = TorsionOptions::default();
        let t = tors_term(&cs, &opts).unwrap();
        let p = tors_scaling_profile(&cs, &[1.0], &opts).unwrap();
        assert_eq!(p.rows[0].tors, t.dual_half_range);
        assert!(p.rows[0].bound_ratio.is_none());
    }
}
