//! One-dimensional model operators −∂² + (ν² − ¼)/x² on (0,1] and [ε,1]:
//! determinant ratios in Bessel closed form, the Gel'fand–Yaglom oracle, and
//! the t/p functions entering the truncated-cone zeta function.
//!
//! All Bessel brackets are evaluated in log form from scaled values and
//! log-derivatives, so nothing overflows for large νz.

use serde::{Deserialize, Serialize};

use super::ode::integrate_linear;
use crate::bessel::{log_derivatives, modified_bessel};
use crate::error::{Error, Result};
use crate::olverpoly::m_poly;
use crate::special::{ln_gamma, KahanSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PsiFull,
    PhiFull,
    PsiTruncated,
    PhiTruncated,
    #[serde(rename = "harmonic_H0")]
    HarmonicH0,
}

impl ModelKind {
    pub fn is_truncated(self) -> bool {
        matches!(self, Self::PsiTruncated | Self::PhiTruncated | Self::HarmonicH0)
    }

    /// The φ operators are the ψ operators with α → −α.
    fn signed_alpha(self, alpha: f64) -> f64 {
        match self {
            Self::PhiFull | Self::PhiTruncated => -alpha,
            _ => alpha,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOperatorSpec {
    pub kind: ModelKind,
    /// Bessel order; ignored for `HarmonicH0`, which has ν = |α|.
    pub nu: f64,
    pub alpha: f64,
    pub epsilon: Option<f64>,
}

impl ModelOperatorSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.nu.is_finite() {
            return Err(Error::InvalidArgument("ν and α must be finite".into()));
        }
        if self.kind.is_truncated() {
            let e = self.epsilon.ok_or_else(|| Error::InvalidArgument(format!("{:?} needs ε", self.kind)))?;
            check_epsilon(e)?;
        }
        if self.kind == ModelKind::HarmonicH0 {
            if self.alpha == 0.0 {
                return Err(Error::InvalidArgument(
                    "α = 0 needs logarithmic boundary conditions, not supported".into(),
                ));
            }
        } else if !(self.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("ν must be positive, got {}", self.nu)));
        }
        if matches!(self.kind, ModelKind::PsiTruncated | ModelKind::PhiTruncated) && self.nu <= self.alpha.abs() {
            return Err(Error::Domain(format!(
                "ν = {} ≤ |α| = {}: the (ν² − α²) prefactor has a pole",
                self.nu,
                self.alpha.abs()
            )));
        }
        Ok(())
    }

    /// Robin coefficient θ of the relative condition f′ + θ f/x = 0 at both ends.
    pub fn robin(&self) -> f64 {
        self.kind.signed_alpha(self.alpha) - 0.5
    }
}

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0,1), got {eps}")));
    }
    Ok(())
}

/// det_ζ of the harmonic operator on [ε,1] with Dirichlet ends:
/// (√ε/|α|)(ε^{−|α|} − ε^{|α|}).
pub fn harmonic_det(alpha: f64, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument("α = 0 needs logarithmic boundary conditions, not supported".into()));
    }
    let a = alpha.abs();
    Ok(eps.sqrt() / a * (eps.powf(-a) - eps.powf(a)))
}

/// log I_ν(x), log K_ν(x) and the log-derivative brackets x I′/I, x K′/K.
struct Bracket {
    ln_i: f64,
    ln_k: f64,
    /// x I′/I
    xi: f64,
    /// x K′/K
    xk: f64,
}

fn bracket(nu: f64, x: f64) -> Result<Bracket> {
    let b = modified_bessel(nu, x, true)?;
    let d = log_derivatives(nu, x)?;
    if !(b.i_val > 0.0 && b.k_val > 0.0) {
        return Err(Error::Overflow(format!("scaled Bessel values out of range at ν={nu}, x={x}")));
    }
    Ok(Bracket { ln_i: b.i_val.ln() + x, ln_k: b.k_val.ln() - x, xi: x * d.i_ratio, xk: x * d.k_ratio })
}

/// log of R = [(wK′+aK)/(wI′+aI)](w) · [(xI′+aI)/(xK′+aK)](x), which lies in (0,1).
fn ln_cross_ratio(bw: &Bracket, bx: &Bracket, a: f64) -> f64 {
    (bw.ln_k - bw.ln_i)
        + ((bw.xk + a).abs() / (bw.xi + a)).ln()
        + (bx.ln_i - bx.ln_k)
        + ((bx.xi + a) / (bx.xk + a).abs()).ln()
}

/// log of det(L + ν²z²)/det(L) from the Bessel closed forms.
pub fn model_det_log_ratio(spec: &ModelOperatorSpec, z: f64) -> Result<f64> {
    spec.validate()?;
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be real and ≥ 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let nu = spec.nu;
    let a = spec.kind.signed_alpha(spec.alpha);
    let w = nu * z;
    match spec.kind {
        ModelKind::HarmonicH0 => {
            Err(Error::InvalidArgument("the harmonic operator has no Bessel ratio; use harmonic_det".into()))
        }
        ModelKind::PsiFull | ModelKind::PhiFull => {
            // 2^ν Γ(ν) / ((νz)^ν (1 + a/ν)) · (νz I′(νz) + a I(νz))
            let bw = bracket(nu, w)?;
            if bw.xi + a <= 0.0 || 1.0 + a / nu <= 0.0 {
                return Err(Error::Domain(format!("full-cone bracket not positive at ν={nu}, α={a}")));
            }
            Ok(nu * std::f64::consts::LN_2 + ln_gamma(nu) - nu * w.ln() - (a / nu).ln_1p() + bw.ln_i + (bw.xi + a).ln())
        }
        ModelKind::PsiTruncated | ModelKind::PhiTruncated => {
            let eps = spec.epsilon.unwrap();
            let x = w * eps;
            let bw = bracket(nu, w)?;
            let bx = bracket(nu, x)?;
            // (wI′+aI)(w)·(xK′+aK)(x)·2ν / ((ν²−a²)(ε^ν − ε^{−ν})) · (1 − R);
            // both the K bracket and ε^ν − ε^{−ν} are negative.
            let ln_num = bw.ln_i + (bw.xi + a).ln() + bx.ln_k + (bx.xk + a).abs().ln() + (2.0 * nu).ln();
            let ln_den = (nu * nu - a * a).ln() - nu * eps.ln() + (-(eps.powf(2.0 * nu))).ln_1p();
            let r = ln_cross_ratio(&bw, &bx, a);
            Ok(ln_num - ln_den + (-r.exp()).ln_1p())
        }
    }
}

pub fn model_det_ratio(spec: &ModelOperatorSpec, z: f64) -> Result<f64> {
    let l = model_det_log_ratio(spec, z)?;
    let v = l.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("determinant ratio e^{l} exceeds binary64")));
    }
    Ok(v)
}

const ODE_RTOL: f64 = 1e-12;

/// Gel'fand–Yaglom oracle on [ε,1].
///
/// ψ/φ kinds: the solution normalized at x=1 by f(1)=1, f′(1)=−θ is carried
/// to x=ε, and the ratio of B(f) = f′(ε) + θ f(ε)/ε at z and at 0 is returned.
/// Harmonic kind: Dirichlet at both ends, det(H₀ + z²) = 2 y(1) with
/// y(ε)=0, y′(ε)=1.
pub fn gy_det_ratio_oracle(spec: &ModelOperatorSpec, z: f64) -> Result<f64> {
    spec.validate()?;
    if !spec.kind.is_truncated() {
        return Err(Error::InvalidArgument("the ODE oracle needs a finite interval (truncated kinds)".into()));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be real and ≥ 0, got {z}")));
    }
    let eps = spec.epsilon.unwrap();
    if spec.kind == ModelKind::HarmonicH0 {
        let c = spec.alpha * spec.alpha - 0.25;
        let (y, _) = integrate_linear(|x| c / (x * x) + z * z, eps, 1.0, [0.0, 1.0], ODE_RTOL)?;
        return Ok(2.0 * y[0]);
    }
    let nu = spec.nu;
    let theta = spec.robin();
    let c = nu * nu - 0.25;
    let functional = |zz: f64| -> Result<f64> {
        let w2 = nu * nu * zz * zz;
        let (y, _) = integrate_linear(|x| c / (x * x) + w2, 1.0, eps, [1.0, -theta], ODE_RTOL)?;
        Ok(y[1] + theta * y[0] / eps)
    };
    Ok(functional(z)? / functional(0.0)?)
}

/// b^k_{η,ε} = log(1 − α/ν) − log(1 + α/ν) − Σ_{r=1}^n (α^r − (−α)^r)/(r(−ν)^r).
pub fn large_lambda_constant(nu: f64, alpha: f64, n: usize) -> f64 {
    let mut s = (-alpha / nu).ln_1p() - (alpha / nu).ln_1p();
    for r in 1..=n {
        let ri = r as i32;
        s -= (alpha.powi(ri) - (-alpha).powi(ri)) / (r as f64 * (-nu).powi(ri));
    }
    s
}

/// f_{r,ε}(λ) = (−1)^r (M_r(t_ε, −α) − M_r(t_ε, α) + (α^r − (−α)^r)/r).
pub fn f_term(r: usize, alpha: f64, t_eps: f64) -> Result<f64> {
    let m = m_poly(r)?;
    let ri = r as i32;
    let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * (m.eval(t_eps, -alpha) - m.eval(t_eps, alpha) + (alpha.powi(ri) - (-alpha).powi(ri)) / r as f64))
}

/// t_ε(λ) = (1 − ε²λ)^{−1/2}.
pub fn t_eps(eps: f64, lambda: f64) -> f64 {
    1.0 / (1.0 - eps * eps * lambda).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TP {
    pub t: f64,
    pub p: f64,
}

/// t_{η,ε}(λ) in its Bessel form and p = t − Σ_{r=1}^n ν^{−r} f_{r,ε}(λ),
/// at real λ ≤ 0 (z = √−λ).
pub fn t_eta_lambda(nu: f64, alpha: f64, eps: f64, lambda: f64, n: usize) -> Result<TP> {
    check_epsilon(eps)?;
    if !(nu > alpha.abs()) {
        return Err(Error::Domain(format!("need ν > |α|, got ν={nu}, α={alpha}")));
    }
    if !(lambda <= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("λ must be real and ≤ 0, got {lambda}")));
    }
    let te = t_eps(eps, lambda);
    let mut sub = KahanSum::default();
    for r in 1..=n {
        sub.add(nu.powi(-(r as i32)) * f_term(r, alpha, te)?);
    }
    if lambda == 0.0 {
        return Ok(TP { t: 0.0, p: -sub.value() });
    }
    let w = nu * (-lambda).sqrt();
    let x = w * eps;
    let bw = bracket(nu, w)?;
    let bx = bracket(nu, x)?;
    let plus = bx.xk + alpha;
    let minus = bx.xk - alpha;
    // Both brackets are negative; their quotient is the real log argument.
    if !(plus < 0.0 && minus < 0.0) {
        return Err(Error::Domain(format!("log argument changes sign at ν={nu}, α={alpha}, ε={eps}, λ={lambda}")));
    }
    let r_psi = ln_cross_ratio(&bw, &bx, alpha).exp();
    let r_phi = ln_cross_ratio(&bw, &bx, -alpha).exp();
    if !(r_psi < 1.0 && r_phi < 1.0) {
        return Err(Error::Domain(format!(
            "1 − R not positive at ν={nu}, α={alpha}, ε={eps}, λ={lambda}; ε is too large"
        )));
    }
    let mut t = KahanSum::default();
    t.add((minus / plus).ln());
    t.add(-(alpha / nu).ln_1p());
    t.add((-alpha / nu).ln_1p());
    t.add(-(-r_psi).ln_1p());
    t.add((-r_phi).ln_1p());
    let t = t.value();
    Ok(TP { t, p: t - sub.value() })
}

/// Σ_{r=1}^{order} (−ν)^{−r}(M_r(t_ε,−α) − M_r(t_ε,α) + (α^r − (−α)^r)/r).
pub fn t_large_nu(nu: f64, alpha: f64, eps: f64, lambda: f64, order: usize) -> Result<f64> {
    let te = t_eps(eps, lambda);
    let mut s = KahanSum::default();
    for r in 1..=order {
        // (−ν)^{−r}·(...) = ν^{−r} f_r
        s.add(nu.powi(-(r as i32)) * f_term(r, alpha, te)?);
    }
    Ok(s.value())
}
