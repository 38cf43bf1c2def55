//! Independent routes to the torus zeta values, used for verification.
//!
//! * `first_order_shifted`: Mellin transform of the first-order trace
//!   Σ m e^{−(ν±α)t}, whose Poisson dual is the kernel
//!   P_t(x) = 2t (c/2π)^{(n+1)/2} K_{(n+1)/2}(c R) / R^{(n+1)/2},
//!   R² = t² + |x|², c = |α|. For even n the Bessel order is a half-integer
//!   and K is elementary.
//! * `epstein_zeta`: the full-line Mellin transform of the second-order trace
//!   in Bessel-K form, valid for all s off the poles, with no splitting and
//!   no quadrature.

use std::f64::consts::PI;

use crate::bessel::modified_bessel;
use crate::error::{Error, Result};
use crate::quad::gauss_kronrod;
use crate::special::{binomial, factorial, gamma, rgamma, upper_gamma, KahanSum, EULER_GAMMA};
use crate::spectra::{coclosed_spectrum, lattice, CrossSection, TailModel};

use super::{shifted_exp_series, Sign, Valued};

/// Frequencies and direct-lattice shells needed by both oracles.
struct TorusData {
    n: usize,
    weight: f64,
    volume: f64,
    c: f64,
    shells: Vec<(f64, u64)>,
    radius2: f64,
    direct_tail: TailModel,
}

fn torus_data(cs: &CrossSection, k: usize, decay_exponent: f64) -> Result<TorusData> {
    let b = cs.basis().ok_or_else(|| Error::ExperimentalUnsupported("torus oracles on round_sphere".into()))?;
    let n = cs.dim();
    if k >= n {
        return Err(Error::DegreeOutOfRange { k, n: n - 1 });
    }
    let c = crate::spectra::alpha(n, k).abs();
    if c == 0.0 {
        return Err(Error::InvalidArgument("torus oracles need α ≠ 0".into()));
    }
    let radius = decay_exponent / c;
    let radius2 = radius * radius;
    let norms = lattice::norms_within(b, radius2)?;
    let shells = lattice::group_sorted(&norms, 1e-12);
    Ok(TorusData {
        n,
        weight: cs.bundle_rank() as f64 * binomial(n - 1, k),
        volume: cs.volume(),
        c,
        shells,
        radius2,
        direct_tail: TailModel { dim: n, weight: 1.0, covolume: cs.volume(), slack: lattice::cell_diameter(b) },
    })
}

/// (h+j)!/(j!(h−j)!): K_{h+½}(z) = √(π/2z) e^{−z} Σ_j κ_j (2z)^{−j}.
fn kappa(h: usize, j: usize) -> f64 {
    factorial(h + j) / (factorial(j) * factorial(h - j))
}

/// Poisson kernel P_t at |x|² = x2.
fn poisson_kernel(n: usize, c: f64, t: f64, x2: f64) -> f64 {
    let h = n / 2;
    let r = (t * t + x2).sqrt();
    let z = c * r;
    let mut poly = 0.0;
    for j in 0..=h {
        poly += kappa(h, j) * (2.0 * z).powi(-(j as i32));
    }
    let k_half = (PI / (2.0 * z)).sqrt() * (-z).exp() * poly;
    2.0 * t * (c / (2.0 * PI)).powf(h as f64 + 0.5) * k_half / r.powf(h as f64 + 0.5)
}

/// ζ_k(0, ±α) and ζ_k′(0, ±α) through the first-order trace.
pub fn first_order_shifted(cs: &CrossSection, k: usize, sign: Sign) -> Result<(Valued, Valued)> {
    let d = torus_data(cs, k, 55.0)?;
    let n = d.n;
    let h = n / 2;
    let beta = sign.factor() * crate::spectra::alpha(n, k);
    let c = d.c;

    // Closed part on t ≤ 1: a e^{−(β+c)t} [Vol Σ_j e_j t^{−h−j} − 1].
    let damp = beta + c;
    let mut pole = 0.0;
    let mut finite = KahanSum::default();
    for j in 0..=h {
        let e = 2.0
            * (c / (2.0 * PI)).powf(h as f64 + 0.5)
            * (PI / (2.0 * c)).sqrt()
            * kappa(h, j)
            * (2.0 * c).powi(-(j as i32));
        let (s, p) = shifted_exp_series(-damp, 0.0, (h + j) as f64);
        finite.add(d.weight * d.volume * e * s);
        pole += d.weight * d.volume * e * p;
    }
    let (s, p) = shifted_exp_series(-damp, 0.0, 0.0);
    finite.add(-d.weight * s);
    pole -= d.weight * p;

    // Lattice remainder on t ≤ 1; the integrand t^{−1}·O(t) is regular.
    let rem = gauss_kronrod(
        |t: f64| {
            let s: KahanSum = d.shells.iter().map(|&(x2, m)| m as f64 * poisson_kernel(n, c, t, x2)).collect();
            d.weight * d.volume * (-beta * t).exp() * s.value() / t
        },
        0.0,
        1.0,
        1e-15,
        1e-13,
    )?;
    let beyond = d.direct_tail.tail_sum_bound(d.radius2, |x2| poisson_kernel(n, c, 1.0, x2))?;
    let rem_err = rem.err + d.weight * d.volume * (beta.abs()).exp() * beyond;
    finite.add(rem.value);

    // t ≥ 1: Σ m Γ(0, ν ± α) over a spectrum reaching e^{−√Λ} ≈ 1e−20.
    let lam = 2100.0;
    let slice = coclosed_spectrum(cs, k, lam)?;
    let a2 = slice.alpha * slice.alpha;
    let mut upper = KahanSum::default();
    for l in &slice.levels {
        let lamb = (l.eta + a2).sqrt() + beta;
        upper.add(l.mult as f64 * upper_gamma(0.0, lamb)?);
    }
    let up_tail = slice.tail_bound(|eta| {
        let x = (eta + a2).sqrt() + beta;
        upper_gamma(0.0, x.max(1e-300)).unwrap_or(f64::INFINITY)
    })?;
    finite.add(upper.value());

    let err = rem_err + up_tail;
    // Γ(s) Z(s) = A/s + B ⇒ Z(0) = A, Z′(0) = B + γA.
    Ok((Valued { value: pole, err: 1e-15 * pole.abs() }, Valued { value: finite.value() + EULER_GAMMA * pole, err }))
}

/// ζ_k(s) = Σ m (η + α²)^{−s/2} through the Bessel-K lattice representation.
pub fn epstein_zeta(cs: &CrossSection, k: usize, s: f64) -> Result<Valued> {
    let d = torus_data(cs, k, 60.0)?;
    let h = (d.n / 2) as f64;
    let sigma = s / 2.0;
    let v = sigma - h;
    if (v <= 0.0 && (v - v.round()).abs() < 1e-9) || (sigma <= 0.0 && (sigma - sigma.round()).abs() < 1e-9) {
        return Err(Error::Pole { s });
    }
    let c = d.c;
    let mut lat = KahanSum::default();
    for &(x2, m) in &d.shells {
        let l = x2.sqrt();
        let z = c * l;
        let kb = modified_bessel(v.abs(), z, true)?.k_val * (-z).exp();
        lat.add(m as f64 * 2.0 * (l / (2.0 * c)).powf(v) * kb);
    }
    let beyond = d.direct_tail.tail_sum_bound(d.radius2, |x2| {
        let l = x2.sqrt();
        let z = c * l;
        modified_bessel(v.abs(), z, true).map(|b| 2.0 * (l / (2.0 * c)).powf(v) * b.k_val * (-z).exp()).unwrap_or(0.0)
    })?;
    let pref = d.volume * (4.0 * PI).powf(-h);
    let zero_freq = gamma(v) * c.powf(-2.0 * v);
    let total = d.weight * (pref * (zero_freq + lat.value()) - gamma(sigma) * c.powf(-2.0 * sigma));
    let rg = rgamma(sigma);
    // The m = 0 subtraction cancels against the lattice side, so Γ and K
    // errors (~1e−14 relative) are charged at the scale of the cancelled terms.
    let scale = d.weight * (pref * (zero_freq.abs() + lat.value().abs()) + gamma(sigma).abs() * c.powf(-2.0 * sigma));
    Ok(Valued { value: total * rg, err: (d.weight * pref * beyond * rg).abs() + 1e-14 * (scale * rg).abs() })
}
