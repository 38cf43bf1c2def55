//! Coclosed-form spectra, heat-trace data and topology of the model
//! cross-sections.
//!
//! On a flat torus Rⁿ/BZⁿ the coclosed k-forms with frequency w = B^{-T}m ≠ 0
//! span a space of dimension C(n−1, k), all with eigenvalue 4π²|w|². The
//! constant forms are harmonic and excluded from every slice.

pub mod brute;
pub mod lattice;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::special::{binomial, factorial, gamma, KahanSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FlatTorus,
    RoundSphere,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::FlatTorus => "flat_torus",
            Family::RoundSphere => "round_sphere",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EigenLevel {
    pub eta: f64,
    pub mult: u64,
}

/// User-supplied coclosed spectrum of one degree of a round sphere, with the
/// small-time coefficients `c_j` of t^{j−n/2} for the shifted trace.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TabulatedDegree {
    pub k: usize,
    pub levels: Vec<EigenLevel>,
    pub heat_coeffs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CrossSection {
    family: Family,
    dim_n: usize,
    basis: Option<DMatrix<f64>>,
    radius: Option<f64>,
    bundle_rank: u32,
    volume: f64,
    betti: Vec<u64>,
    table: Vec<TabulatedDegree>,
}

impl CrossSection {
    /// Flat torus Rⁿ/BZⁿ; the columns of `basis` generate the lattice.
    pub fn flat_torus(basis: DMatrix<f64>, bundle_rank: u32) -> Result<Self> {
        let n = basis.nrows();
        if basis.ncols() != n {
            return Err(Error::InvalidCrossSection(format!(
                "lattice basis must be square, got {}×{}",
                n,
                basis.ncols()
            )));
        }
        check_dim(n)?;
        check_rank(bundle_rank)?;
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCrossSection("lattice basis has non-finite entries".into()));
        }
        let volume = basis.determinant().abs();
        let scale: f64 = basis.column_iter().map(|c| c.norm()).product();
        if !(volume > 1e-12 * scale) {
            return Err(Error::InvalidCrossSection(format!("lattice basis is singular (|det| = {volume:e})")));
        }
        let betti = (0..=n).map(|k| bundle_rank as u64 * binomial(n, k).round() as u64).collect();
        Ok(CrossSection {
            family: Family::FlatTorus,
            dim_n: n,
            basis: Some(basis),
            radius: None,
            bundle_rank,
            volume,
            betti,
            table: Vec::new(),
        })
    }

    /// Square torus of side `side` in dimension n.
    pub fn square_torus(n: usize, side: f64, bundle_rank: u32) -> Result<Self> {
        Self::flat_torus(DMatrix::identity(n, n) * side, bundle_rank)
    }

    /// Round sphere of the given radius. Its coclosed spectra are taken only
    /// from `table`; degrees missing from the table are rejected downstream.
    pub fn round_sphere(n: usize, radius: f64, bundle_rank: u32, table: Vec<TabulatedDegree>) -> Result<Self> {
        check_dim(n)?;
        check_rank(bundle_rank)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidCrossSection(format!("sphere radius must be positive, got {radius}")));
        }
        for d in &table {
            if d.k >= n {
                return Err(Error::DegreeOutOfRange { k: d.k, n });
            }
            if d.heat_coeffs.len() != n + 1 {
                return Err(Error::InvalidCrossSection(format!(
                    "sphere table degree {}: need {} heat coefficients, got {}",
                    d.k,
                    n + 1,
                    d.heat_coeffs.len()
                )));
            }
            if d.levels.iter().any(|l| !(l.eta > 0.0) || l.mult == 0) {
                return Err(Error::InvalidCrossSection(format!(
                    "sphere table degree {}: levels need η > 0 and positive multiplicity",
                    d.k
                )));
            }
        }
        let h = (n + 1) as f64 / 2.0;
        let volume = 2.0 * PI.powf(h) / gamma(h) * radius.powi(n as i32);
        let mut betti = vec![0; n + 1];
        betti[0] = bundle_rank as u64;
        betti[n] = bundle_rank as u64;
        Ok(CrossSection {
            family: Family::RoundSphere,
            dim_n: n,
            basis: None,
            radius: Some(radius),
            bundle_rank,
            volume,
            betti,
            table,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim_n
    }

    pub fn basis(&self) -> Option<&DMatrix<f64>> {
        self.basis.as_ref()
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn bundle_rank(&self) -> u32 {
        self.bundle_rank
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn is_torus(&self) -> bool {
        self.family == Family::FlatTorus
    }

    /// Same manifold with metric μ^{-2}g.
    pub fn rescaled(&self, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!("scale μ must be positive, got {mu}")));
        }
        match self.family {
            Family::FlatTorus => Self::flat_torus(self.basis.as_ref().unwrap() / mu, self.bundle_rank),
            Family::RoundSphere => Err(Error::ExperimentalUnsupported("rescaling a tabulated sphere spectrum".into())),
        }
    }

    fn require_torus(&self, what: &str) -> Result<&DMatrix<f64>> {
        self.basis.as_ref().ok_or_else(|| Error::ExperimentalUnsupported(format!("{what} on round_sphere")))
    }

    /// Weight of one nonzero lattice frequency in the degree-k slice.
    fn coclosed_weight(&self, k: usize) -> f64 {
        self.bundle_rank as f64 * binomial(self.dim_n - 1, k)
    }

    /// 2π B^{-T}: its image of Zⁿ is the set of frequencies with η = |·|².
    fn frequency_generator(&self) -> Result<DMatrix<f64>> {
        let b = self.require_torus("frequency lattice")?;
        let inv = b.clone().try_inverse().ok_or_else(|| Error::InvalidCrossSection("singular basis".into()))?;
        Ok(inv.transpose() * (2.0 * PI))
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidCrossSection(format!("dimension must be even and ≥ 2, got {n}")));
    }
    Ok(())
}

fn check_rank(rank: u32) -> Result<()> {
    if rank == 0 {
        return Err(Error::InvalidCrossSection("bundle rank must be positive".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Topology {
    pub betti: Vec<u64>,
    pub euler: i64,
}

pub fn betti_numbers(cs: &CrossSection) -> Topology {
    let euler = cs.betti.iter().enumerate().map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
    Topology { betti: cs.betti.clone(), euler }
}

/// α_k = (n−1)/2 − k.
pub fn alpha(n: usize, k: usize) -> f64 {
    (n as f64 - 1.0) / 2.0 - k as f64
}

/// Counting model for a weighted lattice: nonzero points `G m` with
/// `|G m|² ≤ x`, each carrying `weight`. The fundamental cell has diameter at
/// most `slack`, which sandwiches the count between ball volumes of radius
/// √x ∓ slack.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TailModel {
    pub dim: usize,
    pub weight: f64,
    pub covolume: f64,
    pub slack: f64,
}

impl TailModel {
    fn ball(&self, r: f64) -> f64 {
        self.weight * lattice::unit_ball_volume(self.dim) * r.max(0.0).powi(self.dim as i32) / self.covolume
    }

    /// Weyl-law count at squared radius `x`.
    pub fn weyl(&self, x: f64) -> f64 {
        self.ball(x.max(0.0).sqrt())
    }

    /// (lower, upper) bounds on the weighted count at `x`.
    pub fn count_bounds(&self, x: f64) -> (f64, f64) {
        let r = x.max(0.0).sqrt();
        let lo = (self.ball(r - self.slack) - self.weight).max(0.0);
        let hi = (self.ball(r + self.slack) - self.weight).max(0.0);
        (lo, hi)
    }

    /// Bound on |count(x) − weyl(x)|.
    pub fn count_error(&self, x: f64) -> f64 {
        let (lo, hi) = self.count_bounds(x);
        let w = self.weyl(x);
        (hi - w).max(w - lo)
    }

    /// Upper bound on Σ weight·f(|p|²) over the points with |p|² > x0, for a
    /// nonnegative nonincreasing `f`. Dyadic shells in x.
    pub fn tail_sum_bound<F: Fn(f64) -> f64>(&self, x0: f64, f: F) -> Result<f64> {
        let mut x = x0.max(1e-300);
        let mut acc = 0.0;
        let mut small_run = 0;
        for _ in 0..2400 {
            let (lo, _) = self.count_bounds(x);
            let (_, hi) = self.count_bounds(2.0 * x);
            let term = f(x) * (hi - lo).max(0.0);
            acc += term;
            // Empty shells below the counting slack say nothing about the tail.
            let settled = x >= 16.0 * self.slack * self.slack;
            if settled && (term <= 1e-17 * acc || term < 1e-300) {
                small_run += 1;
                if small_run >= 3 {
                    return Ok(acc);
                }
            } else {
                small_run = 0;
            }
            x *= 2.0;
        }
        Err(Error::NoConvergence(format!("tail sum from x = {x0:e} does not settle")))
    }
}

/// Small-time data of Θ(t) = Σ m(η) e^{−(η+α²)t}.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HeatExpansion {
    pub n: usize,
    pub alpha: f64,
    /// `coeffs[j]` multiplies t^{j − n/2}, j = 0..=n.
    pub coeffs: Vec<f64>,
    /// Torus only: Θ(t) = (weyl·t^{−n/2} − zero)·e^{−α²t} + Poisson remainder.
    pub smooth: Option<SmoothPart>,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SmoothPart {
    /// a·Vol·(4π)^{−n/2} with a = rank·C(n−1, k).
    pub weyl: f64,
    /// a: the m = 0 frequency removed from the Poisson sum.
    pub zero: f64,
}

impl HeatExpansion {
    fn torus(n: usize, alpha: f64, weyl: f64, zero: f64) -> Self {
        let a2 = -alpha * alpha;
        let h = n / 2;
        let coeffs = (0..=n)
            .map(|j| {
                let mut c = weyl * a2.powi(j as i32) / factorial(j);
                if j >= h {
                    c -= zero * a2.powi((j - h) as i32) / factorial(j - h);
                }
                c
            })
            .collect();
        HeatExpansion { n, alpha, coeffs, smooth: Some(SmoothPart { weyl, zero }) }
    }

    /// Σ_j c_j t^{j−n/2}.
    pub fn series(&self, t: f64) -> f64 {
        let h = (self.n / 2) as i32;
        self.coeffs.iter().enumerate().map(|(j, c)| c * t.powi(j as i32 - h)).sum()
    }

    /// Coefficient of t^p, zero outside the stored range.
    pub fn coeff_of_power(&self, p: i32) -> f64 {
        let j = p + (self.n / 2) as i32;
        if j < 0 || j as usize >= self.coeffs.len() {
            0.0
        } else {
            self.coeffs[j as usize]
        }
    }

    /// The torus closed form (weyl·t^{−n/2} − zero)·e^{−α²t}.
    pub fn smooth_value(&self, t: f64) -> Option<f64> {
        self.smooth.map(|s| (s.weyl * t.powf(-(self.n as f64) / 2.0) - s.zero) * (-self.alpha * self.alpha * t).exp())
    }

    /// Bound on |smooth(t) − series(t)| from the Taylor remainder of e^{−α²t}.
    pub fn series_remainder_bound(&self, t: f64) -> Option<f64> {
        let s = self.smooth?;
        let x = self.alpha * self.alpha * t;
        let h = self.n / 2;
        // Terms kept: j ≤ n for the weyl part, j − n/2 ≤ n/2 for the zero part.
        let lag = |m: usize| x.powi(m as i32 + 1) / factorial(m + 1);
        Some(s.weyl * t.powf(-(self.n as f64) / 2.0) * lag(self.n) + s.zero * lag(h))
    }
}

/// Σ_{ℓ ∈ BZⁿ∖0} e^{−|ℓ|²/(4t)}, the exponentially small part of the torus
/// heat trace, from direct-lattice shells plus a counting bound beyond them.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonRemainder {
    pub shells: Vec<(f64, u64)>,
    pub radius2: f64,
    pub tail: TailModel,
}

/// Shells out to |ℓ|² = 4·DIRECT_EXPONENT cover t ≤ 1 to e^{−DIRECT_EXPONENT}.
const DIRECT_EXPONENT: f64 = 50.0;

impl PoissonRemainder {
    fn for_basis(b: &DMatrix<f64>, volume: f64) -> Result<Self> {
        let radius2 = 4.0 * DIRECT_EXPONENT;
        let norms = lattice::norms_within(b, radius2)?;
        let shells = lattice::group_sorted(&norms, 1e-12);
        let tail = TailModel { dim: b.nrows(), weight: 1.0, covolume: volume, slack: lattice::cell_diameter(b) };
        Ok(PoissonRemainder { shells, radius2, tail })
    }

    /// Sum over the stored shells.
    pub fn lattice_value(&self, t: f64) -> f64 {
        let s: KahanSum = self.shells.iter().map(|&(r2, c)| c as f64 * (-r2 / (4.0 * t)).exp()).collect();
        s.value()
    }

    /// Bound on the shells beyond the stored radius.
    pub fn lattice_tail(&self, t: f64) -> f64 {
        self.tail.tail_sum_bound(self.radius2, |x| (-x / (4.0 * t)).exp()).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug)]
pub struct SpectralSlice {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub levels: Vec<EigenLevel>,
    pub cutoff: f64,
    pub betti_k: u64,
    pub heat: HeatExpansion,
    /// Weighted frequency counting model; absent for tabulated spectra.
    pub tail: Option<TailModel>,
    pub poisson: Option<PoissonRemainder>,
}

impl SpectralSlice {
    /// ν(η) = √(η + α²).
    pub fn nu(&self, level: &EigenLevel) -> f64 {
        (level.eta + self.alpha * self.alpha).sqrt()
    }

    pub fn nus(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.levels.iter().map(|l| (self.nu(l), l.mult as f64))
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.levels.iter().map(|l| l.mult).sum()
    }

    /// Same spectrum with the shift α replaced by `beta`.
    pub fn with_shift(&self, beta: f64) -> Result<Self> {
        let smooth = self
            .heat
            .smooth
            .ok_or_else(|| Error::ExperimentalUnsupported("re-shifting a tabulated spectrum".into()))?;
        let mut out = self.clone();
        out.alpha = beta;
        out.heat = HeatExpansion::torus(self.n, beta, smooth.weyl, smooth.zero);
        Ok(out)
    }

    pub fn require_tail(&self) -> Result<&TailModel> {
        self.tail.as_ref().ok_or_else(|| Error::ExperimentalUnsupported("tail bounds for a tabulated spectrum".into()))
    }

    /// Θ(t) by direct summation over the stored levels, with a bound on the
    /// levels above the cutoff.
    pub fn theta_direct(&self, t: f64) -> Result<(f64, f64)> {
        let a2 = self.alpha * self.alpha;
        let s: KahanSum = self.levels.iter().map(|l| l.mult as f64 * (-(l.eta + a2) * t).exp()).collect();
        let tail = self.require_tail()?.tail_sum_bound(self.cutoff, |x| (-(x + a2) * t).exp())?;
        Ok((s.value(), tail))
    }

    /// Bound on Σ_{η > Λ} m f(η) for nonincreasing f.
    pub fn tail_bound<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.require_tail()?.tail_sum_bound(self.cutoff, f)
    }

    /// Weyl prediction for the level count up to the cutoff and its error bound.
    pub fn weyl_check(&self, x: f64) -> Result<(f64, f64, f64)> {
        let tm = self.require_tail()?;
        let count: u64 = self.levels.iter().filter(|l| l.eta <= x).map(|l| l.mult).sum();
        Ok((count as f64, tm.weyl(x), tm.count_error(x)))
    }
}

/// Relative grouping tolerance for equal eigenvalues.
pub const LEVEL_TOL: f64 = 1e-12;

/// Nonzero coclosed spectrum of degree k up to Λ.
pub fn coclosed_spectrum(cs: &CrossSection, k: usize, cutoff: f64) -> Result<SpectralSlice> {
    let n = cs.dim_n;
    if k >= n {
        return Err(Error::DegreeOutOfRange { k, n: n - 1 });
    }
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::InvalidArgument(format!("cutoff must be positive and finite, got {cutoff}")));
    }
    let a = alpha(n, k);
    match cs.family {
        Family::FlatTorus => {
            let gen = cs.frequency_generator()?;
            let norms = lattice::norms_within(&gen, cutoff)?;
            let w = cs.coclosed_weight(k);
            let levels = lattice::group_sorted(&norms, LEVEL_TOL)
                .into_iter()
                .map(|(eta, c)| EigenLevel { eta, mult: c * w.round() as u64 })
                .collect();
            let weyl = w * cs.volume * (4.0 * PI).powf(-(n as f64) / 2.0);
            let tail = TailModel {
                dim: n,
                weight: w,
                covolume: (2.0 * PI).powi(n as i32) / cs.volume,
                slack: lattice::cell_diameter(&gen),
            };
            let poisson = PoissonRemainder::for_basis(cs.basis.as_ref().unwrap(), cs.volume)?;
            Ok(SpectralSlice {
                k,
                n,
                alpha: a,
                levels,
                cutoff,
                betti_k: cs.betti[k],
                heat: HeatExpansion::torus(n, a, weyl, w),
                tail: Some(tail),
                poisson: Some(poisson),
            })
        }
        Family::RoundSphere => {
            let deg = cs.table.iter().find(|d| d.k == k).ok_or_else(|| {
                Error::ExperimentalUnsupported(format!("round_sphere degree {k} without a spectrum table"))
            })?;
            let mut levels: Vec<EigenLevel> = deg.levels.iter().copied().filter(|l| l.eta <= cutoff).collect();
            levels.sort_by(|x, y| x.eta.total_cmp(&y.eta));
            let rank = cs.bundle_rank as u64;
            for l in &mut levels {
                l.mult *= rank;
            }
            let coeffs = deg.heat_coeffs.iter().map(|c| c * rank as f64).collect();
            Ok(SpectralSlice {
                k,
                n,
                alpha: a,
                levels,
                cutoff,
                betti_k: cs.betti[k],
                heat: HeatExpansion { n, alpha: a, coeffs, smooth: None },
                tail: None,
                poisson: None,
            })
        }
    }
}

/// Coefficients of the small-time expansion of Θ_k.
pub fn theta_heat_coeffs(cs: &CrossSection, k: usize) -> Result<HeatExpansion> {
    let n = cs.dim_n;
    if k >= n {
        return Err(Error::DegreeOutOfRange { k, n: n - 1 });
    }
    match cs.family {
        Family::FlatTorus => {
            let w = cs.coclosed_weight(k);
            let weyl = w * cs.volume * (4.0 * PI).powf(-(n as f64) / 2.0);
            Ok(HeatExpansion::torus(n, alpha(n, k), weyl, w))
        }
        Family::RoundSphere => {
            let deg = cs.table.iter().find(|d| d.k == k).ok_or_else(|| {
                Error::ExperimentalUnsupported(format!("round_sphere degree {k} heat coefficients without a table"))
            })?;
            let rank = cs.bundle_rank as f64;
            Ok(HeatExpansion {
                n,
                alpha: alpha(n, k),
                coeffs: deg.heat_coeffs.iter().map(|c| c * rank).collect(),
                smooth: None,
            })
        }
    }
}

/// Smallest cutoff from the grid 8, 12, 16, … whose tail bound for
/// Σ m (1+η)^{n+2} e^{−η} falls below `tol`. The t ≥ 1 Mellin pieces and
/// their s-derivatives are dominated by this sum.
pub fn cutoff_for_tolerance(cs: &CrossSection, k: usize, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let probe = coclosed_spectrum(cs, k, 1e-300_f64.max(f64::MIN_POSITIVE))?;
    let tm = *probe.require_tail()?;
    let p = (cs.dim_n + 2) as i32;
    let mut lam: f64 = 8.0;
    for _ in 0..100_000 {
        let b = tm.tail_sum_bound(lam, |x| (1.0 + x).powi(p) * (-x).exp())?;
        if b <= tol {
            return Ok(lam);
        }
        lam += 4.0;
    }
    Err(Error::NoConvergence("no cutoff meets the tolerance".into()))
}
