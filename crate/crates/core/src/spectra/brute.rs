//! Dense form-Laplacian oracle on a truncated Fourier basis of a flat torus.
//!
//! For each frequency w = B^{-T}m with max|m_i| ≤ shells, the Hodge Laplacian
//! on e^{2πi⟨w,x⟩}Λ^k is assembled from explicit wedge and interior-product
//! matrices, restricted to the kernel of the divergence block, and
//! diagonalized. Nothing here uses the C(n−1, k) multiplicity formula.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{lattice, CrossSection, EigenLevel};
use crate::error::{Error, Result};

pub const MAX_SHELLS: usize = 6;
pub const MAX_BASIS_DIM: usize = 500_000;

/// k-subsets of {0..n−1} in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn index_of(basis: &[Vec<usize>], s: &[usize]) -> usize {
    basis.iter().position(|b| b == s).expect("subset present")
}

/// Matrix of v∧ : Λ^k → Λ^{k+1}.
fn wedge(n: usize, k: usize, v: &DVector<f64>) -> DMatrix<f64> {
    let src = subsets(n, k);
    let dst = subsets(n, k + 1);
    let mut m = DMatrix::zeros(dst.len(), src.len());
    for (c, s) in src.iter().enumerate() {
        for j in 0..n {
            if s.contains(&j) {
                continue;
            }
            let before = s.iter().filter(|&&i| i < j).count();
            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
            let mut t = s.clone();
            t.push(j);
            t.sort_unstable();
            m[(index_of(&dst, &t), c)] += sign * v[j];
        }
    }
    m
}

/// Matrix of the interior product ι_v : Λ^k → Λ^{k−1}.
fn interior(n: usize, k: usize, v: &DVector<f64>) -> DMatrix<f64> {
    let src = subsets(n, k);
    let dst = subsets(n, k - 1);
    let mut m = DMatrix::zeros(dst.len(), src.len());
    for (c, s) in src.iter().enumerate() {
        for (p, &i) in s.iter().enumerate() {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let mut t = s.clone();
            t.remove(p);
            m[(index_of(&dst, &t), c)] += sign * v[i];
        }
    }
    m
}

/// Result of the oracle: nonzero coclosed eigenvalues with multiplicities,
/// complete for η ≤ `complete_below`.
#[derive(Clone, Debug)]
pub struct BruteSpectrum {
    pub levels: Vec<EigenLevel>,
    pub complete_below: f64,
    pub basis_dim: usize,
    /// Σ over modes of (coclosed nonzero + closed nonzero + harmonic) dimensions.
    pub hodge_dims: (usize, usize, usize),
}

pub fn brute_force_form_laplacian(cs: &CrossSection, k: usize, shells: usize) -> Result<BruteSpectrum> {
    let b = cs.basis().ok_or_else(|| Error::ExperimentalUnsupported("form-Laplacian oracle on round_sphere".into()))?;
    let n = cs.dim();
    if k >= n {
        return Err(Error::DegreeOutOfRange { k, n: n - 1 });
    }
    let modes = (2 * shells + 1).pow(n as u32);
    let fiber = subsets(n, k).len();
    let dim = modes * fiber * cs.bundle_rank() as usize;
    if shells > MAX_SHELLS || dim > MAX_BASIS_DIM {
        return Err(Error::OracleTooLarge(format!(
            "{shells} shells in dimension {n}, degree {k}: basis size {dim} (limits: {MAX_SHELLS} shells, {MAX_BASIS_DIM} basis vectors)"
        )));
    }
    let dual = b.clone().try_inverse().ok_or_else(|| Error::InvalidCrossSection("singular basis".into()))?.transpose();
    let s = shells as i64;
    let mut eig = Vec::new();
    let mut dims = (0usize, 0usize, 0usize);
    let mut m = vec![-s; n];
    loop {
        let mv = DVector::from_iterator(n, m.iter().map(|&x| x as f64));
        let w = &dual * mv * (2.0 * PI);
        // Δ = d δ + δ d with d = i w∧, δ = −i ι_w on this mode.
        let mut lap = DMatrix::zeros(fiber, fiber);
        if k < n {
            let e = wedge(n, k, &w);
            let i = interior(n, k + 1, &w);
            lap += &i * &e;
        }
        let div = if k > 0 { Some(interior(n, k, &w)) } else { None };
        if let Some(d) = &div {
            lap += wedge(n, k - 1, &w) * d;
        }
        // Orthonormal basis of ker ι_w.
        let q = match &div {
            None => DMatrix::identity(fiber, fiber),
            Some(d) => {
                let g = SymmetricEigen::new(d.transpose() * d);
                let scale = 1.0 + w.norm_squared();
                let cols: Vec<DVector<f64>> = (0..fiber)
                    .filter(|&j| g.eigenvalues[j].abs() <= 1e-10 * scale)
                    .map(|j| g.eigenvectors.column(j).into_owned())
                    .collect();
                if cols.is_empty() {
                    DMatrix::zeros(fiber, 0)
                } else {
                    DMatrix::from_columns(&cols)
                }
            }
        };
        let full = SymmetricEigen::new(lap.clone());
        let scale = 1.0 + w.norm_squared();
        let nonzero_total = full.eigenvalues.iter().filter(|v| v.abs() > 1e-9 * scale).count();
        if q.ncols() > 0 {
            let h = q.transpose() * &lap * &q;
            let r = SymmetricEigen::new(h);
            let mut cocl = 0;
            for v in r.eigenvalues.iter() {
                if v.abs() > 1e-9 * scale {
                    eig.push(*v);
                    cocl += 1;
                }
            }
            dims.0 += cocl;
            dims.2 += q.ncols() - cocl;
            dims.1 += nonzero_total - cocl;
        } else {
            dims.1 += nonzero_total;
        }
        let mut i = n;
        loop {
            if i == 0 {
                let rank = cs.bundle_rank() as u64;
                eig.sort_by(|a, b| a.total_cmp(b));
                let levels = lattice::group_sorted(&eig, 1e-9)
                    .into_iter()
                    .map(|(eta, c)| EigenLevel { eta, mult: c * rank })
                    .collect();
                let longest = b.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
                let r = cs.bundle_rank() as usize;
                return Ok(BruteSpectrum {
                    levels,
                    complete_below: (2.0 * PI * (shells as f64 + 1.0) / longest).powi(2) * (1.0 - 1e-12),
                    basis_dim: dim,
                    hodge_dims: (dims.0 * r, dims.1 * r, dims.2 * r),
                });
            }
            i -= 1;
            if m[i] < s {
                m[i] += 1;
                break;
            }
            m[i] = -s;
        }
    }
}
