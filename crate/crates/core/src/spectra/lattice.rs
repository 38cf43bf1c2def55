//! Bounding-box enumeration of lattice vectors by norm.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Points `G m` (m ∈ Zⁿ∖{0}) with `|G m|² ≤ r2`, as sorted squared norms.
///
/// The box `|m_i| ≤ |row_i(G⁻¹)|·R` contains every such point, since
/// `m_i = row_i(G⁻¹)·(G m)`.
pub fn norms_within(gen: &DMatrix<f64>, r2: f64) -> Result<Vec<f64>> {
    let n = gen.nrows();
    let inv = gen
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidCrossSection("singular lattice generator matrix".into()))?;
    let r = r2.max(0.0).sqrt();
    let bounds: Vec<i64> = (0..n).map(|i| (inv.row(i).norm() * r * (1.0 + 1e-12)).floor() as i64).collect();
    let cells: f64 = bounds.iter().map(|&b| (2 * b + 1) as f64).product();
    if cells > 5e8 {
        return Err(Error::InvalidArgument(format!("lattice scan box has {cells:.3e} cells; lower the cutoff")));
    }
    let b0 = bounds[0];
    let mut out: Vec<f64> = (-b0..=b0)
        .into_par_iter()
        .flat_map_iter(|m0| {
            let mut local = Vec::new();
            let mut m = vec![0i64; n];
            m[0] = m0;
            for i in 1..n {
                m[i] = -bounds[i];
            }
            loop {
                if m.iter().any(|&x| x != 0) {
                    let mut s = 0.0;
                    for row in 0..n {
                        let mut v = 0.0;
                        for (col, &mc) in m.iter().enumerate() {
                            v += gen[(row, col)] * mc as f64;
                        }
                        s += v * v;
                    }
                    if s <= r2 {
                        local.push(s);
                    }
                }
                // odometer over coordinates 1..n
                let mut i = n;
                loop {
                    if i == 1 {
                        return local.into_iter();
                    }
                    i -= 1;
                    if m[i] < bounds[i] {
                        m[i] += 1;
                        break;
                    }
                    m[i] = -bounds[i];
                }
            }
        })
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Collapse sorted values into `(value, count)` groups; a new group starts when
/// a value exceeds the group's first value by more than `tol·(1 + value)`.
pub fn group_sorted(values: &[f64], tol: f64) -> Vec<(f64, u64)> {
    let mut out: Vec<(f64, u64)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((first, count)) if v - *first <= tol * (1.0 + v) => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Diameter bound of the fundamental cell spanned by the columns of `gen`.
pub fn cell_diameter(gen: &DMatrix<f64>) -> f64 {
    gen.column_iter().map(|c| c.norm()).sum()
}

/// Volume of the unit ball in Rⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    std::f64::consts::PI.powf(h) / crate::special::gamma(h + 1.0)
}
