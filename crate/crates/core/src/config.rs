//! Run configuration: one JSON document, `"schema": 1`.
//!
//! Parsing reports the JSON path of the offending field. Semantic checks
//! (dimension parity, singular bases, ranges) report paths too.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{CrossSection, TabulatedDegree};
use crate::torsion::TorsionOptions;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_MU_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    FlatTorus,
    RoundSphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSectionConfig {
    pub family: FamilyName,
    pub dim_n: usize,
    /// Row-major n×n matrix whose columns generate the lattice.
    #[serde(default)]
    pub lattice_basis: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "one")]
    pub bundle_rank: u32,
    #[serde(default)]
    pub spectrum_table: Option<Vec<TabulatedDegree>>,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuGridSpec {
    Text(String),
    List(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub cross_section: CrossSectionConfig,
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub k_tolerance: Option<f64>,
    #[serde(default)]
    pub subtraction_order: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub mu_grid: Option<MuGridSpec>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn cfg_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

impl Default for RunConfig {
    /// Unit square torus, rank 1, default tolerance.
    fn default() -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            cross_section: CrossSectionConfig {
                family: FamilyName::FlatTorus,
                dim_n: 2,
                lattice_basis: Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
                radius: None,
                bundle_rank: 1,
                spectrum_table: None,
            },
            cutoff: None,
            tolerance: None,
            k_tolerance: None,
            subtraction_order: None,
            epsilon: None,
            mu_grid: None,
            output: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(if path.is_empty() { "." } else { &path }, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(cfg_err("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.cutoff.is_some() && self.tolerance.is_some() {
            return Err(cfg_err("cutoff", "give either cutoff or tolerance, not both"));
        }
        if let Some(c) = self.cutoff {
            if !(c > 0.0 && c.is_finite()) {
                return Err(cfg_err("cutoff", format!("must be positive and finite, got {c}")));
            }
        }
        for (name, v) in [("tolerance", self.tolerance), ("k_tolerance", self.k_tolerance)] {
            if let Some(t) = v {
                if !(t > 0.0 && t < 1.0) {
                    return Err(cfg_err(name, format!("must lie in (0,1), got {t}")));
                }
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(cfg_err("epsilon", format!("must lie in (0,1), got {e}")));
            }
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(cfg_err("threads", "must be at least 1"));
            }
        }
        if let Some(o) = self.subtraction_order {
            if o < self.cross_section.dim_n {
                return Err(cfg_err("subtraction_order", format!("must be ≥ dim_n = {}", self.cross_section.dim_n)));
            }
        }
        self.mu_values()?;
        build_cross_section(&self.cross_section)?;
        Ok(())
    }

    pub fn mu_values(&self) -> Result<Option<Vec<f64>>> {
        match &self.mu_grid {
            None => Ok(None),
            Some(MuGridSpec::Text(s)) => parse_mu_grid(s).map(Some).map_err(|e| cfg_err("mu_grid", e.to_string())),
            Some(MuGridSpec::List(v)) => {
                check_mu_list(v).map_err(|e| cfg_err("mu_grid", e.to_string()))?;
                Ok(Some(v.clone()))
            }
        }
    }

    pub fn torsion_options(&self) -> TorsionOptions {
        let d = TorsionOptions::default();
        TorsionOptions {
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            cutoff: self.cutoff,
            k_tol: self.k_tolerance.unwrap_or(d.k_tol),
            order: self.subtraction_order,
        }
    }
}

/// Build and validate the cross-section; errors carry config paths.
pub fn build_cross_section(c: &CrossSectionConfig) -> Result<CrossSection> {
    let wrap = |e: Error| cfg_err("cross_section", e.to_string());
    let n = c.dim_n;
    match c.family {
        FamilyName::FlatTorus => {
            if c.radius.is_some() || c.spectrum_table.is_some() {
                return Err(cfg_err("cross_section", "radius and spectrum_table apply to round_sphere only"));
            }
            let rows = c
                .lattice_basis
                .as_ref()
                .ok_or_else(|| cfg_err("cross_section.lattice_basis", "required for flat_torus"))?;
            if rows.len() != n {
                return Err(cfg_err("cross_section.lattice_basis", format!("expected {n} rows, got {}", rows.len())));
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != n {
                    return Err(cfg_err(
                        &format!("cross_section.lattice_basis[{i}]"),
                        format!("expected {n} entries, got {}", r.len()),
                    ));
                }
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            CrossSection::flat_torus(DMatrix::from_row_slice(n, n, &flat), c.bundle_rank).map_err(wrap)
        }
        FamilyName::RoundSphere => {
            if c.lattice_basis.is_some() {
                return Err(cfg_err("cross_section.lattice_basis", "applies to flat_torus only"));
            }
            let r = c.radius.ok_or_else(|| cfg_err("cross_section.radius", "required for round_sphere"))?;
            CrossSection::round_sphere(n, r, c.bundle_rank, c.spectrum_table.clone().unwrap_or_default()).map_err(wrap)
        }
    }
}

fn check_mu_list(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Parse("empty μ grid".into()));
    }
    if v.len() > MAX_MU_POINTS {
        return Err(Error::Parse(format!("μ grid has {} points, limit {MAX_MU_POINTS}", v.len())));
    }
    for &m in v {
        if !(1.0..=1e6).contains(&m) {
            return Err(Error::Parse(format!("μ = {m} outside [1, 1e6]")));
        }
    }
    Ok(())
}

/// `a,b,c` lists the values; `a..b` doubles from a while ≤ b.
pub fn parse_mu_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let num = |t: &str| -> Result<f64> {
        t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {:?}", t.trim())))
    };
    let out = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::Parse(format!("range start must exceed 1, got {a}")));
        }
        if !(b >= a && b.is_finite()) {
            return Err(Error::Parse(format!("range end {b} below start {a}")));
        }
        let mut v = Vec::new();
        let mut m = a;
        while m <= b * (1.0 + 1e-12) {
            v.push(m);
            if v.len() > MAX_MU_POINTS {
                break;
            }
            m *= 2.0;
        }
        v
    } else {
        s.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    check_mu_list(&out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_unit_square() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let cs = build_cross_section(&cfg.cross_section).unwrap();
        assert_eq!(cs.volume(), 1.0);
    }

    #[test]
    fn paths_in_errors() {
        let bad = r#"{"schema":1,"cross_section":{"family":"flat_torus","dim_n":2,"lattice_basis":[[1,0],[0,"x"]]}}"#;
        match RunConfig::parse(bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "cross_section.lattice_basis[1][1]"),
            other => panic!("{other:?}"),
        }
        let odd = r#"{"schema":1,"cross_section":{"family":"flat_torus","dim_n":3,"lattice_basis":[[1,0,0],[0,1,0],[0,0,1]]}}"#;
        assert!(matches!(RunConfig::parse(odd), Err(Error::Config { .. })));
        let both = r#"{"schema":1,"cutoff":50,"tolerance":1e-10,"cross_section":{"family":"flat_torus","dim_n":2,"lattice_basis":[[1,0],[0,1]]}}"#;
        match RunConfig::parse(both) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "cutoff"),
            other => panic!("{other:?}"),
        }
        let unknown =
            r#"{"schema":1,"extra":0,"cross_section":{"family":"flat_torus","dim_n":2,"lattice_basis":[[1,0],[0,1]]}}"#;
        assert!(RunConfig::parse(unknown).is_err());
    }

    #[test]
    fn mu_grids() {
        assert_eq!(parse_mu_grid("2..64").unwrap(), vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
        assert_eq!(parse_mu_grid("2, 3,5").unwrap(), vec![2.0, 3.0, 5.0]);
        assert!(parse_mu_grid("1..4").is_err());
        assert!(parse_mu_grid("8..4").is_err());
        assert!(parse_mu_grid("").is_err());
        assert!(parse_mu_grid("0.5").is_err());
    }
}
