use std::fmt;
use std::path::{Path, PathBuf};

use hardyliou::{Complex64, TaylorPolynomial};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A complex number written either as a bare real or as `[re, im]`; always echoed as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Pair(f64, f64),
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let z = self.value();
        (z.re, z.im).serialize(s)
    }
}

impl Number {
    pub fn value(self) -> Complex64 {
        match self {
            Number::Real(re) => Complex64::new(re, 0.0),
            Number::Pair(re, im) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub z0: Number,
    #[serde(rename = "T")]
    pub duration: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub z0: Number,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmdConfig {
    /// Starting points simulated under `symbol` with the `ode` duration and step.
    #[serde(default)]
    pub starts: Vec<Number>,
    #[serde(default)]
    pub ridge: Option<f64>,
    #[serde(default)]
    pub predict: Option<PredictConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Bounded,
    Divergent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub radii: Option<usize>,
    #[serde(default)]
    pub angles: Option<usize>,
    #[serde(default)]
    pub max_radius: Option<f64>,
    /// Zeros of a finite Blaschke product used in place of `phi`.
    #[serde(default)]
    pub blaschke_zeros: Option<Vec<Number>>,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub truncation: usize,
    #[serde(default)]
    pub boundary_samples: Option<usize>,
    #[serde(default)]
    pub symbol: Vec<Number>,
    #[serde(default)]
    pub phi: Option<Vec<Number>>,
    #[serde(default)]
    pub ode: Option<OdeConfig>,
    #[serde(default)]
    pub trajectories: Vec<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the default bound of the primary certificate.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Eigenvalue for the exponential eigenfunction check.
    #[serde(default)]
    pub lambda: Option<Number>,
    /// Number of random test vectors.
    #[serde(default)]
    pub cases: Option<usize>,
    #[serde(default)]
    pub dmd: Option<DmdConfig>,
    #[serde(default)]
    pub bounds: Option<BoundsConfig>,
    /// Subset of acceptance criteria for `verify-all`.
    #[serde(default)]
    pub criteria: Option<Vec<u32>>,
}

/// Collected validation failures; the runner exits with status 2 when non-empty.
#[derive(Debug, Default)]
pub struct Diagnostics(pub Vec<String>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Requirements {
    pub symbol: bool,
    pub phi: bool,
    pub signal: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Diagnostics> {
        serde_json::from_str(text).map_err(|e| Diagnostics(vec![format!("malformed config: {e}")]))
    }

    /// Relative trajectory paths are taken relative to the config file.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in &mut self.trajectories {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self, req: Requirements) -> Result<(), Diagnostics> {
        let mut d = Vec::new();
        if self.schema != SCHEMA_VERSION {
            d.push(format!(
                "schema: expected {SCHEMA_VERSION}, found {}",
                self.schema
            ));
        }
        if self.truncation < 1 {
            d.push("truncation: must be at least 1".into());
        }
        let min_samples = 2 * self.truncation + 2;
        if let Some(m) = self.boundary_samples {
            if m < min_samples {
                d.push(format!(
                    "boundary_samples: {m} < 2·truncation + 2 = {min_samples}"
                ));
            }
        }
        check_numbers("symbol", &self.symbol, &mut d);
        if let Some(phi) = &self.phi {
            check_numbers("phi", phi, &mut d);
            if phi.is_empty() {
                d.push("phi: empty coefficient list".into());
            }
        }
        if req.symbol && self.symbol.is_empty() {
            d.push("symbol: required by this command".into());
        }
        if req.phi && self.phi.is_none() {
            d.push("phi: required by this command".into());
        }
        if req.signal && self.ode.is_none() && self.trajectories.is_empty() {
            d.push("ode or trajectories: this command needs at least one trajectory".into());
        }
        if let Some(ode) = &self.ode {
            let z0 = ode.z0.value();
            if !(z0.re.is_finite() && z0.im.is_finite()) || z0.norm() >= 1.0 {
                d.push(format!("ode.z0: {z0} is not inside the unit disk"));
            }
            if !(ode.duration.is_finite() && ode.duration > 0.0) {
                d.push(format!("ode.T: must be positive, found {}", ode.duration));
            }
            if !(ode.dt.is_finite() && ode.dt > 0.0) {
                d.push(format!("ode.dt: must be positive, found {}", ode.dt));
            } else if ode.dt > ode.duration {
                d.push(format!("ode.dt: {} exceeds T = {}", ode.dt, ode.duration));
            }
        }
        for p in &self.trajectories {
            if !p.is_file() {
                d.push(format!("trajectories: file {} does not exist", p.display()));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                d.push(format!(
                    "tolerance: must be finite and non-negative, found {t}"
                ));
            }
        }
        if let Some(dmd) = &self.dmd {
            check_numbers("dmd.starts", &dmd.starts, &mut d);
            if !dmd.starts.is_empty() && (self.ode.is_none() || self.symbol.is_empty()) {
                d.push("dmd.starts: simulating trajectories needs both symbol and ode".into());
            }
            if let Some(r) = dmd.ridge {
                if !(r.is_finite() && r >= 0.0) {
                    d.push(format!(
                        "dmd.ridge: must be finite and non-negative, found {r}"
                    ));
                }
            }
            if let Some(p) = &dmd.predict {
                if p.z0.value().norm() >= 1.0 {
                    d.push("dmd.predict.z0: must lie inside the unit disk".into());
                }
                if p.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    d.push("dmd.predict.times: must be finite and non-negative".into());
                }
            }
        }
        if let Some(b) = &self.bounds {
            if b.radii == Some(0) || b.angles == Some(0) {
                d.push("bounds: radii and angles must be positive".into());
            }
            if let Some(r) = b.max_radius {
                if !(r > 0.0 && r < 1.0) {
                    d.push(format!("bounds.max_radius: must lie in (0, 1), found {r}"));
                }
            }
            if let Some(zeros) = &b.blaschke_zeros {
                check_numbers("bounds.blaschke_zeros", zeros, &mut d);
                if zeros.iter().any(|z| z.value().norm() >= 1.0) {
                    d.push("bounds.blaschke_zeros: zeros must lie inside the unit disk".into());
                }
            }
        }
        if d.is_empty() {
            Ok(())
        } else {
            Err(Diagnostics(d))
        }
    }

    pub fn boundary_samples(&self) -> usize {
        self.boundary_samples
            .unwrap_or_else(|| hardyliou::series::default_boundary_samples(self.truncation))
    }

    pub fn symbol(&self) -> Result<TaylorPolynomial, Diagnostics> {
        series("symbol", &self.symbol)
    }

    pub fn phi(&self) -> Result<TaylorPolynomial, Diagnostics> {
        series("phi", self.phi.as_deref().unwrap_or(&[]))
    }
}

fn check_numbers(field: &str, values: &[Number], d: &mut Vec<String>) {
    for (k, v) in values.iter().enumerate() {
        let z = v.value();
        if !(z.re.is_finite() && z.im.is_finite()) {
            d.push(format!("{field}[{k}]: non-finite value"));
        }
    }
}

fn series(field: &str, values: &[Number]) -> Result<TaylorPolynomial, Diagnostics> {
    TaylorPolynomial::new(values.iter().map(|v| v.value()).collect())
        .map_err(|e| Diagnostics(vec![format!("{field}: {e}")]))
}
