//! Run configuration: TOML file, dotted `--set` overrides, validation with
//! the first failing key reported.

use std::path::Path;

use mixnl::{OrderBookkeeping, PowerNonlinearity, QuadratureOptions, SpectralMeasure};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub omega: [f64; 2],
    pub collar_radius: f64,
    pub n_in: usize,
    pub n_ext: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            omega: [-1.0, 1.0],
            collar_radius: 8.0,
            n_in: 128,
            n_ext: 32,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub near_singular_subdivisions: usize,
    pub far_field_order: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let d = QuadratureOptions::default();
        QuadratureConfig {
            near_singular_subdivisions: d.near_singular_subdivisions,
            far_field_order: d.far_field_order,
            tol: d.tol,
        }
    }
}

/// Density reduced to quadrature atoms; `kind` is "constant" or "power"
/// (weight * s^exponent).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub kind: String,
    pub weight: f64,
    pub exponent: f64,
    pub nodes: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            kind: "constant".into(),
            weight: 1.0,
            exponent: 0.0,
            nodes: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    /// Atom list [[s, weight], ...]; empty with no density means mu = 0.
    pub atoms: Vec<[f64; 2]>,
    pub density: Option<DensityConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub a: f64,
    pub p: f64,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        NonlinearityConfig { a: 1.0, p: 4.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Radius of the small sphere in the geometry certificates.
    pub rho: f64,
    /// Random directions / samples per certificate.
    pub n_dirs: usize,
    pub path_points: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Newton seeds for the linking search.
    pub seeds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 0.1,
            n_dirs: 30,
            path_points: 40,
            max_iter: 60,
            tol: 1e-11,
            seeds: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub quadrature: QuadratureConfig,
    pub measure: MeasureConfig,
    pub alpha: f64,
    pub lambda: f64,
    pub nonlinearity: NonlinearityConfig,
    pub solver: SolverConfig,
    pub n_eigs: usize,
    pub seed: u64,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshConfig::default(),
            quadrature: QuadratureConfig::default(),
            measure: MeasureConfig {
                atoms: vec![[0.5, 1.0]],
                density: None,
            },
            alpha: 1.0,
            lambda: 0.0,
            nonlinearity: NonlinearityConfig::default(),
            solver: SolverConfig::default(),
            n_eigs: 8,
            seed: 7,
            output_dir: "out".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: toml::Value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| bad("config", format!("cannot read {}: {e}", p.display())))?;
                text.parse()
                    .map_err(|e| bad("config", format!("invalid TOML: {e}")))?
            }
            None => toml::Value::Table(Default::default()),
        };
        for kv in overrides {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| bad(kv, "override must be key=value"))?;
            apply_set(&mut doc, key.trim(), value.trim())?;
        }
        let config: RunConfig = doc
            .try_into()
            .map_err(|e| bad("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Every precondition of the downstream modules, checked in declaration
    /// order so that the first failing key is reported.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let [a, b] = self.mesh.omega;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(bad("mesh.omega", format!("need finite x_l < x_r, got [{a}, {b}]")));
        }
        mixnl::build_mesh(
            (a, b),
            self.mesh.collar_radius,
            self.mesh.n_in,
            self.mesh.n_ext,
        )
        .map_err(|e| bad("mesh", e.to_string()))?;
        self.quadrature_options()
            .validate()
            .map_err(|e| bad("quadrature", e.to_string()))?;
        let measure = self.spectral_measure().map_err(|e| bad("measure", e.to_string()))?;
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(bad("alpha", format!("must be finite and >= 0, got {}", self.alpha)));
        }
        let bookkeeping =
            mixnl::s_sharp(&measure, self.alpha).map_err(|e| bad("alpha", e.to_string()))?;
        if !self.lambda.is_finite() {
            return Err(bad("lambda", "must be finite"));
        }
        let nl = self.power_nonlinearity().map_err(|e| bad("nonlinearity", e.to_string()))?;
        if nl.p >= bookkeeping.critical_exponent {
            return Err(bad(
                "nonlinearity.p",
                format!(
                    "p = {} reaches the critical exponent {}",
                    nl.p, bookkeeping.critical_exponent
                ),
            ));
        }
        if !(self.solver.rho > 0.0) {
            return Err(bad("solver.rho", "must be positive"));
        }
        if self.solver.n_dirs == 0 {
            return Err(bad("solver.n_dirs", "must be at least 1"));
        }
        if self.solver.path_points < 4 {
            return Err(bad("solver.path_points", "must be at least 4"));
        }
        if self.solver.max_iter == 0 {
            return Err(bad("solver.max_iter", "must be at least 1"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(bad("solver.tol", "must be positive"));
        }
        if self.solver.seeds == 0 {
            return Err(bad("solver.seeds", "must be at least 1"));
        }
        if self.n_eigs == 0 {
            return Err(bad("n_eigs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn spectral_measure(&self) -> mixnl::Result<SpectralMeasure> {
        match &self.measure.density {
            Some(d) => {
                let weight = d.weight;
                let exponent = d.exponent;
                match d.kind.as_str() {
                    "constant" => SpectralMeasure::from_density(|_| weight, d.nodes),
                    "power" => SpectralMeasure::from_density(|s| weight * s.powf(exponent), d.nodes),
                    other => Err(mixnl::Error::Config(format!(
                        "unknown density kind `{other}` (expected constant|power)"
                    ))),
                }
            }
            None if self.measure.atoms.is_empty() => Ok(SpectralMeasure::zero()),
            None => {
                let atoms: Vec<(f64, f64)> =
                    self.measure.atoms.iter().map(|&[s, c]| (s, c)).collect();
                SpectralMeasure::from_atoms(&atoms)
            }
        }
    }

    pub fn quadrature_options(&self) -> QuadratureOptions {
        QuadratureOptions {
            near_singular_subdivisions: self.quadrature.near_singular_subdivisions,
            far_field_order: self.quadrature.far_field_order,
            tol: self.quadrature.tol,
        }
    }

    pub fn power_nonlinearity(&self) -> mixnl::Result<PowerNonlinearity> {
        PowerNonlinearity::new(self.nonlinearity.a, self.nonlinearity.p)
    }

    pub fn bookkeeping(&self) -> mixnl::Result<OrderBookkeeping> {
        mixnl::s_sharp(&self.spectral_measure()?, self.alpha)
    }
}

/// Sets `key` (dotted path) in a TOML document, creating tables on the way.
/// The value is parsed as a TOML literal, falling back to a plain string.
fn apply_set(doc: &mut toml::Value, key: &str, value: &str) -> Result<(), ConfigError> {
    if key.is_empty() {
        return Err(bad(key, "empty key"));
    }
    let parsed: toml::Value = format!("v = {value}")
        .parse::<toml::Value>()
        .ok()
        .and_then(|t| t.get("v").cloned())
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| bad(key, format!("`{part}` is not a table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| bad(key, "parent is not a table"))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn set_overrides_nested_keys() {
        let cfg = RunConfig::load(
            None,
            &[
                "lambda=0.5".into(),
                "mesh.n_in=64".into(),
                "measure.atoms=[[0.3,1.0],[0.7,2.0]]".into(),
                "output_dir=results".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.lambda, 0.5);
        assert_eq!(cfg.mesh.n_in, 64);
        assert_eq!(cfg.measure.atoms.len(), 2);
        assert_eq!(cfg.output_dir, "results");
    }

    #[test]
    fn first_failing_key_is_reported() {
        let err = RunConfig::load(None, &["mesh.n_in=0".into(), "alpha=-1".into()]).unwrap_err();
        assert!(err.key.starts_with("mesh"), "got key {}", err.key);
    }

    #[test]
    fn degenerate_operator_rejected() {
        let err = RunConfig::load(None, &["alpha=0.0".into(), "measure.atoms=[]".into()])
            .unwrap_err();
        assert_eq!(err.key, "alpha");
    }

    #[test]
    fn supercritical_exponent_rejected() {
        // alpha = 0 with a single atom at s = 0.3: 2*_{s#} = 2/(1-2*0.3) = 5
        let err = RunConfig::load(
            None,
            &[
                "alpha=0.0".into(),
                "measure.atoms=[[0.3,1.0]]".into(),
                "nonlinearity.p=6.0".into(),
            ],
        )
        .unwrap_err();
        assert_eq!(err.key, "nonlinearity.p");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::load(None, &["mesh.bogus=1".into()]).is_err());
    }

    #[test]
    fn density_reduces_to_atoms() {
        let cfg = RunConfig::load(
            None,
            &[
                "measure.atoms=[]".into(),
                "measure.density={kind=\"constant\",weight=1.0,exponent=0.0,nodes=8}".into(),
            ],
        )
        .unwrap();
        let mu = cfg.spectral_measure().unwrap();
        assert_eq!(mu.atoms().len(), 8);
        assert!((mu.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roundtrips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = text.parse::<toml::Value>().unwrap().try_into().unwrap();
        assert_eq!(toml::to_string_pretty(&back).unwrap(), text);
    }
}
