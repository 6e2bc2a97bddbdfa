use std::f64::consts::PI;

use holo_mimo::capacity::Normalization;
use holo_mimo::geometry::PlanarArray;
use holo_mimo::spectra::{AngularBox, SpectralFactor, VmfCluster};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Variances,
    Eigenvalues,
    CapacityVsSpacing,
    CapacityVsSnr,
    Estimate,
    Generate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_output")]
    pub output: String,
    pub receive: ArraySpec,
    /// Defaults to the receive array.
    pub source: Option<ArraySpec>,
    #[serde(default)]
    pub spectrum: Vec<SpectrumSpec>,
    #[serde(default)]
    pub sweep: SweepSpec,
}

fn default_trials() -> usize {
    100
}

fn default_output() -> String {
    "out".into()
}

/// Lengths and spacings are in wavelengths.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    pub length: Option<f64>,
    pub length_x: Option<f64>,
    pub length_y: Option<f64>,
    pub spacing: Option<f64>,
    pub spacing_x: Option<f64>,
    pub spacing_y: Option<f64>,
    #[serde(default = "one")]
    pub wavelength: f64,
    #[serde(default)]
    pub z_plane: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    Isotropic,
    Vmf,
    ClusterUniform,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub name: String,
    pub kind: SpectrumKind,
    #[serde(default)]
    pub clusters: Vec<ClusterSpec>,
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
}

/// Angles in degrees. Exactly one of `circular_variance` and `concentration`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub weight: f64,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
    pub circular_variance: Option<f64>,
    pub concentration: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub phi_min_deg: f64,
    pub phi_max_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenModel {
    Fourier,
    Clarke,
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityKind {
    CsirMc,
    CsirAsymptotic,
    CsitMc,
    IidAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GenerationPath {
    #[default]
    Series,
    Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointNorm {
    #[default]
    SourceCount,
    PerSide,
}

impl From<FixedPointNorm> for Normalization {
    fn from(n: FixedPointNorm) -> Self {
        match n {
            FixedPointNorm::SourceCount => Normalization::SourceCount,
            FixedPointNorm::PerSide => Normalization::PerSide,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Antenna spacings in wavelengths.
    #[serde(default)]
    pub spacings: Vec<f64>,
    #[serde(default)]
    pub models: Vec<EigenModel>,
    #[serde(default)]
    pub capacities: Vec<CapacityKind>,
    #[serde(default = "default_fraction")]
    pub significant_fraction: f64,
    #[serde(default)]
    pub normalization: FixedPointNorm,
    #[serde(default)]
    pub path: GenerationPath,
    /// Entries below this share of the largest variance are left out of the
    /// estimator error summary.
    #[serde(default = "default_floor")]
    pub estimate_floor: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            spacings: Vec::new(),
            models: Vec::new(),
            capacities: Vec::new(),
            significant_fraction: default_fraction(),
            normalization: FixedPointNorm::default(),
            path: GenerationPath::default(),
            estimate_floor: default_floor(),
        }
    }
}

fn default_fraction() -> f64 {
    0.997
}

fn default_floor() -> f64 {
    1e-3
}

impl ArraySpec {
    pub fn build(&self, field: &str, spacing_override: Option<f64>) -> Result<PlanarArray<f64>, ConfigError> {
        let lx = self.length_x.or(self.length).ok_or_else(|| invalid(format!("{field}.length"), "missing"))?;
        let ly = self.length_y.or(self.length).ok_or_else(|| invalid(format!("{field}.length"), "missing"))?;
        let (dx, dy) = match spacing_override {
            Some(d) => (d, d),
            None => (
                self.spacing_x.or(self.spacing).ok_or_else(|| invalid(format!("{field}.spacing"), "missing"))?,
                self.spacing_y.or(self.spacing).ok_or_else(|| invalid(format!("{field}.spacing"), "missing"))?,
            ),
        };
        let w = self.wavelength;
        PlanarArray::new(lx * w, ly * w, dx * w, dy * w, self.z_plane * w, w).map_err(|e| invalid(field, e.to_string()))
    }
}

impl SpectrumSpec {
    pub fn build(&self, field: &str) -> Result<SpectralFactor<f64>, ConfigError> {
        let deg = PI / 180.0;
        match self.kind {
            SpectrumKind::Isotropic => {
                if !self.clusters.is_empty() || !self.boxes.is_empty() {
                    return Err(invalid(field, "isotropic spectrum takes no clusters or boxes"));
                }
                Ok(SpectralFactor::Isotropic)
            }
            SpectrumKind::Vmf => {
                if self.clusters.is_empty() {
                    return Err(invalid(format!("{field}.clusters"), "at least one cluster required"));
                }
                let mut out = Vec::new();
                for (i, c) in self.clusters.iter().enumerate() {
                    let f = format!("{field}.clusters[{i}]");
                    let cluster = match (c.circular_variance, c.concentration) {
                        (Some(v), None) => {
                            VmfCluster::from_circular_variance(c.weight, c.elevation_deg * deg, c.azimuth_deg * deg, v)
                        }
                        (None, Some(a)) => VmfCluster::new(c.weight, c.elevation_deg * deg, c.azimuth_deg * deg, a),
                        _ => return Err(invalid(f, "give exactly one of circular_variance and concentration")),
                    };
                    out.push(cluster.map_err(|e| invalid(f, e.to_string()))?);
                }
                SpectralFactor::vmf_mixture(out).map_err(|e| invalid(format!("{field}.clusters"), e.to_string()))
            }
            SpectrumKind::ClusterUniform => {
                if self.boxes.is_empty() {
                    return Err(invalid(format!("{field}.boxes"), "at least one box required"));
                }
                let mut out = Vec::new();
                for (i, b) in self.boxes.iter().enumerate() {
                    let r = AngularBox::new(
                        b.theta_min_deg * deg,
                        b.theta_max_deg * deg,
                        b.phi_min_deg * deg,
                        b.phi_max_deg * deg,
                    )
                    .map_err(|e| invalid(format!("{field}.boxes[{i}]"), e.to_string()))?;
                    out.push(r);
                }
                SpectralFactor::cluster_uniform(out).map_err(|e| invalid(format!("{field}.boxes"), e.to_string()))
            }
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn source_spec(&self) -> &ArraySpec {
        self.source.as_ref().unwrap_or(&self.receive)
    }

    /// Everything checkable without running the experiment.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.output.is_empty() {
            return Err(invalid("output", "must not be empty"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(invalid("snr_db", "values must be finite"));
        }
        if !(self.sweep.significant_fraction > 0.0 && self.sweep.significant_fraction <= 1.0) {
            return Err(invalid("sweep.significant_fraction", "must lie in (0, 1]"));
        }
        if !(self.sweep.estimate_floor >= 0.0 && self.sweep.estimate_floor < 1.0) {
            return Err(invalid("sweep.estimate_floor", "must lie in [0, 1)"));
        }
        if self.sweep.spacings.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(invalid("sweep.spacings", "values must be positive"));
        }
        self.receive.build("receive", None)?;
        self.source_spec().build("source", None)?;
        for &d in &self.sweep.spacings {
            self.receive.build("receive", Some(d))?;
            self.source_spec().build("source", Some(d))?;
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, s) in self.spectrum.iter().enumerate() {
            s.build(&format!("spectrum[{i}]"))?;
            if !names.insert(s.name.as_str()) {
                return Err(invalid(format!("spectrum[{i}].name"), format!("duplicate name `{}`", s.name)));
            }
            if s.name.is_empty() || s.name.contains(',') {
                return Err(invalid(format!("spectrum[{i}].name"), "must be non-empty without commas"));
            }
        }
        let needs_spectrum = match self.experiment {
            Experiment::Eigenvalues => self.sweep.models.contains(&EigenModel::Fourier),
            Experiment::CapacityVsSpacing | Experiment::CapacityVsSnr => self
                .sweep
                .capacities
                .iter()
                .any(|c| *c != CapacityKind::IidAsymptotic),
            _ => true,
        };
        if needs_spectrum && self.spectrum.is_empty() {
            return Err(invalid("spectrum", "at least one spectrum required for this experiment"));
        }
        match self.experiment {
            Experiment::Eigenvalues => {
                if self.sweep.models.is_empty() {
                    return Err(invalid("sweep.models", "list at least one of fourier, clarke, iid"));
                }
            }
            Experiment::CapacityVsSpacing => {
                if self.sweep.spacings.is_empty() {
                    return Err(invalid("sweep.spacings", "list at least one spacing"));
                }
                if self.snr_db.len() != 1 {
                    return Err(invalid("snr_db", "capacity-vs-spacing takes exactly one snr"));
                }
                if self.sweep.capacities.is_empty() {
                    return Err(invalid("sweep.capacities", "list at least one capacity kind"));
                }
            }
            Experiment::CapacityVsSnr => {
                if self.snr_db.is_empty() {
                    return Err(invalid("snr_db", "list at least one snr"));
                }
                if self.sweep.capacities.is_empty() {
                    return Err(invalid("sweep.capacities", "list at least one capacity kind"));
                }
            }
            Experiment::Variances | Experiment::Estimate | Experiment::Generate => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
experiment = "variances"
[receive]
length = 4
spacing = 0.5
[[spectrum]]
name = "iso"
kind = "isotropic"
"#;

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.experiment, Experiment::Variances);
        assert_eq!(c.trials, 100);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.source_spec().length, Some(4.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("spacing = 0.5", "spacing = 0.5\nspacingg = 1");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Parse(_))));
        let text = format!("colour = 1\n{MINIMAL}");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("schema_version"), "{err}");
    }

    #[test]
    fn bad_cluster_names_the_field() {
        let text = MINIMAL.replace(
            "kind = \"isotropic\"",
            "kind = \"vmf\"\nclusters = [{ weight = 1.0, elevation_deg = 10, azimuth_deg = 0 }]",
        );
        let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("spectrum[0].clusters[0]"), "{err}");
    }

    #[test]
    fn negative_spacing_is_rejected() {
        let text = MINIMAL.replace("spacing = 0.5", "spacing = -0.5");
        let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("receive"), "{err}");
    }
}
