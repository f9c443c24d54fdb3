//! JSON run configuration with documented defaults. Unknown keys are
//! rejected so typos fail loudly.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub views: ViewConfig,
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewConfig {
    pub n_azimuth: usize,
    pub elevations_deg: Vec<f64>,
    pub resolution: u32,
    pub background: [f64; 3],
    pub fov_deg: f64,
    pub margin: f64,
}

impl Default for ViewConfig {
    fn default() -> Self {
        ViewConfig {
            n_azimuth: 8,
            elevations_deg: vec![20.0, -20.0],
            resolution: 512,
            background: [1.0, 1.0, 1.0],
            fov_deg: 45.0,
            margin: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub iou_samples: usize,
    pub cd_hd_samples: usize,
    /// Optional path to a convolutional feature-extractor weights file for
    /// LPIPS; without it the built-in surrogate pyramid extractor is used.
    pub lpips_extractor_path: Option<PathBuf>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            iou_samples: 100_000,
            cd_hd_samples: 10_000,
            lpips_extractor_path: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, super::HarnessError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| super::HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), super::HarnessError> {
        let fail = |msg: &str| Err(super::HarnessError::Config(msg.to_string()));
        if self.views.n_azimuth == 0 {
            return fail("views.n_azimuth must be >= 1");
        }
        if self.views.elevations_deg.is_empty() {
            return fail("views.elevations_deg must not be empty");
        }
        if self.views.resolution == 0 {
            return fail("views.resolution must be >= 1");
        }
        if !(self.views.fov_deg > 0.0 && self.views.fov_deg < 180.0) {
            return fail("views.fov_deg must be in (0, 180)");
        }
        if !(self.views.margin >= 1.0) {
            return fail("views.margin must be >= 1");
        }
        if self
            .views
            .background
            .iter()
            .any(|c| !(0.0..=1.0).contains(c))
        {
            return fail("views.background channels must be in [0, 1]");
        }
        if self.metrics.iou_samples == 0 || self.metrics.cd_hd_samples == 0 {
            return fail("metrics sample counts must be >= 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_object() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.views.n_azimuth * cfg.views.elevations_deg.len(), 16);
    }

    #[test]
    fn partial_override() {
        let cfg = RunConfig::from_json(
            r#"{"seed": 7, "views": {"resolution": 128}, "metrics": {"iou_samples": 5000}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.views.resolution, 128);
        assert_eq!(cfg.views.n_azimuth, 8);
        assert_eq!(cfg.metrics.iou_samples, 5000);
        assert_eq!(cfg.metrics.cd_hd_samples, 10_000);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"sede": 7}"#).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_json(r#"{"views": {"n_azimuth": 0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"views": {"fov_deg": 220.0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"metrics": {"iou_samples": 0}}"#).is_err());
    }
}
