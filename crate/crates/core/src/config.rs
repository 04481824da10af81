//! Session configuration shared by the CLI, the HTTP service and the FFI.

use serde::{Deserialize, Serialize};

use crate::colorspace::{DEFAULT_LIGHTNESS, DEFAULT_L_RANGE};
use crate::data::WeightMode;
use crate::layout::DistanceMetric;
use crate::render::KernelConfig;
use crate::warp::{WarpKind, WarpMode, DEFAULT_PERCENTILE, DEFAULT_SCALE_K, DEFAULT_SHRINK};

/// Largest raster side accepted from a config.
pub const MAX_GRID_SIDE: usize = 8192;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub warp_mode: WarpKind,
    pub shrink: f64,
    pub percentile: f64,
    pub ellipse_scale_k: f64,
    pub lightness: f64,
    pub intensity_on: bool,
    pub l_range: (f64, f64),
    pub kernel: KernelConfig,
    /// Map raster `(width, height)`.
    pub grid: (usize, usize),
    pub weight_mode: WeightMode,
    pub metric: DistanceMetric,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            warp_mode: WarpKind::None,
            shrink: DEFAULT_SHRINK,
            percentile: DEFAULT_PERCENTILE,
            ellipse_scale_k: DEFAULT_SCALE_K,
            lightness: DEFAULT_LIGHTNESS,
            intensity_on: false,
            l_range: DEFAULT_L_RANGE,
            kernel: KernelConfig::default(),
            grid: (512, 512),
            weight_mode: WeightMode::RawSum,
            metric: DistanceMetric::OneMinusAbsCorr,
        }
    }
}

impl SessionConfig {
    pub fn warp(&self) -> WarpMode {
        WarpMode { kind: self.warp_mode, shrink: self.shrink, percentile: self.percentile }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.warp().validate().map_err(|e| ConfigError(e.to_string()))?;
        if !(self.ellipse_scale_k > 0.0 && self.ellipse_scale_k.is_finite()) {
            return Err(ConfigError(format!("ellipse_scale_k {} must be positive", self.ellipse_scale_k)));
        }
        if !(0.0..=1.0).contains(&self.lightness) {
            return Err(ConfigError(format!("lightness {} not in [0, 1]", self.lightness)));
        }
        let (lo, hi) = self.l_range;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(ConfigError(format!("l_range ({lo}, {hi}) must satisfy 0 <= min < max <= 1")));
        }
        self.kernel.validate().map_err(|e| ConfigError(e.to_string()))?;
        let (w, h) = self.grid;
        if w == 0 || h == 0 || w > MAX_GRID_SIDE || h > MAX_GRID_SIDE {
            return Err(ConfigError(format!("grid {w}x{h} out of range")));
        }
        Ok(())
    }

    /// Applies a partial JSON object on top of this config. Nested objects
    /// (`kernel`) merge field by field.
    pub fn merged(&self, patch: &serde_json::Value) -> Result<Self, PatchError> {
        let patch = patch.as_object().ok_or_else(|| PatchError::Malformed("patch must be a JSON object".into()))?;
        let mut base = serde_json::to_value(self).expect("config serializes");
        let obj = base.as_object_mut().expect("config is an object");
        for (k, v) in patch {
            match (obj.get_mut(k), v) {
                (Some(serde_json::Value::Object(dst)), serde_json::Value::Object(src)) => {
                    for (kk, vv) in src {
                        dst.insert(kk.clone(), vv.clone());
                    }
                }
                _ => {
                    obj.insert(k.clone(), v.clone());
                }
            }
        }
        let next: SessionConfig = serde_json::from_value(base).map_err(|e| PatchError::Malformed(e.to_string()))?;
        next.validate().map_err(PatchError::Invalid)?;
        Ok(next)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PatchError {
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error(transparent)]
    Invalid(ConfigError),
}
