//! Continuous maps from irregular samples by adaptive-bandwidth
//! Nadaraya–Watson kernel regression, plus PNG export.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorspace::{hsl_to_rgb, Hsl, Rgb};
use crate::data::NormalizedTable;

/// Pixels with no numerical kernel support.
pub const BACKGROUND: Rgb = Rgb::new(200, 200, 200);
/// Kernel denominators below this count as no support.
pub const MIN_DENOMINATOR: f64 = 1e-300;
/// `exp(-x)` is exactly zero in f64 for `x` above this.
const EXP_UNDERFLOW: f64 = 746.0;

pub const HEATMAP_L_LIGHT: f64 = 0.9;
pub const HEATMAP_L_SPAN: f64 = 0.6;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("need more than {k} samples for k-nearest-neighbour bandwidths, got {m}")]
    TooFewSamples { m: usize, k: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid kernel configuration: {0}")]
    InvalidKernel(String),
    #[error("attribute index {0} out of range")]
    UnknownAttribute(usize),
    #[error("png encoding: {0}")]
    Encoding(#[from] png::EncodingError),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub k_neighbors: usize,
    pub kernel: KernelKind,
    pub bandwidth_scale: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { k_neighbors: 8, kernel: KernelKind::Gaussian, bandwidth_scale: 1.0 }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.k_neighbors < 1 {
            return Err(RenderError::InvalidKernel("k_neighbors must be >= 1".into()));
        }
        if !(self.bandwidth_scale > 0.0 && self.bandwidth_scale.is_finite()) {
            return Err(RenderError::InvalidKernel(format!("bandwidth_scale {}", self.bandwidth_scale)));
        }
        Ok(())
    }
}

/// Axis-aligned extent in dataset units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Extent {
    /// Bounding box of `points`, padded by `pad` of its larger side. A
    /// degenerate box is widened to unit size.
    pub fn around(points: &[[f64; 2]], pad: f64) -> Self {
        let mut e = Extent { x_min: f64::INFINITY, y_min: f64::INFINITY, x_max: f64::NEG_INFINITY, y_max: f64::NEG_INFINITY };
        for p in points {
            e.x_min = e.x_min.min(p[0]);
            e.x_max = e.x_max.max(p[0]);
            e.y_min = e.y_min.min(p[1]);
            e.y_max = e.y_max.max(p[1]);
        }
        if points.is_empty() {
            return Extent { x_min: 0.0, y_min: 0.0, x_max: 1.0, y_max: 1.0 };
        }
        let side = (e.x_max - e.x_min).max(e.y_max - e.y_min);
        let margin = if side > 0.0 { pad * side } else { 0.5 };
        Extent { x_min: e.x_min - margin, y_min: e.y_min - margin, x_max: e.x_max + margin, y_max: e.y_max + margin }
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    fn is_valid(&self) -> bool {
        self.x_max > self.x_min && self.y_max > self.y_min && self.diagonal().is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub extent: Extent,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidGrid(format!("{}x{}", self.width, self.height)));
        }
        if !self.extent.is_valid() {
            return Err(RenderError::InvalidGrid(format!("degenerate extent {:?}", self.extent)));
        }
        Ok(())
    }

    /// Center of pixel `(col, row)`; row 0 is the top edge (`y_max`).
    pub fn pixel_center(&self, col: usize, row: usize) -> [f64; 2] {
        let e = &self.extent;
        [
            e.x_min + (col as f64 + 0.5) / self.width as f64 * (e.x_max - e.x_min),
            e.y_max - (row as f64 + 0.5) / self.height as f64 * (e.y_max - e.y_min),
        ]
    }

    /// Pixel containing `p`, if inside the extent.
    pub fn pixel_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let e = &self.extent;
        let u = (p[0] - e.x_min) / (e.x_max - e.x_min);
        let v = (e.y_max - p[1]) / (e.y_max - e.y_min);
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
            return None;
        }
        Some(((u * self.width as f64) as usize, (v * self.height as f64) as usize))
    }
}

/// Row-major RGB raster with its geographic extent.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterField {
    pub width: usize,
    pub height: usize,
    pub extent: Extent,
    pub pixels: Vec<Rgb>,
}

impl RasterField {
    pub fn filled(grid: &GridSpec, color: Rgb) -> Self {
        Self { width: grid.width, height: grid.height, extent: grid.extent, pixels: vec![color; grid.width * grid.height] }
    }

    pub fn get(&self, col: usize, row: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, c: Rgb) {
        self.pixels[row * self.width + col] = c;
    }

    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.channels()).collect()
    }
}

/// Bandwidth of each sample: `bandwidth_scale` times the distance to its
/// k-th nearest neighbour, floored at `1e-6` of the sample extent diagonal.
pub fn adaptive_bandwidths(locations: &[[f64; 2]], cfg: &KernelConfig) -> Result<Vec<f64>, RenderError> {
    cfg.validate()?;
    let m = locations.len();
    let k = cfg.k_neighbors;
    if m <= k {
        return Err(RenderError::TooFewSamples { m, k });
    }
    let diag = Extent::around(locations, 0.0).diagonal();
    let floor = if diag > 0.0 && locations.iter().any(|p| *p != locations[0]) { 1e-6 * diag } else { 1e-6 };
    Ok(locations
        .par_iter()
        .enumerate()
        .map_init(
            || Vec::with_capacity(m),
            |dists, (i, p)| {
                dists.clear();
                dists.extend(
                    locations.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| (p[0] - q[0]).hypot(p[1] - q[1])),
                );
                let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
                (cfg.bandwidth_scale * *kth).max(floor)
            },
        )
        .collect())
}

/// Gaussian kernel weight of a sample at squared distance `d2` with bandwidth `h`.
#[inline]
fn gaussian(d2: f64, h: f64) -> f64 {
    let x = 0.5 * d2 / (h * h);
    if x > EXP_UNDERFLOW {
        0.0
    } else {
        (-x).exp()
    }
}

/// Normalized kernel weights of every sample at `x`, or `None` where the
/// denominator is below [`MIN_DENOMINATOR`].
pub fn kernel_weights_at(x: [f64; 2], locations: &[[f64; 2]], bandwidths: &[f64]) -> Option<Vec<f64>> {
    let raw: Vec<f64> = locations
        .iter()
        .zip(bandwidths)
        .map(|(p, &h)| gaussian((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2), h))
        .collect();
    let total: f64 = raw.iter().sum();
    (total >= MIN_DENOMINATOR).then(|| raw.into_iter().map(|w| w / total).collect())
}

/// Nadaraya–Watson estimate of `D`-channel sample values at every pixel.
/// Samples are summed in index order at each pixel.
fn regress<const D: usize>(
    locations: &[[f64; 2]],
    values: &[[f64; D]],
    bandwidths: &[f64],
    grid: &GridSpec,
) -> Vec<Option<[f64; D]>> {
    (0..grid.height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..grid.width).map(move |col| {
                let x = grid.pixel_center(col, row);
                let mut num = [0.0; D];
                let mut den = 0.0;
                for ((p, v), &h) in locations.iter().zip(values).zip(bandwidths) {
                    let w = gaussian((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2), h);
                    if w == 0.0 {
                        continue;
                    }
                    den += w;
                    for c in 0..D {
                        num[c] += w * v[c];
                    }
                }
                (den >= MIN_DENOMINATOR).then(|| num.map(|v| v / den))
            })
        })
        .collect()
}

fn check_lengths(m: usize, others: &[(&str, usize)]) -> Result<(), RenderError> {
    for (what, len) in others {
        if *len != m {
            return Err(RenderError::LengthMismatch(format!("{m} locations but {len} {what}")));
        }
    }
    Ok(())
}

/// Blends sample colors over the grid in Cartesian `(s·cos h, s·sin h, l)`
/// coordinates and converts back through HSL to RGB.
pub fn akde_render(
    locations: &[[f64; 2]],
    colors: &[Hsl],
    bandwidths: &[f64],
    grid: &GridSpec,
) -> Result<RasterField, RenderError> {
    check_lengths(locations.len(), &[("colors", colors.len()), ("bandwidths", bandwidths.len())])?;
    grid.validate()?;
    let blend: Vec<[f64; 3]> = colors.iter().map(|c| c.to_blend()).collect();
    let field = regress(locations, &blend, bandwidths, grid);
    let pixels = field
        .into_iter()
        .map(|u| u.map_or(BACKGROUND, |u| hsl_to_rgb(Hsl::from_blend(u))))
        .collect();
    Ok(RasterField { width: grid.width, height: grid.height, extent: grid.extent, pixels })
}

/// Kernel-regressed scalar field; `None` marks pixels without support.
pub fn akde_scalar(
    locations: &[[f64; 2]],
    values: &[f64],
    bandwidths: &[f64],
    grid: &GridSpec,
) -> Result<Vec<Option<f64>>, RenderError> {
    check_lengths(locations.len(), &[("values", values.len()), ("bandwidths", bandwidths.len())])?;
    grid.validate()?;
    let vals: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
    Ok(regress(locations, &vals, bandwidths, grid).into_iter().map(|o| o.map(|[v]| v)).collect())
}

/// Lightness of a heat-map pixel for a normalized value.
pub fn heatmap_lightness(v: f64) -> f64 {
    HEATMAP_L_LIGHT - HEATMAP_L_SPAN * v
}

/// Single-attribute map tinted with `base`: low values light, high dark.
pub fn attribute_heatmap(
    norm: &NormalizedTable,
    attr: usize,
    base: Hsl,
    grid: &GridSpec,
    cfg: &KernelConfig,
) -> Result<RasterField, RenderError> {
    let locations = norm.source().locations();
    let bandwidths = adaptive_bandwidths(locations, cfg)?;
    attribute_heatmap_with(norm, attr, base, grid, &bandwidths)
}

/// As [`attribute_heatmap`] with precomputed bandwidths.
pub fn attribute_heatmap_with(
    norm: &NormalizedTable,
    attr: usize,
    base: Hsl,
    grid: &GridSpec,
    bandwidths: &[f64],
) -> Result<RasterField, RenderError> {
    if attr >= norm.n_attributes() {
        return Err(RenderError::UnknownAttribute(attr));
    }
    let values = norm.column(attr);
    let field = akde_scalar(norm.source().locations(), &values, bandwidths, grid)?;
    let pixels = field
        .into_iter()
        .map(|v| v.map_or(BACKGROUND, |v| hsl_to_rgb(Hsl::new(base.h, base.s, heatmap_lightness(v)))))
        .collect();
    Ok(RasterField { width: grid.width, height: grid.height, extent: grid.extent, pixels })
}

/// 8-bit RGB, non-interlaced PNG bytes.
pub fn encode_png(field: &RasterField) -> Result<Vec<u8>, RenderError> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, field.width as u32, field.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&field.to_rgb_bytes())?;
        writer.finish()?;
    }
    Ok(buf)
}

pub fn export_png(field: &RasterField, path: impl AsRef<Path>) -> Result<(), RenderError> {
    let bytes = encode_png(field)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}
