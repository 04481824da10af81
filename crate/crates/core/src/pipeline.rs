//! The full table → layout → warp → colors → raster pipeline with lazy,
//! per-stage caching.
//!
//! Each stage is keyed by the subset of [`SessionConfig`] it depends on, so
//! changing the lightness recolors without re-running PCA, and changing the
//! warp never touches the attribute heat maps. Locks are held only while
//! looking up or storing a stage; computation runs unlocked so cached
//! artifacts stay readable during a long render.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use parking_lot::Mutex;
use serde::Serialize;

use crate::colorspace::{apply_intensity, disc_to_hsl, hsl_to_rgb, ColorError, Hsl, Rgb};
use crate::config::{ConfigError, SessionConfig};
use crate::data::{normalize, DataError, DataTable, NormalizedTable, WeightMode};
use crate::layout::{attribute_distances, gbc_embed, order_attributes, CyclicOrder, DistanceMatrix, DistanceMetric, LayoutError, LayoutModel};
use crate::legend::{legend_payload, render_legend, LegendPayload, LEGEND_SIZE};
use crate::render::{adaptive_bandwidths, akde_render, attribute_heatmap_with, encode_png, Extent, GridSpec, KernelConfig, RasterField, RenderError};
use crate::warp::{apply_warp, fit_ellipse, EllipseModel, WarpError, WarpMode};

/// Fraction of the sample bounding box added on each side of the map.
pub const MAP_PADDING: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("sample {0} out of range")]
    UnknownSample(usize),
    #[error("failed to write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl PipelineError {
    /// Whether the failure came from writing output rather than from the
    /// data or configuration.
    pub fn is_io(&self) -> bool {
        matches!(self, PipelineError::Output { .. } | PipelineError::Render(RenderError::IoFailure(_)))
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone)]
pub struct LayoutStage {
    pub distances: DistanceMatrix,
    pub ordering: CyclicOrder,
    pub model: LayoutModel,
}

#[derive(Debug, Clone)]
pub struct WarpStage {
    pub ellipse: EllipseModel,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct Image {
    pub field: RasterField,
    pub png: Vec<u8>,
}

impl Image {
    fn encode(field: RasterField) -> Result<Self> {
        let png = encode_png(&field)?;
        Ok(Self { field, png })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LayoutKey(WeightMode, DistanceMetric);

#[derive(Debug, Clone, PartialEq)]
struct WarpKey(LayoutKey, WarpMode, f64);

#[derive(Debug, Clone, PartialEq)]
struct ColorKey(WarpKey, f64, Option<(f64, f64)>);

#[derive(Debug, Clone, PartialEq)]
struct MapKey(ColorKey, KernelConfig, (usize, usize));

#[derive(Debug, Clone, PartialEq)]
struct HeatKey(LayoutKey, f64, KernelConfig, (usize, usize));

type Slot<K, T> = Option<(K, Arc<T>)>;

#[derive(Default)]
struct Cache {
    norm: Slot<WeightMode, NormalizedTable>,
    layout: Slot<LayoutKey, LayoutStage>,
    warp: Slot<WarpKey, WarpStage>,
    colors: Slot<ColorKey, Vec<Hsl>>,
    bandwidths: Slot<KernelConfig, Vec<f64>>,
    map: Slot<MapKey, Image>,
    legend: Slot<ColorKey, Image>,
    heatmaps: HashMap<usize, (HeatKey, Arc<Image>)>,
}

/// Per-sample details for inspection and picking.
#[derive(Debug, Clone, Serialize)]
pub struct SampleInfo {
    pub index: usize,
    pub location: [f64; 2],
    pub values: Vec<AttributeValue>,
    pub weight: f64,
    pub color: ColorValue,
    /// Position in the (warped) legend disc.
    pub legend_position: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct AttributeValue {
    pub name: String,
    pub value: f64,
}

/// A color as both HSL components and hex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColorValue {
    pub h: f64,
    pub s: f64,
    pub l: f64,
    pub hex: Rgb,
}

impl From<Hsl> for ColorValue {
    fn from(c: Hsl) -> Self {
        Self { h: c.h, s: c.s, l: c.l, hex: hsl_to_rgb(c) }
    }
}

pub struct Pipeline {
    table: Arc<DataTable>,
    cache: Mutex<Cache>,
}

impl Pipeline {
    pub fn new(table: DataTable) -> Self {
        Self { table: Arc::new(table), cache: Mutex::new(Cache::default()) }
    }

    pub fn table(&self) -> &Arc<DataTable> {
        &self.table
    }

    fn cached<K, T>(
        &self,
        slot: impl Fn(&mut Cache) -> &mut Slot<K, T>,
        key: K,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<Arc<T>>
    where
        K: PartialEq,
    {
        if let Some((k, v)) = slot(&mut self.cache.lock()) {
            if *k == key {
                return Ok(v.clone());
            }
        }
        let value = Arc::new(compute()?);
        *slot(&mut self.cache.lock()) = Some((key, value.clone()));
        Ok(value)
    }

    pub fn normalized(&self, cfg: &SessionConfig) -> Result<Arc<NormalizedTable>> {
        self.cached(|c| &mut c.norm, cfg.weight_mode, || Ok(normalize(self.table.clone(), cfg.weight_mode)))
    }

    fn layout_key(cfg: &SessionConfig) -> LayoutKey {
        LayoutKey(cfg.weight_mode, cfg.metric)
    }

    pub fn layout(&self, cfg: &SessionConfig) -> Result<Arc<LayoutStage>> {
        self.cached(|c| &mut c.layout, Self::layout_key(cfg), || {
            let norm = self.normalized(cfg)?;
            let distances = attribute_distances(&norm, cfg.metric)?;
            let ordering = order_attributes(&distances)?;
            let model = gbc_embed(&norm, &ordering.order)?;
            Ok(LayoutStage { distances, ordering, model })
        })
    }

    fn warp_key(cfg: &SessionConfig) -> WarpKey {
        WarpKey(Self::layout_key(cfg), cfg.warp(), cfg.ellipse_scale_k)
    }

    pub fn warped(&self, cfg: &SessionConfig) -> Result<Arc<WarpStage>> {
        cfg.validate()?;
        self.cached(|c| &mut c.warp, Self::warp_key(cfg), || {
            let layout = self.layout(cfg)?;
            let ellipse = fit_ellipse(&layout.model.points, cfg.ellipse_scale_k)?;
            let points = apply_warp(&layout.model.points, &ellipse, &cfg.warp())?;
            Ok(WarpStage { ellipse, points })
        })
    }

    fn color_key(cfg: &SessionConfig) -> ColorKey {
        ColorKey(Self::warp_key(cfg), cfg.lightness, cfg.intensity_on.then_some(cfg.l_range))
    }

    /// Final per-sample colors: warped disc position at the session
    /// lightness, darkened by sample weight when intensity is on.
    pub fn sample_colors(&self, cfg: &SessionConfig) -> Result<Arc<Vec<Hsl>>> {
        self.cached(|c| &mut c.colors, Self::color_key(cfg), || {
            let warped = self.warped(cfg)?;
            let base = warped.points.iter().map(|&p| disc_to_hsl(p, cfg.lightness));
            if !cfg.intensity_on {
                return Ok(base.collect());
            }
            let norm = self.normalized(cfg)?;
            let weights = norm.sample_weights();
            let lo = weights.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(lo < hi) {
                return Ok(base.collect());
            }
            base.zip(weights)
                .map(|(c, &w)| apply_intensity(c, w, lo, hi, cfg.l_range).map_err(Into::into))
                .collect()
        })
    }

    pub fn bandwidths(&self, kernel: &KernelConfig) -> Result<Arc<Vec<f64>>> {
        self.cached(|c| &mut c.bandwidths, *kernel, || Ok(adaptive_bandwidths(self.table.locations(), kernel)?))
    }

    pub fn map_grid(&self, cfg: &SessionConfig) -> GridSpec {
        GridSpec { width: cfg.grid.0, height: cfg.grid.1, extent: Extent::around(self.table.locations(), MAP_PADDING) }
    }

    /// The pseudo-colored map.
    pub fn map(&self, cfg: &SessionConfig) -> Result<Arc<Image>> {
        let key = MapKey(Self::color_key(cfg), cfg.kernel, cfg.grid);
        self.cached(|c| &mut c.map, key, || {
            let colors = self.sample_colors(cfg)?;
            let bw = self.bandwidths(&cfg.kernel)?;
            let field = akde_render(self.table.locations(), &colors, &bw, &self.map_grid(cfg))?;
            Image::encode(field)
        })
    }

    /// Vertex color of an attribute; also the base tint of its heat map.
    pub fn vertex_color(&self, cfg: &SessionConfig, attr: usize) -> Result<Hsl> {
        let layout = self.layout(cfg)?;
        if attr >= layout.model.vertex_angles.len() {
            return Err(PipelineError::UnknownAttribute(attr.to_string()));
        }
        Ok(disc_to_hsl(layout.model.vertex(attr), cfg.lightness))
    }

    pub fn heatmap(&self, cfg: &SessionConfig, attr: usize) -> Result<Arc<Image>> {
        let n = self.table.n_attributes();
        if attr >= n {
            return Err(PipelineError::UnknownAttribute(attr.to_string()));
        }
        let key = HeatKey(Self::layout_key(cfg), cfg.lightness, cfg.kernel, cfg.grid);
        if let Some((k, img)) = self.cache.lock().heatmaps.get(&attr) {
            if *k == key {
                return Ok(img.clone());
            }
        }
        let base = self.vertex_color(cfg, attr)?;
        let norm = self.normalized(cfg)?;
        let bw = self.bandwidths(&cfg.kernel)?;
        let field = attribute_heatmap_with(&norm, attr, base, &self.map_grid(cfg), &bw)?;
        let img = Arc::new(Image::encode(field)?);
        self.cache.lock().heatmaps.insert(attr, (key, img.clone()));
        Ok(img)
    }

    pub fn heatmap_by_name(&self, cfg: &SessionConfig, name: &str) -> Result<Arc<Image>> {
        let attr = self.table.attribute_index(name).ok_or_else(|| PipelineError::UnknownAttribute(name.into()))?;
        self.heatmap(cfg, attr)
    }

    pub fn legend(&self, cfg: &SessionConfig) -> Result<LegendPayload> {
        let layout = self.layout(cfg)?;
        let warped = self.warped(cfg)?;
        let colors = self.sample_colors(cfg)?;
        Ok(legend_payload(&self.table, cfg, &layout, &warped, &colors))
    }

    pub fn legend_image(&self, cfg: &SessionConfig) -> Result<Arc<Image>> {
        self.cached(|c| &mut c.legend, Self::color_key(cfg), || {
            let payload = self.legend(cfg)?;
            Image::encode(render_legend(&payload, LEGEND_SIZE))
        })
    }

    pub fn sample(&self, cfg: &SessionConfig, index: usize) -> Result<SampleInfo> {
        if index >= self.table.n_samples() {
            return Err(PipelineError::UnknownSample(index));
        }
        let warped = self.warped(cfg)?;
        let colors = self.sample_colors(cfg)?;
        let norm = self.normalized(cfg)?;
        let values = self
            .table
            .attribute_names()
            .iter()
            .zip(self.table.row(index))
            .map(|(name, &value)| AttributeValue { name: name.clone(), value })
            .collect();
        Ok(SampleInfo {
            index,
            location: self.table.locations()[index],
            values,
            weight: norm.sample_weights()[index],
            color: colors[index].into(),
            legend_position: warped.points[index],
        })
    }

    /// Nearest sample in dataset units; ties go to the lowest index.
    pub fn nearest_sample(&self, x: f64, y: f64) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, p) in self.table.locations().iter().enumerate() {
            let d = (p[0] - x).powi(2) + (p[1] - y).powi(2);
            if d < best.0 {
                best = (d, j);
            }
        }
        best.1
    }

    /// Writes `map.png`, `legend.png`, `attr_<name>.png` per attribute and
    /// `layout.json` into `dir`.
    pub fn write_outputs(&self, cfg: &SessionConfig, dir: &Path) -> Result<Vec<String>> {
        let write = |name: &str, bytes: &[u8]| -> Result<String> {
            let path = dir.join(name);
            std::fs::write(&path, bytes)
                .map_err(|source| PipelineError::Output { path: path.display().to_string(), source })?;
            Ok(name.to_string())
        };
        let mut written = Vec::new();
        std::fs::create_dir_all(dir)
            .map_err(|source| PipelineError::Output { path: dir.display().to_string(), source })?;
        written.push(write("map.png", &self.map(cfg)?.png)?);
        written.push(write("legend.png", &self.legend_image(cfg)?.png)?);
        for (i, name) in self.table.attribute_names().iter().enumerate() {
            written.push(write(&format!("attr_{name}.png"), &self.heatmap(cfg, i)?.png)?);
        }
        let layout = self.layout(cfg)?;
        let json = serde_json::to_vec_pretty(&layout.model).expect("layout serializes");
        written.push(write("layout.json", &json)?);
        Ok(written)
    }
}
