//! The GBC disc as a color legend: JSON payload for clients and a raster
//! rendering of the HS wheel with vertices, samples and the PCA ellipse.

use serde::Serialize;

use crate::colorspace::{disc_to_hsl, hsl_to_rgb, Hsl, Rgb};
use crate::config::SessionConfig;
use crate::data::DataTable;
use crate::pipeline::{ColorValue, LayoutStage, WarpStage};
use crate::render::{Extent, RasterField};
use crate::warp::{apply_warp, EllipseModel, Point, WarpKind};

pub const LEGEND_SIZE: usize = 512;
pub const OUTLINE_SEGMENTS: usize = 64;
/// Half-width of the legend raster in disc units.
const LEGEND_HALF_EXTENT: f64 = 1.1;
const WHITE_POINT_RADIUS_PX: f64 = 4.0;
const VERTEX_RADIUS_PX: f64 = 7.0;
const SAMPLE_RADIUS_PX: f64 = 2.0;
const INK: Rgb = Rgb::new(40, 40, 40);
const CANVAS: Rgb = Rgb::new(255, 255, 255);

#[derive(Debug, Clone, Serialize)]
pub struct LegendVertex {
    pub attribute: usize,
    pub name: String,
    /// Radians, counterclockwise from +x.
    pub angle: f64,
    pub position: Point,
    pub color: ColorValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendSample {
    pub index: usize,
    pub position: Point,
    pub color: ColorValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendEllipse {
    #[serde(flatten)]
    pub model: EllipseModel,
    /// Boundary of the fitted ellipse, `OUTLINE_SEGMENTS + 1` closed points.
    pub outline: Vec<Point>,
    /// The same boundary after the active warp.
    pub warped_outline: Vec<Point>,
}

/// How to paint the HS wheel: hue from angle, saturation from radius.
#[derive(Debug, Clone, Serialize)]
pub struct DiscBackground {
    pub center: Point,
    pub radius: f64,
    pub lightness: f64,
    pub hue_zero_direction: Point,
    pub orientation: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendPayload {
    pub warp_mode: WarpKind,
    /// In cyclic order.
    pub vertices: Vec<LegendVertex>,
    pub samples: Vec<LegendSample>,
    pub ellipse: LegendEllipse,
    pub background: DiscBackground,
}

pub fn legend_payload(
    table: &DataTable,
    cfg: &SessionConfig,
    layout: &LayoutStage,
    warped: &WarpStage,
    colors: &[Hsl],
) -> LegendPayload {
    let model = &layout.model;
    let vertices = model
        .order
        .iter()
        .map(|&attr| {
            let position = model.vertex(attr);
            LegendVertex {
                attribute: attr,
                name: table.attribute_names()[attr].clone(),
                angle: model.vertex_angles[attr],
                position,
                color: disc_to_hsl(position, cfg.lightness).into(),
            }
        })
        .collect();
    let samples = warped
        .points
        .iter()
        .zip(colors)
        .enumerate()
        .map(|(index, (&position, &c))| LegendSample { index, position, color: c.into() })
        .collect();
    let outline = warped.ellipse.outline(OUTLINE_SEGMENTS);
    let warped_outline = apply_warp(&outline, &warped.ellipse, &cfg.warp()).unwrap_or_else(|_| outline.clone());
    LegendPayload {
        warp_mode: cfg.warp_mode,
        vertices,
        samples,
        ellipse: LegendEllipse { model: warped.ellipse, outline, warped_outline },
        background: DiscBackground {
            center: [0.0, 0.0],
            radius: 1.0,
            lightness: cfg.lightness,
            hue_zero_direction: [1.0, 0.0],
            orientation: "counterclockwise",
        },
    }
}

struct Canvas {
    field: RasterField,
    scale: f64,
}

impl Canvas {
    fn new(size: usize) -> Self {
        let h = LEGEND_HALF_EXTENT;
        Self {
            field: RasterField {
                width: size,
                height: size,
                extent: Extent { x_min: -h, y_min: -h, x_max: h, y_max: h },
                pixels: vec![CANVAS; size * size],
            },
            scale: size as f64 / (2.0 * h),
        }
    }

    /// Continuous pixel coordinates of a disc point.
    fn to_px(&self, p: Point) -> (f64, f64) {
        let c = self.field.width as f64 / 2.0;
        (c + p[0] * self.scale, c - p[1] * self.scale)
    }

    fn to_disc(&self, col: usize, row: usize) -> Point {
        let c = self.field.width as f64 / 2.0;
        [(col as f64 + 0.5 - c) / self.scale, (c - row as f64 - 0.5) / self.scale]
    }

    fn disc(&mut self, center: (f64, f64), radius: f64, color: Rgb) {
        let (cx, cy) = center;
        let size = self.field.width as i64;
        let lo_x = ((cx - radius).floor() as i64).max(0);
        let hi_x = ((cx + radius).ceil() as i64).min(size - 1);
        let lo_y = ((cy - radius).floor() as i64).max(0);
        let hi_y = ((cy + radius).ceil() as i64).min(size - 1);
        for row in lo_y..=hi_y {
            for col in lo_x..=hi_x {
                let (dx, dy) = (col as f64 + 0.5 - cx, row as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= radius * radius {
                    self.field.set(col as usize, row as usize, color);
                }
            }
        }
    }

    fn ring(&mut self, center: (f64, f64), radius: f64, color: Rgb) {
        let steps = (radius * 8.0).ceil().max(16.0) as usize;
        for k in 0..steps {
            let t = std::f64::consts::TAU * k as f64 / steps as f64;
            self.plot(center.0 + radius * t.cos(), center.1 + radius * t.sin(), color);
        }
    }

    fn plot(&mut self, x: f64, y: f64, color: Rgb) {
        let size = self.field.width as f64;
        if x >= 0.0 && y >= 0.0 && x < size && y < size {
            self.field.set(x as usize, y as usize, color);
        }
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), color: Rgb) {
        let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            self.plot(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1), color);
        }
    }
}

/// Paints the legend: HS wheel at the session lightness, the fitted ellipse,
/// sample dots in their final colors, attribute vertices, and a white-point
/// swatch at the center showing the achromatic color of the slice.
pub fn render_legend(payload: &LegendPayload, size: usize) -> RasterField {
    let mut canvas = Canvas::new(size);
    let lightness = payload.background.lightness;
    for row in 0..size {
        for col in 0..size {
            let p = canvas.to_disc(col, row);
            if p[0].hypot(p[1]) <= 1.0 {
                canvas.field.set(col, row, hsl_to_rgb(disc_to_hsl(p, lightness)));
            }
        }
    }
    canvas.ring(canvas.to_px([0.0, 0.0]), canvas.scale, INK);

    let outline = &payload.ellipse.warped_outline;
    for w in outline.windows(2) {
        let (a, b) = (canvas.to_px(w[0]), canvas.to_px(w[1]));
        canvas.line(a, b, INK);
    }
    for s in &payload.samples {
        canvas.disc(canvas.to_px(s.position), SAMPLE_RADIUS_PX, s.color.hex);
    }
    for v in &payload.vertices {
        let c = canvas.to_px(v.position);
        canvas.disc(c, VERTEX_RADIUS_PX, v.color.hex);
        canvas.ring(c, VERTEX_RADIUS_PX, INK);
    }
    let center = canvas.to_px([0.0, 0.0]);
    canvas.disc(center, WHITE_POINT_RADIUS_PX, hsl_to_rgb(Hsl::new(0.0, 0.0, lightness)));
    canvas.ring(center, WHITE_POINT_RADIUS_PX + 1.0, INK);
    canvas.field
}

/// Pixel holding the disc origin in a legend of `size`.
pub fn center_pixel(size: usize) -> (usize, usize) {
    (size / 2, size / 2)
}
