//! PCA ellipse fitting and the feature-extraction warps of the HS disc.
//!
//! Every warp is expressed through ellipse coordinates
//! `e = ((p − c)·u1 / a1, (p − c)·u2 / a2)`; the whitening map
//! `e1·u1 + e2·u2` sends the ellipse onto the unit circle at the origin.

use serde::{Deserialize, Serialize};

pub const DEFAULT_SCALE_K: f64 = 2.0;
pub const DEFAULT_SHRINK: f64 = 0.35;
pub const DEFAULT_PERCENTILE: f64 = 0.95;
/// Ellipse radius where compression hands over to the identity.
pub const BLEND_OUTER: f64 = 1.5;
/// Absolute floor for the minor semi-axis.
pub const MIN_SEMI_AXIS: f64 = 1e-3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WarpError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all points sit at the origin")]
    DegenerateCloud,
    #[error("invalid warp parameter: {0}")]
    InvalidParameter(String),
}

pub type Point = [f64; 2];

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

/// Radially projects points outside the closed unit disc onto the circle.
#[inline]
pub fn clamp_to_disc(p: Point) -> Point {
    let r = norm(p);
    if r > 1.0 {
        [p[0] / r, p[1] / r]
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseModel {
    pub center: Point,
    /// Major axis direction, unit length.
    pub axis1: Point,
    /// Minor axis direction, `axis1` rotated by +90°.
    pub axis2: Point,
    pub a1: f64,
    pub a2: f64,
}

impl EllipseModel {
    /// Coordinates of `p` in the ellipse frame, scaled so the boundary is
    /// the unit circle.
    pub fn coord(&self, p: Point) -> Point {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        [dot(d, self.axis1) / self.a1, dot(d, self.axis2) / self.a2]
    }

    /// Inverse of [`EllipseModel::coord`].
    pub fn point(&self, e: Point) -> Point {
        let (u, v) = (e[0] * self.a1, e[1] * self.a2);
        [
            self.center[0] + u * self.axis1[0] + v * self.axis2[0],
            self.center[1] + u * self.axis1[1] + v * self.axis2[1],
        ]
    }

    /// Radius `ρ` in ellipse coordinates; `ρ <= 1` iff `p` is inside.
    pub fn radius(&self, p: Point) -> f64 {
        norm(self.coord(p))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.radius(p) <= 1.0
    }

    /// The whitening map, unclamped.
    pub fn whiten(&self, p: Point) -> Point {
        let e = self.coord(p);
        [e[0] * self.axis1[0] + e[1] * self.axis2[0], e[0] * self.axis1[1] + e[1] * self.axis2[1]]
    }

    /// Closed boundary polyline with `segments + 1` points.
    pub fn outline(&self, segments: usize) -> Vec<Point> {
        (0..=segments)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / segments as f64;
                self.point([t.cos(), t.sin()])
            })
            .collect()
    }
}

/// Mean and population covariance `(sxx, sxy, syy)` of a point cloud.
pub fn mean_and_covariance(points: &[Point]) -> (Point, [f64; 3]) {
    let m = points.len() as f64;
    let mut c = [0.0, 0.0];
    for p in points {
        c[0] += p[0];
        c[1] += p[1];
    }
    c = [c[0] / m, c[1] / m];
    let mut cov = [0.0; 3];
    for p in points {
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        cov[0] += dx * dx;
        cov[1] += dx * dy;
        cov[2] += dy * dy;
    }
    (c, cov.map(|v| v / m))
}

/// Closed-form eigen-decomposition of the symmetric matrix
/// `[[sxx, sxy], [sxy, syy]]`: `(λ1, λ2, major axis)` with `λ1 >= λ2` and
/// the major axis in the right half-plane.
pub fn symmetric_eigen2(cov: [f64; 3]) -> (f64, f64, Point) {
    let [sxx, sxy, syy] = cov;
    let mean = 0.5 * (sxx + syy);
    let half_diff = 0.5 * (sxx - syy);
    let radius = half_diff.hypot(sxy);
    let theta = 0.5 * sxy.atan2(half_diff);
    let (s, c) = theta.sin_cos();
    (mean + radius, mean - radius, [c, s])
}

/// Fits the PCA ellipse: centered at the mean, axes along the covariance
/// eigenvectors, semi-axes `scale_k·sqrt(λ)`. The minor semi-axis is floored
/// at `max(1e-3, 0.01·a1)`.
pub fn fit_ellipse(points: &[Point], scale_k: f64) -> Result<EllipseModel, WarpError> {
    if points.len() < 2 {
        return Err(WarpError::TooFewPoints { needed: 2, got: points.len() });
    }
    if !(scale_k > 0.0 && scale_k.is_finite()) {
        return Err(WarpError::InvalidParameter(format!("ellipse scale {scale_k}")));
    }
    let (center, cov) = mean_and_covariance(points);
    let (l1, l2, axis1) = symmetric_eigen2(cov);
    let a1 = (scale_k * l1.max(0.0).sqrt()).max(MIN_SEMI_AXIS);
    let floor = MIN_SEMI_AXIS.max(0.01 * a1);
    let a2 = (scale_k * l2.max(0.0).sqrt()).max(floor);
    Ok(EllipseModel { center, axis1, axis2: [-axis1[1], axis1[0]], a1, a2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpKind {
    #[default]
    None,
    ColorPreserving,
    ContrastEnhancement,
    ComparisonCompression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpMode {
    pub kind: WarpKind,
    /// Compression only; in `(0, 1]`.
    pub shrink: f64,
    /// Color-preserving only; in `(0, 1)`.
    pub percentile: f64,
}

impl Default for WarpMode {
    fn default() -> Self {
        Self { kind: WarpKind::None, shrink: DEFAULT_SHRINK, percentile: DEFAULT_PERCENTILE }
    }
}

impl WarpMode {
    pub fn new(kind: WarpKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), WarpError> {
        if !(self.shrink > 0.0 && self.shrink <= 1.0) {
            return Err(WarpError::InvalidParameter(format!("shrink {} not in (0, 1]", self.shrink)));
        }
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return Err(WarpError::InvalidParameter(format!(
                "percentile {} not in (0, 1)",
                self.percentile
            )));
        }
        Ok(())
    }
}

pub fn apply_warp(points: &[Point], e: &EllipseModel, mode: &WarpMode) -> Result<Vec<Point>, WarpError> {
    mode.validate()?;
    match mode.kind {
        WarpKind::None => Ok(points.to_vec()),
        WarpKind::ColorPreserving => warp_color_preserving(points, mode.percentile),
        WarpKind::ContrastEnhancement => Ok(warp_contrast(points, e)),
        WarpKind::ComparisonCompression => warp_compression(points, e, mode.shrink),
    }
}

/// Whitening map with a radial clamp: the ellipse fills the whole disc.
pub fn warp_contrast(points: &[Point], e: &EllipseModel) -> Vec<Point> {
    points.iter().map(|&p| clamp_to_disc(e.whiten(p))).collect()
}

/// Linear-interpolated quantile of `values` (sorted internally).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Uniform radial gain about the white point so the `percentile` quantile
/// of radii lands at radius `percentile`. Points beyond the circle are
/// clamped onto it; angles are untouched.
pub fn warp_color_preserving(points: &[Point], percentile: f64) -> Result<Vec<Point>, WarpError> {
    if points.is_empty() {
        return Err(WarpError::TooFewPoints { needed: 1, got: 0 });
    }
    let radii: Vec<f64> = points.iter().map(|&p| norm(p)).collect();
    let r_q = quantile(&radii, percentile);
    if r_q == 0.0 {
        if radii.iter().all(|&r| r == 0.0) {
            return Err(WarpError::DegenerateCloud);
        }
        // Quantile collapsed onto the origin; only clamp the rest.
        return Ok(points.iter().map(|&p| clamp_to_disc(p)).collect());
    }
    let gain = percentile / r_q;
    Ok(points
        .iter()
        .zip(&radii)
        .map(|(&p, &r)| {
            if r == 0.0 {
                [0.0, 0.0]
            } else {
                let f = gain.min(1.0 / r);
                [p[0] * f, p[1] * f]
            }
        })
        .collect())
}

/// Collapses the ellipse interior onto a disc around the white point whose
/// area is `shrink²` times the ellipse's; points at ellipse radius `>= 1.5`
/// are left alone, with a linear blend in between.
pub fn warp_compression(points: &[Point], e: &EllipseModel, shrink: f64) -> Result<Vec<Point>, WarpError> {
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(WarpError::InvalidParameter(format!("shrink {shrink} not in (0, 1]")));
    }
    let inner_scale = shrink * (e.a1 * e.a2).sqrt();
    Ok(points
        .iter()
        .map(|&p| {
            let rho = e.radius(p);
            let outer = clamp_to_disc(p);
            if rho >= BLEND_OUTER {
                return outer;
            }
            let w = e.whiten(p);
            let inner = [inner_scale * w[0], inner_scale * w[1]];
            if rho <= 1.0 {
                return clamp_to_disc(inner);
            }
            let t = (rho - 1.0) / (BLEND_OUTER - 1.0);
            clamp_to_disc([inner[0] + t * (outer[0] - inner[0]), inner[1] + t * (outer[1] - inner[1])])
        })
        .collect())
}

/// Area of the convex hull (Andrew's monotone chain).
pub fn gamut_area(points: &[Point]) -> Result<f64, WarpError> {
    if points.len() < 3 {
        return Err(WarpError::TooFewPoints { needed: 3, got: points.len() });
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Ok(0.0);
    }
    let twice: f64 = (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    Ok(0.5 * twice.abs())
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise hull vertices without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
