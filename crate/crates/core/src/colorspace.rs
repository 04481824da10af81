//! HS disc ↔ HSL mapping, HSL ↔ RGB conversion and weight-driven lightness.
//!
//! Hue 0 lies on the +x axis and increases counterclockwise. The legend and
//! every renderer go through [`disc_to_hsl`], so this is the only place the
//! convention lives.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Lightness of the HS slice when intensity mapping is off.
pub const DEFAULT_LIGHTNESS: f64 = 0.65;
/// Lightness range used when sample weights drive intensity.
pub const DEFAULT_L_RANGE: (f64, f64) = (0.25, 0.85);

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ColorError {
    #[error("degenerate weight range [{0}, {1}]")]
    DegenerateRange(f64, f64),
    #[error("invalid lightness range ({0}, {1})")]
    InvalidLightnessRange(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    /// Degrees in `[0, 360)`.
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

impl Hsl {
    pub fn new(h: f64, s: f64, l: f64) -> Self {
        Self { h: canonical_hue(h), s: s.clamp(0.0, 1.0), l: l.clamp(0.0, 1.0) }
    }

    pub fn to_rgb(self) -> Rgb {
        hsl_to_rgb(self)
    }

    /// Cartesian blend coordinates `(s·cos h, s·sin h, l)`.
    pub fn to_blend(self) -> [f64; 3] {
        let (sin, cos) = self.h.to_radians().sin_cos();
        [self.s * cos, self.s * sin, self.l]
    }

    pub fn from_blend(c: [f64; 3]) -> Self {
        let s = c[0].hypot(c[1]);
        let h = if s == 0.0 { 0.0 } else { c[1].atan2(c[0]).to_degrees() };
        Self::new(h, s, c[2])
    }
}

fn canonical_hue(h: f64) -> f64 {
    let h = h.rem_euclid(360.0);
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// 8-bit RGB. Serializes as `#RRGGBB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn to_hex(self) -> String {
        self.to_string()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let s = s.strip_prefix('#')?;
        if s.len() != 6 {
            return None;
        }
        let byte = |i: usize| u8::from_str_radix(s.get(i..i + 2)?, 16).ok();
        Some(Self::new(byte(0)?, byte(2)?, byte(4)?))
    }

    pub fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rgb::from_hex(&s).ok_or_else(|| serde::de::Error::custom(format!("bad hex color `{s}`")))
    }
}

/// Hue from the angle of `p`, saturation from its radius (clamped to 1).
pub fn disc_to_hsl(p: [f64; 2], l: f64) -> Hsl {
    let r = p[0].hypot(p[1]);
    if r == 0.0 {
        return Hsl::new(0.0, 0.0, l);
    }
    Hsl::new(p[1].atan2(p[0]).to_degrees(), r.min(1.0), l)
}

/// Inverse of [`disc_to_hsl`] on the HS plane.
pub fn hsl_to_disc(c: Hsl) -> [f64; 2] {
    let b = c.to_blend();
    [b[0], b[1]]
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Standard hexcone HSL → RGB with round-half-up quantization.
pub fn hsl_to_rgb(c: Hsl) -> Rgb {
    let chroma = (1.0 - (2.0 * c.l - 1.0).abs()) * c.s;
    let hp = c.h / 60.0;
    let x = chroma * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = c.l - chroma / 2.0;
    Rgb::new(quantize(r + m), quantize(g + m), quantize(b + m))
}

/// Exact RGB → HSL inversion.
pub fn rgb_to_hsl(c: Rgb) -> Hsl {
    let [r, g, b] = c.channels().map(|v| v as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    let delta = max - min;
    if delta == 0.0 {
        return Hsl::new(0.0, 0.0, l);
    }
    let s = delta / (1.0 - (2.0 * l - 1.0).abs());
    let h = if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    Hsl::new(h, s, l)
}

/// Darkens heavier samples: lightness falls linearly from `l_max` at
/// `w_lo` to `l_min` at `w_hi`, clamped outside the range.
pub fn apply_intensity(
    c: Hsl,
    weight: f64,
    w_lo: f64,
    w_hi: f64,
    l_range: (f64, f64),
) -> Result<Hsl, ColorError> {
    if !(w_lo < w_hi) {
        return Err(ColorError::DegenerateRange(w_lo, w_hi));
    }
    let (l_min, l_max) = l_range;
    if !(0.0 <= l_min && l_min < l_max && l_max <= 1.0) {
        return Err(ColorError::InvalidLightnessRange(l_min, l_max));
    }
    let t = ((weight - w_lo) / (w_hi - w_lo)).clamp(0.0, 1.0);
    Ok(Hsl { l: (1.0 - t) * l_max + t * l_min, ..c })
}
