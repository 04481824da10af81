#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Point = [f64; 2];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Neumaier-compensated sum.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Σ w·v / Σ w with vertices placed from `order` directly.
pub fn barycenter_oracle(row: &[f64], order: &[usize]) -> Point {
    let n = order.len();
    let mut vx = vec![0.0; n];
    let mut vy = vec![0.0; n];
    for (rank, &attr) in order.iter().enumerate() {
        let a = TAU * rank as f64 / n as f64;
        vx[attr] = a.cos();
        vy[attr] = a.sin();
    }
    let total = neumaier(row.iter().copied());
    if total == 0.0 {
        return [0.0, 0.0];
    }
    let x = neumaier(row.iter().zip(&vx).map(|(w, v)| w * v));
    let y = neumaier(row.iter().zip(&vy).map(|(w, v)| w * v));
    [x / total, y / total]
}

pub fn random_matrix(r: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = r.random();
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    rows
}

/// Minimum cyclic adjacency cost over every order starting at 0.
pub fn brute_force_min_cycle(d: &[Vec<f64>]) -> f64 {
    fn go(d: &[Vec<f64>], path: &mut Vec<usize>, used: &mut [bool], acc: f64, best: &mut f64) {
        let n = d.len();
        let last = *path.last().unwrap();
        if path.len() == n {
            *best = best.min(acc + d[last][path[0]]);
            return;
        }
        for next in 1..n {
            if !used[next] {
                used[next] = true;
                path.push(next);
                go(d, path, used, acc + d[last][next], best);
                path.pop();
                used[next] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; d.len()];
    used[0] = true;
    go(d, &mut vec![0], &mut used, 0.0, &mut best);
    best
}

pub fn normal(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Anisotropic Gaussian cloud of `m` points, rejection-sampled into the
/// disc of radius `r_max`.
pub fn gaussian_cloud(r: &mut impl Rng, m: usize, r_max: f64) -> Vec<Point> {
    let center = {
        let rad = r.random_range(0.0..0.5);
        let a = r.random_range(0.0..TAU);
        [rad * a.cos(), rad * a.sin()]
    };
    let s1 = r.random_range(0.03..0.25);
    let s2 = s1 * r.random_range(0.1..1.0);
    let rot = r.random_range(0.0..TAU);
    let (c, s) = (rot.cos(), rot.sin());
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let (u, v) = (s1 * normal(r), s2 * normal(r));
        let p = [center[0] + c * u - s * v, center[1] + s * u + c * v];
        if p[0].hypot(p[1]) < r_max {
            out.push(p);
        }
    }
    out
}

pub fn rotate(p: Point, a: f64) -> Point {
    let (c, s) = (a.cos(), a.sin());
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

/// Gift-wrapping hull area, independent of the library's monotone chain.
pub fn jarvis_hull_area(points: &[Point]) -> f64 {
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let dist2 = |a: Point, b: Point| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let start = *points.iter().min_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))).unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut candidate = points[0];
        for &p in points {
            if candidate == current {
                candidate = p;
                continue;
            }
            let c = cross(current, candidate, p);
            if c < 0.0 || (c == 0.0 && dist2(current, p) > dist2(current, candidate)) {
                candidate = p;
            }
        }
        if candidate == start || hull.len() > points.len() {
            break;
        }
        hull.push(candidate);
        current = candidate;
    }
    let k = hull.len();
    if k < 3 {
        return 0.0;
    }
    0.5 * (0..k).map(|i| hull[i][0] * hull[(i + 1) % k][1] - hull[(i + 1) % k][0] * hull[i][1]).sum::<f64>().abs()
}

/// HSL to RGB via the piecewise hue-to-channel formulation, rounded to bytes.
pub fn reference_hsl_to_rgb(h_deg: f64, s: f64, l: f64) -> [u8; 3] {
    let h = h_deg.rem_euclid(360.0) / 360.0;
    let q = if l < 0.5 { l * (1.0 + s) } else { l + s - l * s };
    let p = 2.0 * l - q;
    let channel = |mut t: f64| {
        if t < 0.0 {
            t += 1.0;
        }
        if t > 1.0 {
            t -= 1.0;
        }
        let v = if t < 1.0 / 6.0 {
            p + (q - p) * 6.0 * t
        } else if t < 0.5 {
            q
        } else if t < 2.0 / 3.0 {
            p + (q - p) * (2.0 / 3.0 - t) * 6.0
        } else {
            p
        };
        (v * 255.0).round().clamp(0.0, 255.0) as u8
    };
    [channel(h + 1.0 / 3.0), channel(h), channel(h - 1.0 / 3.0)]
}

/// Brute-force per-pixel Nadaraya–Watson blend of colors given as
/// `(hue degrees, s, l)`, returned as `(hue degrees, s, l)` or `None` for
/// unsupported pixels.
pub fn nadaraya_watson(x: Point, locations: &[Point], hsl: &[[f64; 3]], h: &[f64]) -> Option<[f64; 3]> {
    let mut num = [0.0; 3];
    let mut den = 0.0;
    for i in 0..locations.len() {
        let d2 = (x[0] - locations[i][0]).powi(2) + (x[1] - locations[i][1]).powi(2);
        let w = (-d2 / (2.0 * h[i] * h[i])).exp();
        let a = hsl[i][0].to_radians();
        let c = [hsl[i][1] * a.cos(), hsl[i][1] * a.sin(), hsl[i][2]];
        for k in 0..3 {
            num[k] += w * c[k];
        }
        den += w;
    }
    if den < 1e-300 {
        return None;
    }
    let u = num.map(|v| v / den);
    let s = u[0].hypot(u[1]);
    let hue = if s == 0.0 { 0.0 } else { u[1].atan2(u[0]).to_degrees().rem_euclid(360.0) };
    Some([hue, s.min(1.0), u[2]])
}

pub fn decode_png(bytes: &[u8]) -> (u32, u32, Vec<u8>) {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().expect("png header");
    let mut buf = vec![0; reader.output_buffer_size().expect("buffer size")];
    let info = reader.next_frame(&mut buf).expect("png frame");
    assert_eq!(info.color_type, png::ColorType::Rgb);
    assert_eq!(info.bit_depth, png::BitDepth::Eight);
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}
