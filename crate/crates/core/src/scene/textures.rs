//! 15 procedural background textures for the distribution-shift test family.
//! Every texture stays inside a muted mid-gray/tinted band well away from the
//! template part colors, and is a pure function of (seed, texture id).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::Rgb;

pub const NUM_TEXTURES: u8 = 15;

/// Per-id channel tint so that even structurally similar textures keep
/// distinct color statistics.
const TINTS: [[f64; 3]; 15] = [
    [1.00, 1.00, 1.00],
    [1.05, 0.95, 0.90],
    [0.90, 1.05, 0.95],
    [0.92, 0.95, 1.08],
    [1.06, 1.00, 0.88],
    [0.88, 1.00, 1.06],
    [1.04, 0.90, 1.02],
    [0.94, 1.06, 0.88],
    [1.08, 0.94, 0.94],
    [0.90, 0.96, 1.04],
    [1.02, 1.04, 0.88],
    [0.88, 0.94, 1.02],
    [1.06, 0.88, 0.96],
    [0.92, 1.02, 1.00],
    [1.00, 0.90, 1.04],
];

fn tinted(g: f64, id: u8) -> Rgb {
    let t = TINTS[id as usize];
    [
        (g * t[0]).clamp(0.0, 255.0).round() as u8,
        (g * t[1]).clamp(0.0, 255.0).round() as u8,
        (g * t[2]).clamp(0.0, 255.0).round() as u8,
    ]
}

/// Renders texture `id` into an H x W pixel buffer. Panics if `id` is out of
/// range; callers validate against `NUM_TEXTURES` first.
pub fn render_texture(id: u8, height: u32, width: u32, seed: u64) -> Vec<Rgb> {
    assert!(id < NUM_TEXTURES, "texture id out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7ec0_5eed ^ ((id as u64) << 32));
    let n = (height * width) as usize;
    let mut out = vec![[0u8; 3]; n];
    let lo = 112.0;
    let hi = 188.0;
    let mid = (lo + hi) / 2.0;
    let amp = (hi - lo) / 2.0;
    match id {
        0 => {
            // white noise
            for px in out.iter_mut() {
                *px = tinted(rng.gen_range(lo..hi), id);
            }
        }
        1 => {
            // value noise: coarse grid, bilinear upsample
            let step = 8u32;
            let gh = height / step + 2;
            let gw = width / step + 2;
            let grid: Vec<f64> = (0..gh * gw).map(|_| rng.gen_range(lo..hi)).collect();
            for r in 0..height {
                for c in 0..width {
                    let fr = r as f64 / step as f64;
                    let fc = c as f64 / step as f64;
                    let (r0, c0) = (fr.floor() as u32, fc.floor() as u32);
                    let (tr, tc) = (fr - r0 as f64, fc - c0 as f64);
                    let at = |rr: u32, cc: u32| grid[(rr * gw + cc) as usize];
                    let g = at(r0, c0) * (1.0 - tr) * (1.0 - tc)
                        + at(r0 + 1, c0) * tr * (1.0 - tc)
                        + at(r0, c0 + 1) * (1.0 - tr) * tc
                        + at(r0 + 1, c0 + 1) * tr * tc;
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        2 | 3 => {
            // horizontal / vertical stripes
            let period = rng.gen_range(3..6u32);
            let a = rng.gen_range(lo..mid);
            let b = rng.gen_range(mid..hi);
            for r in 0..height {
                for c in 0..width {
                    let coord = if id == 2 { r } else { c };
                    let g = if (coord / period) % 2 == 0 { a } else { b };
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        4 | 5 => {
            // diagonal / anti-diagonal stripes
            let period = rng.gen_range(3..6i64);
            let a = rng.gen_range(lo..mid);
            let b = rng.gen_range(mid..hi);
            for r in 0..height {
                for c in 0..width {
                    let coord = if id == 4 {
                        r as i64 + c as i64
                    } else {
                        r as i64 - c as i64 + width as i64
                    };
                    let g = if (coord / period) % 2 == 0 { a } else { b };
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        6 | 7 => {
            // checkerboards at two scales
            let cell = if id == 6 { 2 } else { 4 };
            let a = rng.gen_range(lo..mid);
            let b = rng.gen_range(mid..hi);
            for r in 0..height {
                for c in 0..width {
                    let g = if ((r / cell) + (c / cell)) % 2 == 0 { a } else { b };
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        8 | 9 => {
            // horizontal / vertical gradient
            let a = rng.gen_range(lo..mid);
            let b = rng.gen_range(mid..hi);
            for r in 0..height {
                for c in 0..width {
                    let t = if id == 8 {
                        c as f64 / (width - 1).max(1) as f64
                    } else {
                        r as f64 / (height - 1).max(1) as f64
                    };
                    out[(r * width + c) as usize] = tinted(a + (b - a) * t, id);
                }
            }
        }
        10 => {
            // radial gradient
            let (cr, cw) = (height as f64 / 2.0, width as f64 / 2.0);
            let max_d = (cr * cr + cw * cw).sqrt();
            for r in 0..height {
                for c in 0..width {
                    let d = ((r as f64 - cr).powi(2) + (c as f64 - cw).powi(2)).sqrt();
                    out[(r * width + c) as usize] = tinted(lo + (hi - lo) * d / max_d, id);
                }
            }
        }
        11 => {
            // concentric rings
            let period = rng.gen_range(3.0..6.0);
            let (cr, cw) = (height as f64 / 2.0, width as f64 / 2.0);
            let a = rng.gen_range(lo..mid);
            let b = rng.gen_range(mid..hi);
            for r in 0..height {
                for c in 0..width {
                    let d = ((r as f64 - cr).powi(2) + (c as f64 - cw).powi(2)).sqrt();
                    let g = if (d / period) as i64 % 2 == 0 { a } else { b };
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        12 => {
            // sine interference
            let f1 = rng.gen_range(0.25..0.6);
            let f2 = rng.gen_range(0.25..0.6);
            for r in 0..height {
                for c in 0..width {
                    let g = mid + amp * (r as f64 * f1).sin() * (c as f64 * f2).cos();
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        13 => {
            // coarse random blocks
            let cell = 8u32;
            let gh = height / cell + 1;
            let gw = width / cell + 1;
            let blocks: Vec<f64> = (0..gh * gw).map(|_| rng.gen_range(lo..hi)).collect();
            for r in 0..height {
                for c in 0..width {
                    let g = blocks[((r / cell) * gw + c / cell) as usize];
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        14 => {
            // crosshatch
            let period = rng.gen_range(4..7u32);
            let bright = rng.gen_range(mid..hi);
            let dark = rng.gen_range(lo..mid);
            for r in 0..height {
                for c in 0..width {
                    let g = if r % period == 0 || c % period == 0 { dark } else { bright };
                    out[(r * width + c) as usize] = tinted(g, id);
                }
            }
        }
        _ => unreachable!(),
    }
    out
}
