//! Built-in object template libraries.
//!
//! Tetromino-like objects are four shaded tiles on a square lattice; the tile
//! shading keeps tiles segmentable as individual parts while every instance
//! of a shape reproduces the exact same colors. Multi-part objects combine
//! 2-4 touching parts with fixed shapes, offsets, and colors.

use std::collections::BTreeSet;

use crate::grid::Rgb;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePart {
    pub color: Rgb,
    /// (row, col) offsets relative to the template anchor, sorted.
    pub pixel_offsets: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectTemplate {
    pub template_id: u32,
    pub name: String,
    pub parts: Vec<TemplatePart>,
}

impl ObjectTemplate {
    /// Bounding box (height, width) over all part offsets. Offsets are
    /// normalized so the minimum offset is (0, 0).
    pub fn bbox(&self) -> (u32, u32) {
        let mut max_r = 0i32;
        let mut max_c = 0i32;
        for p in &self.parts {
            for &(r, c) in &p.pixel_offsets {
                max_r = max_r.max(r);
                max_c = max_c.max(c);
            }
        }
        ((max_r + 1) as u32, (max_c + 1) as u32)
    }

    pub fn amodal_offsets(&self) -> Vec<(i32, i32)> {
        let mut all: Vec<(i32, i32)> = self
            .parts
            .iter()
            .flat_map(|p| p.pixel_offsets.iter().copied())
            .collect();
        all.sort_unstable();
        all
    }

    /// 4-connectivity of one offset set.
    fn offsets_connected(offsets: &[(i32, i32)]) -> bool {
        if offsets.is_empty() {
            return false;
        }
        let set: BTreeSet<(i32, i32)> = offsets.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![offsets[0]];
        seen.insert(offsets[0]);
        while let Some((r, c)) = stack.pop() {
            for (dr, dc) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = (r + dr, c + dc);
                if set.contains(&n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == set.len()
    }

    /// Checks part connectivity, pairwise disjointness, and whole-object
    /// connectivity through part adjacency.
    pub fn validate(&self) -> bool {
        if self.parts.is_empty() {
            return false;
        }
        for p in &self.parts {
            if !Self::offsets_connected(&p.pixel_offsets) {
                return false;
            }
        }
        let sets: Vec<BTreeSet<(i32, i32)>> = self
            .parts
            .iter()
            .map(|p| p.pixel_offsets.iter().copied().collect())
            .collect();
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                if sets[i].intersection(&sets[j]).next().is_some() {
                    return false;
                }
            }
        }
        Self::offsets_connected(&self.amodal_offsets())
    }
}

fn normalize(parts: Vec<(Rgb, Vec<(i32, i32)>)>) -> Vec<TemplatePart> {
    let min_r = parts
        .iter()
        .flat_map(|(_, o)| o.iter().map(|&(r, _)| r))
        .min()
        .unwrap();
    let min_c = parts
        .iter()
        .flat_map(|(_, o)| o.iter().map(|&(_, c)| c))
        .min()
        .unwrap();
    parts
        .into_iter()
        .map(|(color, offsets)| {
            let mut pixel_offsets: Vec<(i32, i32)> = offsets
                .into_iter()
                .map(|(r, c)| (r - min_r, c - min_c))
                .collect();
            pixel_offsets.sort_unstable();
            TemplatePart {
                color,
                pixel_offsets,
            }
        })
        .collect()
}

/// Base palette for tetromino-like objects.
pub const TETROMINO_PALETTE: [Rgb; 6] = [
    [230, 70, 70],
    [70, 200, 70],
    [80, 90, 235],
    [235, 170, 60],
    [180, 80, 220],
    [60, 200, 200],
];

/// Brightness scale per tile index; steps are wide enough that distinct
/// shades sit more than 30 RGB units apart for every palette entry.
const TILE_SHADES: [f64; 4] = [1.0, 0.84, 0.68, 0.52];

/// Tile offsets (in tile units) of the 17 tetromino-like shapes.
const TETROMINO_SHAPES: [(&str, [(i32, i32); 4]); 17] = [
    ("I_h", [(0, 0), (0, 1), (0, 2), (0, 3)]),
    ("I_v", [(0, 0), (1, 0), (2, 0), (3, 0)]),
    ("O", [(0, 0), (0, 1), (1, 0), (1, 1)]),
    ("T_a", [(0, 0), (0, 1), (0, 2), (1, 1)]),
    ("T_b", [(0, 0), (1, 0), (2, 0), (1, 1)]),
    ("T_c", [(1, 0), (1, 1), (1, 2), (0, 1)]),
    ("T_d", [(0, 1), (1, 1), (2, 1), (1, 0)]),
    ("S_h", [(0, 1), (0, 2), (1, 0), (1, 1)]),
    ("Z_h", [(0, 0), (0, 1), (1, 1), (1, 2)]),
    ("L_a", [(0, 0), (1, 0), (2, 0), (2, 1)]),
    ("L_b", [(0, 0), (0, 1), (0, 2), (1, 0)]),
    ("L_c", [(0, 0), (0, 1), (1, 1), (2, 1)]),
    ("L_d", [(1, 0), (1, 1), (1, 2), (0, 2)]),
    ("J_a", [(0, 1), (1, 1), (2, 1), (2, 0)]),
    ("J_b", [(0, 0), (1, 0), (1, 1), (1, 2)]),
    ("J_c", [(0, 0), (0, 1), (1, 0), (2, 0)]),
    ("J_d", [(0, 0), (0, 1), (0, 2), (1, 2)]),
];

fn shade(base: Rgb, scale: f64) -> Rgb {
    [
        (base[0] as f64 * scale).round() as u8,
        (base[1] as f64 * scale).round() as u8,
        (base[2] as f64 * scale).round() as u8,
    ]
}

/// The 17-shape tetromino set. Each shape carries a fixed base color from the
/// 6-color palette and four tiles shaded per tile index, so every instance of
/// a shape is pixel- and color-exact.
pub fn tetromino_library(tile_size: u32) -> Vec<ObjectTemplate> {
    assert!(tile_size >= 2, "tiles below 2x2 have degenerate descriptors");
    let ts = tile_size as i32;
    TETROMINO_SHAPES
        .iter()
        .enumerate()
        .map(|(s, (name, tiles))| {
            let base = TETROMINO_PALETTE[s % TETROMINO_PALETTE.len()];
            let parts = tiles
                .iter()
                .enumerate()
                .map(|(t, &(tr, tc))| {
                    let mut offsets = Vec::with_capacity((ts * ts) as usize);
                    for r in 0..ts {
                        for c in 0..ts {
                            offsets.push((tr * ts + r, tc * ts + c));
                        }
                    }
                    (shade(base, TILE_SHADES[t]), offsets)
                })
                .collect();
            ObjectTemplate {
                template_id: s as u32,
                name: (*name).to_string(),
                parts: normalize(parts),
            }
        })
        .collect()
}

// Part shape constructors for the multi-part library. All shapes are
// star-convex about their centroid so stored boundary descriptors can be
// rasterized back into filled masks.

fn rect(h: i32, w: i32) -> Vec<(i32, i32)> {
    (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect()
}

fn diamond(radius: i32) -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for dr in -radius..=radius {
        for dc in -radius..=radius {
            if dr.abs() + dc.abs() <= radius {
                v.push((dr + radius, dc + radius));
            }
        }
    }
    v
}

fn tri_up(n: i32) -> Vec<(i32, i32)> {
    (0..n)
        .flat_map(|r| (n - 1 - r..n + r).map(move |c| (r, c)))
        .collect()
}

fn tri_down(n: i32) -> Vec<(i32, i32)> {
    tri_up(n).into_iter().map(|(r, c)| (n - 1 - r, c)).collect()
}

fn tri_right(n: i32) -> Vec<(i32, i32)> {
    tri_up(n).into_iter().map(|(r, c)| (c, n - 1 - r)).collect()
}

fn tri_left(n: i32) -> Vec<(i32, i32)> {
    tri_up(n).into_iter().map(|(r, c)| (c, r)).collect()
}

fn cross(arm: i32, thick: i32) -> Vec<(i32, i32)> {
    let n = 2 * arm + thick;
    let mut v = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if (arm..arm + thick).contains(&r) || (arm..arm + thick).contains(&c) {
                v.push((r, c));
            }
        }
    }
    v
}

fn tee_down(w: i32, stem: i32) -> Vec<(i32, i32)> {
    let mut v = rect(2, w);
    for r in 2..2 + stem {
        for c in w / 2 - 1..w / 2 + 1 {
            v.push((r, c));
        }
    }
    v
}

fn tee_up(w: i32, stem: i32) -> Vec<(i32, i32)> {
    let mut v: Vec<(i32, i32)> = rect(2, w).into_iter().map(|(r, c)| (r + stem, c)).collect();
    for r in 0..stem {
        for c in w / 2 - 1..w / 2 + 1 {
            v.push((r, c));
        }
    }
    v
}

fn hex_h(w: i32) -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for r in 0..3 {
        let inset = 1 - r.min(2 - r);
        for c in inset..w - inset {
            v.push((r, c));
        }
    }
    v
}

/// Distinct saturated part colors; pairwise RGB distance is at least 43 and
/// every entry stays far from the gray texture band and the white background.
const PART_COLORS: [Rgb; 25] = [
    [240, 29, 29],
    [153, 58, 28],
    [240, 130, 29],
    [153, 118, 28],
    [240, 231, 29],
    [128, 153, 28],
    [147, 240, 29],
    [68, 153, 28],
    [46, 240, 29],
    [28, 153, 48],
    [29, 240, 113],
    [28, 153, 108],
    [29, 240, 214],
    [28, 138, 153],
    [29, 164, 240],
    [28, 78, 153],
    [29, 63, 240],
    [38, 28, 153],
    [96, 29, 240],
    [98, 28, 153],
    [198, 29, 240],
    [153, 28, 148],
    [240, 29, 181],
    [153, 28, 88],
    [240, 29, 79],
];

type PartOffsets = Vec<(i32, i32)>;

fn at(offsets: PartOffsets, dr: i32, dc: i32) -> PartOffsets {
    offsets.into_iter().map(|(r, c)| (r + dr, c + dc)).collect()
}

/// Ten multi-part object templates (2-4 touching parts each) with globally
/// unique part colors.
pub fn multipart_library() -> Vec<ObjectTemplate> {
    let layouts: [(&str, Vec<PartOffsets>); 10] = [
        ("hammer", vec![at(rect(2, 7), 0, 0), at(rect(4, 4), 2, 1)]),
        ("tree", vec![at(tri_up(4), 0, 0), at(rect(5, 3), 4, 2)]),
        ("balloon", vec![at(diamond(3), 0, 2), at(rect(7, 2), 7, 4)]),
        ("roof", vec![at(rect(3, 5), 0, 0), at(tri_down(4), 3, 0)]),
        ("plinth", vec![at(cross(3, 2), 0, 0), at(rect(4, 9), 8, 0)]),
        ("cap", vec![at(tee_down(6, 3), 0, 2), at(hex_h(8), 5, 0)]),
        (
            "flag",
            vec![at(rect(7, 2), 0, 0), at(rect(3, 5), 2, 2), at(tri_right(4), 0, 7)],
        ),
        (
            "tower",
            vec![at(rect(9, 4), 0, 0), at(tri_left(4), 2, -4), at(rect(4, 4), 9, 0)],
        ),
        (
            "lantern",
            vec![at(tee_up(6, 3), 0, 0), at(diamond(3), 5, 0), at(rect(2, 7), 7, 7)],
        ),
        (
            "rig",
            vec![
                at(rect(4, 4), 0, 0),
                at(tri_up(4), 4, -2),
                at(rect(5, 3), 4, 5),
                at(hex_h(8), 9, -1),
            ],
        ),
    ];
    let mut color_index = 0;
    layouts
        .into_iter()
        .enumerate()
        .map(|(t, (name, part_offsets))| {
            let parts = part_offsets
                .into_iter()
                .map(|offsets| {
                    let color = PART_COLORS[color_index];
                    color_index += 1;
                    (color, offsets)
                })
                .collect();
            ObjectTemplate {
                template_id: t as u32,
                name: name.to_string(),
                parts: normalize(parts),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::color_distance;

    #[test]
    fn tetromino_library_is_valid() {
        let lib = tetromino_library(3);
        assert_eq!(lib.len(), 17);
        for t in &lib {
            assert!(t.validate(), "template {} invalid", t.name);
            assert_eq!(t.parts.len(), 4);
            assert_eq!(t.amodal_offsets().len(), 4 * 9);
            // shades within one shape stay distinguishable by the color gate
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let d = color_distance(t.parts[i].color, t.parts[j].color);
                    assert!(d > 30.0, "{}: shade pair {i},{j} too close ({d})", t.name);
                }
            }
        }
    }

    #[test]
    fn multipart_library_is_valid() {
        let lib = multipart_library();
        assert_eq!(lib.len(), 10);
        for t in &lib {
            assert!(t.validate(), "template {} invalid", t.name);
            assert!((2..=4).contains(&t.parts.len()));
            let (h, w) = t.bbox();
            assert!(h <= 16 && w <= 16, "{} too large: {h}x{w}", t.name);
        }
    }

    #[test]
    fn multipart_part_colors_globally_distinct() {
        let lib = multipart_library();
        let colors: Vec<Rgb> = lib
            .iter()
            .flat_map(|t| t.parts.iter().map(|p| p.color))
            .collect();
        for i in 0..colors.len() {
            for j in (i + 1)..colors.len() {
                assert!(
                    color_distance(colors[i], colors[j]) > 35.0,
                    "colors {i} and {j} too close"
                );
            }
        }
    }

    #[test]
    fn offsets_are_normalized() {
        for t in tetromino_library(3).iter().chain(multipart_library().iter()) {
            let all = t.amodal_offsets();
            assert_eq!(all.iter().map(|&(r, _)| r).min(), Some(0));
            assert_eq!(all.iter().map(|&(_, c)| c).min(), Some(0));
        }
    }
}
