//! The graph of parts: per-part shape descriptors (K vectors from the
//! centroid to sampled boundary pixels), centroid-offset edges between parts
//! of the same image, and the adjacency subgraph of parts that share a
//! boundary of nonzero length.

use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::grid::{ImageGrid, PixelSet};
use crate::segment::SegmentLabeling;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorParams {
    /// Number of boundary vectors per part.
    pub k: usize,
    /// Similarity threshold shared by the clustering stages.
    pub epsilon: f64,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        DescriptorParams { k: 64, epsilon: 0.99 }
    }
}

/// A connected pixel region of one image together with its shape descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub part_id: usize,
    pub image_index: usize,
    pub pixels: PixelSet,
    /// Mean of the pixel coordinates, (row, col).
    pub centroid: [f64; 2],
    /// K vectors from the centroid to sampled boundary pixels.
    pub descriptor: Vec<[f64; 2]>,
    /// Mean RGB over the part's pixels.
    pub mean_color: [f64; 3],
}

impl Part {
    /// Builds a part from raw pixels; descriptor and centroid are derived.
    pub fn from_pixels(
        part_id: usize,
        image_index: usize,
        pixels: PixelSet,
        mean_color: [f64; 3],
        k: usize,
    ) -> Self {
        assert!(!pixels.is_empty(), "part must have at least one pixel");
        let centroid = centroid_of(&pixels);
        let descriptor = sample_shape_descriptor(&pixels, k);
        Part {
            part_id,
            image_index,
            pixels,
            centroid,
            descriptor,
            mean_color,
        }
    }

    /// Replaces the derived descriptor; used by synthetic-graph tests and
    /// benchmarks that control similarity patterns directly.
    pub fn with_descriptor(mut self, descriptor: Vec<[f64; 2]>) -> Self {
        self.descriptor = descriptor;
        self
    }
}

/// Centroid-offset edge between two parts of the same image, a < b.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialEdge {
    pub a: usize,
    pub b: usize,
    /// centroid(b) - centroid(a)
    pub offset: [f64; 2],
    /// True when the parts have at least one pair of 4-neighboring pixels.
    pub adjacent: bool,
}

/// Parts of one batch plus the full same-image edge set and the adjacency
/// subgraph.
#[derive(Debug, Clone)]
pub struct PartGraph {
    pub parts: Vec<Part>,
    pub edges: Vec<SpatialEdge>,
    /// Adjacent neighbor part ids, sorted, one list per part.
    adjacency: Vec<Vec<usize>>,
}

/// Integer coordinate sums; exact in f64 at the raster sizes involved.
fn coordinate_sums(pixels: &PixelSet) -> (f64, f64, f64) {
    let (mut sr, mut sc) = (0u64, 0u64);
    for &(r, c) in pixels {
        sr += r as u64;
        sc += c as u64;
    }
    (sr as f64, sc as f64, pixels.len() as f64)
}

pub fn centroid_of(pixels: &PixelSet) -> [f64; 2] {
    let (sr, sc, n) = coordinate_sums(pixels);
    [sr / n, sc / n]
}

/// Centroid-relative offset of a pixel, computed from the integer numerator
/// `pixel * n - sum` so that translating the whole pixel set changes nothing,
/// bit for bit.
#[inline]
fn relative_offset(r: u32, c: u32, sums: (f64, f64, f64)) -> [f64; 2] {
    let (sr, sc, n) = sums;
    [(r as f64 * n - sr) / n, (c as f64 * n - sc) / n]
}

/// Pixels of the part with at least one 4-neighbor outside it (the image
/// border counts as outside), ordered by ascending polar angle of
/// (pixel - centroid) measured from the +col axis, ties by ascending radius
/// then (row, col).
pub fn boundary_pixels(pixels: &PixelSet) -> Vec<(u32, u32)> {
    let sums = coordinate_sums(pixels);
    let mut out = Vec::new();
    for &(r, c) in pixels {
        let exterior = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dr, dc)| {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            nr < 0 || nc < 0 || !pixels.contains(&(nr as u32, nc as u32))
        });
        if exterior {
            out.push((r, c));
        }
    }
    let (sr, sc, n) = sums;
    out.sort_by(|&(ar, ac), &(br, bc)| {
        // the angle is unchanged by the positive 1/n factor, so the integer
        // numerators give translation-invariant keys
        let ka = angle_radius(ar as f64 * n - sr, ac as f64 * n - sc);
        let kb = angle_radius(br as f64 * n - sr, bc as f64 * n - sc);
        ka.0
            .total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then((ar, ac).cmp(&(br, bc)))
    });
    out
}

#[inline]
fn angle_radius(dr: f64, dc: f64) -> (f64, f64) {
    let mut a = dr.atan2(dc);
    if a < 0.0 {
        a += TAU;
    }
    (a, dr * dr + dc * dc)
}

/// Samples K centroid-to-boundary vectors along the angular boundary order.
/// With B >= K boundary pixels the indices round(k*B/K) are taken; with
/// B < K the ordering is cycled until K vectors are emitted.
pub fn sample_shape_descriptor(pixels: &PixelSet, k: usize) -> Vec<[f64; 2]> {
    let boundary = boundary_pixels(pixels);
    sample_descriptor_from_boundary(&boundary, coordinate_sums(pixels), k)
}

fn sample_descriptor_from_boundary(
    boundary: &[(u32, u32)],
    sums: (f64, f64, f64),
    k: usize,
) -> Vec<[f64; 2]> {
    let b = boundary.len();
    assert!(b >= 1, "boundary must be nonempty");
    (0..k)
        .map(|i| {
            let idx = if b >= k {
                ((i as f64 * b as f64 / k as f64).round() as usize).min(b - 1)
            } else {
                i % b
            };
            let (r, c) = boundary[idx];
            relative_offset(r, c, sums)
        })
        .collect()
}

/// Mean cosine similarity of index-aligned descriptor vectors. Zero-length
/// vectors contribute cosine 0.
pub fn part_similarity(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    assert_eq!(a.len(), b.len(), "descriptors must have the same length");
    let mut sum = 0.0;
    for (va, vb) in a.iter().zip(b) {
        let na = (va[0] * va[0] + va[1] * va[1]).sqrt();
        let nb = (vb[0] * vb[0] + vb[1] * vb[1]).sqrt();
        if na > 0.0 && nb > 0.0 {
            sum += (va[0] * vb[0] + va[1] * vb[1]) / (na * nb);
        }
    }
    sum / a.len() as f64
}

/// Cosine of two offset vectors; zero-length offsets yield 0.
pub fn edge_similarity(a: [f64; 2], b: [f64; 2]) -> f64 {
    let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a[0] * b[0] + a[1] * b[1]) / (na * nb)
}

/// Cosine with an optional magnitude gate: when `delta` is given, offsets
/// whose min/max length ratio falls below `1 - delta` score 0.
pub fn edge_similarity_gated(a: [f64; 2], b: [f64; 2], delta: Option<f64>) -> f64 {
    if let Some(delta) = delta {
        let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let ratio = na.min(nb) / na.max(nb);
        if ratio < 1.0 - delta {
            return 0.0;
        }
    }
    edge_similarity(a, b)
}

/// One part per label of the segmentation, with centroid, descriptor, and
/// mean color. Part ids equal the label indices.
pub fn extract_parts(
    labeling: &SegmentLabeling,
    image: &ImageGrid,
    image_index: usize,
    params: &DescriptorParams,
) -> Vec<Part> {
    assert_eq!(labeling.labels.len(), image.len());
    let m = labeling.num_parts as usize;
    let mut pixel_sets: Vec<PixelSet> = vec![PixelSet::new(); m];
    let mut color_sums = vec![[0.0f64; 3]; m];
    for r in 0..labeling.height {
        for c in 0..labeling.width {
            let l = labeling.label(r, c) as usize;
            pixel_sets[l].insert((r, c));
            let px = image.get(r, c);
            for ch in 0..3 {
                color_sums[l][ch] += px[ch] as f64;
            }
        }
    }
    pixel_sets
        .into_iter()
        .zip(color_sums)
        .enumerate()
        .map(|(id, (pixels, sums))| {
            let n = pixels.len() as f64;
            let mean = [sums[0] / n, sums[1] / n, sums[2] / n];
            Part::from_pixels(id, image_index, pixels, mean, params.k)
        })
        .collect()
}

/// Unordered adjacency pairs (label_a, label_b) of a labeling, a < b.
pub fn adjacency_pairs(labeling: &SegmentLabeling) -> Vec<(u32, u32)> {
    let mut pairs = std::collections::BTreeSet::new();
    for r in 0..labeling.height {
        for c in 0..labeling.width {
            let l = labeling.label(r, c);
            if c + 1 < labeling.width {
                let n = labeling.label(r, c + 1);
                if n != l {
                    pairs.insert((l.min(n), l.max(n)));
                }
            }
            if r + 1 < labeling.height {
                let n = labeling.label(r + 1, c);
                if n != l {
                    pairs.insert((l.min(n), l.max(n)));
                }
            }
        }
    }
    pairs.into_iter().collect()
}

impl PartGraph {
    /// Builds the graph from per-image part lists. Part ids are rewritten to
    /// global indices; adjacency is detected from 4-neighboring pixels.
    pub fn build(parts_per_image: Vec<Vec<Part>>) -> PartGraph {
        let mut parts = Vec::new();
        for (image_index, image_parts) in parts_per_image.into_iter().enumerate() {
            for mut p in image_parts {
                p.image_index = image_index;
                p.part_id = parts.len();
                parts.push(p);
            }
        }

        // pixel -> part map per image for adjacency detection
        let mut adjacent_pairs = std::collections::BTreeSet::new();
        let mut by_image: HashMap<usize, HashMap<(u32, u32), usize>> = HashMap::new();
        for p in &parts {
            let map = by_image.entry(p.image_index).or_default();
            for &px in &p.pixels {
                map.insert(px, p.part_id);
            }
        }
        for p in &parts {
            let map = &by_image[&p.image_index];
            for &(r, c) in &p.pixels {
                for (dr, dc) in [(1i64, 0i64), (0, 1)] {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 {
                        continue;
                    }
                    if let Some(&q) = map.get(&(nr as u32, nc as u32)) {
                        if q != p.part_id {
                            adjacent_pairs.insert((p.part_id.min(q), p.part_id.max(q)));
                        }
                    }
                }
            }
        }

        Self::assemble(parts, &adjacent_pairs.into_iter().collect::<Vec<_>>())
    }

    /// Builds a graph with an explicitly supplied adjacency relation. Used by
    /// synthetic-graph tests and scaling benchmarks.
    pub fn from_parts_with_adjacency(parts: Vec<Part>, adjacent: &[(usize, usize)]) -> PartGraph {
        let mut reindexed = parts;
        for (i, p) in reindexed.iter_mut().enumerate() {
            p.part_id = i;
        }
        Self::assemble(reindexed, adjacent)
    }

    fn assemble(parts: Vec<Part>, adjacent: &[(usize, usize)]) -> PartGraph {
        let m = parts.len();
        let mut is_adjacent = std::collections::BTreeSet::new();
        for &(a, b) in adjacent {
            assert!(a < m && b < m && a != b);
            assert_eq!(
                parts[a].image_index, parts[b].image_index,
                "adjacent parts must share an image"
            );
            is_adjacent.insert((a.min(b), a.max(b)));
        }
        let mut edges = Vec::new();
        for a in 0..m {
            for b in (a + 1)..m {
                if parts[a].image_index != parts[b].image_index {
                    continue;
                }
                edges.push(SpatialEdge {
                    a,
                    b,
                    offset: [
                        parts[b].centroid[0] - parts[a].centroid[0],
                        parts[b].centroid[1] - parts[a].centroid[1],
                    ],
                    adjacent: is_adjacent.contains(&(a, b)),
                });
            }
        }
        let mut adjacency = vec![Vec::new(); m];
        for &(a, b) in &is_adjacent {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        PartGraph {
            parts,
            edges,
            adjacency,
        }
    }

    #[inline]
    pub fn adjacent_neighbors(&self, part: usize) -> &[usize] {
        &self.adjacency[part]
    }

    /// Offset vector centroid(to) - centroid(from).
    #[inline]
    pub fn offset(&self, from: usize, to: usize) -> [f64; 2] {
        [
            self.parts[to].centroid[0] - self.parts[from].centroid[0],
            self.parts[to].centroid[1] - self.parts[from].centroid[1],
        ]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn max_adjacency_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Mean adjacency degree per image, as (image_index, average degree).
    pub fn average_adjacency_degree_per_image(&self) -> Vec<(usize, f64)> {
        let mut degree_sum: HashMap<usize, (usize, usize)> = HashMap::new();
        for p in &self.parts {
            let e = degree_sum.entry(p.image_index).or_insert((0, 0));
            e.0 += self.adjacency[p.part_id].len();
            e.1 += 1;
        }
        let mut out: Vec<(usize, f64)> = degree_sum
            .into_iter()
            .map(|(img, (deg, cnt))| (img, deg as f64 / cnt as f64))
            .collect();
        out.sort_unstable_by_key(|&(img, _)| img);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::{felzenszwalb_segment, SegmentationParams};

    fn pixset(coords: &[(u32, u32)]) -> PixelSet {
        coords.iter().copied().collect()
    }

    #[test]
    fn two_by_two_descriptor_in_angular_order() {
        let p = Part::from_pixels(0, 0, pixset(&[(0, 0), (0, 1), (1, 0), (1, 1)]), [0.0; 3], 4);
        assert_eq!(p.centroid, [0.5, 0.5]);
        let expect = [[0.5, 0.5], [0.5, -0.5], [-0.5, -0.5], [-0.5, 0.5]];
        for (got, want) in p.descriptor.iter().zip(expect.iter()) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_pixel_boundary_is_itself() {
        let px = pixset(&[(3, 7)]);
        let b = boundary_pixels(&px);
        assert_eq!(b, vec![(3, 7)]);
        // B = 1, K = 64: 64 copies of the single offset vector
        let v = sample_shape_descriptor(&px, 64);
        assert_eq!(v.len(), 64);
        assert!(v.iter().all(|&o| o == v[0]));
    }

    #[test]
    fn boundary_count_equals_sampling_when_b_equals_k() {
        let px = pixset(&[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let b = boundary_pixels(&px);
        assert_eq!(b.len(), 4);
        let v = sample_shape_descriptor(&px, 4);
        // all boundary pixels used in order
        for (i, &(r, c)) in b.iter().enumerate() {
            assert_eq!(v[i], [r as f64 - 0.5, c as f64 - 0.5]);
        }
    }

    #[test]
    fn solid_square_boundary_excludes_interior() {
        let mut coords = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                coords.push((r, c));
            }
        }
        let px = pixset(&coords);
        let b = boundary_pixels(&px);
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&(1, 1)));
    }

    #[test]
    fn thin_bar_is_all_boundary() {
        let mut coords = Vec::new();
        for r in 0..2 {
            for c in 0..5 {
                coords.push((r, c));
            }
        }
        let px = pixset(&coords);
        assert_eq!(boundary_pixels(&px).len(), 10);
    }

    #[test]
    fn translation_leaves_descriptor_unchanged() {
        let a = Part::from_pixels(0, 0, pixset(&[(0, 0), (0, 1), (1, 1), (2, 1)]), [0.0; 3], 16);
        let b = Part::from_pixels(
            0,
            0,
            pixset(&[(10, 20), (10, 21), (11, 21), (12, 21)]),
            [0.0; 3],
            16,
        );
        assert_eq!(a.descriptor, b.descriptor);
        assert!(part_similarity(&a.descriptor, &b.descriptor) > 1.0 - 1e-9);
    }

    #[test]
    fn disk_descriptor_norms_near_radius() {
        // rasterized disk of radius 8
        let mut coords = Vec::new();
        for r in 0..20i64 {
            for c in 0..20i64 {
                if (r - 9) * (r - 9) + (c - 9) * (c - 9) <= 64 {
                    coords.push((r as u32, c as u32));
                }
            }
        }
        let p = Part::from_pixels(0, 0, pixset(&coords), [0.0; 3], 64);
        for v in &p.descriptor {
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!((7.0..=9.0).contains(&norm), "norm {norm} out of range");
        }
    }

    #[test]
    fn similarity_basics() {
        let v: Vec<[f64; 2]> = vec![[1.0, 0.0], [0.0, 1.0]];
        assert!((part_similarity(&v, &v) - 1.0).abs() < 1e-9);
        let scaled: Vec<[f64; 2]> = v.iter().map(|&[a, b]| [3.0 * a, 3.0 * b]).collect();
        assert!((part_similarity(&v, &scaled) - 1.0).abs() < 1e-9);
        let orth: Vec<[f64; 2]> = vec![[0.0, 1.0], [-1.0, 0.0]];
        assert!(part_similarity(&v, &orth).abs() < 1e-12);
        // symmetry
        assert_eq!(part_similarity(&v, &orth), part_similarity(&orth, &v));
    }

    #[test]
    fn edge_similarity_basics() {
        assert!((edge_similarity([2.0, 3.0], [2.0, 3.0]) - 1.0).abs() < 1e-12);
        assert!(edge_similarity([1.0, 0.0], [0.0, 1.0]).abs() < 1e-12);
        assert_eq!(edge_similarity([0.0, 0.0], [1.0, 1.0]), 0.0);
        // cosine ignores magnitude unless the gate is on
        assert!((edge_similarity_gated([2.0, 0.0], [10.0, 0.0], None) - 1.0).abs() < 1e-12);
        assert_eq!(edge_similarity_gated([2.0, 0.0], [10.0, 0.0], Some(0.5)), 0.0);
    }

    #[test]
    fn extract_parts_single_label() {
        let img = ImageGrid::new(4, 6, [50, 60, 70]);
        let lab = felzenszwalb_segment(&img, &SegmentationParams::default());
        let parts = extract_parts(&lab, &img, 3, &DescriptorParams::default());
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].image_index, 3);
        assert_eq!(parts[0].centroid, [1.5, 2.5]);
        assert_eq!(parts[0].mean_color, [50.0, 60.0, 70.0]);
    }

    #[test]
    fn graph_edges_complete_per_image() {
        let mk = |id, img, base: u32| {
            Part::from_pixels(
                id,
                img,
                pixset(&[(base, 0), (base, 1)]),
                [0.0; 3],
                8,
            )
        };
        let g = PartGraph::build(vec![
            vec![mk(0, 0, 0), mk(1, 0, 2), mk(2, 0, 4)],
            vec![mk(0, 1, 0)],
        ]);
        // 3 parts in image 0 -> 3 edges; the single part in image 1 has none
        assert_eq!(g.edges.len(), 3);
        assert!(g.edges.iter().all(|e| g.parts[e.a].image_index == g.parts[e.b].image_index));
    }

    #[test]
    fn adjacency_from_shared_pixel_side() {
        let a = Part::from_pixels(0, 0, pixset(&[(0, 0), (0, 1)]), [0.0; 3], 8);
        let b = Part::from_pixels(1, 0, pixset(&[(1, 0), (1, 1)]), [0.0; 3], 8);
        let c = Part::from_pixels(2, 0, pixset(&[(5, 5)]), [0.0; 3], 8);
        let g = PartGraph::build(vec![vec![a, b, c]]);
        assert!(g.is_adjacent(0, 1));
        assert!(!g.is_adjacent(0, 2));
        let adj_edges: Vec<_> = g.edges.iter().filter(|e| e.adjacent).collect();
        assert_eq!(adj_edges.len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_pixels() -> impl Strategy<Value = PixelSet> {
            proptest::collection::btree_set((0u32..24, 0u32..24), 1..40)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            /// Translating a pixel set leaves the descriptor unchanged, bit
            /// for bit.
            #[test]
            fn descriptor_translation_invariance(px in arb_pixels(), dr in 0u32..50, dc in 0u32..50) {
                let moved: PixelSet = px.iter().map(|&(r, c)| (r + dr, c + dc)).collect();
                prop_assert_eq!(
                    sample_shape_descriptor(&px, 32),
                    sample_shape_descriptor(&moved, 32)
                );
            }

            /// Similarity is symmetric, bounded, and 1 on itself.
            #[test]
            fn similarity_symmetric_and_bounded(a in arb_pixels(), b in arb_pixels()) {
                let (va, vb) = (sample_shape_descriptor(&a, 16), sample_shape_descriptor(&b, 16));
                let s = part_similarity(&va, &vb);
                prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&s));
                prop_assert_eq!(s, part_similarity(&vb, &va));
                // self-similarity is 1 when no sampled offset degenerates to
                // the zero vector (a boundary pixel exactly on the centroid)
                if va.iter().all(|v| v[0] != 0.0 || v[1] != 0.0) {
                    prop_assert!(part_similarity(&va, &va) > 1.0 - 1e-9);
                }
            }
        }
    }
}
