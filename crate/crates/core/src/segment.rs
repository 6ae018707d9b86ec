//! Graph-based image segmentation over the 4-connected pixel grid.
//!
//! Edges are weighted by RGB Euclidean distance and processed in ascending
//! order (Kruskal style). Two components merge when the connecting edge weight
//! does not exceed the smaller of their internal thresholds
//! `Int(C) + tau / |C|`, where `Int(C)` is the largest weight merged inside C
//! so far. A post-pass absorbs components below `min_size` into the neighbor
//! across their minimum-weight boundary edge.

use rayon::prelude::*;

use crate::grid::ImageGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationParams {
    pub threshold: f64,
    pub min_size: usize,
    pub smoothing_sigma: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            threshold: 10.0,
            min_size: 1,
            smoothing_sigma: 0.0,
        }
    }
}

/// Per-pixel part assignment. Labels are dense in `0..num_parts` and numbered
/// in first-pixel scan order; every label region is 4-connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentLabeling {
    pub height: u32,
    pub width: u32,
    pub labels: Vec<u32>,
    pub num_parts: u32,
}

impl SegmentLabeling {
    #[inline]
    pub fn label(&self, row: u32, col: u32) -> u32 {
        self.labels[(row * self.width + col) as usize]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// Largest edge weight merged inside the component rooted here.
    internal: Vec<f64>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Union by size; the surviving root records the new internal maximum.
    fn union(&mut self, a: u32, b: u32, weight: f64) -> u32 {
        let (mut a, mut b) = (a, b);
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        self.internal[a as usize] = self.internal[a as usize]
            .max(self.internal[b as usize])
            .max(weight);
        a
    }
}

fn smoothed_channels(image: &ImageGrid, sigma: f64) -> Vec<[f64; 3]> {
    let mut data: Vec<[f64; 3]> = image
        .pixels
        .iter()
        .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
        .collect();
    if sigma <= 0.0 {
        return data;
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-(i as f64 * i as f64) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }
    let (h, w) = (image.height as i64, image.width as i64);
    let reflect = |i: i64, n: i64| -> i64 {
        if i < 0 {
            -i - 1
        } else if i >= n {
            2 * n - i - 1
        } else {
            i
        }
    };
    // horizontal then vertical pass
    let mut tmp = data.clone();
    for r in 0..h {
        for c in 0..w {
            let mut acc = [0.0; 3];
            for (ki, kv) in kernel.iter().enumerate() {
                let cc = reflect(c + ki as i64 - radius, w);
                let src = data[(r * w + cc) as usize];
                for ch in 0..3 {
                    acc[ch] += kv * src[ch];
                }
            }
            tmp[(r * w + c) as usize] = acc;
        }
    }
    for c in 0..w {
        for r in 0..h {
            let mut acc = [0.0; 3];
            for (ki, kv) in kernel.iter().enumerate() {
                let rr = reflect(r + ki as i64 - radius, h);
                let src = tmp[(rr * w + c) as usize];
                for ch in 0..3 {
                    acc[ch] += kv * src[ch];
                }
            }
            data[(r * w + c) as usize] = acc;
        }
    }
    data
}

#[inline]
fn weight(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
}

pub fn felzenszwalb_segment(image: &ImageGrid, params: &SegmentationParams) -> SegmentLabeling {
    let n = image.len();
    let (h, w) = (image.height, image.width);
    let channels = smoothed_channels(image, params.smoothing_sigma);

    // 4-connected grid edges in scan order: right edge before down edge, so a
    // stable sort on weight resolves ties by (row, col) of the endpoints.
    let mut edges: Vec<(f64, u32, u32)> = Vec::with_capacity(2 * n);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                edges.push((weight(channels[i as usize], channels[(i + 1) as usize]), i, i + 1));
            }
            if r + 1 < h {
                edges.push((
                    weight(channels[i as usize], channels[(i + w) as usize]),
                    i,
                    i + w,
                ));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut dsu = DisjointSet::new(n);
    let tau = params.threshold;
    for &(wgt, a, b) in &edges {
        let ra = dsu.find(a);
        let rb = dsu.find(b);
        if ra == rb {
            continue;
        }
        let limit = (dsu.internal[ra as usize] + tau / dsu.size[ra as usize] as f64)
            .min(dsu.internal[rb as usize] + tau / dsu.size[rb as usize] as f64);
        if wgt <= limit {
            dsu.union(ra, rb, wgt);
        }
    }

    // Absorb undersized components across their cheapest boundary edge.
    if params.min_size > 1 {
        for &(wgt, a, b) in &edges {
            let ra = dsu.find(a);
            let rb = dsu.find(b);
            if ra != rb
                && ((dsu.size[ra as usize] as usize) < params.min_size
                    || (dsu.size[rb as usize] as usize) < params.min_size)
            {
                dsu.union(ra, rb, wgt);
            }
        }
    }

    // Renumber labels in first-pixel scan order.
    let mut label_of_root = vec![u32::MAX; n];
    let mut labels = vec![0u32; n];
    let mut next = 0u32;
    for i in 0..n as u32 {
        let root = dsu.find(i);
        if label_of_root[root as usize] == u32::MAX {
            label_of_root[root as usize] = next;
            next += 1;
        }
        labels[i as usize] = label_of_root[root as usize];
    }

    SegmentLabeling {
        height: h,
        width: w,
        labels,
        num_parts: next,
    }
}

/// Elementwise segmentation of a batch; part ids stay local to each image.
pub fn segment_batch(images: &[ImageGrid], params: &SegmentationParams) -> Vec<SegmentLabeling> {
    images
        .par_iter()
        .map(|img| felzenszwalb_segment(img, params))
        .collect()
}
