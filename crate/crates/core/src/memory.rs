//! Persistent object memory: object-level boundary views, constituent part
//! templates with relative offsets, and occurrence counts. Finalizing sorts
//! entries by occurrence so that frequently seen objects take priority.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::discovery::ObjectCluster;
use crate::error::{Error, Result};
use crate::graph::{part_similarity, sample_shape_descriptor, PartGraph};
use crate::grid::PixelSet;

pub const MEMORY_MAGIC: &[u8; 8] = b"ECOSCMEM";
pub const MEMORY_VERSION: u32 = 1;

/// Matching scores within this distance of 1 count as an exact re-occurrence
/// rather than a new view.
const EXACT_SCORE_TOLERANCE: f64 = 1e-9;

/// Boundary descriptor of a whole object (union of its parts' pixels).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectView {
    pub descriptor: Vec<[f64; 2]>,
    pub mask_size: u64,
}

/// Stored description of one constituent part.
#[derive(Debug, Clone, PartialEq)]
pub struct PartTemplate {
    pub shape: Vec<[f64; 2]>,
    /// Object centroid -> part centroid.
    pub rel_offset: [f64; 2],
    pub color_summary: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub entry_id: u64,
    pub views: Vec<ObjectView>,
    pub templates: Vec<PartTemplate>,
    /// Adjacency among templates, indices into `templates`.
    pub template_edges: Vec<(u32, u32)>,
    pub occurrence_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMemory {
    pub entries: Vec<MemoryEntry>,
    pub match_threshold: f64,
    pub max_views: usize,
    pub finalized: bool,
    next_entry_id: u64,
}

/// One discovered object ready for memory integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SummarizedObject {
    pub view: ObjectView,
    pub templates: Vec<PartTemplate>,
    pub template_edges: Vec<(u32, u32)>,
}

/// Builds the object-level view (union mask boundary) and one template per
/// member part, with offsets relative to the object centroid.
pub fn summarize_object(cluster: &ObjectCluster, graph: &PartGraph, k: usize) -> SummarizedObject {
    let members: Vec<usize> = cluster.member_parts.iter().copied().collect();
    assert!(!members.is_empty(), "cluster must have members");
    let mut union: PixelSet = PixelSet::new();
    for &m in &members {
        union.extend(graph.parts[m].pixels.iter().copied());
    }
    let view = ObjectView {
        descriptor: sample_shape_descriptor(&union, k),
        mask_size: union.len() as u64,
    };
    let sums = |px: &PixelSet| {
        let (mut sr, mut sc) = (0u64, 0u64);
        for &(r, c) in px {
            sr += r as u64;
            sc += c as u64;
        }
        (sr as f64, sc as f64, px.len() as f64)
    };
    let (usr, usc, un) = sums(&union);
    let templates = members
        .iter()
        .map(|&m| {
            let p = &graph.parts[m];
            let (psr, psc, pn) = sums(&p.pixels);
            // integer numerators keep the offset translation invariant
            PartTemplate {
                shape: p.descriptor.clone(),
                rel_offset: [
                    (psr * un - usr * pn) / (pn * un),
                    (psc * un - usc * pn) / (pn * un),
                ],
                color_summary: p.mean_color,
            }
        })
        .collect();
    let index_of = |part: usize| members.iter().position(|&m| m == part).unwrap() as u32;
    let template_edges = cluster
        .internal_edges
        .iter()
        .map(|&(a, b)| (index_of(a), index_of(b)))
        .collect();
    SummarizedObject {
        view,
        templates,
        template_edges,
    }
}

impl ObjectMemory {
    pub fn new(match_threshold: f64, max_views: usize) -> Self {
        ObjectMemory {
            entries: Vec::new(),
            match_threshold,
            max_views,
            finalized: false,
            next_entry_id: 0,
        }
    }

    /// Best entry for a view: the maximum descriptor similarity over all
    /// stored views, if it exceeds the match threshold. Ties go to the
    /// smallest entry id.
    pub fn match_view(&self, view: &ObjectView) -> Option<(u64, f64)> {
        let mut best: Option<(u64, f64)> = None;
        for entry in &self.entries {
            for stored in &entry.views {
                let score = part_similarity(&view.descriptor, &stored.descriptor);
                let better = match best {
                    None => true,
                    Some((best_id, best_score)) => {
                        score > best_score
                            || (score == best_score && entry.entry_id < best_id)
                    }
                };
                if better {
                    best = Some((entry.entry_id, score));
                }
            }
        }
        best.filter(|&(_, score)| score > self.match_threshold)
    }

    /// Integrates discovered objects: a match increments the occurrence count
    /// (recording the view as a new variant when it is not an exact repeat),
    /// otherwise a new entry is created.
    pub fn update(&mut self, discovered: Vec<SummarizedObject>) -> Result<()> {
        if self.finalized {
            return Err(Error::Finalized);
        }
        for obj in discovered {
            match self.match_view(&obj.view) {
                Some((entry_id, score)) => {
                    let entry = self
                        .entries
                        .iter_mut()
                        .find(|e| e.entry_id == entry_id)
                        .expect("matched entry exists");
                    entry.occurrence_count += 1;
                    if score < 1.0 - EXACT_SCORE_TOLERANCE && entry.views.len() < self.max_views {
                        entry.views.push(obj.view);
                    }
                }
                None => {
                    self.entries.push(MemoryEntry {
                        entry_id: self.next_entry_id,
                        views: vec![obj.view],
                        templates: obj.templates,
                        template_edges: obj.template_edges,
                        occurrence_count: 1,
                    });
                    self.next_entry_id += 1;
                }
            }
        }
        Ok(())
    }

    /// Sorts entries by non-increasing occurrence count (ties by entry id).
    pub fn finalize(&mut self) -> Result<()> {
        if self.finalized {
            return Err(Error::Finalized);
        }
        self.entries
            .sort_by_key(|e| (std::cmp::Reverse(e.occurrence_count), e.entry_id));
        self.finalized = true;
        Ok(())
    }

    pub fn total_occurrences(&self) -> u64 {
        self.entries.iter().map(|e| e.occurrence_count).sum()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MEMORY_MAGIC);
        put_u32(&mut buf, MEMORY_VERSION);
        put_f64(&mut buf, self.match_threshold);
        put_u32(&mut buf, self.max_views as u32);
        buf.push(self.finalized as u8);
        put_u64(&mut buf, self.next_entry_id);
        put_u32(&mut buf, self.entries.len() as u32);
        for e in &self.entries {
            put_u64(&mut buf, e.entry_id);
            put_u64(&mut buf, e.occurrence_count);
            put_u32(&mut buf, e.views.len() as u32);
            for v in &e.views {
                put_u64(&mut buf, v.mask_size);
                put_vectors(&mut buf, &v.descriptor);
            }
            put_u32(&mut buf, e.templates.len() as u32);
            for t in &e.templates {
                put_vectors(&mut buf, &t.shape);
                put_f64(&mut buf, t.rel_offset[0]);
                put_f64(&mut buf, t.rel_offset[1]);
                for ch in t.color_summary {
                    put_f64(&mut buf, ch);
                }
            }
            put_u32(&mut buf, e.template_edges.len() as u32);
            for &(a, b) in &e.template_edges {
                put_u32(&mut buf, a);
                put_u32(&mut buf, b);
            }
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)
            .map_err(|e| Error::io(path, e))?
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path, e))?;
        let mut r = Reader { bytes: &bytes, pos: 0 };
        let magic = r.take(8)?;
        if magic != MEMORY_MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.u32()?;
        if version != MEMORY_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let match_threshold = r.f64()?;
        let max_views = r.u32()? as usize;
        let finalized = r.u8()? != 0;
        let next_entry_id = r.u64()?;
        let n_entries = r.u32()? as usize;
        let mut entries = Vec::with_capacity(n_entries);
        for _ in 0..n_entries {
            let entry_id = r.u64()?;
            let occurrence_count = r.u64()?;
            let n_views = r.u32()? as usize;
            let mut views = Vec::with_capacity(n_views);
            for _ in 0..n_views {
                let mask_size = r.u64()?;
                views.push(ObjectView {
                    mask_size,
                    descriptor: r.vectors()?,
                });
            }
            let n_templates = r.u32()? as usize;
            let mut templates = Vec::with_capacity(n_templates);
            for _ in 0..n_templates {
                let shape = r.vectors()?;
                let rel_offset = [r.f64()?, r.f64()?];
                let color_summary = [r.f64()?, r.f64()?, r.f64()?];
                templates.push(PartTemplate {
                    shape,
                    rel_offset,
                    color_summary,
                });
            }
            let n_edges = r.u32()? as usize;
            let mut template_edges = Vec::with_capacity(n_edges);
            for _ in 0..n_edges {
                template_edges.push((r.u32()?, r.u32()?));
            }
            entries.push(MemoryEntry {
                entry_id,
                views,
                templates,
                template_edges,
                occurrence_count,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(ObjectMemory {
            entries,
            match_threshold,
            max_views,
            finalized,
            next_entry_id,
        })
    }
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_vectors(buf: &mut Vec<u8>, vectors: &[[f64; 2]]) {
    put_u32(buf, vectors.len() as u32);
    for v in vectors {
        put_f64(buf, v[0]);
        put_f64(buf, v[1]);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Corrupt("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn vectors(&mut self) -> Result<Vec<[f64; 2]>> {
        let n = self.u32()? as usize;
        if n > 1 << 20 {
            return Err(Error::Corrupt(format!("vector list of length {n}")));
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push([self.f64()?, self.f64()?]);
        }
        Ok(out)
    }
}

/// A feature-table row for one matched object.
#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub descriptor: Vec<[f64; 2]>,
    pub entry_id: u64,
    pub centroid: [f64; 2],
    pub mean_color: [f64; 3],
}

/// Feature rows straight from a finalized memory: one row per entry with the
/// first stored view and the mean template color; centroids are zero since a
/// memory entry is position free.
pub fn memory_feature_rows(memory: &ObjectMemory) -> Vec<FeatureRow> {
    memory
        .entries
        .iter()
        .map(|e| {
            let n = e.templates.len().max(1) as f64;
            let mut color = [0.0f64; 3];
            for t in &e.templates {
                for (acc, &v) in color.iter_mut().zip(&t.color_summary) {
                    *acc += v / n;
                }
            }
            FeatureRow {
                descriptor: e.views[0].descriptor.clone(),
                entry_id: e.entry_id,
                centroid: [0.0, 0.0],
                mean_color: color,
            }
        })
        .collect()
}

/// Writes the delimited feature table: the flattened 2K descriptor followed
/// by the matched entry id, object centroid, and mean color.
pub fn export_object_features(rows: &[FeatureRow], k: usize, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..2 * k {
        out.push_str(&format!("v{i:03},"));
    }
    out.push_str("entry_id,centroid_row,centroid_col,mean_color\n");
    for row in rows {
        assert_eq!(row.descriptor.len(), k, "descriptor length must equal K");
        for v in &row.descriptor {
            out.push_str(&format!("{},{},", v[0], v[1]));
        }
        let mean = (row.mean_color[0] + row.mean_color[1] + row.mean_color[2]) / 3.0;
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.entry_id, row.centroid[0], row.centroid[1], mean
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
