//! Memory-driven object discovery on unseen images.
//!
//! Parts are matched against stored part templates (shape plus color); each
//! seed match hypothesizes an object anchor, other templates corroborate the
//! hypothesis through their predicted offsets, and accepted hypotheses claim
//! their parts. Fully corroborated hypotheses are claimed first across the
//! memory's occurrence order, then partially visible ones, so occlusion
//! fill-in never competes with exact matches. Missing templates are
//! rasterized at their stored offsets to complete the amodal mask.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discovery::{discover_objects, DiscoveryConfig, DiscoveryStats};
use crate::error::{Error, Result};
use crate::graph::{
    centroid_of, extract_parts, part_similarity, DescriptorParams, Part, PartGraph,
};
use crate::grid::{color_distance_f64, ImageGrid, PixelSet};
use crate::memory::{summarize_object, FeatureRow, ObjectMemory, PartTemplate};
use crate::scene::io as dataset_io;
use crate::segment::{felzenszwalb_segment, SegmentationParams};

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceParams {
    pub epsilon_mem: f64,
    /// Mean-RGB distance gate for part-template matching (8-bit scale).
    pub color_tolerance: f64,
    /// Absolute fallback (pixels) when offsets are too short for a stable
    /// cosine test.
    pub position_slack: f64,
    /// Offset magnitude agreement: min/max >= 1 - delta.
    pub offset_magnitude_delta: f64,
    /// Hypotheses supported by a single visible part require an essentially
    /// exact shape match (single-template entries always fall in this case).
    pub exact_single_tolerance: f64,
    pub segmentation: SegmentationParams,
    pub descriptor: DescriptorParams,
}

impl Default for InferenceParams {
    fn default() -> Self {
        InferenceParams {
            epsilon_mem: 0.99,
            color_tolerance: 30.0,
            position_slack: 1.5,
            offset_magnitude_delta: 0.25,
            exact_single_tolerance: 1e-9,
            segmentation: SegmentationParams::default(),
            descriptor: DescriptorParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedObject {
    pub entry_id: u64,
    /// Mean template similarity over the matched parts.
    pub score: f64,
    pub modal: PixelSet,
    pub amodal: PixelSet,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Prediction {
    pub objects: Vec<PredictedObject>,
}

struct Hypothesis {
    /// (template slot, part id, similarity), seed first.
    matched: Vec<(usize, usize, f64)>,
}

impl Hypothesis {
    fn count(&self) -> usize {
        self.matched.len()
    }
    fn sim_sum(&self) -> f64 {
        self.matched.iter().map(|&(_, _, s)| s).sum()
    }
}

fn slot_matches(
    part: &Part,
    template: &PartTemplate,
    single_template_entry: bool,
    params: &InferenceParams,
) -> Option<f64> {
    let sim = part_similarity(&part.descriptor, &template.shape);
    let sim_ok = if single_template_entry {
        sim >= 1.0 - params.exact_single_tolerance
    } else {
        sim > params.epsilon_mem
    };
    if sim_ok
        && color_distance_f64(part.mean_color, template.color_summary) <= params.color_tolerance
    {
        Some(sim)
    } else {
        None
    }
}

/// Does the observed part offset agree with the template-predicted offset?
fn offset_agrees(predicted: [f64; 2], actual: [f64; 2], params: &InferenceParams) -> bool {
    let (dr, dc) = (actual[0] - predicted[0], actual[1] - predicted[1]);
    if (dr * dr + dc * dc).sqrt() <= params.position_slack {
        return true;
    }
    let np = (predicted[0] * predicted[0] + predicted[1] * predicted[1]).sqrt();
    let na = (actual[0] * actual[0] + actual[1] * actual[1]).sqrt();
    if np == 0.0 || na == 0.0 {
        return false;
    }
    let cos = (predicted[0] * actual[0] + predicted[1] * actual[1]) / (np * na);
    cos > params.epsilon_mem && np.min(na) / np.max(na) >= 1.0 - params.offset_magnitude_delta
}

/// Best hypothesis for one memory entry over the unclaimed parts, or None.
/// `require_full` demands that every template is corroborated.
fn best_hypothesis(
    entry_templates: &[PartTemplate],
    parts: &[Part],
    claimed: &[bool],
    require_full: bool,
    params: &InferenceParams,
) -> Option<Hypothesis> {
    let single = entry_templates.len() == 1;
    let mut best: Option<Hypothesis> = None;
    for seed_slot in 0..entry_templates.len() {
        let seed_template = &entry_templates[seed_slot];
        for (seed_part, part) in parts.iter().enumerate() {
            if claimed[seed_part] {
                continue;
            }
            let Some(seed_sim) = slot_matches(part, seed_template, single, params) else {
                continue;
            };
            let mut matched = vec![(seed_slot, seed_part, seed_sim)];
            let mut used: BTreeSet<usize> = [seed_part].into_iter().collect();
            for (slot, template) in entry_templates.iter().enumerate() {
                if slot == seed_slot {
                    continue;
                }
                let predicted = [
                    template.rel_offset[0] - seed_template.rel_offset[0],
                    template.rel_offset[1] - seed_template.rel_offset[1],
                ];
                let mut candidate: Option<(usize, f64)> = None;
                for (pid, p) in parts.iter().enumerate() {
                    if claimed[pid] || used.contains(&pid) {
                        continue;
                    }
                    let Some(sim) = slot_matches(p, template, false, params) else {
                        continue;
                    };
                    let actual = [
                        p.centroid[0] - part.centroid[0],
                        p.centroid[1] - part.centroid[1],
                    ];
                    if !offset_agrees(predicted, actual, params) {
                        continue;
                    }
                    let better = match candidate {
                        None => true,
                        Some((best_pid, best_sim)) => {
                            sim > best_sim || (sim == best_sim && pid < best_pid)
                        }
                    };
                    if better {
                        candidate = Some((pid, sim));
                    }
                }
                if let Some((pid, sim)) = candidate {
                    matched.push((slot, pid, sim));
                    used.insert(pid);
                }
            }
            let hyp = Hypothesis { matched };
            if require_full && hyp.count() < entry_templates.len() {
                continue;
            }
            // a lone supporting part is single-part evidence: exact or nothing
            if hyp.count() == 1 && seed_sim < 1.0 - params.exact_single_tolerance {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    (hyp.count(), hyp.sim_sum()) > (b.count(), b.sim_sum())
                        || ((hyp.count(), hyp.sim_sum()) == (b.count(), b.sim_sum())
                            && (seed_slot, seed_part)
                                < (b.matched[0].0, b.matched[0].1))
                }
            };
            if better {
                best = Some(hyp);
            }
        }
    }
    best
}

/// Least-squares anchor for a pure translation: the mean of
/// (part centroid - template offset) over the corroborated parts.
fn estimate_anchor(
    matched: &[(usize, usize, f64)],
    entry_templates: &[PartTemplate],
    parts: &[Part],
) -> [f64; 2] {
    let n = matched.len() as f64;
    let mut anchor = [0.0f64; 2];
    for &(slot, pid, _) in matched {
        anchor[0] += parts[pid].centroid[0] - entry_templates[slot].rel_offset[0];
        anchor[1] += parts[pid].centroid[1] - entry_templates[slot].rel_offset[1];
    }
    [anchor[0] / n, anchor[1] / n]
}

/// Fills a polygon through the stored boundary vectors at `center`, even-odd
/// rule, vertices included, clipped to the image bounds.
pub fn rasterize_shape(shape: &[[f64; 2]], center: [f64; 2], bounds: (u32, u32)) -> PixelSet {
    let (h, w) = bounds;
    // strip the cyclic repetition the sampler introduces for small parts
    let period = (1..=shape.len())
        .find(|&p| shape.len().is_multiple_of(p) && (0..shape.len()).all(|i| shape[i] == shape[i % p]))
        .unwrap_or(shape.len());
    let mut vertices: Vec<[f64; 2]> = Vec::with_capacity(period);
    for v in &shape[..period] {
        let vertex = [center[0] + v[0], center[1] + v[1]];
        if vertices.last() != Some(&vertex) {
            vertices.push(vertex);
        }
    }
    let mut out = PixelSet::new();
    if vertices.is_empty() {
        return out;
    }
    let in_bounds = |r: f64, c: f64| r >= 0.0 && c >= 0.0 && (r as u32) < h && (c as u32) < w;
    // vertex pixels
    for v in &vertices {
        let (r, c) = (v[0].round(), v[1].round());
        if in_bounds(r, c) {
            out.insert((r as u32, c as u32));
        }
    }
    if vertices.len() < 3 {
        return out;
    }
    let min_r = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
    let max_r = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
    let min_c = vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
    let max_c = vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
    let max_r = (max_r.max(0) as u32).min(h.saturating_sub(1));
    let max_c = (max_c.max(0) as u32).min(w.saturating_sub(1));
    for r in min_r..=max_r {
        for c in min_c..=max_c {
            let (y, x) = (r as f64, c as f64);
            let mut inside = false;
            for i in 0..vertices.len() {
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                if (a[0] > y) != (b[0] > y) {
                    let t = (y - a[0]) / (b[0] - a[0]);
                    let xx = a[1] + t * (b[1] - a[1]);
                    if x < xx {
                        inside = !inside;
                    }
                }
            }
            if inside {
                out.insert((r, c));
            }
        }
    }
    out
}

/// Completes the amodal mask: every template with no visible part is
/// rasterized at anchor + rel_offset and unioned with the visible pixels.
/// With no corroborated template the mask stays modal.
pub fn fill_occluded(
    entry_templates: &[PartTemplate],
    anchor: [f64; 2],
    matched_slots: &BTreeSet<usize>,
    modal: &PixelSet,
    bounds: (u32, u32),
) -> PixelSet {
    let mut amodal = modal.clone();
    if matched_slots.is_empty() {
        return amodal;
    }
    for (slot, template) in entry_templates.iter().enumerate() {
        if matched_slots.contains(&slot) {
            continue;
        }
        let center = [
            anchor[0] + template.rel_offset[0],
            anchor[1] + template.rel_offset[1],
        ];
        amodal.extend(rasterize_shape(&template.shape, center, bounds));
    }
    amodal
}

/// Runs segmentation, template-anchored matching in memory occurrence order,
/// and amodal completion on one image.
pub fn discover_in_image(
    image: &ImageGrid,
    memory: &ObjectMemory,
    params: &InferenceParams,
) -> Result<Prediction> {
    if !memory.finalized {
        return Err(Error::NotFinalized);
    }
    let labeling = felzenszwalb_segment(image, &params.segmentation);
    let parts = extract_parts(&labeling, image, 0, &params.descriptor);
    let bounds = (image.height, image.width);

    let mut claimed = vec![false; parts.len()];
    let mut objects: Vec<PredictedObject> = Vec::new();
    for require_full in [true, false] {
        for entry in &memory.entries {
            if entry.templates.is_empty() {
                continue;
            }
            while let Some(hyp) =
                best_hypothesis(&entry.templates, &parts, &claimed, require_full, params)
            {
                let anchor = estimate_anchor(&hyp.matched, &entry.templates, &parts);
                let matched_slots: BTreeSet<usize> =
                    hyp.matched.iter().map(|&(slot, _, _)| slot).collect();
                let mut modal = PixelSet::new();
                for &(_, pid, _) in &hyp.matched {
                    claimed[pid] = true;
                    modal.extend(parts[pid].pixels.iter().copied());
                }
                let mut amodal =
                    fill_occluded(&entry.templates, anchor, &matched_slots, &modal, bounds);
                // absorb visible fragments of occluded parts: unclaimed parts
                // whose color matches a missing template and whose pixels lie
                // inside that template's predicted footprint
                for (slot, template) in entry.templates.iter().enumerate() {
                    if matched_slots.contains(&slot) {
                        continue;
                    }
                    let center = [
                        anchor[0] + template.rel_offset[0],
                        anchor[1] + template.rel_offset[1],
                    ];
                    let footprint = rasterize_shape(&template.shape, center, bounds);
                    let grown = dilate(&footprint, bounds);
                    for (pid, part) in parts.iter().enumerate() {
                        if claimed[pid]
                            || color_distance_f64(part.mean_color, template.color_summary)
                                > params.color_tolerance
                        {
                            continue;
                        }
                        if part.pixels.iter().all(|p| grown.contains(p)) {
                            claimed[pid] = true;
                            modal.extend(part.pixels.iter().copied());
                            amodal.extend(part.pixels.iter().copied());
                        }
                    }
                }
                let score = hyp.sim_sum() / hyp.count() as f64;
                objects.push(PredictedObject {
                    entry_id: entry.entry_id,
                    score,
                    modal,
                    amodal,
                });
            }
        }
    }
    Ok(Prediction { objects })
}

fn dilate(mask: &PixelSet, bounds: (u32, u32)) -> PixelSet {
    let (h, w) = bounds;
    let mut out = mask.clone();
    for &(r, c) in mask {
        for (dr, dc) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr >= 0 && nc >= 0 && (nr as u32) < h && (nc as u32) < w {
                out.insert((nr as u32, nc as u32));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub batch_size: usize,
    pub segmentation: SegmentationParams,
    pub descriptor: DescriptorParams,
    pub discovery: DiscoveryConfig,
    pub memory_threshold: f64,
    pub max_views: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            batch_size: 2,
            segmentation: SegmentationParams::default(),
            descriptor: DescriptorParams::default(),
            discovery: DiscoveryConfig::default(),
            memory_threshold: 0.99,
            max_views: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchRecord {
    pub index: usize,
    pub sample_ids: Vec<String>,
    pub clusters: Vec<Vec<usize>>,
    pub pairwise_comparisons: u64,
    pub merges: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TrainReport {
    pub batches: Vec<BatchRecord>,
    pub total_comparisons: u64,
    pub total_merges: u64,
    pub clusters_integrated: u64,
    /// Maximum of comparisons / (M^2 d^2) observed over all batches.
    pub max_comparison_ratio: f64,
}

/// Discovers objects over one in-memory batch and returns the clusters with
/// their graph plus stats. Shared by training and the stats dump.
pub fn discover_batch(
    images: &[ImageGrid],
    options: &TrainOptions,
) -> Result<(PartGraph, Vec<crate::discovery::ObjectCluster>, DiscoveryStats)> {
    let parts_per_image: Vec<Vec<Part>> = images
        .par_iter()
        .map(|img| {
            let labeling = felzenszwalb_segment(img, &options.segmentation);
            extract_parts(&labeling, img, 0, &options.descriptor)
        })
        .collect();
    let graph = PartGraph::build(parts_per_image);
    let (clusters, stats) = discover_objects(&graph, &options.discovery)?;
    Ok((graph, clusters, stats))
}

/// Training: iterate manifest batches, run co-part discovery, integrate the
/// summarized objects into memory, and finalize.
pub fn train_memory(dataset_dir: &Path, options: &TrainOptions) -> Result<(ObjectMemory, TrainReport)> {
    let manifest = dataset_io::read_manifest(dataset_dir)?;
    if manifest.samples.is_empty() {
        return Err(Error::Manifest("dataset has no samples".into()));
    }
    let mut memory = ObjectMemory::new(options.memory_threshold, options.max_views);
    let mut report = TrainReport::default();
    let ids: Vec<String> = manifest.samples.iter().map(|s| s.id.clone()).collect();
    for (batch_index, chunk) in ids.chunks(options.batch_size.max(1)).enumerate() {
        let images: Vec<ImageGrid> = chunk
            .iter()
            .map(|id| dataset_io::load_image(dataset_dir, id))
            .collect::<Result<Vec<_>>>()?;
        let (graph, clusters, stats) = discover_batch(&images, options)?;
        let summarized = clusters
            .iter()
            .map(|c| summarize_object(c, &graph, options.descriptor.k))
            .collect();
        memory.update(summarized)?;

        let m = graph.parts.len() as f64;
        let d = graph.max_adjacency_degree() as f64;
        let denom = (m * m * d * d).max(1.0);
        report.max_comparison_ratio = report
            .max_comparison_ratio
            .max(stats.pairwise_comparisons as f64 / denom);
        report.total_comparisons += stats.pairwise_comparisons;
        report.total_merges += stats.merges;
        report.clusters_integrated += clusters.len() as u64;
        report.batches.push(BatchRecord {
            index: batch_index,
            sample_ids: chunk.to_vec(),
            clusters: clusters
                .iter()
                .map(|c| c.member_parts.iter().copied().collect())
                .collect(),
            pairwise_comparisons: stats.pairwise_comparisons,
            merges: stats.merges,
            wall_ms: stats.wall_time.as_secs_f64() * 1e3,
        });
    }
    memory.finalize()?;
    log::info!(
        "stage=train batches={} entries={} occurrences={}",
        report.batches.len(),
        memory.entries.len(),
        memory.total_occurrences()
    );
    Ok((memory, report))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionManifest {
    pub version: u32,
    pub samples: Vec<PredictionRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub objects: Vec<PredictedObjectRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictedObjectRecord {
    pub entry_id: u64,
    pub score: f64,
}

/// Test mode: predictions for every manifest sample, optionally written as
/// index masks plus `predictions.json`.
pub fn infer_dataset(
    dataset_dir: &Path,
    memory: &ObjectMemory,
    params: &InferenceParams,
    out_dir: Option<&Path>,
) -> Result<Vec<(String, Prediction)>> {
    let manifest = dataset_io::read_manifest(dataset_dir)?;
    let predictions: Vec<(String, Prediction)> = manifest
        .samples
        .par_iter()
        .map(|s| -> Result<(String, Prediction)> {
            let image = dataset_io::load_image(dataset_dir, &s.id)?;
            let pred = discover_in_image(&image, memory, params)?;
            Ok((s.id.clone(), pred))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(out) = out_dir {
        write_predictions(&predictions, manifest.image_size, out)?;
    }
    Ok(predictions)
}

pub fn write_predictions(
    predictions: &[(String, Prediction)],
    image_size: (u32, u32),
    out_dir: &Path,
) -> Result<()> {
    let modal_dir = out_dir.join("pred_modal");
    let amodal_dir = out_dir.join("pred_amodal");
    fs::create_dir_all(&modal_dir).map_err(|e| Error::io(&modal_dir, e))?;
    fs::create_dir_all(&amodal_dir).map_err(|e| Error::io(&amodal_dir, e))?;
    let (h, w) = image_size;
    let mut records = Vec::with_capacity(predictions.len());
    for (id, pred) in predictions {
        let mut modal = vec![0u8; (h * w) as usize];
        for (k, obj) in pred.objects.iter().enumerate() {
            for &(r, c) in &obj.modal {
                modal[(r * w + c) as usize] = (k + 1) as u8;
            }
        }
        let path = modal_dir.join(format!("{id}.png"));
        image::GrayImage::from_raw(w, h, modal)
            .expect("buffer matches dimensions")
            .save(&path)
            .map_err(|e| Error::image(&path, e))?;
        for (k, obj) in pred.objects.iter().enumerate() {
            let mut binary = vec![0u8; (h * w) as usize];
            for &(r, c) in &obj.amodal {
                binary[(r * w + c) as usize] = 255;
            }
            let path = amodal_dir.join(format!("{id}_{k}.png"));
            image::GrayImage::from_raw(w, h, binary)
                .expect("buffer matches dimensions")
                .save(&path)
                .map_err(|e| Error::image(&path, e))?;
        }
        records.push(PredictionRecord {
            id: id.clone(),
            objects: pred
                .objects
                .iter()
                .map(|o| PredictedObjectRecord {
                    entry_id: o.entry_id,
                    score: o.score,
                })
                .collect(),
        });
    }
    let manifest = PredictionManifest {
        version: 1,
        samples: records,
    };
    let path = out_dir.join("predictions.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("serializes"))
        .map_err(|e| Error::io(&path, e))
}

/// Reads prediction masks back for evaluation. Modal masks come from the
/// index PNG; amodal masks are enumerated per object file.
pub fn load_prediction_masks(
    pred_dir: &Path,
    id: &str,
    mode: crate::metrics::EvalMode,
) -> Result<Vec<PixelSet>> {
    match mode {
        crate::metrics::EvalMode::Modal => {
            let path = pred_dir.join(format!("pred_modal/{id}.png"));
            let img = image::open(&path).map_err(|e| Error::image(&path, e))?.to_luma8();
            let (w, h) = img.dimensions();
            let data = img.into_raw();
            let max = data.iter().copied().max().unwrap_or(0) as usize;
            let mut masks = vec![PixelSet::new(); max];
            for r in 0..h {
                for c in 0..w {
                    let v = data[(r * w + c) as usize] as usize;
                    if v > 0 {
                        masks[v - 1].insert((r, c));
                    }
                }
            }
            Ok(masks)
        }
        crate::metrics::EvalMode::Amodal => {
            let mut masks: Vec<PixelSet> = Vec::new();
            loop {
                let path = pred_dir.join(format!("pred_amodal/{id}_{}.png", masks.len()));
                if !path.exists() {
                    break;
                }
                let img = image::open(&path).map_err(|e| Error::image(&path, e))?.to_luma8();
                let (w, h) = img.dimensions();
                let data = img.into_raw();
                let mut mask = PixelSet::new();
                for r in 0..h {
                    for c in 0..w {
                        if data[(r * w + c) as usize] > 0 {
                            mask.insert((r, c));
                        }
                    }
                }
                masks.push(mask);
            }
            Ok(masks)
        }
    }
}

/// Predicted modal label map (0 = background) for the foreground-ARI metric.
pub fn load_prediction_label_map(
    pred_dir: &Path,
    id: &str,
    height: u32,
    width: u32,
) -> Result<Vec<u32>> {
    let path = pred_dir.join(format!("pred_modal/{id}.png"));
    let img = image::open(&path).map_err(|e| Error::image(&path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    if (h, w) != (height, width) {
        return Err(Error::Manifest(format!(
            "prediction {id} is {h}x{w}, ground truth is {height}x{width}"
        )));
    }
    Ok(img.into_raw().into_iter().map(|v| v as u32).collect())
}

/// Feature rows for every predicted object of a dataset, in sample order.
pub fn export_features(
    dataset_dir: &Path,
    memory: &ObjectMemory,
    params: &InferenceParams,
) -> Result<Vec<FeatureRow>> {
    use crate::graph::sample_shape_descriptor;
    let manifest = dataset_io::read_manifest(dataset_dir)?;
    let mut rows = Vec::new();
    for s in &manifest.samples {
        let image = dataset_io::load_image(dataset_dir, &s.id)?;
        let pred = discover_in_image(&image, memory, params)?;
        for obj in &pred.objects {
            if obj.modal.is_empty() {
                continue;
            }
            let mut color_sum = [0.0f64; 3];
            for &(r, c) in &obj.modal {
                let px = image.get(r, c);
                for ch in 0..3 {
                    color_sum[ch] += px[ch] as f64;
                }
            }
            let n = obj.modal.len() as f64;
            rows.push(FeatureRow {
                descriptor: sample_shape_descriptor(&obj.modal, params.descriptor.k),
                entry_id: obj.entry_id,
                centroid: centroid_of(&obj.modal),
                mean_color: [color_sum[0] / n, color_sum[1] / n, color_sum[2] / n],
            });
        }
    }
    Ok(rows)
}
