//! Dataset directory layout:
//! `images/{id}.png` (RGB), `masks_modal/{id}.png` (index PNG, pixel value =
//! object index + 1, 0 = background), `masks_amodal/{id}_{obj}.png` (binary),
//! and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    gen_multipart_scene, gen_occluded_scene, gen_ood_scene, gen_tetromino_scene,
    multipart_library, tetromino_library, Background, SceneSample, SceneSpec, NUM_TEXTURES,
    SOLID_BACKGROUND,
};
use crate::error::{Error, Result};
use crate::grid::{ImageGrid, PixelSet};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestSample {
    pub id: String,
    pub seed: u64,
    pub template_ids: Vec<u32>,
    pub min_visibility: f64,
    pub background: Background,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub image_size: (u32, u32),
    pub family: String,
    pub samples: Vec<ManifestSample>,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn save_index_png(path: &Path, height: u32, width: u32, values: &[u8]) -> Result<()> {
    let img = image::GrayImage::from_raw(width, height, values.to_vec())
        .expect("buffer matches dimensions");
    img.save(path).map_err(|e| Error::image(path, e))
}

fn load_gray_png(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    Ok((h, w, img.into_raw()))
}

pub fn sample_id(index: usize) -> String {
    format!("{index:06}")
}

/// Writes images, modal index masks, per-object amodal masks, and the
/// manifest. Returns the manifest that was written.
pub fn write_dataset(
    entries: &[(SceneSpec, SceneSample)],
    family: &str,
    out_dir: &Path,
) -> Result<Manifest> {
    create_dir(&out_dir.join("images"))?;
    create_dir(&out_dir.join("masks_modal"))?;
    create_dir(&out_dir.join("masks_amodal"))?;

    let image_size = entries
        .first()
        .map(|(s, _)| s.image_size)
        .unwrap_or((0, 0));

    let mut samples = Vec::with_capacity(entries.len());
    for (i, (spec, sample)) in entries.iter().enumerate() {
        let id = sample_id(i);
        sample.image.save_png(&out_dir.join(format!("images/{id}.png")))?;

        let (h, w) = spec.image_size;
        let mut modal = vec![0u8; (h * w) as usize];
        for (obj, mask) in sample.modal_masks.iter().enumerate() {
            assert!(obj < u8::MAX as usize, "too many objects for an index mask");
            for &(r, c) in mask {
                modal[(r * w + c) as usize] = (obj + 1) as u8;
            }
        }
        save_index_png(&out_dir.join(format!("masks_modal/{id}.png")), h, w, &modal)?;

        for (obj, mask) in sample.amodal_masks.iter().enumerate() {
            let mut binary = vec![0u8; (h * w) as usize];
            for &(r, c) in mask {
                binary[(r * w + c) as usize] = 255;
            }
            save_index_png(
                &out_dir.join(format!("masks_amodal/{id}_{obj}.png")),
                h,
                w,
                &binary,
            )?;
        }

        samples.push(ManifestSample {
            id,
            seed: spec.rng_seed,
            template_ids: sample.object_ids.clone(),
            min_visibility: spec.min_visibility,
            background: spec.background,
        });
    }

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        image_size,
        family: family.to_string(),
        samples,
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Manifest(format!(
            "manifest version {} unsupported",
            manifest.version
        )));
    }
    Ok(manifest)
}

pub fn load_image(dir: &Path, id: &str) -> Result<ImageGrid> {
    ImageGrid::load_png(&dir.join(format!("images/{id}.png")))
}

/// Ground-truth modal label map: 0 = background, k+1 = object k.
pub fn load_modal_label_map(dir: &Path, id: &str) -> Result<(u32, u32, Vec<u8>)> {
    load_gray_png(&dir.join(format!("masks_modal/{id}.png")))
}

pub fn load_modal_masks(dir: &Path, id: &str, num_objects: usize) -> Result<Vec<PixelSet>> {
    let (h, w, values) = load_modal_label_map(dir, id)?;
    let mut masks = vec![PixelSet::new(); num_objects];
    for r in 0..h {
        for c in 0..w {
            let v = values[(r * w + c) as usize] as usize;
            if v > 0 {
                if v > num_objects {
                    return Err(Error::Manifest(format!(
                        "modal mask {id} references object {v} beyond manifest count {num_objects}"
                    )));
                }
                masks[v - 1].insert((r, c));
            }
        }
    }
    Ok(masks)
}

pub fn load_amodal_masks(dir: &Path, id: &str, num_objects: usize) -> Result<Vec<PixelSet>> {
    (0..num_objects)
        .map(|obj| {
            let (h, w, values) = load_gray_png(&dir.join(format!("masks_amodal/{id}_{obj}.png")))?;
            let mut mask = PixelSet::new();
            for r in 0..h {
                for c in 0..w {
                    if values[(r * w + c) as usize] > 0 {
                        mask.insert((r, c));
                    }
                }
            }
            Ok(mask)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFamily {
    Tetromino,
    Multipart,
    Occluded,
    Ood,
}

impl DatasetFamily {
    pub fn name(self) -> &'static str {
        match self {
            DatasetFamily::Tetromino => "tetromino",
            DatasetFamily::Multipart => "multipart",
            DatasetFamily::Occluded => "occluded",
            DatasetFamily::Ood => "ood",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tetromino" => Ok(DatasetFamily::Tetromino),
            "multipart" => Ok(DatasetFamily::Multipart),
            "occluded" => Ok(DatasetFamily::Occluded),
            "ood" => Ok(DatasetFamily::Ood),
            other => Err(Error::InvalidParameter(format!(
                "unknown family '{other}' (expected tetromino|multipart|occluded|ood)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub num_objects: Option<usize>,
    pub min_visibility: Option<f64>,
    /// Fixed texture id for the ood family; sampled per scene when None.
    pub texture: Option<u8>,
    pub tile_size: u32,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            num_objects: None,
            min_visibility: None,
            texture: None,
            tile_size: 3,
        }
    }
}

fn spec_for(family: DatasetFamily, seed: u64, index: usize, opts: &GenerateOptions) -> SceneSpec {
    let sample_seed = seed.wrapping_add(index as u64);
    let solid = Background::Solid {
        rgb: SOLID_BACKGROUND,
    };
    match family {
        DatasetFamily::Tetromino => SceneSpec {
            image_size: (35, 35),
            num_objects: opts.num_objects.unwrap_or(3),
            template_library: tetromino_library(opts.tile_size),
            min_visibility: 1.0,
            background: solid,
            rng_seed: sample_seed,
        },
        DatasetFamily::Multipart => SceneSpec {
            image_size: (64, 64),
            num_objects: opts.num_objects.unwrap_or(5),
            template_library: multipart_library(),
            min_visibility: 1.0,
            background: solid,
            rng_seed: sample_seed,
        },
        DatasetFamily::Occluded => SceneSpec {
            image_size: (64, 64),
            num_objects: opts.num_objects.unwrap_or(5),
            template_library: multipart_library(),
            min_visibility: opts.min_visibility.unwrap_or(0.25),
            background: solid,
            rng_seed: sample_seed,
        },
        DatasetFamily::Ood => {
            // texture id drawn from the sample seed when not pinned
            let id = opts
                .texture
                .unwrap_or((splitmix(sample_seed) % NUM_TEXTURES as u64) as u8);
            SceneSpec {
                image_size: (64, 64),
                num_objects: opts.num_objects.unwrap_or(5),
                template_library: multipart_library(),
                min_visibility: 1.0,
                background: Background::Texture { id },
                rng_seed: sample_seed,
            }
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn generate_sample(
    family: DatasetFamily,
    seed: u64,
    index: usize,
    opts: &GenerateOptions,
) -> Result<(SceneSpec, SceneSample)> {
    let spec = spec_for(family, seed, index, opts);
    let sample = match family {
        DatasetFamily::Tetromino => gen_tetromino_scene(&spec)?,
        DatasetFamily::Multipart => gen_multipart_scene(&spec)?,
        DatasetFamily::Occluded => gen_occluded_scene(&spec)?,
        DatasetFamily::Ood => gen_ood_scene(&spec)?,
    };
    Ok((spec, sample))
}

/// Generates `count` scenes (parallel, deterministic per index) and writes
/// them with `write_dataset`.
pub fn generate_dataset(
    family: DatasetFamily,
    count: usize,
    seed: u64,
    out_dir: &Path,
    opts: &GenerateOptions,
) -> Result<Manifest> {
    let entries: Vec<(SceneSpec, SceneSample)> = (0..count)
        .into_par_iter()
        .map(|i| generate_sample(family, seed, i, opts))
        .collect::<Result<Vec<_>>>()?;
    write_dataset(&entries, family.name(), out_dir)
}

/// Convenience for tests and pipelines that work in memory.
pub fn generate_samples(
    family: DatasetFamily,
    count: usize,
    seed: u64,
    opts: &GenerateOptions,
) -> Result<Vec<(SceneSpec, SceneSample)>> {
    (0..count)
        .into_par_iter()
        .map(|i| generate_sample(family, seed, i, opts))
        .collect()
}

pub fn dataset_image_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("images/{id}.png"))
}
