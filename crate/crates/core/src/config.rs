//! Shared run configuration: a versioned TOML file whose values sit between
//! built-in defaults and command-line flags (flag > file > default).

use std::path::Path;

use serde::Deserialize;

use crate::discovery::DiscoveryConfig;
use crate::error::{Error, Result};
use crate::graph::DescriptorParams;
use crate::inference::{InferenceParams, TrainOptions};
use crate::segment::SegmentationParams;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: Option<u32>,
    #[serde(default)]
    pub segmentation: SegmentationSection,
    #[serde(default)]
    pub descriptor: DescriptorSection,
    #[serde(default)]
    pub discovery: DiscoverySection,
    #[serde(default)]
    pub memory: MemorySection,
    #[serde(default)]
    pub inference: InferenceSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationSection {
    pub tau: Option<f64>,
    pub min_size: Option<usize>,
    pub smoothing_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorSection {
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoverySection {
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub deterministic_order: Option<bool>,
    pub magnitude_gate: Option<bool>,
    pub magnitude_delta: Option<f64>,
    pub comparison_budget: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorySection {
    pub epsilon_mem: Option<f64>,
    pub max_views: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceSection {
    pub color_tolerance: Option<f64>,
    pub position_slack: Option<f64>,
    pub offset_magnitude_delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub batch_size: Option<usize>,
    pub threads: Option<usize>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub segmentation: SegmentationParams,
    pub descriptor: DescriptorParams,
    pub discovery: DiscoveryConfig,
    pub memory_threshold: f64,
    pub max_views: usize,
    pub inference: InferenceParams,
    pub batch_size: usize,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            segmentation: SegmentationParams::default(),
            descriptor: DescriptorParams::default(),
            discovery: DiscoveryConfig::default(),
            memory_threshold: 0.99,
            max_views: 8,
            inference: InferenceParams::default(),
            batch_size: 2,
            threads: None,
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ConfigFile = toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        if let Some(v) = file.version {
            if v != CONFIG_VERSION {
                return Err(Error::InvalidParameter(format!(
                    "config version {v} unsupported (expected {CONFIG_VERSION})"
                )));
            }
        }
        Ok(file)
    }

    /// Applies file values over the defaults.
    pub fn resolve(&self) -> RunConfig {
        let mut cfg = RunConfig::default();
        if let Some(v) = self.segmentation.tau {
            cfg.segmentation.threshold = v;
        }
        if let Some(v) = self.segmentation.min_size {
            cfg.segmentation.min_size = v;
        }
        if let Some(v) = self.segmentation.smoothing_sigma {
            cfg.segmentation.smoothing_sigma = v;
        }
        if let Some(v) = self.descriptor.k {
            cfg.descriptor.k = v;
        }
        if let Some(v) = self.discovery.epsilon {
            cfg.discovery.epsilon = v;
            cfg.descriptor.epsilon = v;
        }
        if let Some(v) = self.discovery.seed {
            cfg.discovery.rng_seed = v;
        }
        if let Some(v) = self.discovery.deterministic_order {
            cfg.discovery.deterministic_order = v;
        }
        if let Some(v) = self.discovery.magnitude_gate {
            cfg.discovery.magnitude_gate = v;
        }
        if let Some(v) = self.discovery.magnitude_delta {
            cfg.discovery.magnitude_delta = v;
        }
        if let Some(v) = self.discovery.comparison_budget {
            cfg.discovery.comparison_budget = Some(v);
        }
        if let Some(v) = self.memory.epsilon_mem {
            cfg.memory_threshold = v;
            cfg.inference.epsilon_mem = v;
        }
        if let Some(v) = self.memory.max_views {
            cfg.max_views = v;
        }
        if let Some(v) = self.inference.color_tolerance {
            cfg.inference.color_tolerance = v;
        }
        if let Some(v) = self.inference.position_slack {
            cfg.inference.position_slack = v;
        }
        if let Some(v) = self.inference.offset_magnitude_delta {
            cfg.inference.offset_magnitude_delta = v;
        }
        if let Some(v) = self.pipeline.batch_size {
            cfg.batch_size = v;
        }
        cfg.threads = self.pipeline.threads;
        cfg.inference.segmentation = cfg.segmentation.clone();
        cfg.inference.descriptor = cfg.descriptor;
        cfg
    }
}

impl RunConfig {
    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            batch_size: self.batch_size,
            segmentation: self.segmentation.clone(),
            descriptor: self.descriptor,
            discovery: self.discovery.clone(),
            memory_threshold: self.memory_threshold,
            max_views: self.max_views,
        }
    }
}
