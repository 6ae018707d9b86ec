//! Explicit graph-based multi-part object discovery.
//!
//! The pipeline segments images into fine-grained parts, summarizes each part
//! as K centroid-to-boundary vectors, clusters parts that recur across a
//! batch with similar spatial relations into objects, maintains a persistent
//! object memory prioritized by occurrence, and uses the memory to discover,
//! amodally complete, and evaluate multi-part objects in clean, occluded, and
//! textured-background scenes.

pub mod config;
pub mod discovery;
pub mod error;
pub mod graph;
pub mod grid;
pub mod inference;
pub mod memory;
pub mod metrics;
pub mod scene;
pub mod segment;

pub use error::{Error, Result};
pub use grid::{ImageGrid, PixelSet, Rgb};
