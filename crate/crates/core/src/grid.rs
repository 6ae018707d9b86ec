use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit RGB triple.
pub type Rgb = [u8; 3];

/// A set of (row, col) pixel coordinates. BTreeSet keeps iteration order
/// deterministic, which every downstream stage relies on.
pub type PixelSet = BTreeSet<(u32, u32)>;

/// H x W raster of RGB pixels, row-major. The unit every stage consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGrid {
    pub height: u32,
    pub width: u32,
    pub pixels: Vec<Rgb>,
}

impl ImageGrid {
    pub fn new(height: u32, width: u32, fill: Rgb) -> Self {
        assert!(height > 0 && width > 0, "image must have at least one pixel");
        ImageGrid {
            height,
            width,
            pixels: vec![fill; (height * width) as usize],
        }
    }

    pub fn from_pixels(height: u32, width: u32, pixels: Vec<Rgb>) -> Self {
        assert_eq!((height * width) as usize, pixels.len());
        assert!(!pixels.is_empty());
        ImageGrid {
            height,
            width,
            pixels,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn index(&self, row: u32, col: u32) -> usize {
        (row * self.width + col) as usize
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> Rgb {
        self.pixels[self.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32, value: Rgb) {
        let i = self.index(row, col);
        self.pixels[i] = value;
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut img = image::RgbImage::new(self.width, self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                img.put_pixel(c, r, image::Rgb(self.get(r, c)));
            }
        }
        img.save(path).map_err(|e| Error::image(path, e))
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::image(path, e))?.to_rgb8();
        let (w, h) = img.dimensions();
        let mut pixels = Vec::with_capacity((w * h) as usize);
        for r in 0..h {
            for c in 0..w {
                pixels.push(img.get_pixel(c, r).0);
            }
        }
        Ok(ImageGrid::from_pixels(h, w, pixels))
    }
}

/// Euclidean distance between two RGB triples.
#[inline]
pub fn color_distance(a: Rgb, b: Rgb) -> f64 {
    let dr = a[0] as f64 - b[0] as f64;
    let dg = a[1] as f64 - b[1] as f64;
    let db = a[2] as f64 - b[2] as f64;
    (dr * dr + dg * dg + db * db).sqrt()
}

#[inline]
pub fn color_distance_f64(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dr = a[0] - b[0];
    let dg = a[1] - b[1];
    let db = a[2] - b[2];
    (dr * dr + dg * dg + db * db).sqrt()
}
