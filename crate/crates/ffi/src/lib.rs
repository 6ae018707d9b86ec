//! C ABI for the object-discovery library: opaque handles, status codes, and
//! flat buffers. Image pixels cross the boundary as row-major RGB bytes;
//! labelings come back as row-major u32 label maps.

use std::ffi::CStr;
use std::path::PathBuf;
use std::ptr;

use libc::{c_char, c_double};

use ecoscope::graph::DescriptorParams;
use ecoscope::inference::{discover_in_image, InferenceParams};
use ecoscope::memory::ObjectMemory;
use ecoscope::segment::{felzenszwalb_segment, SegmentationParams};
use ecoscope::{Error, ImageGrid};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IoError = 3,
    CorruptData = 4,
    NotFinalized = 5,
    InternalError = 6,
}

fn status_of(err: &Error) -> EcoStatus {
    match err {
        Error::Io { .. } | Error::Image { .. } => EcoStatus::IoError,
        Error::BadMagic | Error::UnsupportedVersion(_) | Error::Corrupt(_) => {
            EcoStatus::CorruptData
        }
        Error::NotFinalized | Error::Finalized => EcoStatus::NotFinalized,
        Error::InvalidParameter(_) | Error::Manifest(_) | Error::TooLarge { .. } => {
            EcoStatus::InvalidArgument
        }
        _ => EcoStatus::InternalError,
    }
}

/// Opaque handle around a loaded object memory.
pub struct EcoMemory {
    inner: ObjectMemory,
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn eco_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn image_from_raw(
    pixels: *const u8,
    height: u32,
    width: u32,
) -> Result<ImageGrid, EcoStatus> {
    if pixels.is_null() {
        return Err(EcoStatus::NullPointer);
    }
    if height == 0 || width == 0 {
        return Err(EcoStatus::InvalidArgument);
    }
    let n = (height * width) as usize;
    let raw = std::slice::from_raw_parts(pixels, 3 * n);
    let rgb: Vec<[u8; 3]> = raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(ImageGrid::from_pixels(height, width, rgb))
}

/// Segments a row-major RGB image and writes one u32 label per pixel into
/// `labels_out` (capacity `height * width`). The number of parts lands in
/// `num_parts_out`.
///
/// # Safety
/// `pixels` must point to `3 * height * width` readable bytes, `labels_out`
/// to `height * width` writable u32 slots, and `num_parts_out` to a writable
/// u32.
#[no_mangle]
pub unsafe extern "C" fn eco_segment_image(
    pixels: *const u8,
    height: u32,
    width: u32,
    tau: c_double,
    min_size: u32,
    labels_out: *mut u32,
    num_parts_out: *mut u32,
) -> EcoStatus {
    if labels_out.is_null() || num_parts_out.is_null() {
        return EcoStatus::NullPointer;
    }
    if tau.is_nan() || tau < 0.0 || min_size == 0 {
        return EcoStatus::InvalidArgument;
    }
    let image = match image_from_raw(pixels, height, width) {
        Ok(img) => img,
        Err(status) => return status,
    };
    let params = SegmentationParams {
        threshold: tau,
        min_size: min_size as usize,
        smoothing_sigma: 0.0,
    };
    let labeling = felzenszwalb_segment(&image, &params);
    let out = std::slice::from_raw_parts_mut(labels_out, labeling.labels.len());
    out.copy_from_slice(&labeling.labels);
    *num_parts_out = labeling.num_parts;
    EcoStatus::Ok
}

/// Loads an object memory from a file into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out` a writable pointer
/// slot. A non-null result must be released with `eco_memory_free`.
#[no_mangle]
pub unsafe extern "C" fn eco_memory_load(
    path: *const c_char,
    out: *mut *mut EcoMemory,
) -> EcoStatus {
    if path.is_null() || out.is_null() {
        return EcoStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return EcoStatus::InvalidArgument;
    };
    match ObjectMemory::load(&PathBuf::from(path)) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(EcoMemory { inner }));
            EcoStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a memory handle. Null is accepted.
///
/// # Safety
/// `memory` must be a handle from `eco_memory_load` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn eco_memory_free(memory: *mut EcoMemory) {
    if !memory.is_null() {
        drop(Box::from_raw(memory));
    }
}

/// Number of entries in the memory.
///
/// # Safety
/// `memory` must be a live handle; `count_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eco_memory_entry_count(
    memory: *const EcoMemory,
    count_out: *mut usize,
) -> EcoStatus {
    if memory.is_null() || count_out.is_null() {
        return EcoStatus::NullPointer;
    }
    *count_out = (*memory).inner.entries.len();
    EcoStatus::Ok
}

/// Occurrence count of the entry at `index` in stored order.
///
/// # Safety
/// `memory` must be a live handle; `count_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eco_memory_occurrences(
    memory: *const EcoMemory,
    index: usize,
    count_out: *mut u64,
) -> EcoStatus {
    if memory.is_null() || count_out.is_null() {
        return EcoStatus::NullPointer;
    }
    let entries = &(*memory).inner.entries;
    if index >= entries.len() {
        return EcoStatus::InvalidArgument;
    }
    *count_out = entries[index].occurrence_count;
    EcoStatus::Ok
}

/// Runs memory-driven discovery on one image. `labels_out` receives one u32
/// per pixel: 0 for background, k+1 for the k-th predicted object. The
/// number of predicted objects lands in `num_objects_out`.
///
/// # Safety
/// `memory` must be a live handle, `pixels` must point to
/// `3 * height * width` readable bytes, `labels_out` to `height * width`
/// writable u32 slots, and `num_objects_out` to a writable u32.
#[no_mangle]
pub unsafe extern "C" fn eco_discover_in_image(
    memory: *const EcoMemory,
    pixels: *const u8,
    height: u32,
    width: u32,
    labels_out: *mut u32,
    num_objects_out: *mut u32,
) -> EcoStatus {
    if memory.is_null() || labels_out.is_null() || num_objects_out.is_null() {
        return EcoStatus::NullPointer;
    }
    let image = match image_from_raw(pixels, height, width) {
        Ok(img) => img,
        Err(status) => return status,
    };
    let params = InferenceParams {
        descriptor: DescriptorParams::default(),
        ..Default::default()
    };
    match discover_in_image(&image, &(*memory).inner, &params) {
        Ok(pred) => {
            let out = std::slice::from_raw_parts_mut(labels_out, (height * width) as usize);
            out.fill(0);
            for (k, obj) in pred.objects.iter().enumerate() {
                for &(r, c) in &obj.modal {
                    out[(r * width + c) as usize] = (k + 1) as u32;
                }
            }
            *num_objects_out = pred.objects.len() as u32;
            EcoStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
