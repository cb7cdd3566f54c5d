//! C ABI over `rgp-core`.
//!
//! Every fallible function returns an [`RgpStatus`]; on failure the message
//! is available from [`rgp_last_error_message`] on the same thread. Images
//! are opaque [`RgpImage`] handles released with [`rgp_image_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rgp::dataset::{DatasetId, Task};
use rgp::imaging::{otsu_threshold, Histogram256, PreprocessConfig, RasterImage};
use rgp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BlankImage = 3,
    AucUndefined = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgpDataset {
    Eyepacs = 0,
    Messidor = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgpTask {
    NormalAbnormal = 0,
    Referable = 1,
    Ternary = 2,
    Quaternary = 3,
}

/// Preprocessing parameters; start from `rgp_preprocess_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgpPreprocessConfig {
    pub clahe_tiles_x: usize,
    pub clahe_tiles_y: usize,
    pub clahe_clip_limit: f64,
    pub blur_radius_fraction: f64,
    pub subtraction_gain: f64,
    pub subtraction_offset: f64,
    pub output_size: usize,
}

impl From<PreprocessConfig> for RgpPreprocessConfig {
    fn from(c: PreprocessConfig) -> Self {
        Self {
            clahe_tiles_x: c.clahe_tiles[0],
            clahe_tiles_y: c.clahe_tiles[1],
            clahe_clip_limit: c.clahe_clip_limit,
            blur_radius_fraction: c.blur_radius_fraction,
            subtraction_gain: c.subtraction_gain,
            subtraction_offset: c.subtraction_offset,
            output_size: c.output_size,
        }
    }
}

impl From<RgpPreprocessConfig> for PreprocessConfig {
    fn from(c: RgpPreprocessConfig) -> Self {
        Self {
            clahe_tiles: [c.clahe_tiles_x, c.clahe_tiles_y],
            clahe_clip_limit: c.clahe_clip_limit,
            blur_radius_fraction: c.blur_radius_fraction,
            subtraction_gain: c.subtraction_gain,
            subtraction_offset: c.subtraction_offset,
            output_size: c.output_size,
        }
    }
}

/// Opaque image handle.
pub struct RgpImage(RasterImage);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

/// Status and message of a failed call.
type Failure = (RgpStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RgpStatus {
    match err.root() {
        Error::BlankImage => RgpStatus::BlankImage,
        Error::AucUndefined(_) => RgpStatus::AucUndefined,
        Error::Contract(_)
        | Error::Invalid(_)
        | Error::EmptyHistogram
        | Error::GradeOutOfRange { .. }
        | Error::DimensionMismatch { .. } => RgpStatus::InvalidArgument,
        _ => RgpStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RgpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RgpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RgpStatus::Internal
        }
    }
}

fn core(err: Error) -> Failure {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> Failure {
    (RgpStatus::NullPointer, format!("{name} is null"))
}

/// Reads `len` items from `data`, allowing a null pointer when `len` is 0.
unsafe fn slice_arg<'a, T>(data: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(data, len))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| null(name))
}

fn image_arg<'a>(p: *const RgpImage) -> Result<&'a RasterImage, Failure> {
    // SAFETY: non-null handles come from this library and are still live.
    unsafe { p.as_ref() }
        .map(|h| &h.0)
        .ok_or_else(|| null("image"))
}

/// Message for the last failed call on this thread, or NULL. Free the
/// result with `rgp_string_free`.
#[no_mangle]
pub extern "C" fn rgp_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn rgp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copies `len == width * height * 3` interleaved RGB bytes into a new image.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_image_new_rgb(
    width: usize,
    height: usize,
    data: *const u8,
    len: usize,
    out: *mut *mut RgpImage,
) -> RgpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let bytes = slice_arg(data, len, "data")?;
        let expected = width.checked_mul(height).and_then(|p| p.checked_mul(3));
        if expected != Some(len) {
            return Err((
                RgpStatus::InvalidArgument,
                format!("{len} bytes for a {width}x{height} RGB image"),
            ));
        }
        let img = RasterImage::rgb(width, height, bytes.to_vec()).map_err(core)?;
        *out = Box::into_raw(Box::new(RgpImage(img)));
        Ok(())
    })
}

/// # Safety
/// `image` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rgp_image_free(image: *mut RgpImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// # Safety
/// `image` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_image_dims(
    image: *const RgpImage,
    width: *mut usize,
    height: *mut usize,
    channels: *mut usize,
) -> RgpStatus {
    guard(|| {
        let img = image_arg(image)?;
        *out_arg(width, "width")? = img.width();
        *out_arg(height, "height")? = img.height();
        *out_arg(channels, "channels")? = img.channels();
        Ok(())
    })
}

/// Borrows the interleaved samples; valid until the image is freed.
///
/// # Safety
/// `image` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_image_data(
    image: *const RgpImage,
    data: *mut *const u8,
    len: *mut usize,
) -> RgpStatus {
    guard(|| {
        let img = image_arg(image)?;
        *out_arg(data, "data")? = img.data().as_ptr();
        *out_arg(len, "len")? = img.data().len();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn rgp_preprocess_config_default() -> RgpPreprocessConfig {
    PreprocessConfig::default().into()
}

/// Crop, equalize, subtract the local average and resize. On success `*out`
/// receives a new RGB image of side `config->output_size`.
///
/// # Safety
/// `image` must be a live handle, `config` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_preprocess(
    image: *const RgpImage,
    config: *const RgpPreprocessConfig,
    out: *mut *mut RgpImage,
) -> RgpStatus {
    guard(|| {
        let img = image_arg(image)?;
        let cfg: PreprocessConfig = (*config.as_ref().ok_or_else(|| null("config"))?).into();
        let out = out_arg(out, "out")?;
        let result = rgp::imaging::preprocess(img, &cfg).map_err(core)?;
        *out = Box::into_raw(Box::new(RgpImage(result)));
        Ok(())
    })
}

/// Otsu threshold of a 256-bin histogram.
///
/// # Safety
/// `bins` must point to 256 readable counts; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_otsu_threshold(bins: *const u64, out: *mut u8) -> RgpStatus {
    guard(|| {
        let bins = slice_arg(bins, 256, "bins")?;
        let mut arr = [0u64; 256];
        arr.copy_from_slice(bins);
        *out_arg(out, "out")? = otsu_threshold(&Histogram256::from_bins(arr)).map_err(core)?;
        Ok(())
    })
}

/// Class index of a native grade under `task`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_map_grade(
    dataset: RgpDataset,
    grade: i64,
    task: RgpTask,
    out: *mut usize,
) -> RgpStatus {
    guard(|| {
        let dataset = match dataset {
            RgpDataset::Eyepacs => DatasetId::EyePACS,
            RgpDataset::Messidor => DatasetId::Messidor,
        };
        let task = match task {
            RgpTask::NormalAbnormal => Task::BinaryNormalAbnormal,
            RgpTask::Referable => Task::BinaryReferable,
            RgpTask::Ternary => Task::Ternary,
            RgpTask::Quaternary => Task::Quaternary,
        };
        *out_arg(out, "out")? = rgp::dataset::map_grade(dataset, grade, task).map_err(core)?;
        Ok(())
    })
}

unsafe fn scored<'a>(
    scores: *const f64,
    labels: *const u8,
    n: usize,
) -> Result<(&'a [f64], Vec<bool>), Failure> {
    let scores = slice_arg(scores, n, "scores")?;
    let labels = slice_arg(labels, n, "labels")?
        .iter()
        .map(|&l| l != 0)
        .collect();
    Ok((scores, labels))
}

/// Area under the ROC curve; `labels[i] != 0` marks a positive.
///
/// # Safety
/// `scores` and `labels` must hold `n` items; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> RgpStatus {
    guard(|| {
        let (scores, labels) = scored(scores, labels, n)?;
        *out_arg(out, "out")? = rgp::metrics::auc_from_scores(scores, &labels).map_err(core)?;
        Ok(())
    })
}

/// Best sensitivity with specificity >= `target`. Samples with
/// `score >= *threshold` are positive; `*has_threshold` is 0 when the
/// chosen cut calls nothing positive.
///
/// # Safety
/// `scores` and `labels` must hold `n` items; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_sensitivity_at_specificity(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    target: f64,
    sensitivity: *mut f64,
    specificity: *mut f64,
    threshold: *mut f64,
    has_threshold: *mut u8,
) -> RgpStatus {
    guard(|| {
        let (scores, labels) = scored(scores, labels, n)?;
        let op = rgp::metrics::sensitivity_at_specificity(scores, &labels, target).map_err(core)?;
        *out_arg(sensitivity, "sensitivity")? = op.sensitivity;
        *out_arg(specificity, "specificity")? = op.specificity;
        *out_arg(threshold, "threshold")? = op.threshold.unwrap_or(f64::INFINITY);
        *out_arg(has_threshold, "has_threshold")? = op.threshold.is_some() as u8;
        Ok(())
    })
}

/// Mean of `models` probability rows (row-major, `classes` wide) and its
/// argmax, ties to the smallest index.
///
/// # Safety
/// `probs` must hold `models * classes` values, `fused` room for `classes`,
/// and `predicted` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rgp_fuse_mean(
    probs: *const f64,
    models: usize,
    classes: usize,
    fused: *mut f64,
    predicted: *mut usize,
) -> RgpStatus {
    guard(|| {
        let total = models
            .checked_mul(classes)
            .ok_or_else(|| (RgpStatus::InvalidArgument, "size overflow".to_string()))?;
        let probs = slice_arg(probs, total, "probs")?;
        if fused.is_null() {
            return Err(null("fused"));
        }
        let predicted = out_arg(predicted, "predicted")?;
        let input = rgp::ensemble::EnsembleInput {
            image_id: String::new(),
            records: (0..models)
                .map(|m| rgp::classifier::PredictionRecord {
                    image_id: String::new(),
                    model_id: m.to_string(),
                    probs: probs[m * classes..(m + 1) * classes].to_vec(),
                })
                .collect(),
        };
        let d = rgp::ensemble::fuse_mean(&input).map_err(core)?;
        slice::from_raw_parts_mut(fused, classes).copy_from_slice(&d.fused_probs);
        *predicted = d.predicted_class;
        Ok(())
    })
}
