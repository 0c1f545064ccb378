//! C ABI over the `dwe` pipeline and embedding files.
//!
//! Every fallible call returns a [`DweStatus`]; on failure the message is
//! available from [`dwe_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dwe::embedding::EmbeddingMatrix;
use dwe::eval::nearest_to_row;
use dwe::pipeline::{Pipeline, RunConfig, Stage};
use dwe::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DweStatus {
    Ok = 0,
    NullArgument,
    InvalidUtf8,
    Io,
    Format,
    Config,
    Dimension,
    StaleArtifact,
    UnknownWord,
    ZeroVector,
    Empty,
    Locked,
    BufferTooSmall,
    Panic,
}

impl From<&Error> for DweStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io(_) => DweStatus::Io,
            Error::Record { .. } | Error::Format { .. } => DweStatus::Format,
            Error::Config(_) => DweStatus::Config,
            Error::Dimension(_) | Error::OutOfRange { .. } => DweStatus::Dimension,
            Error::StaleArtifact { .. } => DweStatus::StaleArtifact,
            Error::UnknownWord(_) => DweStatus::UnknownWord,
            Error::ZeroVector(_) => DweStatus::ZeroVector,
            Error::Empty(_) => DweStatus::Empty,
            Error::Locked(_) => DweStatus::Locked,
        }
    }
}

/// Word vectors loaded from a text embedding file.
pub struct DweEmbeddings {
    inner: EmbeddingMatrix,
    words: Vec<CString>,
}

/// A configured pipeline bound to its workdir.
pub struct DwePipeline {
    inner: Pipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(DweStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(DweStatus::from(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DweStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DweStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DweStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(DweStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DweStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn null(name: &str) -> Failure {
    Failure(DweStatus::NullArgument, format!("`{name}` is null"))
}

fn embeddings_handle(inner: EmbeddingMatrix) -> *mut DweEmbeddings {
    let words = inner
        .words()
        .iter()
        .map(|w| CString::new(w.as_str()).unwrap_or_default())
        .collect();
    Box::into_raw(Box::new(DweEmbeddings { inner, words }))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn dwe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a text embedding file (`count dim` header, then `word v1 ... vd`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_load(path: *const c_char, out: *mut *mut DweEmbeddings) -> DweStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = EmbeddingMatrix::load_text(Path::new(path))?;
        *out = embeddings_handle(e);
        Ok(())
    })
}

/// # Safety
/// `e` must come from this library and not be used afterwards; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_free(e: *mut DweEmbeddings) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of words; 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_len(e: *const DweEmbeddings) -> usize {
    e.as_ref().map_or(0, |e| e.inner.len())
}

/// Vector dimension; 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_dim(e: *const DweEmbeddings) -> usize {
    e.as_ref().map_or(0, |e| e.inner.dim())
}

/// Word of row `id`, owned by the handle; null when out of range.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_word(e: *const DweEmbeddings, id: usize) -> *const c_char {
    e.as_ref()
        .and_then(|e| e.words.get(id))
        .map_or(ptr::null(), |w| w.as_ptr())
}

/// Copies the vector of `word` into `out`, which holds `out_len` doubles.
///
/// # Safety
/// `e` must be a live handle, `word` NUL-terminated, `out` valid for
/// `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_lookup(
    e: *const DweEmbeddings,
    word: *const c_char,
    out: *mut f64,
    out_len: usize,
) -> DweStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("embeddings"))?;
        let word = str_arg(word, "word")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let id = e.inner.id(word).ok_or(Error::UnknownWord(word.to_string()))?;
        let dim = e.inner.dim();
        if out_len < dim {
            return Err(Failure(DweStatus::BufferTooSmall, format!("need {dim} values, got {out_len}")));
        }
        let out = std::slice::from_raw_parts_mut(out, dim);
        for (o, v) in out.iter_mut().zip(e.inner.matrix().row(id).iter()) {
            *o = *v;
        }
        Ok(())
    })
}

/// Up to `k` cosine neighbors of `word`: row ids into `ids`, similarities
/// into `sims` (both hold `k` entries); the count goes to `n_out`.
///
/// # Safety
/// `e` must be a live handle, `word` NUL-terminated, `ids` and `sims` valid
/// for `k` writes and `n_out` valid.
#[no_mangle]
pub unsafe extern "C" fn dwe_embeddings_nearest(
    e: *const DweEmbeddings,
    word: *const c_char,
    k: usize,
    ids: *mut usize,
    sims: *mut f64,
    n_out: *mut usize,
) -> DweStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("embeddings"))?;
        let word = str_arg(word, "word")?;
        if ids.is_null() || sims.is_null() || n_out.is_null() {
            return Err(null("ids, sims or n_out"));
        }
        let q = e.inner.id(word).ok_or(Error::UnknownWord(word.to_string()))?;
        let nn = nearest_to_row(&e.inner, q, k)?;
        let ids = std::slice::from_raw_parts_mut(ids, k);
        let sims = std::slice::from_raw_parts_mut(sims, k);
        for (i, (id, s)) in nn.iter().enumerate() {
            ids[i] = *id;
            sims[i] = *s;
        }
        *n_out = nn.len();
        Ok(())
    })
}

/// Opens a pipeline from a TOML run config.
///
/// # Safety
/// `config_path` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dwe_pipeline_open(config_path: *const c_char, out: *mut *mut DwePipeline) -> DweStatus {
    guard(|| {
        let path = str_arg(config_path, "config_path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Pipeline::new(RunConfig::load(Path::new(path))?)?;
        *out = Box::into_raw(Box::new(DwePipeline { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn dwe_pipeline_free(p: *mut DwePipeline) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Runs one stage (`vocab`, `pairs`, `cooc`, `ppmi`, `extend`, `svd`,
/// `train`, `eval` or `report`); seeded stages use `seed`.
///
/// # Safety
/// `p` must be a live handle and `stage` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dwe_pipeline_run_stage(p: *const DwePipeline, stage: *const c_char, seed: u64) -> DweStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pipeline"))?;
        let stage: Stage = str_arg(stage, "stage")?.parse()?;
        p.inner.run_stage(stage, seed)?;
        Ok(())
    })
}

/// Runs every stage for every configured seed; nonzero `force` recomputes
/// artifacts that already verify.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dwe_pipeline_run_all(p: *const DwePipeline, force: c_int) -> DweStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pipeline"))?;
        p.inner.run_all(force != 0)?;
        Ok(())
    })
}

/// Test accuracy of the evaluated run at `seed`.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn dwe_pipeline_accuracy(p: *const DwePipeline, seed: u64, out: *mut f64) -> DweStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pipeline"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.inner.metrics(seed)?.accuracy;
        Ok(())
    })
}

/// Embeddings produced by the `svd` stage at `seed`.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn dwe_pipeline_embeddings(
    p: *const DwePipeline,
    seed: u64,
    out: *mut *mut DweEmbeddings,
) -> DweStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pipeline"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (e, _) = p.inner.embeddings(seed)?;
        *out = embeddings_handle(e);
        Ok(())
    })
}
