//! C ABI for the schwa toolkit.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`SchwaStatus`]; `SCHWA_STATUS_OK` is 0.
//!   On failure, [`schwa_last_error`] describes what went wrong on the calling
//!   thread.
//! * Strings going in are NUL-terminated UTF-8. Strings coming out are
//!   allocated here and must be released with [`schwa_string_free`].
//! * A [`SchwaModel`] is an opaque handle from [`schwa_model_load`], released
//!   with [`schwa_model_free`]. Handles are immutable and may be shared
//!   between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use schwa::baseline::RuleSet;
use schwa::lexicon::{parse_lexicon, stats};
use schwa::models::dump::dump_trees;
use schwa::models::{load_model, Model};
use schwa::pipeline::{transcribe, Classifier, SchwaPredictor};
use schwa::script::{decode_words, render, Script};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchwaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidScript = 3,
    DecodeError = 4,
    IoError = 5,
    ModelError = 6,
    NotGbdt = 7,
    LexiconError = 8,
    Panic = 9,
}

/// Values accepted wherever a function takes a `script` argument.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchwaScript {
    Devanagari = 0,
    Gurmukhi = 1,
}

/// Opaque trained model.
pub struct SchwaModel {
    classifier: Classifier,
}

/// Corpus statistics. `deletion_rate` is NaN when `schwa_count` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwaLexiconStats {
    pub entry_count: usize,
    pub schwa_count: usize,
    pub deleted_count: usize,
    pub weak_count: usize,
    pub discarded_count: usize,
    pub rejected_lines: usize,
    pub deletion_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SchwaStatus, String);

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SchwaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SchwaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SchwaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SchwaStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(SchwaStatus::InvalidUtf8, format!("`{name}` is not UTF-8: {e}")))
}

fn script_arg(script: u32) -> Result<Script, Failure> {
    match script {
        0 => Ok(Script::Devanagari),
        1 => Ok(Script::Gurmukhi),
        other => Err(Failure(SchwaStatus::InvalidScript, format!("unknown script {other}"))),
    }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SchwaStatus::NullArgument, "`out` is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(SchwaStatus::Panic, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn lines(words: impl IntoIterator<Item = String>) -> String {
    words.into_iter().map(|w| w + "\n").collect()
}

fn decode_arg(text: &str, script: u32) -> Result<Vec<Vec<schwa::script::PhoneToken>>, Failure> {
    decode_words(script_arg(script)?, text).map_err(|e| Failure(SchwaStatus::DecodeError, e.to_string()))
}

fn predict_lines(predictor: &dyn SchwaPredictor, text: &str, script: u32) -> Result<String, Failure> {
    let mut out = Vec::new();
    for w in decode_arg(text, script)? {
        let phon = transcribe(predictor, &w).map_err(|e| Failure(SchwaStatus::ModelError, e.to_string()))?;
        out.push(render(&phon));
    }
    Ok(lines(out))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn schwa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn schwa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Decodes `text` into orthographic tokens, one whitespace-separated word per
/// output line.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn schwa_transcribe(text: *const c_char, script: u32, out: *mut *mut c_char) -> SchwaStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let words = decode_arg(text, script)?;
        put_string(out, lines(words.iter().map(|w| render(w))))
    })
}

/// Transcribes `text` with the shipped deletion rules.
///
/// # Safety
/// As [`schwa_transcribe`].
#[no_mangle]
pub unsafe extern "C" fn schwa_baseline_predict(
    text: *const c_char,
    script: u32,
    out: *mut *mut c_char,
) -> SchwaStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        put_string(out, predict_lines(&RuleSet::shipped(), text, script)?)
    })
}

/// Loads a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn schwa_model_load(path: *const c_char, out: *mut *mut SchwaModel) -> SchwaStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(Failure(SchwaStatus::NullArgument, "`out` is null".into()));
        }
        let saved = load_model(path).map_err(|e| {
            let status = match e {
                schwa::models::ModelError::Io { .. } => SchwaStatus::IoError,
                _ => SchwaStatus::ModelError,
            };
            Failure(status, e.to_string())
        })?;
        let classifier = Classifier::from_saved(saved).map_err(|e| Failure(SchwaStatus::ModelError, e.to_string()))?;
        *out = Box::into_raw(Box::new(SchwaModel { classifier }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`schwa_model_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn schwa_model_free(model: *mut SchwaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn model_arg<'a>(model: *const SchwaModel) -> Result<&'a SchwaModel, Failure> {
    model.as_ref().ok_or_else(|| Failure(SchwaStatus::NullArgument, "`model` is null".into()))
}

/// `"logistic"`, `"mlp"` or `"gbdt"`.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn schwa_model_kind(model: *const SchwaModel, out: *mut *mut c_char) -> SchwaStatus {
    guard(|| put_string(out, model_arg(model)?.classifier.model.kind().to_string()))
}

/// Transcribes `text` with schwa deletion decided by `model`.
///
/// # Safety
/// `model` must be a live handle; `text` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn schwa_model_predict(
    model: *const SchwaModel,
    text: *const c_char,
    script: u32,
    out: *mut *mut c_char,
) -> SchwaStatus {
    guard(|| {
        let model = model_arg(model)?;
        let text = str_arg(text, "text")?;
        put_string(out, predict_lines(&model.classifier, text, script)?)
    })
}

/// Renders the trees of a boosted model as if/else rules.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn schwa_model_dump_trees(model: *const SchwaModel, out: *mut *mut c_char) -> SchwaStatus {
    guard(|| {
        let c = &model_arg(model)?.classifier;
        let Model::Gbdt(g) = &c.model else {
            return Err(Failure(SchwaStatus::NotGbdt, format!("a {} model has no trees", c.model.kind())));
        };
        let text = dump_trees(g, &c.space.feature_names()).map_err(|e| Failure(SchwaStatus::ModelError, e.to_string()))?;
        put_string(out, text)
    })
}

/// Aligns a lexicon file and summarizes it.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn schwa_lexicon_stats(path: *const c_char, out: *mut SchwaLexiconStats) -> SchwaStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(Failure(SchwaStatus::NullArgument, "`out` is null".into()));
        }
        let parsed = parse_lexicon(path).map_err(|e| {
            let status = match e {
                schwa::lexicon::LexiconError::Io { .. } => SchwaStatus::IoError,
                _ => SchwaStatus::LexiconError,
            };
            Failure(status, e.to_string())
        })?;
        let s = stats(&parsed.entries);
        ptr::write(
            out,
            SchwaLexiconStats {
                entry_count: s.entry_count,
                schwa_count: s.schwa_count,
                deleted_count: s.deleted_count,
                weak_count: s.weak_count,
                discarded_count: s.discarded_count,
                rejected_lines: parsed.rejects.len(),
                deletion_rate: s.deletion_rate().unwrap_or(f64::NAN),
            },
        );
        Ok(())
    })
}
