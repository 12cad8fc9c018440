//! C interface to `pbv-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_run`
//! functions and released with the matching `*_free`. Every fallible
//! function returns a `PbvStatus`; the message of the most recent failure on
//! the calling thread is available from `pbv_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pbv_core::analytics::{
    classical_guess_bound, classical_guess_exact, count_consistent_keysets, prob_all_keys,
    EnumerationOptions,
};
use pbv_core::rng;
use pbv_core::simulator::{run_circuit_with, CircuitOutput, OraclePath, DEFAULT_MAX_QUBITS};
use pbv_core::{Error, KeySet, RqProfile};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Capacity = 3,
    InvalidUtf8 = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbvOraclePath {
    Gate = 0,
    Fast = 1,
}

/// Opaque key set handle.
pub struct PbvKeySet(KeySet);

/// Opaque handle on a simulated circuit's final state.
pub struct PbvCircuit(CircuitOutput);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into().into_bytes());
}

fn fail(err: Error) -> PbvStatus {
    let status = if err.is_capacity() {
        PbvStatus::Capacity
    } else {
        PbvStatus::InvalidInput
    };
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> PbvStatus) -> PbvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            PbvStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return PbvStatus::NullPointer;
        })+
    };
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pbv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pbv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses comma-separated MSB-first keys such as `"011,101"`.
///
/// # Safety
/// `list` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pbv_keyset_parse(list: *const c_char, out: *mut *mut PbvKeySet) -> PbvStatus {
    guard(|| {
        non_null!(list, out);
        let Ok(text) = CStr::from_ptr(list).to_str() else {
            set_error("key list is not valid UTF-8");
            return PbvStatus::InvalidUtf8;
        };
        match KeySet::parse_list(text) {
            Ok(keys) => {
                *out = Box::into_raw(Box::new(PbvKeySet(keys)));
                PbvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `keys` must be null or a handle from `pbv_keyset_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pbv_keyset_free(keys: *mut PbvKeySet) {
    if !keys.is_null() {
        drop(Box::from_raw(keys));
    }
}

/// Number of keys, zero for a null handle.
///
/// # Safety
/// `keys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbv_keyset_len(keys: *const PbvKeySet) -> usize {
    keys.as_ref().map_or(0, |k| k.0.len())
}

/// Key width in bits, zero for a null handle.
///
/// # Safety
/// `keys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbv_keyset_width(keys: *const PbvKeySet) -> usize {
    keys.as_ref().map_or(0, |k| k.0.width())
}

/// Simulates the full circuit for `keys`.
///
/// # Safety
/// `keys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pbv_circuit_run(
    keys: *const PbvKeySet,
    path: PbvOraclePath,
    out: *mut *mut PbvCircuit,
) -> PbvStatus {
    guard(|| {
        non_null!(keys, out);
        let path = match path {
            PbvOraclePath::Gate => OraclePath::Gate,
            PbvOraclePath::Fast => OraclePath::Fast,
        };
        match run_circuit_with(&(*keys).0, path, DEFAULT_MAX_QUBITS) {
            Ok(output) => {
                *out = Box::into_raw(Box::new(PbvCircuit(output)));
                PbvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `circuit` must be null or a handle from `pbv_circuit_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pbv_circuit_free(circuit: *mut PbvCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Total register width (data, target and control qubits).
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbv_circuit_num_qubits(circuit: *const PbvCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.state.num_qubits())
}

/// Writes the `2^n` data-register outcome probabilities into `probs`.
///
/// # Safety
/// `circuit` must be a live handle; `probs` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pbv_circuit_distribution(
    circuit: *const PbvCircuit,
    probs: *mut f64,
    len: usize,
) -> PbvStatus {
    guard(|| {
        non_null!(circuit, probs);
        let dist = match (*circuit).0.exact_distribution() {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let values = dist.probabilities();
        if len < values.len() {
            set_error(format!("buffer holds {len} values, {} needed", values.len()));
            return PbvStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(values.as_ptr(), probs, values.len());
        PbvStatus::Ok
    })
}

/// Measures the data register `shots` times with a ChaCha8 stream seeded by
/// `seed`, writing per-outcome counts into the `2^n` entries of `counts`.
///
/// # Safety
/// `circuit` must be a live handle; `counts` must hold `len` integers.
#[no_mangle]
pub unsafe extern "C" fn pbv_circuit_sample(
    circuit: *const PbvCircuit,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    len: usize,
) -> PbvStatus {
    guard(|| {
        non_null!(circuit, counts);
        let output = &(*circuit).0;
        let dim = 1usize << output.layout.data;
        if len < dim {
            set_error(format!("buffer holds {len} counts, {dim} needed"));
            return PbvStatus::BufferTooSmall;
        }
        let hist = match output.measure(shots, &mut rng::seeded(seed)) {
            Ok(h) => h,
            Err(e) => return fail(e),
        };
        let out = std::slice::from_raw_parts_mut(counts, dim);
        out.fill(0);
        for (x, c) in hist.counts() {
            out[x as usize] = c;
        }
        PbvStatus::Ok
    })
}

/// Probability that `m` uniform draws reveal all `k` keys.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pbv_prob_all_keys(k: u64, m: u64, out: *mut f64) -> PbvStatus {
    guard(|| {
        non_null!(out);
        match prob_all_keys(k, m) {
            Ok(p) => {
                *out = p.to_f64();
                PbvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Ordered-assignment guessing probability `R / prod C(k, r_q)` for `keys`.
///
/// # Safety
/// `keys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pbv_classical_guess_exact(keys: *const PbvKeySet, out: *mut f64) -> PbvStatus {
    guard(|| {
        non_null!(keys, out);
        *out = classical_guess_exact(&(*keys).0).to_f64();
        PbvStatus::Ok
    })
}

unsafe fn profile_from(counts: *const usize, n: usize, k: usize) -> Result<RqProfile, Error> {
    let slice = std::slice::from_raw_parts(counts, n);
    RqProfile::new(slice.to_vec(), k)
}

/// `min(k! / prod C(k, r_q), 1)` for a profile given least-significant bit
/// first (`counts[q] = r_q`).
///
/// # Safety
/// `counts` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pbv_classical_guess_bound(
    counts: *const usize,
    n: usize,
    k: usize,
    out: *mut f64,
) -> PbvStatus {
    guard(|| {
        non_null!(counts, out);
        match profile_from(counts, n, k).and_then(|p| classical_guess_bound(&p, k)) {
            Ok(p) => {
                *out = p.to_f64();
                PbvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Counts key multisets consistent with a profile (least-significant bit
/// first). `work_bound` of zero selects the library default.
///
/// # Safety
/// `counts` must hold `n` values; the two outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pbv_count_consistent(
    counts: *const usize,
    n: usize,
    k: usize,
    work_bound: u64,
    multiset_count: *mut usize,
    distinct_keyset_count: *mut usize,
) -> PbvStatus {
    guard(|| {
        non_null!(counts, multiset_count, distinct_keyset_count);
        let mut opts = EnumerationOptions::default();
        if work_bound > 0 {
            opts.work_bound = work_bound;
        }
        match profile_from(counts, n, k).and_then(|p| count_consistent_keysets(&p, k, opts)) {
            Ok(c) => {
                *multiset_count = c.multiset_count;
                *distinct_keyset_count = c.distinct_keyset_count;
                PbvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
