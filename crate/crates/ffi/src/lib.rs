//! C ABI for the itervote simulator: opaque profile handles, status codes,
//! and a thread-local last-error message.
//!
//! Every function is null-safe and panic-safe; failures come back as an
//! [`IvStatus`] with details retrievable through [`iv_last_error`]. Strings
//! returned by this library must be released with [`iv_string_free`] and
//! profile handles with [`iv_profile_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use itervote::engine::{default_step_cap, iterate};
use itervote::moves::MoveRestriction;
use itervote::preferences::{
    condorcet_winner, generate_profile, generate_profile_with_condorcet_winner, parse_profile,
    Profile, TieBreakOrder, DEFAULT_SAMPLING_ATTEMPT_CAP,
};
use itervote::rules::{winner, Rule};
use itervote::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Profile text could not be parsed.
    ParseError = 3,
    /// A rule name, move name, or parameter was rejected.
    InvalidArgument = 4,
    /// Rejection sampling gave up before finding a Condorcet winner.
    SamplingFailed = 5,
    /// An internal invariant failed.
    Internal = 6,
}

/// Opaque handle to an immutable profile.
pub struct IvProfile(Profile);

/// Summary of one iterative election run.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IvIterationSummary {
    /// True when no agent had an improving move left; false when the step
    /// cap cut the run off.
    pub converged: bool,
    /// Winning candidate id in the final profile.
    pub winner: u32,
    /// Number of manipulation steps applied.
    pub steps: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Display) {
    let text = message.to_string();
    let cstring = CString::new(text).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: IvStatus, message: impl Display) -> IvStatus {
    set_error(message);
    status
}

fn status_of(err: &Error) -> IvStatus {
    match err {
        Error::ProfileParse { .. } => IvStatus::ParseError,
        Error::SamplingCapExceeded { .. } => IvStatus::SamplingFailed,
        Error::Io(_) => IvStatus::Internal,
        _ => IvStatus::InvalidArgument,
    }
}

/// Runs `body` with panics converted to `IvStatus::Internal`.
fn guarded(body: impl FnOnce() -> IvStatus) -> IvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(IvStatus::Internal, "internal panic"),
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, IvStatus> {
    if ptr.is_null() {
        return Err(fail(IvStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(IvStatus::InvalidUtf8, "string argument is not UTF-8"))
}

/// Most recent error message on this thread, or null when the last call
/// succeeded. Free with `iv_string_free`.
#[no_mangle]
pub extern "C" fn iv_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have been returned by an itervote function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn iv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses one profile from its text format (`m n` header, then one ballot
/// line per voter). On success stores a new handle in `out`.
///
/// # Safety
/// `text` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn iv_profile_parse(
    text: *const c_char,
    out: *mut *mut IvProfile,
) -> IvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IvStatus::NullArgument, "null output pointer");
        }
        let text = match utf8_arg(text) {
            Ok(text) => text,
            Err(status) => return status,
        };
        match parse_profile(text) {
            Ok(profile) => {
                *out = Box::into_raw(Box::new(IvProfile(profile)));
                clear_error();
                IvStatus::Ok
            }
            Err(err) => fail(status_of(&err), err),
        }
    })
}

/// Generates a seeded impartial-culture profile; with `require_cw` set it
/// rejection-samples until the profile has a Condorcet winner.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn iv_profile_generate(
    m: u32,
    n: u32,
    seed: u64,
    require_cw: bool,
    out: *mut *mut IvProfile,
) -> IvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IvStatus::NullArgument, "null output pointer");
        }
        if m < 2 || n < 1 {
            return fail(IvStatus::InvalidArgument, "need m >= 2 and n >= 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = if require_cw {
            match generate_profile_with_condorcet_winner(
                m as usize,
                n as usize,
                &mut rng,
                DEFAULT_SAMPLING_ATTEMPT_CAP,
            ) {
                Ok(profile) => profile,
                Err(err) => return fail(status_of(&err), err),
            }
        } else {
            generate_profile(m as usize, n as usize, &mut rng)
        };
        *out = Box::into_raw(Box::new(IvProfile(profile)));
        clear_error();
        IvStatus::Ok
    })
}

/// Releases a profile handle. Null is a no-op.
///
/// # Safety
/// `profile` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn iv_profile_free(profile: *mut IvProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of candidates, or 0 for a null handle.
///
/// # Safety
/// `profile` must be a live handle from this library (or null).
#[no_mangle]
pub unsafe extern "C" fn iv_profile_num_candidates(profile: *const IvProfile) -> u32 {
    profile.as_ref().map_or(0, |p| p.0.m() as u32)
}

/// Number of voters, or 0 for a null handle.
///
/// # Safety
/// `profile` must be a live handle from this library (or null).
#[no_mangle]
pub unsafe extern "C" fn iv_profile_num_voters(profile: *const IvProfile) -> u32 {
    profile.as_ref().map_or(0, |p| p.0.n() as u32)
}

/// Serializes the profile to its text format. Free the string with
/// `iv_string_free`.
///
/// # Safety
/// `profile` must be a live handle and `out` writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn iv_profile_to_text(
    profile: *const IvProfile,
    out: *mut *mut c_char,
) -> IvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IvStatus::NullArgument, "null output pointer");
        }
        let Some(profile) = profile.as_ref() else {
            return fail(IvStatus::NullArgument, "null profile handle");
        };
        match CString::new(profile.0.to_text()) {
            Ok(text) => {
                *out = text.into_raw();
                clear_error();
                IvStatus::Ok
            }
            Err(_) => fail(IvStatus::Internal, "profile text contains NUL"),
        }
    })
}

/// Finds the Condorcet winner: writes its candidate id, or -1 when the
/// profile has none.
///
/// # Safety
/// `profile` must be a live handle and `out` writable storage for one i32.
#[no_mangle]
pub unsafe extern "C" fn iv_condorcet_winner(profile: *const IvProfile, out: *mut i32) -> IvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IvStatus::NullArgument, "null output pointer");
        }
        let Some(profile) = profile.as_ref() else {
            return fail(IvStatus::NullArgument, "null profile handle");
        };
        *out = condorcet_winner(&profile.0).map_or(-1, |c| c.0 as i32);
        clear_error();
        IvStatus::Ok
    })
}

/// Runs the named rule (`plurality`, `veto`, `approval2`, `approval3`,
/// `borda`, `copeland`, `maximin`, `stv`) with the identity tie-break and
/// writes the winner's candidate id.
///
/// # Safety
/// `profile` must be a live handle, `rule` a NUL-terminated string, and
/// `out` writable storage for one u32.
#[no_mangle]
pub unsafe extern "C" fn iv_election_winner(
    profile: *const IvProfile,
    rule: *const c_char,
    out: *mut u32,
) -> IvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IvStatus::NullArgument, "null output pointer");
        }
        let Some(profile) = profile.as_ref() else {
            return fail(IvStatus::NullArgument, "null profile handle");
        };
        let rule_name = match utf8_arg(rule) {
            Ok(name) => name,
            Err(status) => return status,
        };
        let rule = match Rule::parse(rule_name, profile.0.m()) {
            Ok(rule) => rule,
            Err(err) => return fail(status_of(&err), err),
        };
        let tb = TieBreakOrder::identity(profile.0.m());
        *out = winner(&rule, &profile.0, &tb).winner.0 as u32;
        clear_error();
        IvStatus::Ok
    })
}

/// Runs the iterative election for the named rule and move restriction
/// (`best`, `pragmatist<k>`, `m1`, `m2`) with the identity tie-break.
/// `step_cap` of 0 means the default `10 * n * m`.
///
/// # Safety
/// `profile` must be a live handle, `rule` and `restriction` NUL-terminated
/// strings, and `out` writable storage for one `IvIterationSummary`.
#[no_mangle]
pub unsafe extern "C" fn iv_iterate(
    profile: *const IvProfile,
    rule: *const c_char,
    restriction: *const c_char,
    step_cap: u64,
    out: *mut IvIterationSummary,
) -> IvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IvStatus::NullArgument, "null output pointer");
        }
        let Some(profile) = profile.as_ref() else {
            return fail(IvStatus::NullArgument, "null profile handle");
        };
        let (m, n) = (profile.0.m(), profile.0.n());
        let rule = match utf8_arg(rule)
            .and_then(|name| Rule::parse(name, m).map_err(|err| fail(status_of(&err), err)))
        {
            Ok(rule) => rule,
            Err(status) => return status,
        };
        let restriction = match utf8_arg(restriction)
            .and_then(|name| MoveRestriction::parse(name).map_err(|err| fail(status_of(&err), err)))
        {
            Ok(restriction) => restriction,
            Err(status) => return status,
        };
        let cap = if step_cap == 0 {
            default_step_cap(n, m)
        } else {
            step_cap as usize
        };
        let tb = TieBreakOrder::identity(m);
        match iterate(&profile.0, &rule, restriction, &tb, cap) {
            Ok(outcome) => {
                *out = IvIterationSummary {
                    converged: outcome.converged(),
                    winner: outcome.winner.0 as u32,
                    steps: outcome.steps as u64,
                };
                clear_error();
                IvStatus::Ok
            }
            Err(err) => fail(status_of(&err), err),
        }
    })
}
