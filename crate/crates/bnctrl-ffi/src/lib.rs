//! C ABI over the core library: parse a model into an opaque handle, then
//! query attractors, run the pseudo-attractor scan, ask the exact control
//! oracle, or simulate, each returning JSON or CSV text.
//!
//! Conventions: every function that can fail returns a [`BnctrlStatus`] and
//! writes its result through an out-pointer only on `Ok`. Strings returned
//! through out-pointers are NUL-terminated, owned by the caller, and must be
//! released with [`bnctrl_string_free`]. On any failure a per-thread message
//! is set, readable via [`bnctrl_last_error_message`]. Passing NULL where a
//! non-NULL pointer is required yields `Usage`.

use bnctrl::bn::{parse_bnet, BooleanNetwork, NetworkState};
use bnctrl::dynamics::{simulate, RecordMode};
use bnctrl::exact::{
    attractors_exact, min_control_oracle, pseudo_attractor_exact, stationary_distribution,
    BasinMap, BasinMode, ExactError, ExplicitStg, DEFAULT_STATE_CAP,
};
use bnctrl::pasip::{phase1_scan, PasipConfig};
use bnctrl::{PartialAssignment, RngStream};
use serde_json::json;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes, matching the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnctrlStatus {
    Ok = 0,
    /// Unexpected internal failure; see the error message.
    Internal = 1,
    /// Malformed input: model text, assignment, hex state, or bad argument.
    Usage = 2,
    /// Instance too large for exact analysis under the given cap.
    Capacity = 3,
    /// Structurally valid but empty result (nothing misaligned, no strategy).
    Empty = 4,
}

/// Opaque Boolean network handle.
pub struct BnctrlNetwork {
    net: BooleanNetwork,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: BnctrlStatus, msg: impl AsRef<str>) -> BnctrlStatus {
    set_error(msg.as_ref());
    status
}

fn exact_status(e: &ExactError) -> BnctrlStatus {
    match e {
        ExactError::TooLarge { .. } => BnctrlStatus::Capacity,
        ExactError::Model(_) => BnctrlStatus::Usage,
        _ => BnctrlStatus::Internal,
    }
}

/// Shield the C boundary from unwinding.
fn guarded(body: impl FnOnce() -> BnctrlStatus) -> BnctrlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(BnctrlStatus::Internal, format!("internal panic: {msg}"))
        }
    }
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated string valid for reads.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, BnctrlStatus> {
    if ptr.is_null() {
        return Err(fail(BnctrlStatus::Usage, format!("{what} is NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(BnctrlStatus::Usage, format!("{what} is not valid UTF-8")))
}

unsafe fn required_net<'a>(
    ptr: *const BnctrlNetwork,
) -> Result<&'a BooleanNetwork, BnctrlStatus> {
    if ptr.is_null() {
        return Err(fail(BnctrlStatus::Usage, "network handle is NULL"));
    }
    Ok(&(*ptr).net)
}

fn emit(out: *mut *mut c_char, text: String) -> BnctrlStatus {
    let sanitized: Vec<u8> = text.into_bytes().into_iter().filter(|&b| b != 0).collect();
    let c = CString::new(sanitized).unwrap_or_default();
    unsafe { *out = c.into_raw() };
    BnctrlStatus::Ok
}

fn parse_condition(
    net: &BooleanNetwork,
    ptr: *const c_char,
) -> Result<PartialAssignment, BnctrlStatus> {
    if ptr.is_null() {
        return Ok(PartialAssignment::empty());
    }
    let text = unsafe { required_str(ptr, "assignment")? };
    net.parse_assignment(text)
        .map_err(|e| fail(BnctrlStatus::Usage, e.to_string()))
}

/// Parse BoolNet text into a network handle. On success `*out` owns the
/// handle; release it with [`bnctrl_network_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_parse(
    text: *const c_char,
    out: *mut *mut BnctrlNetwork,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let text = match required_str(text, "model text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_bnet(text) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(BnctrlNetwork { net }));
                BnctrlStatus::Ok
            }
            Err(e) => fail(BnctrlStatus::Usage, e.to_string()),
        }
    })
}

/// Release a handle from [`bnctrl_parse`] or [`bnctrl_restrict`]. NULL is a
/// no-op.
///
/// # Safety
/// `net` must be NULL or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_network_free(net: *mut BnctrlNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of nodes, or 0 for a NULL handle.
///
/// # Safety
/// `net` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_node_count(net: *const BnctrlNetwork) -> usize {
    if net.is_null() {
        0
    } else {
        (*net).net.n_nodes()
    }
}

/// Name of node `index` as a fresh string via `out`.
///
/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_node_name(
    net: *const BnctrlNetwork,
    index: usize,
    out: *mut *mut c_char,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let net = match required_net(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        if index >= net.n_nodes() {
            return fail(
                BnctrlStatus::Usage,
                format!("node index {index} out of range, model has {}", net.n_nodes()),
            );
        }
        emit(out, net.name(index).to_string())
    })
}

/// Canonical BoolNet text of the network via `out`.
///
/// # Safety
/// `net` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_serialize(
    net: *const BnctrlNetwork,
    out: *mut *mut c_char,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        match required_net(net) {
            Ok(n) => emit(out, n.serialize_bnet()),
            Err(s) => s,
        }
    })
}

/// Stable digest of the canonical serialization, or 0 for a NULL handle.
///
/// # Safety
/// `net` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_fingerprint(net: *const BnctrlNetwork) -> u64 {
    if net.is_null() {
        0
    } else {
        (*net).net.fingerprint()
    }
}

/// Pin input nodes per `assignment` (e.g. `"x1=0, x5=1"`; NULL or empty pins
/// nothing) and return the restricted network as a new handle.
///
/// # Safety
/// `net` must be a live handle; `assignment` NULL or NUL-terminated; `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_restrict(
    net: *const BnctrlNetwork,
    assignment: *const c_char,
    out: *mut *mut BnctrlNetwork,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let net = match required_net(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let env = match parse_condition(net, assignment) {
            Ok(e) => e,
            Err(s) => return s,
        };
        match net.restrict(&env) {
            Ok(restricted) => {
                *out = Box::into_raw(Box::new(BnctrlNetwork { net: restricted }));
                BnctrlStatus::Ok
            }
            Err(e) => fail(BnctrlStatus::Usage, e.to_string()),
        }
    })
}

/// Exact attractors under an optional environmental condition, as JSON:
/// `{"free_nodes", "n_states", "attractors": [{"states", "size",
/// "fixed_point", "stationary", "pseudo_attractor"}]}`. States are hex
/// encodings of full network states. `cap` bounds the explicit state count;
/// 0 selects the default cap.
///
/// # Safety
/// `net` must be a live handle; `env` NULL or NUL-terminated; `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_attractors_json(
    net: *const BnctrlNetwork,
    env: *const c_char,
    cap: usize,
    out: *mut *mut c_char,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let net = match required_net(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let env = match parse_condition(net, env) {
            Ok(e) => e,
            Err(s) => return s,
        };
        let cap = if cap == 0 { DEFAULT_STATE_CAP } else { cap };
        let stg = match ExplicitStg::build(net, &env, cap) {
            Ok(s) => s,
            Err(e) => return fail(exact_status(&e), e.to_string()),
        };
        let atts = attractors_exact(&stg);
        let mut entries = Vec::with_capacity(atts.len());
        for a in &atts {
            let dist = match stationary_distribution(&stg, a) {
                Ok(d) => d,
                Err(e) => return fail(exact_status(&e), e.to_string()),
            };
            let pa = pseudo_attractor_exact(&dist);
            entries.push(json!({
                "states": a.states.iter().map(|&s| stg.unpack(s).to_hex()).collect::<Vec<_>>(),
                "size": a.len(),
                "fixed_point": a.fixed_point,
                "stationary": a.states.iter().map(|&s| dist.prob_of(s).unwrap_or(0.0)).collect::<Vec<_>>(),
                "pseudo_attractor": pa.iter().map(|&s| stg.unpack(s).to_hex()).collect::<Vec<_>>(),
            }));
        }
        let doc = json!({
            "free_nodes": stg.free().len(),
            "n_states": stg.n_states(),
            "attractors": entries,
        });
        emit(out, format!("{doc:#}"))
    })
}

/// Simulation-based pseudo-attractor scan with default parameters under an
/// optional condition, as registry JSON. Identical seeds give identical
/// output.
///
/// # Safety
/// `net` must be a live handle; `env` NULL or NUL-terminated; `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_pasip_json(
    net: *const BnctrlNetwork,
    env: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let net = match required_net(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let env = match parse_condition(net, env) {
            Ok(e) => e,
            Err(s) => return s,
        };
        let rng = RngStream::new(seed, "pasip");
        match phase1_scan(net, &env, &PasipConfig::default(), &rng) {
            Ok(registry) => emit(out, registry.to_json()),
            Err(e) => fail(BnctrlStatus::Usage, e.to_string()),
        }
    })
}

/// Exact shortest control strategies from every misaligned attractor under
/// an optional condition, as JSON `{"mean_length", "sources": [{"attractor",
/// "states", "length", "steps"}]}`. Unsolvable sources carry a null length.
/// Returns `Empty` when every attractor already satisfies the target or no
/// source is solvable within `max_flips`.
///
/// # Safety
/// `net` must be a live handle; `env` NULL or NUL-terminated; `target` must
/// be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_oracle_json(
    net: *const BnctrlNetwork,
    env: *const c_char,
    target: *const c_char,
    max_flips: usize,
    cap: usize,
    out: *mut *mut c_char,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let net = match required_net(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let env = match parse_condition(net, env) {
            Ok(e) => e,
            Err(s) => return s,
        };
        let target = if target.is_null() {
            return fail(BnctrlStatus::Usage, "target is NULL");
        } else {
            match parse_condition(net, target) {
                Ok(t) => t,
                Err(s) => return s,
            }
        };
        if target.is_empty() {
            return fail(BnctrlStatus::Usage, "target pins no nodes");
        }
        if max_flips == 0 {
            return fail(BnctrlStatus::Usage, "max_flips must be positive");
        }
        let cap = if cap == 0 { DEFAULT_STATE_CAP } else { cap };
        let stg = match ExplicitStg::build(net, &env, cap) {
            Ok(s) => s,
            Err(e) => return fail(exact_status(&e), e.to_string()),
        };
        let atts = attractors_exact(&stg);
        let basins = BasinMap::build(&stg, &atts);
        let sources: Vec<usize> = (0..atts.len())
            .filter(|&i| !atts[i].states.iter().any(|&s| target.matches(&stg.unpack(s))))
            .collect();
        if sources.is_empty() {
            return fail(
                BnctrlStatus::Empty,
                "every attractor already satisfies the target",
            );
        }
        let mut rows = Vec::with_capacity(sources.len());
        let mut lengths = Vec::new();
        for &i in &sources {
            let plan =
                min_control_oracle(&stg, &atts, &basins, i, &target, max_flips, BasinMode::Strong);
            let states: Vec<String> = atts[i]
                .states
                .iter()
                .map(|&s| stg.unpack(s).to_hex())
                .collect();
            match plan {
                Some(p) => {
                    rows.push(json!({
                        "attractor": i,
                        "states": states,
                        "length": p.length,
                        "steps": p.steps.iter().map(|st| json!({
                            "from_state": stg.unpack(st.from_state).to_hex(),
                            "flips": st.flips.iter().map(|&v| net.name(v)).collect::<Vec<_>>(),
                            "to_attractor": st.to_attractor,
                        })).collect::<Vec<_>>(),
                    }));
                    lengths.push(p.length as f64);
                }
                None => rows.push(json!({
                    "attractor": i,
                    "states": states,
                    "length": serde_json::Value::Null,
                    "steps": [],
                })),
            }
        }
        if lengths.is_empty() {
            return fail(
                BnctrlStatus::Empty,
                format!("no strategy with at most {max_flips} flips reaches the target"),
            );
        }
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        let doc = json!({
            "mean_length": mean,
            "sources": rows,
        });
        emit(out, format!("{doc:#}"))
    })
}

/// Run `steps` asynchronous updates from `start_hex` (NULL draws free nodes
/// uniformly under the condition) and return per-state visit counts as CSV
/// `state_hex,count`, most visited first. Identical seeds give identical
/// output.
///
/// # Safety
/// `net` must be a live handle; `env` and `start_hex` NULL or
/// NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_simulate_csv(
    net: *const BnctrlNetwork,
    env: *const c_char,
    start_hex: *const c_char,
    steps: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> BnctrlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BnctrlStatus::Usage, "out pointer is NULL");
        }
        let net = match required_net(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let env = match parse_condition(net, env) {
            Ok(e) => e,
            Err(s) => return s,
        };
        let restricted = match net.restrict(&env) {
            Ok(r) => r,
            Err(e) => return fail(BnctrlStatus::Usage, e.to_string()),
        };
        let mut rng = RngStream::new(seed, "simulate");
        let start = if start_hex.is_null() {
            let mut s = NetworkState::random(restricted.n_nodes(), &mut rng);
            env.force(&mut s);
            s
        } else {
            let hex = match required_str(start_hex, "start state") {
                Ok(h) => h,
                Err(s) => return s,
            };
            match NetworkState::from_hex(restricted.n_nodes(), hex) {
                Ok(s) => {
                    if !env.matches(&s) {
                        return fail(
                            BnctrlStatus::Usage,
                            "start state contradicts the pinned condition",
                        );
                    }
                    s
                }
                Err(e) => return fail(BnctrlStatus::Usage, e.to_string()),
            }
        };
        let traj = simulate(
            &restricted,
            &start,
            steps as usize,
            &mut rng,
            RecordMode::Counts,
        );
        let mut rows: Vec<(String, u64)> = traj
            .counts
            .iter()
            .map(|(s, &c)| (s.to_hex(), c))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut csv = String::from("state_hex,count\n");
        for (hex, count) in rows {
            csv.push_str(&hex);
            csv.push(',');
            csv.push_str(&count.to_string());
            csv.push('\n');
        }
        emit(out, csv)
    })
}

/// The message set by the most recent failing call on this thread, as a
/// fresh string via `out`. Empty when no failure has occurred.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_last_error_message(out: *mut *mut c_char) -> BnctrlStatus {
    if out.is_null() {
        return BnctrlStatus::Usage;
    }
    let msg = LAST_ERROR.with(|slot| slot.borrow().clone());
    *out = msg.into_raw();
    BnctrlStatus::Ok
}

/// Release a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or an unreleased string from this library.
#[no_mangle]
pub unsafe extern "C" fn bnctrl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
