// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for the PulseStack driver and compiler.
//!
//! The surface mirrors the driver's session/query/job model with opaque
//! handles and status codes so that C, C++, or any FFI-capable language
//! can target the stack. Conventions:
//!
//! - every function returns a [`PsStatus`]; results go to `out`
//!   parameters;
//! - the driver is an opaque pointer owned by the caller and released
//!   with [`ps_driver_free`]; sessions, devices, and jobs are plain
//!   integer handles;
//! - every `char*` output is a fresh NUL-terminated UTF-8 allocation the
//!   caller must release with [`ps_string_free`];
//! - a human-readable detail for the most recent error on the current
//!   thread is available from [`ps_last_error`].
//!
//! The generated header lands in `include/pulsestack.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use pulsestack::calibration::{CalibrationEntry, CalibrationRegistry};
use pulsestack::circuit::GateCircuit;
use pulsestack::driver::{
    DeviceDescriptor, DeviceHandle, Driver, DriverError, JobFormat, JobStatus, PropertyKey,
    QueryScope, SessionHandle,
};
use pulsestack::ir::SiteId;
use pulsestack::lowering::{builtin_calibrations, lower};
use pulsestack::passes::{run_pipeline, LegalizeMode, PipelineConfig};
use pulsestack::pqir::{emit, PulseModule};

/// Opaque driver handle.
pub struct PsDriver {
    inner: Driver,
}

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    PsOk = 0,
    PsErrNullPointer = 1,
    PsErrUtf8 = 2,
    PsErrStaleHandle = 3,
    PsErrUnknownDevice = 4,
    PsErrNotSupported = 5,
    PsErrInvalidScope = 6,
    PsErrFormatUnsupported = 7,
    PsErrPayloadInvalid = 8,
    PsErrInvalidArgument = 9,
    PsErrMissingCalibration = 10,
    PsErrJobFailed = 11,
    PsErrJobCancelled = 12,
    PsErrIo = 13,
    PsErrCompile = 14,
    PsErrInternal = 15,
}

/// Job lifecycle states, matching the driver's transition relation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsJobStatus {
    PsJobQueued = 0,
    PsJobRunning = 1,
    PsJobDone = 2,
    PsJobFailed = 3,
    PsJobCancelled = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn status_of(error: &DriverError) -> PsStatus {
    match error {
        DriverError::StaleHandle => PsStatus::PsErrStaleHandle,
        DriverError::UnknownDevice => PsStatus::PsErrUnknownDevice,
        DriverError::NotSupported => PsStatus::PsErrNotSupported,
        DriverError::InvalidScope(_) => PsStatus::PsErrInvalidScope,
        DriverError::FormatUnsupported(_) => PsStatus::PsErrFormatUnsupported,
        DriverError::PayloadInvalid { .. } => PsStatus::PsErrPayloadInvalid,
        DriverError::InvalidShots => PsStatus::PsErrInvalidArgument,
        DriverError::MissingCalibration { .. } => PsStatus::PsErrMissingCalibration,
        DriverError::InvalidCalibration(_) => PsStatus::PsErrInvalidArgument,
        DriverError::JobFailed(_) => PsStatus::PsErrJobFailed,
        DriverError::JobCancelled => PsStatus::PsErrJobCancelled,
        DriverError::ShuttingDown => PsStatus::PsErrInternal,
        DriverError::DescriptorFile { .. } | DriverError::Descriptor(_) => PsStatus::PsErrIo,
    }
}

fn driver_error(error: DriverError) -> PsStatus {
    let status = status_of(&error);
    set_last_error(error.to_string());
    status
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, PsStatus> {
    if ptr.is_null() {
        set_last_error("null pointer argument");
        return Err(PsStatus::PsErrNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        PsStatus::PsErrUtf8
    })
}

fn out_string(out: *mut *mut c_char, value: String) -> PsStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    match CString::new(value) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            PsStatus::PsOk
        }
        Err(_) => {
            set_last_error("output contains an interior NUL byte");
            PsStatus::PsErrInternal
        }
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(value) => value,
            Err(status) => return status,
        }
    };
}

unsafe fn driver_ref<'a>(driver: *mut PsDriver) -> Result<&'a PsDriver, PsStatus> {
    if driver.is_null() {
        set_last_error("null driver handle");
        return Err(PsStatus::PsErrNullPointer);
    }
    Ok(&*driver)
}

/// A copy of the most recent error message on this thread, or NULL when
/// no error has occurred. Free with `ps_string_free`.
#[no_mangle]
pub extern "C" fn ps_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by this library, or NULL.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Create a driver from the `PULSESTACK_DEVICES` environment variable
/// (empty driver when unset).
///
/// # Safety
/// `out_driver` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_driver_new_from_env(out_driver: *mut *mut PsDriver) -> PsStatus {
    if out_driver.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    match Driver::from_env() {
        Ok(inner) => {
            *out_driver = Box::into_raw(Box::new(PsDriver { inner }));
            PsStatus::PsOk
        }
        Err(e) => driver_error(e),
    }
}

/// Create a driver from an array of descriptor file paths.
///
/// # Safety
/// `paths` must point to `num_paths` valid C strings; `out_driver` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_driver_new_from_files(
    paths: *const *const c_char,
    num_paths: usize,
    out_driver: *mut *mut PsDriver,
) -> PsStatus {
    if out_driver.is_null() || (num_paths > 0 && paths.is_null()) {
        set_last_error("null pointer argument");
        return PsStatus::PsErrNullPointer;
    }
    let mut list: Vec<PathBuf> = Vec::with_capacity(num_paths);
    for index in 0..num_paths {
        let path = try_ffi!(cstr(*paths.add(index)));
        list.push(PathBuf::from(path));
    }
    match Driver::from_descriptor_paths(list) {
        Ok(inner) => {
            *out_driver = Box::into_raw(Box::new(PsDriver { inner }));
            PsStatus::PsOk
        }
        Err(e) => driver_error(e),
    }
}

/// Destroy a driver, joining its device workers.
///
/// # Safety
/// `driver` must be a pointer from a `ps_driver_new_*` call, or NULL.
#[no_mangle]
pub unsafe extern "C" fn ps_driver_free(driver: *mut PsDriver) {
    if !driver.is_null() {
        drop(Box::from_raw(driver));
    }
}

/// Open a session.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_session_open(driver: *mut PsDriver, out_session: *mut u64) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    if out_session.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    *out_session = driver.inner.open_session().raw();
    PsStatus::PsOk
}

/// Close a session, cancelling its queued jobs.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_session_close(driver: *mut PsDriver, session: u64) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    match driver.inner.close_session(SessionHandle::from_raw(session)) {
        Ok(()) => PsStatus::PsOk,
        Err(e) => driver_error(e),
    }
}

/// Number of devices visible to a session.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_device_count(
    driver: *mut PsDriver,
    session: u64,
    out_count: *mut usize,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    if out_count.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    match driver.inner.list_devices(SessionHandle::from_raw(session)) {
        Ok(devices) => {
            *out_count = devices.len();
            PsStatus::PsOk
        }
        Err(e) => driver_error(e),
    }
}

/// Device handle and name at `index` in registration order.
///
/// # Safety
/// Pointers must be valid; free `out_name` with `ps_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ps_device_at(
    driver: *mut PsDriver,
    session: u64,
    index: usize,
    out_device: *mut u64,
    out_name: *mut *mut c_char,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    if out_device.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    match driver.inner.list_devices(SessionHandle::from_raw(session)) {
        Ok(devices) => match devices.into_iter().nth(index) {
            Some((handle, name)) => {
                *out_device = handle.raw();
                out_string(out_name, name)
            }
            None => {
                set_last_error(format!("device index {index} out of range"));
                PsStatus::PsErrUnknownDevice
            }
        },
        Err(e) => driver_error(e),
    }
}

/// Look a device up by name.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_device_find(
    driver: *mut PsDriver,
    name: *const c_char,
    out_device: *mut u64,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    let name = try_ffi!(cstr(name));
    if out_device.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    match driver.inner.device_by_name(name) {
        Some(handle) => {
            *out_device = handle.raw();
            PsStatus::PsOk
        }
        None => {
            set_last_error(format!("unknown device {name:?}"));
            PsStatus::PsErrUnknownDevice
        }
    }
}

/// Query one property. `scope` follows the CLI grammar (`device`,
/// `site:N`, `port:ID`, `operation:NAME`); `key` is the snake_case
/// property name; the value is rendered as text.
///
/// # Safety
/// Pointers must be valid; free `out_value` with `ps_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ps_query(
    driver: *mut PsDriver,
    device: u64,
    scope: *const c_char,
    key: *const c_char,
    out_value: *mut *mut c_char,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    let scope_text = try_ffi!(cstr(scope));
    let key_text = try_ffi!(cstr(key));
    let scope: QueryScope = match scope_text.parse() {
        Ok(scope) => scope,
        Err(message) => {
            set_last_error(message);
            return PsStatus::PsErrInvalidScope;
        }
    };
    let key: PropertyKey = match key_text.parse() {
        Ok(key) => key,
        Err(message) => {
            set_last_error(message);
            return PsStatus::PsErrNotSupported;
        }
    };
    match driver
        .inner
        .query(DeviceHandle::from_raw(device), &scope, key)
    {
        Ok(value) => out_string(out_value, value.to_string()),
        Err(e) => driver_error(e),
    }
}

/// Default calibration for a gate on specific sites, as JSON.
///
/// # Safety
/// Pointers must be valid; free `out_json` with `ps_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ps_default_calibration_get(
    driver: *mut PsDriver,
    device: u64,
    gate: *const c_char,
    sites: *const u32,
    num_sites: usize,
    out_json: *mut *mut c_char,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    let gate = try_ffi!(cstr(gate));
    if num_sites > 0 && sites.is_null() {
        set_last_error("null sites pointer");
        return PsStatus::PsErrNullPointer;
    }
    let sites: Vec<SiteId> = (0..num_sites).map(|i| SiteId(*sites.add(i))).collect();
    match driver
        .inner
        .get_default_calibration(DeviceHandle::from_raw(device), gate, &sites)
    {
        Ok(entry) => match serde_json::to_string_pretty(&entry) {
            Ok(json) => out_string(out_json, json),
            Err(e) => {
                set_last_error(e.to_string());
                PsStatus::PsErrInternal
            }
        },
        Err(e) => driver_error(e),
    }
}

/// Install a default calibration from its JSON form; replaces an existing
/// entry with the same gate and site selector.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_default_calibration_set(
    driver: *mut PsDriver,
    device: u64,
    entry_json: *const c_char,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    let json = try_ffi!(cstr(entry_json));
    let entry: CalibrationEntry = match serde_json::from_str(json) {
        Ok(entry) => entry,
        Err(e) => {
            set_last_error(format!("malformed calibration JSON: {e}"));
            return PsStatus::PsErrInvalidArgument;
        }
    };
    match driver
        .inner
        .set_default_calibration(DeviceHandle::from_raw(device), entry)
    {
        Ok(_) => PsStatus::PsOk,
        Err(e) => driver_error(e),
    }
}

/// Submit a payload. `format` is the format tag, e.g. `pqir_pulse`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_job_submit(
    driver: *mut PsDriver,
    session: u64,
    device: u64,
    format: *const c_char,
    payload: *const c_char,
    shots: u64,
    seed: u64,
    out_job: *mut u64,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    let format_text = try_ffi!(cstr(format));
    let payload = try_ffi!(cstr(payload));
    if out_job.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    let format: JobFormat = match format_text.parse() {
        Ok(format) => format,
        Err(message) => {
            set_last_error(message);
            return PsStatus::PsErrFormatUnsupported;
        }
    };
    match driver.inner.submit_job(
        SessionHandle::from_raw(session),
        DeviceHandle::from_raw(device),
        format,
        payload,
        shots,
        seed,
    ) {
        Ok(job) => {
            *out_job = job.raw();
            PsStatus::PsOk
        }
        Err(e) => driver_error(e),
    }
}

/// Current lifecycle state of a job.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_job_status(
    driver: *mut PsDriver,
    job: u64,
    out_status: *mut PsJobStatus,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    if out_status.is_null() {
        set_last_error("null output pointer");
        return PsStatus::PsErrNullPointer;
    }
    match driver
        .inner
        .job_status(pulsestack::driver::JobHandle::from_raw(job))
    {
        Ok(status) => {
            *out_status = match status {
                JobStatus::Queued => PsJobStatus::PsJobQueued,
                JobStatus::Running => PsJobStatus::PsJobRunning,
                JobStatus::Done => PsJobStatus::PsJobDone,
                JobStatus::Failed => PsJobStatus::PsJobFailed,
                JobStatus::Cancelled => PsJobStatus::PsJobCancelled,
            };
            PsStatus::PsOk
        }
        Err(e) => driver_error(e),
    }
}

/// Block until the job finishes; on success the histogram is returned as
/// `bitstring count` lines sorted by bitstring.
///
/// # Safety
/// Pointers must be valid; free `out_histogram` with `ps_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ps_job_wait(
    driver: *mut PsDriver,
    job: u64,
    out_histogram: *mut *mut c_char,
) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    match driver
        .inner
        .job_result(pulsestack::driver::JobHandle::from_raw(job))
    {
        Ok(histogram) => out_string(out_histogram, histogram.to_string()),
        Err(e) => driver_error(e),
    }
}

/// Cancel a queued job (no-op for running or finished jobs).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ps_job_cancel(driver: *mut PsDriver, job: u64) -> PsStatus {
    let driver = try_ffi!(driver_ref(driver));
    match driver
        .inner
        .job_cancel(pulsestack::driver::JobHandle::from_raw(job))
    {
        Ok(()) => PsStatus::PsOk,
        Err(e) => driver_error(e),
    }
}

/// Compile a circuit (JSON gate list) against a device descriptor (JSON)
/// into `.pqir` text. `calibrations_json` may be NULL; `passes` may be
/// NULL for the default pipeline; `mode` is `strict` or `pad`.
///
/// # Safety
/// Pointers must be valid; free `out_pqir` with `ps_string_free`.
#[no_mangle]
pub unsafe extern "C" fn ps_compile(
    circuit_json: *const c_char,
    calibrations_json: *const c_char,
    device_json: *const c_char,
    passes: *const c_char,
    mode: *const c_char,
    out_pqir: *mut *mut c_char,
) -> PsStatus {
    let circuit_text = try_ffi!(cstr(circuit_json));
    let device_text = try_ffi!(cstr(device_json));
    let mode_text = try_ffi!(cstr(mode));

    let compile = || -> Result<String, String> {
        let circuit = GateCircuit::from_json(circuit_text).map_err(|e| e.to_string())?;
        let descriptor = DeviceDescriptor::from_json(device_text).map_err(|e| e.to_string())?;
        let mut registry = builtin_calibrations(&descriptor);
        registry
            .absorb(descriptor.default_calibrations.clone())
            .map_err(|e| e.to_string())?;
        if !calibrations_json.is_null() {
            let text = CStr::from_ptr(calibrations_json)
                .to_str()
                .map_err(|_| "calibrations are not valid UTF-8".to_string())?;
            registry
                .absorb(CalibrationRegistry::from_json(text).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        }
        let schedule = lower(&circuit, &registry, &descriptor).map_err(|e| e.to_string())?;
        let legalize_mode: LegalizeMode = mode_text.parse()?;
        let config = if passes.is_null() {
            PipelineConfig {
                mode: legalize_mode,
                ..PipelineConfig::default()
            }
        } else {
            let list = CStr::from_ptr(passes)
                .to_str()
                .map_err(|_| "pass list is not valid UTF-8".to_string())?;
            PipelineConfig::from_pass_list(list, legalize_mode).map_err(|e| e.to_string())?
        };
        let (schedule, diagnostics) =
            run_pipeline(schedule, &config, &descriptor).map_err(|e| e.to_string())?;
        if diagnostics.has_errors() {
            return Err(format!("compilation failed:\n{diagnostics}"));
        }
        let module = PulseModule::from_schedule(&schedule, &descriptor, "module", "main", "")
            .map_err(|e| e.to_string())?;
        emit(&module).map_err(|e| e.to_string())
    };

    match compile() {
        Ok(text) => out_string(out_pqir, text),
        Err(message) => {
            set_last_error(message);
            PsStatus::PsErrCompile
        }
    }
}
