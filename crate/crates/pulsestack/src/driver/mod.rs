// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! The device-management driver.
//!
//! Clients never touch devices directly: they open a session against the
//! driver, discover devices, query capabilities through opaque handles,
//! manage default calibrations, and submit pulse payloads as jobs. Devices
//! are registered from descriptor files at driver start (see
//! [`Driver::from_env`] and the `PULSESTACK_DEVICES` environment
//! variable); each device gets one worker thread executing its jobs in
//! submission order.
//!
//! The driver is safe for concurrent use from many threads; handles are
//! plain integers and may cross threads freely. [`Driver::job_result`] is
//! the synchronization point between submitters and workers.

pub mod descriptor;
mod job;
mod query;

pub use descriptor::{DescriptorError, DeviceDescriptor, JobFormat, PulseSupport};
pub use job::{Histogram, JobStatus};
pub use query::{PropertyKey, PropertyValue, QueryScope};

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Condvar, Mutex, RwLock};
use std::thread::JoinHandle;

use thiserror::Error;

use crate::calibration::{CalibrationEntry, CalibrationRegistry};
use crate::ir::SiteId;
use crate::lowering::{builtin_calibrations, validate_entry_roles};
use crate::passes::{legalize, resolve_timing, Diagnostic, Diagnostics, LegalizeMode};
use crate::pqir;
use crate::sim::SimBackend;

/// Opaque session token issued by [`Driver::open_session`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionHandle(u64);

/// Opaque device token; stable for the driver's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeviceHandle(u64);

/// Opaque job token; stable for the driver's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JobHandle(u64);

impl SessionHandle {
    pub fn raw(self) -> u64 {
        self.0
    }
    pub fn from_raw(raw: u64) -> Self {
        SessionHandle(raw)
    }
}

impl DeviceHandle {
    pub fn raw(self) -> u64 {
        self.0
    }
    pub fn from_raw(raw: u64) -> Self {
        DeviceHandle(raw)
    }
}

impl JobHandle {
    pub fn raw(self) -> u64 {
        self.0
    }
    pub fn from_raw(raw: u64) -> Self {
        JobHandle(raw)
    }
}

/// Snapshot of one job's bookkeeping, mainly for monitoring and tests.
#[derive(Debug, Clone)]
pub struct JobInfo {
    pub device: DeviceHandle,
    pub status: JobStatus,
    /// Position in the device's submission order (0-based).
    pub submit_seq: u64,
    /// Global stamp assigned when the job reached a worker-side terminal
    /// state; `None` while pending or when cancelled from the queue.
    pub finish_seq: Option<u64>,
}

struct JobRecord {
    device: usize,
    shots: u64,
    seed: u64,
    payload: String,
    status: JobStatus,
    result: Option<Histogram>,
    error: Option<String>,
    submit_seq: u64,
    finish_seq: Option<u64>,
}

struct SessionState {
    jobs: Vec<u64>,
}

struct DeviceEntry {
    descriptor: DeviceDescriptor,
    calibrations: RwLock<CalibrationRegistry>,
    sender: Mutex<Option<mpsc::Sender<u64>>>,
    submit_counter: AtomicU64,
}

struct DriverInner {
    devices: Vec<DeviceEntry>,
    sessions: Mutex<HashMap<u64, SessionState>>,
    jobs: Mutex<HashMap<u64, JobRecord>>,
    jobs_changed: Condvar,
    next_handle: AtomicU64,
    finish_counter: AtomicU64,
}

/// In-process driver mediating between clients and registered devices.
pub struct Driver {
    inner: Arc<DriverInner>,
    workers: Vec<JoinHandle<()>>,
}

impl Driver {
    /// Build a driver over the given devices. Device default calibrations
    /// are seeded with the built-in rules, then the descriptor's entries.
    pub fn with_devices(descriptors: Vec<DeviceDescriptor>) -> Result<Self, DriverError> {
        let mut devices = Vec::new();
        for descriptor in descriptors {
            descriptor.validate()?;
            let mut calibrations = builtin_calibrations(&descriptor);
            calibrations
                .absorb(descriptor.default_calibrations.clone())
                .map_err(|e| DriverError::InvalidCalibration(e.to_string()))?;
            devices.push(DeviceEntry {
                descriptor,
                calibrations: RwLock::new(calibrations),
                sender: Mutex::new(None),
                submit_counter: AtomicU64::new(0),
            });
        }
        let inner = Arc::new(DriverInner {
            devices,
            sessions: Mutex::new(HashMap::new()),
            jobs: Mutex::new(HashMap::new()),
            jobs_changed: Condvar::new(),
            next_handle: AtomicU64::new(1),
            finish_counter: AtomicU64::new(0),
        });
        let mut workers = Vec::new();
        for index in 0..inner.devices.len() {
            let (sender, receiver) = mpsc::channel::<u64>();
            *inner.devices[index].sender.lock().unwrap() = Some(sender);
            let inner = Arc::clone(&inner);
            workers.push(std::thread::spawn(move || {
                while let Ok(job_id) = receiver.recv() {
                    run_job(&inner, index, job_id);
                }
            }));
        }
        Ok(Driver { inner, workers })
    }

    /// Load descriptors from the `PULSESTACK_DEVICES` environment variable
    /// (platform path-separator-joined list of JSON descriptor files).
    pub fn from_env() -> Result<Self, DriverError> {
        match std::env::var_os("PULSESTACK_DEVICES") {
            Some(paths) => Self::from_descriptor_paths(std::env::split_paths(&paths)),
            None => Self::with_devices(Vec::new()),
        }
    }

    pub fn from_descriptor_paths(
        paths: impl IntoIterator<Item = impl AsRef<std::path::Path>>,
    ) -> Result<Self, DriverError> {
        let mut descriptors = Vec::new();
        for path in paths {
            let path = path.as_ref();
            let text = std::fs::read_to_string(path).map_err(|e| DriverError::DescriptorFile {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let descriptor =
                DeviceDescriptor::from_json(&text).map_err(|e| DriverError::DescriptorFile {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            descriptors.push(descriptor);
        }
        Self::with_devices(descriptors)
    }

    /// Open a session. The session sees every registered device.
    pub fn open_session(&self) -> SessionHandle {
        let handle = self.inner.next_handle.fetch_add(1, Ordering::Relaxed);
        self.inner
            .sessions
            .lock()
            .unwrap()
            .insert(handle, SessionState { jobs: Vec::new() });
        SessionHandle(handle)
    }

    /// Invalidate a session and cancel its queued jobs.
    pub fn close_session(&self, session: SessionHandle) -> Result<(), DriverError> {
        let state = self
            .inner
            .sessions
            .lock()
            .unwrap()
            .remove(&session.0)
            .ok_or(DriverError::StaleHandle)?;
        let mut jobs = self.inner.jobs.lock().unwrap();
        for job_id in state.jobs {
            if let Some(record) = jobs.get_mut(&job_id) {
                if record.status == JobStatus::Queued {
                    record.status = JobStatus::Cancelled;
                }
            }
        }
        self.inner.jobs_changed.notify_all();
        Ok(())
    }

    /// Registered devices in registration order.
    pub fn list_devices(
        &self,
        session: SessionHandle,
    ) -> Result<Vec<(DeviceHandle, String)>, DriverError> {
        self.check_session(session)?;
        Ok(self
            .inner
            .devices
            .iter()
            .enumerate()
            .map(|(index, entry)| (DeviceHandle(index as u64), entry.descriptor.name.clone()))
            .collect())
    }

    /// Resolve a device by name.
    pub fn device_by_name(&self, name: &str) -> Option<DeviceHandle> {
        self.inner
            .devices
            .iter()
            .position(|entry| entry.descriptor.name == name)
            .map(|index| DeviceHandle(index as u64))
    }

    pub fn descriptor(&self, device: DeviceHandle) -> Result<&DeviceDescriptor, DriverError> {
        Ok(&self.device_entry(device)?.descriptor)
    }

    /// Query one typed property of a device, site, port, or operation.
    pub fn query(
        &self,
        device: DeviceHandle,
        scope: &QueryScope,
        key: PropertyKey,
    ) -> Result<PropertyValue, DriverError> {
        let entry = self.device_entry(device)?;
        query::query(
            &entry.descriptor,
            &entry.calibrations.read().unwrap(),
            scope,
            key,
        )
    }

    /// Resolve the default calibration for a gate on specific sites.
    pub fn get_default_calibration(
        &self,
        device: DeviceHandle,
        gate_name: &str,
        sites: &[SiteId],
    ) -> Result<CalibrationEntry, DriverError> {
        let entry = self.device_entry(device)?;
        if entry.descriptor.pulse_support == PulseSupport::None {
            return Err(DriverError::NotSupported);
        }
        entry
            .calibrations
            .read()
            .unwrap()
            .lookup(gate_name, sites)
            .cloned()
            .ok_or_else(|| DriverError::MissingCalibration {
                gate_name: gate_name.to_string(),
                sites: sites.to_vec(),
            })
    }

    /// Install a default calibration, replacing any entry with the same
    /// gate and site selector; the replaced entry is returned.
    pub fn set_default_calibration(
        &self,
        device: DeviceHandle,
        entry: CalibrationEntry,
    ) -> Result<Option<CalibrationEntry>, DriverError> {
        let device_entry = self.device_entry(device)?;
        if device_entry.descriptor.pulse_support == PulseSupport::None {
            return Err(DriverError::NotSupported);
        }
        validate_entry_roles(&entry, &device_entry.descriptor)
            .map_err(|e| DriverError::InvalidCalibration(e.to_string()))?;
        device_entry
            .calibrations
            .write()
            .unwrap()
            .register(entry)
            .map_err(|e| DriverError::InvalidCalibration(e.to_string()))
    }

    /// A copy of the device's effective calibration registry.
    pub fn calibrations(&self, device: DeviceHandle) -> Result<CalibrationRegistry, DriverError> {
        Ok(self
            .device_entry(device)?
            .calibrations
            .read()
            .unwrap()
            .clone())
    }

    /// Submit a pulse payload. The payload must parse and validate; the
    /// job is queued and executed asynchronously, FIFO per device.
    pub fn submit_job(
        &self,
        session: SessionHandle,
        device: DeviceHandle,
        format: JobFormat,
        payload: &str,
        shots: u64,
        seed: u64,
    ) -> Result<JobHandle, DriverError> {
        self.check_session(session)?;
        let entry = self.device_entry(device)?;
        if !entry.descriptor.supports_format(format) {
            return Err(DriverError::FormatUnsupported(format));
        }
        if shots == 0 {
            return Err(DriverError::InvalidShots);
        }
        let parsed = pqir::parse(payload).map_err(|e| {
            let mut diagnostics = Diagnostics::new();
            diagnostics.push(Diagnostic::error(None, e.to_string()));
            DriverError::PayloadInvalid { diagnostics }
        })?;
        let profile = pqir::validate_profile(&parsed.module);
        if profile.has_errors() {
            return Err(DriverError::PayloadInvalid {
                diagnostics: profile,
            });
        }

        let job_id = self.inner.next_handle.fetch_add(1, Ordering::Relaxed);
        let device_index = device.0 as usize;
        {
            // Serialize submissions per device so the queue order matches
            // the submit_seq stamps.
            let sender_slot = entry.sender.lock().unwrap();
            let sender = sender_slot.as_ref().ok_or(DriverError::ShuttingDown)?;
            let submit_seq = entry.submit_counter.fetch_add(1, Ordering::Relaxed);
            let record = JobRecord {
                device: device_index,
                shots,
                seed,
                payload: payload.to_string(),
                status: JobStatus::Queued,
                result: None,
                error: None,
                submit_seq,
                finish_seq: None,
            };
            let mut jobs = self.inner.jobs.lock().unwrap();
            jobs.insert(job_id, record);
            let mut sessions = self.inner.sessions.lock().unwrap();
            sessions
                .get_mut(&session.0)
                .expect("session checked above")
                .jobs
                .push(job_id);
            drop(sessions);
            drop(jobs);
            sender.send(job_id).map_err(|_| DriverError::ShuttingDown)?;
        }
        Ok(JobHandle(job_id))
    }

    pub fn job_status(&self, job: JobHandle) -> Result<JobStatus, DriverError> {
        let jobs = self.inner.jobs.lock().unwrap();
        jobs.get(&job.0)
            .map(|record| record.status)
            .ok_or(DriverError::StaleHandle)
    }

    pub fn job_info(&self, job: JobHandle) -> Result<JobInfo, DriverError> {
        let jobs = self.inner.jobs.lock().unwrap();
        let record = jobs.get(&job.0).ok_or(DriverError::StaleHandle)?;
        Ok(JobInfo {
            device: DeviceHandle(record.device as u64),
            status: record.status,
            submit_seq: record.submit_seq,
            finish_seq: record.finish_seq,
        })
    }

    /// Block until the job reaches a terminal state; return its histogram
    /// or the failure reason.
    pub fn job_result(&self, job: JobHandle) -> Result<Histogram, DriverError> {
        let mut jobs = self.inner.jobs.lock().unwrap();
        loop {
            let record = jobs.get(&job.0).ok_or(DriverError::StaleHandle)?;
            match record.status {
                JobStatus::Done => return Ok(record.result.clone().expect("done implies result")),
                JobStatus::Failed => {
                    return Err(DriverError::JobFailed(
                        record.error.clone().unwrap_or_else(|| "job failed".into()),
                    ))
                }
                JobStatus::Cancelled => return Err(DriverError::JobCancelled),
                JobStatus::Queued | JobStatus::Running => {
                    jobs = self.inner.jobs_changed.wait(jobs).unwrap();
                }
            }
        }
    }

    /// Cancel a queued job. Running or terminal jobs are left untouched.
    pub fn job_cancel(&self, job: JobHandle) -> Result<(), DriverError> {
        let mut jobs = self.inner.jobs.lock().unwrap();
        let record = jobs.get_mut(&job.0).ok_or(DriverError::StaleHandle)?;
        if record.status == JobStatus::Queued {
            record.status = JobStatus::Cancelled;
            self.inner.jobs_changed.notify_all();
        }
        Ok(())
    }

    fn check_session(&self, session: SessionHandle) -> Result<(), DriverError> {
        if self.inner.sessions.lock().unwrap().contains_key(&session.0) {
            Ok(())
        } else {
            Err(DriverError::StaleHandle)
        }
    }

    fn device_entry(&self, device: DeviceHandle) -> Result<&DeviceEntry, DriverError> {
        self.inner
            .devices
            .get(device.0 as usize)
            .ok_or(DriverError::UnknownDevice)
    }
}

impl Drop for Driver {
    fn drop(&mut self) {
        for entry in &self.inner.devices {
            entry.sender.lock().unwrap().take();
        }
        for worker in self.workers.drain(..) {
            let _ = worker.join();
        }
    }
}

/// Worker-side execution of one job on a simulated device.
fn run_job(inner: &DriverInner, device_index: usize, job_id: u64) {
    let (payload, shots, seed) = {
        let mut jobs = inner.jobs.lock().unwrap();
        let Some(record) = jobs.get_mut(&job_id) else {
            return;
        };
        if record.status == JobStatus::Cancelled {
            return;
        }
        debug_assert!(record.status.can_transition_to(JobStatus::Running));
        record.status = JobStatus::Running;
        inner.jobs_changed.notify_all();
        (record.payload.clone(), record.shots, record.seed)
    };

    let descriptor = &inner.devices[device_index].descriptor;
    let outcome = execute_payload(descriptor, &payload, shots, seed);

    let mut jobs = inner.jobs.lock().unwrap();
    if let Some(record) = jobs.get_mut(&job_id) {
        record.finish_seq = Some(inner.finish_counter.fetch_add(1, Ordering::Relaxed));
        match outcome {
            Ok(histogram) => {
                debug_assert!(record.status.can_transition_to(JobStatus::Done));
                record.status = JobStatus::Done;
                record.result = Some(histogram);
            }
            Err(message) => {
                debug_assert!(record.status.can_transition_to(JobStatus::Failed));
                record.status = JobStatus::Failed;
                record.error = Some(message);
            }
        }
    }
    inner.jobs_changed.notify_all();
}

/// Parse, bind, time, legalize, and simulate a payload on one device.
fn execute_payload(
    descriptor: &DeviceDescriptor,
    payload: &str,
    shots: u64,
    seed: u64,
) -> Result<Histogram, String> {
    let parsed = pqir::parse(payload).map_err(|e| format!("payload parse error: {e}"))?;
    let module = parsed.module;
    let profile = pqir::validate_profile(&module);
    if profile.has_errors() {
        return Err(format!("payload profile errors:\n{profile}"));
    }
    let schedule = module
        .bind_to_device(descriptor)
        .map_err(|e| format!("payload does not fit device: {e}"))?;
    let timed = resolve_timing(&schedule);
    let (timed, diagnostics) = legalize(&timed, descriptor, LegalizeMode::Strict);
    if diagnostics.has_errors() {
        return Err(format!("schedule fails device constraints:\n{diagnostics}"));
    }
    let backend = SimBackend::for_device(descriptor)
        .map_err(|e| format!("device has no execution engine: {e}"))?;
    let histogram = backend
        .execute(&timed, shots, seed)
        .map_err(|e| format!("execution failed: {e}"))?;
    let width = (module.attributes.required_num_results as usize).max(1);
    Ok(histogram.widened(width))
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("stale or unknown handle")]
    StaleHandle,
    #[error("unknown device handle")]
    UnknownDevice,
    #[error("operation not supported by this device")]
    NotSupported,
    #[error("invalid query scope: {0}")]
    InvalidScope(String),
    #[error("device does not accept format {0}")]
    FormatUnsupported(JobFormat),
    #[error("payload rejected:\n{diagnostics}")]
    PayloadInvalid { diagnostics: Diagnostics },
    #[error("shots must be positive")]
    InvalidShots,
    #[error("no calibration for {gate_name} on sites {sites:?}")]
    MissingCalibration {
        gate_name: String,
        sites: Vec<SiteId>,
    },
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("job failed: {0}")]
    JobFailed(String),
    #[error("job was cancelled")]
    JobCancelled,
    #[error("driver is shutting down")]
    ShuttingDown,
    #[error("descriptor {path}: {message}")]
    DescriptorFile { path: String, message: String },
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
}
