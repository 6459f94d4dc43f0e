//! Absolute numerical tolerances shared across the crate.

pub const NORM: f64 = 1e-10;
pub const HERM: f64 = 1e-10;
pub const TRACE: f64 = 1e-10;
pub const PROJ: f64 = 1e-9;
pub const ORTHO: f64 = 1e-9;
pub const RECON: f64 = 1e-9;
pub const PSD: f64 = 1e-9;
pub const STAB: f64 = 1e-9;
pub const CPTP: f64 = 1e-9;

/// Amplitude vectors loaded from configuration are renormalized silently
/// below this deviation and with a warning above it.
pub const LOAD_NORM_WARN: f64 = 1e-6;
