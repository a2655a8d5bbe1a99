//! Command-line driver and HTTP service over `geopriv-core`.

pub mod app;
pub mod service;
pub mod suites;
pub mod views;

pub use app::run;
