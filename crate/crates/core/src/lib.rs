//! Spatiotemporal self-exciting (Hawkes) point process toolkit.
//!
//! The crate covers the whole analysis pipeline for a catalog of point events
//! `(x, y, t)`:
//!
//! * [`catalog`]: ingestion, projection, duplicate merging and holiday filtering.
//! * [`background`]: separable Epanechnikov kernel estimate of the endemic intensity.
//! * [`hawkes`]: conditional intensity, log-likelihood and gradient, per-event
//!   decomposition, triggered-event classification and grid prediction.
//! * [`inference`]: priors, Hamiltonian Monte Carlo (fixed path or NUTS), convergence diagnostics.
//! * [`simulate`]: ground-truth generators (branching construction and Ogata thinning).
//! * [`stattests`]: Knox permutation test and the space-time K-function ratio.
//!
//! Units are kilometres and days throughout.

pub mod background;
pub mod catalog;
pub mod config;
mod error;
pub mod hawkes;
pub mod inference;
pub mod rng;
pub mod simulate;
pub mod stattests;

pub use background::BackgroundModel;
pub use catalog::{Event, EventCatalog, FilterReport, Region};
pub use error::{Error, ErrorKind, Result};
pub use hawkes::{HawkesParams, IntensityDecomposition};
