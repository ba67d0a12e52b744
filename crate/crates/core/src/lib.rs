//! Core library for extracting competing linguistic-variant time series from
//! n-gram count files and fitting a critically damped attention-fading model
//! to each variant pair.
//!
//! The pipeline has four stages, one module each:
//!
//! 1. [`lexicon`] — verb inventories and their imperfect-subjunctive surface
//!    forms (five `-ra` and five `-se` conjugations per verb).
//! 2. [`ingest`] — streaming n-gram aggregation into per-verb yearly variant
//!    counts, inclusion filtering, and `-se` fraction series.
//! 3. [`dynamics`] — the discrete norm-change recursion, its continuum limit
//!    (an exponentially fading attention forcing), and the equivalent
//!    critically damped two-dimensional linear system. Runtime-selectable
//!    simulators live in [`simulate`].
//! 4. [`fit`] / [`stats`] — per-verb least-squares fits with a shared global
//!    attention amplitude, bootstrap uncertainty, and the downstream
//!    regression analyses (Pearson/permutation, Deming, power law, Zipf).

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod ingest;
pub mod lexicon;
pub mod optim;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
