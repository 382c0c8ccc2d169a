//! A toolkit for deriving labeled clustering benchmarks by transforming
//! datasets in ways that provably preserve their reference clustering.
//!
//! The crate provides four layers:
//!
//! * **Clustering** — k-means cost and Lloyd's algorithm with deterministic
//!   multi-restart ([`kmeans`]), an exhaustive small-instance oracle,
//!   bisectional auto-k-means, k-single-link ([`single_link`]), and the
//!   k-means-with-MST-merge pipeline for concave clusters ([`kmlmst`]).
//! * **Transforms** — centric (in-cluster contraction), radius
//!   equalization, radial separation, rigid per-cluster motions, and the
//!   semi-centric transform for single-link clusters ([`transforms`],
//!   [`single_link`]).
//! * **Checkers** — classification of a (before, after) dataset pair
//!   against the consistency axioms: Γ-compliance, sampled violation
//!   percentages, gravitational and convergent consistency
//!   ([`consistency`]).
//! * **Experiments** — reproducible end-to-end pipelines emitting JSON or
//!   text-table reports ([`experiment`]), plus plain-text dataset I/O
//!   ([`io`]) and synthetic generators ([`synth`]).
//!
//! Everything randomized takes an explicit 64-bit seed and is
//! bit-reproducible; parallel restarts reduce deterministically.

pub mod bisect;
pub mod consistency;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod kmeans;
pub mod kmlmst;
pub mod partition;
pub mod rng;
pub mod single_link;
pub mod synth;
pub mod transforms;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use partition::{disagreement_count, select_central_cluster, PairClass, Partition};
