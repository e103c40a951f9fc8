//! Turns per-modality document element extractions into hierarchical
//! metaknowledge.
//!
//! The pipeline reconciles OCR text against the text modality
//! ([`text_metrics`]), fuses the two modalities' class predictions with a
//! learned decision matrix ([`fusion`]), organizes the fused elements into a
//! Document Structure Tree ([`dst`]) and emits a metaknowledge graph with
//! contextual triples and a reference network ([`metagraph`]). [`harness`]
//! generates synthetic corpora and scores predictions with micro-F1.

pub mod bio;
pub mod diag;
pub mod dst;
pub mod error;
pub mod fusion;
pub mod harness;
pub mod ingest;
pub mod metagraph;
pub mod model;
pub mod pipeline;
pub mod segment;
pub mod text_metrics;

pub use error::{Error, ErrorKind, Result};
pub use model::{DetectionVector, DocumentRecord, Element, ElementClass, Modality, SentenceCoord};
