//! Core library for an early-career rising-star prediction pipeline:
//! bibliographic ingestion, venue tiering, text preprocessing, LDA topic
//! profiles, co-authorship network measures, diversity and performance
//! features, labeling, and a classifier suite with temporal cross-validation.

pub mod config;
pub mod corpus;
pub mod features;
pub mod learn;
pub mod network;
pub mod pipeline;
pub mod seeds;
pub mod synth;
pub mod textprep;
pub mod topics;
