//! EEG artifact removal with filters synthesized from noise and signal spectra.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cli;
pub mod data;
pub mod metrics;
pub mod model;
pub mod tensor;
pub mod training;
