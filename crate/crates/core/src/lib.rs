//! Batch evaluation platform for LLM-completed Verilog.
//!
//! The crate covers the full loop: preparing a training corpus from repo
//! trees and book dumps (filter, near-duplicate removal, block extraction,
//! sliding windows), a registry of benchmark problems with tiered prompts,
//! pluggable completion providers, Verilog-aware post-processing of raw
//! completions, a compile-and-simulate harness driving an external
//! toolchain, and pass-rate scoring over the recorded sweep.

pub mod corpus;
pub mod generation;
pub mod harness;
pub mod postprocess;
pub mod problems;
pub mod scoring;
