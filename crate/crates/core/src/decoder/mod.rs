//! Detector error model construction and minimum-weight matching decoding.

pub mod blossom;
pub mod dem;
pub mod matching;

pub use dem::{build_dem, DemEntry, DetectorErrorModel, ElementaryQubit, ErasureAtom};
pub use matching::{
    brute_force_match, decode, dem_to_matching, Correction, MatchingGraph, Syndrome,
};
