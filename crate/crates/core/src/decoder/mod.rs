//! Fault enumeration, syndrome-graph construction, and matching decoders.

pub mod decode;
pub mod faults;
pub mod graph;
pub mod matching;

pub use decode::{decode, decode_brute_force, DecodeResult, Decoder};
pub use faults::{enumerate_faults, Fault, FaultCatalog};
pub use graph::{build_syndrome_graph, Edge, EdgeKind, SyndromeGraph};
