//! Satisficing classical planning over SAS+ tasks: lazy greedy best-first
//! search with h^FF, landmark counting, bounded novelty and alternation open
//! lists, plus a benchmark harness.

pub mod bench;
pub mod config;
pub mod heuristics;
pub mod landmarks;
pub mod novelty;
pub mod open_list;
pub mod sas;
pub mod search;

pub use config::{Config, UnknownConfig};
pub use sas::{parse_sas, ParseError, Task};
pub use search::{lazy_gbfs, Outcome, SearchLimits, SearchOptions, SearchResult, Statistics};
