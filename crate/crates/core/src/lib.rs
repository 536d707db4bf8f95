//! Bisimilarity of pushdown systems: gadgets, counters, and the reduction
//! from transducer machines, together with capped bisimulation checking.

pub mod bisim;
pub mod counters;
pub mod dfa;
pub mod error;
pub mod explore;
pub mod lts;
pub mod macro_text;
pub mod macros;
pub mod pda_text;
pub mod reduction;
pub mod regex;
pub mod samples;
pub mod transducer;

pub use error::{Error, Result};
