//! Reduction from transducer machines to bisimilarity of pushdown systems,
//! with a front end encoding space-bounded Turing machines.

mod build;
mod dtm;
mod inc;
mod machine;

pub use build::{build_reduction, word_pair, word_state, Basic, Construction, ReductionInstance};
pub use dtm::{encode_dtm, DtmConfig, DtmEncoding, DtmHalt, DtmRun, DtmSpec, Move, MAX_DTM_ELL};
pub use inc::make_inc_transducers;
pub use machine::{
    bits_to_string, check_zero_dead_end, simulate_machine, stateless_machine, MachineRun, RunStatus,
    TransducerMachine, MAX_ENUMERATION_ELL,
};
