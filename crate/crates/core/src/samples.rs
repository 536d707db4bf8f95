//! Bundled toy inputs.

use crate::error::Result;
use crate::reduction::{DtmSpec, TransducerMachine};

pub const BISIMILAR_MACHINE: &str = include_str!("../data/bisimilar.machine");
pub const NON_BISIMILAR_MACHINE: &str = include_str!("../data/non_bisimilar.machine");
pub const TOY_DTM: &str = include_str!("../data/toy.dtm");
pub const TOY_DTM_REJECTING: &str = include_str!("../data/toy_reject.dtm");

/// `ℓ = 2`; the run `11 → 00` ends in `0^ℓ`.
pub fn bisimilar_machine() -> Result<TransducerMachine> {
    TransducerMachine::parse(BISIMILAR_MACHINE)
}

/// `ℓ = 2`; `11` is already a dead end.
pub fn non_bisimilar_machine() -> Result<TransducerMachine> {
    TransducerMachine::parse(NON_BISIMILAR_MACHINE)
}

/// Two working states on two cells; accepts after four steps.
pub fn toy_dtm() -> Result<DtmSpec> {
    DtmSpec::parse(TOY_DTM)
}

/// Like [`toy_dtm`] but ends in the rejecting state.
pub fn toy_dtm_rejecting() -> Result<DtmSpec> {
    DtmSpec::parse(TOY_DTM_REJECTING)
}
