//! Integer resonance relations among characteristic frequencies, the
//! second- and third-order partitions of the frequency index set, and the
//! sampled microhyperbolicity / ellipticity / spectral-gap checkers.

mod conditions;
mod relations;

pub use conditions::{
    check_gap_condition, check_microhyp_constant, check_microhyp_general, ConditionId,
    ConditionReport, GeneralBudgets, MicrohypVariant, Witness,
};
pub use relations::{
    enumerate_resonances, partition_second_order, partition_third_order, ResonancePartition,
    ResonanceRelation,
};
