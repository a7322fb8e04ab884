//! State families, exponent fits along size ladders, and the classification
//! table comparing all measures on four photonic families.

pub mod family;
pub mod fit;
pub mod table;

pub use family::{
    evaluate, family_state, index_p_modified, sweep, validate_ladder, with_threads, FamilyId, FamilyState,
    MeasureParams, SpinImage, SpinRule, StateFamily, SweepPoint, SweepReport,
};
pub use fit::{fit_exponent, ScalingFit};
pub use table::{classify, table1, SizeClass, Table1Cell, Table1Params, Table1Report};
