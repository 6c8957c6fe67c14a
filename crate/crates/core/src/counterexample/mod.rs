//! A right-invertible map on `ℤ_p` that neither shadows nor is stable, built
//! from the even shift through a Cantor chart.

mod chart;
mod subshift;
mod thm2;
mod witness;

pub use chart::{build_cantor_chart, CantorChart, SplitRule};
pub use subshift::{build_even_subshift, build_full_shift, SubshiftApprox, SubshiftKind, Word};
pub use thm2::{
    build_thm2_map, covering_count, local_variation, obstruction_scan, transported_shift, CoveringCount,
    ObstructionReport,
};
pub use witness::{
    demonstrate_non_shadowing, lift_orbit, run_splice_pipeline, smallest_splice, splice_points, LiftedCheck,
    SpliceOutcome, Thm2System,
};
