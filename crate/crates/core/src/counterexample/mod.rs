//! Non-uniqueness construction for a non-Osgood modulus.
//!
//! A solution `u` of `Łu + b·∇u + cu = 0` on `[0, 1] × ℝ²` that is nonzero
//! near `t = 0` and vanishes to infinite order at `t = 1`. Time is split
//! into bands `[t_n, t_{n+1}]` accumulating at 1; each band hands the mode
//! `cos(k_n x1)` to `cos(k_{n+1} x1)` through an `x2` mode, and the handoff
//! forces the coefficient `l` of `∂_{x2}^{2m}` to oscillate.

mod conditions;
mod cutoffs;
mod field;
mod plan;
mod regularity;

pub use conditions::{check_conditions, ConditionEntry, ConditionReport, PROBE_EXPONENTS, TREND_WINDOW};
pub use cutoffs::{build_cutoffs, Cutoff, CutoffSet};
pub use field::{
    CounterexampleField, FieldValue, Gauge, Location, LowerOrder, SignVariant, REPRESENTABLE_LOG10,
};
pub use plan::{auto_k0, build_sequences, K0Choice, SequencePlan, K0_SEARCH_LIMIT};
pub use regularity::{
    coefficient_bounds, flatness, probe_bands, regularity_report, sharpness, CoefficientBounds, Flatness,
    FlatnessRow, QuantityTrend, RegularityConfig, RegularityReport, Sharpness, SharpnessLevel, QUANTITIES,
};
