//! Accessible quantum coherence of multipartite bosonic states under uniform
//! acceleration.
//!
//! An accelerated observer sees each Minkowski mode split across two causally
//! disconnected Rindler wedges; tracing out the inaccessible wedge turns pure
//! multipartite states into mixed ones and degrades their l1-norm coherence
//! toward a finite floor. This crate computes that accessible coherence two
//! independent ways:
//!
//! * a numeric pipeline — truncated two-mode expansions over a sparse Fock
//!   registry ([`registry`], [`rindler`], [`states`]), a hidden-label-grouped
//!   partial trace ([`density`]), and entrywise l1 measures ([`coherence`]);
//! * closed forms built on the polylogarithm kernel
//!   `Li_{-1/2}(tanh^2 r) / (sinh^2 r cosh r)` ([`analytic`]).
//!
//! The two routes agree within exactly-tracked truncation tails; [`sweep`]
//! drives grids of scenarios through either or both and writes plot-ready
//! CSV.
//!
//! Data-parallel inner loops (partial-trace assembly, sweep grids) run on
//! rayon when the default `parallel` feature is enabled and fall back to
//! sequential loops without it; both paths produce bit-identical output.

pub mod analytic;
pub mod coherence;
pub mod density;
pub mod error;
pub mod registry;
pub mod rindler;
pub mod states;
pub mod sum;
pub mod sweep;

pub use analytic::{
    closed_form, ghz_coherence, ghz_n_coherence, kernel_f, normalized_coherence, polylog_neg_half,
    separable_coherence, star_coherence, w_coherence, w_n_coherence, wwbar_coherence,
    CoherenceTriple, StarScenario, WPattern,
};
pub use coherence::{evaluate_numeric, l1_global, l1_local, l1_total, CoherenceReport};
pub use density::{
    decohere, marginal_product, reduce, reduce_seq, trace_out_parties, DensityMatrix,
};
pub use error::{Error, Result};
pub use registry::{Mode, ModeRegistry, ModeRole, OccupationLabel, PureState};
pub use rindler::{
    r_from_omega, rindler_one_particle, rindler_vacuum, tail_bound, AccelerationSpec, Expansion,
    TruncationPolicy, N_MAX_CAP,
};
pub use states::{build, party_subsystems, BuiltState, StateFamily, StateSpec};
