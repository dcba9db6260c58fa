//! Critical points at infinity for charged and gravitational `N`-body problems.
//!
//! The crate works on the translation-reduced phase space in Albouy
//! coordinates and provides the integrals, Lagrange residuals, cluster
//! decompositions, constructed critical sequences with their classifier, the
//! two-body reduction and the bifurcation values of the integral map of
//! three-body systems.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

// `!(x > 0)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clusters;
pub mod error;
pub mod integrals;
pub mod io;
pub mod linalg;
pub mod potential;
pub mod relative_equilibria;
pub mod scalar;
pub mod sequences;
pub mod state;
pub mod trend;

pub use clusters::{
    additivity_report, cluster_criticality, decompose, detect_clusters, ClusterDecomposition, ClusterPartition,
};
pub use error::{Error, Result};
pub use integrals::{
    best_multiplier, bifurcation_parameter, lagrange_residual, reduced_integral_map, to_multiplier_coordinates,
    IntegralValues, Multiplier, MultiplierFrame, Residual,
};
pub use potential::{dilate, grad_potential, homogeneity_degree_check, potential, HomogeneousKernel, PairCoefficients, PairPotential};
pub use relative_equilibria::{
    bifurcation_values, effective_potential, embed_re, reduce_two_body, solve_relative_equilibrium, BifurcationValue,
    RelativeEquilibrium, Spectator, TwoBodyReduction,
};
pub use scalar::Scalar;
pub use sequences::{
    classify, diagnose, generate_horizontal, generate_planar, generate_re_with_spectator, generate_shrinking,
    generate_shrinking_pair, verify_k_critical, verify_small_sequence, Classification, Schedule, SequenceDiagnostics,
    ShrinkSchedule, StateSequence, Verdict,
};
pub use state::{
    iz_kz, mass_inner, observables, rotate, to_albouy, AlbouyState, BodySystem, CartesianState, DnVector, Interaction,
    Observables,
};

pub use trend::{fit_trend, Trend, TrendOptions};

pub type State = AlbouyState<f64>;
pub type System = BodySystem<f64>;
pub type Cartesian = CartesianState<f64>;
pub type Potential = PairPotential<f64>;
pub type Kernel = HomogeneousKernel<f64>;
