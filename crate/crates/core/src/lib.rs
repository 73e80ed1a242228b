//! Numerical nonlinear potential theory: truncated Wolff, Riesz, Bessel and
//! fractional-maximal potentials of Radon measures, the exponential-reaction
//! Wolff integral equation, and Orlicz capacity estimates.

pub mod bessel;
pub mod capacity;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod lab;
pub mod measure;
pub mod nonlinearity;
pub mod quad;
pub mod solver;
pub mod special;

pub use bessel::{bessel_potential, BesselKernel};
pub use capacity::{
    capacity_upper, necessary_condition_ratio, CapacityEstimate, CapacityOptions, KernelKind,
};
pub use error::{Error, Result};
pub use geometry::{AxisBox, Ball, CompactSet, Point};
pub use grid::{GridSpec, ScalarField};
pub use kernels::{
    frac_maximal, frac_maximal_sup_norm, grid_eval, h_eta, riesz, wolff, PotentialOp,
    PotentialParams,
};
pub use lab::{
    composition_bound, exp_integrability, sandwich, CompositionReport, CompositionVariant,
    SandwichReport, SandwichVariant,
};
pub use measure::{Component, GridRule, MassProfile, Measure};
pub use nonlinearity::{h_l, ExpNonlinearity, OrliczPair};
pub use solver::{
    apriori_bound, constants, lift_measures, pde_surrogate_bound, picard_solve, smallness_check,
    DivergenceKind, IterationConstants, LiftedMeasures, ProblemSpec, SmallnessReport, SolveReport,
    StructuralConstants, SurrogateEnvelopes, SurrogateKind, SurrogateOptions,
};
