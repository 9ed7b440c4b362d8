//! Numerical calculus for vector-bundle-valued multisymplectic geometry.
//!
//! The crate evaluates, at machine precision, the operator tower of covariant
//! exterior calculus on bundle-valued forms, Lie algebroid calculus with
//! algebroid connections, momentum-section defect checkers, and flow-based
//! verification of two reduction constructions — together with a catalog of
//! built-in models on which every identity is exercised.
//!
//! Layering, bottom to top:
//!
//! * [`jet`] / [`expr`] — order-2 jets and the smooth-function DSL;
//! * [`multi_index`] — antisymmetric index bookkeeping;
//! * [`geometry`] — charts, vector fields, metrics, connections;
//! * [`form`] — E-valued forms and the covariant exterior calculus;
//! * [`algebroid`] — Lie algebroids, mixed-bidegree forms, their operators;
//! * [`plectic`] — plectic structures, pointwise Hamilton-type solves,
//!   bracket and momentum-section checkers;
//! * [`reduction`] — flows, orbit sampling, zero sets, reduced-structure
//!   verification;
//! * [`catalog`] — built-in models and the JSON model format;
//! * [`report`] / [`suites`] — residual reports and the named check suites.

pub mod algebroid;
pub mod catalog;
pub mod expr;
pub mod form;
pub mod geometry;
pub mod jet;
pub mod multi_index;
pub mod plectic;
pub mod reduction;
pub mod report;
pub mod sample;
pub mod suites;
