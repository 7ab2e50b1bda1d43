//! Exact symbolic engine for theta-formalism computations on Dubrovin-Zhang
//! hierarchies: differential polynomials, local functionals, Miura
//! transformations, CohFT correlator tables and jet reconstruction.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod algebra;
pub mod bihamiltonian;
pub mod cohft;
pub mod functionals;
pub mod hierarchy;
pub mod jetform;
pub mod linalg;
pub mod report;
pub mod tautorel;
pub mod transform;

pub use algebra::{q, qr, AlgebraError, Ctx, DiffExpr, Grade, GradeSignature, Jet, Monomial, Parity, VarId, Q};
