//! Finite-dimensional algebra and lattice-scale analysis for elliptic
//! integrable systems attached to k'-symmetric spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`liealg`]: real Lie algebras by structure constants.
//! * [`autodecomp`]: finite-order automorphisms, eigenspace decompositions,
//!   system classification and the underdetermined lift.
//! * [`homogeo`]: invariant connections, f-structures, Nijenhuis tensors,
//!   characteristic torsion and Wess-Zumino forms at the origin of `G/G₀`.
//! * [`isomtwist`]: finite-order special-orthogonal isometries.
//! * [`loopsys`]: twisted loop algebra data and the coefficient equations.
//! * [`lattice`]: finite-difference residuals, integration and relaxation.
//! * [`fixtures`]: built-in `su(2)`/`su(3)` test algebras.

pub mod autodecomp;
pub mod fixtures;
pub mod homogeo;
pub mod isomtwist;
pub mod lattice;
pub mod liealg;
pub mod linalg;
pub mod loopsys;
