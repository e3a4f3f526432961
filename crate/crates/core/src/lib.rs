//! Numerical workbench for almost complex structures on homogeneous spaces.
//!
//! The crate covers Lie algebras and Samelson structures ([`lie_core`]),
//! harmonic analysis on U(1), SU(2) and SU(3) ([`group_harmonics`]),
//! chart-based tensor calculus on S², tori and S⁶ ([`tensor_geometry`]),
//! Higgs-type energy functionals and their minimization ([`energy_theory`])
//! and fiber-collapse reductions ([`bundle_reduction`]).

pub mod lie_core;
pub mod quadrature;
pub mod group_harmonics;
pub mod tensor_geometry;
pub mod energy_theory;
pub mod io;
pub mod bundle_reduction;
