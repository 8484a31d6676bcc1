//! The mod-l motivic Steenrod algebra over a base with coefficient ring
//! `F_2[t, r]` at the prime 2 and `F_l` at odd primes.

pub mod algebra;
pub mod bmu;
pub mod chern;
pub mod classical;
pub mod coeff;
pub mod dual;
pub mod error;
pub mod milnor;
pub mod parse;
pub mod verify;

pub use algebra::{Gen, Letter, Monomial, SteenrodAlgebra, SteenrodElement, SteenrodTensor};
pub use bmu::{equal_via_module, Action, BmuClass, BmuRing, ModuleOracle, TotalPowerExpansion};
pub use chern::{chern_action, decompose_symmetric, thom_action, ChernPoly, SymPoly};
pub use coeff::{Bidegree, MotCoeff, Prime};
pub use dual::{DualAlgebra, DualElement, DualMonomial, DualTensor};
pub use error::{Error, Result};
pub use milnor::{Duality, GramMatrix, MilnorElement};
pub use parse::{parse, Expr, Factor};
pub use verify::{verify_adem, VerifyReport};
