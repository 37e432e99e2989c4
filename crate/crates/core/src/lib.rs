//! A heuristic prover for inequalities between real-valued terms.
//!
//! Problem terms are put into canonical form and named on a shared
//! blackboard of comparisons. Derivation modules (linear and multiplicative
//! Fourier-Motzkin elimination, axiom instantiation, special-function rules)
//! read the blackboard and add what they learn until a contradiction appears
//! or nothing new can be learned.

pub mod additive;
pub mod axioms;
pub mod blackboard;
pub mod check;
pub mod comparison;
pub mod corpus;
pub mod fm;
pub mod functions;
pub mod multiplicative;
pub mod parse;
pub mod proof;
pub mod rat;
pub mod solver;
pub mod term;
pub mod trace;
