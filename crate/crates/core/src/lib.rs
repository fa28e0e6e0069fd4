//! Executable Dialectica toolkit: a System T kernel, the Dialectica formula
//! translation, a checker for Dialectica triples that synthesizes forward and
//! backward realizers, and the LOOP_D machine whose backward pass is a
//! generalized backpropagation.

pub mod kernel;
pub mod check;
pub mod cli;
pub mod dhl;
pub mod logic;
pub mod loopd;
