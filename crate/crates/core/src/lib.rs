//! Program repair from direct manipulation of execution traces.

pub mod corpus;
pub mod distances;
pub mod extfun;
pub mod lang;
pub mod sketcher;
pub mod slicer;
pub mod solver;
pub mod tracer;
