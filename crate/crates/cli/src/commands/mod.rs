pub mod budget;
pub mod demo;
pub mod eval;
pub mod gen;
pub mod mask;
pub mod refine;
