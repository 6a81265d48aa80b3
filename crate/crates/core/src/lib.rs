pub mod api;
pub mod backtranslate;
pub mod dafny;
pub mod engine;
pub mod pipeline;
pub mod prover;
pub mod repl;
pub mod sexpr;
pub mod solver;
pub mod vc;
