pub mod extended;
pub mod fieldexpr;
pub mod graph;
pub mod metric;
pub mod randers;
pub mod scalar;
pub mod completion;
pub mod function;
pub mod gromov;
pub mod busemann;
pub mod chrono;
pub mod spacetime;
pub mod builders;
pub mod scenarios;

/// Double-precision instantiations used by the command line and the examples.
pub type Space = graph::SampledSpace<f64>;
pub type Function = function::SampledFunction<f64>;
pub type Catalog = completion::CompletionCatalog<f64>;
pub type Spacetime = spacetime::StationarySpacetime<f64>;
