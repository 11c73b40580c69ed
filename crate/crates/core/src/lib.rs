//! Extended compact genetic algorithm (ecGA) with minimum-description-length
//! linkage learning, plus the dynamic-environment variants that restart on
//! change with (`dcga1`) or without (`dcga2`) the last learned linkage model.
//!
//! The crate is organised bottom-up:
//!
//! - [`rng`], [`genome`], [`clock`]: bit-string representation, reproducible
//!   random streams and the cyclic environment clock with change detection.
//! - [`model`]: marginal product models, MDL scoring and the greedy
//!   partition-merge search.
//! - [`operators`]: tournament selection without replacement, building-block
//!   crossover and uniform crossover.
//! - [`problems`]: dynamic bounded-difficulty benchmarks (cyclic traps, the
//!   asymmetric trap-4, the switching trap-3/4 and the moving parabola).
//! - [`solvers`]: the generational loops and per-generation traces.
//! - [`harness`]: JSON configuration, seeded batches, CSV aggregation and the
//!   experiment replication grids used by the `dcga` binary.
//!
//! ```
//! use dcga::{problems::ProblemSpec, solvers::{run, SolverConfig, Variant}};
//!
//! let problem = ProblemSpec::DynamicTrap { k: 3, blocks: 2 }.build().unwrap();
//! let config = SolverConfig {
//!     variant: Variant::Dcga1,
//!     population_size: 200,
//!     generations: 10,
//!     cycle: 5,
//!     ..SolverConfig::default()
//! };
//! let trace = run(&config, &problem, 7).unwrap();
//! assert_eq!(trace.records.len(), 10);
//! ```

pub mod clock;
pub mod error;
pub mod genome;
pub mod harness;
pub mod model;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
