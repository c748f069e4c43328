//! Transformer constructions for key-value function evaluation, with the
//! machinery to check them.
//!
//! A function `f: [n] -> [n]` is presented as a token sequence in one of
//! five layouts ([`task::PresentationCase`]) followed by a target key `i*`;
//! the transformer must output `f(i*)`. The crate contains:
//!
//! - [`transformer`]: deterministic forward evaluation (softmax and
//!   leftmost/rightmost/average hard attention, residuals, ReLU MLPs, argmax
//!   unembedding) and the JSON spec format;
//! - [`task`]: instances, layouts, the lookup oracle, exhaustive and seeded
//!   instance generation;
//! - [`constructions`]: exact weights for each layout;
//! - [`precision`]: fixed-point quantization, c-size and k-size, minimum exact precision;
//! - [`analysis`]: lower-bound calculators, the hard-attention adversarial
//!   probe and the shattering witness;
//! - [`sweep`]: parallel, deterministic verification sweeps and reports.
//!
//! ```
//! use lookup_workbench::{constructions::build_case3, task, transformer::forward};
//!
//! let inst = task::Instance::new(vec![2, 2, 3, 1], vec![0, 2, 1, 3], 2).unwrap();
//! let spec = build_case3(4);
//! let tokens = task::encode(&inst, spec.case).unwrap();
//! assert_eq!(forward(&spec, &tokens).unwrap(), 3);
//! ```

pub mod analysis;
pub mod constructions;
pub mod error;
pub mod matrix;
pub mod precision;
pub mod sweep;
pub mod task;
pub mod transformer;

pub use error::{Error, Result};
