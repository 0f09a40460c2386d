//! True-positive-instance detection and bag classification for multiple
//! instance learning.
//!
//! The pipeline has three stages:
//!
//! 1. **Initialization**: score every instance of every positive bag
//!    against the negative bags, keep each bag's most promising fraction as
//!    its working set, gate bags with a t-test, and seed a candidate pool
//!    with one instance per surviving bag.
//! 2. **Candidate updating**: build a weighted graph over the pool whose
//!    edges combine exemplar-classifier similarity, quasi-clique
//!    consistency, and a robust negative-distance score; rank vertices by a
//!    personalized random walk and greedily swap weak candidates for better
//!    working-set members.
//! 3. **Bag classification**: embed every bag against the final candidates
//!    and train a linear soft-margin classifier on the embeddings.
//!
//! The `bench` module adds synthetic dataset generators, label-noise
//! injection, repeated cross-validation, and sensitivity sweeps.

pub mod affinity;
pub mod bench;
pub mod classify;
pub mod config;
pub mod csdg;
pub mod data;
pub mod density;
mod error;
pub mod pipeline;
pub mod selection;
pub mod svm;
mod util;

pub use config::PigmilConfig;
pub use error::{Error, Result};
