//! Classical-quantum and quantum-quantum capacity regions of two-sender
//! quantum multiple-access channels.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices over labelled tensor-product layouts.
//! - [`states`]: density matrices, pure states, cq ensembles and samplers.
//! - [`channels`]: Kraus-form channels, dilations, complements and the two
//!   named multiple-access channels.
//! - [`information`]: entropies, mutual and coherent informations, fidelity,
//!   trace distance and a randomized inequality suite.
//! - [`regions`]: rate regions, single-letter evaluation and derivative-free
//!   optimization of the CQ and QQ regions.
//! - [`cli`]: the `qmac` command-line tool.

pub mod channels;
pub mod cli;
pub mod error;
pub mod information;
pub mod linalg;
pub mod optimize;
pub mod regions;
pub mod states;

pub use error::{Error, Result};
