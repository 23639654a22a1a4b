//! Analysis of an entanglement buffer with one long-lived memory and `n` short-lived generating
//! memories.
//!
//! The stored link decoheres towards the fully mixed state, is consumed on request and may be
//! purified with freshly generated links. The crate evaluates the long-run availability and the
//! average fidelity of consumed links in closed form, bounds them, cross-checks them with a
//! cycle-level reference computation and a Monte-Carlo simulator, and builds the usual
//! purification policies.
//!
//! ```
//! use gnb_core::{analytics, BellDiagonalState, PurificationPolicy, SystemParams};
//!
//! let fresh = BellDiagonalState::werner(0.9).unwrap();
//! let params = SystemParams { n: 10, p_gen: 0.5, p_con: 0.1, gamma: 0.02, q: 1.0, new_link: fresh };
//! let policy = PurificationPolicy::dejmps(10, &fresh).unwrap();
//! let eval = analytics::evaluate(&params, &policy).unwrap();
//! assert!((eval.metrics.avg_fidelity - 0.915).abs() < 1e-3);
//! ```

pub mod analytics;
pub mod config;
pub mod error;
pub mod oracle;
pub mod params;
pub mod policy;
pub mod protocol;
pub mod report;
pub mod simulator;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use params::SystemParams;
pub use policy::{PolicyConfig, PolicySpec, PurificationPolicy};
pub use protocol::PurificationProtocol;
pub use state::BellDiagonalState;
