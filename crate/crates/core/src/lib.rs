//! Capacity and mutual-information models for quantum-optical
//! communication channels subject to loss.
//!
//! Three single-mode channels are modeled through a line with energy
//! attenuation `eta`:
//!
//! * **heterodyne / coherent states** — loss-invariant prior, capacity
//!   `ln(1 + eta N)` ([`gaussian::heterodyne_capacity`]);
//! * **homodyne / squeezed states** — closed-form mutual information with
//!   the squeezing fraction either re-optimized for the loss or frozen at
//!   its lossless value ([`gaussian`]);
//! * **direct detection / number states** — binomial loss kernel on
//!   photon number ([`number`]), with the prior optimized under an
//!   average-power constraint by the multiplicative recursion in
//!   [`blahut`].
//!
//! [`diagrams`] sweeps the loss-power plane and labels which channel wins
//! where; [`reference`] pins the published operating points used for
//! regression.
//!
//! Everything computes in nats ([`Information`] converts); all value
//! types are immutable and the grid sweeps parallelize with rayon.

pub mod blahut;
pub mod diagrams;
pub mod error;
pub mod gaussian;
pub mod number;
pub mod reference;
pub mod types;

pub use blahut::{BlahutConfig, BlahutRun};
pub use error::{Error, Result};
pub use gaussian::SqueezedEncoding;
pub use number::LossKernel;
pub use types::{ChannelPoint, Information, PhotonDistribution};
