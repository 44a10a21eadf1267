//! Secret-key capacity and linear communication complexity for multiterminal
//! source models.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2`]: bit-packed GF(2) matrices with labeled columns; rank doubles as
//!   entropy for linear functions of fair bits.
//! * [`source_model`]: explicit joint pmfs and a brute-force entropy oracle.
//! * [`partition_lp`]: exact rational simplex for the fractional-partition LP
//!   that defines secret-key capacity.
//! * [`multipartite_info`]: conditional multipartite information and the
//!   identities relating it to the entropy of a conditioning variable.
//! * [`pin`]: pairwise independent network models, spanning-tree packing and
//!   the tree-based linear key protocol.
//! * [`protocol_sim`]: interactive linear transcripts and exact checkers for
//!   common randomness, secret keys and common information.

pub mod error;
pub mod gf2;
pub mod multipartite_info;
pub mod partition_lp;
pub mod pin;
pub mod protocol_sim;
pub mod rational;
pub mod source_model;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec, ColumnLabel, ColumnSpace, MatrixFile};
pub use multipartite_info::{Backend, CmiReport, CmiTerm};
pub use partition_lp::{CapacityResult, EntropyTable, FractionalPartition};
pub use pin::{Graph, PinInstance, PinProtocol, TreePacking};
pub use protocol_sim::{LinearTranscript, Transmission};
pub use rational::Rational;
pub use source_model::{JointPmf, SubsetMask};
