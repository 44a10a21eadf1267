//! Fixtures shared by the criterion benchmarks.

use skcomm::pin::pack_spanning_trees;
use skcomm::{PinInstance, TreePacking};

/// A complete-graph PIN instance together with its maximum packing.
pub fn complete_fixture(m: usize, n: usize) -> (PinInstance, TreePacking) {
    let pin = PinInstance::complete(m, n).expect("valid complete graph");
    let packing = pack_spanning_trees(&pin);
    (pin, packing)
}
