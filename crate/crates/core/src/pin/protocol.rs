//! Linear key agreement from a spanning tree packing.
//!
//! For each tree, rooted at vertex 1, the key bit is the root's tree edge
//! with the smallest column index. Vertices are visited in BFS order; a
//! vertex `v` with parent `u` is reached by `u` broadcasting the XOR of the
//! bit that links `u` upward (the key bit when `u` is the root) and `v`'s
//! parent edge. The edge linked directly to the key needs no broadcast, so
//! every tree costs `m - 2` public bits.

use std::collections::VecDeque;

use crate::error::Result;
use crate::gf2::{BitMatrix, BitVec};
use crate::protocol_sim::LinearTranscript;

use super::{PinInstance, TreePacking};

/// Public communication `F`, secret key `K` and the omniscience target `J`.
#[derive(Debug, Clone)]
pub struct PinProtocol {
    pub transcript: LinearTranscript,
    pub key: BitMatrix,
    pub cr: BitMatrix,
}

/// Compiles a linear protocol from a validated packing.
pub fn compile_tree_protocol(pin: &PinInstance, packing: &TreePacking) -> Result<PinProtocol> {
    packing.validate(pin)?;
    let m = pin.terminals();
    let p = pin.column_count();
    let mut transcript = LinearTranscript::new(pin.clone());
    let mut key = BitMatrix::empty(pin.space().clone());

    for tree in &packing.trees {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + 1];
        for &c in tree {
            let e = pin.columns()[c];
            adj[e.u].push((e.v, c));
            adj[e.v].push((e.u, c));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(_, c)| c);
        }
        let Some(&(_, key_col)) = adj[1].first() else {
            continue;
        };
        key.push_row(BitVec::unit(p, key_col))?;

        let mut up: Vec<Option<usize>> = vec![None; m + 1];
        up[1] = Some(key_col);
        let mut seen = vec![false; m + 1];
        seen[1] = true;
        let mut queue = VecDeque::from([1usize]);
        while let Some(u) = queue.pop_front() {
            for &(v, c) in &adj[u] {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                up[v] = Some(c);
                let link = up[u].expect("visited vertices have an upward link");
                if c != link {
                    let mut row = BitVec::unit(p, link);
                    row.toggle(c);
                    transcript.push(u, row)?;
                }
                queue.push_back(v);
            }
        }
    }

    Ok(PinProtocol {
        transcript,
        key,
        cr: BitMatrix::identity(pin.space().clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pin::pack_spanning_trees;
    use crate::protocol_sim::validate_transcript;
    use crate::Error;

    fn compiled(m: usize, n: usize) -> (PinInstance, PinProtocol) {
        let pin = PinInstance::complete(m, n).unwrap();
        let packing = pack_spanning_trees(&pin);
        let proto = compile_tree_protocol(&pin, &packing).unwrap();
        (pin, proto)
    }

    #[test]
    fn k3_twice() {
        let (_, proto) = compiled(3, 2);
        assert_eq!(proto.transcript.len(), 3);
        assert_eq!(proto.key.row_count(), 3);
        let stacked = proto.key.stack(&proto.transcript.comm_matrix()).unwrap();
        assert_eq!(stacked.rank(), 6);
    }

    #[test]
    fn k4_once() {
        let (_, proto) = compiled(4, 1);
        assert_eq!(proto.key.row_count(), 2);
        assert_eq!(proto.transcript.len(), 4);
        assert!(validate_transcript(&proto.transcript).valid);
        let f = proto.transcript.comm_matrix();
        assert_eq!(proto.key.mutual_information_linear(&f).unwrap(), 0);
    }

    #[test]
    fn two_terminals_need_no_communication() {
        let (_, proto) = compiled(2, 3);
        assert!(proto.transcript.is_empty());
        assert_eq!(proto.key.row_count(), 3);
        assert_eq!(proto.key.rank(), 3);
    }

    #[test]
    fn broadcasts_touch_only_sender_edges() {
        for (m, n) in [(3, 2), (4, 2), (5, 2), (6, 1)] {
            let (pin, proto) = compiled(m, n);
            for t in proto.transcript.transmissions() {
                assert_eq!(t.row.count_ones(), 2);
                assert!(t.row.and(pin.incidence(t.sender)) == t.row);
            }
            assert_eq!(proto.transcript.len(), (m - 2) * proto.key.row_count());
        }
    }

    #[test]
    fn rejects_invalid_packing() {
        let pin = PinInstance::complete(3, 1).unwrap();
        let bad = TreePacking {
            trees: vec![vec![0, 1], vec![1, 2]],
        };
        assert!(matches!(compile_tree_protocol(&pin, &bad), Err(Error::Structure(_))));
    }
}
