//! Closed-form rank expressions for linear `L` on the complete-graph PIN model.
//!
//! With `λ* = λ̃` and `E_i^c` the edge instances not incident with `i`,
//!
//! ```text
//! I(X^n | L) = nm/2 - rank(L) + (1/(m-1)) Σ_i rank(L|E_i^c)
//!            >= nm/2 - rank(L)/(m-1)
//! ```
//!
//! the bound following from `Σ_i rank(L|E_i^c) >= (m-2) rank(L)`.

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::multipartite_info::{self, Backend, CmiReport, CmiTerm, RankEntropies};
use crate::partition_lp::FractionalPartition;
use crate::rational::{self, Rational};
use crate::source_model::SubsetMask;

use super::PinInstance;

fn require_complete(pin: &PinInstance) -> Result<()> {
    if !pin.is_complete() {
        return Err(Error::Argument(
            "closed-form rank expression needs a complete base graph; supply λ* explicitly".into(),
        ));
    }
    Ok(())
}

fn check_matrix(pin: &PinInstance, l: &BitMatrix) -> Result<()> {
    if **l.space() != **pin.space() {
        return Err(Error::Dimension(
            "matrix columns do not match the PIN edge instances".into(),
        ));
    }
    Ok(())
}

/// `rank(L|E_i^c)` for `i = 1..=m`.
fn complement_ranks(pin: &PinInstance, l: &BitMatrix) -> Vec<usize> {
    (1..=pin.terminals())
        .map(|i| l.rank_on(&pin.incidence(i).not()))
        .collect()
}

/// Conditional multipartite information of a linear `L` on a complete-graph
/// PIN model, from ranks alone.
pub fn cmi_rank(pin: &PinInstance, l: &BitMatrix) -> Result<CmiReport<Rational>> {
    require_complete(pin)?;
    check_matrix(pin, l)?;
    let m = pin.terminals() as i64;
    let n = pin.n() as i64;
    let total = pin.column_count();
    let rank = l.rank();
    let ranks = complement_ranks(pin, l);
    let sum: usize = ranks.iter().sum();
    let value = rational::ratio(n * m, 2) - rational::int(rank as i64)
        + rational::ratio(sum as i64, m - 1);

    let weight = rational::ratio(1, m - 1);
    let terms = (1..=pin.terminals())
        .zip(&ranks)
        .map(|(i, &r)| {
            let block = SubsetMask::singleton(i).complement(pin.terminals());
            let seen = pin.incidence(i).count_ones();
            CmiTerm {
                subset: block,
                weight: weight.clone(),
                conditional: rational::int((total - seen - r) as i64),
            }
        })
        .collect();
    Ok(CmiReport {
        value,
        backend: Backend::Rank,
        lambda_used: FractionalPartition::tilde(pin.terminals()),
        h_x_given_l: rational::int((total - rank) as i64),
        terms,
    })
}

/// Rank evaluation for any PIN graph with a caller-supplied `λ*`.
pub fn cmi_rank_with(
    pin: &PinInstance,
    l: &BitMatrix,
    lambda: &FractionalPartition,
) -> Result<CmiReport<Rational>> {
    multipartite_info::cmi(&RankEntropies::new(pin, l)?, lambda)
}

/// `nm/2 - rank(L)/(m-1)`.
pub fn cmi_rank_lower_bound(pin: &PinInstance, l: &BitMatrix) -> Result<Rational> {
    require_complete(pin)?;
    check_matrix(pin, l)?;
    let m = pin.terminals() as i64;
    let n = pin.n() as i64;
    Ok(rational::ratio(n * m, 2) - rational::ratio(l.rank() as i64, m - 1))
}

/// Margin of `Σ_i rank(L|E_i^c) >= (m-2) rank(L)`.
///
/// Every edge instance misses exactly `m - 2` vertices, so the inequality
/// holds on any loopless graph, not only complete ones.
pub fn incidence_rank_inequality(pin: &PinInstance, l: &BitMatrix) -> Result<i64> {
    check_matrix(pin, l)?;
    let sum: usize = complement_ranks(pin, l).iter().sum();
    Ok(sum as i64 - (pin.terminals() as i64 - 2) * l.rank() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitVec;
    use crate::pin::Graph;
    use crate::rational::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(pin: &PinInstance, rows: &[&str]) -> BitMatrix {
        let rows = rows.iter().map(|r| BitVec::from_bit_str(r).unwrap()).collect();
        BitMatrix::new(pin.space().clone(), rows).unwrap()
    }

    #[test]
    fn k3_examples() {
        let pin = PinInstance::complete(3, 1).unwrap();
        let id = matrix(&pin, &["100", "010", "001"]);
        assert_eq!(cmi_rank(&pin, &id).unwrap().value, int(0));
        let e12 = matrix(&pin, &["100"]);
        let r = cmi_rank(&pin, &e12).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.recombined(), r.value);
        let empty = matrix(&pin, &[]);
        assert_eq!(cmi_rank(&pin, &empty).unwrap().value, ratio(3, 2));
    }

    #[test]
    fn lower_bound_examples() {
        let pin = PinInstance::complete(3, 1).unwrap();
        let e12 = matrix(&pin, &["100"]);
        assert_eq!(cmi_rank_lower_bound(&pin, &e12).unwrap(), int(1));
        assert_eq!(cmi_rank(&pin, &e12).unwrap().value, int(1));
        let id = matrix(&pin, &["100", "010", "001"]);
        assert_eq!(cmi_rank_lower_bound(&pin, &id).unwrap(), int(0));
        let empty = matrix(&pin, &[]);
        assert_eq!(cmi_rank_lower_bound(&pin, &empty).unwrap(), ratio(3, 2));
    }

    #[test]
    fn incidence_examples() {
        let k3 = PinInstance::complete(3, 1).unwrap();
        let id = matrix(&k3, &["100", "010", "001"]);
        assert_eq!(incidence_rank_inequality(&k3, &id).unwrap(), 0);
        let k4 = PinInstance::complete(4, 1).unwrap();
        let one = matrix(&k4, &["100000"]);
        assert_eq!(incidence_rank_inequality(&k4, &one).unwrap(), 0);
        let empty = matrix(&k4, &[]);
        assert_eq!(incidence_rank_inequality(&k4, &empty).unwrap(), 0);
    }

    #[test]
    fn non_complete_graph_needs_lambda() {
        let pin = PinInstance::build(Graph::path(3), 1).unwrap();
        let l = matrix(&pin, &["10"]);
        assert!(matches!(cmi_rank(&pin, &l), Err(Error::Argument(_))));
        assert!(matches!(cmi_rank_lower_bound(&pin, &l), Err(Error::Argument(_))));
        let lambda = FractionalPartition::singletons(3);
        assert!(cmi_rank_with(&pin, &l, &lambda).is_ok());
    }

    #[test]
    fn bound_and_counting_hold_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 3..=5 {
            for n in 1..=2 {
                let pin = PinInstance::complete(m, n).unwrap();
                for _ in 0..40 {
                    let rows = rng.gen_range(0..=pin.column_count() + 2);
                    let l = BitMatrix::random(pin.space().clone(), rows, &mut rng);
                    let exact = cmi_rank(&pin, &l).unwrap();
                    assert!(exact.value >= cmi_rank_lower_bound(&pin, &l).unwrap());
                    assert!(incidence_rank_inequality(&pin, &l).unwrap() >= 0);
                    assert_eq!(exact.recombined(), exact.value);
                    if l.rank() < pin.column_count() {
                        assert!(exact.value > int(0));
                    }
                }
            }
        }
    }
}
