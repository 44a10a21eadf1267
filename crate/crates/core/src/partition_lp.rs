//! Secret-key capacity through the fractional-partition linear program
//!
//! ```text
//! I(X_M) = H(X_M) - max_{λ ∈ Λ} Σ_B λ_B H(X_B | X_{B^c})
//! ```
//!
//! where `Λ` holds the nonnegative weights on nonempty proper subsets `B`
//! with `Σ_{B ∋ i} λ_B = 1` for every terminal `i`. The program is solved by a
//! dense tableau simplex over exact rationals using Bland's rule, starting from
//! the singleton partition (which is always a feasible basis).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::source_model::{JointPmf, SubsetMask};

/// Largest terminal count the dense solver accepts.
pub const MAX_LP_TERMINALS: usize = 16;

/// `H(X_A)` for every `A ⊆ {1..m}`, indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTable {
    m: usize,
    values: Vec<Rational>,
    approximate: bool,
}

impl EntropyTable {
    pub fn from_fn<F: FnMut(SubsetMask) -> Rational>(m: usize, mut f: F) -> Self {
        let values = SubsetMask::all_subsets(m).map(&mut f).collect();
        Self {
            m,
            values,
            approximate: false,
        }
    }

    /// Builds a table from an explicit map; every subset except possibly the
    /// empty one (taken as 0) must be present.
    pub fn from_map(m: usize, map: &BTreeMap<SubsetMask, Rational>) -> Result<Self> {
        if m == 0 || m > MAX_LP_TERMINALS {
            return Err(Error::Argument(format!("unsupported terminal count {m}")));
        }
        let mut values = Vec::with_capacity(1 << m);
        for a in SubsetMask::all_subsets(m) {
            match map.get(&a) {
                Some(v) => values.push(v.clone()),
                None if a.is_empty() => values.push(Rational::zero()),
                None => return Err(Error::Argument(format!("entropy of subset {a} missing"))),
            }
        }
        if let Some(extra) = map.keys().find(|a| !a.is_subset_of(SubsetMask::full(m))) {
            return Err(Error::Argument(format!("subset {extra} outside 1..={m}")));
        }
        Ok(Self {
            m,
            values,
            approximate: false,
        })
    }

    /// Subset entropies of a pmf. Values that are not exact dyadic rationals
    /// are rounded to multiples of `2^-denominator_bits` and the table is
    /// marked approximate.
    pub fn from_pmf(pmf: &JointPmf, denominator_bits: u32) -> Result<Self> {
        let m = pmf.terminals();
        if m > MAX_LP_TERMINALS {
            return Err(Error::Argument(format!("{m} terminals exceed the LP limit")));
        }
        let mut approximate = false;
        let mut values = Vec::with_capacity(1 << m);
        for a in SubsetMask::all_subsets(m) {
            match pmf.subset_entropy_exact(a)? {
                Some(h) => values.push(h),
                None => {
                    let (r, exact) = rational::round_f64(pmf.subset_entropy(a)?, denominator_bits);
                    approximate |= !exact;
                    values.push(r);
                }
            }
        }
        Ok(Self {
            m,
            values,
            approximate,
        })
    }

    pub fn terminals(&self) -> usize {
        self.m
    }

    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    pub fn get(&self, a: SubsetMask) -> &Rational {
        &self.values[a.bits() as usize]
    }

    pub fn joint(&self) -> &Rational {
        self.get(SubsetMask::full(self.m))
    }

    /// `H(X_B | X_{B^c})`.
    pub fn conditional(&self, b: SubsetMask) -> Rational {
        self.joint() - self.get(b.complement(self.m))
    }

    /// Multiplies every entry by `k` (entropies of the `k`-fold extension).
    pub fn scaled(&self, k: i64) -> Self {
        let f = rational::int(k);
        Self {
            m: self.m,
            values: self.values.iter().map(|v| v * &f).collect(),
            approximate: self.approximate,
        }
    }
}

/// A point `λ = (λ_B)` with zero weights omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalPartition {
    m: usize,
    weights: BTreeMap<SubsetMask, Rational>,
}

impl FractionalPartition {
    /// Collects weights; rejects subsets that are not nonempty proper subsets.
    /// Membership in `Λ` is checked separately by [`FractionalPartition::validate`].
    pub fn new<I>(m: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SubsetMask, Rational)>,
    {
        if m < 2 || m > 31 {
            return Err(Error::Argument(format!("unsupported terminal count {m}")));
        }
        let mut map = BTreeMap::new();
        for (b, w) in weights {
            if !b.is_proper(m) {
                return Err(Error::Argument(format!(
                    "{b} is not a nonempty proper subset of 1..={m}"
                )));
            }
            if !w.is_zero() {
                *map.entry(b).or_insert_with(Rational::zero) += w;
            }
        }
        map.retain(|_, w| !w.is_zero());
        Ok(Self { m, weights: map })
    }

    /// Weight `1/(m-1)` on every subset of size `m - 1`.
    pub fn tilde(m: usize) -> Self {
        let w = rational::ratio(1, m as i64 - 1);
        let full = SubsetMask::full(m);
        let weights = (1..=m)
            .map(|i| (full.intersection(SubsetMask::singleton(i).complement(m)), w.clone()))
            .collect();
        Self { m, weights }
    }

    /// Weight 1 on every singleton.
    pub fn singletons(m: usize) -> Self {
        Self {
            m,
            weights: (1..=m).map(|i| (SubsetMask::singleton(i), Rational::one())).collect(),
        }
    }

    pub fn terminals(&self) -> usize {
        self.m
    }

    pub fn weight(&self, b: SubsetMask) -> Rational {
        self.weights.get(&b).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, &Rational)> {
        self.weights.iter().map(|(b, w)| (*b, w))
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Checks `λ ∈ Λ`: nonnegative weights and unit coverage of every terminal.
    pub fn validate(&self) -> Result<()> {
        if let Some((b, w)) = self.weights.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::ConstraintViolation(format!(
                "weight of {b} is negative ({})",
                rational::to_pq(w)
            )));
        }
        for i in 1..=self.m {
            let total: Rational = self
                .weights
                .iter()
                .filter(|(b, _)| b.contains(i))
                .map(|(_, w)| w.clone())
                .sum();
            if !total.is_one() {
                return Err(Error::ConstraintViolation(format!(
                    "weights covering terminal {i} sum to {} instead of 1",
                    rational::to_pq(&total)
                )));
            }
        }
        Ok(())
    }

    /// `Σ_B λ_B H(X_B | X_{B^c})`.
    pub fn objective(&self, table: &EntropyTable) -> Result<Rational> {
        self.check_terminals(table.terminals())?;
        Ok(self.weights.iter().map(|(b, w)| w * table.conditional(*b)).sum())
    }

    /// `H(X_M) - Σ_B λ_B H(X_B | X_{B^c})`.
    pub fn value(&self, table: &EntropyTable) -> Result<Rational> {
        Ok(table.joint() - self.objective(table)?)
    }

    pub(crate) fn check_terminals(&self, m: usize) -> Result<()> {
        if self.m != m {
            return Err(Error::Argument(format!(
                "fractional partition is over {} terminals, model has {m}",
                self.m
            )));
        }
        Ok(())
    }

    /// A random point of `Λ`: repeatedly puts a random share of the remaining
    /// slack on random subsets, then closes with singletons.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut slack = vec![Rational::one(); m];
        let mut weights: BTreeMap<SubsetMask, Rational> = BTreeMap::new();
        let full = SubsetMask::full(m).bits();
        for _ in 0..rng.gen_range(0..=2 * m) {
            let b = SubsetMask(rng.gen_range(1..full));
            let room = b
                .members()
                .map(|i| slack[i - 1].clone())
                .min()
                .unwrap_or_else(Rational::zero);
            if room.is_zero() {
                continue;
            }
            let share = rational::ratio(rng.gen_range(1..=4), 4) * room;
            for i in b.members() {
                slack[i - 1] -= &share;
            }
            *weights.entry(b).or_insert_with(Rational::zero) += share;
        }
        for (k, s) in slack.into_iter().enumerate() {
            if !s.is_zero() {
                *weights.entry(SubsetMask::singleton(k + 1)).or_insert_with(Rational::zero) += s;
            }
        }
        Self { m, weights }
    }

    /// `"[1,2]" -> "p/q"` report map.
    pub fn to_report(&self) -> BTreeMap<String, String> {
        self.weights
            .iter()
            .map(|(b, w)| (b.key(), rational::to_pq(w)))
            .collect()
    }

    pub fn from_report(m: usize, report: &BTreeMap<String, String>) -> Result<Self> {
        let entries = report
            .iter()
            .map(|(k, v)| Ok((SubsetMask::parse_key(k)?, rational::parse(v)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, entries)
    }
}

/// Solution of the capacity LP.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub m: usize,
    /// `I(X_M)` in bits per symbol of the supplied entropies.
    pub capacity: Rational,
    /// `H(X_M)`.
    pub joint_entropy: Rational,
    pub lambda_star: FractionalPartition,
    /// `H(X_B | X_{B^c})` for every nonempty proper `B`.
    pub objective_terms: BTreeMap<SubsetMask, Rational>,
    /// Entropies were rounded before solving.
    pub approximate: bool,
    /// Some nonbasic variable has zero reduced cost at the optimum, so other
    /// optimal vertices may exist.
    pub alternate_optima: bool,
}

impl CapacityResult {
    pub fn optimum_objective(&self) -> Rational {
        &self.joint_entropy - &self.capacity
    }
}

/// JSON capacity report: `{"capacity": "p/q", "lambda": {"[1,2]": "p/q", ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub capacity: String,
    pub lambda: BTreeMap<String, String>,
}

impl From<&CapacityResult> for CapacityReport {
    fn from(r: &CapacityResult) -> Self {
        CapacityReport {
            capacity: rational::to_pq(&r.capacity),
            lambda: r.lambda_star.to_report(),
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cost: Vec<Rational>,
}

impl Tableau {
    fn reduced_cost(&self, j: usize) -> Rational {
        let mut r = self.cost[j].clone();
        for (i, row) in self.rows.iter().enumerate() {
            if !row[j].is_zero() {
                r -= &self.cost[self.basis[i]] * &row[j];
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[row] = col;
    }
}

/// Maximises `Σ λ_B H(X_B|X_{B^c})` over `Λ` and returns the capacity together
/// with the optimal vertex reached by Bland's rule.
pub fn solve_capacity(table: &EntropyTable) -> Result<CapacityResult> {
    let m = table.terminals();
    if m < 2 {
        return Err(Error::Argument("capacity needs at least two terminals".into()));
    }
    if m > MAX_LP_TERMINALS {
        return Err(Error::Argument(format!(
            "{m} terminals exceed the solver limit of {MAX_LP_TERMINALS}"
        )));
    }
    // variable j <-> subset mask j + 1
    let vars = (1usize << m) - 2;
    let subset = |j: usize| SubsetMask(j as u32 + 1);
    let cost: Vec<Rational> = (0..vars).map(|j| table.conditional(subset(j))).collect();
    let rows = (0..m)
        .map(|i| {
            (0..vars)
                .map(|j| {
                    if subset(j).contains(i + 1) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let basis = (0..m).map(|i| (1usize << i) - 1).collect();
    let mut t = Tableau {
        rows,
        rhs: vec![Rational::one(); m],
        basis,
        cost,
    };

    loop {
        let entering = (0..vars).find(|&j| !t.basis.contains(&j) && t.reduced_cost(j).is_positive());
        let Some(col) = entering else { break };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            let a = &t.rows[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = &t.rhs[i] / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    if ratio < best || (ratio == best && t.basis[i] < t.basis[k]) {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        // Λ is bounded, so an improving column always has a positive entry.
        let (row, _) = leave.expect("fractional-partition LP is bounded");
        t.pivot(row, col);
    }

    let alternate_optima =
        (0..vars).any(|j| !t.basis.contains(&j) && t.reduced_cost(j).is_zero());
    let weights = t
        .basis
        .iter()
        .zip(&t.rhs)
        .map(|(&j, v)| (subset(j), v.clone()));
    let lambda_star = FractionalPartition::new(m, weights)?;
    let objective = lambda_star.objective(table)?;
    let capacity = table.joint() - &objective;
    let objective_terms = SubsetMask::proper_subsets(m)
        .map(|b| (b, table.conditional(b)))
        .collect();
    Ok(CapacityResult {
        m,
        capacity,
        joint_entropy: table.joint().clone(),
        lambda_star,
        objective_terms,
        approximate: table.is_approximate(),
        alternate_optima,
    })
}

/// Outcome of comparing a given `λ` against the LP optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCertificate {
    pub optimal: bool,
    pub objective: Rational,
    pub optimum: Rational,
}

/// Checks `λ ∈ Λ` and whether its objective attains the optimum.
pub fn verify_partition_optimal(
    table: &EntropyTable,
    lambda: &FractionalPartition,
) -> Result<OptimalityCertificate> {
    lambda.check_terminals(table.terminals())?;
    lambda.validate()?;
    let objective = lambda.objective(table)?;
    let result = solve_capacity(table)?;
    let optimum = result.optimum_objective();
    Ok(OptimalityCertificate {
        optimal: objective == optimum,
        objective,
        optimum,
    })
}

/// The `λ*` used downstream, with a flag telling whether it is the uniform
/// `(m-1)`-subset partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalLambda {
    pub lambda: FractionalPartition,
    pub canonical: bool,
    pub alternate_optima: bool,
}

/// Prefers the uniform `(m-1)`-subset partition whenever it is optimal,
/// otherwise returns the solver's vertex.
pub fn canonical_lambda_star(result: &CapacityResult) -> CanonicalLambda {
    let tilde = FractionalPartition::tilde(result.m);
    let tilde_objective: Rational = tilde
        .iter()
        .map(|(b, w)| w * &result.objective_terms[&b])
        .sum();
    if tilde_objective == result.optimum_objective() {
        CanonicalLambda {
            lambda: tilde,
            canonical: true,
            alternate_optima: result.alternate_optima,
        }
    } else {
        CanonicalLambda {
            lambda: result.lambda_star.clone(),
            canonical: false,
            alternate_optima: result.alternate_optima,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pin::{pin_subset_entropies, Graph, PinInstance};
    use crate::rational::{int, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k(m: usize) -> EntropyTable {
        pin_subset_entropies(&PinInstance::complete(m, 1).unwrap())
    }

    #[test]
    fn complete_graph_capacities() {
        for m in 3..=6 {
            let r = solve_capacity(&k(m)).unwrap();
            assert_eq!(r.capacity, ratio(m as i64, 2), "m = {m}");
            assert!(r.lambda_star.validate().is_ok());
        }
        let r3 = solve_capacity(&k(3)).unwrap();
        assert_eq!(canonical_lambda_star(&r3).lambda, FractionalPartition::tilde(3));
        let r4 = solve_capacity(&k(4)).unwrap();
        let c4 = canonical_lambda_star(&r4);
        assert!(c4.canonical);
        for (b, w) in c4.lambda.iter() {
            assert_eq!(b.len(), 3);
            assert_eq!(w, &ratio(1, 3));
        }
    }

    #[test]
    fn two_terminal_copy() {
        let pmf = JointPmf::uniform(vec![2, 2], vec![vec![0, 0], vec![1, 1]]).unwrap();
        let table = EntropyTable::from_pmf(&pmf, 40).unwrap();
        assert!(!table.is_approximate());
        let r = solve_capacity(&table).unwrap();
        assert_eq!(r.capacity, int(1));
        assert_eq!(r.lambda_star, FractionalPartition::singletons(2));
        let c = canonical_lambda_star(&r);
        assert!(c.canonical);
        assert_eq!(c.lambda, FractionalPartition::singletons(2));
    }

    #[test]
    fn verify_tilde_on_k5() {
        let cert = verify_partition_optimal(&k(5), &FractionalPartition::tilde(5)).unwrap();
        assert!(cert.optimal);
    }

    #[test]
    fn singletons_are_feasible_but_not_optimal_on_k3() {
        let cert = verify_partition_optimal(&k(3), &FractionalPartition::singletons(3)).unwrap();
        assert!(!cert.optimal);
        assert_eq!(cert.objective, int(0));
        assert_eq!(cert.optimum, ratio(3, 2));
    }

    #[test]
    fn overweight_entry_is_a_violation() {
        let l = FractionalPartition::new(3, [(SubsetMask::singleton(1), int(2))]).unwrap();
        let err = verify_partition_optimal(&k(3), &l).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation(ref s) if s.contains("terminal 1")), "{err}");
        let neg = FractionalPartition::new(
            2,
            [
                (SubsetMask::singleton(1), int(2)),
                (SubsetMask::singleton(2), int(1)),
                (SubsetMask::singleton(1), int(-3)),
            ],
        )
        .unwrap();
        assert!(matches!(neg.validate(), Err(Error::ConstraintViolation(_))));
    }

    #[test]
    fn disconnected_pin_is_non_canonical() {
        let g = Graph::new(4, vec![(1, 2), (3, 4)]).unwrap();
        let table = pin_subset_entropies(&PinInstance::build(g, 1).unwrap());
        let r = solve_capacity(&table).unwrap();
        assert_eq!(r.capacity, int(0));
        let c = canonical_lambda_star(&r);
        assert!(!c.canonical);
        assert!(c.alternate_optima);
        assert!(c.lambda.validate().is_ok());
        assert_eq!(c.lambda.value(&table).unwrap(), int(0));
    }

    #[test]
    fn missing_entropy_is_rejected() {
        let mut map = BTreeMap::new();
        map.insert(SubsetMask::singleton(1), int(1));
        assert!(matches!(EntropyTable::from_map(2, &map), Err(Error::Argument(_))));
        map.insert(SubsetMask::singleton(2), int(1));
        map.insert(SubsetMask::full(2), int(1));
        let t = EntropyTable::from_map(2, &map).unwrap();
        assert_eq!(solve_capacity(&t).unwrap().capacity, int(1));
    }

    #[test]
    fn independent_source_has_zero_capacity() {
        let pmf = JointPmf::independent_bits(3).unwrap();
        let r = solve_capacity(&EntropyTable::from_pmf(&pmf, 40).unwrap()).unwrap();
        assert_eq!(r.capacity, int(0));
    }

    #[test]
    fn approximate_tables_are_flagged() {
        let third = rational::ratio(1, 3);
        let pmf = JointPmf::new(
            vec![3, 3],
            (0..3).map(|v| (vec![v, v], third.clone())).collect(),
        )
        .unwrap();
        let table = EntropyTable::from_pmf(&pmf, 40).unwrap();
        assert!(table.is_approximate());
        let r = solve_capacity(&table).unwrap();
        assert!(r.approximate);
        assert!((rational::to_f64(&r.capacity) - 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn report_format() {
        let r = solve_capacity(&k(3)).unwrap();
        let mut r = r;
        r.lambda_star = canonical_lambda_star(&r).lambda;
        let json = serde_json::to_string(&CapacityReport::from(&r)).unwrap();
        assert_eq!(
            json,
            r#"{"capacity":"3/2","lambda":{"[1,2]":"1/2","[1,3]":"1/2","[2,3]":"1/2"}}"#
        );
        let back = FractionalPartition::from_report(3, &r.lambda_star.to_report()).unwrap();
        assert_eq!(back, r.lambda_star);
    }

    fn random_table(rng: &mut ChaCha8Rng) -> EntropyTable {
        // entropies of a random small multigraph PIN keep the table polymatroidal
        let m = rng.gen_range(2..=5);
        let edges: Vec<(usize, usize)> = (0..rng.gen_range(0..=8))
            .map(|_| {
                let u = rng.gen_range(1..=m);
                let mut v = rng.gen_range(1..=m);
                while v == u {
                    v = rng.gen_range(1..=m);
                }
                (u, v)
            })
            .collect();
        pin_subset_entropies(&PinInstance::build(Graph::new(m, edges).unwrap(), 1).unwrap())
    }

    #[test]
    fn weak_duality_against_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let table = random_table(&mut rng);
            let r = solve_capacity(&table).unwrap();
            assert!(r.capacity >= int(0));
            assert!(r.lambda_star.validate().is_ok());
            let best = r.optimum_objective();
            for _ in 0..100 {
                let l = FractionalPartition::random(table.terminals(), &mut rng);
                l.validate().unwrap();
                assert!(l.objective(&table).unwrap() <= best);
            }
        }
    }

    #[test]
    fn scaling_entropies_scales_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let table = random_table(&mut rng);
            let r1 = solve_capacity(&table).unwrap();
            for n in 2..=4 {
                let rn = solve_capacity(&table.scaled(n)).unwrap();
                assert_eq!(rn.capacity, &r1.capacity * int(n));
                assert_eq!(rn.lambda_star, r1.lambda_star);
            }
        }
    }
}
