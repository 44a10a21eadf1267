//! Explicit joint distributions over `m` terminals and a brute-force entropy
//! oracle.
//!
//! Probabilities are exact rationals. Entropies come in two flavours: a
//! floating value computed from the exact masses, and an exact rational value
//! available whenever every mass involved is of the form `1/2^k` (which is the
//! case for every linear function of fair bits).

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::pin::PinInstance;
use crate::rational::{self, Rational};

/// Maximum number of edge instances [`pin_to_pmf`] will expand by default.
pub const DEFAULT_ORACLE_CAP: usize = 20;

/// A set of terminals, terminal `i` (1-based) stored at bit `i - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(m: usize) -> Self {
        assert!(m < 32, "at most 31 terminals");
        SubsetMask(((1u64 << m) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        assert!((1..32).contains(&i), "terminal ids are 1-based");
        SubsetMask(1 << (i - 1))
    }

    pub fn from_terminals<I: IntoIterator<Item = usize>>(terminals: I) -> Self {
        terminals
            .into_iter()
            .fold(SubsetMask::EMPTY, |acc, i| acc.union(SubsetMask::singleton(i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i >= 1 && i < 32 && self.0 & (1 << (i - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, m: usize) -> Self {
        SubsetMask(!self.0 & Self::full(m).0)
    }

    /// Nonempty and not the whole terminal set.
    pub fn is_proper(self, m: usize) -> bool {
        !self.is_empty() && self != Self::full(m) && self.is_subset_of(Self::full(m))
    }

    /// Terminal ids in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(t + 1)
            }
        })
    }

    /// Every nonempty proper subset of `{1..m}`, in increasing mask order.
    pub fn proper_subsets(m: usize) -> impl Iterator<Item = SubsetMask> {
        let full = Self::full(m).0;
        (1..full).map(SubsetMask)
    }

    /// Every subset of `{1..m}` including the empty and full sets.
    pub fn all_subsets(m: usize) -> impl Iterator<Item = SubsetMask> {
        let full = Self::full(m).0;
        (0..=full).map(SubsetMask)
    }

    /// Sorted-list rendering used as a report key, e.g. `[1,3]`.
    pub fn key(self) -> String {
        let inner: Vec<String> = self.members().map(|i| i.to_string()).collect();
        format!("[{}]", inner.join(","))
    }

    pub fn parse_key(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("subset key {s:?} is not a bracketed list")))?;
        if inner.trim().is_empty() {
            return Ok(SubsetMask::EMPTY);
        }
        let mut mask = SubsetMask::EMPTY;
        for part in inner.split(',') {
            let i: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad terminal id {part:?} in {s:?}")))?;
            if !(1..32).contains(&i) {
                return Err(Error::Parse(format!("terminal id {i} out of range")));
            }
            mask = mask.union(SubsetMask::singleton(i));
        }
        Ok(mask)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Joint distribution of `(X_1, ..., X_m)` over finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    alphabet_sizes: Vec<u32>,
    outcomes: Vec<Vec<u32>>,
    probs: Vec<Rational>,
    uniform: bool,
}

impl JointPmf {
    /// Builds a pmf from `(outcome, probability)` pairs. Zero-probability
    /// entries are dropped; duplicate outcomes are rejected.
    pub fn new(alphabet_sizes: Vec<u32>, entries: Vec<(Vec<u32>, Rational)>) -> Result<Self> {
        let m = alphabet_sizes.len();
        if m == 0 {
            return Err(Error::Argument("a pmf needs at least one terminal".into()));
        }
        if m > 31 {
            return Err(Error::Argument("at most 31 terminals are supported".into()));
        }
        if alphabet_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Argument("alphabet sizes must be positive".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        let mut total = Rational::zero();
        let mut outcomes = Vec::with_capacity(entries.len());
        let mut probs = Vec::with_capacity(entries.len());
        for (x, p) in entries {
            if x.len() != m {
                return Err(Error::Argument(format!(
                    "outcome {x:?} has {} symbols, expected {m}",
                    x.len()
                )));
            }
            if let Some((i, s)) = x.iter().enumerate().find(|(i, &s)| s >= alphabet_sizes[*i]) {
                return Err(Error::Argument(format!(
                    "symbol {s} of terminal {} exceeds alphabet size {}",
                    i + 1,
                    alphabet_sizes[i]
                )));
            }
            if p.is_negative() {
                return Err(Error::Argument(format!("negative probability for {x:?}")));
            }
            if !seen.insert(x.clone()) {
                return Err(Error::Argument(format!("duplicate outcome {x:?}")));
            }
            total += &p;
            if !p.is_zero() {
                outcomes.push(x);
                probs.push(p);
            }
        }
        if !total.is_one() {
            return Err(Error::Argument(format!(
                "probabilities sum to {} instead of 1",
                rational::to_pq(&total)
            )));
        }
        let uniform = probs.windows(2).all(|w| w[0] == w[1]);
        Ok(Self {
            alphabet_sizes,
            outcomes,
            probs,
            uniform,
        })
    }

    /// Uniform distribution over the given distinct outcomes.
    pub fn uniform(alphabet_sizes: Vec<u32>, outcomes: Vec<Vec<u32>>) -> Result<Self> {
        let n = outcomes.len() as i64;
        if n == 0 {
            return Err(Error::Argument("empty support".into()));
        }
        let p = rational::ratio(1, n);
        Self::new(alphabet_sizes, outcomes.into_iter().map(|x| (x, p.clone())).collect())
    }

    /// `p` terminals, each observing one independent fair bit.
    pub fn independent_bits(p: usize) -> Result<Self> {
        if p > DEFAULT_ORACLE_CAP {
            return Err(Error::OracleScale(format!(
                "{p} bits exceeds the oracle cap of {DEFAULT_ORACLE_CAP}"
            )));
        }
        let outcomes = (0..1u64 << p)
            .map(|x| (0..p).map(|i| ((x >> i) & 1) as u32).collect())
            .collect();
        Self::uniform(vec![2; p], outcomes)
    }

    pub fn terminals(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }

    pub fn support(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.outcomes.iter().map(Vec::as_slice).zip(&self.probs)
    }

    pub fn support_size(&self) -> usize {
        self.outcomes.len()
    }

    fn check_subset(&self, a: SubsetMask) -> Result<()> {
        if !a.is_subset_of(SubsetMask::full(self.terminals())) {
            return Err(Error::Argument(format!(
                "subset {a} mentions terminals beyond {}",
                self.terminals()
            )));
        }
        Ok(())
    }

    fn project(&self, outcome: &[u32], a: SubsetMask) -> Vec<u32> {
        a.members().map(|i| outcome[i - 1]).collect()
    }

    /// Masses of the distribution of `key(outcome)`.
    fn masses<K, F>(&self, key: F) -> Vec<Rational>
    where
        K: Hash + Eq,
        F: Fn(usize, &[u32]) -> K,
    {
        if self.uniform {
            let mut counts: HashMap<K, usize> = HashMap::new();
            for (k, x) in self.outcomes.iter().enumerate() {
                *counts.entry(key(k, x)).or_default() += 1;
            }
            let total = self.outcomes.len() as i64;
            counts
                .into_values()
                .map(|c| rational::ratio(c as i64, total))
                .collect()
        } else {
            let mut acc: HashMap<K, Rational> = HashMap::new();
            for (k, (x, p)) in self.outcomes.iter().zip(&self.probs).enumerate() {
                *acc.entry(key(k, x)).or_insert_with(Rational::zero) += p;
            }
            acc.into_values().collect()
        }
    }

    /// Shannon entropy of the marginal on `a`; zero for the empty set.
    pub fn subset_entropy(&self, a: SubsetMask) -> Result<f64> {
        self.check_subset(a)?;
        Ok(shannon(&self.masses(|_, x| self.project(x, a))))
    }

    /// Exact marginal entropy when every marginal mass is `1/2^k`.
    pub fn subset_entropy_exact(&self, a: SubsetMask) -> Result<Option<Rational>> {
        self.check_subset(a)?;
        Ok(shannon_exact(&self.masses(|_, x| self.project(x, a))))
    }

    /// `H(X_A | X_C) = H(X_{A∪C}) - H(X_C)` for disjoint `A`, `C`.
    pub fn conditional_subset_entropy(&self, a: SubsetMask, c: SubsetMask) -> Result<f64> {
        if !a.is_disjoint(c) {
            return Err(Error::Argument(format!("subsets {a} and {c} overlap")));
        }
        Ok(self.subset_entropy(a.union(c))? - self.subset_entropy(c)?)
    }

    /// Evaluates `f` on every support point, failing if it is undefined anywhere.
    pub fn tabulate<K, F>(&self, f: F) -> Result<Vec<K>>
    where
        F: Fn(&[u32]) -> Option<K>,
    {
        self.outcomes
            .iter()
            .map(|x| {
                f(x).ok_or_else(|| {
                    Error::Argument(format!("function undefined on support point {x:?}"))
                })
            })
            .collect()
    }

    /// Entropy of `f(X)` where `f` must be defined on the whole support.
    pub fn entropy_of_function<K, F>(&self, f: F) -> Result<f64>
    where
        K: Hash + Eq,
        F: Fn(&[u32]) -> Option<K>,
    {
        let values = self.tabulate(f)?;
        Ok(shannon(&self.masses(|k, _| &values[k])))
    }

    /// `H(f(X) | X_C)`.
    pub fn conditional_entropy_of_function<K, F>(&self, f: F, given: SubsetMask) -> Result<f64>
    where
        K: Hash + Eq,
        F: Fn(&[u32]) -> Option<K>,
    {
        self.check_subset(given)?;
        let values = self.tabulate(f)?;
        let joint = shannon(&self.masses(|k, x| (&values[k], self.project(x, given))));
        Ok(joint - self.subset_entropy(given)?)
    }

    /// Entropy of `(X_A, g)` for a precomputed per-outcome label `g`
    /// (as produced by [`JointPmf::tabulate`]); `None` skips the label.
    pub fn joint_entropy_with<K: Hash + Eq>(&self, a: SubsetMask, labels: Option<&[K]>) -> f64 {
        match labels {
            Some(l) => shannon(&self.masses(|k, x| (&l[k], self.project(x, a)))),
            None => shannon(&self.masses(|_, x| self.project(x, a))),
        }
    }

    /// Exact version of [`JointPmf::joint_entropy_with`].
    pub fn joint_entropy_with_exact<K: Hash + Eq>(
        &self,
        a: SubsetMask,
        labels: Option<&[K]>,
    ) -> Option<Rational> {
        match labels {
            Some(l) => shannon_exact(&self.masses(|k, x| (&l[k], self.project(x, a)))),
            None => shannon_exact(&self.masses(|_, x| self.project(x, a))),
        }
    }

    /// The `n`-fold i.i.d. extension. Terminal `i`'s symbol in the product is
    /// the mixed-radix encoding of its `n` symbols, first copy least significant.
    pub fn power(&self, n: usize, max_outcomes: usize) -> Result<JointPmf> {
        if n == 0 {
            return Err(Error::Argument("power needs n >= 1".into()));
        }
        let support = self.outcomes.len();
        let total = (support as f64).powi(n as i32);
        if total > max_outcomes as f64 {
            return Err(Error::OracleScale(format!(
                "{support}^{n} outcomes exceed the cap of {max_outcomes}"
            )));
        }
        let sizes = self
            .alphabet_sizes
            .iter()
            .map(|&s| {
                (s as u64)
                    .checked_pow(n as u32)
                    .filter(|&v| v <= u32::MAX as u64)
                    .map(|v| v as u32)
                    .ok_or_else(|| Error::OracleScale(format!("alphabet {s}^{n} too large")))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = self.terminals();
        let mut entries = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; n];
        loop {
            let mut sym = vec![0u32; m];
            let mut p = Rational::one();
            for &k in idx.iter().rev() {
                let x = &self.outcomes[k];
                for i in 0..m {
                    sym[i] = sym[i] * self.alphabet_sizes[i] + x[i];
                }
                p *= &self.probs[k];
            }
            entries.push((sym, p));
            // odometer
            let mut pos = 0;
            loop {
                if pos == n {
                    return JointPmf::new(sizes, entries);
                }
                idx[pos] += 1;
                if idx[pos] < support {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    pub fn to_file(&self) -> PmfFile {
        PmfFile {
            terminals: self.terminals(),
            alphabet_sizes: self.alphabet_sizes.clone(),
            pmf: self
                .support()
                .map(|(x, p)| (x.to_vec(), rational::to_pq(p)))
                .collect(),
        }
    }
}

/// On-disk pmf format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmfFile {
    pub terminals: usize,
    pub alphabet_sizes: Vec<u32>,
    pub pmf: Vec<(Vec<u32>, String)>,
}

impl PmfFile {
    pub fn into_pmf(self) -> Result<JointPmf> {
        if self.terminals != self.alphabet_sizes.len() {
            return Err(Error::Parse(format!(
                "terminals = {} but {} alphabet sizes given",
                self.terminals,
                self.alphabet_sizes.len()
            )));
        }
        let entries = self
            .pmf
            .into_iter()
            .map(|(x, p)| Ok((x, rational::parse(&p)?)))
            .collect::<Result<Vec<_>>>()?;
        JointPmf::new(self.alphabet_sizes, entries)
    }
}

pub fn shannon(masses: &[Rational]) -> f64 {
    masses
        .iter()
        .map(rational::to_f64)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Exact entropy when every mass is `1/2^k`; `None` otherwise.
pub fn shannon_exact(masses: &[Rational]) -> Option<Rational> {
    let mut h = Rational::zero();
    for p in masses.iter().filter(|p| !p.is_zero()) {
        let k = rational::neg_log2_dyadic(p)?;
        h += p * rational::int(k as i64);
    }
    Some(h)
}

/// Expands a PIN instance into its joint pmf: one equiprobable outcome per
/// assignment of the edge bits, each terminal observing its incident bits
/// (packed in column order, first incident column least significant).
pub fn pin_to_pmf(pin: &PinInstance, cap: usize) -> Result<JointPmf> {
    let p = pin.column_count();
    if p > cap {
        return Err(Error::OracleScale(format!(
            "{p} edge instances exceed the oracle cap of {cap}"
        )));
    }
    let m = pin.terminals();
    let incident: Vec<Vec<usize>> = (1..=m).map(|i| pin.incidence(i).iter_ones().collect()).collect();
    let sizes = incident
        .iter()
        .map(|cols| {
            1u32.checked_shl(cols.len() as u32)
                .ok_or_else(|| Error::OracleScale("terminal alphabet too large".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = (0..1u64 << p)
        .map(|xi| {
            incident
                .iter()
                .map(|cols| {
                    cols.iter()
                        .enumerate()
                        .fold(0u32, |acc, (k, &c)| acc | ((((xi >> c) & 1) as u32) << k))
                })
                .collect()
        })
        .collect();
    JointPmf::uniform(sizes, outcomes)
}

/// Recovers the edge-bit vector `ξ` from an outcome of [`pin_to_pmf`].
pub fn pin_outcome_to_xi(pin: &PinInstance, outcome: &[u32]) -> BitVec {
    let mut xi = BitVec::zeros(pin.column_count());
    for (i, &sym) in outcome.iter().enumerate() {
        for (k, c) in pin.incidence(i + 1).iter_ones().enumerate() {
            if (sym >> k) & 1 == 1 {
                xi.set(c, true);
            }
        }
    }
    xi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;
    use crate::pin::Graph;
    use crate::rational::ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn copy_bit() -> JointPmf {
        JointPmf::uniform(vec![2, 2], vec![vec![0, 0], vec![1, 1]]).unwrap()
    }

    fn s(ts: &[usize]) -> SubsetMask {
        SubsetMask::from_terminals(ts.iter().copied())
    }

    fn k3() -> JointPmf {
        let pin = PinInstance::build(Graph::complete(3), 1).unwrap();
        pin_to_pmf(&pin, DEFAULT_ORACLE_CAP).unwrap()
    }

    #[test]
    fn subset_mask_basics() {
        let b = s(&[1, 3]);
        assert_eq!(b.key(), "[1,3]");
        assert_eq!(SubsetMask::parse_key("[1, 3]").unwrap(), b);
        assert_eq!(b.complement(4), s(&[2, 4]));
        assert!(b.is_proper(3));
        assert!(!SubsetMask::full(3).is_proper(3));
        assert_eq!(SubsetMask::proper_subsets(4).count(), 14);
        assert!(SubsetMask::parse_key("1,2").is_err());
    }

    #[test]
    fn subset_entropy_examples() {
        let p = copy_bit();
        assert_eq!(p.subset_entropy(s(&[1])).unwrap(), 1.0);
        assert_eq!(p.subset_entropy(s(&[1, 2])).unwrap(), 1.0);
        assert_eq!(p.subset_entropy(SubsetMask::EMPTY).unwrap(), 0.0);
        assert_eq!(k3().subset_entropy(s(&[1, 2, 3])).unwrap(), 3.0);
    }

    #[test]
    fn conditional_subset_entropy_examples() {
        let p = copy_bit();
        assert_eq!(p.conditional_subset_entropy(s(&[1]), s(&[2])).unwrap(), 0.0);
        assert_eq!(k3().conditional_subset_entropy(s(&[1, 2]), s(&[3])).unwrap(), 1.0);
        assert_eq!(
            p.conditional_subset_entropy(s(&[1]), SubsetMask::EMPTY).unwrap(),
            p.subset_entropy(s(&[1])).unwrap()
        );
        assert!(matches!(
            p.conditional_subset_entropy(s(&[1]), s(&[1, 2])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn pin_to_pmf_examples() {
        let k2 = pin_to_pmf(&PinInstance::build(Graph::complete(2), 1).unwrap(), 20).unwrap();
        assert_eq!(k2.support_size(), 2);
        assert!(k2.support().all(|(x, _)| x[0] == x[1]));

        let k3 = k3();
        assert_eq!(k3.support_size(), 8);
        assert_eq!(k3.alphabet_sizes(), &[4, 4, 4]);
        assert!(k3.support().all(|(_, p)| *p == ratio(1, 8)));

        let path = Graph::new(3, vec![(1, 2), (2, 3)]).unwrap();
        let path = pin_to_pmf(&PinInstance::build(path, 1).unwrap(), 20).unwrap();
        assert_eq!(path.support_size(), 4);
        assert_eq!(path.alphabet_sizes(), &[2, 4, 2]);
        assert_eq!(path.subset_entropy(s(&[2])).unwrap(), 2.0);
        assert_eq!(path.subset_entropy(s(&[1, 3])).unwrap(), 2.0);
    }

    #[test]
    fn pin_to_pmf_cap() {
        let pin = PinInstance::build(Graph::complete(7), 1).unwrap();
        assert!(matches!(pin_to_pmf(&pin, 20), Err(Error::OracleScale(_))));
    }

    #[test]
    fn entropy_of_function_examples() {
        let k3p = k3();
        assert_eq!(k3p.entropy_of_function(|_| Some(())).unwrap(), 0.0);
        assert_eq!(k3p.entropy_of_function(|x| Some(x.to_vec())).unwrap(), 3.0);
        // terminal 1 observes edges {1,2} and {1,3} as its two bits
        let h = k3p
            .entropy_of_function(|x| Some((x[0] & 1) ^ ((x[0] >> 1) & 1)))
            .unwrap();
        assert_eq!(h, 1.0);
        // same function as a one-row matrix over the PIN columns
        let pin = PinInstance::build(Graph::complete(3), 1).unwrap();
        let mut row = BitVec::zeros(3);
        for c in pin.incidence(1).iter_ones() {
            row.set(c, true);
        }
        let l = BitMatrix::new(pin.space().clone(), vec![row]).unwrap();
        let via_matrix = k3p
            .entropy_of_function(|x| Some(l.apply(&pin_outcome_to_xi(&pin, x))))
            .unwrap();
        assert_eq!(via_matrix, h);
        assert_eq!(l.rank() as f64, h);
    }

    #[test]
    fn partial_function_is_rejected() {
        let p = copy_bit();
        let err = p
            .entropy_of_function(|x| if x[0] == 0 { Some(0) } else { None })
            .unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn rejects_bad_pmfs() {
        assert!(JointPmf::new(vec![2], vec![(vec![0], ratio(1, 2))]).is_err());
        assert!(JointPmf::new(vec![2], vec![(vec![2], ratio(1, 1))]).is_err());
        assert!(JointPmf::new(
            vec![2],
            vec![(vec![0], ratio(3, 2)), (vec![1], ratio(-1, 2))]
        )
        .is_err());
        assert!(JointPmf::new(vec![2], vec![(vec![0], ratio(1, 2)), (vec![0], ratio(1, 2))]).is_err());
    }

    #[test]
    fn exact_entropy_is_dyadic_only() {
        let p = copy_bit();
        assert_eq!(p.subset_entropy_exact(s(&[1])).unwrap(), Some(rational::int(1)));
        let third = JointPmf::uniform(vec![3], vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(third.subset_entropy_exact(s(&[1])).unwrap(), None);
        assert!((third.subset_entropy(s(&[1])).unwrap() - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn power_scales_entropy() {
        let skew = JointPmf::new(
            vec![2, 2],
            vec![
                (vec![0, 0], ratio(1, 2)),
                (vec![0, 1], ratio(1, 4)),
                (vec![1, 1], ratio(1, 4)),
            ],
        )
        .unwrap();
        let sq = skew.power(3, 1 << 12).unwrap();
        assert_eq!(sq.support_size(), 27);
        assert_eq!(sq.alphabet_sizes(), &[8, 8]);
        for a in SubsetMask::all_subsets(2) {
            let h1 = skew.subset_entropy(a).unwrap();
            let h3 = sq.subset_entropy(a).unwrap();
            assert!((h3 - 3.0 * h1).abs() < 1e-12);
        }
        assert!(matches!(skew.power(20, 1000), Err(Error::OracleScale(_))));
    }

    #[test]
    fn file_round_trip() {
        let p = copy_bit();
        let json = serde_json::to_string(&p.to_file()).unwrap();
        assert_eq!(json, r#"{"terminals":2,"alphabet_sizes":[2,2],"pmf":[[[0,0],"1/2"],[[1,1],"1/2"]]}"#);
        let back: PmfFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_pmf().unwrap(), p);
    }

    fn random_pmf(rng: &mut ChaCha8Rng) -> JointPmf {
        let m = rng.gen_range(2..=4);
        let sizes: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
        let mut entries = Vec::new();
        let mut weights = Vec::new();
        let total_outcomes: u32 = sizes.iter().product();
        for code in 0..total_outcomes {
            let mut c = code;
            let x: Vec<u32> = sizes
                .iter()
                .map(|&sz| {
                    let v = c % sz;
                    c /= sz;
                    v
                })
                .collect();
            let w: i64 = rng.gen_range(0..5);
            entries.push(x);
            weights.push(w);
        }
        if weights.iter().all(|&w| w == 0) {
            weights[0] = 1;
        }
        let sum: i64 = weights.iter().sum();
        JointPmf::new(
            sizes,
            entries
                .into_iter()
                .zip(weights)
                .map(|(x, w)| (x, ratio(w, sum)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn submodularity_and_chain_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let p = random_pmf(&mut rng);
            let m = p.terminals();
            for a in SubsetMask::all_subsets(m) {
                for b in SubsetMask::all_subsets(m) {
                    let lhs = p.subset_entropy(a).unwrap() + p.subset_entropy(b).unwrap();
                    let rhs = p.subset_entropy(a.union(b)).unwrap()
                        + p.subset_entropy(a.intersection(b)).unwrap();
                    assert!(lhs >= rhs - 1e-12);
                    if a.is_disjoint(b) {
                        let cond = p.conditional_subset_entropy(a, b).unwrap();
                        let diff = p.subset_entropy(a.union(b)).unwrap() - p.subset_entropy(b).unwrap();
                        assert!((cond - diff).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
