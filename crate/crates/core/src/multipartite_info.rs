//! Conditional multipartite information
//!
//! ```text
//! I(X_M^n | L) = H(X_M^n | L) - Σ_B λ*_B H(X_B^n | X_{B^c}^n, L)
//! ```
//!
//! for a function `L` of the observations, and the identities that tie it to
//! `H(L)`. Two backends supply the entropies: [`OracleEntropies`] enumerates an
//! explicit pmf, [`RankEntropies`] reads them off GF(2) ranks for a linear `L`
//! on a PIN model. The weights `λ*` are always passed in explicitly.

use std::collections::HashMap;
use std::hash::Hash;


use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::partition_lp::FractionalPartition;
use crate::pin::PinInstance;
use crate::rational::{Bits, Rational};
use crate::source_model::{JointPmf, SubsetMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Oracle,
    Rank,
}

/// Entropy quantities entering the conditional multipartite information.
/// `B` ranges over nonempty proper subsets; `X` denotes `X_M^n`.
pub trait ConditionalEntropies {
    type Value: Bits;

    fn backend(&self) -> Backend;
    fn terminals(&self) -> usize;
    /// `H(X)`.
    fn h_x(&self) -> Result<Self::Value>;
    /// `H(X_B | X_{B^c})`.
    fn h_block(&self, b: SubsetMask) -> Result<Self::Value>;
    /// `H(X | L)`.
    fn h_x_given_l(&self) -> Result<Self::Value>;
    /// `H(X_B | X_{B^c}, L)`.
    fn h_block_given_l(&self, b: SubsetMask) -> Result<Self::Value>;
    /// `H(L)`.
    fn h_l(&self) -> Result<Self::Value>;
    /// `H(L | X_{B^c})`.
    fn h_l_given(&self, b: SubsetMask) -> Result<Self::Value>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmiTerm<V> {
    pub subset: SubsetMask,
    pub weight: Rational,
    /// `H(X_B^n | X_{B^c}^n, L)`.
    pub conditional: V,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmiReport<V> {
    pub value: V,
    pub backend: Backend,
    pub lambda_used: FractionalPartition,
    /// `H(X_M^n | L)`.
    pub h_x_given_l: V,
    pub terms: Vec<CmiTerm<V>>,
}

impl<V: Bits> CmiReport<V> {
    /// Recombines the components; equals `value` for a consistent report.
    pub fn recombined(&self) -> V {
        self.terms.iter().fold(self.h_x_given_l.clone(), |acc, t| {
            acc - V::from_rational(&t.weight) * t.conditional.clone()
        })
    }
}

fn check_lambda(lambda: &FractionalPartition, m: usize) -> Result<()> {
    lambda.check_terminals(m)?;
    lambda.validate()
}

/// Evaluates the conditional multipartite information on any backend.
pub fn cmi<S: ConditionalEntropies>(
    src: &S,
    lambda: &FractionalPartition,
) -> Result<CmiReport<S::Value>> {
    check_lambda(lambda, src.terminals())?;
    let h_x_given_l = src.h_x_given_l()?;
    let mut value = h_x_given_l.clone();
    let mut terms = Vec::with_capacity(lambda.support_len());
    for (b, w) in lambda.iter() {
        let conditional = src.h_block_given_l(b)?;
        value = value - S::Value::from_rational(w) * conditional.clone();
        terms.push(CmiTerm {
            subset: b,
            weight: w.clone(),
            conditional,
        });
    }
    Ok(CmiReport {
        value,
        backend: src.backend(),
        lambda_used: lambda.clone(),
        h_x_given_l,
        terms,
    })
}

/// `H(X) - Σ_B λ_B H(X_B | X_{B^c})`, i.e. `n I(X_M)` when `λ` is optimal.
pub fn extended_capacity<S: ConditionalEntropies>(
    src: &S,
    lambda: &FractionalPartition,
) -> Result<S::Value> {
    check_lambda(lambda, src.terminals())?;
    let mut v = src.h_x()?;
    for (b, w) in lambda.iter() {
        v = v - S::Value::from_rational(w) * src.h_block(b)?;
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityIdentityReport<V> {
    /// `n I(X_M)`.
    pub n_capacity: V,
    pub cmi: V,
    pub h_l: V,
    /// `Σ_B λ_B H(L | X_{B^c})`.
    pub weighted_h_l: V,
    /// `n I(X_M) - [cmi + H(L) - Σ_B λ_B H(L | X_{B^c})]`; zero in theory.
    pub residual: V,
}

fn weighted_h_l<S: ConditionalEntropies>(src: &S, lambda: &FractionalPartition) -> Result<S::Value> {
    let mut acc = S::Value::zero();
    for (b, w) in lambda.iter() {
        acc = acc + S::Value::from_rational(w) * src.h_l_given(b)?;
    }
    Ok(acc)
}

/// Residual of `n I(X_M) = I(X^n|L) + H(L) - Σ_B λ_B H(L | X_{B^c}^n)`.
pub fn verify_capacity_identity<S: ConditionalEntropies>(
    src: &S,
    lambda: &FractionalPartition,
) -> Result<CapacityIdentityReport<S::Value>> {
    let n_capacity = extended_capacity(src, lambda)?;
    let cmi = cmi(src, lambda)?.value;
    let h_l = src.h_l()?;
    let weighted = weighted_h_l(src, lambda)?;
    let residual = n_capacity.clone() - (cmi.clone() + h_l.clone() - weighted.clone());
    Ok(CapacityIdentityReport {
        n_capacity,
        cmi,
        h_l,
        weighted_h_l: weighted,
        residual,
    })
}

/// Margin of `H(L) >= n I(X_M) - I(X^n | L)`; never negative.
pub fn wyner_bound_check<S: ConditionalEntropies>(
    src: &S,
    lambda: &FractionalPartition,
) -> Result<S::Value> {
    let n_capacity = extended_capacity(src, lambda)?;
    let cmi = cmi(src, lambda)?.value;
    Ok(src.h_l()? - (n_capacity - cmi))
}

/// Rank backend: `L` is a matrix over the edge-instance columns of a PIN model.
///
/// With `E_A` the instances incident to `A`, `H(X_A) = |E_A|` and, by the
/// rank-entropy lemma, `H(L | X_A) = rank(L restricted to the complement of E_A)`.
pub struct RankEntropies<'a> {
    pin: &'a PinInstance,
    l: &'a BitMatrix,
    rank_l: usize,
}

impl<'a> RankEntropies<'a> {
    pub fn new(pin: &'a PinInstance, l: &'a BitMatrix) -> Result<Self> {
        if **l.space() != **pin.space() {
            return Err(Error::Dimension(
                "matrix columns do not match the PIN edge instances".into(),
            ));
        }
        Ok(Self {
            pin,
            l,
            rank_l: l.rank(),
        })
    }

    fn total(&self) -> usize {
        self.pin.column_count()
    }

    fn outside(&self, b: SubsetMask) -> (usize, BitVec) {
        let bc = b.complement(self.pin.terminals());
        let seen = self.pin.incident_to(bc);
        (seen.count_ones(), seen.not())
    }
}

impl ConditionalEntropies for RankEntropies<'_> {
    type Value = Rational;

    fn backend(&self) -> Backend {
        Backend::Rank
    }

    fn terminals(&self) -> usize {
        self.pin.terminals()
    }

    fn h_x(&self) -> Result<Rational> {
        Ok(Rational::from_count(self.total()))
    }

    fn h_block(&self, b: SubsetMask) -> Result<Rational> {
        let (seen, _) = self.outside(b);
        Ok(Rational::from_count(self.total() - seen))
    }

    fn h_x_given_l(&self) -> Result<Rational> {
        Ok(Rational::from_count(self.total() - self.rank_l))
    }

    fn h_block_given_l(&self, b: SubsetMask) -> Result<Rational> {
        let (seen, unseen) = self.outside(b);
        Ok(Rational::from_count(self.total() - seen - self.l.rank_on(&unseen)))
    }

    fn h_l(&self) -> Result<Rational> {
        Ok(Rational::from_count(self.rank_l))
    }

    fn h_l_given(&self, b: SubsetMask) -> Result<Rational> {
        let (_, unseen) = self.outside(b);
        Ok(Rational::from_count(self.l.rank_on(&unseen)))
    }
}

/// Oracle backend: enumerates an explicit pmf for `X_M^n` and an arbitrary
/// function `L` of it.
pub struct OracleEntropies<'a> {
    pmf: &'a JointPmf,
    labels: Vec<usize>,
}

impl<'a> OracleEntropies<'a> {
    /// Tabulates `L`; fails if it is undefined anywhere on the support.
    pub fn new<K, F>(pmf: &'a JointPmf, l: F) -> Result<Self>
    where
        K: Hash + Eq,
        F: Fn(&[u32]) -> Option<K>,
    {
        let values = pmf.tabulate(l)?;
        let mut ids: HashMap<K, usize> = HashMap::new();
        let labels = values
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Ok(Self { pmf, labels })
    }

    fn joint(&self, a: SubsetMask, with_l: bool) -> f64 {
        self.pmf
            .joint_entropy_with(a, with_l.then_some(self.labels.as_slice()))
    }

    fn full(&self) -> SubsetMask {
        SubsetMask::full(self.pmf.terminals())
    }

    fn outside(&self, b: SubsetMask) -> SubsetMask {
        b.complement(self.pmf.terminals())
    }

    /// Same quantities evaluated exactly; requires every mass to be `1/2^k`.
    pub fn exact(&self) -> ExactOracle<'_, 'a> {
        ExactOracle { inner: self }
    }
}

impl ConditionalEntropies for OracleEntropies<'_> {
    type Value = f64;

    fn backend(&self) -> Backend {
        Backend::Oracle
    }

    fn terminals(&self) -> usize {
        self.pmf.terminals()
    }

    fn h_x(&self) -> Result<f64> {
        Ok(self.joint(self.full(), false))
    }

    fn h_block(&self, b: SubsetMask) -> Result<f64> {
        Ok(self.joint(self.full(), false) - self.joint(self.outside(b), false))
    }

    fn h_x_given_l(&self) -> Result<f64> {
        Ok(self.joint(self.full(), true) - self.joint(SubsetMask::EMPTY, true))
    }

    fn h_block_given_l(&self, b: SubsetMask) -> Result<f64> {
        Ok(self.joint(self.full(), true) - self.joint(self.outside(b), true))
    }

    fn h_l(&self) -> Result<f64> {
        Ok(self.joint(SubsetMask::EMPTY, true))
    }

    fn h_l_given(&self, b: SubsetMask) -> Result<f64> {
        let c = self.outside(b);
        Ok(self.joint(c, true) - self.joint(c, false))
    }
}

/// Rational-mode view of an [`OracleEntropies`].
pub struct ExactOracle<'o, 'a> {
    inner: &'o OracleEntropies<'a>,
}

impl ExactOracle<'_, '_> {
    fn joint(&self, a: SubsetMask, with_l: bool) -> Result<Rational> {
        self.inner
            .pmf
            .joint_entropy_with_exact(a, with_l.then_some(self.inner.labels.as_slice()))
            .ok_or_else(|| {
                Error::Argument("distribution has non-dyadic masses; exact mode unavailable".into())
            })
    }
}

impl ConditionalEntropies for ExactOracle<'_, '_> {
    type Value = Rational;

    fn backend(&self) -> Backend {
        Backend::Oracle
    }

    fn terminals(&self) -> usize {
        self.inner.terminals()
    }

    fn h_x(&self) -> Result<Rational> {
        self.joint(self.inner.full(), false)
    }

    fn h_block(&self, b: SubsetMask) -> Result<Rational> {
        Ok(self.joint(self.inner.full(), false)? - self.joint(self.inner.outside(b), false)?)
    }

    fn h_x_given_l(&self) -> Result<Rational> {
        Ok(self.joint(self.inner.full(), true)? - self.joint(SubsetMask::EMPTY, true)?)
    }

    fn h_block_given_l(&self, b: SubsetMask) -> Result<Rational> {
        Ok(self.joint(self.inner.full(), true)? - self.joint(self.inner.outside(b), true)?)
    }

    fn h_l(&self) -> Result<Rational> {
        self.joint(SubsetMask::EMPTY, true)
    }

    fn h_l_given(&self, b: SubsetMask) -> Result<Rational> {
        let c = self.inner.outside(b);
        Ok(self.joint(c, true)? - self.joint(c, false)?)
    }
}

/// Oracle evaluation of the conditional multipartite information.
pub fn cmi_oracle<K, F>(pmf: &JointPmf, l: F, lambda: &FractionalPartition) -> Result<CmiReport<f64>>
where
    K: Hash + Eq,
    F: Fn(&[u32]) -> Option<K>,
{
    cmi(&OracleEntropies::new(pmf, l)?, lambda)
}

/// `true` when `|value|` is within `tol`; for reporting residuals.
pub fn is_negligible<V: Bits>(value: &V, tol: f64) -> bool {
    value.abs_value().to_f64() <= tol
}
