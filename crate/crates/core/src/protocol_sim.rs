//! Interactive linear communication over a PIN model and exact checkers for
//! common randomness, secret keys and interactive common information.
//!
//! A transcript is interactive when each transmitted row lies in the span of
//! the sender's own edge instances and all earlier rows. Everything here is
//! exact: with linear functions of fair bits every entropy is a rank.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, Echelon};
use crate::multipartite_info::{self, Backend, RankEntropies};
use crate::partition_lp::{self, FractionalPartition};
use crate::pin::{self, PinFile, PinInstance};
use crate::rational::{self, Rational};
use crate::source_model::SubsetMask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    /// 1-based terminal id.
    pub sender: usize,
    pub row: BitVec,
}

/// Ordered public transmissions `f_1, ..., f_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTranscript {
    pin: PinInstance,
    transmissions: Vec<Transmission>,
}

impl LinearTranscript {
    pub fn new(pin: PinInstance) -> Self {
        Self {
            pin,
            transmissions: Vec::new(),
        }
    }

    pub fn from_transmissions(pin: PinInstance, transmissions: Vec<Transmission>) -> Result<Self> {
        let mut t = Self::new(pin);
        for tx in transmissions {
            t.push(tx.sender, tx.row)?;
        }
        Ok(t)
    }

    /// Appends a row. Only shape is checked here; interactivity is checked by
    /// [`validate_transcript`].
    pub fn push(&mut self, sender: usize, row: BitVec) -> Result<()> {
        if sender == 0 || sender > self.pin.terminals() {
            return Err(Error::Argument(format!(
                "sender {sender} outside 1..={}",
                self.pin.terminals()
            )));
        }
        if row.len() != self.pin.column_count() {
            return Err(Error::Dimension(format!(
                "row has {} columns, PIN model has {}",
                row.len(),
                self.pin.column_count()
            )));
        }
        self.transmissions.push(Transmission { sender, row });
        Ok(())
    }

    pub fn pin(&self) -> &PinInstance {
        &self.pin
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self {
            pin: self.pin.clone(),
            transmissions: self.transmissions[..len.min(self.len())].to_vec(),
        }
    }

    /// The communication `F` as a matrix, one row per transmission.
    pub fn comm_matrix(&self) -> BitMatrix {
        let rows = self.transmissions.iter().map(|t| t.row.clone()).collect();
        BitMatrix::new(self.pin.space().clone(), rows).expect("rows checked on push")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TranscriptVerdict {
    pub valid: bool,
    /// 1-based index of the first transmission its sender cannot compute.
    pub first_violation: Option<usize>,
}

/// Span of terminal `i`'s observations and the given rows, expressed on the
/// columns terminal `i` cannot see.
fn terminal_view<'a, I>(pin: &PinInstance, i: usize, rows: I) -> (BitVec, Echelon)
where
    I: IntoIterator<Item = &'a BitVec>,
{
    let hidden = pin.incidence(i).not();
    let mut ech = Echelon::new(pin.column_count());
    for r in rows {
        ech.insert(&r.and(&hidden));
    }
    (hidden, ech)
}

pub fn validate_transcript(t: &LinearTranscript) -> TranscriptVerdict {
    for (j, tx) in t.transmissions.iter().enumerate() {
        let (hidden, ech) = terminal_view(&t.pin, tx.sender, t.transmissions[..j].iter().map(|x| &x.row));
        if !ech.contains(&tx.row.and(&hidden)) {
            return TranscriptVerdict {
                valid: false,
                first_violation: Some(j + 1),
            };
        }
    }
    TranscriptVerdict {
        valid: true,
        first_violation: None,
    }
}

fn check_space(t: &LinearTranscript, m: &BitMatrix, what: &str) -> Result<()> {
    if **m.space() != **t.pin.space() {
        return Err(Error::Dimension(format!(
            "{what} columns do not match the PIN edge instances"
        )));
    }
    Ok(())
}

fn require_valid(t: &LinearTranscript) -> Result<()> {
    let v = validate_transcript(t);
    match v.first_violation {
        None => Ok(()),
        Some(j) => Err(Error::Precondition(format!(
            "transcript is not interactive: transmission {j} is not computable by its sender"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrVerdict {
    pub pass: bool,
    /// First terminal unable to recover some row, with that 1-based row index.
    pub failure: Option<(usize, usize)>,
}

/// Whether every terminal recovers every row of `J` from its own edge
/// instances and the transcript.
pub fn is_common_randomness(j: &BitMatrix, t: &LinearTranscript) -> Result<CrVerdict> {
    check_space(t, j, "J")?;
    for i in 1..=t.pin.terminals() {
        let (hidden, ech) = terminal_view(&t.pin, i, t.transmissions.iter().map(|x| &x.row));
        for (r, row) in j.rows().iter().enumerate() {
            if !ech.contains(&row.and(&hidden)) {
                return Ok(CrVerdict {
                    pass: false,
                    failure: Some((i, r + 1)),
                });
            }
        }
    }
    Ok(CrVerdict {
        pass: true,
        failure: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecretKeyVerdict {
    pub pass: bool,
    pub common_randomness: bool,
    /// `I(K; F)` in bits.
    pub leakage: usize,
    pub key_rank: usize,
    #[serde(with = "rational::serde_pq")]
    pub key_rate: Rational,
    /// `(1/n)` times the number of transmissions.
    #[serde(with = "rational::serde_pq")]
    pub comm_rate_bits: Rational,
    /// `(1/n) rank(F)`.
    #[serde(with = "rational::serde_pq")]
    pub comm_rate_rank: Rational,
    pub meets_capacity: bool,
    /// Some transmission is linearly dependent on the others.
    pub redundant: bool,
}

/// Exact secret-key check: `K` must be common randomness, independent of `F`,
/// and of rate at least `capacity`.
pub fn is_secret_key(
    k: &BitMatrix,
    t: &LinearTranscript,
    capacity: &Rational,
) -> Result<SecretKeyVerdict> {
    let cr = is_common_randomness(k, t)?.pass;
    let f = t.comm_matrix();
    let leakage = k.mutual_information_linear(&f)?;
    let n = t.pin.n() as i64;
    let key_rank = k.rank();
    let f_rank = f.rank();
    let key_rate = rational::ratio(key_rank as i64, n);
    let meets_capacity = key_rate >= *capacity;
    Ok(SecretKeyVerdict {
        pass: cr && leakage == 0 && meets_capacity,
        common_randomness: cr,
        leakage,
        key_rank,
        key_rate,
        comm_rate_bits: rational::ratio(t.len() as i64, n),
        comm_rate_rank: rational::ratio(f_rank as i64, n),
        meets_capacity,
        redundant: f_rank < t.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiVerdict {
    pub pass: bool,
    pub backend: Backend,
    /// `I(X^n | J, F)` in bits.
    #[serde(with = "rational::serde_pq")]
    pub cmi: Rational,
}

/// Whether `(J, F)` leaves zero conditional multipartite information.
pub fn is_interactive_ci(
    j: &BitMatrix,
    t: &LinearTranscript,
    lambda: &FractionalPartition,
) -> Result<CiVerdict> {
    require_valid(t)?;
    if !is_common_randomness(j, t)?.pass {
        return Err(Error::Precondition("J is not recoverable by every terminal".into()));
    }
    let l = j.stack(&t.comm_matrix())?;
    let report = multipartite_info::cmi(&RankEntropies::new(&t.pin, &l)?, lambda)?;
    Ok(CiVerdict {
        pass: report.value == rational::int(0),
        backend: report.backend,
        cmi: report.value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommInequality {
    /// `H(F)`.
    pub h_f: usize,
    /// `Σ_B λ_B H(F | X_{B^c})`.
    #[serde(with = "rational::serde_pq")]
    pub weighted: Rational,
    #[serde(with = "rational::serde_pq")]
    pub margin: Rational,
}

/// `H(L | X_{B^c})` for a matrix over the PIN columns.
fn rank_given_outside(pin: &PinInstance, l: &BitMatrix, b: SubsetMask) -> usize {
    let bc = b.complement(pin.terminals());
    l.rank_on(&pin.incident_to(bc).not())
}

/// Margin of `H(F) >= Σ_B λ_B H(F | X_{B^c})` without checking interactivity.
pub fn comm_inequality_margin(
    t: &LinearTranscript,
    lambda: &FractionalPartition,
) -> Result<CommInequality> {
    lambda.check_terminals(t.pin.terminals())?;
    lambda.validate()?;
    let f = t.comm_matrix();
    let h_f = f.rank();
    let mut weighted = rational::int(0);
    for (b, w) in lambda.iter() {
        weighted += w * rational::int(rank_given_outside(&t.pin, &f, b) as i64);
    }
    Ok(CommInequality {
        h_f,
        margin: rational::int(h_f as i64) - &weighted,
        weighted,
    })
}

/// As [`comm_inequality_margin`], for interactive transcripts only; the
/// margin is then never negative.
pub fn verify_comm_inequality(
    t: &LinearTranscript,
    lambda: &FractionalPartition,
) -> Result<CommInequality> {
    require_valid(t)?;
    comm_inequality_margin(t, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyAccountingReport {
    /// Per-symbol capacity `I(X_M)`.
    #[serde(with = "rational::serde_pq")]
    pub capacity: Rational,
    /// `H(K, F)`.
    pub h_kf: usize,
    /// `Σ_B λ_B H(F | X_{B^c})`.
    #[serde(with = "rational::serde_pq")]
    pub weighted_f: Rational,
    /// `Σ_B λ_B H(K | X_{B^c}, F)`.
    #[serde(with = "rational::serde_pq")]
    pub weighted_k: Rational,
    /// `I(X_M) - H(K,F)/n + weighted_f/n + weighted_k/n`.
    #[serde(with = "rational::serde_pq")]
    pub chain: Rational,
    /// `I(X^n | K, F) / n` evaluated directly.
    #[serde(with = "rational::serde_pq")]
    pub direct: Rational,
    pub chain_matches: bool,
    pub cmi_zero: bool,
    /// `H(K,F)/n >= I(X_M) - I(X^n|K,F)/n`.
    pub wyner_holds: bool,
    #[serde(with = "rational::serde_pq")]
    pub comm_rate: Rational,
    /// `C(m,2) - I(X_M)`, known only for complete graphs.
    #[serde(with = "rational::serde_pq::option")]
    pub comm_lower_bound: Option<Rational>,
    pub bound_holds: bool,
    pub bound_tight: bool,
}

/// Finite-length accounting for a key `K` and transcript `F`: the chain
/// identity for `I(X^n | K, F)` and the communication lower bound.
pub fn key_accounting_report(
    k: &BitMatrix,
    t: &LinearTranscript,
    lambda: &FractionalPartition,
) -> Result<KeyAccountingReport> {
    require_valid(t)?;
    let pin = &t.pin;
    let table = pin::pin_subset_entropies(pin);
    let solved = partition_lp::solve_capacity(&table)?;
    let cert = partition_lp::verify_partition_optimal(&table, lambda)?;
    if !cert.optimal {
        return Err(Error::Argument("λ must be an optimal fractional partition".into()));
    }
    let n = rational::int(pin.n() as i64);
    let capacity = &solved.capacity / &n;
    let sk = is_secret_key(k, t, &capacity)?;
    if !sk.common_randomness || sk.leakage != 0 {
        return Err(Error::Precondition("K is not an exact secret key".into()));
    }

    let f = t.comm_matrix();
    let kf = k.stack(&f)?;
    let h_kf = kf.rank();
    let mut weighted_f = rational::int(0);
    let mut weighted_k = rational::int(0);
    for (b, w) in lambda.iter() {
        let hf = rank_given_outside(pin, &f, b);
        let hkf = rank_given_outside(pin, &kf, b);
        weighted_f += w * rational::int(hf as i64);
        weighted_k += w * rational::int((hkf - hf) as i64);
    }
    let chain = &capacity - rational::int(h_kf as i64) / &n + &weighted_f / &n + &weighted_k / &n;
    let direct = multipartite_info::cmi(&RankEntropies::new(pin, &kf)?, lambda)?.value / &n;
    let zero = rational::int(0);

    let m = pin.terminals() as i64;
    let comm_rate = sk.comm_rate_bits.clone();
    let comm_lower_bound = pin
        .is_complete()
        .then(|| rational::int(m * (m - 1) / 2) - &capacity);
    let (bound_holds, bound_tight) = match &comm_lower_bound {
        Some(b) => (comm_rate >= *b, comm_rate == *b),
        None => (true, false),
    };
    Ok(KeyAccountingReport {
        wyner_holds: rational::int(h_kf as i64) / &n >= &capacity - &direct,
        chain_matches: chain == direct,
        cmi_zero: direct == zero,
        capacity,
        h_kf,
        weighted_f,
        weighted_k,
        chain,
        direct,
        comm_rate,
        comm_lower_bound,
        bound_holds,
        bound_tight,
    })
}

/// A random interactive transcript: each step picks a sender uniformly and a
/// nonzero row uniformly from the span of its edges and the history.
pub fn random_valid_transcript<R: Rng + ?Sized>(
    pin: &PinInstance,
    len: usize,
    rng: &mut R,
) -> LinearTranscript {
    let mut t = LinearTranscript::new(pin.clone());
    let p = pin.column_count();
    let mut senders: Vec<usize> = (1..=pin.terminals()).collect();
    for _ in 0..len {
        senders.shuffle(rng);
        let mut sent = false;
        for &i in &senders {
            let own: Vec<usize> = pin.incidence(i).iter_ones().collect();
            if own.is_empty() && t.is_empty() {
                continue;
            }
            let row = loop {
                let mut row = BitVec::zeros(p);
                for &c in &own {
                    if rng.gen() {
                        row.set(c, true);
                    }
                }
                for tx in &t.transmissions {
                    if rng.gen() {
                        row.xor_assign(&tx.row);
                    }
                }
                if !row.is_zero() {
                    break Some(row);
                }
                // Span can be {0} when the sender sees nothing new.
                if own.is_empty() && t.transmissions.iter().all(|x| x.row.is_zero()) {
                    break None;
                }
            };
            if let Some(row) = row {
                t.push(i, row).expect("row built over PIN columns");
                sent = true;
                break;
            }
        }
        if !sent {
            break;
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionFile {
    pub sender: usize,
    pub row: String,
}

/// JSON form: `{"pin": {...}, "transmissions": [{"sender", "row"}], "key": [...]}`
/// with rows as hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub pin: PinFile,
    pub transmissions: Vec<TransmissionFile>,
    #[serde(default)]
    pub key: Vec<String>,
}

impl TranscriptFile {
    pub fn new(t: &LinearTranscript, key: &BitMatrix) -> Self {
        Self {
            pin: t.pin.to_file(),
            transmissions: t
                .transmissions
                .iter()
                .map(|x| TransmissionFile {
                    sender: x.sender,
                    row: x.row.to_hex(),
                })
                .collect(),
            key: key.to_hex_rows(),
        }
    }

    pub fn into_parts(self) -> Result<(LinearTranscript, BitMatrix)> {
        let pin = PinInstance::from_file(self.pin)?;
        let p = pin.column_count();
        let mut t = LinearTranscript::new(pin);
        for (j, x) in self.transmissions.into_iter().enumerate() {
            let row = BitVec::from_hex(&x.row, p)
                .map_err(|e| Error::Parse(format!("transmission {}: {e}", j + 1)))?;
            t.push(x.sender, row)?;
        }
        let rows = self
            .key
            .iter()
            .enumerate()
            .map(|(r, h)| {
                BitVec::from_hex(h, p).map_err(|e| Error::Parse(format!("key row {}: {e}", r + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let key = BitMatrix::new(t.pin.space().clone(), rows)?;
        Ok((t, key))
    }
}
