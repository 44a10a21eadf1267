//! Subcommand implementations. Each returns a [`RunReport`]; input problems
//! surface as errors, failed checks as `passed = false`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use skcomm::gf2::MatrixFile;
use skcomm::multipartite_info::{self, RankEntropies};
use skcomm::partition_lp::{canonical_lambda_star, solve_capacity, CanonicalLambda, EntropyTable};
use skcomm::pin::{
    self, cmi_rank, cmi_rank_lower_bound, compile_tree_protocol, incidence_rank_inequality,
    pack_spanning_trees, packing_rate, GraphFile, PinFile,
};
use skcomm::protocol_sim::{
    is_common_randomness, is_interactive_ci, is_secret_key, key_accounting_report, validate_transcript,
    TranscriptFile,
};
use skcomm::rational::{self, Rational, DEFAULT_DENOMINATOR_BITS};
use skcomm::source_model::PmfFile;
use skcomm::{BitMatrix, Graph, LinearTranscript, PinInstance};

use crate::report::RunReport;
use crate::suites::{self, Suite};

fn pq(r: &Rational) -> String {
    rational::to_pq(r)
}

/// Where a PIN model comes from.
#[derive(Debug, Clone)]
pub enum PinSource {
    Complete(usize),
    File(String),
}

/// A loaded PIN model with the bytes it was built from.
struct LoadedPin {
    pin: PinInstance,
    name: String,
    bytes: Vec<u8>,
}

fn read(path: &str) -> Result<Vec<u8>> {
    fs::read(Path::new(path)).with_context(|| format!("cannot read {path}"))
}

/// Parses a graph as `{"vertices","edges"[,"n"]}` JSON or as an edge list.
/// Returns the graph and the replication count stored in the file, if any.
pub fn parse_graph(text: &str) -> Result<(Graph, Option<usize>)> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).context("malformed graph JSON")?;
        if v.get("n").is_some() {
            let f: PinFile = serde_json::from_value(v).context("malformed PIN JSON")?;
            let n = f.n;
            let g = GraphFile {
                vertices: f.vertices,
                edges: f.edges,
            }
            .into_graph()?;
            return Ok((g, Some(n)));
        }
        let f: GraphFile = serde_json::from_value(v).context("malformed graph JSON")?;
        return Ok((f.into_graph()?, None));
    }
    Ok((Graph::parse_edge_list(text)?, None))
}

fn load_pin(source: &PinSource, n: Option<usize>) -> Result<LoadedPin> {
    match source {
        PinSource::Complete(m) => {
            if *m < 2 {
                bail!("--complete needs m >= 2");
            }
            let n = n.unwrap_or(1);
            Ok(LoadedPin {
                pin: PinInstance::complete(*m, n)?,
                name: "complete".into(),
                bytes: format!("K{m} n={n}").into_bytes(),
            })
        }
        PinSource::File(path) => {
            let bytes = read(path)?;
            let text = String::from_utf8(bytes.clone()).context("graph file is not UTF-8")?;
            let (graph, stored) = parse_graph(&text).with_context(|| format!("in {path}"))?;
            let n = n.or(stored).unwrap_or(1);
            Ok(LoadedPin {
                pin: PinInstance::build(graph, n)?,
                name: "pin".into(),
                bytes,
            })
        }
    }
}

fn lambda_json(c: &CanonicalLambda) -> Value {
    json!({
        "weights": c.lambda.to_report(),
        "uniform": c.canonical,
        "alternate_optima": c.alternate_optima,
    })
}

pub fn capacity_pin(command: Vec<String>, source: &PinSource, n: Option<usize>) -> Result<RunReport> {
    let loaded = load_pin(source, n)?;
    let pin = &loaded.pin;
    let table = pin::pin_subset_entropies(pin);
    let solved = solve_capacity(&table)?;
    let canonical = canonical_lambda_star(&solved);
    let nn = rational::int(pin.n() as i64);
    let capacity = &solved.capacity / &nn;
    let joint = &solved.joint_entropy / &nn;
    let r_co = &joint - &capacity;
    let packing = pack_spanning_trees(pin);
    let rate = packing_rate(pin.graph(), pin.n())?;
    let limit = pin::spanning_tree_packing_rate_limit(pin.graph()).ok();
    let results = json!({
        "model": "pin",
        "terminals": pin.terminals(),
        "edges": pin.graph().edges().len(),
        "n": pin.n(),
        "capacity": pq(&capacity),
        "joint_entropy": pq(&joint),
        "r_co": pq(&r_co),
        "lambda": lambda_json(&canonical),
        "trees": packing.len(),
        "packing_rate": pq(&rate),
        "packing_rate_limit": limit.as_ref().map(pq),
    });
    Ok(RunReport::new(command, results, true).with_input(&loaded.name, &loaded.bytes))
}

pub fn capacity_model(command: Vec<String>, path: &str) -> Result<RunReport> {
    let bytes = read(path)?;
    let file: PmfFile = serde_json::from_slice(&bytes).with_context(|| format!("malformed pmf file {path}"))?;
    let pmf = file.into_pmf().with_context(|| format!("in {path}"))?;
    let table = EntropyTable::from_pmf(&pmf, DEFAULT_DENOMINATOR_BITS)?;
    let solved = solve_capacity(&table)?;
    let canonical = canonical_lambda_star(&solved);
    let results = json!({
        "model": "pmf",
        "terminals": pmf.terminals(),
        "capacity": pq(&solved.capacity),
        "joint_entropy": pq(&solved.joint_entropy),
        "r_co": pq(&(&solved.joint_entropy - &solved.capacity)),
        "exact": !solved.approximate,
        "lambda": lambda_json(&canonical),
    });
    Ok(RunReport::new(command, results, true).with_input("model", &bytes))
}

struct Verdicts {
    json: Value,
    passed: bool,
}

fn protocol_verdicts(
    t: &LinearTranscript,
    key: &BitMatrix,
    capacity: &Rational,
    require_maximal: bool,
) -> Result<Verdicts> {
    let pin = t.pin();
    let table = pin::pin_subset_entropies(pin);
    let lambda = canonical_lambda_star(&solve_capacity(&table)?).lambda;
    let valid = validate_transcript(t);
    let key_cr = is_common_randomness(key, t)?;
    let omni = is_common_randomness(&BitMatrix::identity(pin.space().clone()), t)?;
    let sk = is_secret_key(key, t, capacity)?;
    let interactive = valid.valid;
    let ci = if interactive && key_cr.pass {
        Some(is_interactive_ci(key, t, &lambda)?)
    } else {
        None
    };
    let th = if interactive && key_cr.pass && sk.leakage == 0 {
        Some(key_accounting_report(key, t, &lambda)?)
    } else {
        None
    };
    let passed = interactive
        && key_cr.pass
        && sk.leakage == 0
        && sk.meets_capacity
        && (!require_maximal || ci.as_ref().is_some_and(|c| c.pass));
    let json = json!({
        "transcript_valid": valid,
        "key_recovery": key_cr,
        "omniscience": omni,
        "secret_key": sk,
        "interactive_ci": ci,
        "accounting": th,
    });
    Ok(Verdicts { json, passed })
}

pub fn protocol(
    command: Vec<String>,
    source: &PinSource,
    n: Option<usize>,
    out: Option<&str>,
) -> Result<(RunReport, Vec<String>)> {
    let loaded = load_pin(source, n)?;
    let pin = &loaded.pin;
    let mut warnings = Vec::new();
    let packing = pack_spanning_trees(pin);
    if packing.is_empty() {
        bail!("graph is disconnected; no spanning tree exists");
    }
    let proto = compile_tree_protocol(pin, &packing)?;
    let capacity = pin::pin_capacity(pin)?;
    let rate = rational::ratio(packing.len() as i64, pin.n() as i64);
    let maximal = rate == capacity;
    if !maximal {
        warnings.push(format!(
            "packing rate {} is below capacity {}; the key is sub-maximal (n*m odd?)",
            pq(&rate),
            pq(&capacity)
        ));
    }
    // A sub-maximal packing is judged against its own rate and cannot leave
    // zero conditional information, so the CI verdict is informational.
    let target = if maximal { capacity.clone() } else { rate.clone() };
    let v = protocol_verdicts(&proto.transcript, &proto.key, &target, maximal)?;
    let r_co = pin::r_co(pin)?;
    let file = TranscriptFile::new(&proto.transcript, &proto.key);
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&file)?;
        fs::write(path, text + "\n").with_context(|| format!("cannot write {path}"))?;
    }
    let m = pin.terminals() as i64;
    let results = json!({
        "terminals": pin.terminals(),
        "n": pin.n(),
        "trees": packing.len(),
        "key_bits": proto.key.row_count(),
        "comm_bits": proto.transcript.len(),
        "capacity": pq(&capacity),
        "r_co": pq(&r_co),
        "key_rate": pq(&rational::ratio(proto.key.rank() as i64, pin.n() as i64)),
        "comm_rate": pq(&rational::ratio(proto.transcript.len() as i64, pin.n() as i64)),
        "maximal": maximal,
        "complete_graph_comm_target": pin.is_complete().then(|| pq(&rational::ratio(m * (m - 2), 2))),
        "verdicts": v.json,
        "transcript": file,
    });
    let report = RunReport::new(command, results, v.passed).with_input(&loaded.name, &loaded.bytes);
    Ok((report, warnings))
}

pub fn protocol_check(command: Vec<String>, path: &str) -> Result<RunReport> {
    let bytes = read(path)?;
    let file: TranscriptFile =
        serde_json::from_slice(&bytes).with_context(|| format!("malformed transcript {path}"))?;
    let (t, key) = file.into_parts().with_context(|| format!("in {path}"))?;
    let capacity = pin::pin_capacity(t.pin())?;
    let v = protocol_verdicts(&t, &key, &rational::int(0), false)?;
    let n = t.pin().n() as i64;
    let results = json!({
        "terminals": t.pin().terminals(),
        "n": t.pin().n(),
        "key_bits": key.row_count(),
        "comm_bits": t.len(),
        "capacity": pq(&capacity),
        "key_rate": pq(&rational::ratio(key.rank() as i64, n)),
        "comm_rate": pq(&rational::ratio(t.len() as i64, n)),
        "verdicts": v.json,
    });
    Ok(RunReport::new(command, results, v.passed).with_input("transcript", &bytes))
}

pub fn verify(command: Vec<String>, suite: Suite, trials: usize, seed: u64) -> Result<RunReport> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let outcome = suites::run(suite, trials, seed);
    let passed = outcome.all_passed();
    let results = serde_json::to_value(&outcome)?;
    Ok(RunReport::new(command, results, passed).with_seed(seed))
}

pub fn cmi(
    command: Vec<String>,
    matrix_path: &str,
    source: &PinSource,
    n: Option<usize>,
) -> Result<RunReport> {
    let loaded = load_pin(source, n)?;
    let pin = &loaded.pin;
    let bytes = read(matrix_path)?;
    let file: MatrixFile = serde_json::from_slice(&bytes)
        .with_context(|| format!("malformed matrix file {matrix_path}"))?;
    let l = file.into_matrix(pin.space().clone()).with_context(|| format!("in {matrix_path}"))?;
    let mut results = json!({
        "terminals": pin.terminals(),
        "n": pin.n(),
        "rows": l.row_count(),
        "rank": l.rank(),
        "incidence_margin": incidence_rank_inequality(pin, &l)?,
    });
    let obj = results.as_object_mut().expect("object literal");
    if pin.is_complete() {
        let r = cmi_rank(pin, &l)?;
        obj.insert("cmi".into(), json!(pq(&r.value)));
        obj.insert("lower_bound".into(), json!(pq(&cmi_rank_lower_bound(pin, &l)?)));
        obj.insert("lambda".into(), json!("uniform"));
    } else {
        let solved = solve_capacity(&pin::pin_subset_entropies(pin))?;
        let c = canonical_lambda_star(&solved);
        let r = multipartite_info::cmi(&RankEntropies::new(pin, &l)?, &c.lambda)?;
        obj.insert("cmi".into(), json!(pq(&r.value)));
        obj.insert("lambda".into(), lambda_json(&c));
    }
    Ok(RunReport::new(command, results, true)
        .with_input(&loaded.name, &loaded.bytes)
        .with_input("matrix", &bytes))
}
