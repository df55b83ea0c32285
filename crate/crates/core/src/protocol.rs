//! In-process simulation of one multiplication round: the user encodes, every
//! worker multiplies its two shares, the user decodes. Also the colluders'
//! view and an exhaustive secrecy audit for tiny parameters.

use std::collections::BTreeSet;
use std::io::Write;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_field::Place;
use crate::linalg::{binomial, BlockVector, Matrix};
use crate::scheme::{SchemeInstance, ShareEncoder, Side};

/// Audit every collusion set when there are at most this many.
pub const DEFAULT_SUBSET_CAP: u128 = 10_000;

/// Upper limit on `subsets * plaintexts * randomness` evaluated by the audit.
pub const DEFAULT_STATE_CAP: u128 = 100_000_000;

/// A single honest-but-curious worker. It only ever holds its own two shares.
#[derive(Debug, Clone)]
pub struct Worker {
    index: usize,
    a_share: Matrix,
    b_share: Matrix,
}

impl Worker {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn respond(&self) -> Result<Matrix> {
        self.a_share.mul(&self.b_share)
    }
}

#[derive(Debug, Clone)]
pub struct WorkerPool {
    workers: Vec<Worker>,
}

impl WorkerPool {
    pub fn dispatch(a: BlockVector, b: BlockVector) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} A-shares but {} B-shares",
                a.len(),
                b.len()
            )));
        }
        let workers = a
            .into_blocks()
            .into_iter()
            .zip(b.into_blocks())
            .enumerate()
            .map(|(index, (a_share, b_share))| Worker {
                index,
                a_share,
                b_share,
            })
            .collect();
        Ok(WorkerPool { workers })
    }

    pub fn len(&self) -> usize {
        self.workers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.workers.is_empty()
    }

    /// All responses keyed by worker index; computed in parallel.
    pub fn compute(&self) -> Result<Vec<(usize, Matrix)>> {
        self.workers
            .par_iter()
            .map(|w| Ok((w.index, w.respond()?)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerRecord {
    pub index: usize,
    pub place: Place,
    pub a_share: Matrix,
    pub b_share: Matrix,
    pub response: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    collusion: usize,
    records: Vec<WorkerRecord>,
}

#[derive(Serialize, Deserialize)]
struct PlaceJson {
    x: u64,
    y: u64,
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    index: usize,
    place: PlaceJson,
    a_share: Vec<Vec<u64>>,
    b_share: Vec<Vec<u64>>,
    response: Vec<Vec<u64>>,
}

impl Transcript {
    pub fn records(&self) -> &[WorkerRecord] {
        &self.records
    }

    pub fn collusion(&self) -> usize {
        self.collusion
    }

    /// One JSON object per line, one line per worker.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for r in &self.records {
            let (x, y) = r.place.coordinates().ok_or(Error::EvaluateAtInfinity)?;
            let rec = RecordJson {
                index: r.index,
                place: PlaceJson { x, y },
                a_share: r.a_share.to_rows(),
                b_share: r.b_share.to_rows(),
                response: r.response.to_rows(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub product: Matrix,
    pub transcript: Transcript,
}

pub fn run_protocol(
    a: &Matrix,
    b: &Matrix,
    instance: &SchemeInstance,
    rng: &mut impl Rng,
) -> Result<ProtocolRun> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let sa = instance.encode(Side::A, a, rng)?;
    let sb = instance.encode(Side::B, b, rng)?;
    let pool = WorkerPool::dispatch(sa.shares, sb.shares)?;
    let responses = pool.compute()?;
    let product = instance.decode_indexed(responses.iter().cloned())?;

    let mut records: Vec<WorkerRecord> = pool
        .workers
        .into_iter()
        .zip(responses)
        .map(|(w, (index, response))| WorkerRecord {
            index,
            place: instance.places()[index],
            a_share: w.a_share,
            b_share: w.b_share,
            response,
        })
        .collect();
    records.sort_by_key(|r| r.index);
    Ok(ProtocolRun {
        product,
        transcript: Transcript {
            collusion: instance.encoder().collusion(),
            records,
        },
    })
}

/// What `X` colluding workers see when they pool their shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollusionView {
    pub indices: Vec<usize>,
    pub a_shares: Vec<Matrix>,
    pub b_shares: Vec<Matrix>,
}

pub fn collude_view(transcript: &Transcript, indices: &[usize]) -> Result<CollusionView> {
    let x = transcript.collusion;
    let n = transcript.records.len();
    let unique: BTreeSet<usize> = indices.iter().copied().collect();
    if indices.len() != x || unique.len() != x {
        return Err(Error::InvalidCollusion(format!(
            "need exactly {x} distinct workers, got {indices:?}"
        )));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidCollusion(format!(
            "worker {bad} does not exist ({n} workers)"
        )));
    }
    let mut view = CollusionView {
        indices: indices.to_vec(),
        a_shares: Vec::with_capacity(x),
        b_shares: Vec::with_capacity(x),
    };
    for &i in indices {
        let r = &transcript.records[i];
        view.a_shares.push(r.a_share.clone());
        view.b_shares.push(r.b_share.clone());
    }
    Ok(view)
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub q: u64,
    pub workers: usize,
    pub collusion: usize,
    pub subsets_total: u128,
    pub subsets_checked: usize,
    pub plaintext_pairs: u64,
    pub randomness_per_plaintext: u64,
    /// Distinct views each plaintext pair can produce.
    pub view_outcomes: u64,
    /// Whether every view was also uniformly distributed.
    pub uniform: bool,
    pub passed: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct AuditConfig {
    pub subset_cap: u128,
    pub state_cap: u128,
    pub sample_seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            subset_cap: DEFAULT_SUBSET_CAP,
            state_cap: DEFAULT_STATE_CAP,
            sample_seed: 0,
        }
    }
}

/// Visits every tuple in `[0, q)^len`, first coordinate fastest.
fn for_each_tuple(q: u64, len: usize, mut f: impl FnMut(&[u64])) {
    let mut t = vec![0u64; len];
    loop {
        f(&t);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            t[i] += 1;
            if t[i] < q {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

fn collusion_sets(n: usize, x: usize, cfg: &AuditConfig) -> Vec<Vec<usize>> {
    let total = binomial(n as u64, x as u64);
    if total <= cfg.subset_cap {
        return (0..n).combinations(x).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sample_seed);
    let mut picked = BTreeSet::new();
    while (picked.len() as u128) < cfg.subset_cap {
        let mut s: Vec<usize> = rand::seq::index::sample(&mut rng, n, x).into_vec();
        s.sort_unstable();
        picked.insert(s);
    }
    picked.into_iter().collect()
}

/// Exhaustive secrecy check with `1x1` blocks: for each collusion set, every
/// plaintext pair `(A, B)` must induce the same distribution of pooled shares
/// over all choices of the masks. Equal distributions mean zero mutual
/// information between the plaintexts and the view.
pub fn empirical_secrecy_audit(encoder: &ShareEncoder, cfg: &AuditConfig) -> Result<AuditReport> {
    let field = encoder.field();
    let q = field.order();
    let n = encoder.workers();
    let x = encoder.collusion();
    let (ma, mb) = (encoder.blocks(Side::A), encoder.blocks(Side::B));
    if x > n {
        return Err(Error::InvalidCollusion(format!(
            "X = {x} exceeds {n} workers"
        )));
    }
    let subsets = collusion_sets(n, x, cfg);
    let plaintext_len = (ma + mb) as u32;
    let randomness_len = (2 * x) as u32;
    let pow = |e: u32| u128::from(q).checked_pow(e).unwrap_or(u128::MAX);
    let states = pow(plaintext_len)
        .saturating_mul(pow(randomness_len))
        .saturating_mul(subsets.len() as u128);
    let view_space = pow(2 * x as u32);
    if states > cfg.state_cap || view_space > cfg.state_cap {
        return Err(Error::StateSpaceTooLarge {
            states,
            cap: cfg.state_cap,
        });
    }

    let ga = encoder.generator(Side::A);
    let gb = encoder.generator(Side::B);
    let mut report = AuditReport {
        q,
        workers: n,
        collusion: x,
        subsets_total: binomial(n as u64, x as u64),
        subsets_checked: 0,
        plaintext_pairs: pow(plaintext_len) as u64,
        randomness_per_plaintext: pow(randomness_len) as u64,
        view_outcomes: 0,
        uniform: true,
        passed: true,
        failure: None,
    };

    // coefficient vectors are (masks..., data...) to match generator row order
    let share = |g: &Matrix, coeffs: &[u64], worker: usize| -> u64 {
        coeffs.iter().enumerate().fold(0, |acc, (t, &c)| {
            field.add(acc, field.mul(c, g.get(t, worker)))
        })
    };

    let mut histogram = vec![0u32; view_space as usize];
    let mut a_coeffs = vec![0u64; x + ma];
    let mut b_coeffs = vec![0u64; x + mb];
    for set in &subsets {
        let mut reference: Option<Vec<u32>> = None;
        let mut failed = false;
        for_each_tuple(q, ma + mb, |plain| {
            if failed {
                return;
            }
            a_coeffs[x..].copy_from_slice(&plain[..ma]);
            b_coeffs[x..].copy_from_slice(&plain[ma..]);
            histogram.iter_mut().for_each(|c| *c = 0);
            for_each_tuple(q, 2 * x, |masks| {
                a_coeffs[..x].copy_from_slice(&masks[..x]);
                b_coeffs[..x].copy_from_slice(&masks[x..]);
                let mut key = 0u64;
                for &w in set {
                    key = key * q + share(ga, &a_coeffs, w);
                    key = key * q + share(gb, &b_coeffs, w);
                }
                histogram[key as usize] += 1;
            });
            match &reference {
                None => {
                    let outcomes = histogram.iter().filter(|&&c| c > 0).count() as u64;
                    report.view_outcomes = report.view_outcomes.max(outcomes);
                    let first = histogram.iter().copied().find(|&c| c > 0).unwrap_or(0);
                    if histogram.iter().any(|&c| c != first) {
                        report.uniform = false;
                    }
                    reference = Some(histogram.clone());
                }
                Some(r) if *r != histogram => {
                    failed = true;
                    report.failure = Some(format!(
                        "workers {set:?}: view distribution for plaintext {plain:?} differs from the all-zero plaintext"
                    ));
                }
                Some(_) => {}
            }
        });
        report.subsets_checked += 1;
        if failed {
            report.passed = false;
            break;
        }
    }
    Ok(report)
}
