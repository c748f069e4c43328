//! Lower bounds for consecutive, permuted keys (case 5), the adversarial
//! family that defeats every 1-layer hard-attention transformer, and the
//! shattering witness behind the split-VC lower bound.
//!
//! Logarithms are base 2 throughout.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{self, encode, oracle, scalar_tokens, FunctionClass, Instance, PresentationCase, TokenSeq};
use crate::transformer::{forward, TransformerSpec};

/// `⌈n·log₂(n) / 3⌉`: the least c-size of a 1-layer transformer solving case 5 exactly.
pub fn csize_lower_bound(n: usize) -> u64 {
    assert!(n >= 2, "bound defined for n >= 2");
    if n.is_power_of_two() {
        let bits = n as u64 * n.trailing_zeros() as u64;
        bits.div_ceil(3)
    } else {
        // n·log₂n is irrational here, so the ceiling is never at a float boundary
        (n as f64 * (n as f64).log2() / 3.0).ceil() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorProbBound {
    pub value: f64,
    /// The bound only holds past an unknown threshold `n >= C`.
    pub small_n_warning: bool,
}

/// `max(0, (n log₂ n − 3hdp) / (3 n log₂ n))`.
pub fn error_prob_lower_bound(n: usize, h: usize, d: usize, p: u32) -> Result<ErrorProbBound> {
    if n < 2 {
        return Err(Error::Domain(format!("error bound needs n >= 2, got {n}")));
    }
    if h == 0 || d == 0 || p == 0 {
        return Err(Error::Domain("h, d and p must all be at least 1".into()));
    }
    let info = n as f64 * (n as f64).log2();
    let msg = 3.0 * h as f64 * d as f64 * p as f64;
    Ok(ErrorProbBound {
        value: ((info - msg) / (3.0 * info)).max(0.0),
        small_n_warning: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `⟨0, x, 1, y⟩ ∘ t`, answer `x`.
    Left,
    /// `⟨1, x, 0, y⟩ ∘ t`, answer `y`.
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversarialMember {
    pub side: Side,
    pub x: usize,
    pub y: usize,
    pub tokens: Vec<usize>,
    pub expected: usize,
}

impl AdversarialMember {
    pub fn token_seq(&self) -> TokenSeq {
        scalar_tokens(&self.tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversarialFamily {
    pub n: usize,
    pub members: Vec<AdversarialMember>,
}

/// The 32 sequences `ℓ(x,y)∘t`, `r(x,y)∘t` for `x, y ∈ [4]`,
/// with `t = ⟨2,2,3,3,…,n−1,n−1,0⟩`.
pub fn adversarial_case5_instances(n: usize) -> Result<AdversarialFamily> {
    if n < 4 {
        return Err(Error::Domain(format!("adversarial family needs n >= 4, got {n}")));
    }
    let tail: Vec<usize> = (2..n).flat_map(|k| [k, k]).chain([0]).collect();
    let mut members = Vec::with_capacity(32);
    for side in [Side::Left, Side::Right] {
        for x in 0..4 {
            for y in 0..4 {
                let (head, expected) = match side {
                    Side::Left => ([0, x, 1, y], x),
                    Side::Right => ([1, x, 0, y], y),
                };
                let tokens = head.iter().chain(&tail).copied().collect();
                members.push(AdversarialMember {
                    side,
                    x,
                    y,
                    tokens,
                    expected,
                });
            }
        }
    }
    Ok(AdversarialFamily { n, members })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub member: usize,
    pub tokens: Vec<usize>,
    pub expected: usize,
    /// `None` when the forward pass itself failed (e.g. a decoder integrity error).
    pub got: Option<usize>,
}

fn check_case5(spec: &TransformerSpec, n: usize) -> Result<()> {
    if spec.case != PresentationCase::ConsecutivePermuted || spec.n != n {
        return Err(Error::InvalidInput(format!(
            "probe needs a case-5 spec with n = {n}, got case {} with n = {}",
            spec.case, spec.n
        )));
    }
    Ok(())
}

/// Runs every adversarial member; returns the lowest-index mismatch.
pub fn probe_counterexample(spec: &TransformerSpec, n: usize) -> Result<Option<Mismatch>> {
    check_case5(spec, n)?;
    let family = adversarial_case5_instances(n)?;
    let results: Vec<Option<usize>> = family
        .members
        .par_iter()
        .map(|m| forward(spec, &m.token_seq()).ok())
        .collect();
    Ok(family
        .members
        .iter()
        .zip(results)
        .enumerate()
        .find(|(_, (m, got))| *got != Some(m.expected))
        .map(|(i, (m, got))| Mismatch {
            member: i,
            tokens: m.tokens.clone(),
            expected: m.expected,
            got,
        }))
}

/// Broader search: `samples` seeded random case-5 instances, first mismatch by index.
pub fn probe_random(spec: &TransformerSpec, n: usize, samples: u64, seed: u64) -> Result<Option<(Instance, Option<usize>)>> {
    check_case5(spec, n)?;
    let hit = (0..samples).into_par_iter().find_first(|&i| {
        let inst = task::random_instance(n, FunctionClass::AllFunctions, spec.case, task::derive_seed(seed, i));
        let toks = encode(&inst, spec.case).expect("valid instance");
        forward(spec, &toks).ok() != Some(oracle(&inst))
    });
    Ok(hit.map(|i| {
        let inst = task::random_instance(n, FunctionClass::AllFunctions, spec.case, task::derive_seed(seed, i));
        let got = forward(spec, &encode(&inst, spec.case).expect("valid instance")).ok();
        (inst, got)
    }))
}

/// 1 iff `f(0) = 0`.
pub fn modified_task_oracle(inst: &Instance) -> u8 {
    u8::from(inst.f[0] == 0)
}

/// `id` with positions 0 and `k` exchanged.
pub fn swapped_identity(n: usize, k: usize) -> Vec<usize> {
    let mut u: Vec<usize> = (0..n).collect();
    u.swap(0, k);
    u
}

/// For each `k`, the case-5 instance with keys `u_k`, values `v[i] = 1 − b_i`
/// at value position `i`, and target 0.
pub fn shatter_witness(n: usize, labels: &[bool]) -> Result<Vec<Instance>> {
    if n < 2 {
        return Err(Error::Domain(format!("shattering needs n >= 2, got {n}")));
    }
    if labels.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} labels, got {}", labels.len())));
    }
    let values: Vec<usize> = labels.iter().map(|&b| usize::from(!b)).collect();
    (0..n)
        .map(|k| {
            let pi = swapped_identity(n, k);
            let mut f = vec![0; n];
            for (&key, &v) in pi.iter().zip(&values) {
                f[key] = v;
            }
            Instance::new(f, pi, 0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShatterReport {
    pub n: usize,
    pub labelings: u64,
    pub shattered: bool,
}

pub const MAX_SHATTER_N: usize = 16;

/// Checks every labeling `b ∈ {0,1}^n` of the base set `{u_k}`.
///
/// Besides the oracle labels, this checks the split: the key (even)
/// positions of instance `k` are exactly `u_k ∘ 0` and the value (odd)
/// positions are the same vector `v` for every `k`.
pub fn verify_shattering(n: usize) -> Result<ShatterReport> {
    if !(2..=MAX_SHATTER_N).contains(&n) {
        return Err(Error::Domain(format!(
            "shattering check supports 2 <= n <= {MAX_SHATTER_N}, got {n}"
        )));
    }
    let labelings = 1u64 << n;
    let shattered = (0..labelings).into_par_iter().all(|mask| {
        let labels: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
        let Ok(insts) = shatter_witness(n, &labels) else { return false };
        let mut concept: Option<Vec<usize>> = None;
        insts.iter().enumerate().all(|(k, inst)| {
            let Ok(toks) = encode(inst, PresentationCase::ConsecutivePermuted) else { return false };
            let raw: Vec<usize> = toks
                .iter()
                .map(|t| match *t {
                    task::Token::Scalar(v) => v,
                    task::Token::Pair(..) => usize::MAX,
                })
                .collect();
            let keys: Vec<usize> = raw.iter().step_by(2).copied().collect();
            let vals: Vec<usize> = raw.iter().skip(1).step_by(2).copied().collect();
            let mut expect_keys = swapped_identity(n, k);
            expect_keys.push(0);
            let same_concept = match &concept {
                Some(c) => *c == vals,
                None => {
                    concept = Some(vals.clone());
                    true
                }
            };
            keys == expect_keys && same_concept && modified_task_oracle(inst) == u8::from(labels[k])
        })
    });
    Ok(ShatterReport { n, labelings, shattered })
}
