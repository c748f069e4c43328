//! Function-evaluation instances and their five input presentations.
//!
//! An instance is a table `f: [n] -> [n]`, a key permutation `pi` and a
//! target key. The presentation case fixes how the table is laid out as a
//! token sequence; the final token is always the target key.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default largest `n` for exhaustive enumeration.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 5;
/// Environment variable overriding [`DEFAULT_EXHAUSTIVE_CAP`].
pub const EXHAUSTIVE_CAP_ENV: &str = "WORKBENCH_EXHAUSTIVE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresentationCase {
    /// Case 1: `f(0), ..., f(n-1), i*`.
    NoKeys,
    /// Case 2: `(i, f(i))` pairs in key order, then `i*`.
    SamePosOrdered,
    /// Case 3: `(pi(i), f(pi(i)))` pairs, then `i*`.
    SamePosPermuted,
    /// Case 4: `0, f(0), 1, f(1), ..., i*`.
    ConsecutiveOrdered,
    /// Case 5: `pi(0), f(pi(0)), ..., i*`.
    ConsecutivePermuted,
}

impl PresentationCase {
    pub const ALL: [PresentationCase; 5] = [
        Self::NoKeys,
        Self::SamePosOrdered,
        Self::SamePosPermuted,
        Self::ConsecutiveOrdered,
        Self::ConsecutivePermuted,
    ];

    pub fn number(self) -> u8 {
        match self {
            Self::NoKeys => 1,
            Self::SamePosOrdered => 2,
            Self::SamePosPermuted => 3,
            Self::ConsecutiveOrdered => 4,
            Self::ConsecutivePermuted => 5,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.number() == k)
            .ok_or_else(|| Error::InvalidInput(format!("presentation case must be 1..=5, got {k}")))
    }

    /// Sequence length `ℓ(n)`.
    pub fn seq_len(self, n: usize) -> usize {
        if self.is_consecutive() {
            2 * n + 1
        } else {
            n + 1
        }
    }

    /// Keys appear in increasing order (or not at all), so `pi` must be the identity.
    pub fn is_ordered(self) -> bool {
        matches!(self, Self::NoKeys | Self::SamePosOrdered | Self::ConsecutiveOrdered)
    }

    pub fn is_consecutive(self) -> bool {
        matches!(self, Self::ConsecutiveOrdered | Self::ConsecutivePermuted)
    }

    /// Key and value share a position as a pair token.
    pub fn uses_pairs(self) -> bool {
        matches!(self, Self::SamePosOrdered | Self::SamePosPermuted)
    }
}

impl fmt::Display for PresentationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for PresentationCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let k: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("presentation case must be 1..=5, got {s:?}")))?;
        Self::from_number(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Scalar(usize),
    Pair(usize, usize),
}

pub type TokenSeq = Vec<Token>;

/// Plain integers for the scalar cases; convenient for tests and fixtures.
pub fn scalar_tokens(values: &[usize]) -> TokenSeq {
    values.iter().copied().map(Token::Scalar).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionClass {
    AllFunctions,
    PermutationsOnly,
}

impl FromStr for FunctionClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all-functions" => Ok(Self::AllFunctions),
            "perm" | "permutations" | "permutations-only" => Ok(Self::PermutationsOnly),
            _ => Err(Error::InvalidInput(format!(
                "function class must be `all` or `perm`, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub f: Vec<usize>,
    pub pi: Vec<usize>,
    pub target: usize,
}

impl Instance {
    pub fn new(f: Vec<usize>, pi: Vec<usize>, target: usize) -> Result<Self> {
        let inst = Self {
            n: f.len(),
            f,
            pi,
            target,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// An instance with the identity key order.
    pub fn ordered(f: Vec<usize>, target: usize) -> Result<Self> {
        let n = f.len();
        Self::new(f, (0..n).collect(), target)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInstance("n must be positive".into()));
        }
        if self.f.len() != n || self.pi.len() != n {
            return Err(Error::InvalidInstance(format!(
                "table lengths f={} pi={} do not match n={n}",
                self.f.len(),
                self.pi.len()
            )));
        }
        if let Some(v) = self.f.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidInstance(format!("f value {v} outside [{n}]")));
        }
        if !is_permutation(&self.pi) {
            return Err(Error::InvalidInstance(format!("pi {:?} is not a permutation", self.pi)));
        }
        if self.target >= n {
            return Err(Error::InvalidInstance(format!("target {} outside [{n}]", self.target)));
        }
        Ok(())
    }

    pub fn is_identity_order(&self) -> bool {
        self.pi.iter().enumerate().all(|(i, &k)| i == k)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(line)?;
        inst.validate()?;
        Ok(inst)
    }
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &k in p {
        if k >= p.len() || seen[k] {
            return false;
        }
        seen[k] = true;
    }
    true
}

/// Lays the instance out as a token sequence for `case`.
pub fn encode(inst: &Instance, case: PresentationCase) -> Result<TokenSeq> {
    inst.validate()?;
    if case.is_ordered() && !inst.is_identity_order() {
        return Err(Error::InvalidInstance(format!(
            "case {case} requires ordered keys, got pi = {:?}",
            inst.pi
        )));
    }
    let mut out = Vec::with_capacity(case.seq_len(inst.n));
    for &k in &inst.pi {
        let v = inst.f[k];
        match case {
            PresentationCase::NoKeys => out.push(Token::Scalar(v)),
            PresentationCase::SamePosOrdered | PresentationCase::SamePosPermuted => {
                out.push(Token::Pair(k, v))
            }
            PresentationCase::ConsecutiveOrdered | PresentationCase::ConsecutivePermuted => {
                out.push(Token::Scalar(k));
                out.push(Token::Scalar(v));
            }
        }
    }
    out.push(Token::Scalar(inst.target));
    Ok(out)
}

/// Inverse of [`encode`]: reads `(pi, f, target)` back out of a layout.
pub fn decode_layout(tokens: &[Token], case: PresentationCase, n: usize) -> Result<Instance> {
    if n == 0 || tokens.len() != case.seq_len(n) {
        return Err(Error::Encoding(format!(
            "case {case} with n={n} expects {} tokens, got {}",
            case.seq_len(n),
            tokens.len()
        )));
    }
    let scalar = |t: &Token| match *t {
        Token::Scalar(v) => Ok(v),
        Token::Pair(..) => Err(Error::Encoding("unexpected pair token".into())),
    };
    let mut pi = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n);
    match case {
        PresentationCase::NoKeys => {
            for (i, t) in tokens[..n].iter().enumerate() {
                pi.push(i);
                vals.push(scalar(t)?);
            }
        }
        PresentationCase::SamePosOrdered | PresentationCase::SamePosPermuted => {
            for t in &tokens[..n] {
                match *t {
                    Token::Pair(k, v) => {
                        pi.push(k);
                        vals.push(v);
                    }
                    Token::Scalar(_) => return Err(Error::Encoding("expected pair token".into())),
                }
            }
        }
        PresentationCase::ConsecutiveOrdered | PresentationCase::ConsecutivePermuted => {
            for pair in tokens[..2 * n].chunks_exact(2) {
                pi.push(scalar(&pair[0])?);
                vals.push(scalar(&pair[1])?);
            }
        }
    }
    let target = scalar(&tokens[tokens.len() - 1])?;
    if !is_permutation(&pi) {
        return Err(Error::Encoding(format!("keys {pi:?} are not a permutation of [{n}]")));
    }
    let mut f = vec![0; n];
    for (&k, &v) in pi.iter().zip(&vals) {
        f[k] = v;
    }
    let inst = Instance { n, f, pi, target };
    inst.validate().map_err(|e| Error::Encoding(e.to_string()))?;
    Ok(inst)
}

/// Ground truth: `f(target)` by table lookup.
pub fn oracle(inst: &Instance) -> usize {
    inst.f[inst.target]
}

pub fn exhaustive_cap() -> usize {
    std::env::var(EXHAUSTIVE_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_EXHAUSTIVE_CAP)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The `idx`-th permutation of `[n]` in lexicographic order (Lehmer code).
pub fn nth_permutation(n: usize, mut idx: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for remaining in (1..=n).rev() {
        let block = factorial(remaining - 1);
        let pos = (idx / block) as usize;
        idx %= block;
        out.push(pool.remove(pos));
    }
    out
}

/// Indexable enumeration of every `(f, pi, target)` triple.
///
/// Index layout, fastest digit first: target, then permutation, then table.
/// Parallel sweeps split the index range.
#[derive(Debug, Clone, Copy)]
pub struct InstanceSpace {
    n: usize,
    class: FunctionClass,
    ordered: bool,
    tables: u64,
    perms: u64,
}

impl InstanceSpace {
    pub fn new(n: usize, class: FunctionClass, ordered: bool, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        let tables = match class {
            FunctionClass::AllFunctions => (n as u64)
                .checked_pow(n as u32)
                .ok_or_else(|| Error::InvalidInput(format!("n = {n} too large to enumerate")))?,
            FunctionClass::PermutationsOnly => factorial(n),
        };
        let perms = if ordered { 1 } else { factorial(n) };
        Ok(Self {
            n,
            class,
            ordered,
            tables,
            perms,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.tables * self.perms * self.n as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, idx: u64) -> Instance {
        let n = self.n as u64;
        let target = (idx % n) as usize;
        let rest = idx / n;
        let perm_idx = rest % self.perms;
        let table_idx = rest / self.perms;
        let f = match self.class {
            FunctionClass::AllFunctions => {
                let mut t = table_idx;
                (0..self.n)
                    .map(|_| {
                        let d = (t % n) as usize;
                        t /= n;
                        d
                    })
                    .collect()
            }
            FunctionClass::PermutationsOnly => nth_permutation(self.n, table_idx),
        };
        let pi = if self.ordered {
            (0..self.n).collect()
        } else {
            nth_permutation(self.n, perm_idx)
        };
        Instance {
            n: self.n,
            f,
            pi,
            target,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Instance> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Every instance for `n`, refusing past [`exhaustive_cap`].
pub fn enumerate_instances(
    n: usize,
    class: FunctionClass,
    ordered: bool,
) -> Result<impl Iterator<Item = Instance>> {
    let space = InstanceSpace::new(n, class, ordered, exhaustive_cap())?;
    Ok((0..space.len()).map(move |i| space.get(i)))
}

/// Seeded instance; identity key order for ordered cases.
pub fn random_instance(n: usize, class: FunctionClass, case: PresentationCase, seed: u64) -> Instance {
    assert!(n >= 1, "n must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = match class {
        FunctionClass::AllFunctions => (0..n).map(|_| rng.gen_range(0..n)).collect(),
        FunctionClass::PermutationsOnly => {
            let mut f: Vec<usize> = (0..n).collect();
            f.shuffle(&mut rng);
            f
        }
    };
    let mut pi: Vec<usize> = (0..n).collect();
    if !case.is_ordered() {
        pi.shuffle(&mut rng);
    }
    let target = rng.gen_range(0..n);
    Instance { n, f, pi, target }
}

/// Per-item seed for counter-mode splitting of one base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of distinct inputs for the task.
pub fn instance_space_size(n: usize, class: FunctionClass, ordered: bool) -> BigUint {
    let nb = BigUint::from(n);
    let fact: BigUint = (1..=n).map(BigUint::from).product();
    let tables = match class {
        FunctionClass::AllFunctions => nb.pow(n as u32),
        FunctionClass::PermutationsOnly => fact.clone(),
    };
    let perms = if ordered { BigUint::from(1u8) } else { fact };
    nb * tables * perms
}
