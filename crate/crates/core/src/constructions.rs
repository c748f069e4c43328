//! Explicit weights for the lookup constructions.
//!
//! Integers are represented as points on the unit circle: `k mod m` maps to
//! angle `2πk/m`. Distinct residues then have dot product at most
//! `1 - 1/m²`, so a dot-product query picks out the matching key.
//!
//! | builder | case | layers | d | attention |
//! |---|---|---|---|---|
//! | [`build_case1`] | 1 | 1 | 4 | leftmost hard |
//! | [`build_case3`] | 2, 3 | 1 | 4 | leftmost hard |
//! | [`build_case4`] | 4 | 1 | 4 | leftmost hard |
//! | [`build_case5_soft`] | 5 | 1 | 2n+2 | softmax |
//! | [`build_case5_twolayer`] | 5 | 2 | 7 | leftmost hard |

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::task::{is_permutation, PresentationCase};
use crate::transformer::{
    AttentionKind, AttentionLayerParams, DecoderTag, Layer, MlpLayerParams, OutputStage, TokenEmbedding,
    TransformerSpec, SPEC_VERSION,
};

/// `[cos 2πk/m, sin 2πk/m]`, exact at quarter turns.
pub fn circle_embed(m: usize, k: i64) -> [f64; 2] {
    assert!(m >= 1, "modulus must be positive");
    let r = k.rem_euclid(m as i64) as usize;
    if (4 * r).is_multiple_of(m) {
        match 4 * r / m {
            0 => return [1.0, 0.0],
            1 => return [0.0, 1.0],
            2 => return [-1.0, 0.0],
            3 => return [0.0, -1.0],
            _ => unreachable!(),
        }
    }
    let theta = TAU * r as f64 / m as f64;
    [theta.cos(), theta.sin()]
}

fn cs(m: usize, k: usize) -> [f64; 2] {
    circle_embed(m, k as i64)
}

/// Zero matrix with the listed `(row, col, value)` entries set.
fn selector(rows: usize, cols: usize, picks: &[(usize, usize, f64)]) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for &(i, j, v) in picks {
        m[(i, j)] = v;
    }
    m
}

fn circle_unembed(n: usize, m: usize, d: usize) -> OutputStage {
    OutputStage::Unembed {
        u: Matrix::from_fn(n, d, |k, j| if j < 2 { cs(m, k)[j] } else { 0.0 }),
    }
}

/// Same-position pairs with permuted keys (also covers ordered keys).
///
/// Pair `(k, v)` embeds as `[cs_n(k), cs_n(v)]`. The target key embeds as
/// `[0, 0, cs_n(i*)]` and the query reads coordinates 2-3, so the target
/// position's own key is zero and never competes with the matching pair.
pub fn build_case3(n: usize) -> TransformerSpec {
    assert!(n >= 1);
    let d = 4;
    let scalar = Matrix::from_fn(n, d, |k, j| if j >= 2 { cs(n, k)[j - 2] } else { 0.0 });
    let pair = Matrix::from_fn(n * n, d, |r, j| {
        let (k, v) = (r / n, r % n);
        if j < 2 {
            cs(n, k)[j]
        } else {
            cs(n, v)[j - 2]
        }
    });
    let attn = AttentionLayerParams {
        wq: selector(2, d, &[(0, 2, 1.0), (1, 3, 1.0)]),
        wk: selector(2, d, &[(0, 0, 1.0), (1, 1, 1.0)]),
        wv: selector(d, d, &[(0, 2, 1.0), (1, 3, 1.0)]),
        d_hid: 2,
        kind: AttentionKind::LeftmostHard,
        residual: false,
    };
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case: PresentationCase::SamePosPermuted,
        d,
        heads: 1,
        token_embed: TokenEmbedding {
            scalar,
            pair: Some(pair),
        },
        pos_embed: None,
        layers: vec![Layer::Attention(attn)],
        output: circle_unembed(n, n, d),
    }
}

/// No keys: position `i` holds `f(i)`, and the position embedding supplies `i`.
pub fn build_case1(n: usize) -> TransformerSpec {
    assert!(n >= 1);
    let (d, m) = (4, n + 1);
    let scalar = Matrix::from_fn(n, d, |v, j| if j < 2 { cs(m, v)[j] } else { 0.0 });
    let pos = Matrix::from_fn(n + 1, d, |i, j| if j >= 2 { cs(m, i)[j - 2] } else { 0.0 });
    let attn = AttentionLayerParams {
        wq: selector(2, d, &[(0, 0, 1.0), (1, 1, 1.0)]),
        wk: selector(2, d, &[(0, 2, 1.0), (1, 3, 1.0)]),
        wv: selector(d, d, &[(0, 0, 1.0), (1, 1, 1.0)]),
        d_hid: 2,
        kind: AttentionKind::LeftmostHard,
        residual: false,
    };
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case: PresentationCase::NoKeys,
        d,
        heads: 1,
        token_embed: TokenEmbedding { scalar, pair: None },
        pos_embed: Some(pos),
        layers: vec![Layer::Attention(attn)],
        output: circle_unembed(n, m, d),
    }
}

/// Consecutive positions, ordered keys: the key tokens are ignored and value
/// position `2k+1` carries `cs_n(k)` in its position embedding.
pub fn build_case4(n: usize) -> TransformerSpec {
    assert!(n >= 1);
    let d = 4;
    let scalar = Matrix::from_fn(n, d, |v, j| if j < 2 { cs(n, v)[j] } else { 0.0 });
    let pos = Matrix::from_fn(2 * n + 1, d, |i, j| {
        if i % 2 == 1 && j >= 2 {
            cs(n, i / 2)[j - 2]
        } else {
            0.0
        }
    });
    let attn = AttentionLayerParams {
        wq: selector(2, d, &[(0, 0, 1.0), (1, 1, 1.0)]),
        wk: selector(2, d, &[(0, 2, 1.0), (1, 3, 1.0)]),
        wv: selector(d, d, &[(0, 0, 1.0), (1, 1, 1.0)]),
        d_hid: 2,
        kind: AttentionKind::LeftmostHard,
        residual: false,
    };
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case: PresentationCase::ConsecutiveOrdered,
        d,
        heads: 1,
        token_embed: TokenEmbedding { scalar, pair: None },
        pos_embed: Some(pos),
        layers: vec![Layer::Attention(attn)],
        output: circle_unembed(n, n, d),
    }
}

/// One softmax layer that copies the whole input into the final position.
///
/// Token `v` embeds as `ln(v+1)` in the last coordinate and position `i` as
/// the unit vector `e_i`. The final position's query is `√d · e_{d-1}`, so
/// the scaled score of position `j` is `ln(v_j + 1)` and its weight is
/// `(v_j + 1) / S`. The value map drops the last coordinate, leaving those
/// weights in coordinates `0..=2n` for [`case5_soft_decode`].
pub fn build_case5_soft(n: usize) -> TransformerSpec {
    assert!(n >= 1);
    let d = 2 * n + 2;
    let last = d - 1;
    let scalar = Matrix::from_fn(n, d, |v, j| if j == last { ((v + 1) as f64).ln() } else { 0.0 });
    let pos = Matrix::from_fn(2 * n + 1, d, |i, j| if i == j { 1.0 } else { 0.0 });
    let attn = AttentionLayerParams {
        wq: selector(d, d, &[(last, 2 * n, (d as f64).sqrt())]),
        wk: Matrix::identity(d),
        wv: Matrix::from_fn(d, d, |i, j| if i == j && i != last { 1.0 } else { 0.0 }),
        d_hid: d,
        kind: AttentionKind::Softmax,
        residual: false,
    };
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case: PresentationCase::ConsecutivePermuted,
        d,
        heads: 1,
        token_embed: TokenEmbedding { scalar, pair: None },
        pos_embed: Some(pos),
        layers: vec![Layer::Attention(attn)],
        output: OutputStage::FunctionalDecoder {
            tag: DecoderTag::Case5Soft,
            n,
        },
    }
}

/// Max distance from an integer tolerated when reading a token back.
pub const DECODE_TOLERANCE: f64 = 0.25;

/// Reads the input sequence back out of the soft construction's attention
/// output and answers the lookup.
///
/// Entries `0..=2n` are proportional to `token + 1`. The keys at even
/// positions are a permutation of `[n]`, so the largest key entry is `n / S`,
/// which fixes the scale `S`.
pub fn case5_soft_decode(att_out: &[f64], n: usize) -> Result<usize> {
    let d = 2 * n + 2;
    if n == 0 || att_out.len() != d {
        return Err(Error::Contract(format!(
            "case-5 decoder for n = {n} expects {d} coordinates, got {}",
            att_out.len()
        )));
    }
    let key_max = (0..n).map(|k| att_out[2 * k]).fold(f64::NEG_INFINITY, f64::max);
    if !(key_max.is_finite() && key_max > 0.0) {
        return Err(Error::DecodeIntegrity(format!("largest key weight {key_max} is not positive")));
    }
    let scale = n as f64 / key_max;
    let tokens = att_out[..=2 * n]
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let x = a * scale;
            let r = x.round();
            if (x - r).abs() > DECODE_TOLERANCE || r < 1.0 || r > n as f64 {
                Err(Error::DecodeIntegrity(format!(
                    "coordinate {j} reads as {:.4}, not a token in [{n}]",
                    x - 1.0
                )))
            } else {
                Ok(r as usize - 1)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<usize> = tokens[..2 * n].iter().step_by(2).copied().collect();
    if !is_permutation(&keys) {
        return Err(Error::DecodeIntegrity(format!("decoded keys {keys:?} are not a permutation")));
    }
    let mut f = vec![0; n];
    for (pair, &k) in tokens[..2 * n].chunks_exact(2).zip(&keys) {
        f[k] = pair[1];
    }
    Ok(f[tokens[2 * n]])
}

/// Two leftmost-hard layers for consecutive, permuted keys.
///
/// Layer 1 (with residual) copies each key `pi(k)` from position `2k` into
/// position `2k+1` by matching the shared pair index in coordinates 4-5.
/// Layer 2 is the same-position lookup over the odd positions; coordinate 6
/// is `-1` on even positions and the query flips its sign, pushing even
/// positions below the matching odd one.
pub fn build_case5_twolayer(n: usize) -> TransformerSpec {
    assert!(n >= 1);
    let (d, m) = (7, n + 1);
    let scalar = Matrix::from_fn(n, d, |k, j| if j < 2 { cs(m, k)[j] } else { 0.0 });
    let pos = Matrix::from_fn(2 * n + 1, d, |i, j| match j {
        4 | 5 => cs(m, i / 2)[j - 4],
        6 if i % 2 == 0 => -1.0,
        _ => 0.0,
    });
    let copy_key = AttentionLayerParams {
        wq: selector(3, d, &[(0, 4, 1.0), (1, 5, 1.0)]),
        wk: selector(3, d, &[(0, 4, 1.0), (1, 5, 1.0)]),
        wv: selector(d, d, &[(2, 0, 1.0), (3, 1, 1.0)]),
        d_hid: 3,
        kind: AttentionKind::LeftmostHard,
        residual: true,
    };
    let lookup = AttentionLayerParams {
        wq: selector(3, d, &[(0, 0, 1.0), (1, 1, 1.0), (2, 6, -1.0)]),
        wk: selector(3, d, &[(0, 2, 1.0), (1, 3, 1.0), (2, 6, 1.0)]),
        wv: selector(d, d, &[(0, 0, 1.0), (1, 1, 1.0)]),
        d_hid: 3,
        kind: AttentionKind::LeftmostHard,
        residual: false,
    };
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case: PresentationCase::ConsecutivePermuted,
        d,
        heads: 1,
        token_embed: TokenEmbedding { scalar, pair: None },
        pos_embed: Some(pos),
        layers: vec![Layer::Attention(copy_key), Layer::Attention(lookup)],
        output: circle_unembed(n, m, d),
    }
}

/// A spec that always answers 0: zero weights everywhere, no layers.
pub fn constant_spec(case: PresentationCase, n: usize) -> TransformerSpec {
    assert!(n >= 1);
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case,
        d: 1,
        heads: 1,
        token_embed: TokenEmbedding {
            scalar: Matrix::zeros(n, 1),
            pair: case.uses_pairs().then(|| Matrix::zeros(n * n, 1)),
        },
        pos_embed: None,
        layers: Vec::new(),
        output: OutputStage::Unembed { u: Matrix::zeros(n, 1) },
    }
}

/// Named builders, as used by the sweep engine and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    Case1,
    Case3,
    Case4,
    #[serde(rename = "case5-soft")]
    Case5Soft,
    #[serde(rename = "case5-two-layer")]
    Case5TwoLayer,
    Constant,
}

impl Builder {
    pub const CONSTRUCTIONS: [Builder; 5] =
        [Self::Case1, Self::Case3, Self::Case4, Self::Case5Soft, Self::Case5TwoLayer];

    pub fn name(self) -> &'static str {
        match self {
            Self::Case1 => "case1",
            Self::Case3 => "case3",
            Self::Case4 => "case4",
            Self::Case5Soft => "case5-soft",
            Self::Case5TwoLayer => "case5-two-layer",
            Self::Constant => "constant",
        }
    }

    /// The construction for a presentation case; case 2 reuses the case-3 builder.
    pub fn for_case(case: PresentationCase, two_layer: bool) -> Self {
        match case {
            PresentationCase::NoKeys => Self::Case1,
            PresentationCase::SamePosOrdered | PresentationCase::SamePosPermuted => Self::Case3,
            PresentationCase::ConsecutiveOrdered => Self::Case4,
            PresentationCase::ConsecutivePermuted if two_layer => Self::Case5TwoLayer,
            PresentationCase::ConsecutivePermuted => Self::Case5Soft,
        }
    }

    /// Whether the builder's spec accepts inputs laid out as `case`.
    pub fn supports(self, case: PresentationCase) -> bool {
        match self {
            Self::Constant => true,
            Self::Case3 => case.uses_pairs(),
            b => Self::for_case(case, b == Self::Case5TwoLayer) == b,
        }
    }

    /// Native case of the builder's spec; the constant baseline uses case 5.
    pub fn native_case(self) -> PresentationCase {
        match self {
            Self::Case1 => PresentationCase::NoKeys,
            Self::Case3 => PresentationCase::SamePosPermuted,
            Self::Case4 => PresentationCase::ConsecutiveOrdered,
            Self::Case5Soft | Self::Case5TwoLayer | Self::Constant => PresentationCase::ConsecutivePermuted,
        }
    }

    pub fn build(self, n: usize) -> TransformerSpec {
        match self {
            Self::Case1 => build_case1(n),
            Self::Case3 => build_case3(n),
            Self::Case4 => build_case4(n),
            Self::Case5Soft => build_case5_soft(n),
            Self::Case5TwoLayer => build_case5_twolayer(n),
            Self::Constant => constant_spec(self.native_case(), n),
        }
    }

    /// The builder's spec relabelled for `case`.
    pub fn build_for(self, case: PresentationCase, n: usize) -> Result<TransformerSpec> {
        if !self.supports(case) {
            return Err(Error::InvalidInput(format!("builder {self} does not handle case {case}")));
        }
        match self {
            Self::Constant => Ok(constant_spec(case, n)),
            _ => self.build(n).with_case(case),
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Self::Case1, Self::Case3, Self::Case4, Self::Case5Soft, Self::Case5TwoLayer, Self::Constant]
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown builder {s:?}")))
    }
}

/// Shape of a randomly drawn spec.
#[derive(Debug, Clone)]
pub struct RandomSpecOptions {
    pub n: usize,
    pub case: PresentationCase,
    pub d: usize,
    pub attention_layers: usize,
    /// `None` draws a kind per layer.
    pub kind: Option<AttentionKind>,
    pub residual: bool,
    /// Append a ReLU MLP with this inner width after each attention layer.
    pub mlp_width: Option<usize>,
    pub position_embedding: bool,
}

impl RandomSpecOptions {
    pub fn one_layer(n: usize, case: PresentationCase, d: usize, kind: AttentionKind) -> Self {
        Self {
            n,
            case,
            d,
            attention_layers: 1,
            kind: Some(kind),
            residual: false,
            mlp_width: None,
            position_embedding: true,
        }
    }
}

/// Spec with weights drawn uniformly from `[-1, 1)`.
pub fn random_spec(opts: &RandomSpecOptions, seed: u64) -> TransformerSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, d) = (opts.n, opts.d);
    let mat = |r: usize, c: usize, rng: &mut ChaCha8Rng| Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
    let scalar = mat(n, d, &mut rng);
    let pair = opts.case.uses_pairs().then(|| mat(n * n, d, &mut rng));
    let pos_embed = opts.position_embedding.then(|| mat(opts.case.seq_len(n), d, &mut rng));
    let mut layers = Vec::new();
    for _ in 0..opts.attention_layers {
        let d_hid = rng.gen_range(1..=d);
        let kind = opts.kind.unwrap_or_else(|| match rng.gen_range(0..4) {
            0 => AttentionKind::Softmax,
            1 => AttentionKind::LeftmostHard,
            2 => AttentionKind::RightmostHard,
            _ => AttentionKind::AverageHard,
        });
        layers.push(Layer::Attention(AttentionLayerParams {
            wq: mat(d_hid, d, &mut rng),
            wk: mat(d_hid, d, &mut rng),
            wv: mat(d, d, &mut rng),
            d_hid,
            kind,
            residual: opts.residual,
        }));
        if let Some(w) = opts.mlp_width {
            let b1 = (0..w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b2 = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            layers.push(Layer::Mlp(MlpLayerParams {
                w1: mat(w, d, &mut rng),
                b1,
                w2: mat(d, w, &mut rng),
                b2,
            }));
        }
    }
    let u = mat(n, d, &mut rng);
    TransformerSpec {
        spec_version: SPEC_VERSION,
        n,
        case: opts.case,
        d,
        heads: 1,
        token_embed: TokenEmbedding { scalar, pair },
        pos_embed,
        layers,
        output: OutputStage::Unembed { u },
    }
}
