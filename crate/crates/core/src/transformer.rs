//! Encoder-only transformers with one head per attention layer.
//!
//! Supports softmax attention and the three hard-attention rules (leftmost,
//! rightmost, average), optional residuals, ReLU MLP layers and an argmax
//! unembedding. There is no masking, layer normalization or dropout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, vec_strings, Matrix};
use crate::precision::QuantizationPolicy;
use crate::task::{PresentationCase, Token};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionKind {
    Softmax,
    LeftmostHard,
    RightmostHard,
    AverageHard,
}

impl AttentionKind {
    pub const HARD: [AttentionKind; 3] = [Self::LeftmostHard, Self::RightmostHard, Self::AverageHard];

    pub fn is_hard(self) -> bool {
        self != Self::Softmax
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionLayerParams {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub d_hid: usize,
    pub kind: AttentionKind,
    pub residual: bool,
}

impl AttentionLayerParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.d_hid == 0 {
            return Err(Error::Contract("d_hid must be at least 1".into()));
        }
        for (name, m) in [("wq", &self.wq), ("wk", &self.wk)] {
            if m.rows() != self.d_hid || m.cols() != d {
                return Err(Error::Contract(format!(
                    "{name} is {}x{}, expected {}x{d}",
                    m.rows(),
                    m.cols(),
                    self.d_hid
                )));
            }
        }
        if self.wv.rows() != d || self.wv.cols() != d {
            return Err(Error::Contract(format!(
                "wv is {}x{}, expected {d}x{d}",
                self.wv.rows(),
                self.wv.cols()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpLayerParams {
    pub w1: Matrix,
    #[serde(with = "vec_strings")]
    pub b1: Vec<f64>,
    pub w2: Matrix,
    #[serde(with = "vec_strings")]
    pub b2: Vec<f64>,
}

impl MlpLayerParams {
    pub fn inner_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn param_count(&self) -> usize {
        self.w1.rows() * self.w1.cols() + self.b1.len() + self.w2.rows() * self.w2.cols() + self.b2.len()
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let dm = self.w1.rows();
        let ok = self.w1.cols() == d
            && self.b1.len() == dm
            && self.w2.rows() == d
            && self.w2.cols() == dm
            && self.b2.len() == d;
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "MLP shapes w1 {}x{}, b1 {}, w2 {}x{}, b2 {} inconsistent with d = {d}",
                self.w1.rows(),
                self.w1.cols(),
                self.b1.len(),
                self.w2.rows(),
                self.w2.cols(),
                self.b2.len()
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Layer {
    Attention(AttentionLayerParams),
    Mlp(MlpLayerParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderTag {
    #[serde(rename = "case5-soft")]
    Case5Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OutputStage {
    /// Argmax row of `u · y`.
    Unembed { u: Matrix },
    /// Exact position-wise decoder standing in for a large MLP.
    FunctionalDecoder { tag: DecoderTag, n: usize },
}

/// Token embedding tables. `pair[k * n + v]` embeds the pair token `(k, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenEmbedding {
    pub scalar: Matrix,
    pub pair: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerSpec {
    pub spec_version: u32,
    pub n: usize,
    pub case: PresentationCase,
    pub d: usize,
    pub heads: usize,
    pub token_embed: TokenEmbedding,
    /// `None` is the all-zeros position embedding.
    pub pos_embed: Option<Matrix>,
    pub layers: Vec<Layer>,
    pub output: OutputStage,
}

impl TransformerSpec {
    pub fn seq_len(&self) -> usize {
        self.case.seq_len(self.n)
    }

    pub fn attention_layers(&self) -> impl Iterator<Item = &AttentionLayerParams> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Attention(a) => Some(a),
            Layer::Mlp(_) => None,
        })
    }

    pub fn num_attention_layers(&self) -> usize {
        self.attention_layers().count()
    }

    pub fn mlp_param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Mlp(m) => m.param_count(),
                Layer::Attention(_) => 0,
            })
            .sum()
    }

    /// Same weights, relabelled presentation case. Both cases must share a layout shape.
    pub fn with_case(mut self, case: PresentationCase) -> Result<Self> {
        if case.seq_len(self.n) != self.seq_len() || case.uses_pairs() != self.case.uses_pairs() {
            return Err(Error::Contract(format!(
                "cannot relabel a case-{} spec as case {case}",
                self.case
            )));
        }
        self.case = case;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.n, self.d);
        let bad = |m: String| Err(Error::Spec(m));
        if self.spec_version != SPEC_VERSION {
            return bad(format!("unsupported spec_version {}", self.spec_version));
        }
        if n == 0 || d == 0 {
            return bad("n and d must be positive".into());
        }
        if self.heads != 1 {
            return bad(format!("only single-head specs are supported, got {}", self.heads));
        }
        let te = &self.token_embed;
        if te.scalar.rows() != n || te.scalar.cols() != d {
            return bad(format!(
                "scalar token table is {}x{}, expected {n}x{d}",
                te.scalar.rows(),
                te.scalar.cols()
            ));
        }
        match (&te.pair, self.case.uses_pairs()) {
            (Some(p), _) if p.rows() != n * n || p.cols() != d => {
                return bad(format!("pair token table is {}x{}, expected {}x{d}", p.rows(), p.cols(), n * n))
            }
            (None, true) => return bad(format!("case {} needs a pair token table", self.case)),
            _ => {}
        }
        if let Some(p) = &self.pos_embed {
            if p.rows() != self.seq_len() || p.cols() != d {
                return bad(format!(
                    "position table is {}x{}, expected {}x{d}",
                    p.rows(),
                    p.cols(),
                    self.seq_len()
                ));
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let r = match layer {
                Layer::Attention(a) => a.validate(d),
                Layer::Mlp(m) => m.validate(d),
            };
            r.map_err(|e| Error::Spec(format!("layer {i}: {e}")))?;
        }
        match &self.output {
            OutputStage::Unembed { u } => {
                if u.rows() != n || u.cols() != d {
                    return bad(format!("unembedding is {}x{}, expected {n}x{d}", u.rows(), u.cols()));
                }
            }
            OutputStage::FunctionalDecoder { n: dn, .. } => {
                if *dn != n || d != 2 * n + 2 {
                    return bad(format!("case-5 decoder needs n = {n} and d = {}", 2 * n + 2));
                }
            }
        }
        let all_finite = |m: &Matrix| m.as_slice().iter().all(|x| x.is_finite());
        let mut mats: Vec<&Matrix> = vec![&te.scalar];
        mats.extend(te.pair.as_ref());
        mats.extend(self.pos_embed.as_ref());
        for l in &self.layers {
            match l {
                Layer::Attention(a) => mats.extend([&a.wq, &a.wk, &a.wv]),
                Layer::Mlp(m) => mats.extend([&m.w1, &m.w2]),
            }
        }
        if let OutputStage::Unembed { u } = &self.output {
            mats.push(u);
        }
        if !mats.into_iter().all(all_finite) {
            return bad("non-finite weight".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Softmax with max-subtraction.
pub fn softmax_weights(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty vector".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite attention score".into()));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Indices of the maximal scores, compared by exact equality.
pub fn maximal_set(scores: &[f64]) -> Vec<usize> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == max)
        .map(|(j, _)| j)
        .collect()
}

pub fn hard_weights(scores: &[f64], kind: AttentionKind) -> Result<Vec<f64>> {
    if kind == AttentionKind::Softmax {
        return Err(Error::Contract("hard_weights called with softmax attention".into()));
    }
    if scores.is_empty() {
        return Err(Error::InvalidInput("hard attention over an empty vector".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite attention score".into()));
    }
    let m = maximal_set(scores);
    let mut w = vec![0.0; scores.len()];
    match kind {
        AttentionKind::LeftmostHard => w[m[0]] = 1.0,
        AttentionKind::RightmostHard => w[m[m.len() - 1]] = 1.0,
        AttentionKind::AverageHard => {
            let share = 1.0 / m.len() as f64;
            for j in m {
                w[j] = share;
            }
        }
        AttentionKind::Softmax => unreachable!(),
    }
    Ok(w)
}

pub fn attention_weights(scores: &[f64], kind: AttentionKind) -> Result<Vec<f64>> {
    match kind {
        AttentionKind::Softmax => softmax_weights(scores),
        _ => hard_weights(scores, kind),
    }
}

fn check_token(spec: &TransformerSpec, tok: Token, pos: usize, last: usize) -> Result<&[f64]> {
    let n = spec.n;
    let want_pair = spec.case.uses_pairs() && pos != last;
    match tok {
        Token::Scalar(v) if !want_pair => {
            if v >= n {
                return Err(Error::Encoding(format!("token {v} at position {pos} outside [{n}]")));
            }
            Ok(spec.token_embed.scalar.row(v))
        }
        Token::Pair(k, v) if want_pair => {
            if k >= n || v >= n {
                return Err(Error::Encoding(format!("pair ({k}, {v}) at position {pos} outside [{n}]")));
            }
            let table = spec.token_embed.pair.as_ref().ok_or_else(|| Error::Encoding("no pair table".into()))?;
            Ok(table.row(k * n + v))
        }
        _ => Err(Error::Encoding(format!(
            "token {tok:?} at position {pos} has the wrong kind for case {}",
            spec.case
        ))),
    }
}

/// Input embedding: row `i` is `token_embed(x_i) + pos_embed(i)`.
pub fn embed(spec: &TransformerSpec, tokens: &[Token]) -> Result<Matrix> {
    let len = spec.seq_len();
    if tokens.len() != len {
        return Err(Error::Encoding(format!(
            "case {} with n = {} expects {len} tokens, got {}",
            spec.case,
            spec.n,
            tokens.len()
        )));
    }
    let mut x = Matrix::zeros(len, spec.d);
    for (i, &tok) in tokens.iter().enumerate() {
        let w = check_token(spec, tok, i, len - 1)?;
        let row = x.row_mut(i);
        row.copy_from_slice(w);
        if let Some(p) = &spec.pos_embed {
            for (r, pv) in row.iter_mut().zip(p.row(i)) {
                *r += pv;
            }
        }
    }
    Ok(x)
}

/// Scores, weights and output for one query position.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTrace {
    pub scores: Vec<f64>,
    pub weights: Vec<f64>,
    /// Weighted sum of values, before any residual.
    pub head: Vec<f64>,
}

struct AttentionEval<'a> {
    layer: &'a AttentionLayerParams,
    x: &'a Matrix,
    keys: Vec<Vec<f64>>,
    values: Vec<Option<Vec<f64>>>,
    scale: f64,
}

impl<'a> AttentionEval<'a> {
    fn new(layer: &'a AttentionLayerParams, x: &'a Matrix) -> Result<Self> {
        let keys = x.iter_rows().map(|r| layer.wk.mul_vec(r)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            layer,
            x,
            keys,
            values: vec![None; x.rows()],
            scale: (layer.d_hid as f64).sqrt(),
        })
    }

    fn value(&mut self, j: usize) -> &[f64] {
        if self.values[j].is_none() {
            let v = self.layer.wv.mul_vec(self.x.row(j)).expect("validated width");
            self.values[j] = Some(v);
        }
        self.values[j].as_deref().unwrap()
    }

    fn query(&mut self, i: usize) -> Result<AttentionTrace> {
        let q = self.layer.wq.mul_vec(self.x.row(i))?;
        let scores: Vec<f64> = self.keys.iter().map(|k| dot(&q, k) / self.scale).collect();
        let weights = attention_weights(&scores, self.layer.kind)?;
        let mut head = vec![0.0; self.x.cols()];
        for (j, &a) in weights.iter().enumerate() {
            if a != 0.0 {
                for (h, v) in head.iter_mut().zip(self.value(j)) {
                    *h += a * v;
                }
            }
        }
        Ok(AttentionTrace { scores, weights, head })
    }
}

fn check_width(x: &Matrix, d: usize) -> Result<()> {
    if x.cols() != d {
        return Err(Error::Contract(format!("input has {} columns, layer expects {d}", x.cols())));
    }
    Ok(())
}

/// Applies an attention layer at every position.
pub fn attention_layer_forward(layer: &AttentionLayerParams, x: &Matrix) -> Result<Matrix> {
    check_width(x, layer.wv.cols())?;
    layer.validate(x.cols())?;
    attention_rows(layer, x, 0, None, None)
}

/// Rows `first..` of the attention output, optionally quantizing head outputs
/// and recording the trace of the final row.
fn attention_rows(
    layer: &AttentionLayerParams,
    x: &Matrix,
    first: usize,
    quant: Option<&QuantizationPolicy>,
    mut trace: Option<&mut Vec<AttentionTrace>>,
) -> Result<Matrix> {
    let mut eval = AttentionEval::new(layer, x)?;
    let mut out = Matrix::zeros(x.rows() - first, x.cols());
    for i in first..x.rows() {
        let mut t = eval.query(i)?;
        if let Some(q) = quant {
            q.quantize_slice(&mut t.head);
        }
        let row = out.row_mut(i - first);
        row.copy_from_slice(&t.head);
        if layer.residual {
            for (r, xi) in row.iter_mut().zip(x.row(i)) {
                *r += xi;
            }
        }
        if i + 1 == x.rows() {
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(t);
            }
        }
    }
    Ok(out)
}

fn mlp_row(layer: &MlpLayerParams, x: &[f64]) -> Result<Vec<f64>> {
    let mut hidden = layer.w1.mul_vec(x)?;
    for (h, b) in hidden.iter_mut().zip(&layer.b1) {
        *h = (*h + b).max(0.0);
    }
    let mut y = layer.w2.mul_vec(&hidden)?;
    for (v, b) in y.iter_mut().zip(&layer.b2) {
        *v += b;
    }
    Ok(y)
}

/// Row-wise `w2 · relu(w1 · x + b1) + b2`.
pub fn mlp_forward(layer: &MlpLayerParams, x: &Matrix) -> Result<Matrix> {
    check_width(x, layer.w1.cols())?;
    layer.validate(x.cols())?;
    let rows = x.iter_rows().map(|r| mlp_row(layer, r)).collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(&rows)
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub fn output_decode(stage: &OutputStage, y_last: &[f64]) -> Result<usize> {
    match stage {
        OutputStage::Unembed { u } => Ok(argmax(&u.mul_vec(y_last)?)),
        OutputStage::FunctionalDecoder { tag: DecoderTag::Case5Soft, n } => {
            crate::constructions::case5_soft_decode(y_last, *n)
        }
    }
}

/// Everything [`forward_trace`] records.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub embedded: Matrix,
    /// Final-position trace of each attention layer, in order.
    pub attention: Vec<AttentionTrace>,
    pub y_last: Vec<f64>,
    pub output: usize,
}

struct Pipeline<'a> {
    spec: &'a TransformerSpec,
    quant: Option<&'a QuantizationPolicy>,
}

impl Pipeline<'_> {
    fn run(&self, tokens: &[Token], mut trace: Option<&mut Vec<AttentionTrace>>) -> Result<(Matrix, Vec<f64>)> {
        let spec = self.spec;
        let mut x = embed(spec, tokens)?;
        if let Some(q) = self.quant {
            q.quantize_slice(x.as_mut_slice());
        }
        let embedded = x.clone();
        // After the last attention layer only the final position matters.
        let last_attn = spec.layers.iter().rposition(|l| matches!(l, Layer::Attention(_)));
        for (li, layer) in spec.layers.iter().enumerate() {
            let only_last = last_attn.is_none_or(|k| li >= k);
            let first = if only_last { x.rows() - 1 } else { 0 };
            x = match layer {
                Layer::Attention(a) => attention_rows(a, &x, first, self.quant, trace.as_deref_mut())?,
                Layer::Mlp(m) => {
                    let rows = (first..x.rows()).map(|i| mlp_row(m, x.row(i))).collect::<Result<Vec<_>>>()?;
                    Matrix::from_rows(&rows)?
                }
            };
        }
        let y_last = x.row(x.rows() - 1).to_vec();
        Ok((embedded, y_last))
    }
}

pub(crate) fn forward_with(
    spec: &TransformerSpec,
    tokens: &[Token],
    quant: Option<&QuantizationPolicy>,
) -> Result<usize> {
    let (_, y_last) = Pipeline { spec, quant }.run(tokens, None)?;
    output_decode(&spec.output, &y_last)
}

pub(crate) fn forward_trace_with(
    spec: &TransformerSpec,
    tokens: &[Token],
    quant: Option<&QuantizationPolicy>,
) -> Result<ForwardTrace> {
    let mut attention = Vec::new();
    let (embedded, y_last) = Pipeline { spec, quant }.run(tokens, Some(&mut attention))?;
    let output = output_decode(&spec.output, &y_last)?;
    Ok(ForwardTrace {
        embedded,
        attention,
        y_last,
        output,
    })
}

/// Embedding, layers in order, then decoding of the final position.
pub fn forward(spec: &TransformerSpec, tokens: &[Token]) -> Result<usize> {
    forward_with(spec, tokens, None)
}

/// [`forward`] that also records the final-position attention of every layer.
pub fn forward_trace(spec: &TransformerSpec, tokens: &[Token]) -> Result<ForwardTrace> {
    forward_trace_with(spec, tokens, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn softmax_examples() {
        let w = softmax_weights(&[0.0, 0.0, 0.0]).unwrap();
        assert!(close(&w, &[1.0 / 3.0; 3], 1e-15));
        let w = softmax_weights(&[1f64.ln(), 2f64.ln(), 3f64.ln()]).unwrap();
        assert!(close(&w, &[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0], 1e-15));
        let scores: Vec<f64> = [0usize, 1, 1, 0, 0].iter().map(|&v| ((v + 1) as f64).ln()).collect();
        let w = softmax_weights(&scores).unwrap();
        assert!(close(&w, &[1.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0], 1e-15));
    }

    #[test]
    fn softmax_rejects_non_finite() {
        assert!(matches!(softmax_weights(&[0.0, f64::NAN]), Err(Error::InvalidInput(_))));
        assert!(matches!(softmax_weights(&[f64::INFINITY]), Err(Error::InvalidInput(_))));
        assert!(softmax_weights(&[]).is_err());
    }

    #[test]
    fn softmax_is_stable_for_large_scores() {
        let w = softmax_weights(&[1000.0, 1000.0]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn hard_weight_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let w = hard_weights(&[0.0, r, 0.0, -r, 0.0], AttentionKind::LeftmostHard).unwrap();
        assert_eq!(w, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(hard_weights(&[1.0, 1.0], AttentionKind::LeftmostHard).unwrap(), vec![1.0, 0.0]);
        assert_eq!(hard_weights(&[1.0, 1.0], AttentionKind::RightmostHard).unwrap(), vec![0.0, 1.0]);
        assert_eq!(hard_weights(&[1.0, 1.0, 0.0], AttentionKind::AverageHard).unwrap(), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn hard_weights_reject_softmax_kind() {
        assert!(matches!(hard_weights(&[1.0], AttentionKind::Softmax), Err(Error::Contract(_))));
    }

    #[test]
    fn argmax_ties_go_left() {
        assert_eq!(argmax(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0, 1.0]), 2);
    }

    #[test]
    fn unembed_examples() {
        let u = Matrix::identity(3);
        let stage = OutputStage::Unembed { u };
        assert_eq!(output_decode(&stage, &[0.0, 0.0, 1.0]).unwrap(), 2);
        assert_eq!(output_decode(&stage, &[0.5, 0.5, 0.5]).unwrap(), 0);
        assert!(output_decode(&stage, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn mlp_examples() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 0.0]]).unwrap();
        let zero = MlpLayerParams {
            w1: Matrix::zeros(3, 2),
            b1: vec![0.0; 3],
            w2: Matrix::zeros(2, 3),
            b2: vec![0.0; 2],
        };
        assert_eq!(mlp_forward(&zero, &x).unwrap(), Matrix::zeros(2, 2));
        let id = MlpLayerParams {
            w1: Matrix::identity(2),
            b1: vec![0.0; 2],
            w2: Matrix::identity(2),
            b2: vec![0.0; 2],
        };
        assert_eq!(mlp_forward(&id, &x).unwrap(), x);
        let mut neg = id.clone();
        neg.w1 = Matrix::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 0.0 });
        let pos = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(mlp_forward(&neg, &pos).unwrap(), Matrix::zeros(1, 2));
    }

    #[test]
    fn mlp_dimension_mismatch() {
        let m = MlpLayerParams {
            w1: Matrix::zeros(3, 2),
            b1: vec![0.0; 2],
            w2: Matrix::zeros(2, 3),
            b2: vec![0.0; 2],
        };
        assert!(matches!(mlp_forward(&m, &Matrix::zeros(1, 2)), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_values_with_residual_is_identity() {
        let layer = AttentionLayerParams {
            wq: Matrix::identity(3),
            wk: Matrix::identity(3),
            wv: Matrix::zeros(3, 3),
            d_hid: 3,
            kind: AttentionKind::Softmax,
            residual: true,
        };
        let x = Matrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 * 0.25 - 1.0);
        assert_eq!(attention_layer_forward(&layer, &x).unwrap(), x);
        assert!(matches!(
            attention_layer_forward(&layer, &Matrix::zeros(2, 4)),
            Err(Error::Contract(_))
        ));
    }
}
