//! Fixed-point precision: `p` fractional bits, round to nearest, ties to even.
//!
//! Quantization applies to the rows produced by the input embedding and to
//! every attention head output. Everything between those points runs in
//! full `f64`.

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::Builder;
use crate::error::Result;
use crate::task::{self, encode, oracle, FunctionClass, Instance, InstanceSpace, Token};
use crate::transformer::{forward_trace_with, forward_with, ForwardTrace, TransformerSpec};

/// Upper end of the precision search.
pub const MAX_PRECISION: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuantizationPolicy {
    pub p: u32,
}

impl QuantizationPolicy {
    pub fn new(p: u32) -> Self {
        Self { p }
    }

    pub fn quantize(&self, x: f64) -> f64 {
        quantize_value(x, self.p)
    }

    pub fn quantize_slice(&self, xs: &mut [f64]) {
        let scale = (self.p as f64).exp2();
        for x in xs {
            *x = (*x * scale).round_ties_even() / scale;
        }
    }
}

/// Nearest multiple of `2^-p`, ties to the even multiple.
pub fn quantize_value(x: f64, p: u32) -> f64 {
    let scale = (p as f64).exp2();
    (x * scale).round_ties_even() / scale
}

/// [`crate::transformer::forward`] with quantized embeddings and head outputs.
pub fn quantized_forward(spec: &TransformerSpec, tokens: &[Token], policy: &QuantizationPolicy) -> Result<usize> {
    forward_with(spec, tokens, Some(policy))
}

pub fn quantized_forward_trace(
    spec: &TransformerSpec,
    tokens: &[Token],
    policy: &QuantizationPolicy,
) -> Result<ForwardTrace> {
    forward_trace_with(spec, tokens, Some(policy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CSizeReport {
    pub h: usize,
    pub d: usize,
    pub p: u32,
    pub product: u64,
}

/// c-size `h·d·p`.
pub fn c_size(spec: &TransformerSpec, p: u32) -> CSizeReport {
    c_size_of(spec.heads, spec.d, p)
}

pub fn c_size_of(h: usize, d: usize, p: u32) -> CSizeReport {
    CSizeReport {
        h,
        d,
        p,
        product: h as u64 * d as u64 * p as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KSizeReport {
    pub h: usize,
    pub d: usize,
    pub mlp_params: usize,
    pub ksize: usize,
}

/// k-size `max(h, d, MLP parameters)`. The functional decoder counts as zero parameters.
pub fn k_size(spec: &TransformerSpec) -> KSizeReport {
    let mlp_params = spec.mlp_param_count();
    KSizeReport {
        h: spec.heads,
        d: spec.d,
        mlp_params,
        ksize: spec.heads.max(spec.d).max(mlp_params),
    }
}

/// Conciseness envelope `4⌈log₂(n+1)⌉ + 16` for the O(log n) constructions.
pub fn precision_envelope(n: usize) -> u32 {
    4 * ceil_log2(n as u64 + 1) + 16
}

pub(crate) fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

/// Outcome of [`min_exact_precision`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PrecisionSearch {
    /// Smallest `p` at which every checked instance is answered correctly.
    Exact { p_star: u32, instances: u64 },
    /// Even `p = 64` misses some instance.
    Saturated { instances: u64 },
}

impl PrecisionSearch {
    pub fn p_star(&self) -> Option<u32> {
        match *self {
            Self::Exact { p_star, .. } => Some(p_star),
            Self::Saturated { .. } => None,
        }
    }
}

/// The instance set a precision search checks against.
#[derive(Debug, Clone)]
pub enum InstanceSet {
    Exhaustive(InstanceSpace),
    Sampled { n: usize, class: FunctionClass, count: u64, seed: u64 },
}

impl InstanceSet {
    /// Exhaustive when `n <= 4`, otherwise `sample` seeded instances.
    pub fn for_search(n: usize, class: FunctionClass, ordered: bool, sample: u64, seed: u64) -> Result<Self> {
        if n <= 4 {
            Ok(Self::Exhaustive(InstanceSpace::new(n, class, ordered, 4)?))
        } else {
            Ok(Self::Sampled { n, class, count: sample, seed })
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            Self::Exhaustive(s) => s.len(),
            Self::Sampled { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, idx: u64, case: task::PresentationCase) -> Instance {
        match self {
            Self::Exhaustive(s) => s.get(idx),
            Self::Sampled { n, class, seed, .. } => {
                task::random_instance(*n, *class, case, task::derive_seed(*seed, idx))
            }
        }
    }
}

fn all_exact(spec: &TransformerSpec, set: &InstanceSet, policy: &QuantizationPolicy) -> bool {
    let case = spec.case;
    (0..set.len()).into_par_iter().all(|i| {
        let inst = set.get(i, case);
        let tokens = encode(&inst, case).expect("instances match the case");
        quantized_forward(spec, &tokens, policy).ok() == Some(oracle(&inst))
    })
}

/// Smallest `p` in `[1, 64]` reproducing the oracle on `set`, by binary search.
pub fn min_exact_precision_on(spec: &TransformerSpec, set: &InstanceSet) -> PrecisionSearch {
    let instances = set.len();
    let ok = |p: u32| all_exact(spec, set, &QuantizationPolicy::new(p));
    if !ok(MAX_PRECISION) {
        return PrecisionSearch::Saturated { instances };
    }
    let (mut lo, mut hi) = (1, MAX_PRECISION);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    PrecisionSearch::Exact { p_star: lo, instances }
}

/// [`min_exact_precision_on`] for a named builder: exhaustive over all
/// functions for `n <= 4`, otherwise `sample` seeded instances.
pub fn min_exact_precision(builder: Builder, n: usize, sample: u64, seed: u64) -> Result<PrecisionSearch> {
    let spec = builder.build(n);
    let set = InstanceSet::for_search(n, FunctionClass::AllFunctions, spec.case.is_ordered(), sample, seed)?;
    Ok(min_exact_precision_on(&spec, &set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_value(0.3, 3), 0.25);
        for p in [0, 1, 7, 30, 64] {
            assert_eq!(quantize_value(1.0, p), 1.0);
            let tie = (-(p as f64) - 1.0).exp2();
            assert_eq!(quantize_value(tie, p), 0.0);
        }
        // 3 * 2^-3 sits between 2^-2 and 2^-1; the even multiple is 2^-1
        assert_eq!(quantize_value(0.375, 2), 0.5);
        assert_eq!(quantize_value(-0.3, 3), -0.25);
    }

    #[test]
    fn envelope_values() {
        assert_eq!(precision_envelope(1), 4 + 16);
        assert_eq!(precision_envelope(2), 4 * 2 + 16);
        assert_eq!(precision_envelope(64), 44);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(65), 7);
    }

    #[test]
    fn c_size_examples() {
        assert_eq!(c_size_of(1, 4, 16).product, 64);
        assert_eq!(c_size_of(1, 7, 24).product, 168);
        assert_eq!(c_size(&Builder::Case5Soft.build(10), 16).product, 352);
    }

    #[test]
    fn k_size_examples() {
        assert_eq!(k_size(&Builder::Case3.build(4)).ksize, 4);
        assert_eq!(k_size(&Builder::Case5TwoLayer.build(100)).ksize, 7);
    }
}
