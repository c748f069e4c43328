//! Rounding embeddings and head outputs to p fractional bits.

use lookup_workbench::constructions::build_case4;
use lookup_workbench::precision::{c_size, quantized_forward, QuantizationPolicy};
use lookup_workbench::task::{encode, oracle, random_instance, FunctionClass, PresentationCase};

fn main() -> lookup_workbench::Result<()> {
    let n = 32;
    let case = PresentationCase::ConsecutiveOrdered;
    let spec = build_case4(n);
    let insts: Vec<_> = (0..2000).map(|s| random_instance(n, FunctionClass::AllFunctions, case, s)).collect();
    for p in 1..=8 {
        let q = QuantizationPolicy::new(p);
        let mut correct = 0;
        for inst in &insts {
            if quantized_forward(&spec, &encode(inst, case)?, &q)? == oracle(inst) {
                correct += 1;
            }
        }
        println!("p = {p}: {correct}/{} correct, c-size {}", insts.len(), c_size(&spec, p).product);
    }
    Ok(())
}
