//! The two case-5 constructions side by side: one softmax layer of width 2n+2
//! with a functional read-out, and two hard layers of width 7.

use lookup_workbench::constructions::{build_case5_soft, build_case5_twolayer, case5_soft_decode};
use lookup_workbench::precision::k_size;
use lookup_workbench::task::{encode, oracle, random_instance, FunctionClass, PresentationCase};
use lookup_workbench::transformer::forward_trace;

fn main() -> lookup_workbench::Result<()> {
    let n = 6;
    let case = PresentationCase::ConsecutivePermuted;
    let inst = random_instance(n, FunctionClass::AllFunctions, case, 42);
    let tokens = encode(&inst, case)?;
    println!("instance {}", inst.to_json_line());

    let soft = build_case5_soft(n);
    let tr = forward_trace(&soft, &tokens)?;
    println!("softmax: d = {}, weights at the target = {:.4?}", soft.d, tr.attention[0].weights);
    println!("  decoded {} (oracle {})", case5_soft_decode(&tr.y_last, n)?, oracle(&inst));

    let two = build_case5_twolayer(n);
    let tr = forward_trace(&two, &tokens)?;
    let attended: Vec<usize> = tr
        .attention
        .iter()
        .map(|a| a.weights.iter().position(|&w| w == 1.0).unwrap())
        .collect();
    println!("two-layer: d = {}, target row attends to positions {attended:?}", two.d);
    println!("  output {} (oracle {})", tr.output, oracle(&inst));
    println!("k-size soft {:?}, two-layer {:?}", k_size(&soft), k_size(&two));
    Ok(())
}
