//! The n = 4 lookup traced through the one-layer leftmost-hard construction.

use lookup_workbench::constructions::build_case3;
use lookup_workbench::task::{encode, oracle, Instance};
use lookup_workbench::transformer::forward_trace;

fn main() -> lookup_workbench::Result<()> {
    // f = (2, 2, 3, 1), keys presented in order 0, 2, 1, 3, asking for f(2)
    let inst = Instance::new(vec![2, 2, 3, 1], vec![0, 2, 1, 3], 2)?;
    let spec = build_case3(4);
    let tokens = encode(&inst, spec.case)?;
    println!("tokens: {tokens:?}");

    let trace = forward_trace(&spec, &tokens)?;
    for (i, row) in trace.embedded.iter_rows().enumerate() {
        println!("x_{i} = {row:?}");
    }
    let att = &trace.attention[0];
    println!("scores  = {:?}", att.scores);
    println!("weights = {:?}", att.weights);
    println!("head    = {:?}", trace.y_last);
    println!("output {} (oracle {})", trace.output, oracle(&inst));
    Ok(())
}
