//! Without position embeddings a transformer cannot tell where a token sits,
//! so shuffling everything before the final position changes nothing.

use lookup_workbench::constructions::{random_spec, RandomSpecOptions};
use lookup_workbench::task::{encode, random_instance, FunctionClass, PresentationCase};
use lookup_workbench::transformer::forward_trace;

fn main() -> lookup_workbench::Result<()> {
    let case = PresentationCase::ConsecutivePermuted;
    let n = 5;
    let opts = RandomSpecOptions {
        n,
        case,
        d: 6,
        attention_layers: 2,
        kind: None,
        residual: true,
        mlp_width: Some(4),
        position_embedding: false,
    };
    let spec = random_spec(&opts, 11);
    let inst = random_instance(n, FunctionClass::AllFunctions, case, 12);
    let tokens = encode(&inst, case)?;
    let mut reversed = tokens.clone();
    let last = reversed.len() - 1;
    reversed[..last].reverse();

    let a = forward_trace(&spec, &tokens)?;
    let b = forward_trace(&spec, &reversed)?;
    println!("original {:?} -> {}", a.y_last, a.output);
    println!("reversed {:?} -> {}", b.y_last, b.output);
    Ok(())
}
