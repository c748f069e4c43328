//! One hard-attention layer cannot solve the consecutive permuted layout:
//! random specs always miss some member of the 32-sequence adversarial family.

use lookup_workbench::analysis::{adversarial_case5_instances, probe_counterexample};
use lookup_workbench::constructions::{build_case5_twolayer, random_spec, RandomSpecOptions};
use lookup_workbench::task::PresentationCase;
use lookup_workbench::transformer::AttentionKind;

fn main() -> lookup_workbench::Result<()> {
    let n = 4;
    let family = adversarial_case5_instances(n)?;
    for m in family.members.iter().take(3) {
        println!("{:?} x={} y={}: {:?} -> {}", m.side, m.x, m.y, m.tokens, m.expected);
    }
    println!("... {} members", family.members.len());

    for kind in AttentionKind::HARD {
        let mut first = Vec::new();
        for seed in 0..50 {
            let opts = RandomSpecOptions::one_layer(n, PresentationCase::ConsecutivePermuted, 8, kind);
            let hit = probe_counterexample(&random_spec(&opts, seed), n)?;
            first.push(hit.map(|m| m.member));
        }
        let caught = first.iter().filter(|m| m.is_some()).count();
        println!("{kind:?}: {caught}/50 refuted, first failing members {:?}", &first[..8]);
    }
    let two = probe_counterexample(&build_case5_twolayer(n), n)?;
    println!("two-layer construction: {two:?}");
    Ok(())
}
