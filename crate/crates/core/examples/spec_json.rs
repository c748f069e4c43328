//! Specs serialize to JSON with every number as an exact decimal string.

use lookup_workbench::constructions::build_case1;
use lookup_workbench::task::{encode, Instance};
use lookup_workbench::transformer::{forward, TransformerSpec};

fn main() -> lookup_workbench::Result<()> {
    let spec = build_case1(3);
    let text = spec.to_json();
    println!("{}", &text[..text.len().min(400)]);
    let back = TransformerSpec::from_json(&text)?;
    assert_eq!(back, spec);

    let inst = Instance::ordered(vec![2, 0, 1], 1)?;
    println!("f(1) = {}", forward(&back, &encode(&inst, back.case)?)?);

    let broken = text.replacen(&format!("\"d\": {}", spec.d), &format!("\"d\": {}", spec.d + 1), 1);
    println!("tampered spec: {}", TransformerSpec::from_json(&broken).unwrap_err());
    Ok(())
}
