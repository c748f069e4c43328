//! The swapped-identity instances realize every labeling of n points.

use lookup_workbench::analysis::{modified_task_oracle, shatter_witness, verify_shattering};

fn main() -> lookup_workbench::Result<()> {
    let labels = [true, false, true];
    for inst in shatter_witness(3, &labels)? {
        println!("{} -> {}", inst.to_json_line(), modified_task_oracle(&inst));
    }
    for n in [2, 4, 8, 12] {
        let r = verify_shattering(n)?;
        println!("n = {n:>2}: {} labelings, shattered {}", r.labelings, r.shattered);
    }
    Ok(())
}
