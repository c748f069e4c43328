//! The two size bounds as plain calculators.

use lookup_workbench::analysis::{csize_lower_bound, error_prob_lower_bound};

fn main() -> lookup_workbench::Result<()> {
    for n in [16, 100, 1024, 1 << 20] {
        println!("n = {n:>8}: h*d*p >= {}", csize_lower_bound(n));
    }
    for (d, p) in [(4, 10), (16, 10), (64, 20)] {
        let b = error_prob_lower_bound(1024, 1, d, p)?;
        println!("n = 1024, d = {d}, p = {p}: error >= {:.4} (small-n warning {})", b.value, b.small_n_warning);
    }
    Ok(())
}
