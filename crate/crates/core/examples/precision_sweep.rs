//! Smallest number of fractional bits at which each construction stays exact,
//! and the resulting c-size next to the lower bound.

use lookup_workbench::analysis::csize_lower_bound;
use lookup_workbench::constructions::Builder;
use lookup_workbench::sweep::precision_sweep;

fn main() -> lookup_workbench::Result<()> {
    let ns = [2, 8, 32, 64];
    println!("{:<16} {:>4} {:>4} {:>8} {:>8} {:>8}", "builder", "n", "p*", "envelope", "hdp", "bound");
    for b in [Builder::Case1, Builder::Case3, Builder::Case4, Builder::Case5TwoLayer] {
        for row in precision_sweep(b, b.native_case(), &ns, 2000, 3, 0)? {
            println!(
                "{:<16} {:>4} {:>4} {:>8} {:>8} {:>8}",
                b.name(),
                row.n,
                row.p_star.map_or("-".into(), |p| p.to_string()),
                row.envelope,
                row.csize_at_pstar.map_or("-".into(), |c| c.to_string()),
                csize_lower_bound(row.n)
            );
        }
    }
    Ok(())
}
