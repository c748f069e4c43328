//! Integers as points on the unit circle, and how well they separate.

use lookup_workbench::constructions::circle_embed;
use lookup_workbench::matrix::dot;

fn main() {
    for k in 0..4 {
        println!("cs_4({k}) = {:?}", circle_embed(4, k));
    }
    // the dot product with itself is 1; any other residue stays below 1 - 1/m^2
    for m in [3usize, 8, 64, 1024] {
        let gap = (1..m as i64)
            .map(|k| 1.0 - dot(&circle_embed(m, 0), &circle_embed(m, k)))
            .fold(f64::INFINITY, f64::min);
        println!("m = {m:>5}: smallest gap {gap:.3e}, guaranteed {:.3e}", 1.0 / (m * m) as f64);
    }
}
