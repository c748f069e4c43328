//! Every construction against the oracle: exhaustive for small n, sampled beyond.
//!
//! `cargo run --release --example exhaustive_verification`

use lookup_workbench::constructions::Builder;
use lookup_workbench::sweep::{render_reports, run_verification, ReportFormat, SweepConfig};
use lookup_workbench::task::PresentationCase;

fn main() -> lookup_workbench::Result<()> {
    let mut reports = Vec::new();
    for case in PresentationCase::ALL {
        let builders = if case == PresentationCase::ConsecutivePermuted {
            vec![Builder::Case5Soft, Builder::Case5TwoLayer]
        } else {
            vec![Builder::for_case(case, false)]
        };
        for b in builders {
            for n in 1..=3 {
                reports.push(run_verification(&SweepConfig::exhaustive(case, n, b))?);
            }
            reports.push(run_verification(&SweepConfig::sampled(case, 16, b, 5000, 1))?);
        }
    }
    print!("{}", render_reports(&reports, ReportFormat::Csv, false));
    let all = reports.iter().all(|r| r.all_correct());
    println!("all exact: {all}");
    Ok(())
}
