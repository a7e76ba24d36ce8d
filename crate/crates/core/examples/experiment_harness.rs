//! Runs a JSON experiment config and writes its run directory.
//!
//! cargo run --release --example experiment_harness -- crates/core/examples/configs/dichotomy.json /tmp/runs

use std::path::PathBuf;

use costboost::harness::{run_and_write, ExperimentConfig, ExperimentResult};

fn main() -> costboost::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/dichotomy.json").into());
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.output_dir = Some(args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("costboost-runs")));

    let (report, dir) = run_and_write(&cfg)?;
    println!("{} ({}) -> {}", report.id, report.config.kind(), dir.unwrap().display());
    for o in &report.oracles {
        println!("  oracle {}: discrepancy {:.2e} (tol {:.0e})", o.quantity, o.discrepancy, o.tolerance);
    }
    match &report.result {
        ExperimentResult::Dichotomy(d) => {
            println!("  V(w) = {:.6}; boosted up to {:?}, trivial from {:?}", d.value, d.last_boosted, d.first_trivial)
        }
        ExperimentResult::Multichotomy(m) => {
            for c in &m.cells {
                println!("  z = {:.3}: level {:.4}, achieved {:.4}, floor {:?}", c.z, c.level, c.achieved, c.floor);
            }
        }
        ExperimentResult::RegionTrace(r) => println!("  envelope discrepancy {:.2e}", r.max_discrepancy),
        ExperimentResult::Equivalence(e) => {
            println!("  forward slack {:.4?}, converse slack {:.4}", e.forward_slack, e.converse_slack)
        }
    }
    println!("  pass = {}", report.pass);
    Ok(())
}
