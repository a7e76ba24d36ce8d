//! Restricted game values, minimax strategies and the grid cross-check.
//!
//! cargo run --example game_values

use costboost::games::{game_value, maximin_strategy, CostMatrix, LabelSet};
use costboost::harness::oracle_game_value;

fn main() -> costboost::Result<()> {
    let skewed = CostMatrix::binary(1.0, 0.25)?;
    let g = game_value(&skewed, LabelSet::full(2))?;
    println!("binary w+ = 1, w- = 0.25: V = {:.9}, p* = {:?}", g.value, g.minimax_strategy.probs());

    let w = CostMatrix::random(3, 7)?;
    println!("random 3-label cost: {:?}", w.entries());
    for set in LabelSet::all_nonempty(3) {
        let g = game_value(&w, set)?;
        let q = maximin_strategy(&w, set)?;
        let grid = oracle_game_value(&w, set, 1e-3)?;
        println!(
            "J = {set:<8} V_J = {:.6}  grid = {:.6}  p* = {:.3?}  q* = {:.3?}",
            g.value,
            grid,
            g.minimax_strategy.probs(),
            q.probs()
        );
    }
    Ok(())
}
