//! Threshold ladders: which guarantees are boostable, and to lists of what size.
//!
//! cargo run --example threshold_ladder

use costboost::games::{threshold_ladder, CostMatrix};

fn main() -> costboost::Result<()> {
    for k in 2..=5 {
        let ladder = threshold_ladder(&CostMatrix::zero_one(k)?)?;
        println!("0-1 loss, k = {k}: levels {:.4?}", ladder.levels);
    }

    let w = CostMatrix::random(4, 3)?;
    let ladder = threshold_ladder(&w)?;
    println!("\nrandom 4-label cost");
    for (n, (v, sets)) in ladder.levels.iter().zip(&ladder.witnesses).enumerate() {
        let names: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        println!("  v_{} = {v:.6}  attained by {}", n + 1, names.join(" "));
    }
    for z in [0.05, 0.2, 0.4, 0.6] {
        println!(
            "  z = {z:.2}: bucket {}, margin {:.4}, list size {}",
            ladder.bucket_of(z),
            ladder.margin(z),
            ladder.list_size_for(z)
        );
    }
    Ok(())
}
