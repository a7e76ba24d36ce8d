//! Coin attainability of the one-sided binary pair and its boundary curve.
//!
//! cargo run --example attainability_region

use costboost::attainability::{
    envelope_check, is_coin_attainable, trace_boundary, AttainConfig, GuaranteeVector, MultiCost,
};

fn main() -> costboost::Result<()> {
    let w = MultiCost::population_driven();
    let cfg = AttainConfig::default();

    for z in [[0.25, 0.25], [0.2, 0.2], [0.1, 0.5], [0.0, 1.0]] {
        let verdict = is_coin_attainable(&w, &GuaranteeVector::new(z.to_vec())?, &cfg)?;
        let rule = z[0].sqrt() + z[1].sqrt() >= 1.0;
        print!("z = {z:?}: attainable = {} (sqrt rule says {rule})", verdict.attainable);
        if let Some(wit) = verdict.witness {
            print!(", separated by alpha = {:.3?}", wit.alpha);
        }
        println!();
    }

    let points = trace_boundary(&w, 20, 1e-6, &cfg)?;
    let env = envelope_check(&w, &points, 400)?;
    println!("\nz1        z2        envelope");
    for (p, e) in points.iter().zip(&env.envelope) {
        println!("{:.4}    {:.4}    {:.4}", p.z1, p.z2, e);
    }
    println!("max discrepancy {:.2e}", env.max_discrepancy);
    Ok(())
}
