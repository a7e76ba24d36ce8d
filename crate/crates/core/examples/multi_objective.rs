//! Multi-objective boosting from scalarised learners.
//!
//! cargo run --release --example multi_objective

use costboost::attainability::{GuaranteeVector, MultiCost};
use costboost::boosting::{boost_mo, BoostConfig};
use costboost::games::SimplexDist;
use costboost::harness::{planted_pool, planted_scalar_learner};
use costboost::learners::{Instance, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> costboost::Result<()> {
    let w = MultiCost::population_driven();
    let z = GuaranteeVector::new(vec![0.1, 0.4])?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inst = Instance::random_with(100, &SimplexDist::uniform(2), &mut rng)?;
    let (train, holdout) = Sample::draw(&inst, 2000, &mut rng).split(0.5);

    // Every scalar learner confines its errors to the same pool of points.
    let pool = planted_pool(&w, &z, &inst, 0.8, &mut rng);
    let target = inst.target().to_vec();
    let factory = |alpha: &SimplexDist| planted_scalar_learner(&w, &z, alpha, &target, Some(pool.clone()));
    let out = boost_mo(&w, &z, &factory, &train, 100, &BoostConfig::seeded(1))?;

    println!("rounds {}, eta {:.4}, m_hat {}", out.report.rounds, out.report.eta, out.report.m_hat);
    for (i, (c, zi)) in w.costs().iter().zip(z.values()).enumerate() {
        println!(
            "objective {}: holdout {:.4} vs z = {zi}, violation fraction {:.3} (bound {:.3})",
            i + 1,
            out.hypothesis.sample_loss(c, &holdout),
            out.report.violation_fraction[i],
            out.report.violation_bound
        );
    }
    println!("final objective weights {:.3?}", out.report.final_alpha);
    Ok(())
}
