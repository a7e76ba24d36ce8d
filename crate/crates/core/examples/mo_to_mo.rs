//! Trading one multi-objective guarantee for another it precedes.
//!
//! cargo run --release --example mo_to_mo

use costboost::attainability::{avoided_sets, precedes, AttainConfig, GuaranteeVector, MultiCost};
use costboost::boosting::{boost_mo_to_mo, BoostConfig};
use costboost::games::SimplexDist;
use costboost::learners::{planted_noise_learner_multi, Instance, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> costboost::Result<()> {
    let w = MultiCost::population_driven();
    let attain = AttainConfig::default();
    let z = GuaranteeVector::new(vec![0.1, 0.1])?;
    let z_prime = GuaranteeVector::new(vec![0.2, 0.3])?;
    let av = avoided_sets(&w, &z_prime, &attain)?;
    println!("avoided under z': {:?}", av.minimal.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    println!("z precedes z': {}", precedes(&w, &z, &z_prime, &attain)?);

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let inst = Instance::random_with(60, &SimplexDist::uniform(2), &mut rng)?;
    let (train, holdout) = Sample::draw(&inst, 1200, &mut rng).split(0.5);
    let learner = planted_noise_learner_multi(&w, &z, &inst, None)?;
    let out = boost_mo_to_mo(&w, &learner, &z, &z_prime, &train, 60, &attain, &BoostConfig::seeded(3))?;
    println!(
        "max list size {}, lists avoid av(z') = {}, lists cover sample = {}",
        out.report.max_list_size, out.report.lists_avoid, out.report.lists_cover_sample
    );
    for (i, (c, zi)) in w.costs().iter().zip(z_prime.values()).enumerate() {
        println!("objective {}: holdout {:.4} vs z' = {zi}", i + 1, out.hypothesis.sample_loss(c, &holdout));
    }
    Ok(())
}
