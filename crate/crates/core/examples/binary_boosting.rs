//! Boosting a cost-sensitive binary weak learner, and the refusal at V(w).
//!
//! cargo run --release --example binary_boosting

use costboost::boosting::{boost_binary, BoostConfig};
use costboost::games::{CostMatrix, SimplexDist};
use costboost::learners::{planted_noise_learner, Instance, Sample};
use costboost::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> costboost::Result<()> {
    let w = CostMatrix::binary(1.0, 0.25)?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let inst = Instance::random_with(100, &SimplexDist::uniform(2), &mut rng)?;
    let (train, holdout) = Sample::draw(&inst, 2000, &mut rng).split(0.5);
    let zero_one = CostMatrix::zero_one(2)?;

    for z in [0.1, 0.15, 0.2] {
        let learner = planted_noise_learner(&w, z, &inst)?;
        match boost_binary(&learner, &train, 100, &BoostConfig::seeded(1)) {
            Ok(out) => println!(
                "z = {z}: T = {}, training error {:.4}, holdout cost {:.4}, holdout 0-1 {:.4}, regret {:.5} <= {:.5}",
                out.report.params.rounds,
                out.report.training_error,
                out.hypothesis.sample_loss(&w, &holdout),
                out.hypothesis.sample_loss(&zero_one, &holdout),
                out.report.regret.max_regret,
                out.report.regret.bound,
            ),
            Err(e @ Error::NotBoostable { .. }) => println!("z = {z}: {e}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
