//! Multiclass boosting into list functions and back to a weak learner.
//!
//! cargo run --release --example list_boosting

use costboost::boosting::{boost_to_list, boost_to_s_list, list_to_weak, BoostConfig, CHECK_TOL};
use costboost::games::{CostMatrix, SimplexDist};
use costboost::learners::{planted_noise_learner, Instance, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> costboost::Result<()> {
    let w = CostMatrix::zero_one(3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = Instance::random_with(100, &SimplexDist::uniform(3), &mut rng)?;
    let (train, holdout) = Sample::draw(&inst, 2000, &mut rng).split(0.5);

    // 0.55 sits between the levels 1/2 and 2/3, so lists of two labels come out.
    let learner = planted_noise_learner(&w, 0.55, &inst)?;
    let out = boost_to_list(&learner, &train, 100, &BoostConfig::seeded(2))?;
    let h = list_to_weak(&w, &out.list.lists, out.list.threshold, CHECK_TOL)?;
    println!(
        "z = 0.55: T = {}, max list size {}, max list value {:.4}, miss rate {:.4}, holdout loss {:.4}",
        out.report.params.rounds,
        out.list.max_list_size(),
        out.list.max_list_value()?,
        out.report.training_error,
        h.sample_loss(&w, &holdout)
    );
    println!("first lists: {:?}", out.list.lists[..5].iter().map(|s| s.to_string()).collect::<Vec<_>>());

    let (s_out, s) = boost_to_s_list(&planted_noise_learner(&w, 0.3, &inst)?, &train, 100, &BoostConfig::seeded(3))?;
    println!("z = 0.3: s = {s}, max list size {}", s_out.list.max_list_size());
    Ok(())
}
