//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::fs;
use std::time::{Duration, Instant};

use costboost::boosting::{boost_to_list, BoostConfig};
use costboost::games::{game_value, threshold_ladder, CostMatrix, LabelSet, SimplexDist};
use costboost::harness::{
    oracle_game_value, run_and_write, run_experiment, BoostOverrides, CostSpec, Experiment, ExperimentConfig,
    ExperimentResult, MultiCostSpec,
};
use costboost::learners::{planted_noise_learner, Instance, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn closed_form_binary() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let wp = 1.0 - rng.random::<f64>();
        let wm = 1.0 - rng.random::<f64>();
        let w = CostMatrix::binary(wp, wm).unwrap();
        let v = game_value(&w, LabelSet::full(2)).unwrap().value;
        worst = worst.max((v - wp * wm / (wp + wm)).abs());
    }
    let t = start.elapsed();
    Outcome { pass: worst <= 1e-9 && within(t, 1), detail: format!("max error {worst:.3e}, {t:.2?}") }
}

fn zero_one_ladder() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut shape_ok = true;
    for k in 2..=6 {
        let ladder = threshold_ladder(&CostMatrix::zero_one(k).unwrap()).unwrap();
        shape_ok &= ladder.levels.len() == k;
        for (s, v) in ladder.levels.iter().enumerate() {
            let expected = s as f64 / (s + 1) as f64;
            worst = worst.max((v - expected).abs());
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: shape_ok && worst <= 1e-9 && within(t, 5),
        detail: format!("max error {worst:.3e}, level counts ok = {shape_ok}, {t:.2?}"),
    }
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let worst = (0..50u64)
        .map(|seed| {
            let w = CostMatrix::random(3, 1000 + seed).unwrap();
            LabelSet::all_nonempty(3)
                .map(|set| {
                    let lp = game_value(&w, set).unwrap().value;
                    (lp - oracle_game_value(&w, set, 1e-3).unwrap()).abs()
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let t = start.elapsed();
    Outcome { pass: worst <= 2e-3 && within(t, 120), detail: format!("max |LP - grid| {worst:.3e}, {t:.2?}") }
}

fn dichotomy(regret: &mut Vec<bool>) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (wp, wm) in [(1.0, 1.0), (1.0, 0.25)] {
        let v = game_value(&CostMatrix::binary(wp, wm).unwrap(), LabelSet::full(2)).unwrap().value;
        for (idx, z) in [v - 0.1, v - 0.05, v].into_iter().enumerate() {
            let cfg = ExperimentConfig {
                id: "dichotomy".into(),
                seed: 40 + idx as u64,
                experiment: Experiment::Dichotomy {
                    cost: CostSpec::Binary { w_plus: wp, w_minus: wm },
                    z_values: vec![z],
                    domain_size: 100,
                    sample_size: 2000,
                    train_fraction: 0.5,
                    epsilon: 0.02,
                    boost: BoostOverrides::default(),
                },
                output_dir: None,
            };
            let start = Instant::now();
            let report = run_experiment(&cfg).unwrap();
            let t = start.elapsed();
            let ExperimentResult::Dichotomy(d) = &report.result else { unreachable!() };
            let cell = &d.cells[0];
            let ok = if z < v {
                let b = cell.boosted.as_ref();
                regret.push(b.is_some_and(|b| b.regret_within_bound));
                b.is_some_and(|b| b.training_error == 0.0 && b.holdout_cost <= 0.02 && b.holdout_zero_one <= 0.02)
            } else {
                let rejected = cell.rejected.as_ref().is_some_and(|m| m.contains("not boostable"));
                rejected && cell.coin.as_ref().is_some_and(|c| c.certified)
            };
            let ok = ok && report.oracles.iter().all(|o| o.pass) && within(t, 120);
            pass &= ok;
            let what = match (&cell.boosted, &cell.coin) {
                (Some(b), _) => format!(
                    "T={} train {:.4} holdout cost {:.4} 0-1 {:.4}",
                    b.rounds, b.training_error, b.holdout_cost, b.holdout_zero_one
                ),
                (None, Some(c)) => format!("rejected, coin certified = {}", c.certified),
                _ => "no outcome".into(),
            };
            lines.push(format!("w=({wp},{wm}) z={z:.3}: {what} [{t:.1?}]"));
        }
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn sqrt_boundary() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        id: "region".into(),
        seed: 0,
        experiment: Experiment::RegionTrace {
            costs: MultiCostSpec::PopulationDriven,
            resolution: 100,
            alpha_grid: 400,
            tolerance: 1e-6,
        },
        output_dir: None,
    };
    let report = run_experiment(&cfg).unwrap();
    let t = start.elapsed();
    let ExperimentResult::RegionTrace(r) = &report.result else { unreachable!() };
    let res = r.max_sqrt_residual.unwrap_or(f64::INFINITY);
    Outcome {
        pass: res <= 5e-3 && r.max_discrepancy <= 5e-3 && within(t, 60),
        detail: format!(
            "{} points, sqrt residual {res:.3e}, envelope discrepancy {:.3e}, {t:.2?}",
            r.points.len(),
            r.max_discrepancy
        ),
    }
}

fn buckets(regret: &mut Vec<bool>) -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        id: "buckets".into(),
        seed: 6,
        experiment: Experiment::Multichotomy {
            cost: CostSpec::ZeroOne { k: 3 },
            z_values: vec![0.55],
            domain_size: 100,
            sample_size: 2000,
            train_fraction: 0.5,
            epsilon: 0.02,
            boost: BoostOverrides::default(),
        },
        output_dir: None,
    };
    let report = run_experiment(&cfg).unwrap();
    let t = start.elapsed();
    let ExperimentResult::Multichotomy(m) = &report.result else { unreachable!() };
    let c = &m.cells[0];
    regret.push(c.regret_within_bound);
    let floor = c.floor.unwrap_or(f64::NEG_INFINITY);
    Outcome {
        pass: c.achieved <= 0.5 + 0.02 && floor >= 0.5 - 0.02 && within(t, 180),
        detail: format!(
            "bucket {} level {:.4}: achieved {:.4}, floor {floor:.4} on J = {}, max list size {}, {t:.2?}",
            c.bucket,
            c.level,
            c.achieved,
            c.floor_subset.map_or("-".into(), |s| s.to_string()),
            c.max_list_size
        ),
    }
}

fn list_fuzz(regret: &mut Vec<bool>) -> Outcome {
    let start = Instant::now();
    let results: Vec<(f64, bool)> = (0..1000u64)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(7_000 + run);
            // Margins below 1e-3 would need astronomically large query samples.
            let (k, w, z) = loop {
                let k = rng.random_range(2..=4);
                let w = CostMatrix::random_with(k, &mut rng).unwrap();
                let ladder = threshold_ladder(&w).unwrap();
                let z = rng.random::<f64>() * ladder.levels.last().unwrap();
                if ladder.margin(z) > 1e-3 {
                    break (k, w, z);
                }
            };
            let inst = Instance::random_with(30, &SimplexDist::uniform(k), &mut rng).unwrap();
            let sample = Sample::draw(&inst, 80, &mut rng);
            let learner = planted_noise_learner(&w, z, &inst).unwrap();
            let cfg = BoostConfig { rounds: Some(rng.random_range(5..=40)), record_rounds: false, ..BoostConfig::seeded(run) };
            let out = boost_to_list(&learner, &sample, 30, &cfg).unwrap();
            let sigma = out.report.params.sigma.unwrap();
            let excess = out.list.max_list_value().unwrap() - (z + sigma);
            (excess, out.report.regret.within_bound)
        })
        .collect();
    let t = start.elapsed();
    let worst = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    regret.extend(results.iter().map(|r| r.1));
    Outcome {
        pass: worst <= 1e-9 && within(t, 300),
        detail: format!("1000 runs, max V_mu - (z + sigma) = {worst:.3e}, {t:.2?}"),
    }
}

fn equivalence() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        id: "equivalence".into(),
        seed: 8,
        experiment: serde_json::from_value(serde_json::json!({
            "kind": "equivalence",
            "costs": {"type": "population-driven"},
            "z": [0.1, 0.4],
            "domain_size": 100,
            "sample_size": 2000
        }))
        .unwrap(),
        output_dir: None,
    };
    let report = run_experiment(&cfg).unwrap();
    let t = start.elapsed();
    let ExperimentResult::Equivalence(e) = &report.result else { unreachable!() };
    let fwd = e.forward.as_ref().unwrap();
    let bound = 1.0 / 10.0 + 0.02;
    let violations_ok = fwd.violation_fraction.iter().all(|&v| v <= bound);
    let max_forward = e.forward_slack.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: max_forward <= 0.05 && e.converse_slack <= 0.05 && violations_ok && e.violation_pass && within(t, 180),
        detail: format!(
            "forward slack {max_forward:.4}, converse slack {:.4}, violation fractions {:?} (bound {bound:.2}), {t:.2?}",
            e.converse_slack, fwd.violation_fraction
        ),
    }
}

fn regret_ledger(regret: &[bool]) -> Outcome {
    let bad = regret.iter().filter(|ok| !**ok).count();
    Outcome { pass: bad == 0 && !regret.is_empty(), detail: format!("{} runs checked, {bad} over the bound", regret.len()) }
}

fn determinism() -> Outcome {
    let configs = vec![
        r#"{"id":"d","seed":5,"experiment":{"kind":"dichotomy","cost":{"type":"binary","w_plus":1.0,"w_minus":0.5},"z_values":[0.2,0.4],"domain_size":30,"sample_size":300}}"#,
        r#"{"id":"m","seed":5,"experiment":{"kind":"multichotomy","cost":{"type":"random","k":3,"seed":11},"z_values":[0.1,0.3],"domain_size":30,"sample_size":300}}"#,
        r#"{"id":"r","seed":5,"experiment":{"kind":"region-trace","costs":{"type":"population-driven"},"resolution":20}}"#,
        r#"{"id":"e","seed":5,"experiment":{"kind":"equivalence","costs":{"type":"population-driven"},"z":[0.1,0.4],"domain_size":40,"sample_size":400}}"#,
    ];
    let mut identical = 0;
    let mut details = Vec::new();
    for text in &configs {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        let bytes: Vec<Vec<(String, Vec<u8>)>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                cfg.output_dir = Some(dir.path().to_path_buf());
                let (_, run_dir) = run_and_write(&cfg).unwrap();
                let run_dir = run_dir.unwrap();
                let mut files: Vec<_> = fs::read_dir(&run_dir)
                    .unwrap()
                    .map(|e| {
                        let e = e.unwrap();
                        (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
                    })
                    .collect();
                files.sort();
                files
            })
            .collect();
        if bytes[0] == bytes[1] {
            identical += 1;
        } else {
            details.push(format!("{} differs", cfg.id));
        }
    }
    Outcome {
        pass: identical == configs.len(),
        detail: format!("{identical}/{} experiments byte-identical {}", configs.len(), details.join(", ")),
    }
}

fn main() {
    let mut regret = Vec::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!("criterion {n} ({name}): {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    };
    report(1, "closed-form binary game value", closed_form_binary());
    report(2, "0-1 threshold ladder", zero_one_ladder());
    report(3, "LP vs grid oracle", oracle_agreement());
    report(4, "binary dichotomy", dichotomy(&mut regret));
    report(5, "sqrt boundary", sqrt_boundary());
    report(6, "multiclass buckets", buckets(&mut regret));
    report(7, "list boundedness fuzz", list_fuzz(&mut regret));
    report(8, "equivalence pipeline", equivalence());
    report(9, "hedge regret ledger", regret_ledger(&regret));
    report(10, "determinism", determinism());
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
