use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use costboost::attainability::{
    is_dice_attainable, separating_subset, AttainConfig, DecisionMode, GuaranteeVector, MultiCost,
};
use costboost::boosting::{boost_binary, boost_mo, boost_to_list, boost_to_s_list, list_to_weak, BoostConfig, CHECK_TOL};
use costboost::games::{game_value, threshold_ladder, CostMatrix, LabelSet, SimplexDist};
use costboost::harness::{oracle_game_value, planted_pool, planted_scalar_learner, run_and_write, ExperimentConfig};
use costboost::learners::{planted_noise_learner, Instance, Sample};
use costboost::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "costboost", version, about = "Cost-sensitive and multi-objective boosting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value and minimax strategy of the game restricted to a label subset.
    GameValue {
        #[arg(long)]
        cost: PathBuf,
        /// 1-based labels, e.g. "1,2"; defaults to every label.
        #[arg(long)]
        subset: Option<String>,
        /// Cross-check against a brute-force grid (k ≤ 3).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Threshold ladder of a cost matrix as JSON.
    Thresholds {
        #[arg(long)]
        cost: PathBuf,
    },
    /// Coin or dice attainability of a guarantee vector.
    Attainable {
        #[command(flatten)]
        costs: CostsArg,
        #[arg(long)]
        z: String,
        /// Restrict the environment to these 1-based labels.
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, value_parser = parse_mode, default_value = "grid")]
        mode: DecisionMode,
        #[arg(long)]
        cross_check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary cost-sensitive boosting of a planted weak learner.
    BoostBinary {
        #[arg(long)]
        cost: PathBuf,
        #[arg(long)]
        z: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Boosting a multiclass weak learner into a bounded list function.
    BoostList {
        #[arg(long)]
        cost: PathBuf,
        #[arg(long)]
        z: f64,
        /// Bound list sizes by the smallest s with z below the size-(s+1) floor.
        #[arg(long)]
        s_list: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Multi-objective boosting over scalarised planted learners.
    BoostMo {
        #[command(flatten)]
        costs: CostsArg,
        #[arg(long)]
        z: String,
        /// Fraction of each budget the planted errors may use.
        #[arg(long, default_value_t = 0.8)]
        pool_fraction: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Whether z precedes z′ in the dice-attainability order.
    Precedes {
        #[command(flatten)]
        costs: CostsArg,
        #[arg(long)]
        z: String,
        #[arg(long)]
        z_prime: String,
    },
    /// Runs an experiment config and writes its run directory.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CostsArg {
    /// JSON list of cost matrices sharing k.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// The pair (w₋, w₊) of one-sided binary costs.
    #[arg(long)]
    population_driven: bool,
}

impl CostsArg {
    fn load(&self) -> Result<MultiCost> {
        match &self.costs {
            Some(path) => {
                let text = read(path)?;
                serde_json::from_str(&text).map_err(|e| Error::Input(format!("bad cost list {}: {e}", path.display())))
            }
            None => Ok(MultiCost::population_driven()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    domain: usize,
    #[arg(long, default_value_t = 2000)]
    sample: usize,
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    /// Instance JSON to learn instead of a random one.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    save_instance: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    m_hat: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Data {
    inst: Instance,
    train: Sample,
    holdout: Sample,
}

impl RunArgs {
    fn config(&self) -> BoostConfig {
        BoostConfig {
            rounds: self.rounds,
            m_hat: self.m_hat,
            delta: self.delta,
            record_rounds: true,
            ..BoostConfig::seeded(self.seed)
        }
    }

    fn data(&self, k: usize) -> Result<Data> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Input("--train-fraction must lie in (0, 1)".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let inst = match &self.instance {
            Some(path) => Instance::load(path)?,
            None => Instance::random_with(self.domain, &SimplexDist::uniform(k), &mut rng)?,
        };
        if inst.k() != k {
            return Err(Error::Input(format!("instance has k = {} but the cost has k = {k}", inst.k())));
        }
        if let Some(path) = &self.save_instance {
            write_json(path, &serde_json::to_value(&inst)?)?;
        }
        let (train, holdout) = Sample::draw(&inst, self.sample, &mut rng).split(self.train_fraction);
        if train.is_empty() || holdout.is_empty() {
            return Err(Error::Input("the split leaves an empty train or holdout sample".into()));
        }
        Ok(Data { inst, train, holdout })
    }
}

fn parse_mode(s: &str) -> std::result::Result<DecisionMode, String> {
    match s {
        "grid" => Ok(DecisionMode::Grid),
        "duality-sweep" => Ok(DecisionMode::DualitySweep),
        _ => Err(format!("unknown mode {s:?}; expected grid or duality-sweep")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn parse_z(text: &str) -> Result<GuaranteeVector> {
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad number {t:?} in {text:?}"))))
        .collect::<Result<Vec<_>>>()?;
    GuaranteeVector::new(values)
}

fn f9(v: f64) -> String {
    format!("{v:.9}")
}

/// JSON number rounded to 9 decimals.
fn n9(v: f64) -> Value {
    json!(f9(v).parse::<f64>().unwrap_or(v))
}

fn fmt_dist(p: &[f64]) -> String {
    p.iter().map(|&v| f9(v)).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GameValue { cost, subset, oracle, step } => {
            let w = CostMatrix::load(&cost)?;
            let set = match subset {
                Some(s) => LabelSet::parse(&s, w.k())?,
                None => LabelSet::full(w.k()),
            };
            let g = game_value(&w, set)?;
            println!("{}", f9(g.value));
            println!("strategy: {}", fmt_dist(g.minimax_strategy.probs()));
            if oracle {
                let o = oracle_game_value(&w, set, step)?;
                println!("oracle: {} (discrepancy {})", f9(o), f9((o - g.value).abs()));
            }
        }
        Command::Thresholds { cost } => {
            let w = CostMatrix::load(&cost)?;
            let ladder = threshold_ladder(&w)?;
            let out = json!({
                "k": ladder.k,
                "levels": ladder.levels.iter().map(|&v| n9(v)).collect::<Vec<_>>(),
                "witnesses": ladder.witnesses,
                "coarse_min": ladder.coarse_min.iter().map(|&v| n9(v)).collect::<Vec<_>>(),
                "coarse_max": ladder.coarse_max.iter().map(|&v| n9(v)).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Attainable { costs, z, subset, mode, cross_check, out } => {
            let w = costs.load()?;
            let z = parse_z(&z)?;
            let set = match subset {
                Some(s) => LabelSet::parse(&s, w.k())?,
                None => LabelSet::full(w.k()),
            };
            let cfg = AttainConfig { mode, cross_check, ..Default::default() };
            let verdict = is_dice_attainable(&w, &z, set, &cfg)?;
            println!("{}", if verdict.attainable { "attainable" } else { "not attainable" });
            if let Some(wit) = &verdict.witness {
                println!(
                    "witness alpha: {}  V_J(w_alpha) = {} > z_alpha = {}",
                    fmt_dist(&wit.alpha),
                    f9(wit.value),
                    f9(wit.z_alpha)
                );
            }
            if let Some(path) = out {
                write_json(&path, &serde_json::to_value(&verdict)?)?;
            }
        }
        Command::BoostBinary { cost, z, run } => {
            let w = CostMatrix::load(&cost)?;
            let data = run.data(w.k())?;
            let learner = planted_noise_learner(&w, z, &data.inst)?;
            let out = boost_binary(&learner, &data.train, data.inst.domain_size(), &run.config())?;
            let holdout_cost = out.hypothesis.sample_loss(&w, &data.holdout);
            let holdout_01 = out.hypothesis.sample_loss(&CostMatrix::zero_one(w.k())?, &data.holdout);
            println!("rounds: {}", out.report.params.rounds);
            println!("training error: {}", f9(out.report.training_error));
            println!("holdout cost: {}", f9(holdout_cost));
            println!("holdout 0-1: {}", f9(holdout_01));
            if let Some(path) = &run.out {
                let report = json!({
                    "command": "boost-binary",
                    "cost": w,
                    "z": z,
                    "run": out.report,
                    "holdout_cost": holdout_cost,
                    "holdout_zero_one": holdout_01,
                    "hypothesis": out.hypothesis,
                });
                write_json(path, &report)?;
            }
        }
        Command::BoostList { cost, z, s_list, run } => {
            let w = CostMatrix::load(&cost)?;
            let data = run.data(w.k())?;
            let learner = planted_noise_learner(&w, z, &data.inst)?;
            let cfg = run.config();
            let (out, s) = if s_list {
                let (o, s) = boost_to_s_list(&learner, &data.train, data.inst.domain_size(), &cfg)?;
                (o, Some(s))
            } else {
                (boost_to_list(&learner, &data.train, data.inst.domain_size(), &cfg)?, None)
            };
            let h = list_to_weak(&w, &out.list.lists, out.list.threshold, CHECK_TOL)?;
            let holdout = h.sample_loss(&w, &data.holdout);
            println!("rounds: {}", out.report.params.rounds);
            println!("max list size: {}", out.list.max_list_size());
            println!("max list value: {}", f9(out.list.max_list_value()?));
            println!("training miss rate: {}", f9(out.report.training_error));
            println!("holdout cost: {}", f9(holdout));
            if let Some(path) = &run.out {
                let report = json!({
                    "command": "boost-list",
                    "cost": w,
                    "z": z,
                    "s": s,
                    "run": out.report,
                    "threshold": out.list.threshold,
                    "lists": out.list.lists,
                    "holdout_cost": holdout,
                });
                write_json(path, &report)?;
            }
        }
        Command::BoostMo { costs, z, pool_fraction, run } => {
            let w = costs.load()?;
            let z = parse_z(&z)?;
            if w.r() != z.r() {
                return Err(Error::Input(format!("{} objectives but {} guarantees", w.r(), z.r())));
            }
            let data = run.data(w.k())?;
            let mut rng = ChaCha8Rng::seed_from_u64(run.seed ^ 0x9001);
            let pool = planted_pool(&w, &z, &data.inst, pool_fraction, &mut rng);
            let target = data.inst.target().to_vec();
            let factory = |alpha: &SimplexDist| planted_scalar_learner(&w, &z, alpha, &target, Some(pool.clone()));
            let mut out = boost_mo(&w, &z, &factory, &data.train, data.inst.domain_size(), &run.config())?;
            let holdout: Vec<f64> = w.costs().iter().map(|c| out.hypothesis.sample_loss(c, &data.holdout)).collect();
            out.report.holdout_losses = Some(holdout.clone());
            println!("rounds: {}", out.report.rounds);
            for (i, (l, zi)) in holdout.iter().zip(z.values()).enumerate() {
                println!(
                    "objective {}: holdout {} (z = {}), violation fraction {}",
                    i + 1,
                    f9(*l),
                    f9(*zi),
                    f9(out.report.violation_fraction[i])
                );
            }
            if let Some(path) = &run.out {
                let report = json!({
                    "command": "boost-mo",
                    "costs": w,
                    "report": out.report,
                    "hypothesis": out.hypothesis,
                });
                write_json(path, &report)?;
            }
        }
        Command::Precedes { costs, z, z_prime } => {
            let w = costs.load()?;
            let (z, zp) = (parse_z(&z)?, parse_z(&z_prime)?);
            match separating_subset(&w, &z, &zp, &AttainConfig::default())? {
                None => println!("precedes"),
                Some(set) => println!("does not precede: {set} is avoided by z' but not by z"),
            }
        }
        Command::Experiment { config, output_dir } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            if cfg.output_dir.is_none() {
                cfg.output_dir = Some(PathBuf::from("runs"));
            }
            let (report, dir) = run_and_write(&cfg)?;
            if let Some(dir) = dir {
                println!("{}", dir.display());
            }
            for o in report.oracles.iter().filter(|o| !o.pass) {
                eprintln!("oracle mismatch: {} (discrepancy {})", o.quantity, f9(o.discrepancy));
            }
            if !report.pass {
                return Err(Error::Contract(format!("experiment {} did not meet its checks", report.id)));
            }
            println!("pass");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_contract() { 1 } else { 2 })
        }
    }
}
