use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use kcount::analysis::{mode, summarize, SummaryOptions};
use kcount::{run_chains, InitialPartition, SamplerConfig};
use serde::Serialize;
use serde_json::json;

use crate::generate::{generate, Model, ModelArgs};
use crate::output::{Manifest, OutputSet, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Random,
    GroundTruth,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Planted group counts, e.g. `2,4,8`.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    pub ks: Vec<usize>,
    /// Normalized mixing values for the detectability model; overrides `--x`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub xs: Option<Vec<f64>>,
    /// Minimum group sizes for dcsbm-powerlaw; overrides `--min-size`.
    #[arg(long, value_delimiter = ',')]
    pub min_sizes: Option<Vec<usize>>,
    /// Networks generated per grid point.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, value_enum, default_value_t = Init::Random)]
    pub init: Init,
    #[arg(long, default_value_t = 2000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 10)]
    pub chains: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = DEFAULT_OUTPUT_DIR)]
    pub output_dir: PathBuf,
}

struct Point {
    k: usize,
    model: ModelArgs,
}

fn grid(args: &BenchArgs) -> Vec<Point> {
    let mut points = Vec::new();
    match args.model.model {
        Model::DcsbmPowerlaw => {
            for &min_size in args.min_sizes.as_deref().unwrap_or(&[args.model.min_size]) {
                points.push(Point { k: 0, model: ModelArgs { min_size, ..args.model.clone() } });
            }
        }
        Model::Detectability => {
            for &k in &args.ks {
                for &x in args.xs.as_deref().unwrap_or(&[args.model.x]) {
                    points.push(Point { k, model: ModelArgs { x, ..args.model.clone() } });
                }
            }
        }
        _ => {
            for &k in &args.ks {
                points.push(Point { k, model: args.model.clone() });
            }
        }
    }
    points
}

pub fn run(args: BenchArgs) -> Result<()> {
    let points = grid(&args);
    if points.is_empty() || args.ks.is_empty() && args.model.model != Model::DcsbmPowerlaw {
        bail!("the benchmark grid is empty");
    }
    let mut table = String::from(
        "model,planted_k,x,min_size,repeats,inferred_k_mode,fraction_correct\n",
    );
    let mut runs = String::from("point,repeat,seed,planted_k,inferred_k_mode\n");
    for (index, point) in points.iter().enumerate() {
        let mut planted = BTreeMap::new();
        let mut inferred = BTreeMap::new();
        let mut correct = 0u64;
        for repeat in 0..args.repeats {
            let seed = args.seed + repeat;
            let generated = generate(&point.model, point.k, seed)?;
            let truth_k = generated.spec.k();
            let init = match args.init {
                Init::Random => InitialPartition::Random,
                Init::GroundTruth => InitialPartition::Given { labels: generated.truth.clone() },
            };
            let config = SamplerConfig {
                sweeps: args.sweeps,
                burn_in_sweeps: args.burnin,
                chains: args.chains,
                mu: args.mu,
                seed,
                record_map: false,
                init,
            };
            let chains = run_chains(&generated.graph, &config)?;
            let options = SummaryOptions { map_products: false, ..Default::default() };
            let k_mode = summarize(&generated.graph, &chains, &options)?.k_mode;
            *planted.entry(truth_k).or_insert(0u64) += 1;
            *inferred.entry(k_mode).or_insert(0u64) += 1;
            correct += u64::from(k_mode == truth_k);
            writeln!(runs, "{index},{repeat},{seed},{truth_k},{k_mode}")?;
            eprintln!("point {index} repeat {repeat}: planted k = {truth_k}, inferred mode = {k_mode}");
        }
        let m = &point.model;
        writeln!(
            table,
            "{},{},{},{},{},{},{}",
            serde_json::to_value(m.model)?.as_str().unwrap_or_default(),
            mode(&planted).unwrap_or(0),
            if m.model == Model::Detectability { m.x.to_string() } else { String::new() },
            if m.model == Model::DcsbmPowerlaw { m.min_size.to_string() } else { String::new() },
            args.repeats,
            mode(&inferred).unwrap_or(0),
            correct as f64 / args.repeats as f64
        )?;
    }
    let mut out = OutputSet::new(&args.output_dir);
    out.add("bench.csv", table);
    out.add("bench_runs.csv", runs);
    out.commit(Manifest::new("bench", args.seed, json!(args)))?;
    println!("wrote {}", args.output_dir.display());
    Ok(())
}
