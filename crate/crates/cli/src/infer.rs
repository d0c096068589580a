use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use kcount::analysis::{summarize, PosteriorSummary, SummaryOptions, KEFF_BIN_WIDTH};
use kcount::{run_chains, Graph, InitialPartition, SamplerConfig};
use serde::Serialize;
use serde_json::json;

use crate::output::{sha256_hex, to_json, unix_timestamp, Manifest, OutputSet, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV};

#[derive(Args, Debug, Serialize)]
pub struct InferArgs {
    /// Edge list: two node ids per line, `#` comments allowed.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = DEFAULT_OUTPUT_DIR)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 10)]
    pub chains: usize,
    /// Expected number of new groups in the partition prior.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the MAP partition labels in the summary.
    #[arg(long)]
    pub map: bool,
    /// Include the block-rate matrix and meta-network of the MAP partition.
    #[arg(long)]
    pub omega: bool,
    /// Start every chain from the labels in this JSON file (an array of
    /// 1-based labels indexed by integer node id, or an object with a
    /// `labels` field such as a generated `ground_truth.json`).
    #[arg(long)]
    pub init_labels: Option<PathBuf>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    n: usize,
    m: u64,
    config: &'a SamplerConfig,
    #[serde(flatten)]
    posterior: &'a PosteriorSummary,
    timestamp: u64,
}

fn read_init_labels(path: &PathBuf, graph: &Graph) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let array = value.get("labels").unwrap_or(&value);
    let by_id: Vec<usize> = serde_json::from_value(array.clone())
        .with_context(|| format!("{} holds no label array", path.display()))?;
    let mut labels = Vec::with_capacity(graph.n());
    for name in graph.labels() {
        let id: usize = name
            .parse()
            .with_context(|| format!("node id {name:?} is not an index into the label array"))?;
        match by_id.get(id) {
            Some(&l) if l >= 1 => labels.push(l - 1),
            _ => bail!("no valid 1-based label for node {id}"),
        }
    }
    // Nodes absent from the edge list may leave gaps; compact the labels.
    let mut used: Vec<usize> = labels.clone();
    used.sort_unstable();
    used.dedup();
    Ok(labels.iter().map(|l| used.binary_search(l).unwrap()).collect())
}

fn histogram_csvs(summary: &PosteriorSummary) -> (String, String) {
    let mut k_csv = String::from("k,probability\n");
    for (k, p) in &summary.k_histogram {
        writeln!(k_csv, "{k},{p}").unwrap();
    }
    let h = &summary.keff_histogram;
    let mut keff_csv = String::from("bin_start,bin_end,count,density\n");
    for (i, (c, d)) in h.counts.iter().zip(h.densities()).enumerate() {
        let lo = h.start + i as f64 * h.bin_width;
        writeln!(keff_csv, "{:.6},{:.6},{c},{d}", lo, lo + h.bin_width).unwrap();
    }
    (k_csv, keff_csv)
}

pub fn run(args: InferArgs) -> Result<()> {
    let bytes = fs::read(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let text = std::str::from_utf8(&bytes).context("input is not valid UTF-8")?;
    let graph = Graph::load_edge_list_str(text).with_context(|| format!("cannot parse {}", args.input.display()))?;
    if graph.n() < 3 {
        bail!("the network has {} nodes; at least 3 are required", graph.n());
    }
    let init = match &args.init_labels {
        Some(path) => InitialPartition::Given { labels: read_init_labels(path, &graph)? },
        None => InitialPartition::Random,
    };
    let config = SamplerConfig {
        sweeps: args.sweeps,
        burn_in_sweeps: args.burnin,
        chains: args.chains,
        mu: args.mu,
        seed: args.seed,
        record_map: args.map || args.omega,
        init,
    };
    config.validate(&graph)?;

    let chains = run_chains(&graph, &config)?;
    let options = SummaryOptions { keff_bin_width: KEFF_BIN_WIDTH, map_products: args.omega };
    let mut summary = summarize(&graph, &chains, &options)?;
    if !args.map {
        summary.map = None;
    }

    let file = SummaryFile { n: graph.n(), m: graph.m(), config: &config, posterior: &summary, timestamp: unix_timestamp() };
    let (k_csv, keff_csv) = histogram_csvs(&summary);
    let mut out = OutputSet::new(&args.output_dir);
    out.add("summary.json", to_json(&file)?);
    out.add("k_histogram.csv", k_csv);
    out.add("keff_histogram.csv", keff_csv);

    let mut manifest = Manifest::new("infer", args.seed, json!(args));
    manifest.input_digest = Some(sha256_hex(&bytes));
    out.commit(manifest)?;
    println!(
        "k_mode = {} over {} samples; wrote {}",
        summary.k_mode,
        summary.samples,
        args.output_dir.display()
    );
    Ok(())
}
