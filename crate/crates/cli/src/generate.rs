use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use kcount::generators::{
    default_mixing_permutation, generate_dcsbm_powerlaw, generate_sbm, permute_mixing, DetectabilitySpec,
    PowerLawSpec, SbmSpec,
};
use kcount::sampler::chain_rng;
use kcount::Graph;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{to_json, Manifest, OutputSet, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Equal groups with a fixed in-group fraction of each node's edges.
    Sbm,
    /// As `sbm`, with rows of the rate matrix permuted.
    Mixed,
    /// Degree-corrected model with power-law degrees and group sizes.
    DcsbmPowerlaw,
    /// Equal groups parametrized by distance to the detectability threshold.
    Detectability,
}

/// Parameters shared by `generate` and `bench`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = Model::Sbm)]
    pub model: Model,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Mean degree.
    #[arg(long, default_value_t = 30.0)]
    pub c: f64,
    /// Fraction of each node's expected edges inside its own group (sbm, mixed).
    #[arg(long, default_value_t = 0.9)]
    pub in_fraction: f64,
    /// 1-based permutation of the groups for `mixed`, e.g. `2,1,3,4`.
    /// Must be an involution. Defaults to swapping groups pairwise.
    #[arg(long, value_delimiter = ',')]
    pub permutation: Option<Vec<usize>>,
    /// Normalized mixing; the detectability threshold sits at |x| = 1.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub x: f64,
    /// Smallest group size (dcsbm-powerlaw); the largest is five times this.
    #[arg(long, default_value_t = 20)]
    pub min_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub size_exponent: f64,
    #[arg(long, default_value_t = 2.5)]
    pub degree_exponent: f64,
    #[arg(long, default_value_t = 50.0)]
    pub max_degree: f64,
    /// Fraction of each node's expected degree leaving its group (dcsbm-powerlaw).
    #[arg(long, default_value_t = 0.2)]
    pub mixing: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Number of groups (ignored by dcsbm-powerlaw).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = DEFAULT_OUTPUT_DIR)]
    pub output_dir: PathBuf,
}

pub struct Generated {
    pub graph: Graph,
    pub truth: Vec<usize>,
    pub spec: SbmSpec,
    pub notes: Value,
}

pub fn generate(model: &ModelArgs, k: usize, seed: u64) -> Result<Generated> {
    let mut rng = chain_rng(seed, 0);
    let mut notes = json!({});
    let spec = match model.model {
        Model::Sbm => SbmSpec::planted(model.n, k, model.c, model.in_fraction)?,
        Model::Mixed => {
            let base = SbmSpec::planted(model.n, k, model.c, model.in_fraction)?;
            let sigma = match &model.permutation {
                Some(p) => {
                    if p.contains(&0) {
                        bail!("permutation entries are 1-based");
                    }
                    p.iter().map(|&v| v - 1).collect()
                }
                None => default_mixing_permutation(k),
            };
            notes = json!({ "permutation": sigma.iter().map(|v| v + 1).collect::<Vec<_>>() });
            permute_mixing(&base, &sigma)?
        }
        Model::Detectability => {
            let d = DetectabilitySpec { n: model.n, k, c: model.c, x: model.x };
            let (c_in, c_out) = d.rates()?;
            notes = json!({
                "c_in": c_in,
                "c_out": c_out,
                "x": model.x,
                "x_definition": "x = (c_in - c_out) / (k sqrt(c)); the detectability threshold is |x| = 1 for every k",
            });
            d.to_sbm()?
        }
        Model::DcsbmPowerlaw => {
            let mut p = PowerLawSpec::new(model.n, model.min_size, model.degree_exponent, model.mixing);
            p.mean_degree = model.c;
            p.max_degree = model.max_degree;
            p.size_exponent = model.size_exponent;
            let (graph, truth, spec) = generate_dcsbm_powerlaw(&p, &mut rng)?;
            return Ok(Generated { graph, truth, spec, notes: json!({ "power_law": p }) });
        }
    };
    let (graph, truth) = generate_sbm(&spec, &mut rng)?;
    Ok(Generated { graph, truth, spec, notes })
}

pub fn run(args: GenerateArgs) -> Result<()> {
    let generated = generate(&args.model, args.k, args.seed)?;
    let mut edges = Vec::new();
    generated.graph.write_edge_list(&mut edges)?;

    let truth = json!({
        "n": generated.graph.n(),
        "k": generated.spec.k(),
        "model": args.model.model,
        "labels": generated.truth.iter().map(|&g| g + 1).collect::<Vec<_>>(),
        "sizes": generated.spec.sizes,
        "omega": generated.spec.omega,
        "theta": generated.spec.theta,
        "notes": generated.notes,
    });
    let mut out = OutputSet::new(&args.output_dir);
    out.add("network.txt", String::from_utf8(edges)?);
    out.add("ground_truth.json", to_json(&truth)?);
    out.commit(Manifest::new("generate", args.seed, json!(args)))?;
    println!(
        "{} nodes, {} edges, {} groups; wrote {}",
        generated.graph.n(),
        generated.graph.m(),
        generated.spec.k(),
        args.output_dir.display()
    );
    Ok(())
}
