use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use urbanfim::embedding::{EmbeddingMethod, UmapParams};
use urbanfim::fim::MiningParams;
use urbanfim::neighborhood::export_dichotomous;
use urbanfim::pipeline::{
    city_from_path, cluster_stage, embed_stage, extract_stage, matrix_stage, mine_stage,
    report_stage, run_buffer_sweep, run_pipeline, write_synthetic_bundle, ArtifactLayout,
    InputEntry, PipelineConfig, ReportInputs,
};
use urbanfim::report::{ColorMap, RenderConfig};
use urbanfim::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "urbanfim", version, about = "Land-use neighborhood mining and city grouping")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Land-use GeoJSON to neighborhood transactions.
    Extract {
        #[arg(long)]
        input: PathBuf,
        /// City name; defaults to the input file stem.
        #[arg(long)]
        city: Option<String>,
        #[arg(long, default_value = urbanfim::geo::DEFAULT_CODE_ATTRIBUTE)]
        code_attribute: String,
        #[arg(long, default_value_t = urbanfim::neighborhood::DEFAULT_BUFFER_DISTANCE)]
        buffer_distance: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the 0/1 table form.
        #[arg(long)]
        dichotomous: Option<PathBuf>,
    },
    /// Transactions file to frequent itemsets CSV.
    Mine {
        #[arg(long)]
        transactions: PathBuf,
        /// Relative minimum support in (0, 1].
        #[arg(long, conflicts_with = "minsup_abs")]
        minsup: Option<f64>,
        /// Absolute minimum support (transaction count).
        #[arg(long)]
        minsup_abs: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-city itemset CSVs to the cities x itemsets matrix.
    Matrix {
        /// `<city>.fi.csv` files, or `CITY=PATH`.
        #[arg(long = "fi", required = true, num_args = 1..)]
        fi: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Matrix CSV to 2-D embedding and distance CSVs.
    Embed {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "pca")]
        embedding: EmbeddingMethod,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 15)]
        n_neighbors: usize,
        #[arg(long, default_value_t = 0.1)]
        min_dist: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        distances: Option<PathBuf>,
    },
    /// Embedding CSV to dendrogram, k selection and cluster assignment.
    Cluster {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long)]
        cut_distance: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// SVG reports from embedding, dendrogram and assignment files.
    Report {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        dendrogram: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
        /// Land-use file for a thumbnail, `CITY=PATH`; repeatable.
        #[arg(long = "layer")]
        layers: Vec<String>,
        #[arg(long, default_value = urbanfim::geo::DEFAULT_CODE_ATTRIBUTE)]
        code_attribute: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Full run from a config file and/or command-line inputs.
    Pipeline(RunArgs),
    /// Buffer-distance sweep over one city.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated buffer distances in meters.
        #[arg(long, value_delimiter = ',', required = true)]
        distances: Vec<f64>,
    },
    /// Write the seeded six-city synthetic bundle and its config.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input layer, `CITY=PATH`; repeatable. Replaces the config's inputs.
    #[arg(long = "input")]
    inputs: Vec<String>,
    #[arg(long)]
    code_attribute: Option<String>,
    #[arg(long)]
    buffer_distance: Option<f64>,
    #[arg(long)]
    minsup: Option<f64>,
    #[arg(long)]
    embedding: Option<EmbeddingMethod>,
    #[arg(long)]
    cut_distance: Option<f64>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Defaults to $URBANFIM_OUT_DIR, then ./urbanfim-out.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn split_pair(s: &str) -> Result<(String, PathBuf)> {
    match s.split_once('=') {
        Some((city, path)) if !city.is_empty() && !path.is_empty() => Ok((city.into(), path.into())),
        _ => Err(Error::Config(format!("expected CITY=PATH, got {s:?}"))),
    }
}

impl RunArgs {
    fn resolve(self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self
                .inputs
                .iter()
                .map(|s| split_pair(s).map(|(city_name, path)| InputEntry { city_name, path }))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = self.code_attribute {
            cfg.code_attribute = v;
        }
        if let Some(v) = self.buffer_distance {
            cfg.buffer_distance_m = v;
        }
        if let Some(v) = self.minsup {
            cfg.minsup_relative = v;
        }
        if let Some(v) = self.embedding {
            cfg.embedding = v;
        }
        if self.cut_distance.is_some() {
            cfg.cut_distance = self.cut_distance;
        }
        if let Some(v) = self.k_min {
            cfg.k_min = v;
        }
        if let Some(v) = self.k_max {
            cfg.k_max = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        if let Some(v) = self.out_dir {
            cfg.output_dir = v;
        }
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract {
            input,
            city,
            code_attribute,
            buffer_distance,
            out,
            dichotomous,
        } => {
            let city = city.unwrap_or_else(|| city_from_path(&input));
            let ts = extract_stage(&input, &city, &code_attribute, buffer_distance, &out)?;
            if let Some(path) = dichotomous {
                export_dichotomous(&ts, path)?;
            }
            println!("{} transactions -> {}", ts.transactions.len(), out.display());
        }
        Command::Mine {
            transactions,
            minsup,
            minsup_abs,
            out,
        } => {
            let params = match (minsup, minsup_abs) {
                (_, Some(abs)) => MiningParams::absolute(abs)?,
                (Some(rel), None) => MiningParams::relative(rel)?,
                (None, None) => MiningParams::relative(urbanfim::fim::DEFAULT_MINSUP_RELATIVE)?,
            };
            let fis = mine_stage(&transactions, &params, &out)?;
            println!("{} frequent itemsets -> {}", fis.len(), out.display());
        }
        Command::Matrix { fi, out } => {
            let files = fi
                .iter()
                .map(|s| match s.split_once('=') {
                    Some(_) => split_pair(s),
                    None => Ok((city_from_path(s.as_ref()), PathBuf::from(s))),
                })
                .collect::<Result<Vec<_>>>()?;
            let m = matrix_stage(&files, &out)?;
            println!("{} cities x {} itemsets -> {}", m.rows(), m.cols(), out.display());
        }
        Command::Embed {
            matrix,
            embedding,
            seed,
            n_neighbors,
            min_dist,
            out,
            distances,
        } => {
            let umap = UmapParams {
                n_neighbors,
                min_dist,
                seed,
                ..UmapParams::default()
            };
            let distances = distances.unwrap_or_else(|| out.with_file_name("distances.csv"));
            let e = embed_stage(&matrix, embedding, &umap, &out, &distances)?;
            println!("{} cities embedded with {embedding} -> {}", e.len(), out.display());
        }
        Command::Cluster {
            embedding,
            k_min,
            k_max,
            cut_distance,
            out_dir,
        } => {
            let layout = ArtifactLayout::new(out_dir);
            let c = cluster_stage(&embedding, k_min..=k_max, cut_distance, &layout)?;
            println!("{}", c.selection.rationale);
            println!("{} clusters -> {}", c.assignment.k, layout.assignment().display());
        }
        Command::Report {
            embedding,
            dendrogram,
            assignment,
            layers,
            code_attribute,
            out_dir,
        } => {
            let layers: BTreeMap<String, PathBuf> =
                layers.iter().map(|s| split_pair(s)).collect::<Result<_>>()?;
            let colors = ColorMap::default();
            let render = RenderConfig::default();
            let inputs = ReportInputs {
                embedding,
                dendrogram,
                assignment,
                layers,
                code_attribute: &code_attribute,
                colors: &colors,
                render: &render,
            };
            for p in report_stage(&inputs, &ArtifactLayout::new(out_dir))? {
                println!("{}", p.display());
            }
        }
        Command::Pipeline(args) => {
            let cfg = args.resolve()?;
            let manifest = run_pipeline(&cfg)?;
            for note in &manifest.notes {
                println!("{note}");
            }
            println!(
                "{} artifacts -> {}",
                manifest.entries.len(),
                ArtifactLayout::new(&cfg.output_dir).manifest().display()
            );
        }
        Command::Sweep { run, distances } => {
            let cfg = run.resolve()?;
            let result = run_buffer_sweep(&cfg, &distances)?;
            print!("{}", urbanfim::pipeline::format_sweep_csv(&result));
        }
        Command::Synth { out_dir, seed } => {
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            // absolute paths keep the written config usable from any directory
            let out_dir = out_dir.canonicalize().map_err(|e| Error::io(&out_dir, e))?;
            let cfg = write_synthetic_bundle(&out_dir, seed)?;
            let path = out_dir.join("config.json");
            std::fs::write(&path, cfg.to_json()).map_err(|e| Error::io(&path, e))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Stage => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
