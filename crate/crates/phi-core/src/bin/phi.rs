//! Command-line front end for the scoring pipeline.
//!
//! Exit codes: 0 success, 2 config error, 3 ingest error, 4 numerical
//! failure, 1 anything else.

use clap::{Parser, Subcommand};
use phi_core::config::RunConfig;
use phi_core::error::{Error, Result};
use phi_core::{anchoring, ingest, pipeline, synth};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "phi",
    version,
    about = "Batch scoring of supplier payment distributions with validation diagnostics"
)]
struct Cli {
    /// Worker threads for per-supplier fits (default: all cores).
    /// Results are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the report bundle
    Score {
        #[arg(long)]
        config: PathBuf,
        /// Override input.path from the config
        #[arg(long)]
        input: Option<PathBuf>,
        /// Override output.dir from the config
        #[arg(long)]
        outdir: Option<PathBuf>,
        /// Also render static SVG plots
        #[arg(long)]
        plots: bool,
    },
    /// Ingest and write the harmonisation audit only
    Harmonise {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Re-run the anchoring analysis from a prior score output
    Anchoring {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding a prior run's centres.csv
        #[arg(long)]
        scores: PathBuf,
        /// Output directory (defaults to --scores)
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark cohort in ingest format
    Synth {
        #[arg(long)]
        outdir: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// JSON list of supplier specs; defaults to the built-in
        /// archetype benchmark
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Check a config file and print its normalised form and hash
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(
    path: &PathBuf,
    input: Option<PathBuf>,
    outdir: Option<PathBuf>,
) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(input) = input {
        cfg.input.path = input;
    }
    if let Some(outdir) = outdir {
        cfg.output.dir = outdir;
    }
    Ok(cfg)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Score { config, input, outdir, plots } => {
            let mut cfg = load_config(&config, input, outdir)?;
            cfg.output.plots = cfg.output.plots || plots;
            let bundle = pipeline::run_and_write(&cfg)?;
            println!(
                "scored {} suppliers ({} High / {} Moderate / {} Low) -> {}",
                bundle.scores.len(),
                bundle.tier_summary.n_high,
                bundle.tier_summary.n_moderate,
                bundle.tier_summary.n_low,
                cfg.output.dir.display()
            );
            for warning in &bundle.warnings {
                eprintln!("warning: {warning}");
            }
            Ok(())
        }
        Command::Harmonise { config, input, outdir } => {
            let cfg = load_config(&config, input, outdir)?;
            let (corpus, audit, rejects) = pipeline::run_harmonise_audit(&cfg)?;
            let dir = &cfg.output.dir;
            std::fs::create_dir_all(dir)?;
            let mut text = serde_json::to_string_pretty(&corpus)?;
            text.push('\n');
            std::fs::write(dir.join("corpus_stats.json"), text)?;
            ingest::write_rejects(&dir.join("rejects.csv"), &rejects)?;
            let mut w = csv::Writer::from_path(dir.join("harmonisation_audit.csv"))?;
            w.write_record(["raw_name", "canonical_name", "pseudonym", "cluster_size"])?;
            for row in &audit {
                w.write_record([
                    row.raw_name.clone(),
                    row.canonical_name.clone(),
                    row.pseudonym.clone(),
                    row.cluster_size.to_string(),
                ])?;
            }
            w.flush()?;
            let canonical: std::collections::BTreeSet<&String> =
                audit.iter().map(|a| &a.canonical_name).collect();
            println!(
                "harmonised {} raw names into {} canonical suppliers -> {}",
                audit.len(),
                canonical.len(),
                dir.display()
            );
            Ok(())
        }
        Command::Anchoring { config, scores, outdir } => {
            let cfg = RunConfig::load(&config)?;
            let centres = pipeline::read_centres_csv(&scores.join("centres.csv"))?;
            let (report, nulls) = anchoring::run_anchoring(&centres, &cfg.anchoring)?;
            let dir = outdir.unwrap_or(scores);
            pipeline::write_anchoring_outputs(&report, &nulls, &dir)?;
            println!(
                "anchoring over {} centres, {} peaks -> {}",
                report.n_centres,
                report.peaks.len(),
                dir.display()
            );
            Ok(())
        }
        Command::Synth { outdir, seed, spec } => {
            let specs = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Error::Config(format!("cannot read spec {}: {e}", path.display()))
                    })?;
                    serde_json::from_str::<Vec<synth::SyntheticSpec>>(&text)
                        .map_err(|e| Error::Config(format!("invalid spec file: {e}")))?
                }
                None => synth::benchmark_cohort(seed),
            };
            let (csv_text, truth) = synth::generate_cohort(&specs)?;
            std::fs::create_dir_all(&outdir)?;
            std::fs::write(outdir.join("corpus.csv"), csv_text)?;
            let mut text = serde_json::to_string_pretty(&truth)?;
            text.push('\n');
            std::fs::write(outdir.join("ground_truth.json"), text)?;
            println!("wrote {} suppliers -> {}", truth.specs.len(), outdir.display());
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let cfg = RunConfig::load(&config)?;
            print!("{}", toml::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?);
            println!("\n# config hash: {}", cfg.config_hash());
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
