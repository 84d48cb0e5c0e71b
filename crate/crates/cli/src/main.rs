use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use stance_core::convclf::PairMode;
use stance_core::pipeline::{Pipeline, PipelineConfig, Stage, StageOutcome};

/// Stance detection from user interactions and conversation text.
///
/// Every stage reads and writes artifacts in the output directory, so stages
/// can be run one at a time. A stage whose inputs and settings are unchanged
/// since its last run is skipped.
#[derive(Parser, Debug)]
#[command(name = "stance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load tweets and extract reply pairs.
    Ingest,
    /// Build the user-hashtag and user-retweet interaction matrices.
    BuildGraph,
    /// Co-train the network and text views to label users.
    Cotrain,
    /// Derive Favor/Oppose labels for reply pairs from user stances.
    Weaklabel,
    /// Train the conversation classifier on weak labels.
    TrainConv,
    /// Label reply pairs with the trained conversation classifier.
    Predict {
        /// JSONL pairs with `source_text` and `reply_text` (default: ingested conversations).
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Score the conversation classifier on gold pairs.
    Eval,
    /// Per-stance entity reports and stance cross-tabulation.
    Analyze {
        /// Stance table (id,stance,confidence) to cross-tabulate against.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Write a synthetic corpus with gold labels and a ready-to-run config.
    Synth {
        #[arg(long)]
        users: Option<usize>,
        /// Community separation in [0, 1].
        #[arg(long)]
        polarity: Option<f64>,
    },
    /// Ingest through analyze (eval only when --gold is set).
    RunAll,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML pipeline config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tweet file (JSONL or CSV); repeatable.
    #[arg(long, global = true)]
    input: Vec<PathBuf>,
    /// Event name for records without one.
    #[arg(long, global = true)]
    event: Option<String>,
    /// Seed hashtags, e.g. `prolife:pro,prochoice:anti`.
    #[arg(long, global = true)]
    seeds: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed_rng: Option<u64>,
    #[arg(long, global = true)]
    theta_u: Option<f64>,
    #[arg(long, global = true)]
    theta_h: Option<f64>,
    #[arg(long, global = true)]
    theta_t: Option<f64>,
    #[arg(long, global = true)]
    theta_i: Option<f64>,
    #[arg(long, global = true)]
    topk_hashtags: Option<usize>,
    #[arg(long, global = true)]
    topp_retweets: Option<usize>,
    /// Share of each view's unlabeled candidates added per iteration.
    #[arg(long, global = true)]
    mix_k: Option<f64>,
    /// Maximum co-training iterations.
    #[arg(long, global = true)]
    iters: Option<usize>,
    /// `pair` or `reply-only`.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<PairMode>,
    /// Gold reply pairs (JSONL) for evaluation.
    #[arg(long, global = true)]
    gold: Option<PathBuf>,
    /// Known user stances for per-iteration co-training scores.
    #[arg(long, global = true)]
    gold_users: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<PairMode, String> {
    s.replace('-', "_").parse().map_err(|e| format!("{e}"))
}

impl Overrides {
    fn config(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        if !self.input.is_empty() {
            c.input = self.input.clone();
        }
        if let Some(s) = &self.seeds {
            c.set_seeds(s)?;
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$flag { c.$($field).+ = v.clone(); })*
            };
        }
        set!(
            event => event,
            out => out,
            seed_rng => seed_rng,
            theta_u => cotrain.theta_u,
            theta_h => cotrain.theta_h,
            theta_t => cotrain.theta_t,
            theta_i => theta_i,
            topk_hashtags => topk_hashtags,
            topp_retweets => topp_retweets,
            mix_k => cotrain.mix_k,
            iters => cotrain.max_iterations,
            mode => mode,
        );
        if let Some(g) = &self.gold {
            c.gold = Some(g.clone());
        }
        if let Some(g) = &self.gold_users {
            c.gold_users = Some(g.clone());
        }
        c.cotrain.validate()?;
        Ok(c)
    }
}

fn report(o: &StageOutcome) {
    let status = if o.skipped { "up to date" } else { "done" };
    println!("{:<12} {status}", o.stage.name());
    for path in &o.outputs {
        println!("    {}", path.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = cli.opts.config()?;
    let stage = match cli.command {
        Command::Ingest => Stage::Ingest,
        Command::BuildGraph => Stage::BuildGraph,
        Command::Cotrain => Stage::Cotrain,
        Command::Weaklabel => Stage::Weaklabel,
        Command::TrainConv => Stage::TrainConv,
        Command::Predict { pairs } => {
            config.predict_input = pairs.or(config.predict_input);
            Stage::Predict
        }
        Command::Eval => Stage::Eval,
        Command::Analyze { compare } => {
            config.compare_stance = compare.or(config.compare_stance);
            Stage::Analyze
        }
        Command::Synth { users, polarity } => {
            if let Some(n) = users {
                config.synth.n_users = n;
            }
            if let Some(p) = polarity {
                config.synth.polarity = p;
            }
            Stage::Synth
        }
        Command::RunAll => {
            for o in Pipeline::new(config).run_all()? {
                report(&o);
            }
            return Ok(());
        }
    };
    let pipeline = Pipeline::new(config);
    let outcome = pipeline.run_stage(stage)?;
    report(&outcome);
    if stage == Stage::Synth {
        let cfg = pipeline.artifact("synthetic/config.toml");
        println!("next: stance run-all --config {}", cfg.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
