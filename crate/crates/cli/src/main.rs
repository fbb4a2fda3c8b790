use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use incivility_cli::commands::*;
use incivility_cli::error::{CliResult, EXIT_INPUT};
use incivility_cli::RunConfig;

#[derive(Parser)]
#[command(
    name = "incivility",
    version,
    about = "Comment incivility scoring, provoking-article prediction and subtext mining"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Train the toxicity, aggression and attack classifiers on an annotated corpus.
    TrainAspects,
    /// Score comments and compute per-article incivility weights.
    Score,
    /// Label articles against the per-source median weight and train the body classifier.
    LabelTrainProvoking,
    /// Predict provoking probability for article bodies with a trained pipeline.
    PredictProvoking,
    /// Mine comment-only topic phrases for articles carrying a tag.
    MineSubtext,
    /// Write a planted-signal synthetic corpus.
    GenerateSynthetic,
    /// Evaluate saved models on labelled data.
    Evaluate,
    /// Print the effective configuration as JSON.
    ShowConfig,
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed applied to every random stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    model_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    articles: Option<PathBuf>,
    #[arg(long, global = true)]
    comments: Option<PathBuf>,
    #[arg(long, global = true)]
    annotated: Option<PathBuf>,
    #[arg(long, global = true)]
    weights: Option<PathBuf>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    #[arg(long, global = true)]
    tag: Option<String>,
    #[arg(long, global = true)]
    source: Option<String>,
    /// Comma-separated keyword filter applied before labelling.
    #[arg(long, global = true, value_delimiter = ',')]
    keywords: Option<Vec<String>>,
    #[arg(long, global = true)]
    sample_per_source: Option<usize>,
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    #[arg(long, global = true)]
    l2_lambda: Option<f64>,
    #[arg(long, global = true)]
    test_fraction: Option<f64>,
    #[arg(long, global = true)]
    topics: Option<usize>,
    #[arg(long, global = true)]
    lda_iterations: Option<usize>,
    #[arg(long, global = true)]
    min_df: Option<usize>,
    #[arg(long, global = true)]
    n_articles: Option<usize>,
    #[arg(long, global = true)]
    comments_per_article: Option<usize>,
    #[arg(long, global = true)]
    n_annotated: Option<usize>,
}

impl Overrides {
    fn resolve(self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(v) = self.out {
            cfg.out_dir = v;
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v.into(); })*
            };
        }
        set!(
            model_dir => model_dir,
            articles => articles,
            comments => comments,
            annotated => annotated,
            weights => weights,
            labels => labels,
            tag => tag,
            source => source,
            keywords => keywords,
            sample_per_source => sample_per_source,
            max_iterations => train.max_iterations,
            l2_lambda => train.l2_lambda,
            test_fraction => split.test_fraction,
            topics => subtext.lda.topics,
            lda_iterations => subtext.lda.iterations,
            min_df => subtext.lda.min_df,
            n_articles => synthetic.n_articles,
            comments_per_article => synthetic.comments_per_article,
            n_annotated => synthetic.n_annotated,
        );
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::TrainAspects => cmd_train_aspects(&cfg),
        Command::Score => cmd_score(&cfg),
        Command::LabelTrainProvoking => cmd_label_and_train_provoking(&cfg).map(|_| ()),
        Command::PredictProvoking => cmd_predict_provoking(&cfg),
        Command::MineSubtext => cmd_mine_subtext(&cfg),
        Command::GenerateSynthetic => cmd_generate_synthetic(&cfg),
        Command::Evaluate => cmd_evaluate(&cfg),
        Command::ShowConfig => {
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg).expect("config serializes")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
