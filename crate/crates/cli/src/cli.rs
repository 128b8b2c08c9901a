use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use udkernels::features::FeatureConfig;
use udkernels::{Error, Result};

use crate::commands::{
    cmd_delta, cmd_eval, cmd_gram, cmd_predict, cmd_train, cmd_transform, cmd_validate, DeltaKind, EvalArgs, GramArgs,
    GramFormat, PredictArgs, TrainArgs, TransformArgs, TransformOp, TreeFormat,
};
use crate::config::RunConfig;
use crate::data::Loader;
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "udk", version, about = "Tree kernels over Universal Dependencies trees")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for kernel matrices.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the Gram matrix of a split.
    Gram {
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long, value_enum, default_value = "tsv")]
        format: GramFormat,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model on the training split.
    Train {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reuse a Gram matrix directory written by `gram`.
        #[arg(long)]
        gram: Option<PathBuf>,
    },
    /// Write predictions for the test split.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict the test split and score it.
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Where to write predictions.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Score an existing predictions file instead.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print transformed trees, one per line.
    Transform {
        #[arg(long, value_enum)]
        op: TransformOp,
        #[arg(long)]
        input: PathBuf,
        /// Bracketed trees aligned with the input (for `pet`).
        #[arg(long)]
        constituency: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "sexpr")]
        format: TreeFormat,
    },
    /// Check CoNLL-U files for structural errors.
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Print the Δ matrix of two bracketed trees.
    Delta {
        #[arg(long, value_enum, default_value = "ptk")]
        kind: DeltaKind,
        #[arg(long, default_value_t = 0.4)]
        lambda: f64,
        #[arg(long, default_value_t = 0.4)]
        mu: f64,
        a: String,
        b: String,
    },
    /// Write a synthetic dataset with a matching config.
    Synth {
        #[arg(long, value_parser = ["pi", "re"])]
        task: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total instances (pairs for pi).
        #[arg(long)]
        n: Option<usize>,
        /// Instances in the training split.
        #[arg(long)]
        train: Option<usize>,
        /// Composite kernel variant for re.
        #[arg(long, default_value = "ck2", value_parser = ["ck", "ck1", "ck2", "ck3"])]
        variant: String,
    },
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
        RunConfig::load(path)
    }

    fn features(&self) -> Result<FeatureConfig> {
        Ok(match &self.config {
            Some(p) => RunConfig::load(p)?.features,
            None => FeatureConfig::default(),
        })
    }
}

pub fn run(cli: &Cli, loader: &Loader, out: &mut dyn Write) -> Result<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(Error::Argument("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Gram { split, format, out: dir } => {
            let args = GramArgs {
                split: split.clone(),
                format: *format,
                out: dir.clone(),
            };
            cmd_gram(&cli.run_config()?, &args, threads, loader)?;
        }
        Command::Train { out: path, gram } => {
            let args = TrainArgs {
                out: path.clone(),
                gram: gram.clone(),
            };
            cmd_train(&cli.run_config()?, &args, threads, loader)?;
        }
        Command::Predict { model, out: path } => {
            let args = PredictArgs {
                model: model.clone(),
                out: path.clone(),
            };
            cmd_predict(&cli.run_config()?, &args, threads, loader)?;
        }
        Command::Eval {
            model,
            out: path,
            predictions,
            report,
        } => {
            let args = EvalArgs {
                predict: PredictArgs {
                    model: model.clone(),
                    out: path.clone(),
                },
                predictions: predictions.clone(),
                report: report.clone(),
            };
            cmd_eval(&cli.run_config()?, &args, threads, loader, out)?;
        }
        Command::Transform {
            op,
            input,
            constituency,
            format,
        } => {
            let args = TransformArgs {
                op: *op,
                input: input.clone(),
                constituency: constituency.clone(),
                format: *format,
            };
            cmd_transform(&cli.features()?, &args, loader, out)?;
        }
        Command::Validate { inputs } => cmd_validate(inputs, loader, out)?,
        Command::Delta { kind, lambda, mu, a, b } => cmd_delta(*kind, *lambda, *mu, a, b, out)?,
        Command::Synth {
            task,
            out: dir,
            seed,
            n,
            train,
            variant,
        } => {
            if task == "pi" {
                let n = n.unwrap_or(40);
                synth::write_pi(dir, *seed, n, train.unwrap_or(n * 3 / 5))?;
            } else {
                let n = n.unwrap_or(60);
                synth::write_re(dir, *seed, n, train.unwrap_or(n * 3 / 5), variant)?;
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs, and reports failures as `error[category]: ...`.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = if e.use_stderr() {
                let rendered = e.render().to_string();
                format!("error[usage]: {}", rendered.strip_prefix("error: ").unwrap_or(&rendered))
            } else {
                e.render().to_string()
            };
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let loader = Loader::default();
    match run(&cli, &loader, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.category());
            1
        }
    }
}
