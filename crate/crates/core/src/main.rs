use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zeroclass::eval_cli::{
    grid_search_described, loocv_described, thread_pool, write_confusion_csv, write_predictions_csv, write_report_json,
    FoldUnit,
};
use zeroclass::silhouette_io::{generate_synthetic, load_dataset, load_video_frames, SynthConfig};
use zeroclass::two_phase_model::{describe_frames, describe_videos, train, Pooling, TwoPhaseModel, TwoPhaseParams, VideoDescriptors};
use zeroclass::{Error, Result};

#[derive(Parser)]
#[command(name = "zeroclass", version, about = "Silhouette action recognition with a zeroth-class two-phase dictionary model")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed (synthetic data defaults to 7, training to 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fraction R of each class kept as discriminative
    #[arg(long, global = true, value_parser = parse_rate)]
    rate: Option<f64>,
    /// OMP sparsity C
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    sparsity: Option<u64>,
    /// Contour resampling length L
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(3..))]
    length: Option<u64>,
    /// Fractional Fourier order p
    #[arg(long, global = true, value_parser = parse_finite)]
    order: Option<f64>,
    /// Boosting rounds T
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    rounds: Option<u64>,
    #[arg(long, global = true, default_value = "sum", value_parser = parse_pooling)]
    pooling: Pooling,
    /// Treat every training frame as discriminative (no zeroth class)
    #[arg(long, global = true)]
    no_zeroth: bool,
    /// Output file or directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (needs --out)
    Synth {
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 10)]
        videos: usize,
        #[arg(long, default_value_t = 30)]
        frames: usize,
        #[arg(long, default_value_t = 0.2)]
        shared: f64,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
    },
    /// Write per-frame descriptors as CSV
    Describe { dataset: PathBuf },
    /// Train a model file (default model.json)
    Train { dataset: PathBuf },
    /// Classify video directories with a trained model
    Predict {
        model: PathBuf,
        #[arg(required = true)]
        videos: Vec<PathBuf>,
    },
    /// Leave-one-out report: report.json, confusion.csv, predictions.csv
    Eval {
        dataset: PathBuf,
        /// Hold out all videos of an actor (id prefix before '_') per fold
        #[arg(long)]
        actor_folds: bool,
    },
    /// Grid search over rates and sparsities; CSV to --out or stdout
    Sweep {
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_rate)]
        rates: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
        sparsities: Vec<u64>,
        #[arg(long)]
        actor_folds: bool,
    },
}

fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    let r: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if r > 0.0 && r <= 1.0 {
        Ok(r)
    } else {
        Err(format!("rate must be in (0, 1], got {r}"))
    }
}

fn parse_finite(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{s:?} is not a finite number")),
    }
}

fn parse_pooling(s: &str) -> std::result::Result<Pooling, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Global {
    fn params(&self) -> TwoPhaseParams {
        let mut p = TwoPhaseParams {
            seed: self.seed.unwrap_or(0),
            zeroth: !self.no_zeroth,
            ..TwoPhaseParams::default()
        };
        if let Some(r) = self.rate {
            p.rate = r;
        }
        if let Some(c) = self.sparsity {
            p.sparsity = c as usize;
        }
        if let Some(l) = self.length {
            p.length = l as usize;
        }
        if let Some(o) = self.order {
            p.order = o;
        }
        if let Some(t) = self.rounds {
            p.rounds = t as usize;
        }
        p
    }

    fn out_or(&self, fallback: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(fallback))
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(create(path)?),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn describe_dataset(root: &Path, params: &TwoPhaseParams) -> Result<(Vec<String>, Vec<VideoDescriptors>)> {
    let dataset = load_dataset(root)?;
    let described = describe_videos(&dataset.videos, params.descriptor())?;
    Ok((dataset.class_names, described))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let params = g.params();
    params.validate()?;
    match cli.command {
        Command::Synth {
            classes,
            videos,
            frames,
            shared,
            noise,
        } => {
            let out = g.out.as_ref().ok_or_else(|| Error::param("synth needs --out DIR"))?;
            let config = SynthConfig {
                num_classes: classes,
                videos_per_class: videos,
                frames_per_video: frames,
                shared_frame_rate: shared,
                noise_frame_rate: noise,
                seed: g.seed.unwrap_or(SynthConfig::default().seed),
            };
            generate_synthetic(&config)?.export(out)?;
            println!("wrote {} videos to {}", classes * videos, out.display());
        }
        Command::Describe { dataset } => {
            let (names, described) = describe_dataset(&dataset, &params)?;
            let mut w = csv::Writer::from_writer(g.writer()?);
            let mut header = vec!["video_id".to_string(), "frame".into(), "class".into()];
            header.extend((1..=params.length).map(|i| format!("d_{i}")));
            w.write_record(&header)?;
            for v in &described {
                for (frame, row) in v.frame_index.iter().zip(v.rows.rows()) {
                    let mut record = vec![v.id.clone(), frame.to_string(), names[v.label - 1].clone()];
                    record.extend(row.iter().map(|x| format!("{x:.16e}")));
                    w.write_record(&record)?;
                }
            }
            w.flush().map_err(|e| Error::io("writing descriptors", e))?;
        }
        Command::Train { dataset } => {
            let data = load_dataset(&dataset)?;
            let model = thread_pool()?.install(|| train(&data, &params))?;
            let out = g.out_or("model.json");
            model.save(&out)?;
            println!(
                "model with {} + {} atoms written to {}",
                model.first_dict().num_atoms(),
                model.concat_dict().num_atoms(),
                out.display()
            );
        }
        Command::Predict { model, videos } => {
            let model = TwoPhaseModel::load(&model)?;
            let k = model.num_classes();
            let mut w = csv::Writer::from_writer(g.writer()?);
            let mut header = vec!["video".to_string(), "predicted".into(), "class".into()];
            header.extend((1..=k).map(|c| format!("r_{c}")));
            header.push("filtered".into());
            w.write_record(&header)?;
            for dir in &videos {
                let id = dir.file_name().map_or_else(|| dir.display().to_string(), |s| s.to_string_lossy().into_owned());
                let frames = load_video_frames(dir)?;
                let rows = describe_frames(&id, &frames, model.params().descriptor())?;
                let verdict = model.predict_descriptors(rows.view(), g.pooling)?;
                let mut record = vec![id, verdict.label.to_string(), model.class_names()[verdict.label - 1].clone()];
                record.extend(verdict.pooled.iter().map(|r| format!("{r:.16e}")));
                record.push(verdict.filtered.to_string());
                w.write_record(&record)?;
            }
            w.flush().map_err(|e| Error::io("writing predictions", e))?;
        }
        Command::Eval { dataset, actor_folds } => {
            let unit = if actor_folds { FoldUnit::Actor } else { FoldUnit::Video };
            let pool = thread_pool()?;
            let report = pool.install(|| -> Result<_> {
                let (names, described) = describe_dataset(&dataset, &params)?;
                let refs: Vec<&VideoDescriptors> = described.iter().collect();
                loocv_described(&refs, &names, &params, g.pooling, unit)
            })?;
            let out = g.out_or("eval");
            fs::create_dir_all(&out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
            write_report_json(&report, &out.join("report.json"))?;
            write_confusion_csv(&report, create(&out.join("confusion.csv"))?)?;
            write_predictions_csv(&report, create(&out.join("predictions.csv"))?)?;
            println!(
                "accuracy {:.4} over {} videos ({} folds), report in {}",
                report.accuracy,
                report.folds.len(),
                report.num_folds(),
                out.display()
            );
        }
        Command::Sweep {
            dataset,
            rates,
            sparsities,
            actor_folds,
        } => {
            let rates = if rates.is_empty() { vec![params.rate] } else { rates };
            let sparsities: Vec<usize> = if sparsities.is_empty() {
                vec![params.sparsity]
            } else {
                sparsities.into_iter().map(|c| c as usize).collect()
            };
            let unit = if actor_folds { FoldUnit::Actor } else { FoldUnit::Video };
            let table = thread_pool()?.install(|| -> Result<_> {
                let (names, described) = describe_dataset(&dataset, &params)?;
                let refs: Vec<&VideoDescriptors> = described.iter().collect();
                grid_search_described(&refs, &names, &params, &rates, &sparsities, g.pooling, unit)
            })?;
            table.write_csv(g.writer()?)?;
            let best = table.best_cell();
            eprintln!(
                "best: rate {} sparsity {} accuracy {:.4}",
                best.rate, best.sparsity, best.report.accuracy
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
