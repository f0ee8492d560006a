use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hostnet_core::eval::{pca_project, write_projection_csv};
use hostnet_core::graph::{dependency_edges, parse_conllu};
use hostnet_core::model::{classify_all, embed, LABEL_NAMES};
use hostnet_core::tokenizers::{bpe_train, clean_text, unigram_train, SubwordModel, UnigramConfig};
use hostnet_core::training::{
    evaluate_params, load_checkpoint, load_dataset, save_checkpoint, train_with_observer, TrainConfig,
};
use ndarray::Array2;
use serde::Serialize;
use serde_json::json;

use crate::{
    CodecArgs, Command, EvalArgs, GraphCommand, GraphParseArgs, PredictArgs, ProjectArgs, Scheme,
    TokenizerCommand, TokenizerTrainArgs, TrainArgs, Which,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] hostnet_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(hostnet_core::Error::Config(_)) => 1,
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn announce(resolved: &impl Serialize, seed: Option<u64>) {
    println!(
        "resolved config: {}",
        serde_json::to_string(resolved).expect("plain data serializes")
    );
    match seed {
        Some(s) => println!("seed: {s}"),
        None => println!("seed: none"),
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Tokenizer(TokenizerCommand::Train(args)) => tokenizer_train(&args),
        Command::Tokenizer(TokenizerCommand::Encode(args)) => tokenizer_encode(&args),
        Command::Tokenizer(TokenizerCommand::Decode(args)) => tokenizer_decode(&args),
        Command::Graph(GraphCommand::Parse(args)) => graph_parse(&args),
        Command::Train(args) => train(&args),
        Command::Eval(args) => eval(&args),
        Command::Predict(args) => predict(&args),
        Command::Project(args) => project(&args),
    }
}

fn tokenizer_train(args: &TokenizerTrainArgs) -> Result<()> {
    announce(args, None);
    let lines: Vec<String> = read(&args.input)?.lines().map(clean_text).collect();
    let model = match args.scheme {
        Scheme::Bpe => SubwordModel::Bpe(bpe_train(&lines, args.vocab_size)?),
        Scheme::Unigram => {
            let config = UnigramConfig {
                vocab_size: args.vocab_size,
                prune_fraction: args.prune_fraction,
                ..Default::default()
            };
            SubwordModel::Unigram(unigram_train(&lines, config)?)
        }
    };
    write(&args.output, model.to_file_string())
}

fn load_model(path: &Path) -> Result<SubwordModel> {
    Ok(SubwordModel::from_file_str(&read(path)?)?)
}

fn tokenizer_encode(args: &CodecArgs) -> Result<()> {
    announce(args, None);
    let model = load_model(&args.model)?;
    let mut out = String::new();
    for line in read(&args.input)?.lines() {
        let ids: Vec<String> = model.encode(&clean_text(line)).iter().map(u32::to_string).collect();
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    write(&args.output, out)
}

fn tokenizer_decode(args: &CodecArgs) -> Result<()> {
    announce(args, None);
    let model = load_model(&args.model)?;
    let mut out = String::new();
    for (i, line) in read(&args.input)?.lines().enumerate() {
        let ids = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>().map_err(|_| {
                    hostnet_core::Error::Decode(format!("line {}: `{t}` is not an id", i + 1))
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        out.push_str(&model.decode(&ids)?);
        out.push('\n');
    }
    write(&args.output, out)
}

fn graph_parse(args: &GraphParseArgs) -> Result<()> {
    announce(args, None);
    let sentences = parse_conllu(&read(&args.conllu)?)?;
    let mut out = String::new();
    for s in &sentences {
        let line = json!({
            "id": s.id,
            "tokens": s.tokens.iter().map(|t| &t.surface).collect::<Vec<_>>(),
            "edges": dependency_edges(s),
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    write(&args.output, out)
}

fn resolve_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => toml::from_str::<TrainConfig>(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => TrainConfig::default(),
    };
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = args.threshold {
        config.threshold = v;
    }
    if let Some(v) = &args.layer_widths {
        config.layer_widths = v.clone();
    }
    config.validate()?;
    Ok(config)
}

fn train(args: &TrainArgs) -> Result<()> {
    let config = resolve_config(args)?;
    announce(&config, Some(config.seed));
    let train_set = load_dataset(&args.data)?;
    let valid_set = match &args.valid {
        Some(p) => load_dataset(p)?,
        None => Vec::new(),
    };
    let mut log = String::new();
    let outcome = train_with_observer(&config, &train_set, &valid_set, |m| {
        let valid = m.valid.as_ref().map_or(String::new(), |r| {
            let fine = r.weighted_fine_f1.map_or("undefined".into(), |v| format!("{v:.4}"));
            format!(" valid_fine_f1 {fine} valid_coarse_f1 {:.4}", r.coarse_f1)
        });
        eprintln!("epoch {:>3} train_loss {:.6}{valid}", m.epoch, m.train_loss);
        log.push_str(&serde_json::to_string(m).expect("metrics serialize"));
        log.push('\n');
    })?;
    if let Some(path) = &args.log {
        write(path, &log)?;
    }
    match outcome.best_epoch {
        Some(e) => println!("kept epoch {e}"),
        None => println!("kept final parameters"),
    }
    save_checkpoint(&outcome.checkpoint, &args.out)?;
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.ckpt)?;
    let threshold = args.threshold.unwrap_or(ckpt.config.threshold);
    announce(&json!({ "args": args, "threshold": threshold }), Some(ckpt.config.seed));
    let data = load_dataset(&args.data)?;
    let report = evaluate_params(&ckpt.params, &data, threshold)?;
    write(
        &args.report,
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    print!("{}", report.to_table());
    Ok(())
}

fn predict(args: &PredictArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.ckpt)?;
    let threshold = args.threshold.unwrap_or(ckpt.config.threshold);
    announce(&json!({ "args": args, "threshold": threshold }), Some(ckpt.config.seed));
    let data = load_dataset(&args.data)?;
    let preds = classify_all(&ckpt.params, &data, threshold)?;
    let mut out = String::new();
    for (record, pred) in data.iter().zip(&preds) {
        let probabilities: serde_json::Map<String, serde_json::Value> = LABEL_NAMES
            .iter()
            .zip(pred.probabilities)
            .map(|(name, p)| (name.to_string(), json!(p)))
            .collect();
        let line = json!({
            "id": record.id,
            "probabilities": probabilities,
            "labels": pred.labels,
            "label": pred.labels.describe(),
        });
        let _ = writeln!(out, "{line}");
    }
    write(&args.out, out)
}

fn project(args: &ProjectArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.ckpt)?;
    announce(args, Some(ckpt.config.seed));
    let data = load_dataset(&args.data)?;
    let mut rows = Vec::with_capacity(data.len());
    for record in &data {
        let e = embed(&ckpt.params, record)?;
        rows.push(match args.which {
            Which::Rgcn => e.graph,
            Which::Context => e.context,
            Which::Concat => e.concat(),
        });
    }
    let d = rows.first().map_or(0, |r| r.len());
    let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let matrix = Array2::from_shape_vec((rows.len(), d), flat).expect("rows share a width");
    let projection = pca_project(&matrix, 2)?;
    let ids: Vec<String> = data.iter().map(|r| r.id.clone()).collect();
    let labels: Vec<String> = data
        .iter()
        .map(|r| r.gold.map_or("unlabeled".into(), |g| g.describe()))
        .collect();
    let mut csv = Vec::new();
    write_projection_csv(&mut csv, &ids, &labels, &projection)?;
    write(&args.out, csv)
}
