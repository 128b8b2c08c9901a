use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use udkernels::combine::KernelSpec;
use udkernels::features::{collapse_for_relation, read_re_dataset, FeatureConfig};
use udkernels::kernels::{PreparedTree, TreeKernel, TreeKernelKind, TreeKernelParams};
use udkernels::learn::{
    compute_gram, costs, fingerprint, kernel_rows, train_binary, train_ovr, GramMatrix, InstanceKernel, ModelParts, SvmModel,
};
use udkernels::treebank::{parse_conllu_named, validate, write_conllu, DepTree};
use udkernels::treeform::{collapse_mwe, extract_pet, to_lct, LabeledTree};
use udkernels::{Error, Result};

use crate::config::{RunConfig, Task};
use crate::data::{lexicon, load_split, prepare, Dataset, Loader, Prepared, Preprocessing, NEGATIVE, POSITIVE};
use crate::eval::{evaluate, read_predictions, write_predictions, EvalReport, PredictionRow};

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GramFormat {
    Tsv,
    Bin,
}

impl GramFormat {
    fn file_name(self) -> &'static str {
        match self {
            GramFormat::Tsv => "gram.tsv",
            GramFormat::Bin => "gram.bin",
        }
    }
}

pub const GRAM_MAGIC: &[u8; 8] = b"UDKGRAM1";

/// Sidecar describing a stored Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramManifest {
    pub version: u32,
    pub split: String,
    pub kernel_spec: KernelSpec,
    pub fingerprint: String,
    pub n: usize,
    pub ids: Vec<String>,
    pub format: GramFormat,
    pub file: String,
}

/// One row per line, tab-separated, shortest round-trip decimal form.
pub fn gram_to_tsv(g: &GramMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..g.n() {
        let row: Vec<String> = g.row(i).iter().map(|v| v.to_string()).collect();
        s += &row.join("\t");
        s.push('\n');
    }
    s
}

/// Magic, `n` as little-endian u64, then `n²` little-endian f64 values.
pub fn gram_to_bin(g: &GramMatrix<f64>) -> Vec<u8> {
    let mut b = Vec::with_capacity(16 + 8 * g.data().len());
    b.extend_from_slice(GRAM_MAGIC);
    b.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for v in g.data() {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

fn gram_values(bytes: &[u8], format: GramFormat, n: usize) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::Incompatible(format!("gram file: {m}"));
    let data: Vec<f64> = match format {
        GramFormat::Tsv => {
            let text = std::str::from_utf8(bytes).map_err(|_| bad("not UTF-8"))?;
            text.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("bad value {t:?}"))))
                .collect::<Result<_>>()?
        }
        GramFormat::Bin => {
            if bytes.len() < 16 || &bytes[..8] != GRAM_MAGIC {
                return Err(bad("missing header"));
            }
            let stored = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
            if stored != n as u64 {
                return Err(bad("size disagrees with the manifest"));
            }
            bytes[16..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect()
        }
    };
    if data.len() != n * n {
        return Err(bad(&format!("{} values for n = {n}", data.len())));
    }
    Ok(data)
}

pub fn read_gram(dir: &Path) -> Result<(GramManifest, GramMatrix<f64>)> {
    let mpath = dir.join("manifest.json");
    let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let m: GramManifest = serde_json::from_str(&text)?;
    let path = dir.join(&m.file);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let data = gram_values(&bytes, m.format, m.n)?;
    let g = GramMatrix::from_rows(data, m.ids.clone(), m.fingerprint.clone())?;
    Ok((m, g))
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("--threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn gram_of<I: Sync, K: InstanceKernel<f64, I>>(items: &[I], ids: Vec<String>, kernel: &K, fp: &str, threads: Option<usize>) -> Result<GramMatrix<f64>> {
    with_threads(threads, || compute_gram(items, ids, kernel, fp))?
}

fn prepared_gram(p: &Prepared, ids: Vec<String>, fp: &str, threads: Option<usize>) -> Result<GramMatrix<f64>> {
    match p {
        Prepared::Pi { items, kernel } => gram_of(items, ids, kernel, fp, threads),
        Prepared::Re { items, kernel, .. } => gram_of(items, ids, kernel, fp, threads),
    }
}

pub struct GramArgs {
    pub split: String,
    pub format: GramFormat,
    pub out: Option<PathBuf>,
}

/// Computes and stores the Gram matrix of one split; returns its directory.
pub fn cmd_gram(cfg: &RunConfig, args: &GramArgs, threads: Option<usize>, loader: &Loader) -> Result<PathBuf> {
    cfg.validate()?;
    let ds = load_split(cfg, &args.split, loader)?;
    let lex = lexicon(cfg, loader)?;
    let prepared = prepare(cfg, &cfg.kernel, &ds, &lex, None)?;
    let fp = fingerprint(&cfg.kernel)?;
    let g = prepared_gram(&prepared, ds.ids(), &fp, threads)?;
    let dir = args.out.clone().unwrap_or_else(|| cfg.output_dir().join(format!("gram-{}", args.split)));
    let bytes = match args.format {
        GramFormat::Tsv => gram_to_tsv(&g).into_bytes(),
        GramFormat::Bin => gram_to_bin(&g),
    };
    write_file(&dir.join(args.format.file_name()), &bytes)?;
    let manifest = GramManifest {
        version: 1,
        split: args.split.clone(),
        kernel_spec: cfg.kernel.clone(),
        fingerprint: fp,
        n: g.n(),
        ids: g.ids.clone(),
        format: args.format,
        file: args.format.file_name().into(),
    };
    write_file(&dir.join("manifest.json"), (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())?;
    log::info!("wrote {}x{} gram matrix to {}", g.n(), g.n(), dir.display());
    Ok(dir)
}

fn model_path(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.model.clone())
        .unwrap_or_else(|| cfg.output_dir().join("model.json"))
}

fn train_model<I: Clone + Serialize>(
    cfg: &RunConfig,
    items: &[I],
    ds: &Dataset,
    g: &GramMatrix<f64>,
    pre: Option<&Preprocessing>,
) -> Result<SvmModel<f64, I>> {
    let ids = ds.ids();
    let labels = ds.labels();
    let parts = ModelParts {
        task: cfg.task.name(),
        kernel_spec: &cfg.kernel,
        instances: items,
        ids: &ids,
        svm: &cfg.svm,
    };
    let mut model = match cfg.task {
        Task::Pi => {
            let y: Vec<f64> = labels.iter().map(|l| if l == POSITIVE { 1.0 } else { -1.0 }).collect();
            let s = train_binary(g, &y, &costs(&labels, &cfg.svm), &cfg.svm)?;
            SvmModel::from_binary(parts, &s, POSITIVE, NEGATIVE)?
        }
        Task::Re => SvmModel::from_ovr(parts, &train_ovr(g, &labels, &cfg.svm)?)?,
    };
    model.preprocessing = pre.map(serde_json::to_value).transpose()?;
    for (c, ok) in model.classes.iter().zip(&model.training_meta.converged) {
        if !ok {
            log::warn!("class {:?} stopped at the sweep limit before converging", c.label);
        }
    }
    Ok(model)
}

pub struct TrainArgs {
    pub out: Option<PathBuf>,
    /// Directory written by `gram` over the training split.
    pub gram: Option<PathBuf>,
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs, threads: Option<usize>, loader: &Loader) -> Result<PathBuf> {
    cfg.validate()?;
    let ds = load_split(cfg, "train", loader)?;
    let lex = lexicon(cfg, loader)?;
    let prepared = prepare(cfg, &cfg.kernel, &ds, &lex, None)?;
    let fp = fingerprint(&cfg.kernel)?;
    let g = match &args.gram {
        Some(dir) => {
            let (m, g) = read_gram(dir)?;
            if m.fingerprint != fp {
                return Err(Error::Incompatible(format!(
                    "gram in {} was built with kernel {}, config has {fp}",
                    dir.display(),
                    m.fingerprint
                )));
            }
            if m.ids != ds.ids() {
                return Err(Error::Incompatible(format!("gram in {} covers other instances", dir.display())));
            }
            g
        }
        None => prepared_gram(&prepared, ds.ids(), &fp, threads)?,
    };
    let path = model_path(cfg, args.out.as_deref());
    let json = match &prepared {
        Prepared::Pi { items, .. } => train_model(cfg, items, &ds, &g, None)?.to_json()?,
        Prepared::Re { items, pre, .. } => train_model(cfg, items, &ds, &g, Some(pre))?.to_json()?,
    };
    write_file(&path, (json + "\n").as_bytes())?;
    log::info!("trained on {} instances, model at {}", ds.len(), path.display());
    Ok(path)
}

fn load_model<I: Serialize + DeserializeOwned>(cfg: &RunConfig, path: &Path) -> Result<SvmModel<f64, I>> {
    let model = SvmModel::<f64, I>::load(path)?;
    if model.task != cfg.task.name() {
        return Err(Error::Incompatible(format!(
            "model {} is for task {}, config is for {}",
            path.display(),
            model.task,
            cfg.task.name()
        )));
    }
    let fp = fingerprint(&cfg.kernel)?;
    if model.fingerprint != fp {
        return Err(Error::Incompatible(format!(
            "model {} was trained with kernel {}, config has {fp}",
            path.display(),
            model.fingerprint
        )));
    }
    Ok(model)
}

fn predict_rows<I: Sync, K: InstanceKernel<f64, I>>(
    model: &SvmModel<f64, I>,
    items: &[I],
    kernel: &K,
    ids: &[String],
    gold: &[String],
    threads: Option<usize>,
) -> Result<Vec<PredictionRow>> {
    let rows = with_threads(threads, || kernel_rows(items, &model.support_pool, kernel))??;
    rows.iter()
        .zip(ids.iter().zip(gold))
        .map(|(row, (id, g))| {
            let p = model.predict(row)?;
            Ok(PredictionRow {
                id: id.clone(),
                gold: g.clone(),
                predicted: p.label,
                decisions: p.decisions,
            })
        })
        .collect()
}

pub struct PredictArgs {
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn predict(cfg: &RunConfig, args: &PredictArgs, threads: Option<usize>, loader: &Loader) -> Result<(Vec<PredictionRow>, Vec<String>)> {
    cfg.validate()?;
    let path = model_path(cfg, args.model.as_deref());
    let ds = load_split(cfg, "test", loader)?;
    let lex = lexicon(cfg, loader)?;
    let (ids, gold) = (ds.ids(), ds.labels());
    match cfg.task {
        Task::Pi => {
            let model = load_model(cfg, &path)?;
            let Prepared::Pi { items, kernel } = prepare(cfg, &model.kernel_spec, &ds, &lex, None)? else {
                unreachable!("pair spec prepares pairs")
            };
            let rows = predict_rows(&model, &items, &kernel, &ids, &gold, threads)?;
            Ok((rows, model.labels().iter().map(|s| s.to_string()).collect()))
        }
        Task::Re => {
            let model = load_model(cfg, &path)?;
            let pre: Preprocessing = match &model.preprocessing {
                Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Load(format!("preprocessing: {e}")))?,
                None => return Err(Error::Load("relation model without preprocessing settings".into())),
            };
            if pre.features != cfg.features {
                log::warn!("feature settings differ from the model's; using the model's");
            }
            let Prepared::Re { items, kernel, .. } = prepare(cfg, &model.kernel_spec, &ds, &lex, Some(pre))? else {
                unreachable!("composite spec prepares relations")
            };
            let rows = predict_rows(&model, &items, &kernel, &ids, &gold, threads)?;
            Ok((rows, model.labels().iter().map(|s| s.to_string()).collect()))
        }
    }
}

pub fn cmd_predict(cfg: &RunConfig, args: &PredictArgs, threads: Option<usize>, loader: &Loader) -> Result<PathBuf> {
    let (rows, _) = predict(cfg, args, threads, loader)?;
    let path = args
        .out
        .clone()
        .or_else(|| cfg.output.predictions.clone())
        .unwrap_or_else(|| cfg.output_dir().join("predictions.tsv"));
    write_file(&path, write_predictions(&rows).as_bytes())?;
    Ok(path)
}

pub struct EvalArgs {
    pub predict: PredictArgs,
    /// Score this predictions file instead of running a model.
    pub predictions: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub fn cmd_eval(cfg: &RunConfig, args: &EvalArgs, threads: Option<usize>, loader: &Loader, out: &mut dyn Write) -> Result<EvalReport> {
    let (rows, labels) = match &args.predictions {
        Some(p) => (read_predictions(&loader.read(p, "--predictions")?)?, Vec::new()),
        None => {
            let (rows, labels) = predict(cfg, &args.predict, threads, loader)?;
            let path = args
                .predict
                .out
                .clone()
                .or_else(|| cfg.output.predictions.clone())
                .unwrap_or_else(|| cfg.output_dir().join("predictions.tsv"));
            write_file(&path, write_predictions(&rows).as_bytes())?;
            (rows, labels)
        }
    };
    let gold: Vec<String> = rows.iter().map(|r| r.gold.clone()).collect();
    let pred: Vec<String> = rows.iter().map(|r| r.predicted.clone()).collect();
    let report = evaluate(&gold, &pred, &labels, &cfg.eval)?;
    let path = args
        .report
        .clone()
        .or_else(|| cfg.output.report.clone())
        .unwrap_or_else(|| cfg.output_dir().join("report.json"));
    write_file(&path, (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    emit(out, &report.to_table())?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TransformOp {
    Lct,
    Pet,
    Mwe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum TreeFormat {
    #[default]
    Sexpr,
    Conllu,
}

pub struct TransformArgs {
    pub op: TransformOp,
    pub input: PathBuf,
    pub constituency: Option<PathBuf>,
    pub format: TreeFormat,
}

fn has_entities(t: &DepTree) -> bool {
    ["e1", "e2"]
        .iter()
        .all(|m| t.tokens().iter().any(|tok| tok.misc.get_all("Entity").any(|v| v == *m)))
}

/// Merges multiword expressions: around the entities when the sentence marks
/// them, otherwise everywhere.
fn collapse_sentence(tree: &DepTree, features: &FeatureConfig) -> Result<DepTree> {
    if has_entities(tree) && tree.meta("relation").is_some() {
        let text = write_conllu(std::slice::from_ref(tree));
        let inst = read_re_dataset(&text, None, "xx", &tree.sent_id)?.remove(0);
        return Ok(collapse_for_relation(&inst, features)?.tree);
    }
    let all: BTreeSet<usize> = tree.tokens().iter().map(|t| t.id).collect();
    Ok(collapse_mwe(tree, &features.mwe, &all)?.0)
}

pub fn cmd_transform(features: &FeatureConfig, args: &TransformArgs, loader: &Loader, out: &mut dyn Write) -> Result<()> {
    let text = loader.read(&args.input, "--input")?;
    let source = args.input.display().to_string();
    let mut s = String::new();
    match args.op {
        TransformOp::Lct | TransformOp::Mwe => {
            let trees = parse_conllu_named(&text, &source)?;
            let mut merged = Vec::new();
            for t in &trees {
                let t = if args.op == TransformOp::Mwe {
                    collapse_sentence(t, features)?
                } else {
                    t.clone()
                };
                match args.format {
                    TreeFormat::Sexpr => {
                        s += &to_lct(&t)?.to_sexpr();
                        s.push('\n');
                    }
                    TreeFormat::Conllu => merged.push(t),
                }
            }
            if args.format == TreeFormat::Conllu {
                s = write_conllu(&merged);
            }
        }
        TransformOp::Pet => {
            let cpath = args
                .constituency
                .as_ref()
                .ok_or_else(|| Error::Argument("--op pet needs --constituency".into()))?;
            let ctext = loader.read(cpath, "--constituency")?;
            for inst in read_re_dataset(&text, Some(&ctext), "xx", &source)? {
                let ct = inst.const_tree.as_ref().expect("constituency was given");
                s += &extract_pet(ct, inst.e1_span, inst.e2_span)?.to_bracketed();
                s.push('\n');
            }
        }
    }
    emit(out, &s)
}

/// Prints one line per sentence; fails if any sentence is invalid.
pub fn cmd_validate(inputs: &[PathBuf], loader: &Loader, out: &mut dyn Write) -> Result<()> {
    let mut bad = 0;
    let mut total = 0;
    let mut s = String::new();
    for p in inputs {
        let source = p.display().to_string();
        for t in parse_conllu_named(&loader.read(p, "input")?, &source)? {
            total += 1;
            let r = validate(&t);
            if r.is_valid() {
                s += &format!("{source}\t{}\tok\n", t.sent_id);
            } else {
                bad += 1;
                s += &format!("{source}\t{}\tinvalid: {r}\n", t.sent_id);
            }
        }
    }
    emit(out, &s)?;
    if bad > 0 {
        return Err(Error::InvalidTree {
            sent_id: format!("{bad} of {total} sentences"),
            report: "see the listing above".into(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DeltaKind {
    Sst,
    Ptk,
}

/// Tab-separated Δ(n1, n2) over the preorder nodes of two trees.
pub fn cmd_delta(kind: DeltaKind, lambda: f64, mu: f64, a: &str, b: &str, out: &mut dyn Write) -> Result<()> {
    let kind = match kind {
        DeltaKind::Sst => TreeKernelKind::Sst,
        DeltaKind::Ptk => TreeKernelKind::Ptk,
    };
    let params = TreeKernelParams::new(kind).with_decay(lambda, mu);
    params.validate()?;
    let (ta, tb) = (LabeledTree::parse_sexpr(a)?, LabeledTree::parse_sexpr(b)?);
    let k = TreeKernel::<f64>::new(&params)?;
    let d = k.delta_matrix(&PreparedTree::new(&ta), &PreparedTree::new(&tb))?;
    emit(out, &d.to_tsv())
}
