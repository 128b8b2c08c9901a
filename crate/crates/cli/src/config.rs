use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use udkernels::combine::KernelSpec;
use udkernels::features::FeatureConfig;
use udkernels::kernels::TreeKernelKind;
use udkernels::learn::SvmParams;
use udkernels::lexsim::SigmaConfig;
use udkernels::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pi,
    Re,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Pi => "pi",
            Task::Re => "re",
        }
    }
}

/// One split of a dataset.
///
/// Paraphrase data uses `pairs`, `trees_a`/`lang_a` and `trees_b`/`lang_b`;
/// relation data uses `conllu`, `lang` and optionally `constituency`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitPaths {
    pub conllu: Option<PathBuf>,
    pub constituency: Option<PathBuf>,
    pub lang: Option<String>,
    pub pairs: Option<PathBuf>,
    pub trees_a: Option<PathBuf>,
    pub trees_b: Option<PathBuf>,
    pub lang_a: Option<String>,
    pub lang_b: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryPath {
    pub source: String,
    pub target: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resources {
    /// Language whose embedding space translated words are compared in.
    pub pivot: String,
    /// Embedding file per language.
    pub embeddings: BTreeMap<String, PathBuf>,
    pub dictionaries: Vec<DictionaryPath>,
    pub lowercase_dictionaries: bool,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            pivot: "en".into(),
            embeddings: BTreeMap::new(),
            dictionaries: Vec::new(),
            lowercase_dictionaries: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Leave this label out of macro averaging.
    pub exclude_other: bool,
    pub other_label: String,
    /// Score `A(e1,e2)` and `A(e2,e1)` as one class.
    pub merge_directions: bool,
    /// Label whose F₁ is reported for binary tasks.
    pub positive_label: String,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            exclude_other: true,
            other_label: "Other".into(),
            merge_directions: false,
            positive_label: "positive".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub kernel: KernelSpec,
    pub train: Option<SplitPaths>,
    pub test: Option<SplitPaths>,
    #[serde(default)]
    pub resources: Resources,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub svm: SvmParams,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

impl RunConfig {
    /// Parses a config. An SPTK without a `sigma` block gets the default
    /// one written in, so stored kernel specs are always explicit.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        let trees = match &mut cfg.kernel {
            KernelSpec::SoftmaxPair(p) => vec![&mut p.base],
            KernelSpec::Composite(p) => vec![&mut p.sst, &mut p.pt],
        };
        for t in trees {
            if t.kind == TreeKernelKind::Sptk && t.sigma.is_none() {
                t.sigma = Some(SigmaConfig::default());
            }
        }
        Ok(cfg)
    }

    /// Reads a config and makes its relative paths relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for split in [&mut self.train, &mut self.test].into_iter().flatten() {
            for p in [
                &mut split.conllu,
                &mut split.constituency,
                &mut split.pairs,
                &mut split.trees_a,
                &mut split.trees_b,
            ] {
                resolve_opt(base, p);
            }
        }
        for p in self.resources.embeddings.values_mut() {
            resolve(base, p);
        }
        for d in &mut self.resources.dictionaries {
            resolve(base, &mut d.path);
        }
        for p in [
            &mut self.output.dir,
            &mut self.output.model,
            &mut self.output.predictions,
            &mut self.output.report,
        ] {
            resolve_opt(base, p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.features.validate()?;
        self.svm.validate()?;
        match (self.task, &self.kernel) {
            (Task::Pi, KernelSpec::SoftmaxPair(_)) | (Task::Re, KernelSpec::Composite(_)) => {}
            (t, _) => {
                return Err(Error::Config(format!(
                    "kernel: task {} needs a {} kernel",
                    t.name(),
                    if t == Task::Pi { "softmax_pair" } else { "composite" }
                )))
            }
        }
        if self.needs_embeddings() && self.resources.embeddings.is_empty() {
            return Err(Error::Config(format!(
                "resources.embeddings: the {} kernel needs word embeddings",
                self.kernel_name()
            )));
        }
        Ok(())
    }

    pub fn kernel_name(&self) -> String {
        match &self.kernel {
            KernelSpec::SoftmaxPair(p) => format!("softmax_pair over {:?}", p.base.kind).to_lowercase(),
            KernelSpec::Composite(p) => p.variant.to_string(),
        }
    }

    /// SPTK needs vectors for σ; every composite variant needs them for
    /// its feature vector.
    pub fn needs_embeddings(&self) -> bool {
        matches!(self.kernel, KernelSpec::Composite(_)) || self.kernel.sptk().is_some()
    }

    pub fn split(&self, name: &str) -> Result<&SplitPaths> {
        let s = match name {
            "train" => self.train.as_ref(),
            "test" => self.test.as_ref(),
            _ => return Err(Error::Argument(format!("unknown split {name:?}, expected train or test"))),
        };
        s.ok_or_else(|| Error::Config(format!("{name}: no {name} split configured")))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
