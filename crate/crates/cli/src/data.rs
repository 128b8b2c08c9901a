//! Turns a run configuration into kernel-ready instances.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use udkernels::combine::{CompositeKernel, CompositeParams, KernelSpec, PairKernel, PairTrees, RelationTrees};
use udkernels::features::{pair_trees, read_pi_dataset, read_re_dataset, relation_trees, EntityVocab, FeatureConfig, REInstance};
use udkernels::kernels::NodeSimilarity;
use udkernels::lexsim::{BilingualDictionary, EmbeddingStore, LexicalSimilarity, Lexicon};
use udkernels::treebank::parse_conllu_named;
use udkernels::{Error, Result};

use crate::config::{RunConfig, SplitPaths, Task};

/// Reads input files and remembers which ones it touched.
#[derive(Debug, Default)]
pub struct Loader {
    opened: Mutex<Vec<PathBuf>>,
}

impl Loader {
    pub fn read(&self, path: &Path, field: &str) -> Result<String> {
        self.opened.lock().expect("loader lock").push(path.to_path_buf());
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{field}: cannot read {}: {e}", path.display())))
    }

    pub fn opened(&self) -> Vec<PathBuf> {
        self.opened.lock().expect("loader lock").clone()
    }
}

fn required<T>(v: &Option<T>, field: String) -> Result<&T> {
    v.as_ref().ok_or_else(|| Error::Config(format!("{field}: missing")))
}

pub fn lexicon(cfg: &RunConfig, loader: &Loader) -> Result<Arc<Lexicon<f64>>> {
    let res = &cfg.resources;
    let mut lex = Lexicon::new(res.pivot.clone());
    if !cfg.needs_embeddings() {
        return Ok(Arc::new(lex));
    }
    for (lang, path) in &res.embeddings {
        let field = format!("resources.embeddings.{lang}");
        let text = loader.read(path, &field)?;
        let store = EmbeddingStore::parse(&text, lang.clone()).map_err(|e| Error::Config(format!("{field}: {}: {e}", path.display())))?;
        lex.add_store(store)?;
    }
    for d in &res.dictionaries {
        let field = format!("resources.dictionaries[{}-{}]", d.source, d.target);
        let text = loader.read(&d.path, &field)?;
        let dict = BilingualDictionary::parse(&text, &d.source, &d.target, res.lowercase_dictionaries)
            .map_err(|e| Error::Config(format!("{field}: {}: {e}", d.path.display())))?;
        lex.add_dictionary(dict);
    }
    Ok(Arc::new(lex))
}

pub fn similarity(spec: &KernelSpec, lexicon: &Arc<Lexicon<f64>>) -> Option<Arc<dyn NodeSimilarity<f64>>> {
    spec.sptk().map(|p| {
        let sigma = p.sigma.clone().unwrap_or_default();
        Arc::new(LexicalSimilarity::new(lexicon.clone(), sigma)) as Arc<dyn NodeSimilarity<f64>>
    })
}

/// Labeled instances of one split, before kernel preparation.
pub enum Dataset {
    Pi(Vec<udkernels::features::PIInstance>),
    Re(Vec<REInstance>),
}

pub const POSITIVE: &str = "positive";
pub const NEGATIVE: &str = "negative";

impl Dataset {
    pub fn ids(&self) -> Vec<String> {
        match self {
            Dataset::Pi(v) => v.iter().map(|i| i.id.clone()).collect(),
            Dataset::Re(v) => v.iter().map(|i| i.id().to_string()).collect(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            Dataset::Pi(v) => v.iter().map(|i| if i.label { POSITIVE } else { NEGATIVE }.to_string()).collect(),
            Dataset::Re(v) => v.iter().map(|i| i.label.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Pi(v) => v.len(),
            Dataset::Re(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn uses_constituency(cfg: &RunConfig) -> bool {
    matches!(&cfg.kernel, KernelSpec::Composite(p) if p.variant.uses_constituency())
}

pub fn load_split(cfg: &RunConfig, name: &str, loader: &Loader) -> Result<Dataset> {
    let split: &SplitPaths = cfg.split(name)?;
    let field = |f: &str| format!("{name}.{f}");
    let ds = match cfg.task {
        Task::Pi => {
            let pairs_path = required(&split.pairs, field("pairs"))?;
            let pa = required(&split.trees_a, field("trees_a"))?;
            let pb = required(&split.trees_b, field("trees_b"))?;
            let lang_a = split.lang_a.as_deref().unwrap_or("en");
            let lang_b = split.lang_b.as_deref().unwrap_or(lang_a);
            let ta = parse_conllu_named(&loader.read(pa, &field("trees_a"))?, &pa.display().to_string())?;
            let tb = if pb == pa {
                ta.clone()
            } else {
                parse_conllu_named(&loader.read(pb, &field("trees_b"))?, &pb.display().to_string())?
            };
            let pairs = loader.read(pairs_path, &field("pairs"))?;
            let v = read_pi_dataset(&pairs, &ta, lang_a, &tb, lang_b)
                .map_err(|e| Error::Config(format!("{}: {}: {e}", field("pairs"), pairs_path.display())))?;
            Dataset::Pi(v)
        }
        Task::Re => {
            let path = required(&split.conllu, field("conllu"))?;
            let lang = split.lang.as_deref().unwrap_or("en");
            let text = loader.read(path, &field("conllu"))?;
            // Only variants with a constituency term ever open these files.
            let constituency = if uses_constituency(cfg) {
                let p = required(&split.constituency, field("constituency"))?;
                Some(loader.read(p, &field("constituency"))?)
            } else {
                None
            };
            Dataset::Re(read_re_dataset(&text, constituency.as_deref(), lang, &path.display().to_string())?)
        }
    };
    if ds.is_empty() {
        return Err(Error::Config(format!("{name}: the split has no instances")));
    }
    Ok(ds)
}

/// Everything besides the kernel spec needed to rebuild instances the way
/// the model saw them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub features: FeatureConfig,
    pub entity_vocab: Option<EntityVocab>,
}

pub fn pair_items(ds: &Dataset) -> Result<Vec<PairTrees>> {
    match ds {
        Dataset::Pi(v) => v.iter().map(pair_trees).collect(),
        Dataset::Re(_) => Err(Error::Config("paraphrase kernel over relation data".into())),
    }
}

pub fn relation_items(
    ds: &Dataset,
    params: &CompositeParams,
    lexicon: &Lexicon<f64>,
    pre: &Preprocessing,
) -> Result<Vec<RelationTrees<f64>>> {
    match ds {
        Dataset::Re(v) => v
            .iter()
            .map(|i| relation_trees(i, params, lexicon, pre.entity_vocab.as_ref(), &pre.features))
            .collect(),
        Dataset::Pi(_) => Err(Error::Config("composite kernel over paraphrase data".into())),
    }
}

/// Kernel-ready instances together with the kernel that scores them.
#[allow(clippy::large_enum_variant)]
pub enum Prepared {
    Pi {
        items: Vec<PairTrees>,
        kernel: PairKernel<f64>,
    },
    Re {
        items: Vec<RelationTrees<f64>>,
        kernel: CompositeKernel<f64>,
        pre: Preprocessing,
    },
}

/// `pre` fixes the feature setup; without it one is derived from `cfg`
/// and the data (the training case).
pub fn prepare(
    cfg: &RunConfig,
    spec: &KernelSpec,
    ds: &Dataset,
    lexicon: &Arc<Lexicon<f64>>,
    pre: Option<Preprocessing>,
) -> Result<Prepared> {
    let sim = similarity(spec, lexicon);
    match spec {
        KernelSpec::SoftmaxPair(p) => Ok(Prepared::Pi {
            items: pair_items(ds)?,
            kernel: PairKernel::new(p.clone(), sim)?,
        }),
        KernelSpec::Composite(p) => {
            let pre = match pre {
                Some(pre) => pre,
                None => Preprocessing {
                    features: cfg.features.clone(),
                    entity_vocab: match ds {
                        Dataset::Re(v) if p.feature_mode == udkernels::combine::FeatureMode::Entity => {
                            Some(EntityVocab::collect(v))
                        }
                        _ => None,
                    },
                },
            };
            Ok(Prepared::Re {
                items: relation_items(ds, p, lexicon, &pre)?,
                kernel: CompositeKernel::new(p.clone(), sim)?,
                pre,
            })
        }
    }
}
