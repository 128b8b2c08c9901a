//! Kernel combinations: the softmax pair kernel and the composite relation
//! kernels.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::{normalize, NodeSimilarity, PolyParams, PreparedTree, TreeKernel, TreeKernelKind, TreeKernelParams};
use crate::scalar::Scalar;
use crate::treeform::LabeledTree;

pub const DEFAULT_M: f64 = 100.0;
pub const DEFAULT_ALPHA: f64 = 0.23;

/// Smooth maximum `(1/m) ln(e^(m x1) + e^(m x2))`, evaluated without
/// overflow as `max + (1/m) ln(1 + e^(-m |x1 - x2|))`.
pub fn softmax2<T: Scalar>(x1: T, x2: T, m: T) -> T {
    let hi = x1.max(x2);
    hi + (-(m * (x1 - x2).abs())).exp().ln_1p() / m
}

static NEXT_KEY: AtomicU64 = AtomicU64::new(1);

/// A prepared tree with a process-unique identity used as a cache key.
///
/// Clones share the key. Serializes as its s-expression and language.
#[derive(Debug, Clone)]
pub struct KeyedTree {
    key: u64,
    tree: PreparedTree,
}

impl KeyedTree {
    pub fn new(tree: &LabeledTree, lang: impl Into<String>) -> Self {
        KeyedTree::from_prepared(PreparedTree::new(tree).with_lang(lang))
    }

    pub fn from_prepared(tree: PreparedTree) -> Self {
        KeyedTree {
            key: NEXT_KEY.fetch_add(1, Ordering::Relaxed),
            tree,
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn tree(&self) -> &PreparedTree {
        &self.tree
    }

    pub fn lang(&self) -> &str {
        self.tree.lang()
    }
}

impl PartialEq for KeyedTree {
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree
    }
}

#[derive(Serialize, Deserialize)]
struct TreeText {
    tree: String,
    #[serde(default)]
    lang: String,
}

impl Serialize for KeyedTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeText {
            tree: self.tree.to_labeled().to_sexpr(),
            lang: self.lang().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KeyedTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = TreeText::deserialize(d)?;
        let tree = LabeledTree::parse_sexpr(&t.tree).map_err(serde::de::Error::custom)?;
        Ok(KeyedTree::new(&tree, t.lang))
    }
}

/// A tree kernel with cached self-kernels and an evaluation counter.
pub struct CachedTreeKernel<T> {
    params: TreeKernelParams,
    similarity: Option<Arc<dyn NodeSimilarity<T>>>,
    norms: RwLock<HashMap<u64, T>>,
    pairs: Option<RwLock<HashMap<(u64, u64), T>>>,
    calls: AtomicUsize,
}

impl<T: Scalar> fmt::Debug for CachedTreeKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CachedTreeKernel")
            .field("params", &self.params)
            .field("calls", &self.calls())
            .finish()
    }
}

impl<T: Scalar> CachedTreeKernel<T> {
    pub fn new(params: TreeKernelParams, similarity: Option<Arc<dyn NodeSimilarity<T>>>) -> Result<Self> {
        params.validate()?;
        if params.kind == TreeKernelKind::Sptk && similarity.is_none() {
            return Err(Error::Config("sptk requires lexical resources (embeddings)".into()));
        }
        Ok(CachedTreeKernel {
            params,
            similarity,
            norms: RwLock::new(HashMap::new()),
            pairs: None,
            calls: AtomicUsize::new(0),
        })
    }

    /// Also memoizes cross values, keyed by the unordered key pair.
    pub fn with_pair_cache(mut self) -> Self {
        self.pairs = Some(RwLock::new(HashMap::new()));
        self
    }

    pub fn params(&self) -> &TreeKernelParams {
        &self.params
    }

    /// Number of raw kernel evaluations performed so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn raw(&self, a: &PreparedTree, b: &PreparedTree) -> Result<T> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut k = TreeKernel::new(&self.params)?;
        if let Some(sim) = &self.similarity {
            k = k.with_similarity(sim.as_ref());
        }
        k.raw(a, b)
    }

    fn self_kernel(&self, t: &KeyedTree) -> Result<T> {
        if let Some(&v) = self.norms.read().expect("cache lock").get(&t.key) {
            return Ok(v);
        }
        let v = self.raw(&t.tree, &t.tree)?;
        self.norms.write().expect("cache lock").insert(t.key, v);
        Ok(v)
    }

    pub fn evaluate(&self, a: &KeyedTree, b: &KeyedTree) -> Result<T> {
        let pair = (a.key.min(b.key), a.key.max(b.key));
        if let Some(cache) = &self.pairs {
            if let Some(&v) = cache.read().expect("cache lock").get(&pair) {
                return Ok(v);
            }
        }
        let v = if !self.params.normalize {
            self.raw(&a.tree, &b.tree)?
        } else if a.key == b.key {
            if self.self_kernel(a)? > T::zero() {
                T::one()
            } else {
                T::zero()
            }
        } else {
            let k = self.raw(&a.tree, &b.tree)?;
            normalize(k, self.self_kernel(a)?, self.self_kernel(b)?)
        };
        if let Some(cache) = &self.pairs {
            cache.write().expect("cache lock").insert(pair, v);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKernelParams {
    pub base: TreeKernelParams,
    #[serde(default = "default_m")]
    pub m: f64,
}

fn default_m() -> f64 {
    DEFAULT_M
}

impl PairKernelParams {
    pub fn new(base: TreeKernelParams) -> Self {
        PairKernelParams { base, m: DEFAULT_M }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m must be positive, got {}", self.m)));
        }
        self.base.validate()
    }
}

/// The two trees of a sentence pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTrees {
    pub a: KeyedTree,
    pub b: KeyedTree,
}

/// `softmax(TK(a1,b1)·TK(a2,b2), TK(a1,b2)·TK(a2,b1))`.
#[derive(Debug)]
pub struct PairKernel<T: Scalar> {
    params: PairKernelParams,
    tk: CachedTreeKernel<T>,
}

impl<T: Scalar> PairKernel<T> {
    pub fn new(params: PairKernelParams, similarity: Option<Arc<dyn NodeSimilarity<T>>>) -> Result<Self> {
        params.validate()?;
        let tk = CachedTreeKernel::new(params.base.clone(), similarity)?;
        Ok(PairKernel { params, tk })
    }

    pub fn params(&self) -> &PairKernelParams {
        &self.params
    }

    pub fn tree_kernel(&self) -> &CachedTreeKernel<T> {
        &self.tk
    }

    pub fn evaluate(&self, pa: &PairTrees, pb: &PairTrees) -> Result<T> {
        let straight = self.tk.evaluate(&pa.a, &pb.a)? * self.tk.evaluate(&pa.b, &pb.b)?;
        let crossed = self.tk.evaluate(&pa.a, &pb.b)? * self.tk.evaluate(&pa.b, &pb.a)?;
        let v = softmax2(straight, crossed, T::of(self.params.m));
        if !v.is_finite() {
            return Err(Error::Numeric("pair kernel is not finite".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CkVariant {
    /// Entity features with the constituency term.
    Ck,
    Ck1,
    Ck2,
    Ck3,
}

/// Which feature vector feeds the polynomial part of a composite kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    Entity,
    Vo,
    Vud,
}

impl CkVariant {
    pub fn feature_mode(self) -> FeatureMode {
        match self {
            CkVariant::Ck => FeatureMode::Entity,
            CkVariant::Ck1 => FeatureMode::Vo,
            CkVariant::Ck2 | CkVariant::Ck3 => FeatureMode::Vud,
        }
    }

    pub fn uses_constituency(self) -> bool {
        self != CkVariant::Ck2
    }
}

impl fmt::Display for CkVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CkVariant::Ck => "ck",
            CkVariant::Ck1 => "ck1",
            CkVariant::Ck2 => "ck2",
            CkVariant::Ck3 => "ck3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeParams {
    pub variant: CkVariant,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "TreeKernelParams::sst")]
    pub sst: TreeKernelParams,
    #[serde(default = "TreeKernelParams::ptk")]
    pub pt: TreeKernelParams,
    #[serde(default)]
    pub vec: PolyParams,
    pub feature_mode: FeatureMode,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

impl CompositeParams {
    pub fn new(variant: CkVariant) -> Self {
        CompositeParams {
            variant,
            alpha: DEFAULT_ALPHA,
            sst: TreeKernelParams::sst(),
            pt: TreeKernelParams::ptk(),
            vec: PolyParams::default(),
            feature_mode: variant.feature_mode(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0,1], got {}", self.alpha)));
        }
        if self.feature_mode != self.variant.feature_mode() {
            return Err(Error::Config(format!(
                "{} uses {:?} features, not {:?}",
                self.variant,
                self.variant.feature_mode(),
                self.feature_mode
            )));
        }
        if self.sst.kind != TreeKernelKind::Sst {
            return Err(Error::Config("the constituency kernel must be sst".into()));
        }
        if self.pt.kind == TreeKernelKind::Sst {
            return Err(Error::Config("the dependency kernel must be ptk or sptk".into()));
        }
        self.sst.validate()?;
        self.pt.validate()?;
        self.vec.validate()
    }
}

/// Feature vectors of one relation instance; any may be absent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RelationVectors<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vo: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vud: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<Vec<T>>,
}

impl<T> RelationVectors<T> {
    pub fn get(&self, mode: FeatureMode) -> Option<&[T]> {
        match mode {
            FeatureMode::Entity => self.entity.as_deref(),
            FeatureMode::Vo => self.vo.as_deref(),
            FeatureMode::Vud => self.vud.as_deref(),
        }
    }
}

/// Kernel-side view of a relation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RelationTrees<T> {
    /// Path-enclosed constituency tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pet: Option<KeyedTree>,
    /// Lexical-centered dependency tree.
    pub lct: KeyedTree,
    pub vectors: RelationVectors<T>,
}

/// `CK`, `CK1`, `CK2` or `CK3` over [`RelationTrees`].
#[derive(Debug)]
pub struct CompositeKernel<T: Scalar> {
    params: CompositeParams,
    sst: CachedTreeKernel<T>,
    pt: CachedTreeKernel<T>,
}

impl<T: Scalar> CompositeKernel<T> {
    pub fn new(params: CompositeParams, similarity: Option<Arc<dyn NodeSimilarity<T>>>) -> Result<Self> {
        params.validate()?;
        let sst = CachedTreeKernel::new(params.sst.clone(), None)?;
        let pt = CachedTreeKernel::new(params.pt.clone(), similarity)?;
        Ok(CompositeKernel { params, sst, pt })
    }

    pub fn params(&self) -> &CompositeParams {
        &self.params
    }

    /// Constituency kernel evaluations performed so far.
    pub fn sst_calls(&self) -> usize {
        self.sst.calls()
    }

    pub fn pt_calls(&self) -> usize {
        self.pt.calls()
    }

    fn vector<'a>(&self, r: &'a RelationTrees<T>) -> Result<&'a [T]> {
        let mode = self.params.feature_mode;
        r.vectors
            .get(mode)
            .ok_or_else(|| Error::Config(format!("{} needs {mode:?} feature vectors", self.params.variant)))
    }

    fn pet<'a>(&self, r: &'a RelationTrees<T>) -> Result<&'a KeyedTree> {
        r.pet.as_ref().ok_or_else(|| {
            Error::Config(format!("{} needs constituency trees (path-enclosed trees)", self.params.variant))
        })
    }

    pub fn evaluate(&self, a: &RelationTrees<T>, b: &RelationTrees<T>) -> Result<T> {
        let kp = self.params.vec.evaluate(self.vector(a)?, self.vector(b)?)?;
        let kpt = self.pt.evaluate(&a.lct, &b.lct)?;
        let square = (kp + kpt) * (kp + kpt);
        if !self.params.variant.uses_constituency() {
            return Ok(square);
        }
        let ksst = self.sst.evaluate(self.pet(a)?, self.pet(b)?)?;
        let alpha = T::of(self.params.alpha);
        Ok(alpha * ksst + (T::one() - alpha) * square)
    }
}

/// Serializable description of a complete instance kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    SoftmaxPair(PairKernelParams),
    Composite(CompositeParams),
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::SoftmaxPair(p) => p.validate(),
            KernelSpec::Composite(p) => p.validate(),
        }
    }

    /// The SPTK parameters inside this spec, if any.
    pub fn sptk(&self) -> Option<&TreeKernelParams> {
        let p = match self {
            KernelSpec::SoftmaxPair(p) => &p.base,
            KernelSpec::Composite(p) => &p.pt,
        };
        (p.kind == TreeKernelKind::Sptk).then_some(p)
    }
}
