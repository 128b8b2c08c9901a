//! Tree kernel engine.
//!
//! `K(T1, T2)` sums `Δ(n1, n2)` over all node pairs. `Δ` is filled bottom-up
//! into a dense table indexed by preorder ordinals, so each node pair is
//! evaluated once per kernel call:
//!
//! * SST: `Δ = 0` when the productions differ, `λ` when the children are
//!   all leaves, else `λ · ∏ (1 + Δ(c1_i, c2_i))`.
//! * PTK: `Δ = 0` when the labels differ, else
//!   `μ · (λ² + Σ λ^(d(J1)+d(J2)) · ∏ Δ(c1_J1i, c2_J2i))` over equal-length
//!   ordered child subsequences, `d` being the subsequence extent.
//! * SPTK: PTK with the label gate replaced by a factor `σ(n1, n2)`.

mod oracle;
mod vector;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexsim::SigmaConfig;
use crate::scalar::Scalar;
use crate::treeform::{LabeledTree, NodeKind};

pub use oracle::{all_trees, brute_force_kernel, ORACLE_MAX_NODES};
pub use vector::{normalized_poly_kernel, poly_kernel, PolyParams};

pub const DEFAULT_LAMBDA: f64 = 0.4;
pub const DEFAULT_MU: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKernelKind {
    Sst,
    Ptk,
    Sptk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeKernelParams {
    pub kind: TreeKernelKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub sigma: Option<SigmaConfig>,
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

fn default_true() -> bool {
    true
}

impl TreeKernelParams {
    pub fn new(kind: TreeKernelKind) -> Self {
        TreeKernelParams {
            kind,
            lambda: DEFAULT_LAMBDA,
            mu: DEFAULT_MU,
            sigma: (kind == TreeKernelKind::Sptk).then(SigmaConfig::default),
            normalize: true,
        }
    }

    pub fn sst() -> Self {
        Self::new(TreeKernelKind::Sst)
    }

    pub fn ptk() -> Self {
        Self::new(TreeKernelKind::Ptk)
    }

    pub fn sptk() -> Self {
        Self::new(TreeKernelKind::Sptk)
    }

    pub fn with_decay(mut self, lambda: f64, mu: f64) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!("lambda must lie in (0,1], got {}", self.lambda)));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::Config(format!("mu must lie in (0,1], got {}", self.mu)));
        }
        if self.kind == TreeKernelKind::Sptk && self.sigma.is_none() {
            return Err(Error::Config("sptk requires a sigma configuration".into()));
        }
        Ok(())
    }
}

/// Borrowed view of one node, as seen by a [`NodeSimilarity`].
#[derive(Debug, Clone, Copy)]
pub struct NodeRef<'a> {
    pub label: &'a str,
    pub kind: NodeKind,
    pub pos: Option<&'a str>,
    pub lang: &'a str,
}

/// Node similarity `σ` used by the smoothed partial tree kernel.
pub trait NodeSimilarity<T: Scalar>: Send + Sync {
    fn similarity(&self, a: NodeRef<'_>, b: NodeRef<'_>) -> T;

    /// Fills `out` (row-major, `a.len() × b.len()`) with `σ` for every node
    /// pair. Implementations may resolve per-node data once here.
    fn similarity_matrix(&self, a: &PreparedTree, b: &PreparedTree, out: &mut [T]) {
        let cols = b.len();
        for i in 0..a.len() {
            let ni = a.node(i);
            for j in 0..cols {
                out[i * cols + j] = self.similarity(ni, b.node(j));
            }
        }
    }
}

/// `σ = 1` on identical labels, else 0. With it SPTK computes PTK.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactLabel;

impl<T: Scalar> NodeSimilarity<T> for ExactLabel {
    fn similarity(&self, a: NodeRef<'_>, b: NodeRef<'_>) -> T {
        if a.label == b.label {
            T::one()
        } else {
            T::zero()
        }
    }

    fn similarity_matrix(&self, a: &PreparedTree, b: &PreparedTree, out: &mut [T]) {
        let cols = b.len();
        for i in 0..a.len() {
            for j in 0..cols {
                out[i * cols + j] = if a.same_label(i, b, j) { T::one() } else { T::zero() };
            }
        }
    }
}

/// A tree flattened into preorder arrays for repeated kernel evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedTree {
    labels: Vec<String>,
    kinds: Vec<NodeKind>,
    pos: Vec<Option<String>>,
    label_hash: Vec<u64>,
    production_hash: Vec<u64>,
    children: Vec<Vec<usize>>,
    lang: String,
}

fn hash_str(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

impl PreparedTree {
    pub fn new(tree: &LabeledTree) -> Self {
        let mut out = PreparedTree {
            labels: Vec::new(),
            kinds: Vec::new(),
            pos: Vec::new(),
            label_hash: Vec::new(),
            production_hash: Vec::new(),
            children: Vec::new(),
            lang: String::new(),
        };
        out.visit(tree);
        out.production_hash = (0..out.labels.len())
            .map(|i| {
                let mut h = DefaultHasher::new();
                out.label_hash[i].hash(&mut h);
                for &c in &out.children[i] {
                    out.label_hash[c].hash(&mut h);
                }
                h.finish()
            })
            .collect();
        out
    }

    fn visit(&mut self, node: &LabeledTree) -> usize {
        let idx = self.labels.len();
        self.labels.push(node.label.clone());
        self.kinds.push(node.kind);
        self.pos.push(node.pos_tag.clone());
        self.label_hash.push(hash_str(&node.label));
        self.children.push(Vec::new());
        for c in &node.children {
            let ci = self.visit(c);
            self.children[idx].push(ci);
        }
        idx
    }

    /// Rebuilds the tree this was prepared from.
    pub fn to_labeled(&self) -> LabeledTree {
        self.rebuild(0)
    }

    fn rebuild(&self, i: usize) -> LabeledTree {
        LabeledTree {
            label: self.labels[i].clone(),
            kind: self.kinds[i],
            pos_tag: self.pos[i].clone(),
            children: self.children[i].iter().map(|&c| self.rebuild(c)).collect(),
        }
    }

    pub fn with_lang(mut self, lang: impl Into<String>) -> Self {
        self.lang = lang.into();
        self
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn node(&self, i: usize) -> NodeRef<'_> {
        NodeRef {
            label: &self.labels[i],
            kind: self.kinds[i],
            pos: self.pos[i].as_deref(),
            lang: &self.lang,
        }
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    fn same_label(&self, i: usize, other: &PreparedTree, j: usize) -> bool {
        self.label_hash[i] == other.label_hash[j] && self.labels[i] == other.labels[j]
    }

    fn same_production(&self, i: usize, other: &PreparedTree, j: usize) -> bool {
        self.production_hash[i] == other.production_hash[j]
            && self.same_label(i, other, j)
            && self.children[i].len() == other.children[j].len()
            && self.children[i]
                .iter()
                .zip(&other.children[j])
                .all(|(&a, &b)| self.same_label(a, other, b))
    }

    fn is_leaf(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }
}

impl From<&LabeledTree> for PreparedTree {
    fn from(tree: &LabeledTree) -> Self {
        PreparedTree::new(tree)
    }
}

/// Dense `|N1| × |N2|` table of `Δ` values for one tree pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> DeltaMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// A configured tree kernel, optionally bound to a node similarity.
#[derive(Clone, Copy)]
pub struct TreeKernel<'s, T: Scalar> {
    params: &'s TreeKernelParams,
    similarity: Option<&'s dyn NodeSimilarity<T>>,
}

impl<'s, T: Scalar> TreeKernel<'s, T> {
    pub fn new(params: &'s TreeKernelParams) -> Result<Self> {
        params.validate()?;
        Ok(TreeKernel {
            params,
            similarity: None,
        })
    }

    pub fn with_similarity(mut self, similarity: &'s dyn NodeSimilarity<T>) -> Self {
        self.similarity = Some(similarity);
        self
    }

    pub fn params(&self) -> &TreeKernelParams {
        self.params
    }

    pub fn delta_matrix(&self, a: &PreparedTree, b: &PreparedTree) -> Result<DeltaMatrix<T>> {
        let data = match self.params.kind {
            TreeKernelKind::Sst => self.sst_deltas(a, b)?,
            TreeKernelKind::Ptk => {
                let mut gate = vec![T::zero(); a.len() * b.len()];
                ExactLabel.similarity_matrix(a, b, &mut gate);
                self.partial_deltas(a, b, &gate)?
            }
            TreeKernelKind::Sptk => {
                let sim = self.similarity.ok_or_else(|| {
                    Error::Config("sptk evaluation requires a node similarity".into())
                })?;
                let mut gate = vec![T::zero(); a.len() * b.len()];
                sim.similarity_matrix(a, b, &mut gate);
                self.partial_deltas(a, b, &gate)?
            }
        };
        Ok(DeltaMatrix {
            rows: a.len(),
            cols: b.len(),
            data,
        })
    }

    /// Unnormalized kernel value.
    pub fn raw(&self, a: &PreparedTree, b: &PreparedTree) -> Result<T> {
        let k = self.delta_matrix(a, b)?.sum();
        if !k.is_finite() {
            return Err(overflow());
        }
        Ok(k)
    }

    /// Kernel value, normalized when the parameters ask for it.
    pub fn evaluate(&self, a: &PreparedTree, b: &PreparedTree) -> Result<T> {
        let k = self.raw(a, b)?;
        if !self.params.normalize {
            return Ok(k);
        }
        let kaa = self.raw(a, a)?;
        let kbb = self.raw(b, b)?;
        Ok(normalize(k, kaa, kbb))
    }

    /// Like [`TreeKernel::evaluate`] with precomputed self-kernels.
    pub fn evaluate_with_norms(&self, a: &PreparedTree, b: &PreparedTree, kaa: T, kbb: T) -> Result<T> {
        let k = self.raw(a, b)?;
        Ok(if self.params.normalize {
            normalize(k, kaa, kbb)
        } else {
            k
        })
    }

    fn sst_deltas(&self, a: &PreparedTree, b: &PreparedTree) -> Result<Vec<T>> {
        let (n1, n2) = (a.len(), b.len());
        let lambda = T::of(self.params.lambda);
        let mut delta = vec![T::zero(); n1 * n2];
        for i in (0..n1).rev() {
            for j in (0..n2).rev() {
                if !a.same_production(i, b, j) {
                    continue;
                }
                let mut value = lambda;
                for (&c1, &c2) in a.children(i).iter().zip(b.children(j)) {
                    if !(a.is_leaf(c1) && b.is_leaf(c2)) {
                        value *= T::one() + delta[c1 * n2 + c2];
                    }
                }
                if !value.is_finite() {
                    return Err(overflow());
                }
                delta[i * n2 + j] = value;
            }
        }
        Ok(delta)
    }

    fn partial_deltas(&self, a: &PreparedTree, b: &PreparedTree, gate: &[T]) -> Result<Vec<T>> {
        let (n1, n2) = (a.len(), b.len());
        let lambda = T::of(self.params.lambda);
        let mu = T::of(self.params.mu);
        let lambda2 = lambda * lambda;
        let mut delta = vec![T::zero(); n1 * n2];
        let mut scratch = SubsequenceScratch::default();
        for i in (0..n1).rev() {
            for j in (0..n2).rev() {
                let g = gate[i * n2 + j];
                if g == T::zero() {
                    continue;
                }
                let mut inner = lambda2;
                let (ch1, ch2) = (a.children(i), b.children(j));
                if !ch1.is_empty() && !ch2.is_empty() {
                    inner += scratch.sum(ch1, ch2, &delta, n2, lambda);
                }
                let value = mu * g * inner;
                if !value.is_finite() {
                    return Err(overflow());
                }
                delta[i * n2 + j] = value;
            }
        }
        Ok(delta)
    }
}

/// Buffers for the child-subsequence recursion, reused across node pairs.
#[derive(Default)]
struct SubsequenceScratch<T> {
    d: Vec<T>,
    k: Vec<T>,
    s: Vec<T>,
    row: Vec<T>,
}

impl<T: Scalar> SubsequenceScratch<T> {
    /// `Σ_p Σ_{J1,J2 : |J1|=|J2|=p} λ^(d(J1)+d(J2)) ∏ Δ(c1_J1i, c2_J2i)`.
    ///
    /// `K_p(k,l)` sums subsequence pairs of length `p` ending exactly at
    /// children `k` and `l`; `S_p(k,l)` accumulates `K_p` over the prefixes
    /// with decay `λ` per skipped position, so that
    /// `K_p(k,l) = Δ(k,l) · λ² · S_(p-1)(k-1,l-1)`.
    fn sum(&mut self, ch1: &[usize], ch2: &[usize], delta: &[T], n2: usize, lambda: T) -> T {
        let (a, b) = (ch1.len(), ch2.len());
        let w = b + 1;
        let lambda2 = lambda * lambda;
        self.d.clear();
        self.d.resize((a + 1) * w, T::zero());
        let mut any = false;
        for (k, &c1) in ch1.iter().enumerate() {
            for (l, &c2) in ch2.iter().enumerate() {
                let v = delta[c1 * n2 + c2];
                any |= v != T::zero();
                self.d[(k + 1) * w + l + 1] = v;
            }
        }
        if !any {
            return T::zero();
        }
        self.k.clear();
        self.k.resize((a + 1) * w, T::zero());
        self.s.clear();
        self.s.resize((a + 1) * w, T::zero());
        self.row.clear();
        self.row.resize(w, T::zero());

        let mut total = T::zero();
        for k in 1..=a {
            for l in 1..=b {
                let v = lambda2 * self.d[k * w + l];
                self.k[k * w + l] = v;
                total += v;
            }
        }
        for _p in 2..=a.min(b) {
            self.accumulate(a, b, lambda);
            let mut nonzero = false;
            for k in 1..=a {
                for l in 1..=b {
                    let v = self.d[k * w + l] * lambda2 * self.s[(k - 1) * w + (l - 1)];
                    self.k[k * w + l] = v;
                    nonzero |= v != T::zero();
                    total += v;
                }
            }
            if !nonzero {
                break;
            }
        }
        total
    }

    /// `S(k,l) = P(k,l) + λ S(k-1,l)` with `P(k,l) = K(k,l) + λ P(k,l-1)`.
    fn accumulate(&mut self, a: usize, b: usize, lambda: T) {
        let w = b + 1;
        for l in 0..=b {
            self.s[l] = T::zero();
        }
        for k in 1..=a {
            self.row[0] = T::zero();
            self.s[k * w] = T::zero();
            for l in 1..=b {
                self.row[l] = self.k[k * w + l] + lambda * self.row[l - 1];
                self.s[k * w + l] = self.row[l] + lambda * self.s[(k - 1) * w + l];
            }
        }
    }
}

fn overflow() -> Error {
    Error::Numeric(
        "tree kernel overflowed; use smaller lambda/mu or enable normalization".into(),
    )
}

/// `k / sqrt(kaa · kbb)`, or 0 when either self-kernel vanishes.
pub fn normalize<T: Scalar>(k: T, kaa: T, kbb: T) -> T {
    if kaa <= T::zero() || kbb <= T::zero() {
        T::zero()
    } else {
        k / (kaa * kbb).sqrt()
    }
}

/// Evaluates an SST or PTK kernel on two trees.
///
/// SPTK needs a node similarity; use [`TreeKernel::with_similarity`].
pub fn tree_kernel<T: Scalar>(t1: &LabeledTree, t2: &LabeledTree, p: &TreeKernelParams) -> Result<T> {
    TreeKernel::new(p)?.evaluate(&PreparedTree::new(t1), &PreparedTree::new(t2))
}
