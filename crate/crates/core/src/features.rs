//! Relation and paraphrase instances, and the feature vectors built from
//! them: surface-window `V_o`, dependency-based `V_ud` and the entity vector.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::combine::{CompositeParams, KeyedTree, PairTrees, RelationTrees, RelationVectors};
use crate::error::{Error, Result};
use crate::lexsim::{LexicalMode, Lexicon};
use crate::scalar::Scalar;
use crate::treebank::{parse_conllu_named, DepTree};
use crate::treeform::{
    collapse_mwe, const_to_labeled, dependents, extract_pet, parse_bracketed, shortest_path, to_lct,
    ConstTree, MweConfig, MweScope,
};

/// One relation example: a parsed sentence with two marked entities.
#[derive(Debug, Clone, PartialEq)]
pub struct REInstance {
    pub dep_tree: DepTree,
    pub const_tree: Option<ConstTree>,
    /// Entity head token ids.
    pub e1: usize,
    pub e2: usize,
    /// Inclusive token-id spans of the entity mentions.
    pub e1_span: (usize, usize),
    pub e2_span: (usize, usize),
    pub label: String,
    pub lang: String,
}

impl REInstance {
    pub fn id(&self) -> &str {
        &self.dep_tree.sent_id
    }

    pub fn validate(&self) -> Result<()> {
        self.dep_tree.ensure_valid()?;
        let bad = |msg: String| Error::InvalidTree {
            sent_id: self.dep_tree.sent_id.clone(),
            report: msg,
        };
        if self.e1 == self.e2 {
            return Err(bad("e1 and e2 are the same token".into()));
        }
        for (e, (s, t)) in [(self.e1, self.e1_span), (self.e2, self.e2_span)] {
            if s > t || !self.dep_tree.contains(s) || !self.dep_tree.contains(t) || !(s..=t).contains(&e) {
                return Err(bad(format!("entity head {e} outside span ({s},{t})")));
            }
        }
        let (a, b) = (self.e1_span, self.e2_span);
        if a.0 <= b.1 && b.0 <= a.1 {
            return Err(bad("entity spans overlap".into()));
        }
        Ok(())
    }
}

/// One sentence pair labeled paraphrase or not.
#[derive(Debug, Clone, PartialEq)]
pub struct PIInstance {
    pub id: String,
    pub tree_a: DepTree,
    pub tree_b: DepTree,
    pub label: bool,
    pub lang_a: String,
    pub lang_b: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityEmbedding {
    /// Mean over the mention's tokens.
    #[default]
    Span,
    Head,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordField {
    #[default]
    Lemma,
    Form,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub window: usize,
    pub exclude_punct: bool,
    /// Merge multiword expressions before building `V_ud` and the
    /// dependency tree used by the tree kernel.
    pub collapse_mwe: bool,
    pub mwe: MweConfig,
    pub mode: LexicalMode,
    pub lowercase: bool,
    pub entity_embedding: EntityEmbedding,
    pub word_field: WordField,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window: 3,
            exclude_punct: true,
            collapse_mwe: true,
            mwe: MweConfig::default(),
            mode: LexicalMode::default(),
            lowercase: true,
            entity_embedding: EntityEmbedding::default(),
            word_field: WordField::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("features.window must be at least 1".into()));
        }
        self.mwe.validate()
    }
}

struct Ctx<'a, T> {
    lexicon: &'a Lexicon<T>,
    cfg: &'a FeatureConfig,
    lang: &'a str,
    dim: usize,
}

impl<T: Scalar> Ctx<'_, T> {
    fn new<'a>(lexicon: &'a Lexicon<T>, cfg: &'a FeatureConfig, lang: &'a str) -> Result<Ctx<'a, T>> {
        cfg.validate()?;
        let dim = lexicon
            .dim()
            .ok_or_else(|| Error::Config("feature vectors need embeddings".into()))?;
        Ok(Ctx { lexicon, cfg, lang, dim })
    }

    fn word<'t>(&self, tree: &'t DepTree, id: usize) -> Result<&'t str> {
        let t = tree.token(id)?;
        Ok(match self.cfg.word_field {
            WordField::Lemma => t.lemma_or_form(),
            WordField::Form => &t.form,
        })
    }

    fn eligible(&self, tree: &DepTree, id: usize) -> Result<bool> {
        Ok(!(self.cfg.exclude_punct && tree.token(id)?.is_punct()))
    }

    /// Mean vector of the given tokens; OOV words count as zero vectors.
    ///
    /// Words are summed in sorted order so the result does not depend on
    /// where they sit in the sentence.
    fn mean(&self, tree: &DepTree, ids: &[usize]) -> Result<Vec<T>> {
        let mut words: Vec<&str> = ids.iter().map(|&i| self.word(tree, i)).collect::<Result<_>>()?;
        words.sort_unstable();
        let mut out = vec![T::zero(); self.dim];
        if words.is_empty() {
            return Ok(out);
        }
        for w in &words {
            if let Some(v) = self.lexicon.vector(w, self.lang, self.cfg.mode, self.cfg.lowercase) {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += x;
                }
            }
        }
        let n = T::of_usize(words.len());
        out.iter_mut().for_each(|o| *o /= n);
        Ok(out)
    }

    fn entity(&self, tree: &DepTree, head: usize, span: &[usize]) -> Result<Vec<T>> {
        match self.cfg.entity_embedding {
            EntityEmbedding::Head => self.mean(tree, &[head]),
            EntityEmbedding::Span => self.mean(tree, span),
        }
    }

    fn filter(&self, tree: &DepTree, ids: impl IntoIterator<Item = usize>) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in ids {
            if self.eligible(tree, i)? {
                out.push(i);
            }
        }
        Ok(out)
    }
}

fn span_ids((s, e): (usize, usize)) -> Vec<usize> {
    (s..=e).collect()
}

/// `[e1; e2; between; window before e1; window after e2]`, each block of
/// the embedding dimension.
pub fn build_vo<T: Scalar>(inst: &REInstance, lexicon: &Lexicon<T>, cfg: &FeatureConfig) -> Result<Vec<T>> {
    inst.validate()?;
    let ctx = Ctx::new(lexicon, cfg, &inst.lang)?;
    let tree = &inst.dep_tree;
    let in_spans = |i: usize| {
        (inst.e1_span.0..=inst.e1_span.1).contains(&i) || (inst.e2_span.0..=inst.e2_span.1).contains(&i)
    };

    let (lo, hi) = (inst.e1.min(inst.e2), inst.e1.max(inst.e2));
    let between = ctx.filter(tree, (lo + 1..hi).filter(|&i| !in_spans(i)))?;

    let mut before = Vec::new();
    for i in (1..inst.e1_span.0).rev() {
        if before.len() == cfg.window {
            break;
        }
        if !in_spans(i) && ctx.eligible(tree, i)? {
            before.push(i);
        }
    }
    let mut after = Vec::new();
    for i in inst.e2_span.1 + 1..=tree.len() {
        if after.len() == cfg.window {
            break;
        }
        if !in_spans(i) && ctx.eligible(tree, i)? {
            after.push(i);
        }
    }

    let mut out = ctx.entity(tree, inst.e1, &span_ids(inst.e1_span))?;
    out.extend(ctx.entity(tree, inst.e2, &span_ids(inst.e2_span))?);
    out.extend(ctx.mean(tree, &between)?);
    out.extend(ctx.mean(tree, &before)?);
    out.extend(ctx.mean(tree, &after)?);
    Ok(out)
}

/// An instance's dependency tree after multiword merging, with the entity
/// heads and spans mapped into it.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedView {
    pub tree: DepTree,
    pub e1: usize,
    pub e2: usize,
    pub e1_tokens: Vec<usize>,
    pub e2_tokens: Vec<usize>,
}

/// Merges multiword expressions over the entity path, the entities and
/// their dependents (or the whole tree, per `cfg.mwe.scope`).
///
/// Path and dependents are found on the original tree. When merging would
/// fuse the two entities the tree is left as is.
pub fn collapse_for_relation(inst: &REInstance, cfg: &FeatureConfig) -> Result<CollapsedView> {
    inst.validate()?;
    let tree = &inst.dep_tree;
    let identity = || CollapsedView {
        tree: tree.clone(),
        e1: inst.e1,
        e2: inst.e2,
        e1_tokens: span_ids(inst.e1_span),
        e2_tokens: span_ids(inst.e2_span),
    };
    if !cfg.collapse_mwe {
        return Ok(identity());
    }
    let targets: BTreeSet<usize> = match cfg.mwe.scope {
        MweScope::WholeTree => tree.tokens().iter().map(|t| t.id).collect(),
        MweScope::SdpAndDependents => {
            let mut t: BTreeSet<usize> = shortest_path(tree, inst.e1, inst.e2)?.into_iter().collect();
            t.extend(dependents(tree, inst.e1)?);
            t.extend(dependents(tree, inst.e2)?);
            t.insert(inst.e1);
            t.insert(inst.e2);
            t
        }
    };
    let (collapsed, map) = collapse_mwe(tree, &cfg.mwe, &targets)?;
    if map[inst.e1] == map[inst.e2] {
        return Ok(identity());
    }
    let remap = |span: (usize, usize)| -> Vec<usize> {
        let set: BTreeSet<usize> = (span.0..=span.1).map(|i| map[i]).collect();
        set.into_iter().collect()
    };
    Ok(CollapsedView {
        tree: collapsed,
        e1: map[inst.e1],
        e2: map[inst.e2],
        e1_tokens: remap(inst.e1_span),
        e2_tokens: remap(inst.e2_span),
    })
}

/// `[e1; e2; path interior; dependents of e1; dependents of e2]` over the
/// merged tree. Entity tokens never enter the last three blocks.
pub fn build_vud<T: Scalar>(inst: &REInstance, lexicon: &Lexicon<T>, cfg: &FeatureConfig) -> Result<Vec<T>> {
    let ctx = Ctx::new(lexicon, cfg, &inst.lang)?;
    let v = collapse_for_relation(inst, cfg)?;
    let tree = &v.tree;
    let is_entity = |i: &usize| v.e1_tokens.contains(i) || v.e2_tokens.contains(i);

    let path = ctx.filter(tree, shortest_path(tree, v.e1, v.e2)?.into_iter().filter(|i| !is_entity(i)))?;
    let deps1 = ctx.filter(tree, dependents(tree, v.e1)?.into_iter().filter(|i| !is_entity(i)))?;
    let deps2 = ctx.filter(tree, dependents(tree, v.e2)?.into_iter().filter(|i| !is_entity(i)))?;

    let mut out = ctx.entity(tree, v.e1, &v.e1_tokens)?;
    out.extend(ctx.entity(tree, v.e2, &v.e2_tokens)?);
    out.extend(ctx.mean(tree, &path)?);
    out.extend(ctx.mean(tree, &deps1)?);
    out.extend(ctx.mean(tree, &deps2)?);
    Ok(out)
}

pub const NONE_CATEGORY: &str = "none";

/// Category inventories for the one-hot parts of the entity vector,
/// collected from training data. Index 0 of the type inventories is
/// always `none`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityVocab {
    pub entity_types: Vec<String>,
    pub mention_types: Vec<String>,
    pub upos: Vec<String>,
}

impl Default for EntityVocab {
    fn default() -> Self {
        EntityVocab {
            entity_types: vec![NONE_CATEGORY.into()],
            mention_types: vec![NONE_CATEGORY.into()],
            upos: Vec::new(),
        }
    }
}

fn entity_type(inst: &REInstance, head: usize) -> String {
    category(inst, head, "EntityType")
}

fn mention_type(inst: &REInstance, head: usize) -> String {
    category(inst, head, "MentionType")
}

fn category(inst: &REInstance, head: usize, key: &str) -> String {
    inst.dep_tree
        .token(head)
        .ok()
        .and_then(|t| t.misc.get(key))
        .unwrap_or(NONE_CATEGORY)
        .to_string()
}

impl EntityVocab {
    pub fn collect<'a>(instances: impl IntoIterator<Item = &'a REInstance>) -> Self {
        let mut types = BTreeSet::new();
        let mut mentions = BTreeSet::new();
        let mut upos = BTreeSet::new();
        for inst in instances {
            for e in [inst.e1, inst.e2] {
                types.insert(entity_type(inst, e));
                mentions.insert(mention_type(inst, e));
                if let Ok(t) = inst.dep_tree.token(e) {
                    upos.insert(t.upos.clone());
                }
            }
        }
        let with_none = |set: BTreeSet<String>| {
            let mut v = vec![NONE_CATEGORY.to_string()];
            v.extend(set.into_iter().filter(|s| s != NONE_CATEGORY));
            v
        };
        EntityVocab {
            entity_types: with_none(types),
            mention_types: with_none(mentions),
            upos: upos.into_iter().collect(),
        }
    }

    /// Length of the vector for embedding dimension `dim`.
    pub fn width(&self, dim: usize) -> usize {
        2 * (self.entity_types.len() + self.mention_types.len() + dim + self.upos.len())
    }
}

fn one_hot<T: Scalar>(inventory: &[String], value: &str, out: &mut Vec<T>) {
    out.extend(inventory.iter().map(|c| if c == value { T::one() } else { T::zero() }));
}

/// Per entity: one-hot entity type, one-hot mention type, head word
/// embedding, one-hot UPOS. Unseen categories give an all-zero block.
pub fn build_entity_features<T: Scalar>(
    inst: &REInstance,
    vocab: &EntityVocab,
    lexicon: &Lexicon<T>,
    cfg: &FeatureConfig,
) -> Result<Vec<T>> {
    inst.validate()?;
    let ctx = Ctx::new(lexicon, cfg, &inst.lang)?;
    let mut out = Vec::with_capacity(vocab.width(ctx.dim));
    for e in [inst.e1, inst.e2] {
        one_hot(&vocab.entity_types, &entity_type(inst, e), &mut out);
        one_hot(&vocab.mention_types, &mention_type(inst, e), &mut out);
        out.extend(ctx.mean(&inst.dep_tree, &[e])?);
        one_hot(&vocab.upos, &inst.dep_tree.token(e)?.upos, &mut out);
    }
    Ok(out)
}

/// Kernel-side representation of a relation instance for `params`.
///
/// Only the pieces the variant consumes are built; in particular the
/// constituency tree is never touched when the variant does not use it.
pub fn relation_trees<T: Scalar>(
    inst: &REInstance,
    params: &CompositeParams,
    lexicon: &Lexicon<T>,
    vocab: Option<&EntityVocab>,
    cfg: &FeatureConfig,
) -> Result<RelationTrees<T>> {
    use crate::combine::FeatureMode;
    inst.validate()?;
    let pet = if params.variant.uses_constituency() {
        let ct = inst.const_tree.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "{} needs a constituency tree for sentence {}",
                params.variant,
                inst.id()
            ))
        })?;
        let pet = extract_pet(ct, inst.e1_span, inst.e2_span)?;
        Some(KeyedTree::new(&const_to_labeled(&pet), inst.lang.clone()))
    } else {
        None
    };
    let dep = collapse_for_relation(inst, cfg)?;
    let lct = KeyedTree::new(&to_lct(&dep.tree)?, inst.lang.clone());
    let mut vectors = RelationVectors::default();
    match params.feature_mode {
        FeatureMode::Vo => vectors.vo = Some(build_vo(inst, lexicon, cfg)?),
        FeatureMode::Vud => vectors.vud = Some(build_vud(inst, lexicon, cfg)?),
        FeatureMode::Entity => {
            let vocab = vocab.ok_or_else(|| Error::Config("entity features need a vocabulary".into()))?;
            vectors.entity = Some(build_entity_features(inst, vocab, lexicon, cfg)?);
        }
    }
    Ok(RelationTrees { pet, lct, vectors })
}

/// Kernel-side representation of a sentence pair.
pub fn pair_trees(inst: &PIInstance) -> Result<PairTrees> {
    Ok(PairTrees {
        a: KeyedTree::new(&to_lct(&inst.tree_a)?, inst.lang_a.clone()),
        b: KeyedTree::new(&to_lct(&inst.tree_b)?, inst.lang_b.clone()),
    })
}

fn format_err(sent_id: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidTree {
        sent_id: sent_id.to_string(),
        report: msg.to_string(),
    }
}

/// Span and head of the tokens whose MISC carries `Entity=<mark>`.
fn entity_mention(tree: &DepTree, mark: &str) -> Result<((usize, usize), usize)> {
    let ids: Vec<usize> = tree
        .tokens()
        .iter()
        .filter(|t| t.misc.get_all("Entity").any(|v| v == mark))
        .map(|t| t.id)
        .collect();
    let (&first, &last) = match (ids.first(), ids.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(format_err(&tree.sent_id, format!("no token marked Entity={mark}"))),
    };
    if last - first + 1 != ids.len() {
        return Err(format_err(&tree.sent_id, format!("Entity={mark} tokens are not contiguous")));
    }
    // The head is the span token attached outside the span; the shallowest
    // one wins if there are several.
    let mut best: Option<(usize, usize)> = None;
    for &i in &ids {
        let h = tree.token(i)?.head;
        if !(first..=last).contains(&h) {
            let d = tree.depth(i)?;
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
    }
    let (_, head) = best.ok_or_else(|| format_err(&tree.sent_id, format!("Entity={mark} has no head")))?;
    Ok(((first, last), head))
}

/// Reads relation instances from CoNLL-U carrying `# relation = <label>`
/// and `Entity=e1` / `Entity=e2` token annotations. Constituency trees, when
/// given, align with the sentences by order.
pub fn read_re_dataset(
    conllu: &str,
    constituency: Option<&str>,
    lang: &str,
    source: &str,
) -> Result<Vec<REInstance>> {
    let trees = parse_conllu_named(conllu, source)?;
    let consts = match constituency {
        Some(text) => {
            let c = parse_bracketed(text)?;
            if c.len() != trees.len() {
                return Err(Error::Config(format!(
                    "{source}: {} dependency trees but {} constituency trees",
                    trees.len(),
                    c.len()
                )));
            }
            c.into_iter().map(Some).collect()
        }
        None => vec![None; trees.len()],
    };
    let mut out = Vec::with_capacity(trees.len());
    for (tree, ct) in trees.into_iter().zip(consts) {
        tree.ensure_valid()?;
        let label = tree
            .meta("relation")
            .ok_or_else(|| format_err(&tree.sent_id, "missing `# relation = ...` comment"))?
            .to_string();
        let (e1_span, e1) = entity_mention(&tree, "e1")?;
        let (e2_span, e2) = entity_mention(&tree, "e2")?;
        if let Some(ct) = &ct {
            if ct.span.1 != tree.len() {
                return Err(format_err(
                    &tree.sent_id,
                    format!("constituency tree has {} leaves, sentence has {} tokens", ct.span.1, tree.len()),
                ));
            }
        }
        let inst = REInstance {
            dep_tree: tree,
            const_tree: ct,
            e1,
            e2,
            e1_span,
            e2_span,
            label,
            lang: lang.to_string(),
        };
        inst.validate()?;
        out.push(inst);
    }
    Ok(out)
}

fn parse_bool_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "+1" => Some(true),
        "0" | "false" | "no" | "-1" => Some(false),
        _ => None,
    }
}

/// Reads `label<TAB>sent_id_a<TAB>sent_id_b` lines against the sentences
/// of one or two treebanks.
pub fn read_pi_dataset(
    pairs: &str,
    trees_a: &[DepTree],
    lang_a: &str,
    trees_b: &[DepTree],
    lang_b: &str,
) -> Result<Vec<PIInstance>> {
    let index = |trees: &[DepTree]| -> HashMap<String, usize> {
        trees.iter().enumerate().map(|(i, t)| (t.sent_id.clone(), i)).collect()
    };
    let (ia, ib) = (index(trees_a), index(trees_b));
    let mut out = Vec::new();
    for (n, line) in pairs.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Format {
                line: line_no,
                msg: "expected label<TAB>sent_id_a<TAB>sent_id_b".into(),
            });
        }
        let label = parse_bool_label(cols[0]).ok_or_else(|| Error::Format {
            line: line_no,
            msg: format!("bad pair label {:?}", cols[0]),
        })?;
        let find = |idx: &HashMap<String, usize>, trees: &[DepTree], id: &str| -> Result<DepTree> {
            idx.get(id).map(|&i| trees[i].clone()).ok_or_else(|| Error::Format {
                line: line_no,
                msg: format!("unknown sentence id {id:?}"),
            })
        };
        let tree_a = find(&ia, trees_a, cols[1].trim())?;
        let tree_b = find(&ib, trees_b, cols[2].trim())?;
        tree_a.ensure_valid()?;
        tree_b.ensure_valid()?;
        out.push(PIInstance {
            id: format!("{}/{}", tree_a.sent_id, tree_b.sent_id),
            tree_a,
            tree_b,
            label,
            lang_a: lang_a.to_string(),
            lang_b: lang_b.to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::CkVariant;
    use crate::lexsim::{BilingualDictionary, EmbeddingStore};
    use crate::treebank::Token;

    /// The most common audits were about waste and recycling .
    fn audits_waste() -> DepTree {
        DepTree::new(
            "audits-waste",
            vec![
                Token::new(1, "The", "the", "DET", 4, "det"),
                Token::new(2, "most", "most", "ADV", 3, "advmod"),
                Token::new(3, "common", "common", "ADJ", 4, "amod"),
                Token::new(4, "audits", "audit", "NOUN", 7, "nsubj"),
                Token::new(5, "were", "be", "AUX", 7, "cop"),
                Token::new(6, "about", "about", "ADP", 7, "case"),
                Token::new(7, "waste", "waste", "NOUN", 0, "root"),
                Token::new(8, "and", "and", "CCONJ", 9, "cc"),
                Token::new(9, "recycling", "recycling", "NOUN", 7, "conj"),
                Token::new(10, ".", ".", "PUNCT", 7, "punct"),
            ],
        )
    }

    fn inst(tree: DepTree, e1: usize, e2: usize) -> REInstance {
        REInstance {
            dep_tree: tree,
            const_tree: None,
            e1,
            e2,
            e1_span: (e1, e1),
            e2_span: (e2, e2),
            label: "Message-Topic(e1,e2)".into(),
            lang: "en".into(),
        }
    }

    /// One-hot word vectors: every word gets its own axis.
    fn one_hot_lexicon(words: &[&str]) -> Lexicon<f64> {
        let mut s = EmbeddingStore::new("en", words.len()).unwrap();
        for (i, w) in words.iter().enumerate() {
            let mut v = vec![0.0; words.len()];
            v[i] = 1.0;
            s.insert(*w, &v).unwrap();
        }
        Lexicon::new("en").with_store(s).unwrap()
    }

    const WORDS: [&str; 9] = ["the", "most", "common", "audit", "be", "about", "waste", "and", "recycling"];

    fn block(v: &[f64], b: usize, d: usize) -> &[f64] {
        &v[b * d..(b + 1) * d]
    }

    fn axis(w: &str) -> usize {
        WORDS.iter().position(|x| *x == w).unwrap()
    }

    #[test]
    fn vo_on_audits_waste() {
        let lex = one_hot_lexicon(&WORDS);
        let d = WORDS.len();
        let v = build_vo(&inst(audits_waste(), 4, 7), &lex, &FeatureConfig::default()).unwrap();
        assert_eq!(v.len(), 5 * d);
        assert_eq!(block(&v, 0, d)[axis("audit")], 1.0);
        assert_eq!(block(&v, 1, d)[axis("waste")], 1.0);
        let between = block(&v, 2, d);
        assert_eq!(between[axis("be")], 0.5);
        assert_eq!(between[axis("about")], 0.5);
        assert_eq!(between.iter().sum::<f64>(), 1.0);
        // Window of three before "audits", and "and recycling" after
        // "waste" with the final period skipped.
        let before = block(&v, 3, d);
        for w in ["the", "most", "common"] {
            assert!((before[axis(w)] - 1.0 / 3.0).abs() < 1e-15);
        }
        let after = block(&v, 4, d);
        assert_eq!((after[axis("and")], after[axis("recycling")]), (0.5, 0.5));
    }

    #[test]
    fn vo_empty_blocks() {
        let lex = one_hot_lexicon(&WORDS);
        let d = WORDS.len();
        let v = build_vo(&inst(audits_waste(), 1, 3), &lex, &FeatureConfig::default()).unwrap();
        assert!(block(&v, 3, d).iter().all(|&x| x == 0.0));
        let v = build_vo(&inst(audits_waste(), 3, 4), &lex, &FeatureConfig::default()).unwrap();
        assert!(block(&v, 2, d).iter().all(|&x| x == 0.0));
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn vud_on_audits_waste() {
        let lex = one_hot_lexicon(&WORDS);
        let d = WORDS.len();
        let v = build_vud(&inst(audits_waste(), 4, 7), &lex, &FeatureConfig::default()).unwrap();
        assert_eq!(v.len(), 5 * d);
        assert!(block(&v, 2, d).iter().all(|&x| x == 0.0));
        let deps1 = block(&v, 3, d);
        assert_eq!(deps1[axis("the")], 0.5);
        assert_eq!(deps1[axis("common")], 0.5);
        // e2's dependents: were, about, recycling; e1 and the period are out.
        let deps2 = block(&v, 4, d);
        for w in ["be", "about", "recycling"] {
            assert!((deps2[axis(w)] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(deps2[axis("audit")], 0.0);
    }

    #[test]
    fn vud_leaf_entity_has_zero_dependents() {
        let lex = one_hot_lexicon(&WORDS);
        let d = WORDS.len();
        let v = build_vud(&inst(audits_waste(), 7, 9), &lex, &FeatureConfig::default()).unwrap();
        // recycling has a dependent "and"; take a true leaf instead.
        assert!(block(&v, 4, d).iter().any(|&x| x != 0.0));
        let v = build_vud(&inst(audits_waste(), 7, 6), &lex, &FeatureConfig::default()).unwrap();
        assert!(block(&v, 4, d).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn vud_merges_fixed_pair_into_one_word() {
        // "went instead of home": of is a fixed child of instead.
        let tree = DepTree::new(
            "mwe",
            vec![
                Token::new(1, "he", "he", "PRON", 2, "nsubj"),
                Token::new(2, "left", "leave", "VERB", 0, "root"),
                Token::new(3, "instead", "instead", "ADV", 5, "case"),
                Token::new(4, "of", "of", "ADP", 3, "fixed"),
                Token::new(5, "home", "home", "NOUN", 2, "obl"),
            ],
        );
        let mut s = EmbeddingStore::new("en", 3).unwrap();
        s.insert("instead of", &[0.0, 0.0, 1.0]).unwrap();
        s.insert("instead", &[1.0, 0.0, 0.0]).unwrap();
        s.insert("of", &[0.0, 1.0, 0.0]).unwrap();
        let lex = Lexicon::new("en").with_store(s).unwrap();
        let i = inst(tree, 2, 5);
        let v = build_vud(&i, &lex, &FeatureConfig::default()).unwrap();
        assert_eq!(block(&v, 4, 3), &[0.0, 0.0, 1.0]);
        let off = FeatureConfig {
            collapse_mwe: false,
            ..FeatureConfig::default()
        };
        let v = build_vud(&i, &lex, &off).unwrap();
        assert_eq!(block(&v, 4, 3), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn translated_lookup() {
        let mut s = EmbeddingStore::new("en", 2).unwrap();
        s.insert("dog", &[1.0, 0.0]).unwrap();
        let dict = BilingualDictionary::parse("chien\tdog\n", "fr", "en", true).unwrap();
        let lex = Lexicon::new("en").with_store(s).unwrap().with_dictionary(dict);
        let tree = DepTree::new(
            "fr",
            vec![
                Token::new(1, "chien", "chien", "NOUN", 2, "nsubj"),
                Token::new(2, "dort", "dormir", "VERB", 0, "root"),
            ],
        );
        let mut i = inst(tree, 1, 2);
        i.lang = "fr".into();
        let cfg = FeatureConfig {
            mode: LexicalMode::TranslateThenCompare,
            ..FeatureConfig::default()
        };
        let v = build_vud(&i, &lex, &cfg).unwrap();
        assert_eq!(&v[..2], &[1.0, 0.0]);
        assert_eq!(&v[2..4], &[0.0, 0.0]);
    }

    #[test]
    fn entity_features() {
        let lex = one_hot_lexicon(&WORDS);
        let a = inst(audits_waste(), 4, 7);
        let vocab = EntityVocab::collect([&a]);
        assert_eq!(vocab.entity_types, vec!["none"]);
        assert_eq!(vocab.upos, vec!["NOUN"]);
        let cfg = FeatureConfig::default();
        let va = build_entity_features(&a, &vocab, &lex, &cfg).unwrap();
        assert_eq!(va.len(), vocab.width(WORDS.len()));
        assert_eq!(va, build_entity_features(&a, &vocab, &lex, &cfg).unwrap());
        assert_eq!(va[0], 1.0);

        // Same instance but e1 tagged PROPN.
        let mut tokens = audits_waste().tokens().to_vec();
        tokens[3].upos = "PROPN".into();
        let b = inst(DepTree::new("audits-waste", tokens), 4, 7);
        let vocab = EntityVocab::collect([&a, &b]);
        let va = build_entity_features(&a, &vocab, &lex, &cfg).unwrap();
        let vb = build_entity_features(&b, &vocab, &lex, &cfg).unwrap();
        let diff: Vec<usize> = (0..va.len()).filter(|&i| va[i] != vb[i]).collect();
        // UPOS block of e1 sits after type (1), mention (1) and embedding.
        let start = 2 + WORDS.len();
        assert!(diff.iter().all(|&i| (start..start + vocab.upos.len()).contains(&i)));
        assert_eq!(diff.len(), 2);
    }

    const RE_DATA: &str = "# sent_id = r1
# relation = Cause-Effect(e1,e2)
1\tfire\tfire\tNOUN\t_\t_\t2\tnsubj\t_\tEntity=e1
2\tcaused\tcause\tVERB\t_\t_\t0\troot\t_\t_
3\tthick\tthick\tADJ\t_\t_\t4\tamod\t_\tEntity=e2
4\tsmoke\tsmoke\tNOUN\t_\t_\t2\tobj\t_\tEntity=e2|EntityType=SUBSTANCE

";

    #[test]
    fn read_relations() {
        let consts = "(S (NP (NN fire)) (VP (VBD caused) (NP (JJ thick) (NN smoke))))\n";
        let v = read_re_dataset(RE_DATA, Some(consts), "en", "train").unwrap();
        assert_eq!(v.len(), 1);
        let r = &v[0];
        assert_eq!((r.e1, r.e2, r.e1_span, r.e2_span), (1, 4, (1, 1), (3, 4)));
        assert_eq!(r.label, "Cause-Effect(e1,e2)");
        assert_eq!(EntityVocab::collect(&v).entity_types, vec!["none", "SUBSTANCE"]);

        let lex = one_hot_lexicon(&["fire", "cause", "thick", "smoke"]);
        let t: RelationTrees<f64> = relation_trees(
            r,
            &CompositeParams::new(CkVariant::Ck3),
            &lex,
            None,
            &FeatureConfig::default(),
        )
        .unwrap();
        assert_eq!(
            t.pet.unwrap().tree().to_labeled().to_sexpr(),
            "(S (NP (NN (fire|NN))) (VP (VBD (caused|VBD)) (NP (JJ (thick|JJ)) (NN (smoke|NN)))))"
        );
        assert_eq!(t.vectors.vud.unwrap().len(), 20);

        assert!(read_re_dataset(RE_DATA, Some(""), "en", "train").is_err());
        let no_rel = RE_DATA.replace("# relation = Cause-Effect(e1,e2)\n", "");
        assert!(read_re_dataset(&no_rel, None, "en", "train").is_err());
    }

    #[test]
    fn ck2_ignores_missing_constituency() {
        let v = read_re_dataset(RE_DATA, None, "en", "train").unwrap();
        let lex = one_hot_lexicon(&["fire", "cause", "thick", "smoke"]);
        let cfg = FeatureConfig::default();
        let t: Result<RelationTrees<f64>> =
            relation_trees(&v[0], &CompositeParams::new(CkVariant::Ck2), &lex, None, &cfg);
        assert!(t.unwrap().pet.is_none());
        let t: Result<RelationTrees<f64>> =
            relation_trees(&v[0], &CompositeParams::new(CkVariant::Ck1), &lex, None, &cfg);
        assert!(matches!(t, Err(Error::Config(_))));
    }

    #[test]
    fn read_pairs() {
        let text = "# sent_id = a\n1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n\n# sent_id = b\n1\ty\ty\tX\t_\t_\t0\troot\t_\t_\n\n";
        let trees = crate::treebank::parse_conllu(text).unwrap();
        let v = read_pi_dataset("1\ta\tb\n0\tb\ta\n", &trees, "en", &trees, "en").unwrap();
        assert_eq!(v.len(), 2);
        assert!(v[0].label && !v[1].label);
        assert_eq!(v[1].id, "b/a");
        assert!(matches!(
            read_pi_dataset("1\ta\tzzz\n", &trees, "en", &trees, "en"),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(read_pi_dataset("maybe\ta\tb\n", &trees, "en", &trees, "en").is_err());
        let p = pair_trees(&v[0]).unwrap();
        assert_eq!(p.a.tree().to_labeled().to_sexpr(), "(x|X (root) (X))");
    }
}
