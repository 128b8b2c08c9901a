//! Word vectors, bilingual dictionaries and the SPTK node similarity.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{NodeRef, NodeSimilarity, PreparedTree};
use crate::scalar::{dot, norm, Scalar};
use crate::treeform::NodeKind;

/// How words of different languages are brought into one vector space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexicalMode {
    /// Every word is looked up in its own language's store.
    #[default]
    Monolingual,
    /// Non-pivot words are translated into the pivot language first and
    /// looked up in the pivot store.
    TranslateThenCompare,
    /// Per-language stores already share one space; no translation.
    SharedSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    #[default]
    Zero,
    /// Out-of-vocabulary lexical nodes score 1 when their labels are equal.
    ExactMatchFallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SigmaConfig {
    pub mode: LexicalMode,
    pub pos_must_match: bool,
    pub oov_policy: OovPolicy,
    pub lowercase: bool,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        SigmaConfig {
            mode: LexicalMode::default(),
            pos_must_match: true,
            oov_policy: OovPolicy::default(),
            lowercase: true,
        }
    }
}

fn key(word: &str, lowercase: bool) -> String {
    if lowercase {
        word.to_lowercase()
    } else {
        word.to_string()
    }
}

/// Word vectors of one language, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore<T> {
    lang: String,
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingStore<T> {
    pub fn new(lang: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            lang: lang.into(),
            dim,
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: &[T]) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::Argument(format!(
                "vector for {word:?} has {} components, store dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&word) {
            return Err(Error::Argument(format!("duplicate word {word:?}")));
        }
        self.index.insert(word, self.index.len());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Words in insertion order.
    pub fn words(&self) -> Vec<&str> {
        let mut w: Vec<(&str, usize)> = self.index.iter().map(|(k, &i)| (k.as_str(), i)).collect();
        w.sort_unstable_by_key(|&(_, i)| i);
        w.into_iter().map(|(k, _)| k).collect()
    }

    /// Parses `word v1 … vd` lines with an optional `count dim` header.
    pub fn parse(text: &str, lang: impl Into<String>) -> Result<Self> {
        let lang = lang.into();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();
        let mut declared = None;
        if let Some(&(_, first)) = lines.peek() {
            let f: Vec<&str> = first.split_whitespace().collect();
            if f.len() == 2 {
                if let (Ok(_), Ok(d)) = (f[0].parse::<usize>(), f[1].parse::<usize>()) {
                    declared = Some(d);
                    lines.next();
                }
            }
        }
        let mut store: Option<EmbeddingStore<T>> = None;
        for (line, text) in lines {
            let mut fields = text.split_whitespace();
            let word = fields.next().unwrap_or_default();
            let values: Vec<T> = fields
                .map(|v| {
                    v.parse::<f64>().map(T::of).map_err(|_| Error::Format {
                        line,
                        msg: format!("bad vector component {v:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            let dim = declared.or(store.as_ref().map(|s| s.dim)).unwrap_or(values.len());
            if values.len() != dim || dim == 0 {
                return Err(Error::Format {
                    line,
                    msg: format!("expected {dim} components for {word:?}, found {}", values.len()),
                });
            }
            let s = match store.as_mut() {
                Some(s) => s,
                None => store.insert(EmbeddingStore::new(lang.clone(), dim)?),
            };
            s.insert(word, &values).map_err(|e| Error::Format {
                line,
                msg: e.to_string(),
            })?;
        }
        store.ok_or(Error::Format {
            line: 0,
            msg: "embedding file has no vectors".into(),
        })
    }

    pub fn load(path: impl AsRef<Path>, lang: impl Into<String>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, lang)
    }
}

/// Source word to ranked target words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BilingualDictionary {
    pub source: String,
    pub target: String,
    lowercase: bool,
    entries: HashMap<String, Vec<String>>,
}

impl BilingualDictionary {
    pub fn new(source: impl Into<String>, target: impl Into<String>, lowercase: bool) -> Self {
        BilingualDictionary {
            source: source.into(),
            target: target.into(),
            lowercase,
            entries: HashMap::new(),
        }
    }

    /// Appends `target` to the ranked translations of `source`.
    pub fn add(&mut self, source: &str, target: &str) {
        let targets = self.entries.entry(key(source, self.lowercase)).or_default();
        let target = key(target, self.lowercase);
        if !targets.contains(&target) {
            targets.push(target);
        }
    }

    /// Parses `source<TAB>target` lines; repeated sources rank their
    /// targets in file order.
    pub fn parse(text: &str, source: &str, target: &str, lowercase: bool) -> Result<Self> {
        let mut dict = BilingualDictionary::new(source, target, lowercase);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or_else(|| Error::Format {
                line: i + 1,
                msg: "expected source<TAB>target".into(),
            })?;
            let (s, t) = (s.trim(), t.trim());
            if s.is_empty() || t.is_empty() {
                return Err(Error::Format {
                    line: i + 1,
                    msg: "empty dictionary field".into(),
                });
            }
            dict.add(s, t);
        }
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>, source: &str, target: &str, lowercase: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, source, target, lowercase)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn translations(&self, word: &str) -> &[String] {
        self.entries
            .get(&key(word, self.lowercase))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// First-ranked translation.
    pub fn translate(&self, word: &str) -> Option<&str> {
        self.translations(word).first().map(String::as_str)
    }
}

/// `u·v / (‖u‖‖v‖)`, 0 when either vector is zero.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::Argument(format!(
            "cosine of vectors with {} and {} components",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == T::zero() || nv == T::zero() {
        return Ok(T::zero());
    }
    Ok(dot(u, v) / (nu * nv))
}

/// Per-language stores and dictionaries around a pivot language.
#[derive(Debug, Clone, Default)]
pub struct Lexicon<T> {
    pivot: String,
    stores: BTreeMap<String, EmbeddingStore<T>>,
    dictionaries: BTreeMap<(String, String), BilingualDictionary>,
}

impl<T: Scalar> Lexicon<T> {
    pub fn new(pivot: impl Into<String>) -> Self {
        Lexicon {
            pivot: pivot.into(),
            stores: BTreeMap::new(),
            dictionaries: BTreeMap::new(),
        }
    }

    pub fn pivot(&self) -> &str {
        &self.pivot
    }

    pub fn with_store(mut self, store: EmbeddingStore<T>) -> Result<Self> {
        self.add_store(store)?;
        Ok(self)
    }

    pub fn with_dictionary(mut self, dict: BilingualDictionary) -> Self {
        self.add_dictionary(dict);
        self
    }

    pub fn add_store(&mut self, store: EmbeddingStore<T>) -> Result<()> {
        if let Some(d) = self.dim() {
            if d != store.dim() {
                return Err(Error::Config(format!(
                    "embeddings for {:?} have dimension {}, expected {d}",
                    store.lang(),
                    store.dim()
                )));
            }
        }
        self.stores.insert(store.lang().to_string(), store);
        Ok(())
    }

    pub fn add_dictionary(&mut self, dict: BilingualDictionary) {
        self.dictionaries
            .insert((dict.source.clone(), dict.target.clone()), dict);
    }

    pub fn dim(&self) -> Option<usize> {
        self.stores.values().next().map(EmbeddingStore::dim)
    }

    pub fn store(&self, lang: &str) -> Option<&EmbeddingStore<T>> {
        self.stores.get(lang)
    }

    pub fn dictionary(&self, source: &str, target: &str) -> Option<&BilingualDictionary> {
        self.dictionaries.get(&(source.to_string(), target.to_string()))
    }

    fn home(&self, lang: &str) -> String {
        if lang.is_empty() {
            self.pivot.clone()
        } else {
            lang.to_string()
        }
    }

    /// Vector for `word` of language `lang` (empty means the pivot).
    ///
    /// A multiword key is tried whole first; failing that, the vectors of
    /// its space-separated parts that resolve are averaged.
    pub fn vector(&self, word: &str, lang: &str, mode: LexicalMode, lowercase: bool) -> Option<Vec<T>> {
        let word = key(word, lowercase);
        if let Some(v) = self.vector_exact(&word, lang, mode) {
            return Some(v);
        }
        if !word.contains(' ') {
            return None;
        }
        let parts: Vec<Vec<T>> = word
            .split(' ')
            .filter(|p| !p.is_empty())
            .filter_map(|p| self.vector_exact(p, lang, mode))
            .collect();
        mean(&parts)
    }

    fn vector_exact(&self, word: &str, lang: &str, mode: LexicalMode) -> Option<Vec<T>> {
        let lang = self.home(lang);
        match mode {
            LexicalMode::Monolingual | LexicalMode::SharedSpace => {
                self.stores.get(&lang)?.get(word).map(<[T]>::to_vec)
            }
            LexicalMode::TranslateThenCompare => {
                let store = self.stores.get(&self.pivot)?;
                if lang == self.pivot {
                    return store.get(word).map(<[T]>::to_vec);
                }
                let dict = self.dictionary(&lang, &self.pivot)?;
                store.get(dict.translate(word)?).map(<[T]>::to_vec)
            }
        }
    }
}

fn mean<T: Scalar>(vectors: &[Vec<T>]) -> Option<Vec<T>> {
    let first = vectors.first()?;
    let mut out = vec![T::zero(); first.len()];
    for v in vectors {
        for (o, &x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    let n = T::of_usize(vectors.len());
    out.iter_mut().for_each(|o| *o /= n);
    Some(out)
}

/// `σ` for one node pair.
///
/// Equal syntactic labels give 1; lexical nodes (with equal POS when
/// required) give their clamped cosine; anything else gives 0.
pub fn sigma<T: Scalar>(a: NodeRef<'_>, b: NodeRef<'_>, cfg: &SigmaConfig, lexicon: &Lexicon<T>) -> T {
    match (a.kind, b.kind) {
        (NodeKind::Syntactic, NodeKind::Syntactic) => {
            if a.label == b.label {
                T::one()
            } else {
                T::zero()
            }
        }
        (NodeKind::Lexical, NodeKind::Lexical) => {
            if cfg.pos_must_match && a.pos != b.pos {
                return T::zero();
            }
            let u = lexicon.vector(a.label, a.lang, cfg.mode, cfg.lowercase);
            let v = lexicon.vector(b.label, b.lang, cfg.mode, cfg.lowercase);
            match (u, v) {
                (Some(u), Some(v)) => clamp_unit(cosine(&u, &v).unwrap_or_else(|_| T::zero())),
                _ => oov(a, b, cfg),
            }
        }
        _ => T::zero(),
    }
}

fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

fn oov<T: Scalar>(a: NodeRef<'_>, b: NodeRef<'_>, cfg: &SigmaConfig) -> T {
    match cfg.oov_policy {
        OovPolicy::Zero => T::zero(),
        OovPolicy::ExactMatchFallback => {
            if key(a.label, cfg.lowercase) == key(b.label, cfg.lowercase) {
                T::one()
            } else {
                T::zero()
            }
        }
    }
}

/// Lexicon-backed node similarity for SPTK.
#[derive(Debug, Clone)]
pub struct LexicalSimilarity<T> {
    lexicon: Arc<Lexicon<T>>,
    cfg: SigmaConfig,
}

impl<T: Scalar> LexicalSimilarity<T> {
    pub fn new(lexicon: Arc<Lexicon<T>>, cfg: SigmaConfig) -> Self {
        LexicalSimilarity { lexicon, cfg }
    }

    pub fn config(&self) -> &SigmaConfig {
        &self.cfg
    }

    pub fn lexicon(&self) -> &Lexicon<T> {
        &self.lexicon
    }

    /// Unit vectors of the lexical nodes of `t`; `None` for syntactic or
    /// out-of-vocabulary nodes.
    fn unit_vectors(&self, t: &PreparedTree) -> Vec<Option<Vec<T>>> {
        (0..t.len())
            .map(|i| {
                let n = t.node(i);
                if n.kind != NodeKind::Lexical {
                    return None;
                }
                let v = self.lexicon.vector(n.label, n.lang, self.cfg.mode, self.cfg.lowercase)?;
                let len = norm(&v);
                (len > T::zero()).then(|| v.iter().map(|&x| x / len).collect())
            })
            .collect()
    }
}

impl<T: Scalar> NodeSimilarity<T> for LexicalSimilarity<T> {
    fn similarity(&self, a: NodeRef<'_>, b: NodeRef<'_>) -> T {
        sigma(a, b, &self.cfg, &self.lexicon)
    }

    fn similarity_matrix(&self, a: &PreparedTree, b: &PreparedTree, out: &mut [T]) {
        let ua = self.unit_vectors(a);
        let ub = self.unit_vectors(b);
        let cols = b.len();
        for i in 0..a.len() {
            let na = a.node(i);
            for j in 0..cols {
                let nb = b.node(j);
                out[i * cols + j] = match (na.kind, nb.kind) {
                    (NodeKind::Syntactic, NodeKind::Syntactic) => {
                        if na.label == nb.label {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                    (NodeKind::Lexical, NodeKind::Lexical) => {
                        if self.cfg.pos_must_match && na.pos != nb.pos {
                            T::zero()
                        } else {
                            match (&ua[i], &ub[j]) {
                                (Some(u), Some(v)) => clamp_unit(dot(u, v)),
                                _ => oov(na, nb, &self.cfg),
                            }
                        }
                    }
                    _ => T::zero(),
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treeform::LabeledTree;

    fn store(lang: &str, rows: &[(&str, &[f64])]) -> EmbeddingStore<f64> {
        let mut s = EmbeddingStore::new(lang, rows[0].1.len()).unwrap();
        for (w, v) in rows {
            s.insert(*w, v).unwrap();
        }
        s
    }

    fn lex<'a>(label: &'a str, pos: &'a str, lang: &'a str) -> NodeRef<'a> {
        NodeRef {
            label,
            kind: NodeKind::Lexical,
            pos: Some(pos),
            lang,
        }
    }

    fn syn(label: &str) -> NodeRef<'_> {
        NodeRef {
            label,
            kind: NodeKind::Syntactic,
            pos: None,
            lang: "",
        }
    }

    #[test]
    fn parse_plain_and_header() {
        let s = EmbeddingStore::<f64>::parse("dog 1 0 0\ncat 0 1 0\n", "en").unwrap();
        assert_eq!((s.dim(), s.len()), (3, 2));
        assert_eq!(s.get("cat").unwrap(), &[0.0, 1.0, 0.0]);
        assert_eq!(s.words(), vec!["dog", "cat"]);

        let row: Vec<String> = (0..300).map(|i| (i as f64 / 7.0).to_string()).collect();
        let text = format!("2 300\na {}\nb {}\n", row.join(" "), row.join(" "));
        assert_eq!(EmbeddingStore::<f32>::parse(&text, "en").unwrap().dim(), 300);
    }

    #[test]
    fn parse_errors() {
        let row: Vec<String> = (0..299).map(|_| "0.5".to_string()).collect();
        let text = format!("1 300\nshort {}\n", row.join(" "));
        match EmbeddingStore::<f64>::parse(&text, "en") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            EmbeddingStore::<f64>::parse("a 1 2\nb 1\n", "en"),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(EmbeddingStore::<f64>::parse("", "en"), Err(Error::Format { .. })));
        assert!(matches!(
            EmbeddingStore::<f64>::parse("a 1\na 2\n", "en"),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn dictionary_ranking() {
        let d = BilingualDictionary::parse(
            "chien\tdog\nChien\thound\nau lieu de\tinstead of\n",
            "fr",
            "en",
            true,
        )
        .unwrap();
        assert_eq!(d.translate("chien"), Some("dog"));
        assert_eq!(d.translations("CHIEN"), ["dog", "hound"]);
        assert_eq!(d.translate("chat"), None);
        assert_eq!(d.translate("au lieu de"), Some("instead of"));
        assert!(BilingualDictionary::parse("no tab here\n", "fr", "en", true).is_err());
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[0.3, -2.0], &[0.3, -2.0]).unwrap() - 1.0_f64).abs() < 1e-15);
        assert_eq!(cosine(&[1.0_f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0_f64, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(cosine(&[0.0_f64, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0_f64], &[1.0, 0.0]).is_err());
    }

    fn bilingual() -> Lexicon<f64> {
        let en = store(
            "en",
            &[
                ("dog", &[1.0, 0.0, 0.0]),
                ("cat", &[0.6, 0.8, 0.0]),
                ("run", &[-1.0, 0.0, 0.0]),
                ("instead", &[0.0, 0.0, 2.0]),
                ("of", &[0.0, 2.0, 0.0]),
            ],
        );
        let dict = BilingualDictionary::parse("chien\tdog\nchat\tcat\n", "fr", "en", true).unwrap();
        Lexicon::new("en").with_store(en).unwrap().with_dictionary(dict)
    }

    #[test]
    fn sigma_rules() {
        let lexicon = bilingual();
        let cfg = SigmaConfig {
            mode: LexicalMode::TranslateThenCompare,
            ..SigmaConfig::default()
        };
        assert_eq!(sigma(syn("nsubj"), syn("nsubj"), &cfg, &lexicon), 1.0);
        assert_eq!(sigma(syn("nsubj"), syn("obj"), &cfg, &lexicon), 0.0);
        assert_eq!(sigma(lex("dog", "NOUN", "en"), lex("chien", "NOUN", "fr"), &cfg, &lexicon), 1.0);
        assert_eq!(sigma(lex("dog", "NOUN", "en"), lex("dog", "VERB", "en"), &cfg, &lexicon), 0.0);
        assert!((sigma(lex("dog", "NOUN", "en"), lex("chat", "NOUN", "fr"), &cfg, &lexicon) - 0.6).abs() < 1e-12);
        // Negative cosine is clamped.
        assert_eq!(sigma(lex("dog", "X", "en"), lex("run", "X", "en"), &cfg, &lexicon), 0.0);
        // Lexical against syntactic.
        assert_eq!(sigma(lex("dog", "NOUN", "en"), syn("dog"), &cfg, &lexicon), 0.0);
        // OOV policies.
        assert_eq!(sigma(lex("zebra", "NOUN", "en"), lex("zebra", "NOUN", "en"), &cfg, &lexicon), 0.0);
        let fallback = SigmaConfig {
            oov_policy: OovPolicy::ExactMatchFallback,
            ..cfg.clone()
        };
        assert_eq!(sigma(lex("zebra", "NOUN", "en"), lex("Zebra", "NOUN", "en"), &fallback, &lexicon), 1.0);
        let loose = SigmaConfig {
            pos_must_match: false,
            ..cfg
        };
        assert_eq!(sigma(lex("dog", "NOUN", "en"), lex("dog", "VERB", "en"), &loose, &lexicon), 1.0);
    }

    #[test]
    fn multiword_lookup() {
        let lexicon = bilingual();
        let v = lexicon.vector("instead of", "en", LexicalMode::Monolingual, true).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 1.0]);
        assert!(lexicon.vector("nowhere words", "en", LexicalMode::Monolingual, true).is_none());
        // Untranslatable language without dictionary.
        assert!(lexicon.vector("hund", "de", LexicalMode::TranslateThenCompare, true).is_none());
    }

    #[test]
    fn shared_space_uses_own_store() {
        let lexicon = Lexicon::new("en")
            .with_store(store("en", &[("dog", &[1.0, 0.0])]))
            .unwrap()
            .with_store(store("fa", &[("سگ", &[0.8, 0.6])]))
            .unwrap();
        let cfg = SigmaConfig {
            mode: LexicalMode::SharedSpace,
            ..SigmaConfig::default()
        };
        let s = sigma(lex("dog", "NOUN", "en"), lex("سگ", "NOUN", "fa"), &cfg, &lexicon);
        assert!((s - 0.8).abs() < 1e-12);
        assert!(Lexicon::new("en")
            .with_store(store("en", &[("a", &[1.0])]))
            .unwrap()
            .with_store(store("fa", &[("b", &[1.0, 2.0])]))
            .is_err());
    }

    #[test]
    fn matrix_matches_pointwise() {
        let lexicon = Arc::new(bilingual());
        let cfg = SigmaConfig {
            mode: LexicalMode::TranslateThenCompare,
            ..SigmaConfig::default()
        };
        let sim = LexicalSimilarity::new(lexicon, cfg);
        let t1 = LabeledTree::lexical("dog", "NOUN").with_children(vec![
            LabeledTree::syntactic("nsubj"),
            LabeledTree::syntactic("NOUN"),
            LabeledTree::lexical("cat", "NOUN"),
        ]);
        let t2 = LabeledTree::lexical("chat", "NOUN").with_children(vec![
            LabeledTree::syntactic("nsubj"),
            LabeledTree::lexical("chien", "NOUN"),
            LabeledTree::lexical("inconnu", "NOUN"),
        ]);
        let a = PreparedTree::new(&t1).with_lang("en");
        let b = PreparedTree::new(&t2).with_lang("fr");
        let mut out = vec![0.0; a.len() * b.len()];
        sim.similarity_matrix(&a, &b, &mut out);
        for i in 0..a.len() {
            for j in 0..b.len() {
                let s = sim.similarity(a.node(i), b.node(j));
                assert!((out[i * b.len() + j] - s).abs() < 1e-12);
            }
        }
    }
}
