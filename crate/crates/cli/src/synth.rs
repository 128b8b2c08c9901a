//! Seeded toy datasets for smoke runs: active/passive paraphrase pairs and
//! a three-class causal relation set, with matching embeddings and config.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use udkernels::{Error, Result};

const NAMES: [&str; 8] = ["federer", "nadal", "murray", "djokovic", "wawrinka", "thiem", "zverev", "medvedev"];
/// (past, participle, lemma)
const VERBS: [(&str, &str, &str); 6] = [
    ("beat", "beaten", "beat"),
    ("defeated", "defeated", "defeat"),
    ("met", "met", "meet"),
    ("faced", "faced", "face"),
    ("praised", "praised", "praise"),
    ("called", "called", "call"),
];
const INTRANSITIVE: [(&str, &str); 4] = [("slept", "sleep"), ("arrived", "arrive"), ("smiled", "smile"), ("left", "leave")];
const ADVERBS: [&str; 3] = ["yesterday", "today", "again"];
const NOUNS: [&str; 10] = ["fire", "smoke", "storm", "flood", "virus", "fever", "leak", "damage", "crash", "delay"];
const ADJECTIVES: [&str; 4] = ["big", "sudden", "small", "severe"];

struct Tok {
    form: String,
    lemma: String,
    upos: &'static str,
    head: usize,
    deprel: &'static str,
    misc: &'static str,
}

fn tok(form: &str, lemma: &str, upos: &'static str, head: usize, deprel: &'static str) -> Tok {
    Tok {
        form: form.into(),
        lemma: lemma.into(),
        upos,
        head,
        deprel,
        misc: "_",
    }
}

fn write_sentence(out: &mut String, id: &str, meta: &[(&str, &str)], toks: &[Tok]) {
    let _ = writeln!(out, "# sent_id = {id}");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let text: Vec<&str> = toks.iter().map(|t| t.form.as_str()).collect();
    let _ = writeln!(out, "# text = {}", text.join(" "));
    for (i, t) in toks.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}",
            i + 1,
            t.form,
            t.lemma,
            t.upos,
            t.head,
            t.deprel,
            t.misc
        );
    }
    out.push('\n');
}

/// "X beat Y [adv]"
fn active(x: &str, v: (&str, &str, &str), y: &str, adv: Option<&str>) -> Vec<Tok> {
    let mut t = vec![tok(x, x, "PROPN", 2, "nsubj"), tok(v.0, v.2, "VERB", 0, "root"), tok(y, y, "PROPN", 2, "obj")];
    if let Some(a) = adv {
        t.push(tok(a, a, "ADV", 2, "advmod"));
    }
    t
}

/// "Y was beaten by X [adv]"
fn passive(x: &str, v: (&str, &str, &str), y: &str, adv: Option<&str>) -> Vec<Tok> {
    let mut t = vec![
        tok(y, y, "PROPN", 3, "nsubj:pass"),
        tok("was", "be", "AUX", 3, "aux:pass"),
        tok(v.1, v.2, "VERB", 0, "root"),
        tok("by", "by", "ADP", 5, "case"),
        tok(x, x, "PROPN", 3, "obl"),
    ];
    if let Some(a) = adv {
        t.push(tok(a, a, "ADV", 3, "advmod"));
    }
    t
}

fn unrelated(rng: &mut ChaCha8Rng, z: &str) -> Vec<Tok> {
    match rng.gen_range(0..3) {
        0 => {
            let (f, l) = *INTRANSITIVE.choose(rng).unwrap();
            let adv = *ADVERBS.choose(rng).unwrap();
            vec![tok(z, z, "PROPN", 2, "nsubj"), tok(f, l, "VERB", 0, "root"), tok(adv, adv, "ADV", 2, "advmod")]
        }
        1 => vec![
            tok(z, z, "PROPN", 3, "nsubj"),
            tok("was", "be", "AUX", 3, "cop"),
            tok("tired", "tired", "ADJ", 0, "root"),
        ],
        _ => vec![
            tok("the", "the", "DET", 2, "det"),
            tok("crowd", "crowd", "NOUN", 3, "nsubj"),
            tok("cheered", "cheer", "VERB", 0, "root"),
            tok("for", "for", "ADP", 5, "case"),
            tok(z, z, "PROPN", 3, "obl"),
        ],
    }
}

pub struct PiData {
    pub trees_a: String,
    pub trees_b: String,
    pub train_pairs: String,
    pub test_pairs: String,
    pub words: BTreeSet<String>,
}

/// `n` sentence pairs, half paraphrases. Positives restate an active
/// sentence in the passive; negatives pair it with an unrelated sentence.
/// The first `n_train` pairs form the training split.
pub fn paraphrase(seed: u64, n: usize, n_train: usize) -> PiData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b) = (String::new(), String::new());
    let (mut train, mut test) = (String::new(), String::new());
    let mut words = BTreeSet::new();
    for k in 0..n {
        let positive = k % 2 == 0;
        let mut names = NAMES.to_vec();
        names.shuffle(&mut rng);
        let v = *VERBS.choose(&mut rng).unwrap();
        let adv = rng.gen_bool(0.5).then(|| *ADVERBS.choose(&mut rng).unwrap());
        let ta = active(names[0], v, names[1], adv);
        let tb = if positive {
            passive(names[0], v, names[1], adv)
        } else {
            unrelated(&mut rng, names[2])
        };
        for t in ta.iter().chain(&tb) {
            words.insert(t.lemma.clone());
        }
        let (ia, ib) = (format!("a{k:03}"), format!("b{k:03}"));
        write_sentence(&mut a, &ia, &[], &ta);
        write_sentence(&mut b, &ib, &[], &tb);
        let line = format!("{}\t{ia}\t{ib}\n", u8::from(positive));
        if k < n_train {
            train += &line;
        } else {
            test += &line;
        }
    }
    PiData {
        trees_a: a,
        trees_b: b,
        train_pairs: train,
        test_pairs: test,
        words,
    }
}

pub const RE_LABELS: [&str; 3] = ["Cause-Effect(e1,e2)", "Cause-Effect(e2,e1)", "Other"];

pub struct ReSplit {
    pub conllu: String,
    pub constituency: String,
}

pub struct ReData {
    pub train: ReSplit,
    pub test: ReSplit,
    pub words: BTreeSet<String>,
}

/// Appends "the [adj] noun", the noun attached to `head`; returns its bracketing.
fn noun_phrase(
    toks: &mut Vec<Tok>,
    head: usize,
    deprel: &'static str,
    noun: &str,
    adj: Option<&str>,
    mark: &'static str,
) -> String {
    let noun_id = toks.len() + 2 + usize::from(adj.is_some());
    toks.push(tok("the", "the", "DET", noun_id, "det"));
    let mut bracket = "(NP (DT the)".to_string();
    if let Some(a) = adj {
        toks.push(tok(a, a, "ADJ", noun_id, "amod"));
        bracket += &format!(" (JJ {a})");
    }
    let mut n = tok(noun, noun, "NOUN", head, deprel);
    n.misc = mark;
    toks.push(n);
    bracket + &format!(" (NN {noun}))")
}

/// One relation sentence; the first entity is always `e1`.
fn relation(rng: &mut ChaCha8Rng, class: usize) -> (Vec<Tok>, String) {
    let mut nouns = NOUNS.to_vec();
    nouns.shuffle(rng);
    let adj1 = rng.gen_bool(0.4).then(|| *ADJECTIVES.choose(rng).unwrap());
    let adj2 = rng.gen_bool(0.4).then(|| *ADJECTIVES.choose(rng).unwrap());
    let adv = rng.gen_bool(0.3).then(|| *ADVERBS.choose(rng).unwrap());
    let mut t = Vec::new();
    let e1_len = 2 + usize::from(adj1.is_some());
    let verb_id = e1_len + 1 + usize::from(class == 1);
    let np1 = noun_phrase(&mut t, verb_id, ["nsubj", "nsubj:pass", "nsubj"][class], nouns[0], adj1, "Entity=e1");
    let vp = match class {
        0 => {
            t.push(tok("caused", "cause", "VERB", 0, "root"));
            let np2 = noun_phrase(&mut t, verb_id, "obj", nouns[1], adj2, "Entity=e2");
            format!("(VBD caused) {np2}")
        }
        1 => {
            t.push(tok("was", "be", "AUX", verb_id, "aux:pass"));
            t.push(tok("caused", "cause", "VERB", 0, "root"));
            let noun_id = t.len() + 3 + usize::from(adj2.is_some());
            t.push(tok("by", "by", "ADP", noun_id, "case"));
            let np2 = noun_phrase(&mut t, verb_id, "obl", nouns[1], adj2, "Entity=e2");
            format!("(VBD was) (VP (VBN caused) (PP (IN by) {np2}))")
        }
        _ => {
            t.push(tok("stayed", "stay", "VERB", 0, "root"));
            let noun_id = t.len() + 3 + usize::from(adj2.is_some());
            t.push(tok("near", "near", "ADP", noun_id, "case"));
            let np2 = noun_phrase(&mut t, verb_id, "obl", nouns[1], adj2, "Entity=e2");
            format!("(VBD stayed) (PP (IN near) {np2})")
        }
    };
    let mut vp = format!("(VP {vp}");
    if let Some(a) = adv {
        t.push(tok(a, a, "ADV", verb_id, "advmod"));
        vp += &format!(" (ADVP (RB {a}))");
    }
    vp.push(')');
    (t, format!("(S {np1} {vp})"))
}

/// `n` relation sentences, classes in rotation; the first `n_train` form
/// the training split.
pub fn relations(seed: u64, n: usize, n_train: usize) -> ReData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = ReSplit {
        conllu: String::new(),
        constituency: String::new(),
    };
    let mut test = ReSplit {
        conllu: String::new(),
        constituency: String::new(),
    };
    let mut words = BTreeSet::new();
    for k in 0..n {
        let class = k % 3;
        let (toks, bracket) = relation(&mut rng, class);
        for t in &toks {
            words.insert(t.lemma.clone());
        }
        let split = if k < n_train { &mut train } else { &mut test };
        write_sentence(&mut split.conllu, &format!("r{k:03}"), &[("relation", RE_LABELS[class])], &toks);
        split.constituency += &bracket;
        split.constituency.push('\n');
    }
    ReData { train, test, words }
}

/// Random unit-scale vectors, one line per word, with a `count dim` header.
pub fn embeddings(seed: u64, words: &BTreeSet<String>, dim: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut s = format!("{} {dim}\n", words.len());
    for w in words {
        let v: Vec<String> = (0..dim).map(|_| format!("{:.6}", rng.gen_range(-1.0..1.0))).collect();
        let _ = writeln!(s, "{w} {}", v.join(" "));
    }
    s
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| Error::io(p, e))
}

/// Writes the paraphrase dataset and a ready-to-run config into `dir`.
pub fn write_pi(dir: &Path, seed: u64, n: usize, n_train: usize) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let d = paraphrase(seed, n, n_train);
    write(dir, "a.conllu", &d.trees_a)?;
    write(dir, "b.conllu", &d.trees_b)?;
    write(dir, "train.tsv", &d.train_pairs)?;
    write(dir, "test.tsv", &d.test_pairs)?;
    write(dir, "en.vec", &embeddings(seed, &d.words, 16))?;
    let split = |pairs: &str| json!({"pairs": pairs, "trees_a": "a.conllu", "lang_a": "en", "trees_b": "b.conllu", "lang_b": "en"});
    let cfg = json!({
        "task": "pi",
        "kernel": {"type": "softmax_pair", "base": {"kind": "ptk", "lambda": 0.4, "mu": 0.4, "normalize": true}, "m": 100.0},
        "train": split("train.tsv"),
        "test": split("test.tsv"),
        "resources": {"pivot": "en", "embeddings": {"en": "en.vec"}},
        "svm": {"c": 1.0, "tol": 0.001, "max_passes": 10},
        "output": {"dir": "out"},
        "seed": seed
    });
    write(dir, "config.json", &(serde_json::to_string_pretty(&cfg)? + "\n"))
}

/// Writes the relation dataset and a config for `variant` into `dir`.
pub fn write_re(dir: &Path, seed: u64, n: usize, n_train: usize, variant: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let d = relations(seed, n, n_train);
    write(dir, "train.conllu", &d.train.conllu)?;
    write(dir, "train.mrg", &d.train.constituency)?;
    write(dir, "test.conllu", &d.test.conllu)?;
    write(dir, "test.mrg", &d.test.constituency)?;
    write(dir, "en.vec", &embeddings(seed, &d.words, 16))?;
    let mode = if variant == "ck1" { "vo" } else if variant == "ck" { "entity" } else { "vud" };
    let cfg = json!({
        "task": "re",
        "kernel": {"type": "composite", "variant": variant, "alpha": 0.23, "feature_mode": mode},
        "train": {"conllu": "train.conllu", "constituency": "train.mrg", "lang": "en"},
        "test": {"conllu": "test.conllu", "constituency": "test.mrg", "lang": "en"},
        "resources": {"pivot": "en", "embeddings": {"en": "en.vec"}},
        "svm": {"c": 1.0, "tol": 0.001, "max_passes": 10},
        "output": {"dir": "out"},
        "seed": seed
    });
    write(dir, "config.json", &(serde_json::to_string_pretty(&cfg)? + "\n"))
}
