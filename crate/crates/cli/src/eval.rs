//! Classification metrics and the prediction file format.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use udkernels::{Error, Result};

use crate::config::EvalConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold instances of this class.
    pub support: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub labels: Vec<String>,
    /// `matrix[gold][predicted]`.
    pub matrix: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFlags {
    pub exclude_other: bool,
    pub merge_directions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    /// F₁ of the positive label, for two-class tasks that have one.
    pub positive_f1: Option<f64>,
    /// Classes averaged into `macro_f1`.
    pub macro_labels: Vec<String>,
    pub per_class: Vec<ClassScores>,
    pub confusion: Confusion,
    pub flags: EvalFlags,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// `Cause-Effect(e2,e1)` becomes `Cause-Effect`.
pub fn merge_direction(label: &str) -> &str {
    label
        .strip_suffix("(e1,e2)")
        .or_else(|| label.strip_suffix("(e2,e1)"))
        .unwrap_or(label)
}

/// Scores predictions against gold labels. `extra` adds classes that
/// may not occur in either list, such as every label a model knows.
pub fn evaluate(gold: &[String], predicted: &[String], extra: &[String], cfg: &EvalConfig) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::Argument(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Argument("nothing to evaluate".into()));
    }
    let norm = |l: &String| {
        if cfg.merge_directions {
            merge_direction(l).to_string()
        } else {
            l.clone()
        }
    };
    let gold: Vec<String> = gold.iter().map(norm).collect();
    let predicted: Vec<String> = predicted.iter().map(norm).collect();
    let labels: Vec<String> = gold
        .iter()
        .chain(&predicted)
        .cloned()
        .chain(extra.iter().map(norm))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |l: &String| labels.binary_search(l).expect("label collected above");
    let k = labels.len();
    let mut matrix = vec![vec![0usize; k]; k];
    for (g, p) in gold.iter().zip(&predicted) {
        matrix[idx(g)][idx(p)] += 1;
    }
    Ok(from_confusion(Confusion { labels, matrix }, cfg))
}

pub fn from_confusion(confusion: Confusion, cfg: &EvalConfig) -> EvalReport {
    let k = confusion.labels.len();
    let m = &confusion.matrix;
    let n: usize = m.iter().flatten().sum();
    let correct: usize = (0..k).map(|i| m[i][i]).sum();
    let per_class: Vec<ClassScores> = (0..k)
        .map(|i| {
            let support: usize = m[i].iter().sum();
            let predicted: usize = (0..k).map(|g| m[g][i]).sum();
            let precision = ratio(m[i][i], predicted);
            let recall = ratio(m[i][i], support);
            ClassScores {
                label: confusion.labels[i].clone(),
                precision,
                recall,
                f1: f1(precision, recall),
                support,
                predicted,
            }
        })
        .collect();
    let other = if cfg.merge_directions {
        merge_direction(&cfg.other_label)
    } else {
        cfg.other_label.as_str()
    };
    let mut averaged: Vec<&ClassScores> = per_class
        .iter()
        .filter(|c| !(cfg.exclude_other && c.label == other))
        .collect();
    if averaged.is_empty() {
        averaged = per_class.iter().collect();
    }
    let macro_f1 = averaged.iter().map(|c| c.f1).sum::<f64>() / averaged.len() as f64;
    // Pooled over all classes; equals accuracy for single-label data.
    let micro_p = ratio(correct, per_class.iter().map(|c| c.predicted).sum());
    let micro_r = ratio(correct, per_class.iter().map(|c| c.support).sum());
    let positive_f1 = (k == 2)
        .then(|| per_class.iter().find(|c| c.label == cfg.positive_label))
        .flatten()
        .map(|c| c.f1);
    EvalReport {
        n,
        accuracy: ratio(correct, n),
        macro_f1,
        micro_f1: f1(micro_p, micro_r),
        positive_f1,
        macro_labels: averaged.iter().map(|c| c.label.clone()).collect(),
        per_class,
        confusion,
        flags: EvalFlags {
            exclude_other: cfg.exclude_other,
            merge_directions: cfg.merge_directions,
        },
    }
}

/// A rate as a percentage with one decimal.
pub fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let w = self.per_class.iter().map(|c| c.label.len()).max().unwrap_or(0).max(9);
        let mut s = String::new();
        let _ = writeln!(s, "{:<w$}  {:>9}  {:>6}  {:>6}  {:>7}", "class", "precision", "recall", "F1", "support");
        for c in &self.per_class {
            let _ = writeln!(
                s,
                "{:<w$}  {:>9}  {:>6}  {:>6}  {:>7}",
                c.label,
                pct(c.precision),
                pct(c.recall),
                pct(c.f1),
                c.support
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<w$}  {:>6}", "accuracy", pct(self.accuracy));
        if let Some(f) = self.positive_f1 {
            let _ = writeln!(s, "{:<w$}  {:>6}", "F1", pct(f));
        }
        let _ = writeln!(s, "{:<w$}  {:>6}", "macro-F1", pct(self.macro_f1));
        let _ = writeln!(s, "{:<w$}  {:>6}", "micro-F1", pct(self.micro_f1));
        let _ = writeln!(s, "{:<w$}  {:>6}", "instances", self.n);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub gold: String,
    pub predicted: String,
    pub decisions: Vec<(String, f64)>,
}

pub const PREDICTIONS_HEADER: &str = "# instance_id\tgold\tpredicted\tdecision_values";

/// One line per instance; decision values are space-separated
/// `label=value` items.
pub fn write_predictions(rows: &[PredictionRow]) -> String {
    let mut s = format!("{PREDICTIONS_HEADER}\n");
    for r in rows {
        let d: Vec<String> = r.decisions.iter().map(|(l, v)| format!("{l}={v}")).collect();
        let _ = writeln!(s, "{}\t{}\t{}\t{}", r.id, r.gold, r.predicted, d.join(" "));
    }
    s
}

pub fn read_predictions(text: &str) -> Result<Vec<PredictionRow>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Format {
            line: n + 1,
            msg: msg.to_string(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(bad("expected instance_id, gold and predicted columns"));
        }
        let mut decisions = Vec::new();
        for item in cols.get(3).map_or("", |c| c.trim()).split_whitespace() {
            let (l, v) = item.rsplit_once('=').ok_or_else(|| bad("decision values must be label=value"))?;
            let v: f64 = v.parse().map_err(|_| bad("decision value is not a number"))?;
            decisions.push((l.to_string(), v));
        }
        out.push(PredictionRow {
            id: cols[0].to_string(),
            gold: cols[1].to_string(),
            predicted: cols[2].to_string(),
            decisions,
        });
    }
    Ok(out)
}
