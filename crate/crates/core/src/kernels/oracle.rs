//! Fragment-enumeration reference for the SST and PTK recursions.
//!
//! Enumerates every fragment occurrence rooted at every node, so it is only
//! usable on tiny trees. It shares nothing with the dynamic programs except
//! the decay conventions:
//!
//! * SST fragments rooted at `n` contain `n`'s full production; each
//!   non-leaf child is either cut or expanded. A fragment weighs
//!   `λ^s` with `s` its number of expanded nodes (1 for a lone leaf).
//! * PTK fragments rooted at `n` keep any ordered subsequence of children.
//!   Each occurrence weighs `λ^g`, `g` summing, over fragment nodes, 1 for a
//!   childless node or the extent of the kept child positions otherwise;
//!   a common fragment `f` contributes `μ^|f| · W1(f) · W2(f)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::treeform::LabeledTree;

use super::TreeKernelKind;

pub const ORACLE_MAX_NODES: usize = 6;

/// Unnormalized kernel computed by explicit fragment enumeration.
pub fn brute_force_kernel<T: Scalar>(
    t1: &LabeledTree,
    t2: &LabeledTree,
    kind: TreeKernelKind,
    lambda: f64,
    mu: f64,
) -> Result<T> {
    for t in [t1, t2] {
        if t.node_count() > ORACLE_MAX_NODES {
            return Err(Error::Argument(format!(
                "fragment enumeration is limited to {ORACLE_MAX_NODES} nodes, tree has {}",
                t.node_count()
            )));
        }
    }
    let lambda = T::of(lambda);
    let mu = T::of(mu);
    let mut total = T::zero();
    match kind {
        TreeKernelKind::Sst => {
            let f2: Vec<_> = t2.preorder().into_iter().map(sst_fragments).collect();
            for n1 in t1.preorder() {
                let f1 = sst_fragments(n1);
                for frags in &f2 {
                    for (frag, &s) in frags {
                        if f1.contains_key(frag) {
                            total += lambda.powi(s as i32);
                        }
                    }
                }
            }
        }
        TreeKernelKind::Ptk => {
            let w2: Vec<_> = t2.preorder().into_iter().map(|n| ptk_weights(n, lambda)).collect();
            for n1 in t1.preorder() {
                let w1 = ptk_weights(n1, lambda);
                for weights in &w2 {
                    for (frag, (size, b)) in weights {
                        if let Some((_, a)) = w1.get(frag) {
                            total += mu.powi(*size as i32) * *a * *b;
                        }
                    }
                }
            }
        }
        TreeKernelKind::Sptk => {
            return Err(Error::Argument(
                "fragment enumeration covers sst and ptk only".into(),
            ))
        }
    }
    Ok(total)
}

/// Every ordered tree with at most `max_nodes` nodes over `alphabet`, all
/// nodes syntactic.
pub fn all_trees(max_nodes: usize, alphabet: &[&str]) -> Vec<LabeledTree> {
    (1..=max_nodes).flat_map(|n| trees_of_size(n, alphabet)).collect()
}

fn trees_of_size(n: usize, alphabet: &[&str]) -> Vec<LabeledTree> {
    let mut out = Vec::new();
    for forest in forests_of_size(n - 1, alphabet) {
        for &l in alphabet {
            out.push(LabeledTree::syntactic(l).with_children(forest.clone()));
        }
    }
    out
}

fn forests_of_size(n: usize, alphabet: &[&str]) -> Vec<Vec<LabeledTree>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        let heads = trees_of_size(first, alphabet);
        let tails = forests_of_size(n - first, alphabet);
        for h in &heads {
            for t in &tails {
                let mut f = vec![h.clone()];
                f.extend(t.iter().cloned());
                out.push(f);
            }
        }
    }
    out
}

fn atom(label: &str) -> String {
    format!("{}:{}", label.len(), label)
}

/// SST fragments rooted at `node`, keyed by canonical form, with the number
/// of expanded nodes.
fn sst_fragments(node: &LabeledTree) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    if node.is_leaf() {
        out.insert(format!("({})", atom(&node.label)), 1);
        return out;
    }
    // Partial products over the children: (children text, expanded count).
    let mut partial: Vec<(String, usize)> = vec![(String::new(), 1)];
    for child in &node.children {
        let mut options = vec![(format!(" ({})", atom(&child.label)), 0)];
        if !child.is_leaf() {
            for (f, s) in sst_fragments(child) {
                options.push((format!(" {f}"), s));
            }
        }
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for (p, ps) in &partial {
            for (o, os) in &options {
                next.push((format!("{p}{o}"), ps + os));
            }
        }
        partial = next;
    }
    for (body, s) in partial {
        out.insert(format!("({}{body})", atom(&node.label)), s);
    }
    out
}

/// Every PTK fragment occurrence rooted at `node` as
/// (canonical form, node count, decay exponent).
fn ptk_occurrences(node: &LabeledTree) -> Vec<(String, usize, usize)> {
    let mut out = vec![(format!("({})", atom(&node.label)), 1, 1)];
    let per_child: Vec<Vec<(String, usize, usize)>> =
        node.children.iter().map(ptk_occurrences).collect();
    let n = node.children.len();
    // Non-empty index subsets in increasing order.
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let extent = idx[idx.len() - 1] - idx[0] + 1;
        let mut partial: Vec<(String, usize, usize)> = vec![(String::new(), 1, extent)];
        for &i in &idx {
            let mut next = Vec::new();
            for (p, ps, pg) in &partial {
                for (f, fs, fg) in &per_child[i] {
                    next.push((format!("{p} {f}"), ps + fs, pg + fg));
                }
            }
            partial = next;
        }
        for (body, size, g) in partial {
            out.push((format!("({}{body})", atom(&node.label)), size, g));
        }
    }
    out
}

fn ptk_weights<T: Scalar>(node: &LabeledTree, lambda: T) -> BTreeMap<String, (usize, T)> {
    let mut out: BTreeMap<String, (usize, T)> = BTreeMap::new();
    for (frag, size, g) in ptk_occurrences(node) {
        let entry = out.entry(frag).or_insert((size, T::zero()));
        entry.1 += lambda.powi(g as i32);
    }
    out
}
