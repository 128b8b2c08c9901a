use std::fmt;

use crate::error::{Error, Result};

use super::LabeledTree;

/// Constituency tree. Leaves hold token text; every node records the
/// 1-based inclusive span of surface positions it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstTree {
    pub label: String,
    pub children: Vec<ConstTree>,
    pub span: (usize, usize),
}

impl ConstTree {
    pub fn leaf(text: impl Into<String>, position: usize) -> Self {
        ConstTree {
            label: text.into(),
            children: Vec::new(),
            span: (position, position),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaves(&self) -> Vec<&ConstTree> {
        if self.is_leaf() {
            return vec![self];
        }
        self.children.iter().flat_map(ConstTree::leaves).collect()
    }

    pub fn covers(&self, lo: usize, hi: usize) -> bool {
        self.span.0 <= lo && hi <= self.span.1
    }

    fn assign_spans(&mut self, next: &mut usize) {
        if self.is_leaf() {
            self.span = (*next, *next);
            *next += 1;
            return;
        }
        let start = *next;
        for c in &mut self.children {
            c.assign_spans(next);
        }
        self.span = (start, *next - 1);
    }

    pub fn to_bracketed(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        if self.is_leaf() {
            out.push_str(&self.label);
            return;
        }
        out.push('(');
        out.push_str(&self.label);
        for c in &self.children {
            out.push(' ');
            c.write(out);
        }
        out.push(')');
    }
}

impl fmt::Display for ConstTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracketed())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut toks = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push((s, Tok::Atom(&text[s..i])));
            }
            match c {
                '(' => toks.push((i, Tok::Open)),
                ')' => toks.push((i, Tok::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push((s, Tok::Atom(&text[s..])));
    }
    toks
}

/// Parses Penn-style bracketed trees. Several trees may share the input; a
/// label-less outer wrapper around a single tree is removed.
pub fn parse_bracketed(text: &str) -> Result<Vec<ConstTree>> {
    let toks = tokenize(text);
    let mut pos = 0;
    let mut trees = Vec::new();
    while pos < toks.len() {
        match toks[pos] {
            (_, Tok::Open) => {
                let mut tree = parse_node(&toks, &mut pos, text.len())?;
                while tree.label.is_empty() && tree.children.len() == 1 && !tree.children[0].is_leaf() {
                    tree = tree.children.pop().unwrap();
                }
                if tree.label.is_empty() {
                    tree.label = "ROOT".into();
                }
                let mut next = 1;
                tree.assign_spans(&mut next);
                trees.push(tree);
            }
            (offset, Tok::Close) => {
                return Err(Error::Bracket {
                    offset,
                    msg: "unbalanced parentheses: unexpected ')'".into(),
                })
            }
            (offset, Tok::Atom(a)) => {
                return Err(Error::Bracket {
                    offset,
                    msg: format!("unexpected token {a:?} outside a tree"),
                })
            }
        }
    }
    Ok(trees)
}

fn parse_node(toks: &[(usize, Tok<'_>)], pos: &mut usize, end: usize) -> Result<ConstTree> {
    let open_at = toks[*pos].0;
    *pos += 1;
    let label = match toks.get(*pos) {
        Some((_, Tok::Atom(a))) => {
            *pos += 1;
            a.to_string()
        }
        _ => String::new(),
    };
    let mut children = Vec::new();
    loop {
        match toks.get(*pos) {
            None => {
                return Err(Error::Bracket {
                    offset: end,
                    msg: format!("unbalanced parentheses: '(' at offset {open_at} is never closed"),
                })
            }
            Some((_, Tok::Close)) => {
                *pos += 1;
                break;
            }
            Some((_, Tok::Open)) => children.push(parse_node(toks, pos, end)?),
            Some((_, Tok::Atom(a))) => {
                children.push(ConstTree::leaf(*a, 0));
                *pos += 1;
            }
        }
    }
    Ok(ConstTree {
        label,
        children,
        span: (0, 0),
    })
}

/// Path-enclosed tree: the lowest subtree covering both entity spans, with
/// every part lying outside `[min start, max end]` pruned.
pub fn extract_pet(
    tree: &ConstTree,
    span1: (usize, usize),
    span2: (usize, usize),
) -> Result<ConstTree> {
    let (first, last) = tree.span;
    for (s, e) in [span1, span2] {
        if s > e || s < first || e > last {
            return Err(Error::Argument(format!(
                "entity span ({s},{e}) outside sentence ({first},{last})"
            )));
        }
    }
    if span1.0 <= span2.1 && span2.0 <= span1.1 {
        return Err(Error::Argument(format!(
            "entity spans {span1:?} and {span2:?} overlap"
        )));
    }
    let lo = span1.0.min(span2.0);
    let hi = span1.1.max(span2.1);

    let mut node = tree;
    while let Some(child) = node.children.iter().find(|c| c.covers(lo, hi)) {
        node = child;
    }
    Ok(prune(node, lo, hi))
}

fn prune(node: &ConstTree, lo: usize, hi: usize) -> ConstTree {
    ConstTree {
        label: node.label.clone(),
        children: node
            .children
            .iter()
            .filter(|c| c.span.1 >= lo && c.span.0 <= hi)
            .map(|c| prune(c, lo, hi))
            .collect(),
        span: (node.span.0.max(lo), node.span.1.min(hi)),
    }
}

/// Converts a constituency tree for the kernels: leaves become lexical nodes
/// tagged with their parent's label, everything else is syntactic.
pub fn const_to_labeled(tree: &ConstTree) -> LabeledTree {
    convert(tree, "")
}

fn convert(node: &ConstTree, parent_label: &str) -> LabeledTree {
    if node.is_leaf() {
        return LabeledTree::lexical(node.label.as_str(), parent_label);
    }
    LabeledTree::syntactic(node.label.as_str()).with_children(
        node.children
            .iter()
            .map(|c| convert(c, &node.label))
            .collect(),
    )
}
