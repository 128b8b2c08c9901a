//! CoNLL-U reading, validation and emission.
//!
//! Only syntactic-word lines are kept: multiword-token ranges (`1-2`) and
//! empty nodes (`1.1`) are skipped while parsing.

use std::fmt;

use crate::error::{Error, Result};

/// `|`-separated `key=value` annotations (FEATS and MISC columns).
///
/// Order is preserved so that emission reproduces the input. Items without
/// `=` are stored with a `None` value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotations(Vec<(String, Option<String>)>);

impl Annotations {
    pub fn new() -> Self {
        Self::default()
    }

    fn parse(column: &str) -> Self {
        if column == "_" || column.is_empty() {
            return Self::default();
        }
        Annotations(
            column
                .split('|')
                .map(|item| match item.split_once('=') {
                    Some((k, v)) => (k.to_string(), Some(v.to_string())),
                    None => (item.to_string(), None),
                })
                .collect(),
        )
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.as_deref())
    }

    /// All values stored under `key`, in order.
    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.0
            .iter()
            .filter(move |(k, _)| k == key)
            .filter_map(|(_, v)| v.as_deref())
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.push((key.into(), Some(value.into())));
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_deref()))
    }
}

impl fmt::Display for Annotations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("_");
        }
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            match v {
                Some(v) => write!(f, "{k}={v}")?,
                None => f.write_str(k)?,
            }
        }
        Ok(())
    }
}

/// One syntactic word. Underscore columns are stored as empty strings or
/// `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: Annotations,
    pub head: usize,
    pub deprel: String,
    pub deps: Option<String>,
    pub misc: Annotations,
}

impl Token {
    /// Minimal token, mostly useful for building fixtures.
    pub fn new(
        id: usize,
        form: &str,
        lemma: &str,
        upos: &str,
        head: usize,
        deprel: &str,
    ) -> Self {
        Token {
            id,
            form: form.to_string(),
            lemma: lemma.to_string(),
            upos: upos.to_string(),
            xpos: None,
            feats: Annotations::default(),
            head,
            deprel: deprel.to_string(),
            deps: None,
            misc: Annotations::default(),
        }
    }

    /// Lemma, or the form when the lemma is missing.
    pub fn lemma_or_form(&self) -> &str {
        if self.lemma.is_empty() {
            &self.form
        } else {
            &self.lemma
        }
    }

    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }
}

/// A sentence as a dependency tree over its syntactic words.
///
/// The `children` adjacency is derived from the head column at construction
/// time and indexed by token id; index 0 holds the root(s).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    pub sent_id: String,
    pub text: Option<String>,
    /// Comment lines other than `sent_id` and `text`, in file order.
    pub metadata: Vec<(String, Option<String>)>,
    tokens: Vec<Token>,
    children: Vec<Vec<usize>>,
    position: Vec<Option<usize>>,
}

impl DepTree {
    pub fn new(sent_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        let max_id = tokens.iter().map(|t| t.id).max().unwrap_or(0);
        let mut position = vec![None; max_id + 1];
        for (i, t) in tokens.iter().enumerate() {
            position[t.id] = Some(i);
        }
        let mut children = vec![Vec::new(); max_id + 1];
        for t in &tokens {
            let head_known = t.head == 0 || position.get(t.head).copied().flatten().is_some();
            if head_known && t.head != t.id {
                children[t.head].push(t.id);
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        DepTree {
            sent_id: sent_id.into(),
            text: None,
            metadata: Vec::new(),
            tokens,
            children,
            position,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        match key {
            "sent_id" => Some(&self.sent_id),
            "text" => self.text.as_deref(),
            _ => self
                .metadata
                .iter()
                .find(|(k, _)| k == key)
                .and_then(|(_, v)| v.as_deref()),
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        id != 0 && self.position.get(id).copied().flatten().is_some()
    }

    pub fn token(&self, id: usize) -> Result<&Token> {
        if id == 0 {
            return Err(Error::Lookup(id));
        }
        self.position
            .get(id)
            .copied()
            .flatten()
            .map(|i| &self.tokens[i])
            .ok_or(Error::Lookup(id))
    }

    /// Direct dependents of `id` in surface order (`0` gives the roots).
    pub fn children(&self, id: usize) -> &[usize] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The single root token id, if there is exactly one.
    pub fn root(&self) -> Option<usize> {
        match self.children(0) {
            [r] => Some(*r),
            _ => None,
        }
    }

    /// Fails with [`Error::InvalidTree`] unless [`validate`] reports nothing.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidTree {
                sent_id: self.sent_id.clone(),
                report: report.to_string(),
            })
        }
    }

    /// Number of edges between `id` and the root.
    pub fn depth(&self, id: usize) -> Result<usize> {
        let mut depth = 0;
        let mut cur = self.token(id)?.head;
        while cur != 0 {
            depth += 1;
            if depth > self.len() {
                return Err(Error::InvalidTree {
                    sent_id: self.sent_id.clone(),
                    report: "cycle".into(),
                });
            }
            cur = self.token(cur)?.head;
        }
        Ok(depth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    NoRoot,
    MultipleRoots(Vec<usize>),
    Cycle(Vec<usize>),
    SelfLoop(usize),
    DanglingHead { id: usize, head: usize },
    EmptyDeprel(usize),
    NonSequentialIds,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NoRoot => f.write_str("no root"),
            Issue::MultipleRoots(ids) => write!(f, "multiple roots {ids:?}"),
            Issue::Cycle(ids) => write!(f, "cycle through {ids:?}"),
            Issue::SelfLoop(id) => write!(f, "cycle: token {id} is its own head"),
            Issue::DanglingHead { id, head } => {
                write!(f, "dangling head: token {id} points to missing {head}")
            }
            Issue::EmptyDeprel(id) => write!(f, "empty deprel on token {id}"),
            Issue::NonSequentialIds => f.write_str("token ids are not 1..n in order"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks the single-root tree invariants.
pub fn validate(tree: &DepTree) -> ValidationReport {
    let mut issues = Vec::new();
    if tree
        .tokens
        .iter()
        .enumerate()
        .any(|(i, t)| t.id != i + 1)
    {
        issues.push(Issue::NonSequentialIds);
    }

    let roots: Vec<usize> = tree
        .tokens
        .iter()
        .filter(|t| t.head == 0)
        .map(|t| t.id)
        .collect();
    match roots.len() {
        0 => issues.push(Issue::NoRoot),
        1 => {}
        _ => issues.push(Issue::MultipleRoots(roots)),
    }

    for t in &tree.tokens {
        if t.head == t.id {
            issues.push(Issue::SelfLoop(t.id));
        } else if t.head != 0 && !tree.contains(t.head) {
            issues.push(Issue::DanglingHead {
                id: t.id,
                head: t.head,
            });
        }
        if t.deprel.is_empty() {
            issues.push(Issue::EmptyDeprel(t.id));
        }
    }

    // Walk head chains; 0 = unvisited, 1 = on current path, 2 = done.
    let mut state = vec![0u8; tree.position.len()];
    for start in tree.tokens.iter().map(|t| t.id) {
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if cur == 0 || !tree.contains(cur) || state[cur] == 2 {
                break;
            }
            if state[cur] == 1 {
                let from = path.iter().position(|&x| x == cur).unwrap_or(0);
                let mut cycle: Vec<usize> = path[from..].to_vec();
                cycle.sort_unstable();
                if cycle.len() > 1 {
                    issues.push(Issue::Cycle(cycle));
                }
                break;
            }
            state[cur] = 1;
            path.push(cur);
            cur = tree.tokens[tree.position[cur].unwrap()].head;
        }
        for id in path {
            state[id] = 2;
        }
    }
    ValidationReport { issues }
}

/// `node` and all of its descendants, in surface order.
pub fn subtree_tokens(tree: &DepTree, node: usize) -> Result<Vec<usize>> {
    tree.token(node)?;
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(id) = stack.pop() {
        if out.len() > tree.len() {
            return Err(Error::InvalidTree {
                sent_id: tree.sent_id.clone(),
                report: "cycle".into(),
            });
        }
        out.push(id);
        stack.extend(tree.children(id).iter().copied());
    }
    out.sort_unstable();
    Ok(out)
}

fn opt_column(s: &str) -> Option<String> {
    (s != "_").then(|| s.to_string())
}

fn str_column(s: &str) -> String {
    if s == "_" {
        String::new()
    } else {
        s.to_string()
    }
}

/// Parses CoNLL-U text. Sentences without `# sent_id` are named `input:<n>`.
pub fn parse_conllu(text: &str) -> Result<Vec<DepTree>> {
    parse_conllu_named(text, "input")
}

/// Like [`parse_conllu`], naming id-less sentences `<source>:<n>`.
pub fn parse_conllu_named(text: &str, source: &str) -> Result<Vec<DepTree>> {
    let mut trees = Vec::new();
    let mut comments: Vec<(String, Option<String>)> = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut ordinal = 0usize;

    let mut flush = |comments: &mut Vec<(String, Option<String>)>, tokens: &mut Vec<Token>| {
        if tokens.is_empty() {
            comments.clear();
            return;
        }
        ordinal += 1;
        let mut sent_id = None;
        let mut text = None;
        let mut metadata = Vec::new();
        for (k, v) in comments.drain(..) {
            match (k.as_str(), v) {
                ("sent_id", Some(v)) if sent_id.is_none() => sent_id = Some(v),
                ("text", Some(v)) if text.is_none() => text = Some(v),
                (_, v) => metadata.push((k, v)),
            }
        }
        let mut tree = DepTree::new(
            sent_id.unwrap_or_else(|| format!("{source}:{ordinal}")),
            std::mem::take(tokens),
        );
        tree.text = text;
        tree.metadata = metadata;
        trees.push(tree);
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut comments, &mut tokens);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            match comment.split_once(" = ") {
                Some((k, v)) => comments.push((k.trim().to_string(), Some(v.to_string()))),
                None => match comment.split_once('=') {
                    Some((k, v)) => {
                        comments.push((k.trim().to_string(), Some(v.trim().to_string())))
                    }
                    None => comments.push((comment.to_string(), None)),
                },
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("non-integer token id {:?}", cols[0]),
        })?;
        if id == 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: "token id must be positive".into(),
            });
        }
        if tokens.iter().any(|t| t.id == id) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate token id {id}"),
            });
        }
        let head: usize = cols[6].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("non-integer head {:?}", cols[6]),
        })?;
        tokens.push(Token {
            id,
            form: str_column(cols[1]),
            lemma: str_column(cols[2]),
            upos: str_column(cols[3]),
            xpos: opt_column(cols[4]),
            feats: Annotations::parse(cols[5]),
            head,
            deprel: str_column(cols[7]),
            deps: opt_column(cols[8]),
            misc: Annotations::parse(cols[9]),
        });
    }
    flush(&mut comments, &mut tokens);
    Ok(trees)
}

fn or_underscore(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}

/// Emits one sentence block, terminated by a blank line.
pub fn write_tree(tree: &DepTree, out: &mut String) {
    use std::fmt::Write;
    let _ = writeln!(out, "# sent_id = {}", tree.sent_id);
    if let Some(text) = &tree.text {
        let _ = writeln!(out, "# text = {text}");
    }
    for (k, v) in &tree.metadata {
        match v {
            Some(v) => {
                let _ = writeln!(out, "# {k} = {v}");
            }
            None => {
                let _ = writeln!(out, "# {k}");
            }
        }
    }
    for t in &tree.tokens {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.id,
            or_underscore(&t.form),
            or_underscore(&t.lemma),
            or_underscore(&t.upos),
            t.xpos.as_deref().unwrap_or("_"),
            t.feats,
            t.head,
            or_underscore(&t.deprel),
            t.deps.as_deref().unwrap_or("_"),
            t.misc,
        );
    }
    out.push('\n');
}

pub fn write_conllu(trees: &[DepTree]) -> String {
    let mut out = String::new();
    for t in trees {
        write_tree(t, &mut out);
    }
    out
}
