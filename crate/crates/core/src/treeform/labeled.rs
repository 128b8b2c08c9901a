use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Lexical,
    Syntactic,
}

/// Ordered labeled tree consumed by the tree kernels.
///
/// Lexical nodes carry a POS tag (possibly empty); syntactic nodes carry
/// none. The textual form is a bracketed s-expression in which every node is
/// parenthesized and lexical nodes are written `label|POS`:
///
/// ```text
/// (run|VERB (root) (VERB))
/// ```
///
/// Whitespace, `(`, `)`, `|` and `\` inside labels are backslash-escaped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    pub label: String,
    pub kind: NodeKind,
    pub pos_tag: Option<String>,
    pub children: Vec<LabeledTree>,
}

impl LabeledTree {
    pub fn lexical(label: impl Into<String>, pos: impl Into<String>) -> Self {
        LabeledTree {
            label: label.into(),
            kind: NodeKind::Lexical,
            pos_tag: Some(pos.into()),
            children: Vec::new(),
        }
    }

    pub fn syntactic(label: impl Into<String>) -> Self {
        LabeledTree {
            label: label.into(),
            kind: NodeKind::Syntactic,
            pos_tag: None,
            children: Vec::new(),
        }
    }

    pub fn with_children(mut self, children: Vec<LabeledTree>) -> Self {
        self.children = children;
        self
    }

    pub fn push(&mut self, child: LabeledTree) {
        self.children.push(child);
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(LabeledTree::node_count).sum::<usize>()
    }

    pub fn lexical_count(&self) -> usize {
        usize::from(self.kind == NodeKind::Lexical)
            + self.children.iter().map(LabeledTree::lexical_count).sum::<usize>()
    }

    /// Nodes in preorder.
    pub fn preorder(&self) -> Vec<&LabeledTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        out.push('(');
        escape_into(&self.label, out);
        if self.kind == NodeKind::Lexical {
            out.push('|');
            escape_into(self.pos_tag.as_deref().unwrap_or(""), out);
        }
        for c in &self.children {
            out.push(' ');
            c.write_sexpr(out);
        }
        out.push(')');
    }

    /// Parses the s-expression produced by [`LabeledTree::to_sexpr`].
    pub fn parse_sexpr(text: &str) -> Result<LabeledTree> {
        let mut p = SexprParser {
            chars: text.char_indices().collect(),
            pos: 0,
            len: text.len(),
        };
        p.skip_ws();
        let tree = p.node()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("trailing input after tree"));
        }
        Ok(tree)
    }
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

fn escape_into(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '(' | ')' | '|' | '\\' | ' ' => {
                out.push('\\');
                out.push(c);
            }
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
}

struct SexprParser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl SexprParser {
    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|&(o, _)| o).unwrap_or(self.len)
    }

    fn error(&self, msg: &str) -> Error {
        Error::Bracket {
            offset: self.offset(),
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<String> {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            match c {
                '\\' => {
                    self.pos += 1;
                    match self.peek() {
                        Some('t') => s.push('\t'),
                        Some('n') => s.push('\n'),
                        Some('r') => s.push('\r'),
                        Some(c) => s.push(c),
                        None => return Err(self.error("dangling escape")),
                    }
                    self.pos += 1;
                }
                '(' | ')' | '|' => break,
                c if c.is_whitespace() => break,
                c => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
        Ok(s)
    }

    fn node(&mut self) -> Result<LabeledTree> {
        if self.peek() != Some('(') {
            return Err(self.error("expected '('"));
        }
        self.pos += 1;
        let label = self.atom()?;
        let mut node = if self.peek() == Some('|') {
            self.pos += 1;
            let pos = self.atom()?;
            LabeledTree::lexical(label, pos)
        } else {
            LabeledTree::syntactic(label)
        };
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.pos += 1;
                    return Ok(node);
                }
                Some('(') => node.children.push(self.node()?),
                Some(_) => return Err(self.error("expected '(' or ')'")),
                None => return Err(self.error("unbalanced parentheses")),
            }
        }
    }
}
