use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::{DepTree, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MweScope {
    /// Only nodes on the entity path, the entities and their dependents.
    #[default]
    SdpAndDependents,
    WholeTree,
}

/// Which dependency relations glue multiword expressions together.
///
/// Relations match deprels exactly, so subtyped relations such as
/// `compound:lvc` or `flat:name` must be listed explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MweConfig {
    pub relations: BTreeSet<String>,
    pub scope: MweScope,
}

impl Default for MweConfig {
    fn default() -> Self {
        MweConfig {
            relations: BTreeSet::from(["fixed".to_string()]),
            scope: MweScope::default(),
        }
    }
}

impl MweConfig {
    pub fn new<I, S>(relations: I, scope: MweScope) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cfg = MweConfig {
            relations: relations.into_iter().map(Into::into).collect(),
            scope,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.relations.is_empty() {
            return Err(Error::Config("mwe.relations must not be empty".into()));
        }
        Ok(())
    }

    fn glues(&self, deprel: &str) -> bool {
        self.relations.contains(deprel)
    }
}

/// Merges multiword expressions headed by `targets`.
///
/// Every target with a child attached by one of `cfg.relations` is merged
/// with that child, transitively. The merged token takes the head, deprel
/// and tags of the chain head; its form and lemma are the members' joined by
/// a single space in surface order. Returns the new tree and the old-to-new
/// id map (index 0 maps the virtual root to 0).
pub fn collapse_mwe(
    tree: &DepTree,
    cfg: &MweConfig,
    targets: &BTreeSet<usize>,
) -> Result<(DepTree, Vec<usize>)> {
    tree.ensure_valid()?;
    cfg.validate()?;
    for &t in targets {
        tree.token(t)?;
    }

    // Shallow targets first so a chain is always claimed by its top node.
    let mut ordered = Vec::with_capacity(targets.len());
    for &t in targets {
        ordered.push((tree.depth(t)?, t));
    }
    ordered.sort_unstable();

    let n = tree.len();
    let mut group_head = vec![0usize; n + 1];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (_, t) in ordered {
        if group_head[t] != 0 {
            continue;
        }
        let mut members = vec![t];
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            for &c in tree.children(x) {
                if cfg.glues(&tree.token(c)?.deprel) && group_head[c] == 0 {
                    members.push(c);
                    stack.push(c);
                }
            }
        }
        if members.len() > 1 {
            for &m in &members {
                group_head[m] = t;
            }
            members.sort_unstable();
            groups.push(members);
        }
    }

    if groups.is_empty() {
        return Ok((tree.clone(), (0..=n).collect()));
    }

    // Each output unit is (surface position, chain head, members).
    let mut units: Vec<(usize, usize, Vec<usize>)> = groups
        .into_iter()
        .map(|m| {
            let head = group_head[m[0]];
            (m[0], head, m)
        })
        .collect();
    for t in tree.tokens() {
        if group_head[t.id] == 0 {
            units.push((t.id, t.id, vec![t.id]));
        }
    }
    units.sort_unstable();

    let mut map = vec![0usize; n + 1];
    for (new_id, (_, _, members)) in units.iter().enumerate() {
        for &m in members {
            map[m] = new_id + 1;
        }
    }

    let mut tokens = Vec::with_capacity(units.len());
    for (new_id, (_, head_id, members)) in units.iter().enumerate() {
        let head = tree.token(*head_id)?;
        let mut tok: Token = head.clone();
        tok.id = new_id + 1;
        tok.head = map[head.head];
        tok.deps = None;
        if members.len() > 1 {
            let parts: Vec<&Token> = members.iter().map(|&m| tree.token(m)).collect::<Result<_>>()?;
            tok.form = parts.iter().map(|p| p.form.as_str()).collect::<Vec<_>>().join(" ");
            tok.lemma = parts
                .iter()
                .map(|p| p.lemma_or_form())
                .collect::<Vec<_>>()
                .join(" ");
        }
        tokens.push(tok);
    }

    let mut out = DepTree::new(tree.sent_id.clone(), tokens);
    out.text = tree.text.clone();
    out.metadata = tree.metadata.clone();
    Ok((out, map))
}
