use crate::error::Result;
use crate::treebank::DepTree;

use super::LabeledTree;

/// Lexical-centered tree: every token becomes a lexical node labeled with its
/// lemma (form when the lemma is missing) whose children are, in order, the
/// deprel node, the UPOS node and the converted dependents in surface order.
pub fn to_lct(tree: &DepTree) -> Result<LabeledTree> {
    tree.ensure_valid()?;
    let root = tree.root().expect("validated tree has one root");
    build(tree, root)
}

fn build(tree: &DepTree, id: usize) -> Result<LabeledTree> {
    let tok = tree.token(id)?;
    let mut node = LabeledTree::lexical(tok.lemma_or_form(), tok.upos.as_str());
    node.push(LabeledTree::syntactic(tok.deprel.as_str()));
    node.push(LabeledTree::syntactic(tok.upos.as_str()));
    for &child in tree.children(id) {
        node.push(build(tree, child)?);
    }
    Ok(node)
}
