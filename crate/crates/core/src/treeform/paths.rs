use crate::error::{Error, Result};
use crate::treebank::DepTree;

/// Interior nodes of the undirected tree path from `e1` to `e2`, ordered
/// from the `e1` side. Endpoints are excluded.
pub fn shortest_path(tree: &DepTree, e1: usize, e2: usize) -> Result<Vec<usize>> {
    if e1 == e2 {
        return Err(Error::Argument(format!(
            "shortest path needs two distinct tokens, got {e1} twice"
        )));
    }
    let up1 = ancestors(tree, e1)?;
    let up2 = ancestors(tree, e2)?;
    let (i1, i2) = up1
        .iter()
        .enumerate()
        .find_map(|(i, n)| up2.iter().position(|m| m == n).map(|j| (i, j)))
        .ok_or_else(|| Error::InvalidTree {
            sent_id: tree.sent_id.clone(),
            report: "tokens are not connected".into(),
        })?;
    let mut path: Vec<usize> = up1[..=i1].to_vec();
    path.extend(up2[..i2].iter().rev());
    Ok(path[1..path.len() - 1].to_vec())
}

/// `id` followed by its ancestors up to the root.
fn ancestors(tree: &DepTree, id: usize) -> Result<Vec<usize>> {
    let mut out = vec![id];
    let mut cur = tree.token(id)?.head;
    while cur != 0 {
        if out.len() > tree.len() {
            return Err(Error::InvalidTree {
                sent_id: tree.sent_id.clone(),
                report: "cycle".into(),
            });
        }
        out.push(cur);
        cur = tree.token(cur)?.head;
    }
    Ok(out)
}

/// Direct dependents of `e` in surface order.
pub fn dependents(tree: &DepTree, e: usize) -> Result<Vec<usize>> {
    tree.token(e)?;
    Ok(tree.children(e).to_vec())
}
