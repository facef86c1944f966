//! Result-tree view model.
//!
//! In hierarchical mode every neighbour hangs under the chain of categories
//! named by the proper prefixes of its grouping tree number; categories with
//! a single child are then excised until none remain. In flat mode all
//! leaves attach to the root.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ontology::{ConceptId, Dictionary, UNCLASSIFIED};
use crate::query::{NeighborEntry, SourceColor};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Root,
    Category,
    Leaf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMode {
    Hierarchical,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub label: String,
    /// Concept id of root and leaf nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<ConceptId>,
    /// Tree-number prefix of a category; absent for the unclassified group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub weight: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapsed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<SourceColor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(entry: &NeighborEntry, label: String) -> Self {
        TreeNode {
            kind: NodeKind::Leaf,
            label,
            id: Some(entry.concept_id.clone()),
            path: None,
            weight: entry.weight(),
            collapsed: None,
            color: Some(entry.source_color),
            score: Some(entry.score),
            children: Vec::new(),
        }
    }

    pub fn category(label: String, path: Option<String>, children: Vec<TreeNode>) -> Self {
        TreeNode {
            kind: NodeKind::Category,
            label,
            id: None,
            path,
            weight: children.iter().map(|c| c.weight).sum(),
            collapsed: Some(false),
            color: None,
            score: None,
            children,
        }
    }

    /// Leaves below (or at) this node, depth first.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        if self.kind == NodeKind::Leaf {
            out.push(self);
        }
        for child in &self.children {
            child.collect_leaves(out);
        }
    }

    /// Number of nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultTree {
    pub mode: TreeMode,
    pub root: TreeNode,
}

impl ResultTree {
    pub fn leaves(&self) -> Vec<&TreeNode> {
        self.root.leaves()
    }
}

fn root_node(query_id: &ConceptId, dict: &Dictionary, children: Vec<TreeNode>) -> TreeNode {
    TreeNode {
        kind: NodeKind::Root,
        label: concept_label(dict, query_id),
        id: Some(query_id.clone()),
        path: None,
        weight: children.iter().map(|c| c.weight).sum(),
        collapsed: None,
        color: None,
        score: None,
        children,
    }
}

fn concept_label(dict: &Dictionary, id: &ConceptId) -> String {
    dict.concept(id)
        .map(|c| c.preferred_term.clone())
        .unwrap_or_else(|| id.to_string())
}

fn leaf_order(a: &TreeNode, b: &TreeNode) -> std::cmp::Ordering {
    let score = |n: &TreeNode| n.score.unwrap_or(0.0);
    score(b).total_cmp(&score(a)).then_with(|| a.id.cmp(&b.id))
}

#[derive(Default)]
struct Group<'e> {
    subgroups: BTreeMap<GroupKey, Group<'e>>,
    leaves: Vec<(&'e NeighborEntry, String)>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum GroupKey {
    Prefix(String),
    Unclassified,
}

impl<'e> Group<'e> {
    fn into_children(self, dict: &Dictionary) -> Vec<TreeNode> {
        let mut children: Vec<TreeNode> = self
            .subgroups
            .into_iter()
            .map(|(key, group)| {
                let children = group.into_children(dict);
                match key {
                    GroupKey::Prefix(prefix) => TreeNode::category(
                        dict.category_name(&prefix).to_string(),
                        Some(prefix),
                        children,
                    ),
                    GroupKey::Unclassified => {
                        TreeNode::category(UNCLASSIFIED.to_string(), None, children)
                    }
                }
            })
            .collect();
        children.extend(
            self.leaves
                .into_iter()
                .map(|(entry, label)| TreeNode::leaf(entry, label)),
        );
        children
    }
}

/// Groups neighbours by the vocabulary hierarchy.
pub fn build_hierarchy(
    query_id: &ConceptId,
    entries: &[NeighborEntry],
    dict: &Dictionary,
) -> Result<ResultTree, TreeError> {
    let mut top = Group::default();
    for entry in entries {
        let concept = dict
            .concept(&entry.concept_id)
            .ok_or_else(|| TreeError::UnknownConcept(entry.concept_id.clone()))?;
        let chain: Vec<GroupKey> = match concept.grouping_tree_number() {
            Some(tn) => {
                let segments: Vec<&str> = tn.split('.').collect();
                (1..segments.len())
                    .map(|n| GroupKey::Prefix(segments[..n].join(".")))
                    .collect()
            }
            None => vec![GroupKey::Unclassified],
        };
        let mut group = &mut top;
        for key in chain {
            group = group.subgroups.entry(key).or_default();
        }
        group.leaves.push((entry, concept.preferred_term.clone()));
    }

    let tree = ResultTree {
        mode: TreeMode::Hierarchical,
        root: root_node(query_id, dict, top.into_children(dict)),
    };
    let mut tree = excise_single_children(tree);
    sort_children(&mut tree.root);
    set_default_collapse(&mut tree.root, 0);
    Ok(tree)
}

/// Replaces every category that has exactly one child by that child,
/// repeatedly, until no such category remains. The root is kept.
pub fn excise_single_children(mut tree: ResultTree) -> ResultTree {
    let children = std::mem::take(&mut tree.root.children);
    tree.root.children = children.into_iter().map(excise_node).collect();
    tree
}

// Post-order: replacing a child by its only child never changes the
// parent's child count, so a single pass reaches the fixpoint.
fn excise_node(mut node: TreeNode) -> TreeNode {
    let children = std::mem::take(&mut node.children);
    node.children = children.into_iter().map(excise_node).collect();
    if node.kind == NodeKind::Category && node.children.len() == 1 {
        return node.children.pop().expect("one child");
    }
    node
}

/// Categories first by (label, path), then leaves by (score desc, id).
fn sort_children(node: &mut TreeNode) {
    node.children.sort_by(|a, b| match (a.kind, b.kind) {
        (NodeKind::Leaf, NodeKind::Leaf) => leaf_order(a, b),
        (NodeKind::Leaf, _) => std::cmp::Ordering::Greater,
        (_, NodeKind::Leaf) => std::cmp::Ordering::Less,
        _ => (&a.label, &a.path).cmp(&(&b.label, &b.path)),
    });
    for child in &mut node.children {
        sort_children(child);
    }
}

fn set_default_collapse(node: &mut TreeNode, depth: usize) {
    if node.kind == NodeKind::Category {
        node.collapsed = Some(depth >= 1);
    }
    for child in &mut node.children {
        set_default_collapse(child, depth + 1);
    }
}

/// All neighbours as direct children of the root.
pub fn flat_view(query_id: &ConceptId, entries: &[NeighborEntry], dict: &Dictionary) -> ResultTree {
    let mut leaves: Vec<TreeNode> = entries
        .iter()
        .map(|e| TreeNode::leaf(e, concept_label(dict, &e.concept_id)))
        .collect();
    leaves.sort_by(leaf_order);
    ResultTree {
        mode: TreeMode::Flat,
        root: root_node(query_id, dict, leaves),
    }
}
