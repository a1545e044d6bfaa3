//! The isotropy tree of a resolved action: nodes with their isotropy data,
//! the partial order, faces, declared corner chains, and pruning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::chargroup::{DualGroup, SubgroupDatum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("node {0} is already in the kept set")]
    AlreadyKept(String),
    #[error("node {node} cannot be added before {missing}")]
    MissingPredecessor { node: String, missing: String },
    #[error("pruned set is not closed upwards: {0} is pruned but {1} above it is not")]
    NotUpwardClosed(String, String),
    #[error("tree is invalid: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub id: String,
    pub datum: SubgroupDatum,
}

/// A face `H_upper(Y_lower)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FaceId {
    pub id: String,
    pub lower: String,
    pub upper: String,
}

/// A declared corner where the faces of a chain `α < β < γ` meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerChain {
    /// `[α, β, γ]`
    pub nodes: [String; 3],
    /// Faces `[αβ, αγ, βγ]`.
    pub faces: [String; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropyTree {
    pub group: DualGroup,
    pub nodes: Vec<TreeNode>,
    pub order: BTreeSet<(String, String)>,
    pub faces: Vec<FaceId>,
    pub corners: Vec<CornerChain>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub nodes: Vec<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.nodes.join(", "), self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeReport {
    pub violations: Vec<Violation>,
}

impl TreeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, nodes: &[&str], message: impl Into<String>) {
        self.violations.push(Violation { nodes: nodes.iter().map(|s| s.to_string()).collect(), message: message.into() });
    }
}

impl IsotropyTree {
    pub fn node(&self, id: &str) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn datum(&self, id: &str) -> Result<&SubgroupDatum, TreeError> {
        self.node(id).map(|n| &n.datum).ok_or_else(|| TreeError::UnknownNode(id.to_string()))
    }

    pub fn node_ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    pub fn less(&self, a: &str, b: &str) -> bool {
        self.order.contains(&(a.to_string(), b.to_string()))
    }

    pub fn below(&self, id: &str) -> Vec<String> {
        self.order.iter().filter(|(_, b)| b == id).map(|(a, _)| a.clone()).collect()
    }

    pub fn above(&self, id: &str) -> Vec<String> {
        self.order.iter().filter(|(a, _)| a == id).map(|(_, b)| b.clone()).collect()
    }

    /// The unique minimum, if there is one.
    pub fn root(&self) -> Option<String> {
        let minima: Vec<&TreeNode> = self.nodes.iter().filter(|n| self.below(&n.id).is_empty()).collect();
        match minima.as_slice() {
            [r] if self.nodes.iter().all(|n| n.id == r.id || self.less(&r.id, &n.id)) => Some(r.id.clone()),
            _ => None,
        }
    }

    /// Length of the longest chain from the root.
    pub fn depth(&self, id: &str) -> usize {
        self.below(id).iter().map(|b| self.depth(b) + 1).max().unwrap_or(0)
    }

    pub fn faces_between(&self, lower: &str, upper: &str) -> Vec<&FaceId> {
        self.faces.iter().filter(|f| f.lower == lower && f.upper == upper).collect()
    }

    pub fn faces_below(&self, upper: &str) -> Vec<&FaceId> {
        self.faces.iter().filter(|f| f.upper == upper).collect()
    }

    pub fn faces_of(&self, lower: &str) -> Vec<&FaceId> {
        self.faces.iter().filter(|f| f.lower == lower).collect()
    }

    pub fn face(&self, id: &str) -> Option<&FaceId> {
        self.faces.iter().find(|f| f.id == id)
    }

    /// Nodes ordered by depth, then label.
    pub fn sorted_nodes(&self) -> Vec<String> {
        let mut ids: Vec<(usize, String)> = self.nodes.iter().map(|n| (self.depth(&n.id), n.id.clone())).collect();
        ids.sort();
        ids.into_iter().map(|(_, id)| id).collect()
    }

    /// Checks upward closure of a pruned set.
    pub fn check_pruned_set(&self, pruned: &BTreeSet<String>) -> Result<(), TreeError> {
        for p in pruned {
            if self.node(p).is_none() {
                return Err(TreeError::UnknownNode(p.clone()));
            }
            for a in self.above(p) {
                if !pruned.contains(&a) {
                    return Err(TreeError::NotUpwardClosed(p.clone(), a));
                }
            }
        }
        Ok(())
    }
}

pub fn validate_tree(t: &IsotropyTree) -> TreeReport {
    let mut rep = TreeReport::default();
    let mut seen = BTreeSet::new();
    for n in &t.nodes {
        if !seen.insert(n.id.clone()) {
            rep.push(&[&n.id], "duplicate node id");
        }
        if n.datum.dual_group() != &t.group {
            rep.push(&[&n.id], format!("restriction starts at {} instead of {}", n.datum.dual_group(), t.group));
        }
    }
    for (a, b) in &t.order {
        for x in [a, b] {
            if !seen.contains(x) {
                rep.push(&[x], "order mentions an unknown node");
            }
        }
        if a == b {
            rep.push(&[a], "order is not irreflexive");
        }
        if t.less(b, a) {
            rep.push(&[a, b], "order is not antisymmetric");
        }
        for c in t.above(b) {
            if !t.less(a, &c) {
                rep.push(&[a, b, &c], "order is not transitive");
            }
        }
    }
    if !rep.is_valid() {
        return rep;
    }
    if t.root().is_none() {
        rep.push(&[], "no unique root below every other node");
    }
    for (a, b) in &t.order {
        let (da, db) = (t.datum(a).unwrap(), t.datum(b).unwrap());
        if let Some(k) = db.kernel_generators().iter().find(|k| !da.in_kernel(k)) {
            rep.push(&[a, b], format!("kernel of {b} is not contained in kernel of {a} (generator {k:?})"));
        }
        if t.faces_between(a, b).is_empty() {
            rep.push(&[a, b], "comparable pair has no face");
        }
    }
    let mut face_ids = BTreeSet::new();
    for f in &t.faces {
        if !face_ids.insert(f.id.clone()) {
            rep.push(&[&f.lower, &f.upper], format!("duplicate face id {}", f.id));
        }
        if !t.less(&f.lower, &f.upper) {
            rep.push(&[&f.lower, &f.upper], format!("face {} joins incomparable nodes", f.id));
        }
    }
    for c in &t.corners {
        let [a, b, g] = &c.nodes;
        if !(t.less(a, b) && t.less(b, g)) {
            rep.push(&[a, b, g], "declared corner is not a chain");
            continue;
        }
        for (fid, (lo, hi)) in c.faces.iter().zip([(a, b), (a, g), (b, g)]) {
            match t.face(fid) {
                Some(f) if &f.lower == lo && &f.upper == hi => {}
                _ => rep.push(&[a, b, g], format!("corner face {fid} does not join {lo} and {hi}")),
            }
        }
    }
    rep
}

/// A downward-closed kept set and its complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pruning {
    pub kept: BTreeSet<String>,
    pub pruned: BTreeSet<String>,
}

pub fn prune_step(t: &IsotropyTree, kept: &BTreeSet<String>, alpha: &str) -> Result<Pruning, TreeError> {
    if t.node(alpha).is_none() {
        return Err(TreeError::UnknownNode(alpha.to_string()));
    }
    if kept.contains(alpha) {
        return Err(TreeError::AlreadyKept(alpha.to_string()));
    }
    for b in t.below(alpha) {
        if !kept.contains(&b) {
            return Err(TreeError::MissingPredecessor { node: alpha.to_string(), missing: b });
        }
    }
    let mut new_kept = kept.clone();
    new_kept.insert(alpha.to_string());
    let pruned = t.node_ids().into_iter().filter(|n| !new_kept.contains(n)).collect();
    Ok(Pruning { kept: new_kept, pruned })
}

/// `A_0 = {root} ⊂ A_1 ⊂ ... ⊂ A_N = A`, adding nodes by depth then label.
pub fn pruning_sequence(t: &IsotropyTree) -> Result<Vec<BTreeSet<String>>, TreeError> {
    let order = t.sorted_nodes();
    let Some(root) = t.root() else { return Err(TreeError::Invalid("no unique root".into())) };
    let mut kept = BTreeSet::from([root.clone()]);
    let mut seq = vec![kept.clone()];
    for id in order.into_iter().filter(|id| *id != root) {
        kept = prune_step(t, &kept, &id)?.kept;
        seq.push(kept.clone());
    }
    Ok(seq)
}

/// Node ids in the order they enter the pruning sequence.
pub fn pruning_order(t: &IsotropyTree) -> Result<Vec<String>, TreeError> {
    let seq = pruning_sequence(t)?;
    let mut out: Vec<String> = seq[0].iter().cloned().collect();
    for w in seq.windows(2) {
        out.extend(w[1].difference(&w[0]).cloned());
    }
    Ok(out)
}

/// Maps each node to its depth.
pub fn depths(t: &IsotropyTree) -> BTreeMap<String, usize> {
    t.nodes.iter().map(|n| (n.id.clone(), t.depth(&n.id))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgab::{AbHom, FgAbGroup, IntMatrix};

    fn node(id: &str, target: FgAbGroup, m: IntMatrix) -> TreeNode {
        TreeNode { id: id.into(), datum: SubgroupDatum::new(AbHom::new(FgAbGroup::free(1), target, m).unwrap()).unwrap() }
    }

    fn sphere() -> IsotropyTree {
        let root = node("0", FgAbGroup::trivial(), IntMatrix::zeros(0, 1));
        let n = node("N", FgAbGroup::free(1), IntMatrix::from_i64(&[&[1]]));
        let s = node("S", FgAbGroup::free(1), IntMatrix::from_i64(&[&[1]]));
        IsotropyTree {
            group: FgAbGroup::free(1),
            nodes: vec![root, n, s],
            order: [("0", "N"), ("0", "S")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            faces: vec![
                FaceId { id: "fN".into(), lower: "0".into(), upper: "N".into() },
                FaceId { id: "fS".into(), lower: "0".into(), upper: "S".into() },
            ],
            corners: vec![],
        }
    }

    #[test]
    fn single_node_valid() {
        let t = IsotropyTree {
            group: FgAbGroup::free(1),
            nodes: vec![node("0", FgAbGroup::trivial(), IntMatrix::zeros(0, 1))],
            order: BTreeSet::new(),
            faces: vec![],
            corners: vec![],
        };
        assert!(validate_tree(&t).is_valid());
        assert_eq!(pruning_sequence(&t).unwrap().len(), 1);
    }

    #[test]
    fn sphere_valid_and_pruned() {
        let t = sphere();
        assert!(validate_tree(&t).is_valid(), "{:?}", validate_tree(&t));
        let seq = pruning_sequence(&t).unwrap();
        let names: Vec<Vec<String>> = seq.iter().map(|s| s.iter().cloned().collect()).collect();
        assert_eq!(names, vec![vec!["0"], vec!["0", "N"], vec!["0", "N", "S"]]);
        let p = prune_step(&t, &BTreeSet::from(["0".to_string()]), "N").unwrap();
        assert_eq!(p.pruned, BTreeSet::from(["S".to_string()]));
        assert!(matches!(prune_step(&t, &BTreeSet::new(), "N"), Err(TreeError::MissingPredecessor { .. })));
    }

    #[test]
    fn nesting_violation_named() {
        let mut t = sphere();
        // root isotropy U(1) and pole isotropy trivial: kernels nest the wrong way
        t.nodes[0] = node("0", FgAbGroup::free(1), IntMatrix::from_i64(&[&[1]]));
        t.nodes[1] = node("N", FgAbGroup::trivial(), IntMatrix::zeros(0, 1));
        let rep = validate_tree(&t);
        assert!(!rep.is_valid());
        assert_eq!(rep.violations[0].nodes, vec!["0".to_string(), "N".to_string()]);
    }

    #[test]
    fn corner_must_be_chain() {
        let mut t = sphere();
        t.corners.push(CornerChain {
            nodes: ["0".into(), "N".into(), "S".into()],
            faces: ["fN".into(), "fS".into(), "fS".into()],
        });
        assert!(!validate_tree(&t).is_valid());
    }
}
