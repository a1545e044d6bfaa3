//! Reduced bundles at the level of K-classes: tables `Ĝ → K⁰(Y_α)` under
//! the twisting law, and their face conditions over an isotropy tree.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::chargroup::{chain_sections, Character};
use crate::model::{ModelError, ResolvedAction, SectionChoice};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("character {character:?} is not in the dual group of node {node}")]
    OutsideDual { node: String, character: Character },
    #[error("class {class:?} has the wrong length for K⁰ of node {node}")]
    BadClass { node: String, class: Vec<BigInt> },
    #[error("character {character:?} is not in the kernel lattice of node {node}")]
    NotInKernel { node: String, character: Character },
    #[error("node mismatch: {0} vs {1}")]
    NodeMismatch(String, String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Table = BTreeMap<Character, Vec<BigInt>>;

fn accumulate(t: &mut Table, key: Character, v: Vec<BigInt>) {
    match t.get_mut(&key) {
        Some(acc) => acc.iter_mut().zip(v).for_each(|(a, b)| *a += b),
        None => {
            t.insert(key, v);
        }
    }
}

fn nonzero(t: Table) -> Table {
    t.into_iter().filter(|(_, v)| v.iter().any(|x| !x.is_zero())).collect()
}

/// A reduced bundle on one node, stored canonically: every key is the
/// section lift of its restriction and no entry is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedBundleNode {
    pub node: String,
    pub entries: Table,
}

impl ReducedBundleNode {
    pub fn zero(node: &str) -> Self {
        ReducedBundleNode { node: node.to_string(), entries: Table::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

fn twist_class(
    action: &ResolvedAction,
    node: &str,
    h: &[BigInt],
    x: &[BigInt],
) -> Result<Vec<BigInt>, BundleError> {
    let d = action.datum(node)?;
    let k = d
        .kernel_coordinates(h)
        .ok_or_else(|| BundleError::NotInKernel { node: node.to_string(), character: h.to_vec() })?;
    let data = action.node(node)?;
    Ok(data.k.shift_power_k0(&k).apply(x))
}

/// Moves each entry onto the lift of its restriction: a class `x` at
/// `ĥ + S(b̂)` becomes `σ(ĥ)x` at `S(b̂)`.
pub fn canonicalize(
    action: &ResolvedAction,
    sections: &SectionChoice,
    node: &str,
    raw: &Table,
) -> Result<ReducedBundleNode, BundleError> {
    let d = action.datum(node)?;
    let g = d.dual_group();
    let k0 = &action.node(node)?.k.k0;
    let mut out = Table::new();
    for (ch, x) in raw {
        if ch.len() != g.ngens() {
            return Err(BundleError::OutsideDual { node: node.to_string(), character: ch.clone() });
        }
        if x.len() != k0.ngens() {
            return Err(BundleError::BadClass { node: node.to_string(), class: x.clone() });
        }
        let ch = g.reduce(ch);
        let rep = sections.lift(&action.tree, node, &d.restrict(&ch))?;
        let h = g.sub(&ch, &rep);
        accumulate(&mut out, rep, twist_class(action, node, &h, x)?);
    }
    let out = out.into_iter().map(|(k, v)| (k, k0.reduce(&v))).collect();
    Ok(ReducedBundleNode { node: node.to_string(), entries: nonzero(out) })
}

pub fn direct_sum(
    action: &ResolvedAction,
    sections: &SectionChoice,
    a: &ReducedBundleNode,
    b: &ReducedBundleNode,
) -> Result<ReducedBundleNode, BundleError> {
    if a.node != b.node {
        return Err(BundleError::NodeMismatch(a.node.clone(), b.node.clone()));
    }
    let mut raw = a.entries.clone();
    for (k, v) in &b.entries {
        accumulate(&mut raw, k.clone(), v.clone());
    }
    canonicalize(action, sections, &a.node, &raw)
}

/// Tensor with a virtual representation `V = Σ n_ĝ ĝ`: supports convolve.
pub fn tensor_with_representation(
    action: &ResolvedAction,
    sections: &SectionChoice,
    v: &BTreeMap<Character, BigInt>,
    w: &ReducedBundleNode,
) -> Result<ReducedBundleNode, BundleError> {
    let g = action.datum(&w.node)?.dual_group();
    let mut raw = Table::new();
    for (c, n) in v {
        if c.len() != g.ngens() {
            return Err(BundleError::OutsideDual { node: w.node.clone(), character: c.clone() });
        }
        for (ch, x) in &w.entries {
            accumulate(&mut raw, g.add(c, ch), x.iter().map(|a| a * n).collect());
        }
    }
    canonicalize(action, sections, &w.node, &raw)
}

/// Action of a kernel-lattice character, `σ(ĥ)` on every class.
pub fn shift_act(
    action: &ResolvedAction,
    sections: &SectionChoice,
    h: &[BigInt],
    w: &ReducedBundleNode,
) -> Result<ReducedBundleNode, BundleError> {
    let d = action.datum(&w.node)?;
    if !d.in_kernel(h) {
        return Err(BundleError::NotInKernel { node: w.node.clone(), character: h.to_vec() });
    }
    let rep = BTreeMap::from([(h.to_vec(), BigInt::from(1))]);
    tensor_with_representation(action, sections, &rep, w)
}

/// K⁰ classes on a face, keyed by lifts `S(α, k̂)` of the lower node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceTable {
    pub face: String,
    pub entries: Table,
}

/// Pull-back of the upper node's data to a face, summing over all upper
/// sectors above a lower sector with the twist `σ(S(β,b̂) − S(α,k̂))`.
pub fn augmented_pullback(
    action: &ResolvedAction,
    sections: &SectionChoice,
    face: &str,
    w: &ReducedBundleNode,
) -> Result<FaceTable, BundleError> {
    let fid = action.tree.face(face).ok_or_else(|| ModelError::MissingFace(face.to_string()))?;
    if fid.upper != w.node {
        return Err(BundleError::NodeMismatch(fid.upper.clone(), w.node.clone()));
    }
    let fd = action.face(face)?;
    let lower = action.datum(&fid.lower)?;
    let canon = canonicalize(action, sections, &w.node, &w.entries)?;
    let mut out = Table::new();
    for (lift, x) in &canon.entries {
        let k = lower.restrict(lift);
        let key = sections.lift(&action.tree, &fid.lower, &k)?;
        let h = lower.dual_group().sub(lift, &key);
        let coords = lower
            .kernel_coordinates(&h)
            .ok_or_else(|| BundleError::NotInKernel { node: fid.lower.clone(), character: h.clone() })?;
        accumulate(&mut out, key, fd.k_twist(&coords).apply(&fd.k_pullback.apply(x)));
    }
    let out = out.into_iter().map(|(k, v)| (k, fd.k0.reduce(&v))).collect();
    Ok(FaceTable { face: face.to_string(), entries: nonzero(out) })
}

/// Restriction of the lower node's data to a face, sector by sector.
pub fn restrict_to_face(
    action: &ResolvedAction,
    sections: &SectionChoice,
    face: &str,
    w: &ReducedBundleNode,
) -> Result<FaceTable, BundleError> {
    let fid = action.tree.face(face).ok_or_else(|| ModelError::MissingFace(face.to_string()))?;
    if fid.lower != w.node {
        return Err(BundleError::NodeMismatch(fid.lower.clone(), w.node.clone()));
    }
    let fd = action.face(face)?;
    let canon = canonicalize(action, sections, &w.node, &w.entries)?;
    let out = canon.entries.iter().map(|(k, x)| (k.clone(), fd.k0.reduce(&fd.k_restrict.apply(x)))).collect();
    Ok(FaceTable { face: face.to_string(), entries: nonzero(out) })
}

/// One reduced bundle per node; missing nodes carry the zero bundle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IteratedReducedBundle {
    pub nodes: BTreeMap<String, ReducedBundleNode>,
}

impl IteratedReducedBundle {
    pub fn get(&self, node: &str) -> ReducedBundleNode {
        self.nodes.get(node).cloned().unwrap_or_else(|| ReducedBundleNode::zero(node))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceMismatch {
    pub face: String,
    pub character: Character,
    pub restricted: Option<Vec<BigInt>>,
    pub pulled_back: Option<Vec<BigInt>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IteratedReport {
    pub faces_checked: usize,
    pub mismatches: Vec<FaceMismatch>,
    pub corner_failures: Vec<(usize, String)>,
}

impl IteratedReport {
    pub fn is_consistent(&self) -> bool {
        self.mismatches.is_empty() && self.corner_failures.is_empty()
    }
}

pub fn check_iterated(
    action: &ResolvedAction,
    sections: &SectionChoice,
    w: &IteratedReducedBundle,
) -> Result<IteratedReport, BundleError> {
    let mut report = IteratedReport::default();
    for f in &action.tree.faces {
        let lo = restrict_to_face(action, sections, &f.id, &w.get(&f.lower))?;
        let hi = augmented_pullback(action, sections, &f.id, &w.get(&f.upper))?;
        report.faces_checked += 1;
        let keys: BTreeSet<&Character> = lo.entries.keys().chain(hi.entries.keys()).collect();
        for k in keys {
            let (a, b) = (lo.entries.get(k), hi.entries.get(k));
            if a != b {
                report.mismatches.push(FaceMismatch {
                    face: f.id.clone(),
                    character: k.clone(),
                    restricted: a.cloned(),
                    pulled_back: b.cloned(),
                });
            }
        }
    }
    for (i, chain) in action.tree.corners.iter().enumerate() {
        let mut data = Vec::new();
        let mut supports = Vec::new();
        for n in &chain.nodes {
            let d = action.datum(n)?;
            let mut sup: BTreeSet<Character> = BTreeSet::new();
            for m in &chain.nodes {
                let dm = action.datum(m)?;
                if action.tree.less(n, m) || n == m {
                    for ch in w.get(m).entries.keys() {
                        sup.insert(d.restrict(&dm.dual_group().reduce(ch)));
                    }
                }
            }
            data.push(d.clone());
            supports.push(sup.into_iter().collect::<Vec<_>>());
        }
        if let Err(e) = chain_sections(&data, &supports) {
            report.corner_failures.push((i, e.to_string()));
        }
    }
    Ok(report)
}
