//! A resolved action: the isotropy tree together with all node, face and
//! corner data, section choices and character windows.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::basespace::{shift_power, validate_node, CornerData, FaceData, GradedMap, NodeSpaceData};
use crate::chargroup::{edge_restriction, section, CharGroupError, Character, SubgroupDatum};
use crate::fgab::{integer_kernel, AbHom, FgAbGroup, IntMatrix};
use crate::itspace::{validate_tree, IsotropyTree, TreeError};
use crate::qlin::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("missing data for node {0}")]
    MissingNode(String),
    #[error("missing data for face {0}")]
    MissingFace(String),
    #[error("invalid resolved action:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("window for node {node} is not saturated: {detail}")]
    UnsaturatedWindow { node: String, detail: String },
    #[error("window rule for node {0} needs a finite group")]
    InfiniteWindow(String),
    #[error("character {character:?} of node {node}: {detail}")]
    BadCharacter { node: String, character: Character, detail: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    CharGroup(#[from] CharGroupError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedAction {
    pub tree: IsotropyTree,
    pub nodes: BTreeMap<String, NodeSpaceData>,
    pub faces: BTreeMap<String, FaceData>,
    /// Parallel to `tree.corners`.
    pub corners: Vec<CornerData>,
}

impl ResolvedAction {
    pub fn node(&self, id: &str) -> Result<&NodeSpaceData, ModelError> {
        self.nodes.get(id).ok_or_else(|| ModelError::MissingNode(id.to_string()))
    }

    pub fn face(&self, id: &str) -> Result<&FaceData, ModelError> {
        self.faces.get(id).ok_or_else(|| ModelError::MissingFace(id.to_string()))
    }

    pub fn datum(&self, id: &str) -> Result<&SubgroupDatum, ModelError> {
        Ok(self.tree.datum(id)?)
    }

    /// `r_{βα} : B̂_β → B̂_α`
    pub fn edge_map(&self, lower: &str, upper: &str) -> Result<AbHom, ModelError> {
        Ok(edge_restriction(self.datum(lower)?, self.datum(upper)?)?)
    }

    /// Each kernel generator of `upper` written in the kernel generators of `lower`.
    pub fn upper_in_lower(&self, lower: &str, upper: &str) -> Result<Vec<Vec<BigInt>>, ModelError> {
        let (dl, du) = (self.datum(lower)?, self.datum(upper)?);
        du.kernel_generators()
            .iter()
            .map(|k| {
                dl.kernel_coordinates(k).ok_or_else(|| ModelError::BadCharacter {
                    node: upper.to_string(),
                    character: k.clone(),
                    detail: format!("kernel generator not in the kernel of {lower}"),
                })
            })
            .collect()
    }

    /// Full validation: tree, node data, generator relations, faces, corners.
    pub fn validate(&self) -> Vec<String> {
        let mut errs: Vec<String> = validate_tree(&self.tree).violations.iter().map(|v| v.to_string()).collect();
        if !errs.is_empty() {
            return errs;
        }
        for n in &self.tree.nodes {
            let Some(data) = self.nodes.get(&n.id) else {
                errs.push(format!("node {}: no space data", n.id));
                continue;
            };
            errs.extend(validate_node(data).errors.into_iter().map(|e| format!("node {}: {e}", n.id)));
            let m = n.datum.kernel_generators().len();
            if data.shifts.len() != m {
                errs.push(format!("node {}: {} shift operators for {m} kernel generators", n.id, data.shifts.len()));
                continue;
            }
            for rel in generator_relations(&n.datum) {
                errs.extend(
                    check_relation(&data.complex.total_dim(), &data.shifts, &[&data.k.k0, &data.k.k1], &[&data.k.shift_k0, &data.k.shift_k1], &rel)
                        .into_iter()
                        .map(|e| format!("node {}: {e}", n.id)),
                );
            }
        }
        if !errs.is_empty() {
            return errs;
        }
        for f in &self.tree.faces {
            let Some(fd) = self.faces.get(&f.id) else {
                errs.push(format!("face {}: no data", f.id));
                continue;
            };
            let (lo, hi) = (&self.nodes[&f.lower], &self.nodes[&f.upper]);
            let coords = match self.upper_in_lower(&f.lower, &f.upper) {
                Ok(c) => c,
                Err(e) => {
                    errs.push(e.to_string());
                    continue;
                }
            };
            errs.extend(fd.validate(lo, hi, &coords).into_iter().map(|e| format!("face {}: {e}", f.id)));
            if fd.shifts.len() == lo.shifts.len() && fd.k_shifts.len() == lo.shifts.len() {
                let datum = self.tree.datum(&f.lower).unwrap();
                for rel in generator_relations(datum) {
                    errs.extend(
                        check_relation(&fd.complex.total_dim(), &fd.shifts, &[&fd.k0], &[&fd.k_shifts], &rel)
                            .into_iter()
                            .map(|e| format!("face {}: {e}", f.id)),
                    );
                }
            }
        }
        if self.corners.len() != self.tree.corners.len() {
            errs.push(format!("{} corner chains but {} corner data", self.tree.corners.len(), self.corners.len()));
            return errs;
        }
        for (chain, cd) in self.tree.corners.iter().zip(&self.corners) {
            let label = chain.nodes.join("<");
            let fs: Vec<Option<&FaceData>> = chain.faces.iter().map(|f| self.faces.get(f)).collect();
            let (Some(fab), Some(fag), Some(fbg)) = (fs[0], fs[1], fs[2]) else {
                errs.push(format!("corner {label}: face data missing"));
                continue;
            };
            errs.extend(cd.validate(fab, fag, fbg).into_iter().map(|e| format!("corner {label}: {e}")));
            match self.upper_in_lower(&chain.nodes[0], &chain.nodes[1]) {
                Ok(coords) => errs.extend(
                    corner_shift_checks(cd, fab, fag, fbg, &coords).into_iter().map(|e| format!("corner {label}: {e}")),
                ),
                Err(e) => errs.push(e.to_string()),
            }
        }
        errs
    }

    pub fn validated(self) -> Result<Self, ModelError> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::Invalid(errs))
        }
    }
}

/// Integer relations `Σ k_i g_i = 0` among the kernel generators.
pub fn generator_relations(d: &SubgroupDatum) -> Vec<Vec<BigInt>> {
    let g = d.dual_group();
    let m = d.kernel_generators().len();
    if m == 0 {
        return Vec::new();
    }
    let block = IntMatrix::from_columns(d.kernel_generators(), g.ngens()).hcat(&g.relations());
    integer_kernel(&block).into_iter().map(|v| v[..m].to_vec()).filter(|v| v.iter().any(|x| !x.is_zero())).collect()
}

fn check_relation(
    total: &usize,
    shifts: &[GradedMap],
    groups: &[&FgAbGroup],
    autos: &[&Vec<AbHom>],
    rel: &[BigInt],
) -> Vec<String> {
    let mut errs = Vec::new();
    let mut sum = crate::qlin::QMatrix::zeros(*total, *total);
    for (l, k) in shifts.iter().zip(rel) {
        sum = sum.add(&l.total().scale(&Q::from_integer(k.clone())));
    }
    if !sum.is_zero() {
        errs.push(format!("shift operators violate the generator relation {rel:?}"));
    }
    for (g, a) in groups.iter().zip(autos) {
        if a.len() == rel.len() && !shift_power(g, a, rel).is_identity() {
            errs.push(format!("K shifts on {g} violate the generator relation {rel:?}"));
        }
    }
    errs
}

fn corner_shift_checks(cd: &CornerData, fab: &FaceData, fag: &FaceData, fbg: &FaceData, mid_in_low: &[Vec<BigInt>]) -> Vec<String> {
    let mut errs = Vec::new();
    if cd.shifts.len() != fab.shifts.len() {
        errs.push("corner needs one shift operator per generator of the lowest node".into());
        return errs;
    }
    for (i, lz) in cd.shifts.iter().enumerate() {
        if cd.from_lower.compose(&fab.shifts[i]) != lz.compose(&cd.from_lower) {
            errs.push(format!("map from lower face does not intertwine shift {i}"));
        }
        if cd.from_upper.compose(&fag.shifts[i]) != lz.compose(&cd.from_upper) {
            errs.push(format!("map from upper face does not intertwine shift {i}"));
        }
    }
    for (j, coeffs) in mid_in_low.iter().enumerate() {
        let Some(lf) = fbg.shifts.get(j) else { continue };
        let mut combo = GradedMap::zero(&cd.complex, &cd.complex, 2);
        for (lz, k) in cd.shifts.iter().zip(coeffs) {
            combo = combo.add(&lz.scale(&Q::from_integer(k.clone())));
        }
        if cd.from_deep.compose(lf) != combo.compose(&cd.from_deep) {
            errs.push(format!("map from deep face does not intertwine shift {j}"));
        }
    }
    errs
}

/// Lifts `B̂_α → Ĝ`: the default section of each node, optionally overridden
/// entry by entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SectionChoice {
    defaults: BTreeMap<String, BTreeMap<Character, Character>>,
    overrides: BTreeMap<String, BTreeMap<Character, Character>>,
    splits: BTreeMap<String, Option<AbHom>>,
}

impl SectionChoice {
    pub fn canonical(tree: &IsotropyTree) -> Result<Self, ModelError> {
        let mut splits = BTreeMap::new();
        for n in &tree.nodes {
            splits.insert(n.id.clone(), crate::fgab::try_split(n.datum.restriction()).map_err(CharGroupError::from)?);
        }
        Ok(SectionChoice { defaults: BTreeMap::new(), overrides: BTreeMap::new(), splits })
    }

    /// Whether the default section at `node` is homomorphic.
    pub fn is_homomorphic(&self, node: &str) -> bool {
        matches!(self.splits.get(node), Some(Some(_)))
    }

    /// Replaces the lift of `b` at `node`; must restrict back to `b`.
    pub fn set_override(&mut self, tree: &IsotropyTree, node: &str, b: &[BigInt], lift: Character) -> Result<(), ModelError> {
        let d = tree.datum(node)?;
        let b = d.subgroup_dual().reduce(b);
        let lift = d.dual_group().reduce(&lift);
        if !d.subgroup_dual().elements_equal(&d.restrict(&lift), &b) {
            return Err(ModelError::BadCharacter {
                node: node.to_string(),
                character: lift,
                detail: format!("does not restrict to {b:?}"),
            });
        }
        self.overrides.entry(node.to_string()).or_default().insert(b, lift);
        Ok(())
    }

    /// `S(α, b̂)`
    pub fn lift(&self, tree: &IsotropyTree, node: &str, b: &[BigInt]) -> Result<Character, ModelError> {
        let d = tree.datum(node)?;
        let b = d.subgroup_dual().reduce(b);
        if let Some(l) = self.overrides.get(node).and_then(|t| t.get(&b)) {
            return Ok(l.clone());
        }
        if let Some(l) = self.defaults.get(node).and_then(|t| t.get(&b)) {
            return Ok(l.clone());
        }
        Ok(match self.splits.get(node) {
            Some(Some(s)) => s.apply(&b),
            _ => section(d, std::slice::from_ref(&b))?.entries[&b].clone(),
        })
    }

    /// Caches default lifts for the windows about to be used.
    pub fn prepare(&mut self, tree: &IsotropyTree, windows: &Windows) -> Result<(), ModelError> {
        for (node, chars) in windows {
            for b in chars {
                let l = self.lift(tree, node, b)?;
                self.defaults.entry(node.clone()).or_default().insert(b.clone(), l);
            }
        }
        Ok(())
    }

    pub fn overrides(&self) -> &BTreeMap<String, BTreeMap<Character, Character>> {
        &self.overrides
    }
}

/// Finite character windows `W_α ⊂ B̂_α`.
pub type Windows = BTreeMap<String, Vec<Character>>;

/// How a node's window is generated from a size parameter `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WindowRule {
    /// Free coordinates range over `stride·j + offset`, `|j| ≤ m`; torsion
    /// coordinates are enumerated fully.
    Radius { stride: i64, offsets: Vec<i64> },
    Explicit(Vec<Character>),
    /// Every element of a finite group.
    Full,
}

impl Default for WindowRule {
    fn default() -> Self {
        WindowRule::Radius { stride: 1, offsets: vec![0] }
    }
}

impl WindowRule {
    pub fn materialize(&self, node: &str, group: &FgAbGroup, m: usize) -> Result<Vec<Character>, ModelError> {
        let mut out = match self {
            WindowRule::Explicit(list) => list.iter().map(|c| group.reduce(c)).collect::<Vec<_>>(),
            WindowRule::Full => group.enumerate().map_err(|_| ModelError::InfiniteWindow(node.to_string()))?,
            WindowRule::Radius { stride, offsets } => {
                let m = m as i64;
                let mut free_values: Vec<i64> =
                    (-m..=m).flat_map(|j| offsets.iter().map(move |o| stride * j + o)).collect();
                free_values.sort();
                free_values.dedup();
                let mut acc: Vec<Character> = vec![Vec::new()];
                for _ in 0..group.free_rank() {
                    acc = acc
                        .into_iter()
                        .flat_map(|p| {
                            free_values.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(BigInt::from(*v));
                                q
                            })
                        })
                        .collect();
                }
                for d in group.torsion() {
                    let d = d.to_i64().ok_or_else(|| ModelError::InfiniteWindow(node.to_string()))?;
                    acc = acc
                        .into_iter()
                        .flat_map(|p| {
                            (0..d).map(move |v| {
                                let mut q = p.clone();
                                q.push(BigInt::from(v));
                                q
                            })
                        })
                        .collect();
                }
                acc
            }
        };
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Windows for every node from per-node rules (default: radius rule).
pub fn materialize_windows(
    tree: &IsotropyTree,
    rules: &BTreeMap<String, WindowRule>,
    m: usize,
) -> Result<Windows, ModelError> {
    let mut w = Windows::new();
    for n in &tree.nodes {
        let rule = rules.get(&n.id).cloned().unwrap_or_default();
        w.insert(n.id.clone(), rule.materialize(&n.id, n.datum.subgroup_dual(), m)?);
    }
    Ok(w)
}

/// Every comparable pair maps the deeper window into the shallower one.
pub fn check_saturated(action: &ResolvedAction, windows: &Windows) -> Result<(), ModelError> {
    for (lo, hi) in &action.tree.order {
        let r = action.edge_map(lo, hi)?;
        let (Some(wl), Some(wh)) = (windows.get(lo), windows.get(hi)) else {
            return Err(ModelError::UnsaturatedWindow { node: lo.clone(), detail: "missing window".into() });
        };
        for b in wh {
            let img = r.apply(b);
            if !wl.contains(&img) {
                return Err(ModelError::UnsaturatedWindow {
                    node: lo.clone(),
                    detail: format!("character {b:?} of {hi} restricts to {img:?}, outside the window"),
                });
            }
        }
    }
    Ok(())
}
