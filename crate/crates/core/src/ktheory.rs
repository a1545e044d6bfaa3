//! Character-graded K-groups at nodes, the representation-ring action,
//! trivial product factors, six-term hexagons and the global rational
//! comparison along the pruning sequence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::chargroup::Character;
use crate::deloc::{assemble_complex, deloc_cohomology, les_of_pruning, single_node_cohomology, DelocError, LesReport};
use crate::fgab::{AbHom, FgAbGroup};
use crate::itspace::pruning_order;
use crate::model::{ModelError, ResolvedAction, SectionChoice, Windows};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KError {
    #[error("character {character:?} is outside the window of node {node}")]
    OutsideWindow { node: String, character: Character },
    #[error("the extra factor {0} is infinite")]
    InfiniteFactor(String),
    #[error("hexagon has unknown dimensions at positions {0:?}")]
    UnknownDims(Vec<usize>),
    #[error("hexagon admits no exact completion: {0}")]
    Refuted(String),
    #[error("rank mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Deloc(#[from] DelocError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// K-groups of one node, one copy per window character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedKGroup {
    pub node: String,
    pub sectors: BTreeMap<Character, (FgAbGroup, FgAbGroup)>,
    pub shift_k0: Vec<AbHom>,
    pub shift_k1: Vec<AbHom>,
}

impl GradedKGroup {
    /// Summed free ranks `(even, odd)`.
    pub fn ranks(&self) -> (usize, usize) {
        self.sectors.values().fold((0, 0), |(e, o), (k0, k1)| (e + k0.free_rank(), o + k1.free_rank()))
    }
}

pub fn node_equivariant_k(action: &ResolvedAction, node: &str, window: &[Character]) -> Result<GradedKGroup, KError> {
    let data = action.node(node)?;
    let d = action.datum(node)?;
    let mut sectors = BTreeMap::new();
    for b in window {
        if b.len() != d.subgroup_dual().ngens() {
            return Err(KError::OutsideWindow { node: node.to_string(), character: b.clone() });
        }
        sectors.insert(d.subgroup_dual().reduce(b), (data.k.k0.clone(), data.k.k1.clone()));
    }
    Ok(GradedKGroup {
        node: node.to_string(),
        sectors,
        shift_k0: data.k.shift_k0.clone(),
        shift_k1: data.k.shift_k1.clone(),
    })
}

/// A homogeneous element of a graded K-group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedElement {
    pub sector: Character,
    /// 0 or 1.
    pub degree: u8,
    pub class: Vec<BigInt>,
}

/// Action of a character `ĝ`: the sector moves by `r(ĝ)` and the class by
/// the shift automorphism of the kernel part.
pub fn rg_action(
    action: &ResolvedAction,
    sections: &SectionChoice,
    k: &GradedKGroup,
    g: &[BigInt],
    x: &GradedElement,
) -> Result<GradedElement, KError> {
    let d = action.datum(&k.node)?;
    let data = action.node(&k.node)?;
    let cod = d.subgroup_dual();
    if !k.sectors.contains_key(&x.sector) {
        return Err(KError::OutsideWindow { node: k.node.clone(), character: x.sector.clone() });
    }
    let target = cod.add(&x.sector, &d.restrict(g));
    if !k.sectors.contains_key(&target) {
        return Err(KError::OutsideWindow { node: k.node.clone(), character: target });
    }
    let grp = d.dual_group();
    let s_from = sections.lift(&action.tree, &k.node, &x.sector)?;
    let s_to = sections.lift(&action.tree, &k.node, &target)?;
    let h = grp.sub(&grp.add(g, &s_from), &s_to);
    let coords = d
        .kernel_coordinates(&h)
        .ok_or_else(|| DelocError::NotInKernel { node: k.node.clone(), character: h.clone() })?;
    let sigma = if x.degree == 0 { data.k.shift_power_k0(&coords) } else { data.k.shift_power_k1(&coords) };
    Ok(GradedElement { sector: target, degree: x.degree, class: sigma.apply(&x.class) })
}

/// Tensor with `R(A)` for a finite `A` acting trivially: sectors become
/// `Â × (old sectors)`, each a copy of the old one.
pub fn product_with_trivial_factor(a: &FgAbGroup, k: &GradedKGroup) -> Result<GradedKGroup, KError> {
    let chars = a.enumerate().map_err(|_| KError::InfiniteFactor(a.to_string()))?;
    let mut sectors = BTreeMap::new();
    for c in &chars {
        for (b, groups) in &k.sectors {
            let mut key = c.clone();
            key.extend(b.iter().cloned());
            sectors.insert(key, groups.clone());
        }
    }
    Ok(GradedKGroup { node: k.node.clone(), sectors, shift_k0: k.shift_k0.clone(), shift_k1: k.shift_k1.clone() })
}

/// A six-term sequence `d_1 → d_2 → ... → d_6 → d_1` with map `r_i` from
/// position `i` to `i+1`; any entry may be unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SixTermInstance {
    pub dims: [Option<usize>; 6],
    pub ranks: [Option<usize>; 6],
}

impl SixTermInstance {
    pub fn known(dims: [usize; 6], ranks: [usize; 6]) -> Self {
        SixTermInstance { dims: dims.map(Some), ranks: ranks.map(Some) }
    }

    pub fn dims_only(dims: [usize; 6]) -> Self {
        SixTermInstance { dims: dims.map(Some), ranks: [None; 6] }
    }

    pub fn unknown() -> Self {
        SixTermInstance { dims: [None; 6], ranks: [None; 6] }
    }

    pub fn known_dims(&self) -> Option<[usize; 6]> {
        let mut out = [0; 6];
        for (o, d) in out.iter_mut().zip(&self.dims) {
            *o = (*d)?;
        }
        Some(out)
    }
}

impl fmt::Display for SixTermInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: &Option<usize>| x.map_or("?".to_string(), |v| v.to_string());
        let parts: Vec<String> =
            (0..6).map(|i| format!("{} -[{}]->", show(&self.dims[i]), show(&self.ranks[i]))).collect();
        write!(f, "{} (back to start)", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HexagonVerdict {
    pub exact_at: [bool; 6],
    pub alternating_sum: i64,
    /// The ranks used for the verdict.
    pub ranks: [usize; 6],
}

impl HexagonVerdict {
    pub fn is_exact(&self) -> bool {
        self.exact_at.iter().all(|&e| e) && self.alternating_sum == 0
    }

    /// 1-based positions where exactness fails.
    pub fn inexact_positions(&self) -> Vec<usize> {
        (0..6).filter(|&i| !self.exact_at[i]).map(|i| i + 1).collect()
    }
}

fn verdict(dims: &[usize; 6], ranks: &[usize; 6]) -> HexagonVerdict {
    let exact_at = std::array::from_fn(|i| {
        let inc = ranks[(i + 5) % 6];
        let out = ranks[i];
        inc + out == dims[i] && out <= dims[i].min(dims[(i + 1) % 6])
    });
    let alternating_sum = dims.iter().enumerate().map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) }).sum();
    HexagonVerdict { exact_at, alternating_sum, ranks: *ranks }
}

/// Exactness verdict for an instance with all dimensions known. Unknown
/// ranks are completed exactly when possible, otherwise set to their
/// largest admissible values.
pub fn hexagon_check(h: &SixTermInstance) -> Result<HexagonVerdict, KError> {
    let Some(dims) = h.known_dims() else {
        let missing = (0..6).filter(|&i| h.dims[i].is_none()).map(|i| i + 1).collect();
        return Err(KError::UnknownDims(missing));
    };
    if h.ranks.iter().all(Option::is_some) {
        return Ok(verdict(&dims, &h.ranks.map(|r| r.unwrap())));
    }
    let sols = enumerate_solutions(h);
    let ranks = match sols.first() {
        Some(s) => *s,
        None => std::array::from_fn(|i| h.ranks[i].unwrap_or(dims[i].min(dims[(i + 1) % 6]))),
    };
    Ok(verdict(&dims, &ranks))
}

/// What is known about one unknown quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Determined(usize),
    /// Inclusive lower bound and optional inclusive upper bound.
    Range(usize, Option<usize>),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Determined(v) => write!(f, "{v}"),
            Constraint::Range(lo, Some(hi)) => write!(f, "{lo}..={hi}"),
            Constraint::Range(lo, None) => write!(f, "≥{lo}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HexagonSolution {
    pub dims: [Constraint; 6],
    pub ranks: [Constraint; 6],
    pub notes: Vec<String>,
}

impl HexagonSolution {
    pub fn is_fully_determined(&self) -> bool {
        self.dims.iter().chain(&self.ranks).all(|c| matches!(c, Constraint::Determined(_)))
    }

    pub fn admits_dim(&self, i: usize, v: usize) -> bool {
        match &self.dims[i] {
            Constraint::Determined(x) => *x == v,
            Constraint::Range(lo, hi) => v >= *lo && hi.is_none_or(|h| v <= h),
        }
    }
}

/// Rank assignments making the instance exact; unbounded ranks are `usize::MAX`.
fn enumerate_solutions(h: &SixTermInstance) -> Vec<[usize; 6]> {
    let bound = |i: usize| -> Option<usize> {
        match (h.dims[i], h.dims[(i + 1) % 6]) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    };
    let mut out = Vec::new();
    let mut cur = [0usize; 6];
    fn rec(
        i: usize,
        cur: &mut [usize; 6],
        h: &SixTermInstance,
        bound: &dyn Fn(usize) -> Option<usize>,
        out: &mut Vec<[usize; 6]>,
    ) {
        const FREE: usize = usize::MAX;
        if out.len() > 100_000 {
            return;
        }
        if i == 6 {
            // closing equation at position 0
            if let Some(d0) = h.dims[0] {
                if cur[5] == FREE || cur[0] == FREE || cur[5] + cur[0] != d0 {
                    return;
                }
            }
            out.push(*cur);
            return;
        }
        let candidates: Vec<usize> = if let Some(r) = h.ranks[i] {
            vec![r]
        } else if let (Some(di), true) = (h.dims[i], i > 0 && cur[i - 1] != FREE) {
            match di.checked_sub(cur[i - 1]) {
                Some(v) => vec![v],
                None => vec![],
            }
        } else {
            match bound(i) {
                Some(b) => (0..=b).collect(),
                None => vec![FREE],
            }
        };
        for v in candidates {
            if v != FREE {
                if bound(i).is_some_and(|b| v > b) {
                    continue;
                }
                if i > 0 {
                    if let Some(di) = h.dims[i] {
                        if cur[i - 1] != FREE && cur[i - 1] + v != di {
                            continue;
                        }
                    }
                }
            }
            cur[i] = v;
            rec(i + 1, cur, h, bound, out);
        }
    }
    rec(0, &mut cur, h, &bound, &mut out);
    out
}

/// Determines unknown entries where exactness forces them and reports
/// ranges otherwise; an instance with no exact completion is refuted.
pub fn hexagon_solve(h: &SixTermInstance) -> Result<HexagonSolution, KError> {
    const FREE: usize = usize::MAX;
    if h.dims.iter().chain(&h.ranks).all(Option::is_none) {
        return Ok(HexagonSolution {
            dims: std::array::from_fn(|_| Constraint::Range(0, None)),
            ranks: std::array::from_fn(|_| Constraint::Range(0, None)),
            notes: vec!["alternating sum = 0".into()],
        });
    }
    let sols = enumerate_solutions(h);
    if sols.is_empty() {
        return Err(KError::Refuted(h.to_string()));
    }
    let summarize = |vals: Vec<Option<usize>>| -> Constraint {
        let lo = vals.iter().map(|v| v.unwrap_or(0)).min().unwrap();
        if vals.iter().any(Option::is_none) {
            return Constraint::Range(lo, None);
        }
        let hi = vals.iter().map(|v| v.unwrap()).max().unwrap();
        if lo == hi {
            Constraint::Determined(lo)
        } else {
            Constraint::Range(lo, Some(hi))
        }
    };
    let ranks = std::array::from_fn(|i| summarize(sols.iter().map(|s| (s[i] != FREE).then_some(s[i])).collect()));
    let dims = std::array::from_fn(|i| {
        if let Some(d) = h.dims[i] {
            return Constraint::Determined(d);
        }
        summarize(
            sols.iter()
                .map(|s| {
                    let (a, b) = (s[(i + 5) % 6], s[i]);
                    (a != FREE && b != FREE).then(|| a + b)
                })
                .collect(),
        )
    });
    let mut notes = vec!["alternating sum = 0".to_string()];
    if sols.len() > 1 {
        notes.push(format!("{} exact completions", sols.len()));
    }
    Ok(HexagonSolution { dims, ranks, notes })
}

/// One step of the global comparison along the pruning sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalStep {
    pub node: String,
    /// K-side constraints on the newly enlarged relative group.
    pub k_constraint: (Constraint, Constraint),
    /// Delocalized dimensions of the enlarged relative complex.
    pub deloc: (usize, usize),
    /// K-side third term (node contribution) and deloc quotient dimensions.
    pub node_term: ((usize, usize), (usize, usize)),
    pub les: LesReport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalK {
    pub even: usize,
    pub odd: usize,
    pub per_sector: Vec<(Character, usize, usize)>,
    pub base: (usize, usize),
    pub steps: Vec<GlobalStep>,
}

/// Rank of the node's K-theory relative to all its faces (absolute for leaves).
pub fn node_relative_k_ranks(action: &ResolvedAction, node: &str) -> Result<(usize, usize), KError> {
    let data = action.node(node)?;
    if action.tree.faces_of(node).is_empty() {
        return Ok((data.k.k0.free_rank(), data.k.k1.free_rank()));
    }
    match (&data.k.k0_rel, &data.k.k1_rel) {
        (Some(a), Some(b)) => Ok((a.free_rank(), b.free_rank())),
        _ => Err(KError::Mismatch(format!("node {node} has faces but no relative K-theory"))),
    }
}

/// Rational dimensions of `K^*(Y; P)` per root sector, computed through the
/// delocalized complex and cross-checked against every pruning hexagon.
pub fn rational_global_k(
    action: &ResolvedAction,
    sections: &SectionChoice,
    windows: &Windows,
    pruned: &BTreeSet<String>,
) -> Result<GlobalK, KError> {
    action.tree.check_pruned_set(pruned).map_err(ModelError::from)?;
    let all: BTreeSet<String> = action.tree.node_ids().into_iter().collect();
    let root = action.tree.root().ok_or_else(|| KError::Mismatch("no root".into()))?;
    if pruned.contains(&root) {
        return Ok(GlobalK { even: 0, odd: 0, per_sector: vec![], base: (0, 0), steps: vec![] });
    }
    let order: Vec<String> = pruning_order(&action.tree)
        .map_err(ModelError::from)?
        .into_iter()
        .filter(|n| *n != root && !pruned.contains(n))
        .collect();
    let mut current: BTreeSet<String> = all.iter().filter(|n| **n != root).cloned().collect();
    let base_c = deloc_cohomology(&assemble_complex(action, sections, windows, &current)?);
    let rk = node_relative_k_ranks(action, &root)?;
    let nroot = windows.get(&root).map_or(0, Vec::len);
    let base_k = (rk.0 * nroot, rk.1 * nroot);
    if base_k != (base_c.even, base_c.odd) {
        return Err(KError::Mismatch(format!(
            "root relative K ranks {:?} differ from delocalized {:?}",
            base_k,
            (base_c.even, base_c.odd)
        )));
    }
    let mut prev = (base_c.even, base_c.odd);
    let mut steps = Vec::new();
    let mut last = base_c;
    for alpha in order {
        current.remove(&alpha);
        let nr = node_relative_k_ranks(action, &alpha)?;
        let nw = windows.get(&alpha).map_or(0, Vec::len);
        let term3 = (nr.0 * nw, nr.1 * nw);
        let hex = SixTermInstance {
            dims: [Some(prev.0), None, Some(term3.0), Some(prev.1), None, Some(term3.1)],
            ranks: [None; 6],
        };
        let sol = hexagon_solve(&hex)?;
        let les = les_of_pruning(action, sections, windows, &current, &alpha)?;
        if !les.verdict.is_exact() {
            return Err(KError::Mismatch(format!(
                "pruning {alpha}: delocalized sequence inexact at {:?}",
                les.verdict.inexact_positions()
            )));
        }
        let h = deloc_cohomology(&assemble_complex(action, sections, windows, &current)?);
        if !sol.admits_dim(1, h.even) || !sol.admits_dim(4, h.odd) {
            return Err(KError::Mismatch(format!(
                "pruning {alpha}: delocalized ({}, {}) outside K-side constraints ({}, {})",
                h.even, h.odd, sol.dims[1], sol.dims[4]
            )));
        }
        let les_dims = les.instance.known_dims().expect("deloc sequences are fully known");
        if les_dims[0] != prev.0 || les_dims[3] != prev.1 {
            return Err(KError::Mismatch(format!("pruning {alpha}: sequence does not start at the previous step")));
        }
        let q = (les_dims[2], les_dims[5]);
        if q != term3 {
            return Err(KError::Mismatch(format!(
                "pruning {alpha}: node contribution {term3:?} differs from quotient cohomology {q:?}"
            )));
        }
        steps.push(GlobalStep {
            node: alpha.clone(),
            k_constraint: (sol.dims[1].clone(), sol.dims[4].clone()),
            deloc: (h.even, h.odd),
            node_term: (term3, q),
            les,
        });
        prev = (h.even, h.odd);
        last = h;
    }
    Ok(GlobalK { even: last.even, odd: last.odd, per_sector: last.per_sector, base: base_k, steps })
}

/// Node-level comparison for one node: K ranks per sector against the
/// single-node delocalized dimensions, absolute and relative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeComparison {
    pub node: String,
    pub sectors: usize,
    pub k_absolute: (usize, usize),
    pub h_absolute: (usize, usize),
    pub k_relative: Option<(usize, usize)>,
    pub h_relative: (usize, usize),
}

impl NodeComparison {
    pub fn agrees(&self) -> bool {
        self.k_absolute == self.h_absolute && self.k_relative.is_none_or(|k| k == self.h_relative)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompareReport {
    pub nodes: Vec<NodeComparison>,
    pub global: GlobalK,
}

pub fn compare_ranks(
    action: &ResolvedAction,
    sections: &SectionChoice,
    windows: &Windows,
    pruned: &BTreeSet<String>,
) -> Result<CompareReport, KError> {
    let mut nodes = Vec::new();
    for id in action.tree.sorted_nodes() {
        let data = action.node(&id)?;
        let h_absolute = single_node_cohomology(action, &id, false)?;
        let h_relative = single_node_cohomology(action, &id, true)?;
        let k_relative = if action.tree.faces_of(&id).is_empty() {
            Some((data.k.k0.free_rank(), data.k.k1.free_rank()))
        } else {
            data.k.k0_rel.as_ref().zip(data.k.k1_rel.as_ref()).map(|(a, b)| (a.free_rank(), b.free_rank()))
        };
        let cmp = NodeComparison {
            node: id.clone(),
            sectors: windows.get(&id).map_or(0, Vec::len),
            k_absolute: (data.k.k0.free_rank(), data.k.k1.free_rank()),
            h_absolute,
            k_relative,
            h_relative,
        };
        if !cmp.agrees() {
            return Err(KError::Mismatch(format!(
                "node {id}: K ranks {:?} / relative {:?} vs delocalized {:?} / {:?} in every sector",
                cmp.k_absolute, cmp.k_relative, cmp.h_absolute, cmp.h_relative
            )));
        }
        nodes.push(cmp);
    }
    let global = rational_global_k(action, sections, windows, pruned)?;
    Ok(CompareReport { nodes, global })
}
