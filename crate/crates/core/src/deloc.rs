//! The delocalized complex: twisted forms per node, augmented pull-back on
//! forms, the compatible-tuple complex over the tree, its cohomology, the
//! pruning long exact sequence and the Chern character of reduced bundles.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::basespace::exp_of_shifts;
use crate::chargroup::Character;
use crate::ktheory::{hexagon_check, HexagonVerdict, SixTermInstance};
use crate::model::{ModelError, ResolvedAction, SectionChoice, Windows};
use crate::qlin::{span_dim, QMatrix, Q};
use crate::redbun::IteratedReducedBundle;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DelocError {
    #[error("character {character:?} is not in the kernel lattice of node {node}")]
    NotInKernel { node: String, character: Character },
    #[error("window of {node} misses {character:?}, needed by face {face}")]
    Unsaturated { face: String, node: String, character: Character },
    #[error("node {node} has no window")]
    MissingWindow { node: String },
    #[error("node {node}, character {character:?}: Chern representative is not closed")]
    NotClosed { node: String, character: Character },
    #[error("face {face}, character {character:?}: {detail}")]
    Compatibility { face: String, character: Character, detail: String },
    #[error("node {0} has no Chern data")]
    MissingChern(String),
    #[error("invalid pruning: {0}")]
    Pruning(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `exp(Σ k_i L_i)` for `ĥ = Σ k_i g_i` in the kernel lattice of `node`.
pub fn ch_of_character(action: &ResolvedAction, node: &str, h: &[BigInt]) -> Result<QMatrix, DelocError> {
    let d = action.datum(node)?;
    let data = action.node(node)?;
    let k = d
        .kernel_coordinates(h)
        .ok_or_else(|| DelocError::NotInKernel { node: node.to_string(), character: h.to_vec() })?;
    Ok(exp_of_shifts(&data.complex, &data.shifts, &k))
}

/// A finitely supported table `Ĝ → C_α` of twisted forms on one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedFormSector {
    pub node: String,
    pub entries: BTreeMap<Character, Vec<Q>>,
}

fn add_into(target: &mut BTreeMap<Character, Vec<Q>>, key: Character, v: Vec<Q>) {
    match target.get_mut(&key) {
        Some(acc) => acc.iter_mut().zip(v).for_each(|(a, b)| *a += b),
        None => {
            target.insert(key, v);
        }
    }
}

fn drop_zero(entries: BTreeMap<Character, Vec<Q>>) -> BTreeMap<Character, Vec<Q>> {
    entries.into_iter().filter(|(_, v)| v.iter().any(|x| !x.is_zero())).collect()
}

/// Moves every entry onto the section representative of its restriction:
/// `v` at `ĥ + S(b̂)` becomes `exp(ĥ·L) v` at `S(b̂)`.
pub fn canonicalize_form(
    action: &ResolvedAction,
    sections: &SectionChoice,
    raw: &TwistedFormSector,
) -> Result<TwistedFormSector, DelocError> {
    let d = action.datum(&raw.node)?;
    let g = d.dual_group();
    let mut out = BTreeMap::new();
    for (ch, v) in &raw.entries {
        let ch = g.reduce(ch);
        let b = d.restrict(&ch);
        let rep = sections.lift(&action.tree, &raw.node, &b)?;
        let h = g.sub(&ch, &rep);
        let e = ch_of_character(action, &raw.node, &h)?;
        add_into(&mut out, rep, e.apply(v));
    }
    Ok(TwistedFormSector { node: raw.node.clone(), entries: drop_zero(out) })
}

/// Twist `exp(ĥ L^F)` and target sector for a deep sector `b̂` on a face.
fn face_twist(
    action: &ResolvedAction,
    sections: &SectionChoice,
    face: &str,
    b: &[BigInt],
) -> Result<(Character, Character, QMatrix), DelocError> {
    let fid = action.tree.face(face).ok_or_else(|| ModelError::MissingFace(face.to_string()))?;
    let fd = action.face(face)?;
    let lower = action.datum(&fid.lower)?;
    let deep_lift = sections.lift(&action.tree, &fid.upper, b)?;
    let k = lower.restrict(&deep_lift);
    let shallow_lift = sections.lift(&action.tree, &fid.lower, &k)?;
    let h = lower.dual_group().sub(&deep_lift, &shallow_lift);
    let coords = lower
        .kernel_coordinates(&h)
        .ok_or_else(|| DelocError::NotInKernel { node: fid.lower.clone(), character: h.clone() })?;
    Ok((k, shallow_lift, fd.twist(&coords)))
}

/// Augmented pull-back of a twisted form on the upper node of `face` to the
/// face: entries over a fixed lower character are summed after twisting.
pub fn augmented_pullback_forms(
    action: &ResolvedAction,
    sections: &SectionChoice,
    face: &str,
    v: &TwistedFormSector,
) -> Result<TwistedFormSector, DelocError> {
    let fid = action.tree.face(face).ok_or_else(|| ModelError::MissingFace(face.to_string()))?;
    let fd = action.face(face)?;
    let canon = canonicalize_form(action, sections, v)?;
    let upper = action.datum(&fid.upper)?;
    let mut out = BTreeMap::new();
    for (ch, u) in &canon.entries {
        let b = upper.restrict(ch);
        let (_, key, twist) = face_twist(action, sections, face, &b)?;
        add_into(&mut out, key, twist.apply(&fd.pullback.apply(u)));
    }
    Ok(TwistedFormSector { node: face.to_string(), entries: drop_zero(out) })
}

/// Restriction `ρ` of a canonical twisted form on the lower node to the face.
pub fn restrict_forms(
    action: &ResolvedAction,
    sections: &SectionChoice,
    face: &str,
    v: &TwistedFormSector,
) -> Result<TwistedFormSector, DelocError> {
    let fd = action.face(face)?;
    let canon = canonicalize_form(action, sections, v)?;
    let entries = canon.entries.iter().map(|(k, u)| (k.clone(), fd.restrict.apply(u))).collect();
    Ok(TwistedFormSector { node: face.to_string(), entries: drop_zero(entries) })
}

/// One copy of a node complex inside the delocalized complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub node: String,
    /// Sector `b̂ ∈ B̂_α`.
    pub character: Character,
    /// Its representative `S(α, b̂) ∈ Ĝ`.
    pub lift: Character,
    pub offset: usize,
    pub len: usize,
}

/// Constraint rows for one face and lower sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintBlock {
    pub face: String,
    pub character: Character,
    pub offset: usize,
    pub len: usize,
}

/// The part of the delocalized complex over one root sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelocBlock {
    pub root_sector: Character,
    pub slots: Vec<Slot>,
    pub dim: usize,
    /// Parity of each ambient coordinate (`true` for odd degree).
    pub odd: Vec<bool>,
    pub d: QMatrix,
    pub constraints: QMatrix,
    pub constraint_blocks: Vec<ConstraintBlock>,
    /// Bases of the compatible even and odd subspaces, as ambient columns.
    pub even_basis: QMatrix,
    pub odd_basis: QMatrix,
}

impl DelocBlock {
    pub fn slot(&self, node: &str, character: &[BigInt]) -> Option<&Slot> {
        self.slots.iter().find(|s| s.node == node && s.character == character)
    }

    pub fn parity_indices(&self, odd: bool) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.odd[i] == odd).collect()
    }

    /// Ambient coordinates belonging to the sectors of `node`.
    pub fn node_indices(&self, node: &str) -> Vec<usize> {
        self.slots.iter().filter(|s| s.node == node).flat_map(|s| s.offset..s.offset + s.len).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelocComplex {
    pub pruned: BTreeSet<String>,
    pub blocks: Vec<DelocBlock>,
}

impl DelocComplex {
    /// `d ∘ d = 0` on every block.
    pub fn d_squared_zero(&self) -> bool {
        self.blocks.iter().all(|b| (&b.d * &b.d).is_zero())
    }

    /// The compatible subspace is preserved by `d`.
    pub fn d_stable(&self) -> bool {
        self.blocks.iter().all(|b| {
            let de = &b.constraints * &(&b.d * &b.even_basis);
            let dodd = &b.constraints * &(&b.d * &b.odd_basis);
            de.is_zero() && dodd.is_zero()
        })
    }

    pub fn total_dim(&self) -> (usize, usize) {
        self.blocks.iter().fold((0, 0), |(e, o), b| (e + b.even_basis.cols(), o + b.odd_basis.cols()))
    }
}

/// Assembles the compatible-tuple complex relative to the pruned set `pruned`.
pub fn assemble_complex(
    action: &ResolvedAction,
    sections: &SectionChoice,
    windows: &Windows,
    pruned: &BTreeSet<String>,
) -> Result<DelocComplex, DelocError> {
    action.tree.check_pruned_set(pruned).map_err(|e| DelocError::Pruning(e.to_string()))?;
    let root = action.tree.root().ok_or_else(|| DelocError::Pruning("tree has no root".into()))?;
    // group slots by root sector
    let mut by_root: BTreeMap<Character, Vec<(String, Character)>> = BTreeMap::new();
    for id in action.tree.sorted_nodes() {
        if pruned.contains(&id) {
            continue;
        }
        let w = windows.get(&id).ok_or_else(|| DelocError::MissingWindow { node: id.clone() })?;
        let to_root = if id == root { None } else { Some(action.edge_map(&root, &id)?) };
        for b in w {
            let rs = match &to_root {
                Some(r) => r.apply(b),
                None => b.clone(),
            };
            by_root.entry(rs).or_default().push((id.clone(), b.clone()));
        }
    }
    let mut blocks = Vec::new();
    for (rs, members) in by_root {
        blocks.push(assemble_block(action, sections, windows, pruned, rs, members)?);
    }
    Ok(DelocComplex { pruned: pruned.clone(), blocks })
}

fn assemble_block(
    action: &ResolvedAction,
    sections: &SectionChoice,
    windows: &Windows,
    pruned: &BTreeSet<String>,
    root_sector: Character,
    members: Vec<(String, Character)>,
) -> Result<DelocBlock, DelocError> {
    let mut slots = Vec::new();
    let mut offset = 0;
    let mut odd = Vec::new();
    for (node, b) in members {
        let c = &action.node(&node)?.complex;
        let lift = sections.lift(&action.tree, &node, &b)?;
        for k in 0..c.dims().len() {
            odd.extend(std::iter::repeat_n(k % 2 == 1, c.dim(k)));
        }
        slots.push(Slot { node, character: b, lift, offset, len: c.total_dim() });
        offset += c.total_dim();
    }
    let dim = offset;
    let mut d = QMatrix::zeros(dim, dim);
    for s in &slots {
        d.set_block(s.offset, s.offset, action.node(&s.node)?.complex.total_differential());
    }
    // constraints
    let mut cblocks = Vec::new();
    let mut pieces: Vec<(usize, usize, QMatrix)> = Vec::new();
    let mut rows = 0;
    for f in &action.tree.faces {
        if pruned.contains(&f.lower) {
            continue;
        }
        let fd = action.face(&f.id)?;
        let flen = fd.complex.total_dim();
        let lower_slots: Vec<&Slot> = slots.iter().filter(|s| s.node == f.lower).collect();
        let mut row_of: BTreeMap<Character, usize> = BTreeMap::new();
        for s in &lower_slots {
            row_of.insert(s.character.clone(), rows);
            cblocks.push(ConstraintBlock { face: f.id.clone(), character: s.character.clone(), offset: rows, len: flen });
            pieces.push((rows, s.offset, fd.restrict.total().clone()));
            rows += flen;
        }
        if pruned.contains(&f.upper) {
            continue;
        }
        for s in slots.iter().filter(|s| s.node == f.upper) {
            let (k, _, twist) = face_twist(action, sections, &f.id, &s.character)?;
            let Some(&r) = row_of.get(&k) else {
                let in_window = windows.get(&f.lower).is_some_and(|w| w.contains(&k));
                if in_window {
                    continue;
                }
                return Err(DelocError::Unsaturated { face: f.id.clone(), node: f.lower.clone(), character: k });
            };
            pieces.push((r, s.offset, (&twist * fd.pullback.total()).neg()));
        }
    }
    let mut constraints = QMatrix::zeros(rows, dim);
    for (r, c, m) in pieces {
        constraints.add_block(r, c, &m);
    }
    let even_idx: Vec<usize> = (0..dim).filter(|&i| !odd[i]).collect();
    let odd_idx: Vec<usize> = (0..dim).filter(|&i| odd[i]).collect();
    let even_basis = compatible_basis(&constraints, &even_idx, dim);
    let odd_basis = compatible_basis(&constraints, &odd_idx, dim);
    Ok(DelocBlock { root_sector, slots, dim, odd, d, constraints, constraint_blocks: cblocks, even_basis, odd_basis })
}

fn select_columns(m: &QMatrix, idx: &[usize]) -> QMatrix {
    QMatrix::from_columns(&idx.iter().map(|&j| m.column(j)).collect::<Vec<_>>(), m.rows())
}

fn embed(vectors: &[Vec<Q>], idx: &[usize], dim: usize) -> QMatrix {
    let mut m = QMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for (x, &i) in v.iter().zip(idx) {
            m[(i, j)] = x.clone();
        }
    }
    m
}

fn compatible_basis(constraints: &QMatrix, idx: &[usize], dim: usize) -> QMatrix {
    let sub = select_columns(constraints, idx);
    let kernel = if sub.rows() == 0 {
        (0..idx.len()).map(|j| crate::basespace::unit_vector(idx.len(), j)).collect()
    } else {
        sub.kernel()
    };
    embed(&kernel, idx, dim)
}

/// Even and odd cohomology dimensions with the per-root-sector breakdown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelocCohomology {
    pub even: usize,
    pub odd: usize,
    pub per_sector: Vec<(Character, usize, usize)>,
}

pub fn deloc_cohomology(c: &DelocComplex) -> DelocCohomology {
    let mut even = 0;
    let mut odd = 0;
    let mut per_sector = Vec::new();
    for b in &c.blocks {
        let re = (&b.d * &b.even_basis).rank();
        let ro = (&b.d * &b.odd_basis).rank();
        let he = b.even_basis.cols() - re - ro;
        let ho = b.odd_basis.cols() - ro - re;
        even += he;
        odd += ho;
        per_sector.push((b.root_sector.clone(), he, ho));
    }
    DelocCohomology { even, odd, per_sector }
}

/// Cohomology of a single node's complex, absolute or relative to all of
/// its faces.
pub fn single_node_cohomology(action: &ResolvedAction, node: &str, relative: bool) -> Result<(usize, usize), DelocError> {
    let data = action.node(node)?;
    let c = &data.complex;
    let n = c.total_dim();
    let odd: Vec<bool> = (0..n).map(|i| c.degree_of(i) % 2 == 1).collect();
    let mut constraints = QMatrix::zeros(0, n);
    if relative {
        for f in action.tree.faces_of(node) {
            constraints = constraints.vcat(action.face(&f.id)?.restrict.total());
        }
    }
    let even_idx: Vec<usize> = (0..n).filter(|&i| !odd[i]).collect();
    let odd_idx: Vec<usize> = (0..n).filter(|&i| odd[i]).collect();
    let eb = compatible_basis(&constraints, &even_idx, n);
    let ob = compatible_basis(&constraints, &odd_idx, n);
    let d = c.total_differential();
    let re = (d * &eb).rank();
    let ro = (d * &ob).rank();
    Ok((eb.cols() - re - ro, ob.cols() - ro - re))
}

/// The pruning six-term sequence
/// `H(P∪{α}) → H(P) → H(Q) → ...` with `Q` the quotient complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesReport {
    pub node: String,
    pub pruned: BTreeSet<String>,
    pub instance: SixTermInstance,
    pub verdict: HexagonVerdict,
}

pub fn les_of_pruning(
    action: &ResolvedAction,
    sections: &SectionChoice,
    windows: &Windows,
    pruned: &BTreeSet<String>,
    alpha: &str,
) -> Result<LesReport, DelocError> {
    if pruned.contains(alpha) {
        return Err(DelocError::Pruning(format!("{alpha} is already pruned")));
    }
    let mut bigger = pruned.clone();
    bigger.insert(alpha.to_string());
    action.tree.check_pruned_set(&bigger).map_err(|e| DelocError::Pruning(e.to_string()))?;
    let c = assemble_complex(action, sections, windows, pruned)?;
    let mut dims = [0usize; 6];
    let mut ranks = [0usize; 6];
    for b in &c.blocks {
        let (bd, br) = block_les(b, alpha);
        for i in 0..6 {
            dims[i] += bd[i];
            ranks[i] += br[i];
        }
    }
    let instance = SixTermInstance::known(dims, ranks);
    let verdict = hexagon_check(&instance).expect("fully known instance");
    Ok(LesReport { node: alpha.to_string(), pruned: pruned.clone(), instance, verdict })
}

fn cols(m: &QMatrix) -> Vec<Vec<Q>> {
    m.column_vecs()
}

fn concat(a: &QMatrix, b: &QMatrix) -> Vec<Vec<Q>> {
    let mut v = cols(a);
    v.extend(cols(b));
    v
}

fn image_of(basis: &QMatrix, coeffs: Vec<Vec<Q>>) -> QMatrix {
    let k = QMatrix::from_columns(&coeffs, basis.cols());
    basis * &k
}

fn kernel_of(m: &QMatrix) -> Vec<Vec<Q>> {
    if m.rows() == 0 {
        return (0..m.cols()).map(|j| crate::basespace::unit_vector(m.cols(), j)).collect();
    }
    m.kernel()
}

/// Dimensions and map ranks of the six-term sequence on one block.
fn block_les(b: &DelocBlock, alpha: &str) -> ([usize; 6], [usize; 6]) {
    let n = b.dim;
    let alpha_idx = b.node_indices(alpha);
    let project = |m: &QMatrix| -> QMatrix {
        let rows: Vec<Vec<Q>> = alpha_idx.iter().map(|&i| m.row(i)).collect();
        QMatrix::from_rows(rows, m.cols())
    };
    struct Parity {
        dv: QMatrix,
        z: QMatrix,
        vp: QMatrix,
        zp: QMatrix,
        zq: QMatrix,
    }
    let build = |v: &QMatrix| -> Parity {
        let dv = &b.d * v;
        let z = image_of(v, kernel_of(&dv));
        let vp = image_of(v, kernel_of(&project(v)));
        let dvp = &b.d * &vp;
        let zp = image_of(&vp, kernel_of(&dvp));
        let zq = image_of(v, kernel_of(&project(&dv)));
        Parity { dv, z, vp, zp, zq }
    };
    let even = build(&b.even_basis);
    let odd = build(&b.odd_basis);
    let mut dims = [0; 6];
    let mut ranks = [0; 6];
    for (pos, (this, other)) in [(&even, &odd), (&odd, &even)].into_iter().enumerate() {
        let base = pos * 3;
        // boundaries in this parity come from the other parity
        let bnd = &other.dv;
        let bnd_p = &b.d * &other.vp;
        let bq = concat(bnd, &this.vp);
        let dim_b = span_dim(&cols(bnd), n);
        let dim_bp = span_dim(&cols(&bnd_p), n);
        let dim_bq = span_dim(&bq, n);
        let h_sub = span_dim(&cols(&this.zp), n) - dim_bp;
        let h_full = span_dim(&cols(&this.z), n) - dim_b;
        let h_quot = span_dim(&cols(&this.zq), n) - dim_bq;
        dims[base] = h_sub;
        dims[base + 1] = h_full;
        dims[base + 2] = h_quot;
        ranks[base] = span_dim(&concat(&this.zp, bnd), n) - dim_b;
        let mut zb = cols(&this.z);
        zb.extend(bq.iter().cloned());
        ranks[base + 1] = span_dim(&zb, n) - dim_bq;
        // connecting map into the other parity of the subcomplex
        let dzq = &b.d * &this.zq;
        let other_bp = &b.d * &this.vp;
        let dim_other_bp = span_dim(&cols(&other_bp), n);
        ranks[base + 2] = span_dim(&concat(&dzq, &other_bp), n) - dim_other_bp;
    }
    (dims, ranks)
}

/// The Chern character of an iterated reduced bundle as a tuple in the
/// delocalized complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChernTuple {
    pub forms: BTreeMap<String, TwistedFormSector>,
}

pub fn chern_character(
    action: &ResolvedAction,
    sections: &SectionChoice,
    bundle: &IteratedReducedBundle,
) -> Result<ChernTuple, DelocError> {
    let mut forms = BTreeMap::new();
    for (node, w) in &bundle.nodes {
        let data = action.node(node)?;
        let chern = data.chern.as_ref().ok_or_else(|| DelocError::MissingChern(node.clone()))?;
        let mut entries = BTreeMap::new();
        for (ch, x) in &w.entries {
            let v = chern.evaluate(x);
            if !data.complex.total_differential().apply(&v).iter().all(Zero::is_zero) {
                return Err(DelocError::NotClosed { node: node.clone(), character: ch.clone() });
            }
            entries.insert(ch.clone(), v);
        }
        let sector = TwistedFormSector { node: node.clone(), entries };
        forms.insert(node.clone(), canonicalize_form(action, sections, &sector)?);
    }
    let tuple = ChernTuple { forms };
    check_compatible(action, sections, &tuple)?;
    Ok(tuple)
}

/// Face conditions `ρ(u_α) = π^♯(u_β)` for a tuple of twisted forms.
pub fn check_compatible(action: &ResolvedAction, sections: &SectionChoice, t: &ChernTuple) -> Result<(), DelocError> {
    for f in &action.tree.faces {
        let empty_lo = TwistedFormSector { node: f.lower.clone(), entries: BTreeMap::new() };
        let empty_hi = TwistedFormSector { node: f.upper.clone(), entries: BTreeMap::new() };
        let lo = restrict_forms(action, sections, &f.id, t.forms.get(&f.lower).unwrap_or(&empty_lo))?;
        let hi = augmented_pullback_forms(action, sections, &f.id, t.forms.get(&f.upper).unwrap_or(&empty_hi))?;
        let keys: BTreeSet<&Character> = lo.entries.keys().chain(hi.entries.keys()).collect();
        for k in keys {
            if lo.entries.get(k) != hi.entries.get(k) {
                return Err(DelocError::Compatibility {
                    face: f.id.clone(),
                    character: k.clone(),
                    detail: "restriction and augmented pull-back differ".into(),
                });
            }
        }
    }
    Ok(())
}

impl ChernTuple {
    /// Ambient vector of the tuple in a block, if all of its sectors fit.
    pub fn in_block(&self, action: &ResolvedAction, block: &DelocBlock) -> Result<Option<Vec<Q>>, DelocError> {
        let mut v = vec![Q::zero(); block.dim];
        for (node, form) in &self.forms {
            let d = action.datum(node)?;
            for (ch, u) in &form.entries {
                let b = d.restrict(ch);
                match block.slot(node, &b) {
                    Some(s) => {
                        for (i, x) in u.iter().enumerate() {
                            v[s.offset + i] += x;
                        }
                    }
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(v))
    }
}

/// Dimensions of the delocalized complex for a growing sequence of windows,
/// flagging where they stop changing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizationReport {
    pub sizes: Vec<usize>,
    pub dims: Vec<(usize, usize)>,
    /// First size from which the dimensions no longer change, if any.
    pub stable_from: Option<usize>,
    /// Whether the stable point covers the declared support bound.
    pub covers_support: bool,
}

pub fn window_stabilization(
    action: &ResolvedAction,
    sections: &SectionChoice,
    windows: &[(usize, Windows)],
    pruned: &BTreeSet<String>,
    support_bound: Option<usize>,
) -> Result<StabilizationReport, DelocError> {
    let mut sizes = Vec::new();
    let mut dims = Vec::new();
    for (m, w) in windows {
        let c = assemble_complex(action, sections, w, pruned)?;
        let h = deloc_cohomology(&c);
        sizes.push(*m);
        dims.push((h.even, h.odd));
    }
    let mut stable_from = None;
    for i in (0..dims.len()).rev() {
        if i + 1 < dims.len() && dims[i] != dims[i + 1] {
            break;
        }
        if i + 1 < dims.len() {
            stable_from = Some(sizes[i]);
        }
    }
    let covers_support = match (stable_from, support_bound) {
        (Some(s), Some(b)) => s >= b,
        (Some(_), None) => true,
        _ => false,
    };
    Ok(StabilizationReport { sizes, dims, stable_from, covers_support })
}

/// Factorization through a declared corner: along `α < β < γ`, the augmented
/// pull-back of `v` to the corner via the face `F_{αγ}` equals the route
/// through `F_{βγ}` followed by the twisted sum over `β`'s sectors.
pub fn corner_factorization(
    action: &ResolvedAction,
    sections: &SectionChoice,
    corner: usize,
    v: &TwistedFormSector,
) -> Result<bool, DelocError> {
    let chain = &action.tree.corners[corner];
    let cd = &action.corners[corner];
    let alpha = &chain.nodes[0];
    let [_, f_ag, f_bg] = &chain.faces;
    let direct = augmented_pullback_forms(action, sections, f_ag, v)?;
    let mut lhs: BTreeMap<Character, Vec<Q>> = BTreeMap::new();
    for (k, u) in direct.entries {
        add_into(&mut lhs, k, cd.from_upper.apply(&u));
    }
    let via = augmented_pullback_forms(action, sections, f_bg, v)?;
    let da = action.datum(alpha)?;
    let mut rhs: BTreeMap<Character, Vec<Q>> = BTreeMap::new();
    for (c_lift, u) in via.entries {
        let k = da.restrict(&c_lift);
        let a_lift = sections.lift(&action.tree, alpha, &k)?;
        let h = da.dual_group().sub(&c_lift, &a_lift);
        let coords = da
            .kernel_coordinates(&h)
            .ok_or_else(|| DelocError::NotInKernel { node: alpha.clone(), character: h.clone() })?;
        let twist = exp_of_shifts(&cd.complex, &cd.shifts, &coords);
        add_into(&mut rhs, a_lift, twist.apply(&cd.from_deep.apply(&u)));
    }
    Ok(drop_zero(lhs) == drop_zero(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basespace::{CochainComplex, GradedMap, KData, NodeSpaceData};
    use crate::chargroup::SubgroupDatum;
    use crate::fgab::{ints, AbHom, FgAbGroup, IntMatrix};
    use crate::fixtures::{generate_fixture, Fixture};
    use crate::itspace::{IsotropyTree, TreeNode};
    use crate::qlin::q;
    use crate::redbun::{IteratedReducedBundle, ReducedBundleNode};

    fn single(group: FgAbGroup, dual: FgAbGroup, complex: CochainComplex) -> ResolvedAction {
        let r = if dual.ngens() == 0 {
            AbHom::zero(&group, &dual)
        } else {
            AbHom::new(group.clone(), dual, IntMatrix::identity(group.ngens())).unwrap()
        };
        let datum = SubgroupDatum::new(r).unwrap();
        let n = datum.kernel_generators().len();
        let k1 = if complex.dims().len() > 1 { FgAbGroup::free(1) } else { FgAbGroup::trivial() };
        let data = NodeSpaceData {
            shifts: vec![GradedMap::zero(&complex, &complex, 2); n],
            k: KData::untwisted(FgAbGroup::free(1), k1, n, IntMatrix::from_i64(&[&[1]])),
            chern: None,
            complex,
        };
        ResolvedAction {
            tree: IsotropyTree {
                group,
                nodes: vec![TreeNode { id: "x".into(), datum }],
                order: Default::default(),
                faces: vec![],
                corners: vec![],
            },
            nodes: BTreeMap::from([("x".to_string(), data)]),
            faces: BTreeMap::new(),
            corners: vec![],
        }
        .validated()
        .unwrap()
    }

    fn cohomology_at(f: &Fixture, m: usize, pruned: &[&str]) -> DelocCohomology {
        let w = f.windows(m).unwrap();
        let s = f.sections(m).unwrap();
        let p = pruned.iter().map(|x| x.to_string()).collect();
        let c = assemble_complex(&f.action, &s, &w, &p).unwrap();
        assert!(c.d_squared_zero());
        deloc_cohomology(&c)
    }

    fn sector(node: &str, entries: &[(i64, Vec<Q>)]) -> TwistedFormSector {
        TwistedFormSector { node: node.into(), entries: entries.iter().map(|(c, v)| (ints(&[*c]), v.clone())).collect() }
    }

    #[test]
    fn zero_shift_twist_is_identity() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        for k in [-3, 0, 5] {
            assert_eq!(ch_of_character(&f.action, "0", &ints(&[k])).unwrap(), QMatrix::identity(3));
        }
        assert_eq!(ch_of_character(&f.action, "N", &ints(&[0])).unwrap(), QMatrix::identity(1));
    }

    #[test]
    fn twist_truncates_to_first_order_and_inverts() {
        let f = generate_fixture("projective_plane", None).unwrap();
        let l = f.action.node("0").unwrap().shifts[0].total().clone();
        let n = l.rows();
        for k in [-2i64, 1, 3] {
            let e = ch_of_character(&f.action, "0", &ints(&[k])).unwrap();
            assert_eq!(e, QMatrix::identity(n).add(&l.scale(&q(k))));
            let inv = ch_of_character(&f.action, "0", &ints(&[-k])).unwrap();
            assert_eq!(&e * &inv, QMatrix::identity(n));
        }
    }

    #[test]
    fn canonicalize_form_moves_and_twists() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        let s = f.sections(1).unwrap();
        let raw = sector("0", &[(2, vec![q(1), q(0), q(0)]), (-1, vec![q(0), q(2), q(1)])]);
        let c = canonicalize_form(&f.action, &s, &raw).unwrap();
        assert_eq!(c, sector("0", &[(0, vec![q(1), q(2), q(1)])]));
        assert_eq!(canonicalize_form(&f.action, &s, &c).unwrap(), c);

        let p = generate_fixture("projective_plane", None).unwrap();
        let s = p.sections(1).unwrap();
        let data = p.action.node("0").unwrap();
        let unit = data.chern.as_ref().unwrap().representatives[0].clone();
        let c_form = data.chern.as_ref().unwrap().representatives[1].clone();
        let moved = canonicalize_form(&p.action, &s, &sector("0", &[(3, unit.clone())])).unwrap();
        let hand: Vec<Q> = unit.iter().zip(&c_form).map(|(a, b)| a + q(3) * b).collect();
        assert_eq!(moved, sector("0", &[(0, hand)]));
    }

    #[test]
    fn pole_scalars_sum_on_the_face() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        let s = f.sections(1).unwrap();
        let v = sector("N", &[(0, vec![q(2)]), (1, vec![q(1)])]);
        let out = augmented_pullback_forms(&f.action, &s, "0N", &v).unwrap();
        assert_eq!(out.entries, BTreeMap::from([(ints(&[0]), vec![q(3)])]));
    }

    #[test]
    fn pullback_to_inner_sphere_carries_first_order_twist() {
        let f = generate_fixture("projective_plane", None).unwrap();
        let s = f.sections(1).unwrap();
        let face = f.action.face("0p2").unwrap();
        let root = f.action.node("0").unwrap();
        let reps = &root.chern.as_ref().unwrap().representatives;
        let v = sector("p2", &[(2, vec![q(1)])]);
        let out = augmented_pullback_forms(&f.action, &s, "0p2", &v).unwrap();
        let unit = face.restrict.apply(&reps[0]);
        let c = face.restrict.apply(&reps[1]);
        let hand: Vec<Q> = unit.iter().zip(&c).map(|(a, b)| a + q(2) * b).collect();
        assert_eq!(out.entries, BTreeMap::from([(ints(&[0]), hand)]));
    }

    #[test]
    fn pullback_commutes_with_d() {
        let f = generate_fixture("projective_plane", None).unwrap();
        let s = f.sections(1).unwrap();
        let fd = f.action.face("0P").unwrap();
        let yp = &f.action.node("P").unwrap().complex;
        let v = sector("P", &[(0, vec![q(1), q(0), q(0)]), (1, vec![q(0), q(2), q(0)])]);
        let dv = TwistedFormSector {
            node: "P".into(),
            entries: v.entries.iter().map(|(k, u)| (k.clone(), yp.total_differential().apply(u))).collect(),
        };
        let lhs = augmented_pullback_forms(&f.action, &s, "0P", &dv).unwrap();
        let rhs = augmented_pullback_forms(&f.action, &s, "0P", &v).unwrap();
        let d_rhs: BTreeMap<_, _> = rhs
            .entries
            .iter()
            .map(|(k, u)| (k.clone(), fd.complex.total_differential().apply(u)))
            .filter(|(_, u)| u.iter().any(|x| !x.is_zero()))
            .collect();
        assert_eq!(lhs.entries, d_rhs);
    }

    #[test]
    fn single_free_node_is_its_complex() {
        let a = single(FgAbGroup::trivial(), FgAbGroup::trivial(), CochainComplex::interval());
        let s = SectionChoice::canonical(&a.tree).unwrap();
        let w = crate::model::materialize_windows(&a.tree, &BTreeMap::new(), 0).unwrap();
        let c = assemble_complex(&a, &s, &w, &BTreeSet::new()).unwrap();
        assert_eq!(c.total_dim(), (2, 1));
        let h = deloc_cohomology(&c);
        assert_eq!((h.even, h.odd), (1, 0));

        let circle = single(FgAbGroup::trivial(), FgAbGroup::trivial(), CochainComplex::circle());
        let c = assemble_complex(&circle, &s, &w, &BTreeSet::new()).unwrap();
        let h = deloc_cohomology(&c);
        assert_eq!((h.even, h.odd), (1, 1));
    }

    #[test]
    fn fixed_point_of_torus_with_one_character() {
        let t = FgAbGroup::free(2);
        let a = single(t.clone(), t, CochainComplex::point());
        let s = SectionChoice::canonical(&a.tree).unwrap();
        let w: Windows = BTreeMap::from([("x".to_string(), vec![ints(&[0, 0])])]);
        let h = deloc_cohomology(&assemble_complex(&a, &s, &w, &BTreeSet::new()).unwrap());
        assert_eq!((h.even, h.odd), (1, 0));
    }

    #[test]
    fn sphere_counts() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        for m in 0..3 {
            let h = cohomology_at(&f, m, &[]);
            assert_eq!((h.even, h.odd), (4 * m + 1, 0));
        }
        let both = cohomology_at(&f, 2, &["N", "S"]);
        assert_eq!((both.even, both.odd), (0, 1));
    }

    #[test]
    fn pruning_a_pole_is_exact() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        let w = f.windows(2).unwrap();
        let s = f.sections(2).unwrap();
        let r = les_of_pruning(&f.action, &s, &w, &BTreeSet::new(), "N").unwrap();
        assert!(r.verdict.is_exact(), "{}", r.instance);
        assert_eq!(r.instance.known_dims(), Some([4, 9, 5, 0, 0, 0]));
    }

    #[test]
    fn chern_of_sphere_bundle() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        let s = f.sections(1).unwrap();
        let w = IteratedReducedBundle {
            nodes: [
                ("0", vec![(0, 3)]),
                ("N", vec![(0, 2), (1, 1)]),
                ("S", vec![(0, 3)]),
            ]
            .into_iter()
            .map(|(n, e)| {
                let entries = e.into_iter().map(|(c, x)| (ints(&[c]), ints(&[x]))).collect();
                (n.to_string(), ReducedBundleNode { node: n.to_string(), entries })
            })
            .collect(),
        };
        let t = chern_character(&f.action, &s, &w).unwrap();
        assert_eq!(t.forms["N"], sector("N", &[(0, vec![q(2)]), (1, vec![q(1)])]));
        assert_eq!(t.forms["0"], sector("0", &[(0, vec![q(3), q(3), q(0)])]));
        let c = assemble_complex(&f.action, &s, &f.windows(1).unwrap(), &BTreeSet::new()).unwrap();
        assert!(t.in_block(&f.action, &c.blocks[0]).unwrap().is_some());
    }

    #[test]
    fn sphere_windows_do_not_stabilize() {
        let f = generate_fixture("sphere_rotation", None).unwrap();
        let s = f.sections(3).unwrap();
        let ws: Vec<_> = (0..4).map(|m| (m, f.windows(m).unwrap())).collect();
        let r = window_stabilization(&f.action, &s, &ws, &BTreeSet::new(), None).unwrap();
        assert_eq!(r.dims, vec![(1, 0), (5, 0), (9, 0), (13, 0)]);
        assert_eq!(r.stable_from, None);
    }
}
