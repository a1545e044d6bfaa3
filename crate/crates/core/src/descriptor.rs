//! JSON action descriptors.
//!
//! Integers are decimal strings and rationals are `"p/q"` strings so that
//! no value passes through a float. Matrices are row-major arrays of rows.
//! Sizes (free ranks, cochain dimensions, degrees) are plain JSON numbers.
//! Unknown fields are rejected and parse errors carry the JSON path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::basespace::{ChernData, CochainComplex, CornerData, FaceData, GradedMap, KData, NodeSpaceData};
use crate::chargroup::SubgroupDatum;
use crate::fgab::{AbHom, FgAbGroup, IntMatrix};
use crate::fixtures::{Expected, Fixture};
use crate::itspace::{CornerChain, FaceId, IsotropyTree, TreeNode};
use crate::model::{ResolvedAction, WindowRule};
use crate::qlin::{QMatrix, Q};
use crate::redbun::{IteratedReducedBundle, ReducedBundleNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("invalid action: {0}")]
    Model(String),
}

fn invalid(path: impl Into<String>, message: impl fmt::Display) -> DescriptorError {
    DescriptorError::Invalid { path: path.into(), message: message.to_string() }
}

/// An exact integer written as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int(pub BigInt);

/// An exact rational written as `"p/q"` or a decimal integer string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rat(pub Q);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct StrVisitor(&'static str);

impl Visitor<'_> for StrVisitor {
    type Value = String;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.0)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<String, E> {
        Ok(v.to_string())
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = d.deserialize_str(StrVisitor("an integer as a decimal string"))?;
        BigInt::from_str(s.trim()).map(Int).map_err(|_| de::Error::custom(format!("not a decimal integer: {s:?}")))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = d.deserialize_str(StrVisitor("a rational as a \"p/q\" string"))?;
        match s.trim().split_once('/') {
            Some((_, den)) if den.trim().trim_start_matches(['+', '-']).chars().all(|c| c == '0') => {
                Err(de::Error::custom(format!("zero denominator: {s:?}")))
            }
            _ => Q::from_str(s.trim()).map(Rat).map_err(|_| de::Error::custom(format!("not a rational: {s:?}"))),
        }
    }
}

type IntVec = Vec<Int>;
type IntRows = Vec<Vec<Int>>;
type RatRows = Vec<Vec<Rat>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDesc {
    pub free_rank: usize,
    #[serde(default)]
    pub torsion: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropyDesc {
    /// The dual `B̂` of the isotropy group.
    pub dual: GroupDesc,
    /// Restriction `Ĝ → B̂`.
    pub restriction: IntRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_generators: Option<IntRows>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDesc {
    pub dims: Vec<usize>,
    /// `differentials[k]` maps degree `k` to degree `k+1`.
    pub differentials: Vec<RatRows>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDesc {
    pub degree: usize,
    /// Matrix on total spaces.
    pub matrix: RatRows,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KDesc {
    pub k0: GroupDesc,
    pub k1: GroupDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_rel: Option<GroupDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1_rel: Option<GroupDesc>,
    pub shift_k0: Vec<IntRows>,
    pub shift_k1: Vec<IntRows>,
    /// Rank homomorphism `K⁰ → Z` as a one-row matrix.
    pub dimension: IntRows,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDesc {
    pub id: String,
    pub isotropy: IsotropyDesc,
    pub complex: ComplexDesc,
    pub shifts: Vec<MapDesc>,
    pub k: KDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chern: Option<RatRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDesc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceDesc {
    pub id: String,
    pub lower: String,
    pub upper: String,
    pub complex: ComplexDesc,
    pub shifts: Vec<MapDesc>,
    pub restrict: MapDesc,
    pub pullback: MapDesc,
    pub k0: GroupDesc,
    pub k_shifts: Vec<IntRows>,
    pub k_restrict: IntRows,
    pub k_pullback: IntRows,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerDesc {
    pub nodes: [String; 3],
    pub faces: [String; 3],
    pub complex: ComplexDesc,
    pub shifts: Vec<MapDesc>,
    pub from_lower: MapDesc,
    pub from_upper: MapDesc,
    pub from_deep: MapDesc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowDesc {
    Radius { stride: Int, offsets: IntVec },
    Explicit(IntRows),
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDesc {
    pub character: IntVec,
    pub class: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDesc {
    pub label: String,
    pub nodes: BTreeMap<String, Vec<EntryDesc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedDesc {
    pub window: usize,
    pub even: usize,
    pub odd: usize,
    pub basis: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDescriptor {
    #[serde(default)]
    pub name: String,
    pub group: GroupDesc,
    pub nodes: Vec<NodeDesc>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
    #[serde(default)]
    pub faces: Vec<FaceDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corners: Vec<CornerDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bundles: Vec<BundleDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<ExpectedDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Parses descriptor text; schema errors name the offending JSON path.
pub fn parse_descriptor(text: &str) -> Result<ActionDescriptor, DescriptorError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        DescriptorError::Schema { path, message: e.into_inner().to_string() }
    })
}

pub fn to_json(d: &ActionDescriptor) -> String {
    serde_json::to_string_pretty(d).expect("descriptor serializes")
}

/// Parses and builds in one step.
pub fn load_fixture(text: &str) -> Result<Fixture, DescriptorError> {
    parse_descriptor(text)?.build()
}

fn ints(v: &[Int]) -> Vec<BigInt> {
    v.iter().map(|x| x.0.clone()).collect()
}

fn int_vec(v: &[BigInt]) -> IntVec {
    v.iter().cloned().map(Int).collect()
}

fn group(path: &str, g: &GroupDesc) -> Result<FgAbGroup, DescriptorError> {
    FgAbGroup::new(g.free_rank, ints(&g.torsion)).map_err(|e| invalid(path, e))
}

fn group_desc(g: &FgAbGroup) -> GroupDesc {
    GroupDesc { free_rank: g.free_rank(), torsion: int_vec(g.torsion()) }
}

fn int_matrix(path: &str, rows: &IntRows, ncols: usize) -> Result<IntMatrix, DescriptorError> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(invalid(format!("{path}[{i}]"), format!("row has {} entries, expected {ncols}", r.len())));
    }
    Ok(IntMatrix::from_rows(rows.iter().map(|r| ints(r)).collect(), ncols))
}

fn int_rows(m: &IntMatrix) -> IntRows {
    m.row_vecs().iter().map(|r| int_vec(r)).collect()
}

fn hom(path: &str, domain: &FgAbGroup, codomain: &FgAbGroup, rows: &IntRows) -> Result<AbHom, DescriptorError> {
    if rows.len() != codomain.ngens() {
        return Err(invalid(path, format!("{} rows, expected {}", rows.len(), codomain.ngens())));
    }
    let m = int_matrix(path, rows, domain.ngens())?;
    AbHom::new(domain.clone(), codomain.clone(), m).map_err(|e| invalid(path, e))
}

fn q_matrix(path: &str, rows: &RatRows, nrows: usize, ncols: usize) -> Result<QMatrix, DescriptorError> {
    if rows.len() != nrows {
        return Err(invalid(path, format!("{} rows, expected {nrows}", rows.len())));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(invalid(format!("{path}[{i}]"), format!("row has {} entries, expected {ncols}", r.len())));
    }
    Ok(QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect(), ncols))
}

fn rat_rows(m: &QMatrix) -> RatRows {
    m.row_vecs().into_iter().map(|r| r.into_iter().map(Rat).collect()).collect()
}

fn complex(path: &str, c: &ComplexDesc) -> Result<CochainComplex, DescriptorError> {
    let mut ds = Vec::new();
    for (k, d) in c.differentials.iter().enumerate() {
        let rows = c.dims.get(k + 1).copied().unwrap_or(0);
        let cols = c.dims.get(k).copied().unwrap_or(0);
        ds.push(q_matrix(&format!("{path}.differentials[{k}]"), d, rows, cols)?);
    }
    CochainComplex::new(c.dims.clone(), ds).map_err(|e| invalid(path, e))
}

fn complex_desc(c: &CochainComplex) -> ComplexDesc {
    ComplexDesc { dims: c.dims().to_vec(), differentials: c.differentials().iter().map(rat_rows).collect() }
}

fn map(path: &str, src: &CochainComplex, dst: &CochainComplex, m: &MapDesc) -> Result<GradedMap, DescriptorError> {
    let total = q_matrix(&format!("{path}.matrix"), &m.matrix, dst.total_dim(), src.total_dim())?;
    GradedMap::new(src, dst, m.degree, total).map_err(|e| invalid(path, e))
}

fn map_desc(m: &GradedMap) -> MapDesc {
    MapDesc { degree: m.degree(), matrix: rat_rows(m.total()) }
}

fn shifts(path: &str, c: &CochainComplex, list: &[MapDesc]) -> Result<Vec<GradedMap>, DescriptorError> {
    list.iter().enumerate().map(|(i, m)| map(&format!("{path}.shifts[{i}]"), c, c, m)).collect()
}

fn window(path: &str, w: &WindowDesc) -> Result<WindowRule, DescriptorError> {
    let small = |x: &Int| -> Result<i64, DescriptorError> {
        i64::try_from(&x.0).map_err(|_| invalid(path, format!("{} does not fit a machine integer", x.0)))
    };
    Ok(match w {
        WindowDesc::Radius { stride, offsets } => WindowRule::Radius {
            stride: small(stride)?,
            offsets: offsets.iter().map(small).collect::<Result<_, _>>()?,
        },
        WindowDesc::Explicit(list) => WindowRule::Explicit(list.iter().map(|c| ints(c)).collect()),
        WindowDesc::Full => WindowRule::Full,
    })
}

fn window_desc(w: &WindowRule) -> WindowDesc {
    match w {
        WindowRule::Radius { stride, offsets } => WindowDesc::Radius {
            stride: Int((*stride).into()),
            offsets: offsets.iter().map(|&o| Int(o.into())).collect(),
        },
        WindowRule::Explicit(list) => WindowDesc::Explicit(list.iter().map(|c| int_vec(c)).collect()),
        WindowRule::Full => WindowDesc::Full,
    }
}

fn kdata(path: &str, k: &KDesc) -> Result<KData, DescriptorError> {
    let k0 = group(&format!("{path}.k0"), &k.k0)?;
    let k1 = group(&format!("{path}.k1"), &k.k1)?;
    let autos = |name: &str, g: &FgAbGroup, list: &[IntRows]| -> Result<Vec<AbHom>, DescriptorError> {
        list.iter().enumerate().map(|(i, m)| hom(&format!("{path}.{name}[{i}]"), g, g, m)).collect()
    };
    Ok(KData {
        shift_k0: autos("shift_k0", &k0, &k.shift_k0)?,
        shift_k1: autos("shift_k1", &k1, &k.shift_k1)?,
        dimension: hom(&format!("{path}.dimension"), &k0, &FgAbGroup::free(1), &k.dimension)?,
        k0_rel: k.k0_rel.as_ref().map(|g| group(&format!("{path}.k0_rel"), g)).transpose()?,
        k1_rel: k.k1_rel.as_ref().map(|g| group(&format!("{path}.k1_rel"), g)).transpose()?,
        k0,
        k1,
    })
}

fn kdesc(k: &KData) -> KDesc {
    KDesc {
        k0: group_desc(&k.k0),
        k1: group_desc(&k.k1),
        k0_rel: k.k0_rel.as_ref().map(group_desc),
        k1_rel: k.k1_rel.as_ref().map(group_desc),
        shift_k0: k.shift_k0.iter().map(|h| int_rows(h.matrix())).collect(),
        shift_k1: k.shift_k1.iter().map(|h| int_rows(h.matrix())).collect(),
        dimension: int_rows(k.dimension.matrix()),
    }
}

fn class_len(path: &str, x: &[Int], n: usize) -> Result<Vec<BigInt>, DescriptorError> {
    if x.len() != n {
        return Err(invalid(path, format!("length {}, expected {n}", x.len())));
    }
    Ok(ints(x))
}

impl ActionDescriptor {
    /// Builds and validates the action, window rules and bundles.
    pub fn build(&self) -> Result<Fixture, DescriptorError> {
        let g = group("group", &self.group)?;
        let mut tree_nodes = Vec::new();
        let mut nodes = BTreeMap::new();
        let mut rules = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let p = format!("nodes[{i}]");
            let dual = group(&format!("{p}.isotropy.dual"), &n.isotropy.dual)?;
            let r = hom(&format!("{p}.isotropy.restriction"), &g, &dual, &n.isotropy.restriction)?;
            let datum = match &n.isotropy.kernel_generators {
                Some(gens) => {
                    let gens = gens
                        .iter()
                        .enumerate()
                        .map(|(j, x)| class_len(&format!("{p}.isotropy.kernel_generators[{j}]"), x, g.ngens()))
                        .collect::<Result<_, _>>()?;
                    SubgroupDatum::with_generators(r, gens)
                }
                None => SubgroupDatum::new(r),
            }
            .map_err(|e| invalid(format!("{p}.isotropy"), e))?;
            tree_nodes.push(TreeNode { id: n.id.clone(), datum });
            let c = complex(&format!("{p}.complex"), &n.complex)?;
            let k = kdata(&format!("{p}.k"), &n.k)?;
            let chern = match &n.chern {
                Some(reps) => {
                    let reps = reps
                        .iter()
                        .enumerate()
                        .map(|(j, v)| {
                            if v.len() != c.total_dim() {
                                return Err(invalid(format!("{p}.chern[{j}]"), format!("length {}, expected {}", v.len(), c.total_dim())));
                            }
                            Ok(v.iter().map(|x| x.0.clone()).collect())
                        })
                        .collect::<Result<_, _>>()?;
                    Some(ChernData { representatives: reps })
                }
                None => None,
            };
            let data = NodeSpaceData { shifts: shifts(&p, &c, &n.shifts)?, k, chern, complex: c };
            if nodes.insert(n.id.clone(), data).is_some() {
                return Err(invalid(p, format!("duplicate node id {}", n.id)));
            }
            if let Some(w) = &n.window {
                rules.insert(n.id.clone(), window(&format!("{p}.window"), w)?);
            }
        }
        let mut faces = BTreeMap::new();
        let mut face_ids = Vec::new();
        for (i, f) in self.faces.iter().enumerate() {
            let p = format!("faces[{i}]");
            let (Some(lo), Some(hi)) = (nodes.get(&f.lower), nodes.get(&f.upper)) else {
                return Err(invalid(p, format!("face {} joins unknown nodes {} and {}", f.id, f.lower, f.upper)));
            };
            let c = complex(&format!("{p}.complex"), &f.complex)?;
            let k0 = group(&format!("{p}.k0"), &f.k0)?;
            let data = FaceData {
                shifts: shifts(&p, &c, &f.shifts)?,
                restrict: map(&format!("{p}.restrict"), &lo.complex, &c, &f.restrict)?,
                pullback: map(&format!("{p}.pullback"), &hi.complex, &c, &f.pullback)?,
                k_shifts: f
                    .k_shifts
                    .iter()
                    .enumerate()
                    .map(|(j, m)| hom(&format!("{p}.k_shifts[{j}]"), &k0, &k0, m))
                    .collect::<Result<_, _>>()?,
                k_restrict: hom(&format!("{p}.k_restrict"), &lo.k.k0, &k0, &f.k_restrict)?,
                k_pullback: hom(&format!("{p}.k_pullback"), &hi.k.k0, &k0, &f.k_pullback)?,
                k0,
                complex: c,
            };
            if faces.insert(f.id.clone(), data).is_some() {
                return Err(invalid(p, format!("duplicate face id {}", f.id)));
            }
            face_ids.push(FaceId { id: f.id.clone(), lower: f.lower.clone(), upper: f.upper.clone() });
        }
        let mut corners = Vec::new();
        let mut chains = Vec::new();
        for (i, c) in self.corners.iter().enumerate() {
            let p = format!("corners[{i}]");
            let face_complex = |j: usize| {
                faces
                    .get(&c.faces[j])
                    .map(|f| &f.complex)
                    .ok_or_else(|| invalid(format!("{p}.faces[{j}]"), format!("unknown face {}", c.faces[j])))
            };
            let deep = nodes
                .get(&c.nodes[2])
                .ok_or_else(|| invalid(format!("{p}.nodes[2]"), format!("unknown node {}", c.nodes[2])))?;
            let cc = complex(&format!("{p}.complex"), &c.complex)?;
            corners.push(CornerData {
                shifts: shifts(&p, &cc, &c.shifts)?,
                from_lower: map(&format!("{p}.from_lower"), face_complex(0)?, &cc, &c.from_lower)?,
                from_upper: map(&format!("{p}.from_upper"), face_complex(1)?, &cc, &c.from_upper)?,
                from_deep: map(&format!("{p}.from_deep"), &deep.complex, &cc, &c.from_deep)?,
                complex: cc,
            });
            chains.push(CornerChain { nodes: c.nodes.clone(), faces: c.faces.clone() });
        }
        let tree = IsotropyTree {
            group: g,
            nodes: tree_nodes,
            order: self.order.iter().cloned().collect::<BTreeSet<_>>(),
            faces: face_ids,
            corners: chains,
        };
        let action = ResolvedAction { tree, nodes, faces, corners }
            .validated()
            .map_err(|e| DescriptorError::Model(e.to_string()))?;
        let mut bundles = Vec::new();
        for (i, b) in self.bundles.iter().enumerate() {
            let mut w = IteratedReducedBundle::default();
            for (node, entries) in &b.nodes {
                let p = format!("bundles[{i}].nodes.{node}");
                let (Ok(d), Ok(data)) = (action.tree.datum(node), action.node(node)) else {
                    return Err(invalid(p, format!("unknown node {node}")));
                };
                let mut table = BTreeMap::new();
                for (j, e) in entries.iter().enumerate() {
                    let ch = class_len(&format!("{p}[{j}].character"), &e.character, d.dual_group().ngens())?;
                    let x = class_len(&format!("{p}[{j}].class"), &e.class, data.k.k0.ngens())?;
                    table.insert(ch, x);
                }
                w.nodes.insert(node.clone(), ReducedBundleNode { node: node.clone(), entries: table });
            }
            bundles.push((b.label.clone(), w));
        }
        let expected = self
            .expected
            .iter()
            .map(|e| Expected { window: e.window, even: e.even, odd: e.odd, basis: e.basis.clone() })
            .collect();
        Ok(Fixture { name: self.name.clone(), action, rules, bundles, expected, notes: self.notes.clone() })
    }

    pub fn from_fixture(f: &Fixture) -> ActionDescriptor {
        let a = &f.action;
        let nodes = a
            .tree
            .nodes
            .iter()
            .map(|n| {
                let data = &a.nodes[&n.id];
                let r = n.datum.restriction();
                NodeDesc {
                    id: n.id.clone(),
                    isotropy: IsotropyDesc {
                        dual: group_desc(r.codomain()),
                        restriction: int_rows(r.matrix()),
                        kernel_generators: Some(n.datum.kernel_generators().iter().map(|g| int_vec(g)).collect()),
                    },
                    complex: complex_desc(&data.complex),
                    shifts: data.shifts.iter().map(map_desc).collect(),
                    k: kdesc(&data.k),
                    chern: data
                        .chern
                        .as_ref()
                        .map(|c| c.representatives.iter().map(|v| v.iter().cloned().map(Rat).collect()).collect()),
                    window: f.rules.get(&n.id).map(window_desc),
                }
            })
            .collect();
        let faces = a
            .tree
            .faces
            .iter()
            .map(|fid| {
                let d = &a.faces[&fid.id];
                FaceDesc {
                    id: fid.id.clone(),
                    lower: fid.lower.clone(),
                    upper: fid.upper.clone(),
                    complex: complex_desc(&d.complex),
                    shifts: d.shifts.iter().map(map_desc).collect(),
                    restrict: map_desc(&d.restrict),
                    pullback: map_desc(&d.pullback),
                    k0: group_desc(&d.k0),
                    k_shifts: d.k_shifts.iter().map(|h| int_rows(h.matrix())).collect(),
                    k_restrict: int_rows(d.k_restrict.matrix()),
                    k_pullback: int_rows(d.k_pullback.matrix()),
                }
            })
            .collect();
        let corners = a
            .tree
            .corners
            .iter()
            .zip(&a.corners)
            .map(|(ch, d)| CornerDesc {
                nodes: ch.nodes.clone(),
                faces: ch.faces.clone(),
                complex: complex_desc(&d.complex),
                shifts: d.shifts.iter().map(map_desc).collect(),
                from_lower: map_desc(&d.from_lower),
                from_upper: map_desc(&d.from_upper),
                from_deep: map_desc(&d.from_deep),
            })
            .collect();
        let bundles = f
            .bundles
            .iter()
            .map(|(label, w)| BundleDesc {
                label: label.clone(),
                nodes: w
                    .nodes
                    .iter()
                    .map(|(id, b)| {
                        let entries = b
                            .entries
                            .iter()
                            .map(|(c, x)| EntryDesc { character: int_vec(c), class: int_vec(x) })
                            .collect();
                        (id.clone(), entries)
                    })
                    .collect(),
            })
            .collect();
        ActionDescriptor {
            name: f.name.clone(),
            group: group_desc(&a.tree.group),
            nodes,
            order: a.tree.order.iter().cloned().collect(),
            faces,
            corners,
            bundles,
            expected: f
                .expected
                .iter()
                .map(|e| ExpectedDesc { window: e.window, even: e.even, odd: e.odd, basis: e.basis.clone() })
                .collect(),
            notes: f.notes.clone(),
        }
    }
}
