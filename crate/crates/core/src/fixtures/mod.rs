//! Built-in example actions: rotation of the 2-sphere (at unit and higher
//! speed), products with a trivially acting finite group, and the circle
//! action on the complex projective plane with weights `(1, 0, -1)`.

pub mod simplicial;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::basespace::{qvec, ChernData, CochainComplex, CornerData, FaceData, GradedMap, KData, NodeSpaceData};
use crate::chargroup::{CharGroupError, Character, SubgroupDatum};
use crate::fgab::{ints, AbHom, FgAbGroup, FgabError, IntMatrix};
use crate::itspace::{CornerChain, FaceId, IsotropyTree, TreeNode};
use crate::model::{materialize_windows, ModelError, ResolvedAction, SectionChoice, WindowRule, Windows};
use crate::qlin::{QMatrix, Q};
use crate::redbun::{tensor_with_representation, BundleError, IteratedReducedBundle, ReducedBundleNode};

use simplicial::{Simplex, SimplicialComplex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown fixture {0}")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Fgab(#[from] FgabError),
    #[error(transparent)]
    CharGroup(#[from] CharGroupError),
}

/// Documented dimensions of the delocalized cohomology at one window size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expected {
    pub window: usize,
    pub even: usize,
    pub odd: usize,
    /// How the numbers were obtained.
    pub basis: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub action: ResolvedAction,
    pub rules: BTreeMap<String, WindowRule>,
    pub bundles: Vec<(String, IteratedReducedBundle)>,
    pub expected: Vec<Expected>,
    pub notes: Vec<String>,
}

impl Fixture {
    pub fn windows(&self, m: usize) -> Result<Windows, ModelError> {
        materialize_windows(&self.action.tree, &self.rules, m)
    }

    /// Default sections with lifts cached for the window of size `m`.
    pub fn sections(&self, m: usize) -> Result<SectionChoice, ModelError> {
        let mut s = SectionChoice::canonical(&self.action.tree)?;
        s.prepare(&self.action.tree, &self.windows(m)?)?;
        Ok(s)
    }

    pub fn expected_at(&self, m: usize) -> Option<&Expected> {
        self.expected.iter().find(|e| e.window == m)
    }
}

/// Fixture by name; `n` is the speed for `sphere_rotation_speed` and the
/// order of the extra factor for `product_trivial`.
pub fn generate_fixture(name: &str, n: Option<i64>) -> Result<Fixture, FixtureError> {
    match name {
        "sphere_rotation" => sphere_rotation(),
        "sphere_rotation_speed" => sphere_rotation_speed(n.unwrap_or(2)),
        "product_trivial" => {
            let k = n.unwrap_or(2);
            if k < 1 {
                return Err(FixtureError::InvalidParameter(format!("factor order {k}")));
            }
            product_trivial(&FgAbGroup::cyclic(k), &sphere_rotation()?)
        }
        "projective_plane" => projective_plane(),
        other => Err(FixtureError::UnknownName(other.to_string())),
    }
}

pub const FIXTURE_NAMES: [&str; 4] = ["sphere_rotation", "sphere_rotation_speed", "product_trivial", "projective_plane"];

fn hom(domain: FgAbGroup, codomain: FgAbGroup, rows: &[&[i64]], cols: usize) -> Result<AbHom, FgabError> {
    let m = if rows.is_empty() { IntMatrix::zeros(0, cols) } else { IntMatrix::from_i64(rows) };
    AbHom::new(domain, codomain, m)
}

fn z() -> FgAbGroup {
    FgAbGroup::free(1)
}

fn id_z() -> AbHom {
    AbHom::identity(&z())
}

/// Node with `B = U(1)` inside `G = U(1)`.
fn full_isotropy() -> Result<SubgroupDatum, FixtureError> {
    Ok(SubgroupDatum::with_generators(id_z(), vec![])?)
}

/// `Ĝ = Z → Z/n`, kernel generated by `n`.
fn cyclic_isotropy(n: i64) -> Result<SubgroupDatum, FixtureError> {
    let target = FgAbGroup::cyclic(n);
    let r = if n == 1 { hom(z(), target, &[], 1)? } else { hom(z(), target, &[&[1]], 1)? };
    Ok(SubgroupDatum::with_generators(r, vec![ints(&[n])])?)
}

fn point_node(nshifts: usize) -> NodeSpaceData {
    let c = CochainComplex::point();
    NodeSpaceData {
        shifts: vec![GradedMap::zero(&c, &c, 2); nshifts],
        k: KData::point(nshifts),
        chern: Some(ChernData { representatives: vec![qvec(&[1])] }),
        complex: c,
    }
}

fn interval_node() -> NodeSpaceData {
    let c = CochainComplex::interval();
    NodeSpaceData {
        shifts: vec![GradedMap::zero(&c, &c, 2)],
        k: KData::untwisted(z(), FgAbGroup::trivial(), 1, IntMatrix::from_i64(&[&[1]]))
            .with_relative(FgAbGroup::trivial(), z()),
        chern: Some(ChernData { representatives: vec![qvec(&[1, 1, 0])] }),
        complex: c,
    }
}

/// Endpoint `end` of the interval as a face over a point node.
fn endpoint_face(end: usize) -> Result<FaceData, FixtureError> {
    let i = CochainComplex::interval();
    let p = CochainComplex::point();
    let mut row = [0i64; 3];
    row[end] = 1;
    Ok(FaceData {
        shifts: vec![GradedMap::zero(&p, &p, 2)],
        restrict: GradedMap::new(&i, &p, 0, QMatrix::from_i64(1, 3, &row)).expect("evaluation"),
        pullback: GradedMap::identity(&p),
        k0: z(),
        k_shifts: vec![id_z()],
        k_restrict: id_z(),
        k_pullback: id_z(),
        complex: p,
    })
}

fn order(pairs: &[(&str, &str)]) -> std::collections::BTreeSet<(String, String)> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn face_id(id: &str, lower: &str, upper: &str) -> FaceId {
    FaceId { id: id.into(), lower: lower.into(), upper: upper.into() }
}

fn table(entries: &[(i64, &[i64])]) -> BTreeMap<Character, Vec<BigInt>> {
    entries.iter().map(|(c, x)| (ints(&[*c]), ints(x))).collect()
}

fn bundle(nodes: &[(&str, BTreeMap<Character, Vec<BigInt>>)]) -> IteratedReducedBundle {
    IteratedReducedBundle {
        nodes: nodes
            .iter()
            .map(|(n, t)| (n.to_string(), ReducedBundleNode { node: n.to_string(), entries: t.clone() }))
            .collect(),
    }
}

/// Tensor every node of an iterated bundle with one character of `Ĝ`.
pub fn twist_bundle(
    action: &ResolvedAction,
    sections: &SectionChoice,
    w: &IteratedReducedBundle,
    g: &[BigInt],
) -> Result<IteratedReducedBundle, BundleError> {
    let rep = BTreeMap::from([(g.to_vec(), BigInt::from(1))]);
    let mut nodes = BTreeMap::new();
    for (id, node) in &w.nodes {
        nodes.insert(id.clone(), tensor_with_representation(action, sections, &rep, node)?);
    }
    Ok(IteratedReducedBundle { nodes })
}

fn sphere_tree(root: SubgroupDatum) -> Result<IsotropyTree, FixtureError> {
    Ok(IsotropyTree {
        group: z(),
        nodes: vec![
            TreeNode { id: "0".into(), datum: root },
            TreeNode { id: "N".into(), datum: full_isotropy()? },
            TreeNode { id: "S".into(), datum: full_isotropy()? },
        ],
        order: order(&[("0", "N"), ("0", "S")]),
        faces: vec![face_id("0N", "0", "N"), face_id("0S", "0", "S")],
        corners: vec![],
    })
}

fn sphere_action(root: SubgroupDatum) -> Result<ResolvedAction, FixtureError> {
    let tree = sphere_tree(root)?;
    let nodes = BTreeMap::from([
        ("0".to_string(), interval_node()),
        ("N".to_string(), point_node(0)),
        ("S".to_string(), point_node(0)),
    ]);
    let faces = BTreeMap::from([("0N".to_string(), endpoint_face(0)?), ("0S".to_string(), endpoint_face(1)?)]);
    Ok(ResolvedAction { tree, nodes, faces, corners: vec![] }.validated()?)
}

/// Rotation of the 2-sphere about an axis. The resolved quotient is an
/// interval whose ends fibre over the two fixed poles.
pub fn sphere_rotation() -> Result<Fixture, FixtureError> {
    let action = sphere_action(cyclic_isotropy(1)?)?;
    let bundles = vec![
        ("trivial".to_string(), bundle(&[("0", table(&[(0, &[1])])), ("N", table(&[(0, &[1])])), ("S", table(&[(0, &[1])]))])),
        (
            "split poles".to_string(),
            bundle(&[("0", table(&[(0, &[3])])), ("N", table(&[(0, &[2]), (1, &[1])])), ("S", table(&[(-1, &[3])]))]),
        ),
    ];
    let expected = (0..=3)
        .map(|m| Expected {
            window: m,
            even: 4 * m + 1,
            odd: 0,
            basis: "pairs of pole tables with equal total rank".into(),
        })
        .collect();
    Ok(Fixture {
        name: "sphere_rotation".into(),
        action,
        rules: BTreeMap::new(),
        bundles,
        expected,
        notes: vec![
            "odd dimension 0: evaluation at the two ends of the interval is onto, so no odd class survives; \
             a claimed rank-one odd group is not reproduced"
                .into(),
        ],
    })
}

/// Rotation at `n` times the unit speed: the principal stratum has
/// isotropy `Z/n`. Pole windows use residues `0..n` so every root sector
/// sees `2m+1` characters.
pub fn sphere_rotation_speed(n: i64) -> Result<Fixture, FixtureError> {
    if n < 1 {
        return Err(FixtureError::InvalidParameter(format!("speed {n}")));
    }
    if n == 1 {
        return sphere_rotation();
    }
    let action = sphere_action(cyclic_isotropy(n)?)?;
    let pole = WindowRule::Radius { stride: n, offsets: (0..n).collect() };
    let rules = BTreeMap::from([("N".to_string(), pole.clone()), ("S".to_string(), pole)]);
    let bundles = vec![(
        "trivial".to_string(),
        bundle(&[("0", table(&[(0, &[1])])), ("N", table(&[(0, &[1])])), ("S", table(&[(0, &[1])]))]),
    )];
    let nu = n as usize;
    let expected = (0..=2)
        .map(|m| Expected {
            window: m,
            even: nu * (4 * m + 1),
            odd: 0,
            basis: format!("{n} root sectors, each a copy of the unit-speed count"),
        })
        .collect();
    Ok(Fixture { name: format!("sphere_rotation_speed({n})"), action, rules, bundles, expected, notes: vec![] })
}

/// The same action for `Â × Ĝ`, with the finite factor `A` acting trivially.
pub fn product_trivial(a: &FgAbGroup, inner: &Fixture) -> Result<Fixture, FixtureError> {
    let elements = a.enumerate().map_err(|_| FixtureError::InvalidParameter(format!("{a} is infinite")))?;
    let t = &inner.action.tree;
    let gs = a.direct_sum(&t.group);
    let mut nodes = Vec::new();
    for n in &t.nodes {
        let r = n.datum.restriction();
        let bs = a.direct_sum(r.codomain());
        // r' = i_A p_A + i_B r p_G
        let left = &bs.inj_left.matrix().clone() * gs.proj_left.matrix();
        let right = &(&bs.inj_right.matrix().clone() * r.matrix()) * gs.proj_right.matrix();
        let mut m = left.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m[(i, j)] = &left[(i, j)] + &right[(i, j)];
            }
        }
        let r2 = AbHom::new(gs.group.clone(), bs.group.clone(), m)?;
        let gens = n.datum.kernel_generators().iter().map(|g| gs.inj_right.apply(g)).collect();
        nodes.push(TreeNode { id: n.id.clone(), datum: SubgroupDatum::with_generators(r2, gens)? });
    }
    let tree = IsotropyTree { group: gs.group.clone(), nodes, order: t.order.clone(), faces: t.faces.clone(), corners: t.corners.clone() };
    let action = ResolvedAction {
        tree,
        nodes: inner.action.nodes.clone(),
        faces: inner.action.faces.clone(),
        corners: inner.action.corners.clone(),
    }
    .validated()?;
    let mut rules = BTreeMap::new();
    for n in &inner.action.tree.nodes {
        let rule = inner.rules.get(&n.id).cloned().unwrap_or_default();
        let rule = match rule {
            WindowRule::Explicit(list) => {
                let bs = a.direct_sum(n.datum.subgroup_dual());
                let mut out = Vec::new();
                for e in &elements {
                    for c in &list {
                        let x = bs.inj_left.apply(e);
                        out.push(bs.group.add(&x, &bs.inj_right.apply(c)));
                    }
                }
                WindowRule::Explicit(out)
            }
            other => other,
        };
        rules.insert(n.id.clone(), rule);
    }
    let lift = |w: &IteratedReducedBundle| IteratedReducedBundle {
        nodes: w
            .nodes
            .iter()
            .map(|(id, b)| {
                let entries = b.entries.iter().map(|(c, x)| (gs.inj_right.apply(c), x.clone())).collect();
                (id.clone(), ReducedBundleNode { node: id.clone(), entries })
            })
            .collect(),
    };
    let bundles = inner.bundles.iter().map(|(l, w)| (l.clone(), lift(w))).collect();
    let k = elements.len();
    let expected = inner
        .expected
        .iter()
        .map(|e| Expected {
            window: e.window,
            even: k * e.even,
            odd: k * e.odd,
            basis: format!("{k} copies of: {}", e.basis),
        })
        .collect();
    Ok(Fixture {
        name: format!("product_trivial({a}, {})", inner.name),
        action,
        rules,
        bundles,
        expected,
        notes: inner.notes.clone(),
    })
}

/// Vertex ids of the thickened sphere: base vertex `v` at layer `t`
/// (0 inner, 1 outer) is `2v + t`.
fn layer(v: usize, t: usize) -> usize {
    2 * v + t
}

const N_POLE: usize = 0;
const S_POLE: usize = 7;

fn a_vertex(i: usize) -> usize {
    1 + i % 3
}

fn b_vertex(i: usize) -> usize {
    4 + i % 3
}

fn sorted(mut s: Simplex) -> Simplex {
    s.sort();
    s
}

/// Triangles of the base sphere split into a cap around `a`, an annulus
/// between the circles `a` and `b`, and a cap around `b`.
fn sphere_pieces() -> [Vec<Simplex>; 3] {
    let mut d1 = Vec::new();
    let mut ann = Vec::new();
    let mut d3 = Vec::new();
    for i in 0..3 {
        d1.push(sorted(vec![N_POLE, a_vertex(i), a_vertex(i + 1)]));
        ann.push(sorted(vec![a_vertex(i), a_vertex(i + 1), b_vertex(i + 1)]));
        ann.push(sorted(vec![a_vertex(i), b_vertex(i), b_vertex(i + 1)]));
        d3.push(sorted(vec![S_POLE, b_vertex(i), b_vertex(i + 1)]));
    }
    [d1, ann, d3]
}

fn on_layer(simplices: &[Simplex], t: usize) -> Vec<Simplex> {
    simplices.iter().map(|s| s.iter().map(|&v| layer(v, t)).collect()).collect()
}

fn restricted_cocycle(c: &BTreeMap<Simplex, Q>, sub: &SimplicialComplex) -> BTreeMap<Simplex, Q> {
    c.iter().filter(|(s, _)| sub.position(s).is_some()).map(|(s, x)| (s.clone(), x.clone())).collect()
}

/// Face of the thickened sphere over a point node.
fn face_over_point(
    y0: &SimplicialComplex,
    face: &SimplicialComplex,
    cocycle: &BTreeMap<Simplex, Q>,
    k0: FgAbGroup,
    k_shift: AbHom,
    k_restrict: AbHom,
    k_pullback: AbHom,
) -> FaceData {
    let pt = SimplicialComplex::from_maximal(&[vec![0]]);
    FaceData {
        complex: face.cochains(),
        shifts: vec![face.cup_with(2, &restricted_cocycle(cocycle, face))],
        restrict: y0.restriction_to(face),
        pullback: face.pullback_from(&pt, &|_| 0),
        k0,
        k_shifts: vec![k_shift],
        k_restrict,
        k_pullback,
    }
}

/// The circle action `[z1 : z2 : z3] ↦ [e^{iθ}z1 : z2 : e^{-iθ}z3]`.
///
/// Tree: the free part `0`; the sphere `P = {z2 = 0}` with isotropy `Z/2`;
/// the fixed points `p1 = [1:0:0]`, `p2 = [0:1:0]`, `p3 = [0:0:1]`. The
/// resolved free quotient is a thickened sphere `S² × I` (Hopf quotient of
/// the link of `p2` times a radial interval). Its inner boundary sphere
/// fibres over `p2`; its outer sphere splits into a cap over `p1`, an
/// annulus fibring over the interval `Y_P` by its circles, and a cap over
/// `p3`. The caps meet the annulus in the two corner circles.
///
/// Cochain model: an ordered triangulation of the base sphere (two cone
/// caps and a triangulated annulus on eight vertices), thickened by the
/// staircase subdivision of each prism; the annulus maps simplicially onto
/// the interval. The shift operator of the free part is cup product with
/// the pull-back `c` of a 2-cocycle supported on one triangle of the `p1`
/// cap, which restricts to a generator on both boundary spheres and
/// vanishes on the annulus. K-theory of the free part is `K⁰(S²) = Z{1, β}`
/// with `σ(1) = 1 + β`, `σ(β) = β` and Chern representatives `1`, `c`.
///
/// Expected dimensions, from the long exact sequence for pruning the
/// free part. Relative to its boundary `S² × I` has one odd class in
/// degrees 1 and 3. The remaining nodes contribute `w` tables at `p2`
/// and, over the `P` interval, pairs of tables at `p1`, `p3` whose sums
/// over each residue class mod 2 agree; a residue class with no window
/// character above it leaves one relative odd class. With `w = 2m+1`
/// characters per fixed point this gives `3w - 2` even classes for
/// `m ≥ 1` and `(2, 1)` for `m = 0`. The connecting map records the
/// difference of total sums at `p1`, `p2` and of first moments
/// `Σ k f(k)` (the degree of `c` on the two boundary spheres), of rank 2
/// for `m ≥ 1` and 1 for `m = 0`. Result: `(6m - 1, 0)` for `m ≥ 1` and
/// `(1, 2)` for `m = 0`.
///
/// The first-moment condition makes the truncated count one less than a
/// count of fixed-point tables with only value conditions.
pub fn projective_plane() -> Result<Fixture, FixtureError> {
    let [d1, ann, d3] = sphere_pieces();
    let base_triangles: Vec<Simplex> = d1.iter().chain(&ann).chain(&d3).cloned().collect();
    let mut tets = Vec::new();
    for t in &base_triangles {
        let (x, y, zz) = (t[0], t[1], t[2]);
        let (xi, xo, yi, yo, zi, zo) = (layer(x, 0), layer(x, 1), layer(y, 0), layer(y, 1), layer(zz, 0), layer(zz, 1));
        tets.push(vec![xi, xo, yo, zo]);
        tets.push(vec![xi, yi, yo, zo]);
        tets.push(vec![xi, yi, zi, zo]);
    }
    let y0 = SimplicialComplex::from_maximal(&tets);
    let base = SimplicialComplex::from_maximal(&base_triangles);
    let c_base = base.cochain(&BTreeMap::from([(sorted(vec![N_POLE, a_vertex(0), a_vertex(1)]), Q::from_integer(1.into()))]));
    let c_vec = y0.pullback_from(&base, &|v| v / 2).apply(&c_base);
    let mut cocycle = BTreeMap::new();
    for s in &y0.simplices[2] {
        let x = &c_vec[y0.total_index(s).unwrap()];
        if x != &Q::from_integer(0.into()) {
            cocycle.insert(s.clone(), x.clone());
        }
    }
    let cy0 = y0.cochains();
    let l0 = y0.cup_with(2, &cocycle);
    let s_in = SimplicialComplex::from_maximal(&on_layer(&base_triangles, 0));
    let cap1 = SimplicialComplex::from_maximal(&on_layer(&d1, 1));
    let annulus = SimplicialComplex::from_maximal(&on_layer(&ann, 1));
    let cap3 = SimplicialComplex::from_maximal(&on_layer(&d3, 1));
    let circle = |f: fn(usize) -> usize| {
        let edges: Vec<Simplex> = (0..3).map(|i| sorted(vec![layer(f(i), 1), layer(f(i + 1), 1)])).collect();
        SimplicialComplex::from_maximal(&edges)
    };
    let circle_a = circle(a_vertex);
    let circle_b = circle(b_vertex);
    let yp = SimplicialComplex::from_maximal(&[vec![0, 1]]);
    let pt = SimplicialComplex::from_maximal(&[vec![0]]);

    let z2 = FgAbGroup::free(2);
    let sigma = AbHom::new(z2.clone(), z2.clone(), IntMatrix::from_i64(&[&[1, 0], &[1, 1]]))?;
    let mut k_root = KData::untwisted(z2.clone(), FgAbGroup::trivial(), 1, IntMatrix::from_i64(&[&[1, 0]]))
        .with_relative(FgAbGroup::trivial(), z2.clone());
    k_root.shift_k0 = vec![sigma.clone()];
    let root = NodeSpaceData {
        shifts: vec![l0],
        k: k_root,
        chern: Some(ChernData { representatives: vec![y0.unit(), y0.cochain(&cocycle)] }),
        complex: cy0,
    };
    let p_node = {
        let c = yp.cochains();
        NodeSpaceData {
            shifts: vec![GradedMap::zero(&c, &c, 2)],
            k: KData::untwisted(z(), FgAbGroup::trivial(), 1, IntMatrix::from_i64(&[&[1]]))
                .with_relative(FgAbGroup::trivial(), z()),
            chern: Some(ChernData { representatives: vec![yp.unit()] }),
            complex: c,
        }
    };

    let to_z = hom(z2.clone(), z(), &[&[1, 0]], 2)?;
    let unit_in_z2 = hom(z(), z2.clone(), &[&[1], &[0]], 1)?;
    let f_in = face_over_point(&y0, &s_in, &cocycle, z2.clone(), sigma.clone(), AbHom::identity(&z2), unit_in_z2);
    let f_cap1 = face_over_point(&y0, &cap1, &cocycle, z(), id_z(), to_z.clone(), id_z());
    let f_cap3 = face_over_point(&y0, &cap3, &cocycle, z(), id_z(), to_z.clone(), id_z());
    let collapse = |v: usize| if v % 2 == 1 && (3..=7).contains(&v) { 0 } else { 1 };
    let f_ann = FaceData {
        complex: annulus.cochains(),
        shifts: vec![annulus.cup_with(2, &restricted_cocycle(&cocycle, &annulus))],
        restrict: y0.restriction_to(&annulus),
        pullback: annulus.pullback_from(&yp, &collapse),
        k0: z(),
        k_shifts: vec![id_z()],
        k_restrict: to_z,
        k_pullback: id_z(),
    };
    let p_end = |v: usize| {
        let end = SimplicialComplex::from_maximal(&[vec![v]]);
        let c = end.cochains();
        let restrict = yp.restriction_to(&end);
        let pullback = end.pullback_from(&pt, &|_| 0);
        FaceData {
            shifts: vec![GradedMap::zero(&c, &c, 2)],
            restrict,
            pullback,
            k0: z(),
            k_shifts: vec![id_z()],
            k_restrict: id_z(),
            k_pullback: id_z(),
            complex: c,
        }
    };
    let corner = |circle: &SimplicialComplex, cap: &SimplicialComplex| {
        let c = circle.cochains();
        CornerData {
            shifts: vec![GradedMap::zero(&c, &c, 2)],
            from_lower: annulus.restriction_to(circle),
            from_upper: cap.restriction_to(circle),
            from_deep: circle.pullback_from(&pt, &|_| 0),
            complex: c,
        }
    };

    let tree = IsotropyTree {
        group: z(),
        nodes: vec![
            TreeNode { id: "0".into(), datum: cyclic_isotropy(1)? },
            TreeNode { id: "P".into(), datum: cyclic_isotropy(2)? },
            TreeNode { id: "p1".into(), datum: full_isotropy()? },
            TreeNode { id: "p2".into(), datum: full_isotropy()? },
            TreeNode { id: "p3".into(), datum: full_isotropy()? },
        ],
        order: order(&[("0", "P"), ("0", "p1"), ("0", "p2"), ("0", "p3"), ("P", "p1"), ("P", "p3")]),
        faces: vec![
            face_id("0P", "0", "P"),
            face_id("0p1", "0", "p1"),
            face_id("0p2", "0", "p2"),
            face_id("0p3", "0", "p3"),
            face_id("Pp1", "P", "p1"),
            face_id("Pp3", "P", "p3"),
        ],
        corners: vec![
            CornerChain {
                nodes: ["0".into(), "P".into(), "p1".into()],
                faces: ["0P".into(), "0p1".into(), "Pp1".into()],
            },
            CornerChain {
                nodes: ["0".into(), "P".into(), "p3".into()],
                faces: ["0P".into(), "0p3".into(), "Pp3".into()],
            },
        ],
    };
    let nodes = BTreeMap::from([
        ("0".to_string(), root),
        ("P".to_string(), p_node),
        ("p1".to_string(), point_node(0)),
        ("p2".to_string(), point_node(0)),
        ("p3".to_string(), point_node(0)),
    ]);
    let faces = BTreeMap::from([
        ("0P".to_string(), f_ann),
        ("0p1".to_string(), f_cap1),
        ("0p2".to_string(), f_in),
        ("0p3".to_string(), f_cap3),
        ("Pp1".to_string(), p_end(0)),
        ("Pp3".to_string(), p_end(1)),
    ]);
    let corners = vec![corner(&circle_a, &cap1), corner(&circle_b, &cap3)];
    let action = ResolvedAction { tree, nodes, faces, corners }.validated()?;

    let trivial = bundle(&[
        ("0", BTreeMap::from([(ints(&[0]), ints(&[1, 0]))])),
        ("P", table(&[(0, &[1])])),
        ("p1", table(&[(0, &[1])])),
        ("p2", table(&[(0, &[1])])),
        ("p3", table(&[(0, &[1])])),
    ]);
    let sections = SectionChoice::canonical(&action.tree)?;
    let twisted = twist_bundle(&action, &sections, &trivial, &ints(&[1]))?;
    let expected = (0..=2)
        .map(|m| Expected {
            window: m,
            even: if m == 0 { 1 } else { 6 * m - 1 },
            odd: if m == 0 { 2 } else { 0 },
            basis: "pruning sequence of the free part against the fixed-point tables".into(),
        })
        .collect();
    Ok(Fixture {
        name: "projective_plane".into(),
        action,
        rules: BTreeMap::new(),
        bundles: vec![("trivial".into(), trivial), ("character 1".into(), twisted)],
        expected,
        notes: vec![],
    })
}
