//! Seeded random resolved actions of a circle: a root with finite cyclic
//! isotropy, children with larger cyclic or full isotropy, and optional
//! fixed grandchildren.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resolvedk_core::basespace::qvec;
use resolvedk_core::fgab::ints;
use resolvedk_core::itspace::{FaceId, TreeNode};
use resolvedk_core::qlin::QMatrix;
use resolvedk_core::{
    AbHom, ChernData, CochainComplex, FaceData, FgAbGroup, GradedMap, IntMatrix, IsotropyTree, KData,
    NodeSpaceData, ResolvedAction, SubgroupDatum,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Point,
    Interval,
    Circle,
}

impl Shape {
    fn complex(self) -> CochainComplex {
        match self {
            Shape::Point => CochainComplex::point(),
            Shape::Interval => CochainComplex::interval(),
            Shape::Circle => CochainComplex::circle(),
        }
    }

    fn vertices(self) -> usize {
        match self {
            Shape::Interval => 2,
            _ => 1,
        }
    }

    /// Absolute rational cohomology `(even, odd)`.
    fn absolute(self) -> (usize, usize) {
        match self {
            Shape::Circle => (1, 1),
            _ => (1, 0),
        }
    }

    /// Cohomology relative to the given set of vertices.
    fn relative(self, used: &BTreeSet<usize>) -> (usize, usize) {
        match (self, used.len()) {
            (_, 0) => self.absolute(),
            (Shape::Point, _) => (0, 0),
            (Shape::Interval, 1) => (0, 0),
            (Shape::Interval, _) => (0, 1),
            (Shape::Circle, _) => (0, 1),
        }
    }

    fn chern(self) -> Vec<i64> {
        match self {
            Shape::Point => vec![1],
            Shape::Interval => vec![1, 1, 0],
            Shape::Circle => vec![1, 0],
        }
    }
}

/// `((even, odd) absolute, (even, odd) relative)`
pub type NodeRanks = ((usize, usize), (usize, usize));

pub struct RandomAction {
    pub action: ResolvedAction,
    /// Hand-computed per node.
    pub node_ranks: BTreeMap<String, NodeRanks>,
    /// Depth one with every face on its own boundary vertex of an interval
    /// root, so the faces are honest boundary components.
    pub geometric: bool,
}

fn z() -> FgAbGroup {
    FgAbGroup::free(1)
}

fn id_z() -> AbHom {
    AbHom::identity(&z())
}

fn cyclic(n: i64) -> SubgroupDatum {
    let target = FgAbGroup::cyclic(n);
    let m = if n == 1 { IntMatrix::zeros(0, 1) } else { IntMatrix::from_i64(&[&[1]]) };
    let r = AbHom::new(z(), target, m).expect("restriction");
    SubgroupDatum::with_generators(r, vec![ints(&[n])]).expect("cyclic isotropy")
}

fn full() -> SubgroupDatum {
    SubgroupDatum::with_generators(id_z(), vec![]).expect("full isotropy")
}

fn node(shape: Shape, nshifts: usize, used: &BTreeSet<usize>) -> NodeSpaceData {
    let c = shape.complex();
    let (_, o) = shape.absolute();
    let (re, ro) = shape.relative(used);
    let k = KData::untwisted(z(), FgAbGroup::free(o), nshifts, IntMatrix::from_i64(&[&[1]]));
    NodeSpaceData {
        shifts: vec![GradedMap::zero(&c, &c, 2); nshifts],
        k: k.with_relative(FgAbGroup::free(re), FgAbGroup::free(ro)),
        chern: Some(ChernData { representatives: vec![qvec(&shape.chern())] }),
        complex: c,
    }
}

fn evaluation(shape: Shape, vertex: usize) -> GradedMap {
    let c = shape.complex();
    let p = CochainComplex::point();
    let mut row = vec![0i64; c.total_dim()];
    row[vertex] = 1;
    GradedMap::new(&c, &p, 0, QMatrix::from_i64(1, row.len(), &row)).expect("evaluation")
}

fn face(lower: Shape, lower_vertex: usize, lower_shifts: usize, upper: Shape, upper_vertex: usize) -> FaceData {
    let p = CochainComplex::point();
    FaceData {
        shifts: vec![GradedMap::zero(&p, &p, 2); lower_shifts],
        restrict: evaluation(lower, lower_vertex),
        pullback: evaluation(upper, upper_vertex),
        k0: z(),
        k_shifts: vec![id_z(); lower_shifts],
        k_restrict: id_z(),
        k_pullback: id_z(),
        complex: p,
    }
}

struct Plan {
    id: String,
    datum: SubgroupDatum,
    shape: Shape,
    nshifts: usize,
    parent: Option<usize>,
}

/// A random valid action with up to three children and one grandchild each.
pub fn random_action(seed: u64) -> RandomAction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nr: i64 = rng.gen_range(1..=3);
    let root_shape = [Shape::Point, Shape::Interval, Shape::Circle][rng.gen_range(0..3)];
    let mut plans = vec![Plan { id: "r".into(), datum: cyclic(nr), shape: root_shape, nshifts: 1, parent: None }];
    let nchildren = rng.gen_range(1..=3);
    for i in 0..nchildren {
        let finite = rng.gen_bool(0.6);
        let (datum, nshifts) = if finite { (cyclic(nr * rng.gen_range(1..=2)), 1) } else { (full(), 0) };
        let grandchild = finite && rng.gen_bool(0.6);
        let shape = if grandchild || rng.gen_bool(0.5) { Shape::Interval } else { Shape::Point };
        let ci = plans.len();
        plans.push(Plan { id: format!("c{i}"), datum, shape, nshifts, parent: Some(0) });
        if grandchild {
            plans.push(Plan { id: format!("g{i}"), datum: full(), shape: Shape::Point, nshifts: 0, parent: Some(ci) });
        }
    }

    let mut order = BTreeSet::new();
    for (i, p) in plans.iter().enumerate() {
        let mut cur = p.parent;
        while let Some(a) = cur {
            order.insert((a, i));
            cur = plans[a].parent;
        }
    }

    let mut faces = Vec::new();
    let mut face_data = BTreeMap::new();
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); plans.len()];
    let mut geometric = root_shape == Shape::Interval;
    for &(lo, hi) in &order {
        let lv = rng.gen_range(0..plans[lo].shape.vertices());
        let uv = rng.gen_range(0..plans[hi].shape.vertices());
        geometric &= lo == 0 && plans[hi].parent == Some(0) && !used[lo].contains(&lv);
        used[lo].insert(lv);
        let id = format!("{}{}", plans[lo].id, plans[hi].id);
        faces.push(FaceId { id: id.clone(), lower: plans[lo].id.clone(), upper: plans[hi].id.clone() });
        face_data.insert(id, face(plans[lo].shape, lv, plans[lo].nshifts, plans[hi].shape, uv));
    }

    let tree = IsotropyTree {
        group: z(),
        nodes: plans.iter().map(|p| TreeNode { id: p.id.clone(), datum: p.datum.clone() }).collect(),
        order: order.iter().map(|&(a, b)| (plans[a].id.clone(), plans[b].id.clone())).collect(),
        faces,
        corners: vec![],
    };
    let nodes = plans.iter().zip(&used).map(|(p, u)| (p.id.clone(), node(p.shape, p.nshifts, u))).collect();
    let node_ranks =
        plans.iter().zip(&used).map(|(p, u)| (p.id.clone(), (p.shape.absolute(), p.shape.relative(u)))).collect();
    let action = ResolvedAction { tree, nodes, faces: face_data, corners: vec![] }
        .validated()
        .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    RandomAction { action, node_ranks, geometric }
}

/// Pruned sets `P` with a node `α` such that `P` and `P ∪ {α}` are both valid.
pub fn pruning_steps(action: &ResolvedAction) -> Vec<(BTreeSet<String>, String)> {
    let ids = action.tree.node_ids();
    let mut out = Vec::new();
    let n = ids.len();
    for mask in 0u32..(1 << n) {
        let p: BTreeSet<String> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ids[i].clone()).collect();
        if action.tree.check_pruned_set(&p).is_err() {
            continue;
        }
        for a in &ids {
            if p.contains(a) {
                continue;
            }
            let mut q = p.clone();
            q.insert(a.clone());
            if action.tree.check_pruned_set(&q).is_ok() {
                out.push((p.clone(), a.clone()));
            }
        }
    }
    out
}
