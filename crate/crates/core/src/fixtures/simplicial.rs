//! Ordered simplicial complexes: cochains, restriction to subcomplexes,
//! pull-back along vertex maps and cup product with a fixed cocycle.

use std::collections::{BTreeMap, BTreeSet};

use crate::basespace::{CochainComplex, GradedMap};
use crate::qlin::{QMatrix, Q};

/// A simplex as a strictly increasing vertex list.
pub type Simplex = Vec<usize>;

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    /// Simplices of each dimension in sorted order.
    pub simplices: Vec<Vec<Simplex>>,
    index: Vec<BTreeMap<Simplex, usize>>,
}

impl SimplicialComplex {
    /// Closure of the given simplices under taking faces.
    pub fn from_maximal(maximal: &[Simplex]) -> Self {
        let mut sets: Vec<BTreeSet<Simplex>> = Vec::new();
        for s in maximal {
            let mut s = s.clone();
            s.sort();
            s.dedup();
            let n = s.len();
            for mask in 1u32..(1 << n) {
                let face: Simplex = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
                let k = face.len() - 1;
                if sets.len() <= k {
                    sets.resize(k + 1, BTreeSet::new());
                }
                sets[k].insert(face);
            }
        }
        let simplices: Vec<Vec<Simplex>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        SimplicialComplex { simplices, index }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn position(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    /// Total-space coordinate of a simplex.
    pub fn total_index(&self, s: &[usize]) -> Option<usize> {
        let k = s.len() - 1;
        let off: usize = self.simplices.iter().take(k).map(Vec::len).sum();
        self.position(s).map(|p| off + p)
    }

    pub fn cochains(&self) -> CochainComplex {
        let dims = self.dims();
        let mut ds = Vec::new();
        for k in 0..dims.len().saturating_sub(1) {
            let mut m = QMatrix::zeros(dims[k + 1], dims[k]);
            for (r, s) in self.simplices[k + 1].iter().enumerate() {
                for i in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(i);
                    let c = self.index[k][&f];
                    m[(r, c)] += Q::from_integer(if i % 2 == 0 { 1.into() } else { (-1).into() });
                }
            }
            ds.push(m);
        }
        CochainComplex::new(dims, ds).expect("simplicial coboundary")
    }

    /// Restriction of cochains to a subcomplex.
    pub fn restriction_to(&self, sub: &SimplicialComplex) -> GradedMap {
        let (src, dst) = (self.cochains(), sub.cochains());
        let mut m = QMatrix::zeros(dst.total_dim(), src.total_dim());
        for level in &sub.simplices {
            for s in level {
                let i = sub.total_index(s).unwrap();
                let j = self.total_index(s).expect("subcomplex simplex");
                m[(i, j)] = Q::from_integer(1.into());
            }
        }
        GradedMap::new(&src, &dst, 0, m).expect("restriction map")
    }

    /// Pull-back along a weakly order-preserving vertex map `self → target`.
    pub fn pullback_from(&self, target: &SimplicialComplex, f: &dyn Fn(usize) -> usize) -> GradedMap {
        let (src, dst) = (target.cochains(), self.cochains());
        let mut m = QMatrix::zeros(dst.total_dim(), src.total_dim());
        for level in &self.simplices {
            for s in level {
                let img: Simplex = s.iter().map(|&v| f(v)).collect();
                if img.windows(2).any(|w| w[0] >= w[1]) {
                    continue;
                }
                let j = target.total_index(&img).expect("image simplex");
                m[(self.total_index(s).unwrap(), j)] = Q::from_integer(1.into());
            }
        }
        GradedMap::new(&src, &dst, 0, m).expect("pullback map")
    }

    /// `u ↦ c ⌣ u` for a cocycle `c` of degree `p` given on `p`-simplices,
    /// using the front-face/back-face formula.
    pub fn cup_with(&self, p: usize, c: &BTreeMap<Simplex, Q>) -> GradedMap {
        let cc = self.cochains();
        let n = cc.total_dim();
        let mut m = QMatrix::zeros(n, n);
        for level in self.simplices.iter().skip(p) {
            for s in level {
                let front = &s[..=p];
                let Some(cv) = c.get(front) else { continue };
                let back = &s[p..];
                let j = self.total_index(back).unwrap();
                m[(self.total_index(s).unwrap(), j)] += cv;
            }
        }
        GradedMap::new(&cc, &cc, p, m).expect("cup product operator")
    }

    /// A cochain in total coordinates from values on simplices.
    pub fn cochain(&self, values: &BTreeMap<Simplex, Q>) -> Vec<Q> {
        let mut v = vec![Q::from_integer(0.into()); self.cochains().total_dim()];
        for (s, x) in values {
            if let Some(i) = self.total_index(s) {
                v[i] = x.clone();
            }
        }
        v
    }

    /// The constant function `1` on vertices.
    pub fn unit(&self) -> Vec<Q> {
        let vals = self.simplices[0].iter().map(|s| (s.clone(), Q::from_integer(1.into()))).collect();
        self.cochain(&vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_of_triangle_is_circle() {
        let c = SimplicialComplex::from_maximal(&[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(c.cochains().cohomology().unwrap(), vec![1, 1]);
    }

    #[test]
    fn sphere_cup_is_chain_map() {
        let c = SimplicialComplex::from_maximal(&[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]);
        let cc = c.cochains();
        assert_eq!(cc.cohomology().unwrap(), vec![1, 0, 1]);
        let cocycle = BTreeMap::from([(vec![0, 1, 2], Q::from_integer(1.into()))]);
        let l = c.cup_with(2, &cocycle);
        assert!(l.commutes_with_d(&cc, &cc));
        assert_eq!(l.apply(&c.unit()), c.cochain(&cocycle));
    }

    #[test]
    fn collapse_pullback_is_chain_map() {
        let edge = SimplicialComplex::from_maximal(&[vec![0, 1]]);
        let square = SimplicialComplex::from_maximal(&[vec![0, 1, 3], vec![0, 2, 3]]);
        let f = |v: usize| if v < 2 { 0 } else { 1 };
        let p = square.pullback_from(&edge, &f);
        assert!(p.commutes_with_d(&edge.cochains(), &square.cochains()));
    }
}
