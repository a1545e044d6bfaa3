//! Smith and Hermite normal forms over the integers, plus the lattice
//! utilities built on them (integer kernels, Diophantine solves, canonical
//! coset representatives).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// `U·A·V = S` with `U`, `V` unimodular and `S` diagonal, nonnegative, with
/// each diagonal entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`, tracked alongside it.
    pub u_inv: IntMatrix,
    /// Inverse of `v`, tracked alongside it.
    pub v_inv: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.s.rows().min(self.s.cols());
        (0..n).map(|i| self.s[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|d| !d.is_zero()).count()
    }
}

struct Work {
    s: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    // row[dst] += f * row[src]
    fn add_row(&mut self, dst: usize, src: usize, f: &BigInt) {
        self.s.add_row_multiple(dst, src, f);
        self.u.add_row_multiple(dst, src, f);
        self.u_inv.add_col_multiple(src, dst, &-f);
    }

    // col[dst] += f * col[src]
    fn add_col(&mut self, dst: usize, src: usize, f: &BigInt) {
        self.s.add_col_multiple(dst, src, f);
        self.v.add_col_multiple(dst, src, f);
        self.v_inv.add_row_multiple(src, dst, &-f);
    }

    fn negate_row(&mut self, i: usize) {
        self.s.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    fn smallest_nonzero(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for i in t..self.s.rows() {
            for j in t..self.s.cols() {
                let a = self.s[(i, j)].abs();
                if a.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, b)| &a < b) {
                    let done = a.is_one();
                    best = Some(((i, j), a));
                    if done {
                        return best.map(|(p, _)| p);
                    }
                }
            }
        }
        best.map(|(p, _)| p)
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut w = Work {
        s: a.clone(),
        u: IntMatrix::identity(m),
        u_inv: IntMatrix::identity(m),
        v: IntMatrix::identity(n),
        v_inv: IntMatrix::identity(n),
    };
    for t in 0..m.min(n) {
        let Some((pi, pj)) = w.smallest_nonzero(t) else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if w.s[(i, t)].is_zero() {
                    continue;
                }
                let q = w.s[(i, t)].div_floor(&w.s[(t, t)]);
                w.add_row(i, t, &-q);
                if !w.s[(i, t)].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                if w.s[(t, j)].is_zero() {
                    continue;
                }
                let q = w.s[(t, j)].div_floor(&w.s[(t, t)]);
                w.add_col(j, t, &-q);
                if !w.s[(t, j)].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // a remainder is now smaller than the pivot; move it into place
                let (pi, pj) = w
                    .smallest_nonzero_in_cross(t)
                    .expect("nonzero remainder must exist");
                w.swap_rows(t, pi);
                w.swap_cols(t, pj);
                continue;
            }
            // pivot must divide the remaining block
            let pivot = w.s[(t, t)].clone();
            let bad = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !w.s[(i, j)].is_multiple_of(&pivot));
            match bad {
                Some((i, _)) => w.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if w.s[(t, t)].is_negative() {
            w.negate_row(t);
        }
    }
    SmithDecomposition { u: w.u, s: w.s, v: w.v, u_inv: w.u_inv, v_inv: w.v_inv }
}

impl Work {
    fn smallest_nonzero_in_cross(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        let mut consider = |p: (usize, usize), x: &BigInt| {
            if x.is_zero() {
                return;
            }
            let a = x.abs();
            if best.as_ref().is_none_or(|(_, b)| &a < b) {
                best = Some((p, a));
            }
        };
        for i in t..self.s.rows() {
            consider((i, t), &self.s[(i, t)]);
        }
        for j in t + 1..self.s.cols() {
            consider((t, j), &self.s[(t, j)]);
        }
        best.map(|(p, _)| p)
    }
}

/// Row-style Hermite normal form of the lattice spanned by `gens` (each a
/// vector of length `dim`). Returns a basis in echelon form: pivots positive,
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_basis(gens: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = gens.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut basis: Vec<(usize, Vec<BigInt>)> = Vec::new();
    let mut col = 0;
    while col < dim && !rows.is_empty() {
        // gcd-reduce column `col` among remaining rows
        loop {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let p = *nonzero.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            for &i in &nonzero {
                if i == p {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[p][col]);
                if q.is_zero() {
                    continue;
                }
                let sub: Vec<BigInt> = rows[p].iter().map(|x| x * &q).collect();
                for (x, s) in rows[i].iter_mut().zip(sub) {
                    *x -= s;
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&i| !rows[i][col].is_zero()) {
            let mut r = rows.swap_remove(p);
            if r[col].is_negative() {
                r.iter_mut().for_each(|x| *x = -std::mem::take(x));
            }
            basis.push((col, r));
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        col += 1;
    }
    // reduce entries above pivots
    for k in (0..basis.len()).rev() {
        let (pc, prow) = basis[k].clone();
        for above in basis.iter_mut().take(k) {
            let q = above.1[pc].div_floor(&prow[pc]);
            if !q.is_zero() {
                for (x, p) in above.1.iter_mut().zip(&prow) {
                    *x -= p * &q;
                }
            }
        }
    }
    basis.into_iter().map(|(_, r)| r).collect()
}

/// Hermite basis that pivots from the last coordinate backwards. Reducing
/// with it normalizes trailing coordinates first, which is the canonical
/// representative convention used throughout the crate.
pub fn reverse_hermite_basis(gens: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let rev: Vec<Vec<BigInt>> = gens.iter().map(|g| g.iter().rev().cloned().collect()).collect();
    hermite_basis(&rev, dim)
        .into_iter()
        .map(|r| r.into_iter().rev().collect())
        .collect()
}

/// Reduces `v` modulo a basis produced by [`reverse_hermite_basis`].
pub fn reduce_by_reverse_hermite(v: &[BigInt], basis: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut out = v.to_vec();
    for row in basis {
        let p = row.iter().rposition(|x| !x.is_zero()).expect("zero row in Hermite basis");
        let q = out[p].div_floor(&row[p]);
        if !q.is_zero() {
            for (x, r) in out.iter_mut().zip(row) {
                *x -= r * &q;
            }
        }
    }
    out
}

/// Basis (as columns) of the integer kernel `{x : A x = 0}`.
pub fn integer_kernel(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(a);
    let r = snf.rank();
    (r..a.cols()).map(|j| snf.v.column(j)).collect()
}

/// One integer solution of `A x = b`, or `None` if there is none.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    let snf = smith_normal_form(a);
    let c = snf.u.apply(b);
    let diag = snf.diagonal();
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, ci) in c.iter().enumerate() {
        let d = diag.get(i).cloned().unwrap_or_default();
        if d.is_zero() {
            if !ci.is_zero() {
                return None;
            }
        } else {
            let (q, rem) = ci.div_rem(&d);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(snf.v.apply(&y))
}

/// Two lattices given by generators coincide.
pub fn same_lattice(a: &[Vec<BigInt>], b: &[Vec<BigInt>], dim: usize) -> bool {
    hermite_basis(a, dim) == hermite_basis(b, dim)
}

pub fn gcd_all(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgab::matrix::ints;

    fn check(a: &IntMatrix) -> SmithDecomposition {
        let d = smith_normal_form(a);
        assert_eq!(&(&d.u * a) * &d.v, d.s);
        assert!(d.u.is_unimodular() && d.v.is_unimodular());
        assert!((&d.u * &d.u_inv).is_identity());
        assert!((&d.v * &d.v_inv).is_identity());
        let diag = d.diagonal();
        for (i, x) in diag.iter().enumerate() {
            assert!(!x.is_negative());
            if let Some(next) = diag.get(i + 1) {
                if x.is_zero() {
                    assert!(next.is_zero());
                } else {
                    assert!(next.is_multiple_of(x));
                }
            }
        }
        for i in 0..d.s.rows() {
            for j in 0..d.s.cols() {
                if i != j {
                    assert!(d.s[(i, j)].is_zero());
                }
            }
        }
        d
    }

    #[test]
    fn two_by_two_example() {
        let a = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let d = check(&a);
        assert_eq!(d.diagonal(), ints(&[2, 4]));
        // d1 is the gcd of the entries, d1*d2 = |det|
        assert_eq!(gcd_all(a.entries()), BigInt::from(2));
        assert_eq!(a.determinant().abs(), BigInt::from(8));
    }

    #[test]
    fn zero_and_identity() {
        let z = IntMatrix::zeros(3, 3);
        assert_eq!(check(&z).s, z);
        let i = IntMatrix::identity(4);
        assert_eq!(check(&i).s, i);
    }

    #[test]
    fn non_square() {
        check(&IntMatrix::from_i64(&[&[2, 3, 5]]));
        check(&IntMatrix::from_i64(&[&[4], &[6], &[10]]));
        check(&IntMatrix::from_i64(&[&[0, 0, 6], &[0, 4, 0]]));
    }

    #[test]
    fn solve_and_kernel() {
        let a = IntMatrix::from_i64(&[&[2, 3]]);
        let x = solve_integer(&a, &ints(&[1])).unwrap();
        assert_eq!(a.apply(&x), ints(&[1]));
        let k = integer_kernel(&a);
        assert_eq!(k.len(), 1);
        assert_eq!(a.apply(&k[0]), ints(&[0]));
        assert!(solve_integer(&IntMatrix::from_i64(&[&[2, 4]]), &ints(&[1])).is_none());
    }

    #[test]
    fn reverse_hermite_reduction() {
        let basis = reverse_hermite_basis(&[ints(&[3, -2])], 2);
        assert_eq!(reduce_by_reverse_hermite(&ints(&[2, -1]), &basis), ints(&[-1, 1]));
        assert_eq!(reduce_by_reverse_hermite(&ints(&[-4, 3]), &basis), ints(&[-1, 1]));
    }

    #[test]
    fn hermite_is_canonical() {
        let a = vec![ints(&[2, 4, 6]), ints(&[1, 1, 1])];
        let b = vec![ints(&[1, 1, 1]), ints(&[3, 5, 7])];
        assert!(same_lattice(&a, &b, 3));
        assert!(!same_lattice(&a, &[ints(&[1, 1, 1])], 3));
    }
}
