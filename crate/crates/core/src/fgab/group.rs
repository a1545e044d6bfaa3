use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use super::smith::{
    hermite_basis, integer_kernel, reduce_by_reverse_hermite, reverse_hermite_basis, same_lattice,
    smith_normal_form, solve_integer,
};
use super::FgabError;

/// A finitely generated abelian group `Z^r ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k` in
/// canonical form (`d_i ≥ 2`, `d_i | d_{i+1}`).
///
/// Elements are integer coordinate vectors: the first `free_rank` entries are
/// free coordinates, the rest are torsion coordinates kept in `[0, d_i)`.
/// The canonical form doubles as the presentation: generator `free_rank + i`
/// carries the single relation `d_i · g = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgAbGroup {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

impl FgAbGroup {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>) -> Result<Self, FgabError> {
        for (i, d) in torsion.iter().enumerate() {
            if d < &BigInt::from(2) {
                return Err(FgabError::Malformed(format!("invariant factor {d} at position {i} is below 2")));
            }
            if let Some(next) = torsion.get(i + 1) {
                if !next.is_multiple_of(d) {
                    return Err(FgabError::Malformed(format!(
                        "invariant factors break the divisibility chain: {d} does not divide {next}"
                    )));
                }
            }
        }
        Ok(FgAbGroup { free_rank, torsion })
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup { free_rank: rank, torsion: Vec::new() }
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    pub fn cyclic(order: i64) -> Self {
        if order == 0 {
            return Self::free(1);
        }
        if order == 1 {
            return Self::trivial();
        }
        FgAbGroup { free_rank: 0, torsion: vec![BigInt::from(order.abs())] }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    /// Number of generators (length of an element vector).
    pub fn ngens(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.ngens() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Order of the group, `None` if infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion.iter().product())
    }

    /// Order of generator `i` (0 for free generators).
    pub fn generator_order(&self, i: usize) -> BigInt {
        if i < self.free_rank {
            BigInt::zero()
        } else {
            self.torsion[i - self.free_rank].clone()
        }
    }

    /// Relation matrix: one column `d_i e_{r+i}` per torsion generator.
    pub fn relations(&self) -> IntMatrix {
        let n = self.ngens();
        let cols: Vec<Vec<BigInt>> = self
            .torsion
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mut c = vec![BigInt::zero(); n];
                c[self.free_rank + i] = d.clone();
                c
            })
            .collect();
        IntMatrix::from_columns(&cols, n)
    }

    pub fn zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.ngens()]
    }

    pub fn generator(&self, i: usize) -> Vec<BigInt> {
        let mut v = self.zero();
        v[i] = BigInt::one();
        self.reduce(&v)
    }

    pub fn check_element(&self, x: &[BigInt]) -> Result<(), FgabError> {
        if x.len() != self.ngens() {
            return Err(FgabError::Malformed(format!(
                "element has {} coordinates, group {} needs {}",
                x.len(),
                self,
                self.ngens()
            )));
        }
        Ok(())
    }

    /// Canonical coordinates: torsion entries reduced into `[0, d)`.
    pub fn reduce(&self, x: &[BigInt]) -> Vec<BigInt> {
        debug_assert_eq!(x.len(), self.ngens());
        x.iter()
            .enumerate()
            .map(|(i, v)| if i < self.free_rank { v.clone() } else { v.mod_floor(&self.torsion[i - self.free_rank]) })
            .collect()
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&s)
    }

    pub fn sub(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(&s)
    }

    pub fn scale(&self, k: &BigInt, a: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().map(|x| x * k).collect();
        self.reduce(&s)
    }

    pub fn is_zero_element(&self, x: &[BigInt]) -> bool {
        self.reduce(x).iter().all(Zero::is_zero)
    }

    pub fn elements_equal(&self, a: &[BigInt], b: &[BigInt]) -> bool {
        self.reduce(a) == self.reduce(b)
    }

    /// All elements of a finite group, in lexicographic order of coordinates.
    pub fn enumerate(&self) -> Result<Vec<Vec<BigInt>>, FgabError> {
        if !self.is_finite() {
            return Err(FgabError::Infinite(self.to_string()));
        }
        let mut out = vec![Vec::new()];
        for d in &self.torsion {
            let d = d.to_i64().ok_or_else(|| FgabError::Malformed(format!("torsion {d} too large to enumerate")))?;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |k| {
                        let mut p = prefix.clone();
                        p.push(BigInt::from(k));
                        p
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// Direct sum `self ⊕ other` in canonical form, together with the two
    /// injections and two projections.
    pub fn direct_sum(&self, other: &FgAbGroup) -> DirectSum {
        let n1 = self.ngens();
        let n2 = other.ngens();
        let n = n1 + n2;
        let mut rel_cols = self.relations().column_vecs().into_iter().map(|mut c| {
            c.resize(n, BigInt::zero());
            c
        }).collect::<Vec<_>>();
        for c in other.relations().column_vecs() {
            let mut full = vec![BigInt::zero(); n1];
            full.extend(c);
            rel_cols.push(full);
        }
        let pres = Presentation::canonicalize(n, &IntMatrix::from_columns(&rel_cols, n));
        let to = &pres.to_canonical;
        let from = &pres.from_canonical;
        let inj1 = to.select_columns(&(0..n1).collect::<Vec<_>>());
        let inj2 = to.select_columns(&(n1..n).collect::<Vec<_>>());
        let proj1 = from.row_range(0, n1);
        let proj2 = from.row_range(n1, n);
        let sum = pres.group.clone();
        DirectSum {
            inj_left: AbHom::new_reduced(self.clone(), sum.clone(), inj1),
            inj_right: AbHom::new_reduced(other.clone(), sum.clone(), inj2),
            proj_left: AbHom::new_reduced(sum.clone(), self.clone(), proj1),
            proj_right: AbHom::new_reduced(sum.clone(), other.clone(), proj2),
            group: sum,
        }
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

pub struct DirectSum {
    pub group: FgAbGroup,
    pub inj_left: AbHom,
    pub inj_right: AbHom,
    pub proj_left: AbHom,
    pub proj_right: AbHom,
}

/// A group presented as `Z^n / span(relations)` converted to canonical form.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub group: FgAbGroup,
    /// Canonical coordinates of each original generator (`g × n`).
    pub to_canonical: IntMatrix,
    /// Original coordinates of each canonical generator (`n × g`).
    pub from_canonical: IntMatrix,
}

impl Presentation {
    pub fn canonicalize(n: usize, relations: &IntMatrix) -> Presentation {
        assert_eq!(relations.rows(), n);
        let snf = smith_normal_form(relations);
        let diag = snf.diagonal();
        let mut free_idx = Vec::new();
        let mut tors_idx = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..n {
            let d = diag.get(i).cloned().unwrap_or_default();
            if d.is_zero() {
                free_idx.push(i);
            } else if !d.is_one() {
                tors_idx.push(i);
                torsion.push(d);
            }
        }
        let order: Vec<usize> = free_idx.iter().chain(&tors_idx).copied().collect();
        let group = FgAbGroup { free_rank: free_idx.len(), torsion };
        let to_canonical = snf.u.select_rows(&order);
        let from_canonical = snf.u_inv.select_columns(&order);
        // reduce torsion rows of to_canonical
        let mut to = to_canonical;
        for (k, _) in tors_idx.iter().enumerate() {
            let r = group.free_rank + k;
            let d = group.torsion[k].clone();
            for j in 0..to.cols() {
                to[(r, j)] = to[(r, j)].mod_floor(&d);
            }
        }
        Presentation { group, to_canonical: to, from_canonical }
    }
}

/// A homomorphism of canonical groups, as the integer matrix sending
/// domain generator coordinates to codomain coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbHom {
    domain: FgAbGroup,
    codomain: FgAbGroup,
    matrix: IntMatrix,
}

impl AbHom {
    pub fn new(domain: FgAbGroup, codomain: FgAbGroup, matrix: IntMatrix) -> Result<Self, FgabError> {
        if matrix.rows() != codomain.ngens() || matrix.cols() != domain.ngens() {
            return Err(FgabError::Malformed(format!(
                "matrix is {}x{}, expected {}x{} for {} -> {}",
                matrix.rows(),
                matrix.cols(),
                codomain.ngens(),
                domain.ngens(),
                domain,
                codomain
            )));
        }
        for i in domain.free_rank..domain.ngens() {
            let d = domain.generator_order(i);
            let image: Vec<BigInt> = matrix.column(i).iter().map(|x| x * &d).collect();
            if !codomain.is_zero_element(&image) {
                return Err(FgabError::Malformed(format!(
                    "generator {i} has order {d} but its image does not; relation not respected"
                )));
            }
        }
        Ok(Self::new_reduced(domain, codomain, matrix))
    }

    pub(crate) fn new_reduced(domain: FgAbGroup, codomain: FgAbGroup, matrix: IntMatrix) -> Self {
        let mut m = matrix;
        for j in 0..m.cols() {
            let col = codomain.reduce(&m.column(j));
            for (i, x) in col.into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        AbHom { domain, codomain, matrix: m }
    }

    pub fn identity(g: &FgAbGroup) -> Self {
        Self::new_reduced(g.clone(), g.clone(), IntMatrix::identity(g.ngens()))
    }

    pub fn zero(domain: &FgAbGroup, codomain: &FgAbGroup) -> Self {
        Self::new_reduced(domain.clone(), codomain.clone(), IntMatrix::zeros(codomain.ngens(), domain.ngens()))
    }

    pub fn domain(&self) -> &FgAbGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FgAbGroup {
        &self.codomain
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.codomain.reduce(&self.matrix.apply(x))
    }

    /// `self ∘ first`
    pub fn compose(&self, first: &AbHom) -> Result<AbHom, FgabError> {
        if first.codomain != self.domain {
            return Err(FgabError::DomainMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.domain, self.codomain, first.domain, first.codomain
            )));
        }
        Ok(Self::new_reduced(first.domain.clone(), self.codomain.clone(), &self.matrix * &first.matrix))
    }

    pub fn is_zero(&self) -> bool {
        (0..self.domain.ngens()).all(|j| self.codomain.is_zero_element(&self.matrix.column(j)))
    }

    pub fn equals(&self, other: &AbHom) -> bool {
        self.domain == other.domain
            && self.codomain == other.codomain
            && (0..self.domain.ngens())
                .all(|j| self.codomain.elements_equal(&self.matrix.column(j), &other.matrix.column(j)))
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.codomain && self.equals(&AbHom::identity(&self.domain))
    }

    /// Lattice in `Z^n` (n = domain generators) of vectors mapping to zero;
    /// contains the domain relations.
    pub fn kernel_lattice(&self) -> Vec<Vec<BigInt>> {
        let n = self.domain.ngens();
        let block = self.matrix.hcat(&self.codomain.relations());
        let mut gens: Vec<Vec<BigInt>> =
            integer_kernel(&block).into_iter().map(|c| c[..n].to_vec()).collect();
        gens.extend(self.domain.relations().column_vecs());
        hermite_basis(&gens, n)
    }

    /// Lattice in `Z^m` (m = codomain generators) spanned by the image and
    /// the codomain relations.
    pub fn image_lattice(&self) -> Vec<Vec<BigInt>> {
        let m = self.codomain.ngens();
        let mut gens = self.matrix.column_vecs();
        gens.extend(self.codomain.relations().column_vecs());
        hermite_basis(&gens, m)
    }

    pub fn is_surjective(&self) -> bool {
        let m = self.codomain.ngens();
        same_lattice(&self.image_lattice(), &IntMatrix::identity(m).column_vecs(), m)
    }

    pub fn is_injective(&self) -> bool {
        let n = self.domain.ngens();
        same_lattice(&self.kernel_lattice(), &self.domain.relations().column_vecs(), n)
    }

    /// One element of the preimage of `y`, not normalized.
    fn raw_preimage(&self, y: &[BigInt]) -> Option<Vec<BigInt>> {
        let n = self.domain.ngens();
        let block = self.matrix.hcat(&self.codomain.relations());
        solve_integer(&block, y).map(|x| x[..n].to_vec())
    }

    /// Preimage of `y` if one exists, in canonical form: reduced modulo the
    /// kernel lattice by the reverse-Hermite convention.
    pub fn preimage(&self, y: &[BigInt]) -> Result<Option<Vec<BigInt>>, FgabError> {
        self.codomain.check_element(y)?;
        let Some(x) = self.raw_preimage(y) else { return Ok(None) };
        let basis = reverse_hermite_basis(&self.kernel_lattice(), self.domain.ngens());
        Ok(Some(self.domain.reduce(&reduce_by_reverse_hermite(&x, &basis))))
    }

    /// Inverse of an automorphism.
    pub fn inverse(&self) -> Result<AbHom, FgabError> {
        if self.domain != self.codomain || !self.is_surjective() || !self.is_injective() {
            return Err(FgabError::NotInvertible);
        }
        let n = self.domain.ngens();
        let cols = (0..n)
            .map(|j| self.raw_preimage(&self.codomain.generator_or_zero(j)).expect("surjective"))
            .collect::<Vec<_>>();
        Ok(Self::new_reduced(self.codomain.clone(), self.domain.clone(), IntMatrix::from_columns(&cols, n)))
    }

    /// `self^k` for an automorphism (negative `k` uses the inverse).
    pub fn power(&self, k: &BigInt) -> Result<AbHom, FgabError> {
        let base = if k.is_negative() { self.inverse()? } else { self.clone() };
        let mut e = k.abs();
        let mut acc = AbHom::identity(&self.domain);
        let mut sq = base;
        while !e.is_zero() {
            if e.is_odd() {
                acc = sq.compose(&acc)?;
            }
            e >>= 1;
            if !e.is_zero() {
                sq = sq.compose(&sq)?;
            }
        }
        Ok(acc)
    }
}

impl FgAbGroup {
    fn generator_or_zero(&self, i: usize) -> Vec<BigInt> {
        let mut v = self.zero();
        v[i] = BigInt::one();
        v
    }
}

/// A subgroup of `parent` given as a lattice in `Z^n` containing the parent
/// relations, turned into a canonical group with its inclusion.
fn subgroup_from_lattice(parent: &FgAbGroup, lattice: &[Vec<BigInt>]) -> (FgAbGroup, AbHom) {
    let n = parent.ngens();
    let basis = hermite_basis(lattice, n);
    let q = basis.len();
    let bmat = IntMatrix::from_columns(&basis, n);
    // express parent relations in basis coordinates
    let rels: Vec<Vec<BigInt>> = parent
        .relations()
        .column_vecs()
        .iter()
        .map(|r| solve_integer(&bmat, r).expect("relation lattice must lie in the subgroup lattice"))
        .collect();
    let pres = Presentation::canonicalize(q, &IntMatrix::from_columns(&rels, q));
    let inc = &bmat * &pres.from_canonical;
    let group = pres.group;
    (group.clone(), AbHom::new_reduced(group, parent.clone(), inc))
}

pub fn hom_kernel(h: &AbHom) -> (FgAbGroup, AbHom) {
    subgroup_from_lattice(&h.domain, &h.kernel_lattice())
}

pub fn hom_image(h: &AbHom) -> (FgAbGroup, AbHom) {
    subgroup_from_lattice(&h.codomain, &h.image_lattice())
}

pub fn hom_cokernel(h: &AbHom) -> (FgAbGroup, AbHom) {
    let m = h.codomain.ngens();
    let rel = h.codomain.relations().hcat(&h.matrix);
    let pres = Presentation::canonicalize(m, &rel);
    let group = pres.group.clone();
    (group.clone(), AbHom::new_reduced(h.codomain.clone(), group, pres.to_canonical))
}

/// `image(f) = kernel(g)` as subgroups of the middle group.
pub fn is_exact_at(f: &AbHom, g: &AbHom) -> Result<bool, FgabError> {
    if f.codomain != g.domain {
        return Err(FgabError::DomainMismatch(format!(
            "codomain {} of f differs from domain {} of g",
            f.codomain, g.domain
        )));
    }
    Ok(same_lattice(&f.image_lattice(), &g.kernel_lattice(), f.codomain.ngens()))
}

/// Canonical preimage of `y` under a surjection.
pub fn preimage_representative(h: &AbHom, y: &[BigInt]) -> Result<Vec<BigInt>, FgabError> {
    if !h.is_surjective() {
        return Err(FgabError::NotSurjective);
    }
    h.preimage(y)?.ok_or(FgabError::NotSurjective)
}

/// A homomorphic section `s` with `h ∘ s = id`, if one exists.
pub fn try_split(h: &AbHom) -> Result<Option<AbHom>, FgabError> {
    if !h.is_surjective() {
        return Err(FgabError::NotSurjective);
    }
    let n = h.domain.ngens();
    let kernel = h.kernel_lattice();
    let kmat = IntMatrix::from_columns(&kernel, n);
    let rel_a = h.domain.relations();
    let reduce_basis = reverse_hermite_basis(&kernel, n);
    let mut cols = Vec::new();
    for j in 0..h.codomain.ngens() {
        let target = h.codomain.generator_or_zero(j);
        let x0 = h.raw_preimage(&target).expect("surjective");
        let d = h.codomain.generator_order(j);
        if d.is_zero() {
            let x = reduce_by_reverse_hermite(&x0, &reduce_basis);
            cols.push(h.domain.reduce(&x));
            continue;
        }
        // need w with d·(x0 + K w) in the domain relation lattice:
        // d·K·w − R_A·z = −d·x0
        let lhs = IntMatrix::from_columns(
            &kmat.column_vecs().iter().map(|c| c.iter().map(|x| x * &d).collect()).collect::<Vec<_>>(),
            n,
        );
        let neg_rel = IntMatrix::from_columns(
            &rel_a.column_vecs().iter().map(|c| c.iter().map(|x| -x).collect()).collect::<Vec<_>>(),
            n,
        );
        let rhs: Vec<BigInt> = x0.iter().map(|x| -(x * &d)).collect();
        let Some(sol) = solve_integer(&lhs.hcat(&neg_rel), &rhs) else { return Ok(None) };
        let w = &sol[..kernel.len()];
        let kw = kmat.apply(w);
        let x: Vec<BigInt> = x0.iter().zip(&kw).map(|(a, b)| a + b).collect();
        cols.push(h.domain.reduce(&x));
    }
    let s = AbHom::new(h.codomain.clone(), h.domain.clone(), IntMatrix::from_columns(&cols, n))?;
    debug_assert!(h.compose(&s)?.is_identity());
    Ok(Some(s))
}
