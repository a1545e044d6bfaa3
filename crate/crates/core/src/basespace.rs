//! Per-node data of the resolved quotient: finite cochain complexes over Q,
//! shift operators, integral K-groups with shift automorphisms, Chern
//! representatives, and face and corner maps.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::fgab::{AbHom, FgAbGroup, IntMatrix};
use crate::qlin::{QMatrix, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("differential d_{degree} has shape {rows}x{cols}, expected {exp_rows}x{exp_cols}")]
    DifferentialShape { degree: usize, rows: usize, cols: usize, exp_rows: usize, exp_cols: usize },
    #[error("expected {expected} differentials for {dims} degrees, got {got}")]
    DifferentialCount { dims: usize, expected: usize, got: usize },
    #[error("graded map has shape {rows}x{cols}, expected {exp_rows}x{exp_cols}")]
    MapShape { rows: usize, cols: usize, exp_rows: usize, exp_cols: usize },
    #[error("complex is invalid: {0}")]
    Invalid(String),
}

/// A bounded cochain complex `C^0 → C^1 → ... → C^D` of finite-dimensional
/// rational vector spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    dims: Vec<usize>,
    differentials: Vec<QMatrix>,
    total_d: QMatrix,
}

impl CochainComplex {
    /// `differentials[k]` maps degree `k` to degree `k+1`.
    pub fn new(dims: Vec<usize>, differentials: Vec<QMatrix>) -> Result<Self, SpaceError> {
        let expected = dims.len().saturating_sub(1);
        if differentials.len() != expected {
            return Err(SpaceError::DifferentialCount { dims: dims.len(), expected, got: differentials.len() });
        }
        for (k, d) in differentials.iter().enumerate() {
            if d.rows() != dims[k + 1] || d.cols() != dims[k] {
                return Err(SpaceError::DifferentialShape {
                    degree: k,
                    rows: d.rows(),
                    cols: d.cols(),
                    exp_rows: dims[k + 1],
                    exp_cols: dims[k],
                });
            }
        }
        let total: usize = dims.iter().sum();
        let mut total_d = QMatrix::zeros(total, total);
        let offsets = offsets_of(&dims);
        for (k, d) in differentials.iter().enumerate() {
            total_d.set_block(offsets[k + 1], offsets[k], d);
        }
        Ok(CochainComplex { dims, differentials, total_d })
    }

    pub fn zero() -> Self {
        Self::new(vec![], vec![]).expect("empty complex")
    }

    pub fn point() -> Self {
        Self::new(vec![1], vec![]).expect("point complex")
    }

    /// Two vertices and one edge, `d = [-1 1]`.
    pub fn interval() -> Self {
        Self::new(vec![2, 1], vec![QMatrix::from_i64(1, 2, &[-1, 1])]).expect("interval complex")
    }

    /// One vertex, one edge, zero differential.
    pub fn circle() -> Self {
        Self::new(vec![1, 1], vec![QMatrix::zeros(1, 1)]).expect("circle complex")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets_of(&self.dims)
    }

    pub fn differentials(&self) -> &[QMatrix] {
        &self.differentials
    }

    /// `d_k : C^k → C^{k+1}`, zero outside the stored range.
    pub fn differential(&self, k: usize) -> QMatrix {
        self.differentials.get(k).cloned().unwrap_or_else(|| QMatrix::zeros(self.dim(k + 1), self.dim(k)))
    }

    /// The differential on the total space `⊕_k C^k`.
    pub fn total_differential(&self) -> &QMatrix {
        &self.total_d
    }

    /// Degrees `k` where `d_{k+1} d_k ≠ 0`.
    pub fn d_squared_failures(&self) -> Vec<usize> {
        (0..self.differentials.len().saturating_sub(1))
            .filter(|&k| !(&self.differentials[k + 1] * &self.differentials[k]).is_zero())
            .collect()
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        match self.d_squared_failures().first() {
            Some(k) => Err(SpaceError::Invalid(format!("d_{} ∘ d_{} ≠ 0", k + 1, k))),
            None => Ok(()),
        }
    }

    /// `dim H^k = dim ker d_k − rank d_{k−1}` for every degree.
    pub fn cohomology(&self) -> Result<Vec<usize>, SpaceError> {
        self.validate()?;
        let ranks: Vec<usize> = (0..self.dims.len()).map(|k| self.differential(k).rank()).collect();
        Ok((0..self.dims.len())
            .map(|k| self.dims[k] - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 })
            .collect())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().enumerate().map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }

    /// Degree of a total coordinate.
    pub fn degree_of(&self, index: usize) -> usize {
        let offs = self.offsets();
        (0..self.dims.len()).rev().find(|&k| offs[k] <= index).unwrap_or(0)
    }

    /// Total coordinates of degree `k`.
    pub fn degree_range(&self, k: usize) -> std::ops::Range<usize> {
        let offs = self.offsets();
        if k >= self.dims.len() {
            return self.total_dim()..self.total_dim();
        }
        offs[k]..offs[k] + self.dims[k]
    }

    /// Direct sum of two complexes, degreewise.
    pub fn direct_sum(&self, other: &CochainComplex) -> CochainComplex {
        let n = self.dims.len().max(other.dims.len());
        let dims: Vec<usize> = (0..n).map(|k| self.dim(k) + other.dim(k)).collect();
        let ds = (0..n.saturating_sub(1))
            .map(|k| QMatrix::block_diag(&[self.differential(k), other.differential(k)]))
            .collect();
        CochainComplex::new(dims, ds).expect("direct sum of valid complexes")
    }
}

fn offsets_of(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len() + 1);
    let mut acc = 0;
    for d in dims {
        out.push(acc);
        acc += d;
    }
    out.push(acc);
    out
}

/// A linear map between total spaces of two complexes raising degree by
/// `degree`. Chain maps have degree 0, shift operators degree 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    degree: usize,
    total: QMatrix,
}

impl GradedMap {
    pub fn new(src: &CochainComplex, dst: &CochainComplex, degree: usize, total: QMatrix) -> Result<Self, SpaceError> {
        if total.rows() != dst.total_dim() || total.cols() != src.total_dim() {
            return Err(SpaceError::MapShape {
                rows: total.rows(),
                cols: total.cols(),
                exp_rows: dst.total_dim(),
                exp_cols: src.total_dim(),
            });
        }
        let m = GradedMap { degree, total };
        if let Some((i, j)) = m.off_degree_entry(src, dst) {
            return Err(SpaceError::Invalid(format!(
                "entry ({i},{j}) maps degree {} to degree {}, map has degree {degree}",
                src.degree_of(j),
                dst.degree_of(i)
            )));
        }
        Ok(m)
    }

    /// Builds the total matrix from per-degree blocks; `blocks[k]` maps
    /// `src^k` to `dst^{k+degree}`.
    pub fn from_blocks(
        src: &CochainComplex,
        dst: &CochainComplex,
        degree: usize,
        blocks: &[QMatrix],
    ) -> Result<Self, SpaceError> {
        let mut total = QMatrix::zeros(dst.total_dim(), src.total_dim());
        let so = src.offsets();
        let dof = dst.offsets();
        for (k, b) in blocks.iter().enumerate() {
            let (er, ec) = (dst.dim(k + degree), src.dim(k));
            if b.rows() != er || b.cols() != ec {
                return Err(SpaceError::MapShape { rows: b.rows(), cols: b.cols(), exp_rows: er, exp_cols: ec });
            }
            if er > 0 && ec > 0 {
                total.set_block(dof[k + degree], so[k], b);
            }
        }
        Self::new(src, dst, degree, total)
    }

    /// Per-degree blocks, `src.dims().len()` of them.
    pub fn blocks(&self, src: &CochainComplex, dst: &CochainComplex) -> Vec<QMatrix> {
        let so = src.offsets();
        let dof = dst.offsets();
        (0..src.dims().len())
            .map(|k| {
                let (r, c) = (dst.dim(k + self.degree), src.dim(k));
                if r == 0 || c == 0 {
                    QMatrix::zeros(r, c)
                } else {
                    self.total.block(dof[k + self.degree], so[k], r, c)
                }
            })
            .collect()
    }

    pub fn zero(src: &CochainComplex, dst: &CochainComplex, degree: usize) -> Self {
        GradedMap { degree, total: QMatrix::zeros(dst.total_dim(), src.total_dim()) }
    }

    pub fn identity(c: &CochainComplex) -> Self {
        GradedMap { degree: 0, total: QMatrix::identity(c.total_dim()) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn total(&self) -> &QMatrix {
        &self.total
    }

    fn off_degree_entry(&self, src: &CochainComplex, dst: &CochainComplex) -> Option<(usize, usize)> {
        for j in 0..self.total.cols() {
            let dj = src.degree_of(j);
            for i in 0..self.total.rows() {
                if !self.total[(i, j)].is_zero() && dst.degree_of(i) != dj + self.degree {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `self ∘ first`
    pub fn compose(&self, first: &GradedMap) -> GradedMap {
        GradedMap { degree: self.degree + first.degree, total: &self.total * &first.total }
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(self.degree, other.degree, "adding maps of different degree");
        GradedMap { degree: self.degree, total: self.total.add(&other.total) }
    }

    pub fn scale(&self, k: &Q) -> GradedMap {
        GradedMap { degree: self.degree, total: self.total.scale(k) }
    }

    pub fn is_zero(&self) -> bool {
        self.total.is_zero()
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.total.apply(v)
    }

    /// `d_dst ∘ f = f ∘ d_src`
    pub fn commutes_with_d(&self, src: &CochainComplex, dst: &CochainComplex) -> bool {
        dst.total_differential() * &self.total == &self.total * src.total_differential()
    }
}

/// `exp(Σ k_i L_i)` on the total space, a finite sum by nilpotency.
pub fn exp_of_shifts(c: &CochainComplex, shifts: &[GradedMap], coeffs: &[BigInt]) -> QMatrix {
    assert_eq!(shifts.len(), coeffs.len(), "one coefficient per shift operator");
    let n = c.total_dim();
    let mut sum = QMatrix::zeros(n, n);
    for (l, k) in shifts.iter().zip(coeffs) {
        if !k.is_zero() {
            sum = sum.add(&l.total().scale(&Q::from_integer(k.clone())));
        }
    }
    sum.nilpotent_exp()
}

/// Integral K-theory of a node with its shift automorphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KData {
    pub k0: FgAbGroup,
    pub k1: FgAbGroup,
    /// K-theory relative to the whole boundary, when supplied.
    pub k0_rel: Option<FgAbGroup>,
    pub k1_rel: Option<FgAbGroup>,
    pub shift_k0: Vec<AbHom>,
    pub shift_k1: Vec<AbHom>,
    pub dimension: AbHom,
}

impl KData {
    /// K-theory of a point: `K^0 = Z`, `K^1 = 0`, trivial shifts.
    pub fn point(nshifts: usize) -> KData {
        Self::untwisted(FgAbGroup::free(1), FgAbGroup::trivial(), nshifts, IntMatrix::from_i64(&[&[1]]))
    }

    /// Given groups with identity shift automorphisms.
    pub fn untwisted(k0: FgAbGroup, k1: FgAbGroup, nshifts: usize, dimension: IntMatrix) -> KData {
        let dimension = AbHom::new(k0.clone(), FgAbGroup::free(1), dimension).expect("dimension homomorphism");
        KData {
            shift_k0: vec![AbHom::identity(&k0); nshifts],
            shift_k1: vec![AbHom::identity(&k1); nshifts],
            k0,
            k1,
            k0_rel: None,
            k1_rel: None,
            dimension,
        }
    }

    pub fn with_relative(mut self, k0_rel: FgAbGroup, k1_rel: FgAbGroup) -> KData {
        self.k0_rel = Some(k0_rel);
        self.k1_rel = Some(k1_rel);
        self
    }

    /// `Π σ_i^{k_i}` on `K^0`.
    pub fn shift_power_k0(&self, coeffs: &[BigInt]) -> AbHom {
        shift_power(&self.k0, &self.shift_k0, coeffs)
    }

    pub fn shift_power_k1(&self, coeffs: &[BigInt]) -> AbHom {
        shift_power(&self.k1, &self.shift_k1, coeffs)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.shift_k0.len() != self.shift_k1.len() {
            errs.push(format!(
                "{} shift automorphisms on K^0 but {} on K^1",
                self.shift_k0.len(),
                self.shift_k1.len()
            ));
        }
        for (deg, group, shifts) in [(0, &self.k0, &self.shift_k0), (1, &self.k1, &self.shift_k1)] {
            for (i, s) in shifts.iter().enumerate() {
                if s.domain() != group || s.codomain() != group {
                    errs.push(format!("shift {i} on K^{deg} is not an endomorphism of {group}"));
                    continue;
                }
                if s.inverse().is_err() {
                    errs.push(format!("shift {i} on K^{deg} is not invertible"));
                }
                for (j, t) in shifts.iter().enumerate().skip(i + 1) {
                    if t.domain() == group && !s.compose(t).unwrap().equals(&t.compose(s).unwrap()) {
                        errs.push(format!("shifts {i} and {j} on K^{deg} do not commute"));
                    }
                }
            }
        }
        if self.dimension.domain() != &self.k0 || self.dimension.codomain() != &FgAbGroup::free(1) {
            errs.push("dimension homomorphism must map K^0 to Z".into());
        } else {
            for (i, s) in self.shift_k0.iter().enumerate() {
                if s.domain() == &self.k0 && !self.dimension.compose(s).unwrap().equals(&self.dimension) {
                    errs.push(format!("shift {i} does not preserve the dimension"));
                }
            }
        }
        errs
    }
}

pub(crate) fn shift_power(group: &FgAbGroup, shifts: &[AbHom], coeffs: &[BigInt]) -> AbHom {
    assert_eq!(shifts.len(), coeffs.len(), "one coefficient per shift automorphism");
    let mut acc = AbHom::identity(group);
    for (s, k) in shifts.iter().zip(coeffs) {
        if !k.is_zero() {
            let p = s.power(k).expect("validated shift automorphism");
            acc = p.compose(&acc).expect("endomorphisms of one group");
        }
    }
    acc
}

/// Closed even cochains representing the Chern character of each `K^0`
/// generator, compatible with the shift automorphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChernData {
    pub representatives: Vec<Vec<Q>>,
}

impl ChernData {
    pub fn validate(&self, c: &CochainComplex, shifts: &[GradedMap], k: &KData) -> Vec<String> {
        let mut errs = Vec::new();
        if self.representatives.len() != k.k0.ngens() {
            errs.push(format!(
                "{} Chern representatives for {} generators of K^0",
                self.representatives.len(),
                k.k0.ngens()
            ));
            return errs;
        }
        let n = c.total_dim();
        for (j, v) in self.representatives.iter().enumerate() {
            if v.len() != n {
                errs.push(format!("Chern representative {j} has length {}, expected {n}", v.len()));
                return errs;
            }
            if !c.total_differential().apply(v).iter().all(Zero::is_zero) {
                errs.push(format!("Chern representative {j} is not closed"));
            }
            if v.iter().enumerate().any(|(i, x)| !x.is_zero() && c.degree_of(i) % 2 == 1) {
                errs.push(format!("Chern representative {j} has odd-degree components"));
            }
            if j >= k.k0.free_rank() && v.iter().any(|x| !x.is_zero()) {
                errs.push(format!("torsion generator {j} has nonzero Chern representative"));
            }
        }
        for (i, (l, s)) in shifts.iter().zip(&k.shift_k0).enumerate() {
            let e = l.total().nilpotent_exp();
            for j in 0..k.k0.ngens() {
                let image = s.apply(&k.k0.generator(j));
                let lhs = self.evaluate(&image);
                let rhs = e.apply(&self.representatives[j]);
                if lhs != rhs {
                    errs.push(format!("ch(σ_{i} x_{j}) ≠ exp(L_{i}) ch(x_{j})"));
                }
            }
        }
        errs
    }

    /// `Σ x_j ch_j`
    pub fn evaluate(&self, x: &[BigInt]) -> Vec<Q> {
        let n = self.representatives.first().map_or(0, Vec::len);
        let mut out = vec![Q::zero(); n];
        for (xj, rep) in x.iter().zip(&self.representatives) {
            if xj.is_zero() {
                continue;
            }
            let c = Q::from_integer(xj.clone());
            for (o, r) in out.iter_mut().zip(rep) {
                *o += &c * r;
            }
        }
        out
    }
}

/// Space data of one tree node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSpaceData {
    pub complex: CochainComplex,
    /// One degree-2 operator per kernel generator.
    pub shifts: Vec<GradedMap>,
    pub k: KData,
    pub chern: Option<ChernData>,
}

/// Validation findings for a node; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeReport {
    pub errors: Vec<String>,
}

impl NodeReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate_node(data: &NodeSpaceData) -> NodeReport {
    let mut errors = Vec::new();
    let c = &data.complex;
    for k in c.d_squared_failures() {
        errors.push(format!("d_{} ∘ d_{k} ≠ 0 at degree {k}", k + 1));
    }
    errors.extend(validate_shift_family(c, &data.shifts, "node"));
    if data.shifts.len() != data.k.shift_k0.len() {
        errors.push(format!(
            "{} shift operators but {} K-theory shift automorphisms",
            data.shifts.len(),
            data.k.shift_k0.len()
        ));
    }
    errors.extend(data.k.validate());
    if let Some(ch) = &data.chern {
        if errors.is_empty() {
            errors.extend(ch.validate(c, &data.shifts, &data.k));
        }
    }
    NodeReport { errors }
}

pub(crate) fn validate_shift_family(c: &CochainComplex, shifts: &[GradedMap], what: &str) -> Vec<String> {
    let mut errors = Vec::new();
    for (i, l) in shifts.iter().enumerate() {
        if l.degree() != 2 {
            errors.push(format!("{what} shift operator {i} has degree {}, expected 2", l.degree()));
        }
        if l.total().rows() != c.total_dim() || l.total().cols() != c.total_dim() {
            errors.push(format!("{what} shift operator {i} has the wrong size"));
            continue;
        }
        if !l.commutes_with_d(c, c) {
            errors.push(format!("{what} shift operator {i} does not commute with d"));
        }
        for (j, m) in shifts.iter().enumerate().skip(i + 1) {
            if m.total().rows() == c.total_dim() && l.compose(m) != m.compose(l) {
                errors.push(format!("{what} shift operators {i} and {j} do not commute"));
            }
        }
    }
    errors
}

/// Data on a face `H_β(Y_α)` for `α < β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceData {
    pub complex: CochainComplex,
    /// One operator per kernel generator of the lower node.
    pub shifts: Vec<GradedMap>,
    /// `ρ : C_α → C_F`
    pub restrict: GradedMap,
    /// `π^* : C_β → C_F`
    pub pullback: GradedMap,
    pub k0: FgAbGroup,
    pub k_shifts: Vec<AbHom>,
    pub k_restrict: AbHom,
    pub k_pullback: AbHom,
}

impl FaceData {
    /// Checks internal consistency against the lower and upper node data.
    /// `upper_in_lower[j]` expresses kernel generator `j` of the upper node in
    /// the kernel generators of the lower node.
    pub fn validate(&self, lower: &NodeSpaceData, upper: &NodeSpaceData, upper_in_lower: &[Vec<BigInt>]) -> Vec<String> {
        let mut errs = Vec::new();
        let f = &self.complex;
        for k in f.d_squared_failures() {
            errs.push(format!("face complex: d∘d ≠ 0 at degree {k}"));
        }
        errs.extend(validate_shift_family(f, &self.shifts, "face"));
        if self.shifts.len() != lower.shifts.len() {
            errs.push(format!(
                "face has {} shift operators, lower node has {}",
                self.shifts.len(),
                lower.shifts.len()
            ));
            return errs;
        }
        for (name, map, src) in [("restriction", &self.restrict, &lower.complex), ("pullback", &self.pullback, &upper.complex)] {
            if map.degree() != 0 || map.total().rows() != f.total_dim() || map.total().cols() != src.total_dim() {
                errs.push(format!("{name} map has the wrong shape or degree"));
                return errs;
            }
            if !map.commutes_with_d(src, f) {
                errs.push(format!("{name} map is not a chain map"));
            }
        }
        for (i, (lf, la)) in self.shifts.iter().zip(&lower.shifts).enumerate() {
            if self.restrict.compose(la) != lf.compose(&self.restrict) {
                errs.push(format!("restriction does not intertwine shift operator {i}"));
            }
        }
        for (j, coeffs) in upper_in_lower.iter().enumerate() {
            let Some(lb) = upper.shifts.get(j) else { continue };
            let mut combo = GradedMap::zero(f, f, 2);
            for (lf, k) in self.shifts.iter().zip(coeffs) {
                combo = combo.add(&lf.scale(&Q::from_integer(k.clone())));
            }
            if self.pullback.compose(lb) != combo.compose(&self.pullback) {
                errs.push(format!("pullback does not intertwine upper shift operator {j}"));
            }
        }
        // K-level
        if self.k_restrict.domain() != &lower.k.k0 || self.k_restrict.codomain() != &self.k0 {
            errs.push("K restriction map has the wrong groups".into());
        }
        if self.k_pullback.domain() != &upper.k.k0 || self.k_pullback.codomain() != &self.k0 {
            errs.push("K pullback map has the wrong groups".into());
        }
        if self.k_shifts.len() != self.shifts.len() {
            errs.push("face K shift count differs from its operator count".into());
        }
        if !errs.is_empty() {
            return errs;
        }
        for (i, s) in self.k_shifts.iter().enumerate() {
            if s.domain() != &self.k0 || s.codomain() != &self.k0 || s.inverse().is_err() {
                errs.push(format!("face K shift {i} is not an automorphism"));
                return errs;
            }
        }
        for (i, (sf, sa)) in self.k_shifts.iter().zip(&lower.k.shift_k0).enumerate() {
            if !self.k_restrict.compose(sa).unwrap().equals(&sf.compose(&self.k_restrict).unwrap()) {
                errs.push(format!("K restriction does not intertwine shift {i}"));
            }
        }
        for (j, coeffs) in upper_in_lower.iter().enumerate() {
            let Some(sb) = upper.k.shift_k0.get(j) else { continue };
            let combo = shift_power(&self.k0, &self.k_shifts, coeffs);
            if !self.k_pullback.compose(sb).unwrap().equals(&combo.compose(&self.k_pullback).unwrap()) {
                errs.push(format!("K pullback does not intertwine upper shift {j}"));
            }
        }
        errs
    }

    /// `exp(Σ k_i L^F_i)`
    pub fn twist(&self, coeffs: &[BigInt]) -> QMatrix {
        exp_of_shifts(&self.complex, &self.shifts, coeffs)
    }

    pub fn k_twist(&self, coeffs: &[BigInt]) -> AbHom {
        shift_power(&self.k0, &self.k_shifts, coeffs)
    }
}

/// Corner data for a chain `α < β < γ`: the corner complex `Z` with maps from
/// the three faces meeting there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerData {
    pub complex: CochainComplex,
    pub shifts: Vec<GradedMap>,
    /// `F_{αβ} → Z`
    pub from_lower: GradedMap,
    /// `F_{αγ} → Z`
    pub from_upper: GradedMap,
    /// `F_{βγ} → Z`
    pub from_deep: GradedMap,
}

impl CornerData {
    pub fn validate(&self, f_ab: &FaceData, f_ag: &FaceData, f_bg: &FaceData) -> Vec<String> {
        let mut errs = Vec::new();
        let z = &self.complex;
        for (name, map, src) in [
            ("lower", &self.from_lower, &f_ab.complex),
            ("upper", &self.from_upper, &f_ag.complex),
            ("deep", &self.from_deep, &f_bg.complex),
        ] {
            if map.total().rows() != z.total_dim() || map.total().cols() != src.total_dim() || map.degree() != 0 {
                errs.push(format!("corner map from {name} face has the wrong shape"));
                return errs;
            }
            if !map.commutes_with_d(src, z) {
                errs.push(format!("corner map from {name} face is not a chain map"));
            }
        }
        if self.from_lower.compose(&f_ab.restrict) != self.from_upper.compose(&f_ag.restrict) {
            errs.push("restrictions of the lowest node to the corner disagree".into());
        }
        if self.from_lower.compose(&f_ab.pullback) != self.from_deep.compose(&f_bg.restrict) {
            errs.push("middle node reaches the corner inconsistently".into());
        }
        if self.from_upper.compose(&f_ag.pullback) != self.from_deep.compose(&f_bg.pullback) {
            errs.push("deepest node reaches the corner inconsistently".into());
        }
        errs
    }
}

/// Integer vector helper used by fixtures and tests.
pub fn qvec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| crate::qlin::q(x)).collect()
}

/// `1` in the first coordinate of degree 0 for a point-like complex.
pub fn unit_vector(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::q;

    fn point_node() -> NodeSpaceData {
        NodeSpaceData { complex: CochainComplex::point(), shifts: vec![], k: KData::point(0), chern: None }
    }

    #[test]
    fn point_and_interval_valid() {
        assert!(validate_node(&point_node()).is_valid());
        let interval = NodeSpaceData {
            complex: CochainComplex::interval(),
            shifts: vec![GradedMap::zero(&CochainComplex::interval(), &CochainComplex::interval(), 2)],
            k: KData::point(1),
            chern: Some(ChernData { representatives: vec![qvec(&[1, 1, 0])] }),
        };
        let r = validate_node(&interval);
        assert!(r.is_valid(), "{:?}", r.errors);
    }

    #[test]
    fn d_squared_reported() {
        let d0 = QMatrix::from_i64(1, 1, &[1]);
        let d1 = QMatrix::from_i64(1, 1, &[1]);
        let c = CochainComplex::new(vec![1, 1, 1], vec![d0, d1]).unwrap();
        let node = NodeSpaceData { complex: c, shifts: vec![], k: KData::point(0), chern: None };
        let r = validate_node(&node);
        assert!(!r.is_valid());
        assert!(r.errors[0].contains("degree 0"));
    }

    #[test]
    fn cohomology_examples() {
        assert_eq!(CochainComplex::point().cohomology().unwrap(), vec![1]);
        assert_eq!(CochainComplex::interval().cohomology().unwrap(), vec![1, 0]);
        assert_eq!(CochainComplex::circle().cohomology().unwrap(), vec![1, 1]);
    }

    #[test]
    fn graded_blocks_round_trip() {
        let c = CochainComplex::new(vec![1, 0, 1], vec![QMatrix::zeros(0, 1), QMatrix::zeros(1, 0)]).unwrap();
        let l = GradedMap::from_blocks(&c, &c, 2, &[QMatrix::from_i64(1, 1, &[3])]).unwrap();
        assert_eq!(l.total(), &QMatrix::from_i64(2, 2, &[0, 0, 3, 0]));
        let blocks = l.blocks(&c, &c);
        assert_eq!(blocks[0], QMatrix::from_i64(1, 1, &[3]));
        assert!(GradedMap::new(&c, &c, 2, QMatrix::from_i64(2, 2, &[1, 0, 0, 0])).is_err());
        let e = exp_of_shifts(&c, &[l], &[BigInt::from(2)]);
        assert_eq!(e, QMatrix::from_i64(2, 2, &[1, 0, 6, 1]));
    }

    #[test]
    fn chern_shift_law_checked() {
        // K^0 = Z^2, σ(1) = 1 + β, σ(β) = β; ch(1) = 1, ch(β) = c in degree 2
        let c = CochainComplex::new(vec![1, 0, 1], vec![QMatrix::zeros(0, 1), QMatrix::zeros(1, 0)]).unwrap();
        let l = GradedMap::from_blocks(&c, &c, 2, &[QMatrix::from_i64(1, 1, &[1])]).unwrap();
        let k0 = FgAbGroup::free(2);
        let sigma = AbHom::new(k0.clone(), k0.clone(), IntMatrix::from_i64(&[&[1, 0], &[1, 1]])).unwrap();
        let mut k = KData::untwisted(k0, FgAbGroup::trivial(), 1, IntMatrix::from_i64(&[&[1, 0]]));
        k.shift_k0 = vec![sigma];
        let good = ChernData { representatives: vec![vec![q(1), q(0)], vec![q(0), q(1)]] };
        assert!(good.validate(&c, std::slice::from_ref(&l), &k).is_empty());
        let bad = ChernData { representatives: vec![vec![q(1), q(0)], vec![q(0), q(2)]] };
        assert!(!bad.validate(&c, &[l], &k).is_empty());
    }
}
