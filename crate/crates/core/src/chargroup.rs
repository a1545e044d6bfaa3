//! Dual-group bookkeeping: restrictions to closed subgroups, kernel lattices,
//! coset representatives and chain-compatible section systems.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::fgab::{
    preimage_representative, solve_integer, try_split, AbHom, FgAbGroup, FgabError, IntMatrix,
};

/// Coordinates of a character in the generators of a dual group.
pub type Character = Vec<BigInt>;

/// The dual `Ĝ` of a compact abelian Lie group, `Z^n ⊕ (finite)`.
pub type DualGroup = FgAbGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharGroupError {
    #[error("restriction {0} is not surjective")]
    NotSurjective(String),
    #[error("character {0:?} does not belong to {1}")]
    NotInGroup(Character, String),
    #[error("supplied kernel generators do not span the kernel of the restriction: {0}")]
    KernelMismatch(String),
    #[error("character {0:?} is not in the kernel lattice")]
    NotInKernel(Character),
    #[error("section tables have different supports")]
    SupportMismatch,
    #[error("nesting violated between chain levels {0} and {1}")]
    NestingViolated(usize, usize),
    #[error("section table entry {0:?} does not restrict back: {1}")]
    BadSection(Character, String),
    #[error(transparent)]
    Fgab(#[from] FgabError),
}

/// A closed subgroup `B ⊂ G`, given by the dual surjection `Ĝ → B̂`, together
/// with generators of its kernel `(G/B)^`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupDatum {
    restriction: AbHom,
    kernel_generators: Vec<Character>,
}

impl SubgroupDatum {
    /// Uses the kernel generators produced by the engine.
    pub fn new(restriction: AbHom) -> Result<Self, CharGroupError> {
        if !restriction.is_surjective() {
            return Err(CharGroupError::NotSurjective(format!(
                "{} -> {}",
                restriction.domain(),
                restriction.codomain()
            )));
        }
        let (_, inc) = crate::fgab::hom_kernel(&restriction);
        let gens = (0..inc.domain().ngens()).map(|j| inc.apply(&inc.domain().generator(j))).collect();
        Ok(SubgroupDatum { restriction, kernel_generators: gens })
    }

    /// Uses caller-supplied kernel generators; they must generate the kernel exactly.
    pub fn with_generators(restriction: AbHom, generators: Vec<Character>) -> Result<Self, CharGroupError> {
        let base = Self::new(restriction)?;
        let g = base.dual_group().clone();
        for x in &generators {
            if x.len() != g.ngens() {
                return Err(CharGroupError::NotInGroup(x.clone(), g.to_string()));
            }
            if !base.restriction.codomain().is_zero_element(&base.restriction.apply(x)) {
                return Err(CharGroupError::KernelMismatch(format!("{x:?} does not restrict to zero")));
            }
        }
        let n = g.ngens();
        let mut span = generators.clone();
        span.extend(g.relations().column_vecs());
        let kernel = base.restriction.kernel_lattice();
        if !crate::fgab::same_lattice(&span, &kernel, n) {
            return Err(CharGroupError::KernelMismatch(format!(
                "{} generators given, span differs from the kernel",
                generators.len()
            )));
        }
        let generators = generators.iter().map(|x| g.reduce(x)).collect();
        Ok(SubgroupDatum { restriction: base.restriction, kernel_generators: generators })
    }

    pub fn restriction(&self) -> &AbHom {
        &self.restriction
    }

    pub fn dual_group(&self) -> &DualGroup {
        self.restriction.domain()
    }

    pub fn subgroup_dual(&self) -> &FgAbGroup {
        self.restriction.codomain()
    }

    pub fn kernel_generators(&self) -> &[Character] {
        &self.kernel_generators
    }

    pub fn restrict(&self, g: &[BigInt]) -> Character {
        self.restriction.apply(g)
    }

    /// Coefficients `k` with `x = Σ k_i · generator_i`, if `x` lies in the kernel.
    pub fn kernel_coordinates(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let g = self.dual_group();
        let n = g.ngens();
        let m = self.kernel_generators.len();
        let block = IntMatrix::from_columns(&self.kernel_generators, n).hcat(&g.relations());
        solve_integer(&block, x).map(|w| w[..m].to_vec())
    }

    pub fn in_kernel(&self, x: &[BigInt]) -> bool {
        self.kernel_coordinates(x).is_some()
    }

    /// Canonical lift of `b` (Hermite-reduced preimage).
    pub fn canonical_lift(&self, b: &[BigInt]) -> Result<Character, CharGroupError> {
        let cod = self.subgroup_dual();
        if b.len() != cod.ngens() {
            return Err(CharGroupError::NotInGroup(b.to_vec(), cod.to_string()));
        }
        Ok(preimage_representative(&self.restriction, &cod.reduce(b))?)
    }
}

/// Generators of `(G/B)^ = ker(Ĝ → B̂)`.
pub fn kernel_lattice(r: &SubgroupDatum) -> Vec<Character> {
    r.kernel_generators().to_vec()
}

/// A finite table of coset representatives `b̂ ↦ τ(b̂)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SectionTable {
    pub entries: BTreeMap<Character, Character>,
    /// The table is the restriction of a homomorphic splitting.
    pub homomorphic: bool,
}

impl SectionTable {
    pub fn get(&self, b: &[BigInt]) -> Option<&Character> {
        self.entries.get(b)
    }

    pub fn support(&self) -> Vec<Character> {
        self.entries.keys().cloned().collect()
    }

    /// Checks `r(τ(b̂)) = b̂` on every entry.
    pub fn verify(&self, r: &SubgroupDatum) -> Result<(), CharGroupError> {
        for (b, t) in &self.entries {
            if !r.subgroup_dual().elements_equal(&r.restrict(t), b) {
                return Err(CharGroupError::BadSection(b.clone(), format!("lift {t:?}")));
            }
        }
        Ok(())
    }
}

/// Section table on `support`: the homomorphic splitting when one exists,
/// canonical preimages otherwise.
pub fn section(r: &SubgroupDatum, support: &[Character]) -> Result<SectionTable, CharGroupError> {
    let cod = r.subgroup_dual();
    let split = try_split(r.restriction())?;
    let mut entries = BTreeMap::new();
    for b in support {
        if b.len() != cod.ngens() {
            return Err(CharGroupError::NotInGroup(b.clone(), cod.to_string()));
        }
        let b = cod.reduce(b);
        let lift = match &split {
            Some(s) => s.apply(&b),
            None => r.canonical_lift(&b)?,
        };
        entries.insert(b, lift);
    }
    Ok(SectionTable { entries, homomorphic: split.is_some() })
}

/// `μ(b̂) = τ′(b̂) − τ(b̂)`, checked to lie in the kernel lattice.
pub fn compare_sections(
    r: &SubgroupDatum,
    tau: &SectionTable,
    tau_prime: &SectionTable,
) -> Result<BTreeMap<Character, Character>, CharGroupError> {
    if tau.entries.keys().ne(tau_prime.entries.keys()) {
        return Err(CharGroupError::SupportMismatch);
    }
    let g = r.dual_group();
    let mut out = BTreeMap::new();
    for (b, t) in &tau.entries {
        let mu = g.sub(&tau_prime.entries[b], t);
        if !r.in_kernel(&mu) {
            return Err(CharGroupError::NotInKernel(mu));
        }
        out.insert(b.clone(), mu);
    }
    Ok(out)
}

/// Elements of `support` whose image under `r_edge` is `target`.
pub fn fiber_support(r_edge: &AbHom, target: &[BigInt], support: &[Character]) -> Vec<Character> {
    support
        .iter()
        .filter(|s| r_edge.codomain().elements_equal(&r_edge.apply(s), target))
        .cloned()
        .collect()
}

/// The map `B̂_β → B̂_α` through which `r_α` factors when `ker r_β ⊆ ker r_α`.
pub fn edge_restriction(shallow: &SubgroupDatum, deep: &SubgroupDatum) -> Result<AbHom, CharGroupError> {
    let nested = deep.kernel_generators().iter().all(|k| shallow.in_kernel(k));
    if !nested {
        return Err(CharGroupError::KernelMismatch("deep kernel not contained in shallow kernel".into()));
    }
    let bd = deep.subgroup_dual();
    let cols: Vec<Vec<BigInt>> = (0..bd.ngens())
        .map(|j| {
            let lift = deep.canonical_lift(&bd.generator(j))?;
            Ok(shallow.restrict(&lift))
        })
        .collect::<Result<_, CharGroupError>>()?;
    let m = IntMatrix::from_columns(&cols, shallow.subgroup_dual().ngens());
    Ok(AbHom::new(bd.clone(), shallow.subgroup_dual().clone(), m)?)
}

/// Section tables along a chain `α_0 < α_1 < ... < α_k`, chosen from the
/// deepest level down so that `τ_i = τ_{i+1} ∘ τ_{i+1,i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionSystem {
    pub levels: Vec<SectionTable>,
    /// Edge sections `B̂_i → B̂_{i+1}` used in the construction.
    pub edges: Vec<SectionTable>,
}

pub fn chain_sections(chain: &[SubgroupDatum], supports: &[Vec<Character>]) -> Result<SectionSystem, CharGroupError> {
    assert_eq!(chain.len(), supports.len(), "one support per chain level");
    let k = chain.len();
    if k == 0 {
        return Ok(SectionSystem { levels: Vec::new(), edges: Vec::new() });
    }
    let mut edge_maps = Vec::new();
    for i in 0..k - 1 {
        let e = edge_restriction(&chain[i], &chain[i + 1]).map_err(|_| CharGroupError::NestingViolated(i, i + 1))?;
        edge_maps.push(SubgroupDatum::new(e)?);
    }
    let mut levels = vec![SectionTable::default(); k];
    let mut edges = vec![SectionTable::default(); k - 1];
    levels[k - 1] = section(&chain[k - 1], &supports[k - 1])?;
    for i in (0..k - 1).rev() {
        let edge = section(&edge_maps[i], &supports[i])?;
        let mut table = SectionTable::default();
        for (x, up) in &edge.entries {
            let lift = match levels[i + 1].get(up) {
                Some(t) => t.clone(),
                None => {
                    let extra = section(&chain[i + 1], std::slice::from_ref(up))?;
                    let t = extra.entries[up].clone();
                    levels[i + 1].entries.insert(up.clone(), t.clone());
                    t
                }
            };
            table.entries.insert(x.clone(), lift);
        }
        table.homomorphic = edge.homomorphic && levels[i + 1].homomorphic;
        levels[i] = table;
        edges[i] = edge;
    }
    let sys = SectionSystem { levels, edges };
    sys.verify(chain)?;
    Ok(sys)
}

impl SectionSystem {
    /// Checks every level restricts back and composites agree along the chain.
    pub fn verify(&self, chain: &[SubgroupDatum]) -> Result<(), CharGroupError> {
        for (lvl, r) in self.levels.iter().zip(chain) {
            lvl.verify(r)?;
        }
        for i in 0..self.edges.len() {
            for (x, up) in &self.edges[i].entries {
                let direct = self.levels[i].get(x);
                let composite = self.levels[i + 1].get(up);
                if direct.is_none() || direct != composite {
                    return Err(CharGroupError::BadSection(x.clone(), format!("composite mismatch at level {i}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgab::ints;

    fn datum(d: FgAbGroup, c: FgAbGroup, rows: &[&[i64]]) -> SubgroupDatum {
        let m = if rows.is_empty() { IntMatrix::zeros(0, d.ngens()) } else { IntMatrix::from_i64(rows) };
        SubgroupDatum::new(AbHom::new(d, c, m).unwrap()).unwrap()
    }

    fn z() -> FgAbGroup {
        FgAbGroup::free(1)
    }

    #[test]
    fn kernel_lattices() {
        let r = datum(z(), FgAbGroup::cyclic(2), &[&[1]]);
        assert_eq!(kernel_lattice(&r), vec![ints(&[2])]);
        let id = datum(z(), z(), &[&[1]]);
        assert!(kernel_lattice(&id).is_empty());
        let triv = datum(FgAbGroup::free(2), FgAbGroup::trivial(), &[]);
        assert_eq!(kernel_lattice(&triv).len(), 2);
        let not_onto = AbHom::new(z(), z(), IntMatrix::from_i64(&[&[2]])).unwrap();
        assert!(SubgroupDatum::new(not_onto).is_err());
    }

    #[test]
    fn supplied_generators_validated() {
        let r = AbHom::new(z(), FgAbGroup::cyclic(2), IntMatrix::from_i64(&[&[1]])).unwrap();
        assert!(SubgroupDatum::with_generators(r.clone(), vec![ints(&[-2])]).is_ok());
        assert!(SubgroupDatum::with_generators(r.clone(), vec![ints(&[4])]).is_err());
        assert!(SubgroupDatum::with_generators(r, vec![ints(&[1])]).is_err());
    }

    #[test]
    fn section_examples() {
        let r = datum(z(), FgAbGroup::cyclic(2), &[&[1]]);
        let t = section(&r, &[ints(&[0]), ints(&[1])]).unwrap();
        assert_eq!(t.get(&ints(&[0])), Some(&ints(&[0])));
        assert_eq!(t.get(&ints(&[1])), Some(&ints(&[1])));
        assert!(!t.homomorphic);
        let id = datum(z(), z(), &[&[1]]);
        let t = section(&id, &[ints(&[-3]), ints(&[4])]).unwrap();
        assert!(t.entries.iter().all(|(b, x)| b == x));
        let r = datum(FgAbGroup::free(2), z(), &[&[2, 3]]);
        let t = section(&r, &[ints(&[0]), ints(&[1])]).unwrap();
        assert_eq!(t.get(&ints(&[0])), Some(&ints(&[0, 0])));
        assert_eq!(t.get(&ints(&[1])), Some(&ints(&[-1, 1])));
        assert!(t.homomorphic);
    }

    #[test]
    fn compare_examples() {
        let r = datum(z(), FgAbGroup::cyclic(2), &[&[1]]);
        let t = section(&r, &[ints(&[1])]).unwrap();
        assert!(compare_sections(&r, &t, &t).unwrap().values().all(|m| m == &ints(&[0])));
        let mut t2 = t.clone();
        t2.entries.insert(ints(&[1]), ints(&[3]));
        assert_eq!(compare_sections(&r, &t, &t2).unwrap()[&ints(&[1])], ints(&[2]));
        let r = datum(FgAbGroup::free(2), z(), &[&[2, 3]]);
        let t = section(&r, &[ints(&[1])]).unwrap();
        let mut t2 = t.clone();
        t2.entries.insert(ints(&[1]), ints(&[2, -1]));
        assert_eq!(compare_sections(&r, &t, &t2).unwrap()[&ints(&[1])], ints(&[3, -2]));
        let empty = SectionTable::default();
        assert_eq!(compare_sections(&r, &t, &empty), Err(CharGroupError::SupportMismatch));
    }

    #[test]
    fn fiber_examples() {
        let to_trivial = AbHom::new(z(), FgAbGroup::trivial(), IntMatrix::zeros(0, 1)).unwrap();
        let s = vec![ints(&[-1]), ints(&[0]), ints(&[2])];
        assert_eq!(fiber_support(&to_trivial, &[], &s), s);
        let mod2 = AbHom::new(z(), FgAbGroup::cyclic(2), IntMatrix::from_i64(&[&[1]])).unwrap();
        let s = vec![ints(&[1]), ints(&[2]), ints(&[3])];
        assert_eq!(fiber_support(&mod2, &ints(&[1]), &s), vec![ints(&[1]), ints(&[3])]);
        assert!(fiber_support(&mod2, &ints(&[1]), &[]).is_empty());
    }

    #[test]
    fn chain_trivial_in_z2_in_u1() {
        let triv = datum(z(), FgAbGroup::trivial(), &[]);
        let half = datum(z(), FgAbGroup::cyclic(2), &[&[1]]);
        let full = datum(z(), z(), &[&[1]]);
        let supports = vec![
            vec![vec![]],
            vec![ints(&[0]), ints(&[1])],
            (-3..=3).map(|k| ints(&[k])).collect(),
        ];
        let sys = chain_sections(&[triv.clone(), half.clone(), full.clone()], &supports).unwrap();
        assert_eq!(sys.levels.len(), 3);
        sys.verify(&[triv.clone(), half.clone(), full.clone()]).unwrap();
        assert_eq!(sys.levels[0].get(&[]), Some(&ints(&[0])));
        let single = chain_sections(std::slice::from_ref(&half), &supports[1..2]).unwrap();
        assert_eq!(single.levels[0], section(&half, &supports[1]).unwrap());
        // order reversed: nesting fails
        assert!(matches!(
            chain_sections(&[full, triv], &[vec![ints(&[0])], vec![vec![]]]),
            Err(CharGroupError::NestingViolated(0, 1))
        ));
    }
}
