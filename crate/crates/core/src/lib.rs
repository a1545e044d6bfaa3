//! Character-graded equivariant K-theory and delocalized cohomology for
//! abelian compact group actions presented as resolved isotropy trees.
//!
//! All computations are exact: integers are [`num_bigint::BigInt`] and
//! rationals [`num_rational::BigRational`].

pub mod fgab;
pub mod qlin;
pub mod chargroup;
pub mod basespace;
pub mod itspace;
pub mod model;
pub mod deloc;
pub mod ktheory;
pub mod redbun;
pub mod fixtures;
pub mod descriptor;

pub use basespace::{ChernData, CochainComplex, CornerData, FaceData, GradedMap, KData, NodeSpaceData, SpaceError};
pub use chargroup::{CharGroupError, Character, SubgroupDatum};
pub use deloc::{DelocCohomology, DelocComplex, DelocError};
pub use descriptor::{parse_descriptor, ActionDescriptor, DescriptorError};
pub use fgab::{AbHom, FgAbGroup, FgabError, IntMatrix};
pub use fixtures::{generate_fixture, Expected, Fixture, FixtureError};
pub use itspace::{IsotropyTree, TreeError};
pub use ktheory::{HexagonVerdict, KError, SixTermInstance};
pub use model::{ModelError, ResolvedAction, SectionChoice, WindowRule, Windows};
pub use qlin::{QMatrix, Q};
pub use redbun::{BundleError, IteratedReducedBundle, ReducedBundleNode};
