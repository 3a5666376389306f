//! Presentations of mapping class groups of non-orientable surfaces with
//! boundary, together with the machinery used to build and check them.

pub mod catalog;
pub mod delta;
pub mod error;
pub mod expr;
pub mod extension;
pub mod homology;
pub mod presentation;
pub mod schema;
pub mod serial;
pub mod snf;
pub mod subgroup;
pub mod symbol;
pub mod word;

pub use error::{Error, Result};
pub use symbol::{CurveName, Generator, Orientation};
pub use word::{Letter, Word};
pub use presentation::{Certificate, Presentation, Relator};
pub use snf::AbelianInvariants;
pub use subgroup::{BasisReport, Character, OrientationKernel, SubgroupGraph};
pub use delta::{Calculus, DeltaExpr, EpsilonTable, Factor, Rule};
pub use serial::Format;
