pub mod algebra;
pub mod cyclotomic;
pub mod error;
pub mod grading;
pub mod hopf;
pub mod lie;
pub mod linear;
pub mod permutation;
pub mod syntax;

pub use algebra::{GeneratorTable, GradedPoly, PresentedAlgebra, TensorSquarePoly, Word};
pub use cyclotomic::{CycScalar, Root};
pub use error::{Error, Result};
pub use grading::{AbelianGroup, Bicharacter, GroupElement, ZetaFamily};
pub use hopf::{BiproductInstance, HopfInstance, HopfReport, HopfStructure, PrimitiveSpace};
pub use lie::{BracketEntry, LiePresentation, LieReport, UndeclaredPolicy};
pub use linear::LinComb;
pub use permutation::Permutation;
