//! Stratified Lie algebras, Rumin complexes, central extensions of Carnot
//! groups and contact lifts of smooth maps.

pub mod algebra;
pub mod expr;
pub mod extensions;
pub mod exterior;
pub mod field_forms;
pub mod fixtures;
pub mod forms;
pub mod func;
pub mod group;
pub mod io;
pub mod lift;
pub mod linalg;
pub mod maps;
pub mod path_lift;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod rumin;
pub mod sampling;
pub mod scalar;

pub use algebra::{Alg, AlgebraError, AlgebraSpec, BracketEntry, Family, GradedLinearMap, StratifiedAlgebra};
pub use extensions::{CentralExtension, ExtensionError, GradedSpace};
pub use field_forms::FieldForm;
pub use forms::AlgebraForm;
pub use func::Func;
pub use lift::{LiftVerdict, Route};
pub use linalg::QMatrix;
pub use maps::{GroupMap, PointMap};
pub use path_lift::{Curve, PathError};
pub use rational::Q;
pub use sampling::{Domain, Identity, Sampler};
