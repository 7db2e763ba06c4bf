//! Exact symbolic differential geometry on coordinate patches of `R^n`:
//! derived flags, Cauchy bundles, singular varieties and resolvent bundles,
//! recognition of partial prolongations of the first-order contact system,
//! and explicit construction of contact coordinate transformations.
//!
//! The crate is organised as a pipeline:
//! - [`expr`]: exact rational expressions in chart coordinates (the scalar field
//!   everything else is computed over), with a parser and canonical normal form
//! - [`sample`]: deterministic rational point sampling with pole avoidance
//! - [`matrix`]: linear algebra over the rational function field and over `Q`
//! - [`geom`]: vector fields, distributions, Lie brackets, derived flags,
//!   Cauchy bundles, intersections, pushforwards
//! - [`integrals`]: first integrals of integrable distributions by rational ansatz
//! - [`singular`]: polar matrices, degree of lines, singular varieties,
//!   quotients by Cauchy bundles, Weber structures and resolvent bundles
//! - [`signature`]: derived-type bookkeeping and the recognition test for
//!   partial prolongations (Goursat bundles)
//! - [`contact`]: contact systems `C(tau)`, adapted filtrations, fundamental
//!   functions, contact coordinates and equivalence verification
//! - [`doc`]: the problem / report / transformation document formats used by
//!   the command line tool

pub mod contact;
pub mod doc;
pub mod exec;
pub mod expr;
pub mod geom;
pub mod integrals;
pub mod matrix;
pub mod sample;
pub mod signature;
pub mod singular;

pub use expr::{Chart, Coordinate, EngineError, Expression, RationalPoint};
pub use geom::{Distribution, VectorField};
pub use sample::SampleConfig;
pub use signature::{DerivedTypeSignature, GoursatVerdict, TypeVector};
