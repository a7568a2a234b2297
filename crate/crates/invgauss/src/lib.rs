//! Numerical laboratory for harmonic analysis in the inverse Gaussian
//! setting: the measure γ₋₁ with density e^{|x|²}π^{n/2}, the Hermite-type
//! eigenbasis H̃_k, the semigroup kernels and their time derivatives, Weyl
//! fractional derivatives, Riesz and conjugation kernels, and the variation,
//! jump, oscillation and differential-transform functionals evaluated on
//! sampled trajectories.
//!
//! See the guide in `book/` (rendered with mdbook) for a narrative tour; the
//! code snippets there are compiled and run as doc-tests via [`guide`].

pub mod frac;
pub mod guide;
pub mod kernels;
pub mod measure;
pub mod ops;
pub mod pathops;
pub mod quad;
pub mod special;
pub mod spectral;

pub use quad::{QuadratureConfig, SingularityHandling};
pub use special::MultiIndex;
