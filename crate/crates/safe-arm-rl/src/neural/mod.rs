//! Dense-network substrate: MLP forward/backward with analytic gradients,
//! a diagonal-Gaussian policy head, Adam updates, and checkpoint files.
//!
//! Parameters live in one flat `Vec<f64>` per network, which keeps the
//! optimizer, the finite-difference checks, and the checkpoint writer trivial.

mod adam;
mod checkpoint;
mod gaussian;
mod mlp;

pub use adam::AdamState;
pub use checkpoint::{load_tensors, save_tensors, NamedTensor};
pub use gaussian::GaussianPolicy;
pub use mlp::{Mlp, MlpCache};
