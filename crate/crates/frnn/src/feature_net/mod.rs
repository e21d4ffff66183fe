//! Random Fourier-feature networks and their exact derivative networks.
//!
//! A [`FeatureNetwork`] is a single hidden layer with frozen random weights.
//! Because every neuron is `ρ(w·x + b)`, any partial derivative of a neuron is
//! again a neuron-shaped expression: `∂^m φ_i = (Π_j w_ij^{m_j}) ρ^{(|m|)}(w·x + b)`.
//! [`FeatureNetwork::eval_derivative_features`] evaluates exactly that, and
//! [`fd`] provides the finite-difference alternative used for comparison.

mod activation;
pub mod fd;
mod multi_index;
mod network;

pub use activation::{ActivationKind, MAX_ORDER};
pub use fd::{fd_derivative, fd_derivative_features, FdKind, FdScheme, FdSteps, Stencil};
pub use multi_index::MultiIndex;
pub use network::{DerivativeBasis, FeatureNetwork};
