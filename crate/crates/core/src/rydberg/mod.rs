//! Quantum-defect levels, Numerov radial functions, angular algebra and polarizabilities.

pub mod angular;
pub mod cache;
pub mod numerov;
pub mod polarizability;
pub mod state;

pub use angular::{
    angular_element, angular_spin_element, c_tensor_direction, clebsch_gordan, wigner_3j,
    AngularState, Tensor,
};
pub use cache::WavefunctionStore;
pub use numerov::{numerov_radial, radial_moment, step_convergence, RadialWavefunction, StepSpec};
pub use polarizability::{polarizability, polarizability_au, z_element};
pub use state::{defect_energy, BasisSpec, Level, RydbergState};
