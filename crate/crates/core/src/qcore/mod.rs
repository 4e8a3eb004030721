//! Dense complex linear algebra and quantum-information primitives for
//! systems of total dimension at most 64.

pub mod eigen;
pub mod info;
pub mod operator;
pub mod random;
pub mod rational;
pub mod state;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use info::{
    coherent_information, entangled_fraction, entropy_of_spectrum, supports_orthogonal,
    von_neumann_entropy, werner_twirl,
};
pub use operator::{Operator, OperatorJson, MAX_DIM};
pub use random::{derive_seed, random_density_matrix, random_local_unitary, rng_from_seed, sample_povm, DiscreteSampler, QpvRng};
pub use rational::RationalMatrix;
pub use state::{bell_state, max_entangled_ket, swap_operator, BellLabel, DensityMatrix, Povm};
