//! Complex Gaussian free fields of the trapped Hamiltonian, Wick-ordered
//! quartic interactions and their exact second moments.

pub mod error;
pub mod interaction;
pub mod io;
pub mod l2;
pub mod nelson;
pub mod oracle;
pub mod potential;
pub mod renorm;
pub mod sampler;

pub use error::{FieldError, Result};
pub use interaction::{interaction_value, wick_mass, FloorConstant, InteractionKind, InteractionValue, Interactions};
pub use io::{read_interaction_csv, save_batch, write_interaction_csv, InteractionRow};
pub use l2::{cross_moment, l2_distance_exact, l2_eps_local, l2_truncation, l2_truncation_from_kernels, l2_w_minus_v, L2Pair, SparseV};
pub use nelson::{nelson_tail, NelsonTail, MIN_TAIL_EVENTS};
pub use potential::{bump_profile, InteractionPotentialSpec, LatticeInteraction, Profile};
pub use renorm::{tau_and_e, tau_at_sites, tau_homogeneous, Renormalisation};
pub use sampler::{amplitudes, sample_coupled, sample_free_field, FieldBatch, FieldSampler, SamplerConfig};
