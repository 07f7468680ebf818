//! Brownian-bridge path integrals: heat kernels `e^{-th}(x,y)` and the
//! density `ρ_ν(x)` by Feynman–Kac, with spectral oracles for comparison.

pub mod envelope;
pub mod error;
pub mod fk;
pub mod io;
pub mod moments;
pub mod oracle;
pub mod path;
pub mod rho;

pub use envelope::envelope_check_heat;
pub use error::{BridgeError, Result};
pub use fk::{fk_heat_kernel, fk_heat_kernel_shared, Domain, FKEstimate, FkConfig, FkTarget};
pub use io::{read_fk_csv, write_fk_csv, FkRow};
pub use moments::{bridge_moment_fit, MomentFit, MomentRow};
pub use oracle::{bilinear_stencil, SpectralOracle};
pub use path::{default_steps, sample_bridge, BridgePath, MIN_STEPS};
pub use rho::{fk_rho_nu, rho_tail_bound, terms_for_tail};
