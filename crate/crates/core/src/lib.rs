//! Wigner functions for finite-dimensional quantum systems built from
//! rotated parity kernels `Δ(Ω) = 𝕌(Ω) Π 𝕌(Ω)† / D`.
//!
//! ```
//! use spin_wigner::{make_kernel, make_state, wigner, KernelSpec, PhasePoint};
//!
//! let kernel = make_kernel(&KernelSpec::Qubit).unwrap();
//! let rho = make_state(&"cat:j=1/2".parse().unwrap()).unwrap();
//! let field = wigner(&rho, &kernel, &[PhasePoint::single(0.0, 0.0)]).unwrap();
//! assert!((field.values[0] - 0.5).abs() < 1e-12);
//! ```

pub mod algebra;
pub mod error;
pub mod kernel;
pub mod phase_space;
pub mod rotations;
pub mod state;
pub mod verify;

pub use algebra::{ComplexMatrix, ComplexVector, HalfInteger};
pub use error::{Error, Result};
pub use kernel::{make_kernel, make_kernel_with_cap, rotated_kernel, Family, Kernel, KernelSpec};
pub use phase_space::{
    build_quadrature, collective_slice, integrate, monte_carlo_quadrature, negativity_volume,
    overlap, q_function, wigner, Quadrature, QuadratureOrder, ScalarField,
};
pub use rotations::{PhasePoint, SiteAngles};
pub use state::{evolve, make_state, oat_hamiltonian, purity, DensityOperator, StateSpec};
pub use verify::{
    dual_kernel, frame_superoperator, reconstruct, sw_report, DualKernel, FrameReport,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/phase-space.md")]
    mod phase_space {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
