//! Semidefinite relaxation of the discrete-phase quadratic problems.
//!
//! Both the BS and the IRS subproblem are `min z^H Q z` over constant-modulus
//! `z` augmented with one fixed entry. Lifting to `X = z z^H` and dropping the
//! rank constraint leaves `min tr(QX)` subject to `diag(X) = c`, `X >= 0`,
//! solved by [`solve_diag_sdp`]; [`round_solution`] maps the relaxed optimum
//! back onto the phase alphabet.

mod design;
mod rounding;
mod sdp;

pub use design::{sdr_beamform_irs, sdr_precode_bs, SdrOutcome, SdrSettings};
pub use rounding::{round_solution, PhaseProjection, Rounding, RANK1_THRESHOLD};
pub use sdp::{solve_diag_sdp, QuadraticObjective, SdpSolution, MAX_SDP_DIM};
