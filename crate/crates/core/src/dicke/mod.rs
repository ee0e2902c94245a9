//! Two emitters in a laser-driven cavity: Floquet basis, secular Floquet
//! master equation and emitter-emitter entanglement.
//!
//! Frequencies are in units of `omega_r`, temperatures in `hbar omega_r / k_B`,
//! and `hbar = 1`. The Hilbert space is cavity Fock states `0..=n_ph` times two
//! qubits, flattened as `n * 4 + q1 * 2 + q2` with `g = 0`, `e = 1`.

pub mod bath;
pub mod entanglement;
pub mod experiment;
pub mod floquet;
pub mod hamiltonian;
pub mod master;

pub use bath::{lamb_shift_xi, rate_function_chi, thermal_occupation};
pub use entanglement::{concurrence, eof, eof_from_concurrence, TwoQubitState};
pub use experiment::{
    auto_n_ph, run_experiment, steady_sweep, CutoffCheck, ExperimentOptions, ExperimentResult, Protocol, SweepPoint,
};
pub use floquet::{floquet_basis, FloquetBasis, FloquetOptions};
pub use hamiltonian::{build_hamiltonian, DickeHamiltonian, DickeParams};
pub use master::{
    build_master_equation, evolve, reduced_two_qubit, stationary_state, transition_elements, FloquetDensityMatrix,
    MasterEquation, TransitionTable,
};
