//! Effective interactions between superconducting qubits mediated by a
//! nonlinear inductive coupler.
//!
//! The coupler is eliminated under the Born-Oppenheimer approximation: its
//! ground-state energy `E_g(φ_x)` becomes a potential for the qubit fluxes.
//! [`kapteyn`] supplies the Bessel/Kapteyn machinery that makes the classical
//! minimum explicit, [`coupler`] builds the Fourier series of `E_g`,
//! [`projection`] reduces it to Pauli coefficients, [`oscillator`] holds the
//! truncated Fock-space solvers, and [`bench`] compares every reduced theory
//! against exact diagonalization of the full circuit.
//!
//! Energies inside [`coupler`] are in units of the coupler inductive energy
//! `E_L̃c`. Everything that involves qubits uses a global unit chosen by the
//! caller (the CLI uses the first qubit's inductive energy).

pub mod bench;
pub mod coupler;
mod error;
pub mod exec;
pub mod kapteyn;
pub mod oscillator;
pub mod projection;

pub use error::{Error, Result};
