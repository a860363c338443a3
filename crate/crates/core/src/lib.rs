//! Discrete phase-space (Wigner) representation of prime-dimensional
//! quantum systems: phase-point operators, Wigner functions, channels as
//! phase-space transition matrices, and Hamiltonian dynamics as rate
//! matrices.
//!
//! Phase points are pairs over GF(N) with N prime and are flattened as
//! `a1 * N + a2` wherever a single index is needed.

pub mod channels;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod phase_space;
pub mod random;
pub mod wigner;

pub use num_complex::Complex64;

pub use channels::{BMatrix, ChannelVerdict, KrausSet, LinearMap, Superoperator, TransitionMatrix};
pub use dynamics::{
    HamiltonianCoefficients, RProjector, RateMatrix, RateVerdict, Trajectory, HBAR,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix, DEFAULT_TOL};
pub use operators::OperatorBasis;
pub use phase_space::{
    enumerate_striations, symplectic, Direction, FieldElement, Line, PhasePoint, Prime, Striation,
};
pub use wigner::{StructureTables, WignerFunction};

/// Largest dimension the dense tables are built for.
pub const MAX_N: u32 = 13;

/// Everything that depends only on N: the operator basis and the structure
/// function tables. Building one costs O(N^6) time and memory.
#[derive(Debug, Clone)]
pub struct Qudit {
    basis: OperatorBasis,
    tables: StructureTables,
}

impl Qudit {
    pub fn new(n: u32) -> Result<Self> {
        let p = Prime::new(n)?;
        if n > MAX_N {
            return Err(Error::TooLarge { n, max: MAX_N });
        }
        let basis = OperatorBasis::new(p);
        let tables = StructureTables::new(&basis);
        Ok(Qudit { basis, tables })
    }

    pub fn n(&self) -> Prime {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.n().dim()
    }

    pub fn num_points(&self) -> usize {
        self.basis.n().num_points()
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn tables(&self) -> &StructureTables {
        &self.tables
    }
}
