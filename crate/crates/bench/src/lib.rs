//! Seeded inputs shared by the benchmarks.

use qphase::channels::bmatrix_from_p;
use qphase::dynamics::rates_from_hamiltonian;
use qphase::{
    BMatrix, ComplexMatrix, HamiltonianCoefficients, Qudit, RateMatrix, RealMatrix,
    TransitionMatrix, WignerFunction, DEFAULT_TOL, HBAR,
};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub struct Fixture {
    pub qudit: Qudit,
    pub hermitian: ComplexMatrix,
    pub hamiltonian: HamiltonianCoefficients,
    pub rates: RateMatrix,
    pub transition: TransitionMatrix,
    pub bmatrix: BMatrix,
    pub wigner: WignerFunction,
}

impl Fixture {
    pub fn new(n: u32) -> Self {
        let qudit = Qudit::new(n).expect("supported prime");
        let mut rng = StdRng::seed_from_u64(u64::from(n));
        let m = qudit.num_points();

        let hermitian = qphase::random::hermitian(qudit.dim(), &mut rng);
        let hamiltonian =
            HamiltonianCoefficients::from_operator(qudit.basis(), &hermitian, DEFAULT_TOL).unwrap();
        let rates = rates_from_hamiltonian(qudit.tables(), &hamiltonian, HBAR).unwrap();
        let transition = TransitionMatrix::new(
            qudit.n(),
            RealMatrix::from_vec(m, qphase::random::real_vector(m * m, &mut rng)).unwrap(),
        )
        .unwrap();
        let bmatrix = bmatrix_from_p(qudit.tables(), &transition).unwrap();
        let rho = qphase::random::density(qudit.dim(), &mut rng);
        let wigner = qphase::wigner::wigner_from_density(qudit.basis(), &rho, DEFAULT_TOL).unwrap();

        Fixture {
            qudit,
            hermitian,
            hamiltonian,
            rates,
            transition,
            bmatrix,
            wigner,
        }
    }
}
