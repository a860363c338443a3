//! Quantum channels as phase-space transition matrices.
//!
//! Every input path (Kraus set, unitary, abstract linear map, raw `P`) ends
//! in a [`TransitionMatrix`]; verdicts are computed from `P` and the `B`
//! matrix derived from it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, RealMatrix, ONE, ZERO};
use crate::operators::OperatorBasis;
use crate::phase_space::Prime;
use crate::wigner::{StructureTables, WignerFunction};

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_modulus(left: Prime, right: Prime) -> Result<()> {
    if left != right {
        return Err(Error::ModulusMismatch {
            left: left.get(),
            right: right.get(),
        });
    }
    Ok(())
}

/// Kraus operators `B_j` of a channel `rho -> sum_j B_j rho B_j^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    n: Prime,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    /// Checks dimensions and `sum_j B_j^dagger B_j = I` within `tol`.
    pub fn new(n: Prime, operators: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let k = Self::new_unchecked(n, operators)?;
        let residual = k.completeness_residual();
        if residual > tol {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(k)
    }

    /// Checks dimensions only; for deliberately non-trace-preserving maps.
    pub fn new_unchecked(n: Prime, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        }
        for op in &operators {
            check_dim(n.dim(), op.dim())?;
        }
        Ok(KrausSet { n, operators })
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn completeness_residual(&self) -> f64 {
        let d = self.n.dim();
        let mut s = ComplexMatrix::zeros(d);
        for b in &self.operators {
            s = &s + &b.adjoint().matmul(b);
        }
        s.max_abs_diff(&ComplexMatrix::identity(d))
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.dim());
        for b in &self.operators {
            out = &out + &b.matmul(rho).matmul(&b.adjoint());
        }
        out
    }
}

/// A linear map on N x N matrices.
pub trait LinearMap {
    fn apply_to(&self, m: &ComplexMatrix) -> ComplexMatrix;
}

impl<F> LinearMap for F
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    fn apply_to(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self(m)
    }
}

impl LinearMap for KrausSet {
    fn apply_to(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.apply(m)
    }
}

/// An N^2 x N^2 matrix acting on row-major vectorized operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    n: Prime,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(n: Prime, matrix: ComplexMatrix) -> Result<Self> {
        check_dim(n.num_points(), matrix.dim())?;
        Ok(Superoperator { n, matrix })
    }

    /// Tabulates `E` on the matrix units `|j><k|`.
    pub fn from_map(n: Prime, e: &impl LinearMap) -> Self {
        let d = n.dim();
        let mut matrix = ComplexMatrix::zeros(d * d);
        for j in 0..d {
            for k in 0..d {
                let mut unit = ComplexMatrix::zeros(d);
                unit[(j, k)] = ONE;
                let image = e.apply_to(&unit);
                for (row, &v) in image.as_slice().iter().enumerate() {
                    matrix[(row, j * d + k)] = v;
                }
            }
        }
        Superoperator { n, matrix }
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl LinearMap for Superoperator {
    fn apply_to(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = self.matrix.matvec(m.as_slice());
        ComplexMatrix::from_vec(v).expect("superoperator output has square length")
    }
}

/// Real N^2 x N^2 matrix with `P[(alpha, gamma)]` the transition weight
/// `gamma -> alpha`. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: Prime,
    p: RealMatrix,
}

impl TransitionMatrix {
    pub fn new(n: Prime, p: RealMatrix) -> Result<Self> {
        check_dim(n.num_points(), p.dim())?;
        Ok(TransitionMatrix { n, p })
    }

    pub fn identity(n: Prime) -> Self {
        TransitionMatrix {
            n,
            p: RealMatrix::identity(n.num_points()),
        }
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.p
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.p
    }

    /// `max_gamma |sum_alpha P_{alpha gamma} - 1|`.
    pub fn normalization_residual(&self) -> f64 {
        self.p
            .column_sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The channel `self` applied after `first`.
    pub fn compose(&self, first: &TransitionMatrix) -> Result<TransitionMatrix> {
        check_modulus(self.n, first.n)?;
        Ok(TransitionMatrix {
            n: self.n,
            p: self.p.matmul(&first.p),
        })
    }
}

/// Hermitian (for real `P`) N^2 x N^2 matrix indexed by phase-point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BMatrix {
    n: Prime,
    b: ComplexMatrix,
}

impl BMatrix {
    pub fn new(n: Prime, b: ComplexMatrix) -> Result<Self> {
        check_dim(n.num_points(), b.dim())?;
        Ok(BMatrix { n, b })
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.b
    }
}

/// `B_{bd} = sum_j B^(j)_b conj(B^(j)_d)` with `B^(j)_a = (1/N) Tr(A_a B_j)`.
pub fn bmatrix_from_kraus(basis: &OperatorBasis, k: &KrausSet) -> Result<BMatrix> {
    check_modulus(basis.n(), k.n())?;
    let m = basis.n().num_points();
    let mut b = ComplexMatrix::zeros(m);
    for op in k.operators() {
        let c = basis.expand(op)?;
        for i in 0..m {
            for j in 0..m {
                b[(i, j)] += c[i] * c[j].conj();
            }
        }
    }
    Ok(BMatrix { n: basis.n(), b })
}

/// `P_{ag} = sum_{b,d} Xi_{abgd} B_{bd}`; fails if the result is not real
/// within `tol`, which signals a non-Hermitian `B`.
pub fn p_from_bmatrix(tables: &StructureTables, b: &BMatrix, tol: f64) -> Result<TransitionMatrix> {
    let n = tables.n();
    check_modulus(n, b.n())?;
    let m = n.num_points();
    let bm = b.matrix();
    let mut out = ComplexMatrix::zeros(m);
    for a in 0..m {
        for g in 0..m {
            let mut acc = ZERO;
            if n.is_odd() {
                for beta in 0..m {
                    let d = tables.parallelogram_completion(a, beta, g);
                    acc += tables.xi(a, beta, g, d) * bm[(beta, d)];
                }
            } else {
                for beta in 0..m {
                    for d in 0..m {
                        acc += tables.xi(a, beta, g, d) * bm[(beta, d)];
                    }
                }
            }
            out[(a, g)] = acc;
        }
    }
    Ok(TransitionMatrix {
        n,
        p: out.to_real(tol)?,
    })
}

/// `B_{bd} = (1/N^2) sum_{a,g} Xi_{b a d g} P_{ag}`. Any real `P` is accepted.
pub fn bmatrix_from_p(tables: &StructureTables, p: &TransitionMatrix) -> Result<BMatrix> {
    let n = tables.n();
    check_modulus(n, p.n())?;
    let m = n.num_points();
    let pm = p.matrix();
    let scale = 1.0 / m as f64;
    let mut b = ComplexMatrix::zeros(m);
    for beta in 0..m {
        for d in 0..m {
            let mut acc = ZERO;
            if n.is_odd() {
                for a in 0..m {
                    let g = tables.parallelogram_completion(beta, a, d);
                    acc += tables.xi(beta, a, d, g) * pm[(a, g)];
                }
            } else {
                for a in 0..m {
                    for g in 0..m {
                        acc += tables.xi(beta, a, d, g) * pm[(a, g)];
                    }
                }
            }
            b[(beta, d)] = acc * scale;
        }
    }
    Ok(BMatrix { n, b })
}

/// `P_{ar} = (1/N) Tr(A_a U A_r U^dagger)`, an orthogonal matrix.
pub fn p_from_unitary(
    basis: &OperatorBasis,
    u: &ComplexMatrix,
    tol: f64,
) -> Result<TransitionMatrix> {
    check_dim(basis.n().dim(), u.dim())?;
    let residual = u.unitary_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let ud = u.adjoint();
    p_from_map(basis, &|m: &ComplexMatrix| u.matmul(m).matmul(&ud))
}

/// `P_{ag} = (1/N) Tr[A_a E(A_g)]`.
pub fn p_from_map(basis: &OperatorBasis, e: &impl LinearMap) -> Result<TransitionMatrix> {
    let n = basis.n();
    let m = n.num_points();
    let mut p = RealMatrix::zeros(m);
    let mut worst = 0.0f64;
    for g in 0..m {
        let image = e.apply_to(basis.a(g));
        check_dim(n.dim(), image.dim())?;
        let col = basis.expand(&image)?;
        for (a, c) in col.iter().enumerate() {
            worst = worst.max(c.im.abs());
            p[(a, g)] = c.re;
        }
    }
    // A map that is not Hermiticity-preserving has no real P.
    let tol = 1e-9 * (1.0 + p.max_abs());
    if worst > tol {
        return Err(Error::NotReal { residual: worst });
    }
    Ok(TransitionMatrix { n, p })
}

/// `W'_a = sum_g P_{ag} W_g`.
pub fn apply_channel(p: &TransitionMatrix, w: &WignerFunction) -> Result<WignerFunction> {
    check_modulus(p.n(), w.n())?;
    WignerFunction::new(p.n(), p.matrix().matvec(w.values()))
}

/// Margins behind a channel verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVerdict {
    /// `max_g |sum_a P_{ag} - 1|`.
    pub normalization_residual: f64,
    /// Smallest eigenvalue of the `B` matrix.
    pub min_eigenvalue: f64,
    pub trace: Complex64,
    pub hermiticity_residual: f64,
    /// Number of eigenvalues of `B` with magnitude above `tol`.
    pub rank: usize,
    pub legal: bool,
    pub unitary: bool,
}

/// Legal iff columns sum to one and `B` is positive semidefinite, both
/// within `tol`. Unitary iff legal and `B` has rank one.
pub fn validate_channel(
    tables: &StructureTables,
    p: &TransitionMatrix,
    tol: f64,
) -> Result<ChannelVerdict> {
    let b = bmatrix_from_p(tables, p)?;
    let bm = b.matrix();
    let hermiticity_residual = bm.hermitian_residual();
    let eig = linalg::hermitian_eig(&bm.hermitian_part(), f64::INFINITY)?;
    let min_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
    let rank = eig.values.iter().filter(|l| l.abs() > tol).count();
    let normalization_residual = p.normalization_residual();
    let legal = normalization_residual <= tol && min_eigenvalue >= -tol;
    Ok(ChannelVerdict {
        normalization_residual,
        min_eigenvalue,
        trace: bm.trace(),
        hermiticity_residual,
        rank,
        legal,
        unitary: legal && rank == 1,
    })
}

/// Normalized with a rank-one `B`.
pub fn is_unitary_channel(
    tables: &StructureTables,
    p: &TransitionMatrix,
    tol: f64,
) -> Result<bool> {
    Ok(validate_channel(tables, p, tol)?.unitary)
}

/// `max_{a,b,g} |sum_{r,s,t} P_{ar} P_{bs} P_{gt} Gamma_{rst} - Gamma_{abg}|`.
pub fn gamma_preservation_residual(tables: &StructureTables, p: &TransitionMatrix) -> Result<f64> {
    check_modulus(tables.n(), p.n())?;
    let m = tables.n().num_points();
    let pm = p.matrix();
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    // contract one index at a time: O(N^8) instead of O(N^12)
    let mut t1 = vec![ZERO; m * m * m];
    for r in 0..m {
        for s in 0..m {
            for g in 0..m {
                let mut acc = ZERO;
                for t in 0..m {
                    acc += tables.gamma(r, s, t) * pm[(g, t)];
                }
                t1[idx(r, s, g)] = acc;
            }
        }
    }
    let mut t2 = vec![ZERO; m * m * m];
    for r in 0..m {
        for b in 0..m {
            for g in 0..m {
                let mut acc = ZERO;
                for s in 0..m {
                    acc += t1[idx(r, s, g)] * pm[(b, s)];
                }
                t2[idx(r, b, g)] = acc;
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for g in 0..m {
                let mut acc = ZERO;
                for r in 0..m {
                    acc += t2[idx(r, b, g)] * pm[(a, r)];
                }
                worst = worst.max((acc - tables.gamma(a, b, g)).norm());
            }
        }
    }
    Ok(worst)
}

/// `C = (1/N) sum_{jk} |j><k| (x) E(|j><k|)` on the doubled space, basis
/// index `j * N + m`.
pub fn choi_operator(n: Prime, e: &impl LinearMap) -> Result<ComplexMatrix> {
    let d = n.dim();
    let mut c = ComplexMatrix::zeros(d * d);
    let scale = 1.0 / d as f64;
    for j in 0..d {
        for k in 0..d {
            let mut unit = ComplexMatrix::zeros(d);
            unit[(j, k)] = ONE;
            let image = e.apply_to(&unit);
            check_dim(d, image.dim())?;
            for m in 0..d {
                for l in 0..d {
                    c[(j * d + m, k * d + l)] = image[(m, l)] * scale;
                }
            }
        }
    }
    Ok(c)
}

/// The Choi operator in the basis `|Psi_b> = (I (x) A_b)|Phi>`, where `|Phi>`
/// is the normalized maximally entangled vector. Equals the `B` matrix.
pub fn choi_in_psi_basis(basis: &OperatorBasis, e: &impl LinearMap) -> Result<ComplexMatrix> {
    let n = basis.n();
    let d = n.dim();
    let m = n.num_points();
    let c = choi_operator(n, e)?;
    let inv_sqrt = 1.0 / (d as f64).sqrt();
    let psi: Vec<Vec<Complex64>> = (0..m)
        .map(|b| {
            let a = basis.a(b);
            let mut v = vec![ZERO; d * d];
            for j in 0..d {
                for k in 0..d {
                    v[j * d + k] = a[(k, j)] * inv_sqrt;
                }
            }
            v
        })
        .collect();
    let c_psi: Vec<Vec<Complex64>> = psi.iter().map(|v| c.matvec(v)).collect();
    Ok(ComplexMatrix::from_fn(m, |b, dd| {
        psi[b]
            .iter()
            .zip(&c_psi[dd])
            .map(|(x, y)| x.conj() * y)
            .sum()
    }))
}

/// A Kraus set reproducing a legal `B`: one operator `sqrt(lambda) sum_a v_a A_a`
/// per eigenpair with `lambda > tol`. Unique only up to unitary mixing.
pub fn kraus_from_bmatrix(basis: &OperatorBasis, b: &BMatrix, tol: f64) -> Result<KrausSet> {
    check_modulus(basis.n(), b.n())?;
    let eig = linalg::hermitian_eig(b.matrix(), tol)?;
    if let Some(&lo) = eig.values.first() {
        if lo < -tol {
            return Err(Error::InvalidArgument(format!(
                "B matrix is not positive semidefinite (min eigenvalue {lo:e})"
            )));
        }
    }
    let mut ops = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate().rev() {
        if lam <= tol {
            continue;
        }
        let coeffs: Vec<Complex64> = eig.vector(k).iter().map(|v| v * lam.sqrt()).collect();
        ops.push(basis.synthesize(&coeffs)?);
    }
    if ops.is_empty() {
        ops.push(ComplexMatrix::zeros(basis.n().dim()));
    }
    KrausSet::new_unchecked(basis.n(), ops)
}
