//! Wigner transforms, striation marginals, purity, and the three- and
//! four-point structure functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::operators::{omega_pow, OperatorBasis};
use crate::phase_space::{enumerate_striations, symplectic, PhasePoint, Prime};

/// Real values over the N^2 phase points, in flattening order.
///
/// Normalization is not enforced: point masses and other illegal functions
/// are legitimate intermediate objects.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFunction {
    n: Prime,
    values: Vec<f64>,
}

impl WignerFunction {
    pub fn new(n: Prime, values: Vec<f64>) -> Result<Self> {
        if values.len() != n.num_points() {
            return Err(Error::DimensionMismatch {
                expected: n.num_points(),
                found: values.len(),
            });
        }
        Ok(WignerFunction { n, values })
    }

    /// From an N x N grid indexed `[a1][a2]`.
    pub fn from_grid(n: Prime, grid: &[Vec<f64>]) -> Result<Self> {
        if grid.len() != n.dim() {
            return Err(Error::DimensionMismatch {
                expected: n.dim(),
                found: grid.len(),
            });
        }
        let mut values = Vec::with_capacity(n.num_points());
        for row in grid {
            if row.len() != n.dim() {
                return Err(Error::DimensionMismatch {
                    expected: n.dim(),
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(WignerFunction { n, values })
    }

    /// The maximally mixed state, `1/N^2` everywhere.
    pub fn uniform(n: Prime) -> Self {
        let m = n.num_points();
        WignerFunction {
            n,
            values: vec![1.0 / m as f64; m],
        }
    }

    /// `W_b = delta_{b, gamma}`; represents the operator `A_gamma`.
    pub fn point_mass(gamma: PhasePoint) -> Self {
        let n = gamma.modulus();
        let mut values = vec![0.0; n.num_points()];
        values[gamma.index()] = 1.0;
        WignerFunction { n, values }
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, p: PhasePoint) -> f64 {
        self.values[p.index()]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn to_grid(&self) -> Vec<Vec<f64>> {
        self.values
            .chunks(self.n.dim())
            .map(|c| c.to_vec())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &WignerFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `W_a = (1/N) Tr(A_a rho)` for a density matrix (Hermitian, unit trace).
pub fn wigner_from_density(
    basis: &OperatorBasis,
    rho: &ComplexMatrix,
    tol: f64,
) -> Result<WignerFunction> {
    let w = wigner_from_operator(basis, rho, tol)?;
    let residual = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    if residual > tol {
        return Err(Error::NotUnitTrace { residual });
    }
    Ok(w)
}

/// Like [`wigner_from_density`] but accepts any Hermitian operator.
pub fn wigner_from_operator(
    basis: &OperatorBasis,
    m: &ComplexMatrix,
    tol: f64,
) -> Result<WignerFunction> {
    let asymmetry = m.hermitian_residual();
    if asymmetry > tol {
        return Err(Error::NotHermitian { asymmetry });
    }
    let coeffs = basis.expand(m)?;
    let residual = coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::NotReal { residual });
    }
    WignerFunction::new(basis.n(), coeffs.iter().map(|z| z.re).collect())
}

/// `rho = sum_a W_a A_a`.
pub fn density_from_wigner(basis: &OperatorBasis, w: &WignerFunction) -> Result<ComplexMatrix> {
    if w.n() != basis.n() {
        return Err(Error::ModulusMismatch {
            left: basis.n().get(),
            right: w.n().get(),
        });
    }
    basis.synthesize_real(w.values())
}

/// Line sums of `W` for every striation, in [`enumerate_striations`] order.
pub fn striation_marginals(w: &WignerFunction) -> Vec<Vec<f64>> {
    enumerate_striations(w.n())
        .iter()
        .map(|s| {
            let mut sums = vec![0.0; w.n().dim()];
            for p in w.n().points() {
                sums[s.line_of(p)] += w.get(p);
            }
            sums
        })
        .collect()
}

/// `(1/N) exp[-(4 pi i / N)(<a,b> + <b,g> + <g,a>)]`, valid for odd N.
pub fn gamma_closed_form(
    alpha: PhasePoint,
    beta: PhasePoint,
    gamma: PhasePoint,
) -> Result<Complex64> {
    let n = alpha.modulus();
    if !n.is_odd() {
        return Err(Error::Unsupported {
            n: 2,
            reason: "the closed form of the three-point function needs odd N",
        });
    }
    let s = symplectic(alpha, beta)? + symplectic(beta, gamma)? + symplectic(gamma, alpha)?;
    let phase = -4.0 * PI * s.value() as f64 / n.get() as f64;
    Ok(Complex64::from_polar(1.0 / n.get() as f64, phase))
}

/// `(1/N) Tr(A_a A_b A_g)`.
pub fn gamma_trace(
    basis: &OperatorBasis,
    alpha: PhasePoint,
    beta: PhasePoint,
    gamma: PhasePoint,
) -> Complex64 {
    let ab = basis.phase_point(alpha).matmul(basis.phase_point(beta));
    ab.trace_product(basis.phase_point(gamma)) / basis.n().get() as f64
}

/// `delta_{a-d, b-g} omega^{2 <d-a, b-a>}`, valid for odd N. Nonzero only on
/// (possibly degenerate) parallelograms.
pub fn xi_closed_form(
    alpha: PhasePoint,
    beta: PhasePoint,
    gamma: PhasePoint,
    delta: PhasePoint,
) -> Result<Complex64> {
    let n = alpha.modulus();
    if !n.is_odd() {
        return Err(Error::Unsupported {
            n: 2,
            reason: "the closed form of the four-point function needs odd N",
        });
    }
    if alpha - delta != beta - gamma {
        return Ok(ZERO);
    }
    let area = symplectic(delta - alpha, beta - alpha)?;
    Ok(omega_pow(n, 2 * area.value() as i64))
}

/// `(1/N) Tr(A_a A_b A_g A_d)`.
pub fn xi_trace(
    basis: &OperatorBasis,
    alpha: PhasePoint,
    beta: PhasePoint,
    gamma: PhasePoint,
    delta: PhasePoint,
) -> Complex64 {
    let ab = basis.phase_point(alpha).matmul(basis.phase_point(beta));
    let gd = basis.phase_point(gamma).matmul(basis.phase_point(delta));
    ab.trace_product(&gd) / basis.n().get() as f64
}

/// Dense three-point table plus a four-point evaluator.
///
/// Gamma is stored for all N^6 triples. Xi is evaluated from its closed form
/// for odd N; for N = 2 the 256-entry table is stored.
#[derive(Debug, Clone)]
pub struct StructureTables {
    n: Prime,
    gamma: Vec<Complex64>,
    qubit_xi: Option<Vec<Complex64>>,
}

impl StructureTables {
    pub fn new(basis: &OperatorBasis) -> Self {
        let n = basis.n();
        let m = n.num_points();
        let mut gamma = Vec::with_capacity(m * m * m);
        if n.is_odd() {
            let scale = 1.0 / n.get() as f64;
            let unit = -4.0 * PI / n.get() as f64;
            for a in 0..m {
                for b in 0..m {
                    let ab = n.symplectic_idx(a, b);
                    for c in 0..m {
                        let s = (ab + n.symplectic_idx(b, c) + n.symplectic_idx(c, a)) % n.get();
                        gamma.push(Complex64::from_polar(scale, unit * s as f64));
                    }
                }
            }
        } else {
            for a in n.points() {
                for b in n.points() {
                    for c in n.points() {
                        gamma.push(gamma_trace(basis, a, b, c));
                    }
                }
            }
        }
        let qubit_xi = (!n.is_odd()).then(|| {
            let mut t = Vec::with_capacity(m.pow(4));
            for a in n.points() {
                for b in n.points() {
                    for c in n.points() {
                        for d in n.points() {
                            t.push(xi_trace(basis, a, b, c, d));
                        }
                    }
                }
            }
            t
        });
        StructureTables { n, gamma, qubit_xi }
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    /// Gamma by flattened indices.
    #[inline]
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let m = self.n.num_points();
        self.gamma[(a * m + b) * m + c]
    }

    #[inline]
    pub fn im_gamma(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma(a, b, c).im
    }

    /// Xi by flattened indices.
    #[inline]
    pub fn xi(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        let n = self.n;
        match &self.qubit_xi {
            Some(t) => {
                let m = n.num_points();
                t[((a * m + b) * m + c) * m + d]
            }
            None => {
                if n.sub_idx(a, d) != n.sub_idx(b, c) {
                    return ZERO;
                }
                let area = n.symplectic_idx(n.sub_idx(d, a), n.sub_idx(b, a));
                omega_pow(n, 2 * area as i64)
            }
        }
    }

    /// The unique `d` with `a - d = b - c`, the only index where
    /// `xi(a, b, c, d)` can be nonzero for odd N.
    #[inline]
    pub fn parallelogram_completion(&self, a: usize, b: usize, c: usize) -> usize {
        self.n.add_idx(self.n.sub_idx(a, b), c)
    }
}

/// `max_a |sum_{b,g} Gamma_{abg} W_b W_g - W_a|`; zero exactly for pure states.
pub fn purity_residual(tables: &StructureTables, w: &WignerFunction) -> f64 {
    let m = tables.n().num_points();
    let v = w.values();
    let mut worst = 0.0f64;
    for a in 0..m {
        let mut acc = ZERO;
        for b in 0..m {
            if v[b] == 0.0 {
                continue;
            }
            let mut inner = ZERO;
            for c in 0..m {
                inner += tables.gamma(a, b, c) * v[c];
            }
            acc += inner * v[b];
        }
        worst = worst.max((acc - Complex64::new(v[a], 0.0)).norm());
    }
    worst
}

/// True iff `W_a = sum_{b,g} Gamma_{abg} W_b W_g` within `tol` for every `a`.
pub fn purity_check(tables: &StructureTables, w: &WignerFunction, tol: f64) -> bool {
    purity_residual(tables, w) <= tol
}
