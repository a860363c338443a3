//! Generalized Pauli operators, displacement operators, phase-point operators
//! and striation projectors.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, I, ONE, ZERO};
use crate::phase_space::{enumerate_striations, symplectic, Line, PhasePoint, Prime};

/// `omega^k` with `omega = exp(2 pi i / N)`. The exponent is reduced mod N
/// before the single trig evaluation.
#[inline]
pub fn omega_pow(n: Prime, k: i64) -> Complex64 {
    let k = n.reduce(k);
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n.get() as f64)
}

/// `X|q> = |q+1>` and `Z|q> = omega^q |q>`.
pub fn pauli_generators(n: Prime) -> (ComplexMatrix, ComplexMatrix) {
    let d = n.dim();
    let x = ComplexMatrix::from_fn(d, |i, j| if i == (j + 1) % d { ONE } else { ZERO });
    let z = ComplexMatrix::from_fn(d, |i, j| if i == j { omega_pow(n, i as i64) } else { ZERO });
    (x, z)
}

/// `D_b = omega^{b1 b2 / 2} X^{b1} Z^{b2}` for odd N. For N = 2 the Pauli set
/// takes this role: `D_(0,0) = I`, `D_(1,0) = X`, `D_(0,1) = Z`, `D_(1,1) = Y`.
pub fn displacement(beta: PhasePoint) -> ComplexMatrix {
    let n = beta.modulus();
    let (x, z) = pauli_generators(n);
    let (b1, b2) = (beta.a1.value(), beta.a2.value());
    let xz = x.pow(b1).matmul(&z.pow(b2));
    if n.is_odd() {
        let exponent = (beta.a1 * beta.a2).half().expect("odd modulus");
        xz.scale(omega_pow(n, exponent.value() as i64))
    } else if b1 == 1 && b2 == 1 {
        // Y = i X Z
        xz.scale(I)
    } else {
        xz
    }
}

/// Phase-point operator `A_a`.
///
/// N = 2 uses `(I + (-1)^{a1} Z + (-1)^{a2} X + (-1)^{a1+a2} Y) / 2`; odd N
/// uses the component form `(A_a)_{kl} = delta_{2 a1, k+l} omega^{a2 (k-l)}`.
pub fn phase_point_operator(alpha: PhasePoint) -> ComplexMatrix {
    let n = alpha.modulus();
    let (a1, a2) = (alpha.a1.value() as i64, alpha.a2.value() as i64);
    if !n.is_odd() {
        let sign = |e: i64| if e % 2 == 0 { 1.0 } else { -1.0 };
        let (x, z) = pauli_generators(n);
        let y = x.matmul(&z).scale(I);
        let mut a = ComplexMatrix::identity(2);
        a = &a + &z.scale_real(sign(a1));
        a = &a + &x.scale_real(sign(a2));
        a = &a + &y.scale_real(sign(a1 + a2));
        return a.scale_real(0.5);
    }
    let d = n.dim();
    ComplexMatrix::from_fn(d, |k, l| {
        if n.reduce(2 * a1) == n.reduce((k + l) as i64) {
            omega_pow(n, a2 * (k as i64 - l as i64))
        } else {
            ZERO
        }
    })
}

/// `A_a = (1/N) sum_b D_b omega^{<a,b>}`, the displacement-sum definition.
/// Slower than [`phase_point_operator`]; kept as its independent cross-check.
pub fn phase_point_operator_from_displacements(alpha: PhasePoint) -> Result<ComplexMatrix> {
    let n = alpha.modulus();
    if !n.is_odd() {
        return Err(Error::Unsupported {
            n: 2,
            reason: "the displacement-sum form is defined for odd N",
        });
    }
    let mut acc = ComplexMatrix::zeros(n.dim());
    for beta in n.points() {
        let phase = omega_pow(n, symplectic(alpha, beta)?.value() as i64);
        acc = &acc + &displacement(beta).scale(phase);
    }
    Ok(acc.scale_real(1.0 / n.get() as f64))
}

/// The operator families for one prime N, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    n: Prime,
    x: ComplexMatrix,
    z: ComplexMatrix,
    displacements: Vec<ComplexMatrix>,
    phase_points: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn new(n: Prime) -> Self {
        let (x, z) = pauli_generators(n);
        let displacements = n.points().map(displacement).collect();
        let phase_points = n.points().map(phase_point_operator).collect();
        OperatorBasis {
            n,
            x,
            z,
            displacements,
            phase_points,
        }
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn z(&self) -> &ComplexMatrix {
        &self.z
    }

    /// `A_a` by flattened index.
    #[inline]
    pub fn a(&self, index: usize) -> &ComplexMatrix {
        &self.phase_points[index]
    }

    /// `D_b` by flattened index.
    #[inline]
    pub fn d(&self, index: usize) -> &ComplexMatrix {
        &self.displacements[index]
    }

    pub fn phase_point(&self, alpha: PhasePoint) -> &ComplexMatrix {
        self.a(alpha.index())
    }

    pub fn displacement(&self, beta: PhasePoint) -> &ComplexMatrix {
        self.d(beta.index())
    }

    pub fn phase_points(&self) -> &[ComplexMatrix] {
        &self.phase_points
    }

    pub fn displacements(&self) -> &[ComplexMatrix] {
        &self.displacements
    }

    fn check_dim(&self, m: &ComplexMatrix) -> Result<()> {
        if m.dim() != self.n.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.n.dim(),
                found: m.dim(),
            });
        }
        Ok(())
    }

    /// Coefficients `(1/N) Tr(A_a M)` of `M` in the phase-point basis.
    pub fn expand(&self, m: &ComplexMatrix) -> Result<Vec<Complex64>> {
        self.check_dim(m)?;
        let inv_n = 1.0 / self.n.get() as f64;
        Ok(self
            .phase_points
            .iter()
            .map(|a| a.trace_product(m) * inv_n)
            .collect())
    }

    /// `sum_a c_a A_a`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<ComplexMatrix> {
        if coeffs.len() != self.n.num_points() {
            return Err(Error::DimensionMismatch {
                expected: self.n.num_points(),
                found: coeffs.len(),
            });
        }
        let d = self.n.dim();
        let mut acc = ComplexMatrix::zeros(d);
        for (c, a) in coeffs.iter().zip(&self.phase_points) {
            if *c != ZERO {
                acc = &acc + &a.scale(*c);
            }
        }
        Ok(acc)
    }

    pub fn synthesize_real(&self, coeffs: &[f64]) -> Result<ComplexMatrix> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.synthesize(&c)
    }

    /// `Q = (1/N) sum_{a in line} A_a`, the projector onto one basis vector of
    /// the striation's measurement.
    pub fn striation_projector(&self, line: &Line) -> Result<ComplexMatrix> {
        let validated = Line::new(line.points().to_vec())?;
        if validated.points()[0].modulus() != self.n {
            return Err(Error::ModulusMismatch {
                left: self.n.get(),
                right: validated.points()[0].modulus().get(),
            });
        }
        let mut acc = ComplexMatrix::zeros(self.n.dim());
        for p in validated.points() {
            acc = &acc + self.phase_point(*p);
        }
        Ok(acc.scale_real(1.0 / self.n.get() as f64))
    }
}

/// Worst-case violations of the defining properties of the phase-point
/// operators, each a max over the full enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomResiduals {
    /// `|A_a - A_a^dagger|`.
    pub hermiticity: f64,
    /// `|Tr A_a - 1|`.
    pub unit_trace: f64,
    /// `|Tr(A_a A_b) - N delta_ab|`.
    pub orthogonality: f64,
    /// Line operators `Q`: `|Q^2 - Q|`, `|Q - Q^dagger|`, and `|Q Q'|` for
    /// distinct parallel lines.
    pub line_projectors: f64,
    /// `|Tr(Q Q') - 1/N|` for lines in different striations.
    pub mutual_unbiasedness: f64,
    /// `|sum_lines Q - I|` per striation.
    pub striation_completeness: f64,
    /// `|(1/N) sum_a A_a - I|`.
    pub completeness: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        [
            self.hermiticity,
            self.unit_trace,
            self.orthogonality,
            self.line_projectors,
            self.mutual_unbiasedness,
            self.striation_completeness,
            self.completeness,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn axiom_residuals(basis: &OperatorBasis) -> Result<AxiomResiduals> {
    let n = basis.n();
    let d = n.dim();
    let nf = n.get() as f64;
    let id = ComplexMatrix::identity(d);

    let mut hermiticity = 0.0f64;
    let mut unit_trace = 0.0f64;
    let mut orthogonality = 0.0f64;
    let mut sum = ComplexMatrix::zeros(d);
    for (i, a) in basis.phase_points().iter().enumerate() {
        hermiticity = hermiticity.max(a.hermitian_residual());
        unit_trace = unit_trace.max((a.trace() - ONE).norm());
        for (j, b) in basis.phase_points().iter().enumerate() {
            let expected = if i == j { nf } else { 0.0 };
            orthogonality = orthogonality.max((a.trace_product(b) - expected).norm());
        }
        sum = &sum + a;
    }
    let completeness = sum.scale_real(1.0 / nf).max_abs_diff(&id);

    let striations = enumerate_striations(n);
    let projectors: Vec<Vec<ComplexMatrix>> = striations
        .iter()
        .map(|s| {
            s.lines()
                .iter()
                .map(|l| basis.striation_projector(l))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut line_projectors = 0.0f64;
    let mut mutual_unbiasedness = 0.0f64;
    let mut striation_completeness = 0.0f64;
    for (s, qs) in projectors.iter().enumerate() {
        let mut total = ComplexMatrix::zeros(d);
        for (k, q) in qs.iter().enumerate() {
            line_projectors = line_projectors
                .max(q.matmul(q).max_abs_diff(q))
                .max(q.hermitian_residual());
            for (k2, q2) in qs.iter().enumerate() {
                if k2 != k {
                    line_projectors = line_projectors.max(q.matmul(q2).max_abs());
                }
            }
            for other in projectors.iter().skip(s + 1) {
                for q2 in other {
                    let overlap = q.trace_product(q2) - Complex64::new(1.0 / nf, 0.0);
                    mutual_unbiasedness = mutual_unbiasedness.max(overlap.norm());
                }
            }
            total = &total + q;
        }
        striation_completeness = striation_completeness.max(total.max_abs_diff(&id));
    }

    Ok(AxiomResiduals {
        hermiticity,
        unit_trace,
        orthogonality,
        line_projectors,
        mutual_unbiasedness,
        striation_completeness,
        completeness,
    })
}
