//! Hamiltonian flows as phase-space transition rates.
//!
//! A constant Hamiltonian `H = sum_b H_b A_b` drives `dW/dt = r W` with
//! `r_{ag} = (2/hbar) sum_b Im(Gamma_{abg}) H_b`. A candidate `r` comes from
//! some Hamiltonian iff it is a fixed point of the projector `R`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, RealMatrix, DEFAULT_TOL, I, ZERO};
use crate::operators::{omega_pow, OperatorBasis};
use crate::phase_space::{PhasePoint, Prime};
use crate::wigner::{StructureTables, WignerFunction};

/// Default value of the reduced Planck constant.
pub const HBAR: f64 = 1.0;

/// Largest N for which the dense `R` projector is built (side `N^4 = 2401`).
pub const MAX_PROJECTOR_N: u32 = 7;

fn check_modulus(left: Prime, right: Prime) -> Result<()> {
    if left != right {
        return Err(Error::ModulusMismatch {
            left: left.get(),
            right: right.get(),
        });
    }
    Ok(())
}

fn require_odd(n: Prime, reason: &'static str) -> Result<()> {
    if !n.is_odd() {
        return Err(Error::Unsupported { n: n.get(), reason });
    }
    Ok(())
}

/// Real phase-point coefficients `H_a` of a Hermitian operator, optionally
/// with the displacement-basis coefficients `kappa_mu` it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianCoefficients {
    n: Prime,
    values: Vec<f64>,
    kappa: Option<Vec<Complex64>>,
}

impl HamiltonianCoefficients {
    pub fn new(n: Prime, values: Vec<f64>) -> Result<Self> {
        if values.len() != n.num_points() {
            return Err(Error::DimensionMismatch {
                expected: n.num_points(),
                found: values.len(),
            });
        }
        Ok(HamiltonianCoefficients {
            n,
            values,
            kappa: None,
        })
    }

    pub fn from_operator(basis: &OperatorBasis, h: &ComplexMatrix, tol: f64) -> Result<Self> {
        let asymmetry = h.hermitian_residual();
        if asymmetry > tol {
            return Err(Error::NotHermitian { asymmetry });
        }
        let coeffs = basis.expand(h)?;
        Self::new(basis.n(), coeffs.iter().map(|z| z.re).collect())
    }

    /// `H = sum_mu kappa_mu D_mu`; requires `kappa_{-mu} = conj(kappa_mu)`.
    pub fn from_displacement_coefficients(
        basis: &OperatorBasis,
        kappa: Vec<Complex64>,
        tol: f64,
    ) -> Result<Self> {
        let n = basis.n();
        if kappa.len() != n.num_points() {
            return Err(Error::DimensionMismatch {
                expected: n.num_points(),
                found: kappa.len(),
            });
        }
        let mut asymmetry = 0.0f64;
        for mu in n.points() {
            let d = kappa[mu.index()] - kappa[(-mu).index()].conj();
            asymmetry = asymmetry.max(d.norm());
        }
        if asymmetry > tol {
            return Err(Error::NotHermitian { asymmetry });
        }
        let mut h = ComplexMatrix::zeros(n.dim());
        for (k, d) in kappa.iter().zip(basis.displacements()) {
            if *k != ZERO {
                h = &h + &d.scale(*k);
            }
        }
        let mut out = Self::from_operator(basis, &h, tol)?;
        out.kappa = Some(kappa);
        Ok(out)
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kappa(&self) -> Option<&[Complex64]> {
        self.kappa.as_deref()
    }

    pub fn to_operator(&self, basis: &OperatorBasis) -> Result<ComplexMatrix> {
        check_modulus(basis.n(), self.n)?;
        basis.synthesize_real(&self.values)
    }

    /// Shifts all coefficients so they sum to zero. Shifting every `H_a` by
    /// the same amount adds a multiple of the identity to the operator.
    pub fn mean_zero(&self) -> Self {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        HamiltonianCoefficients {
            n: self.n,
            values: self.values.iter().map(|v| v - mean).collect(),
            kappa: None,
        }
    }

    pub fn max_abs_diff(&self, other: &HamiltonianCoefficients) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `kappa_mu = (1/N) Tr(D_mu^dagger H)`.
pub fn displacement_coefficients(
    basis: &OperatorBasis,
    h: &ComplexMatrix,
) -> Result<Vec<Complex64>> {
    if h.dim() != basis.n().dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.n().dim(),
            found: h.dim(),
        });
    }
    let inv_n = 1.0 / basis.n().get() as f64;
    Ok(basis
        .displacements()
        .iter()
        .map(|d| d.adjoint().trace_product(h) * inv_n)
        .collect())
}

/// Real N^2 x N^2 rate matrix: `r[(alpha, gamma)]` is the rate `gamma -> alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: Prime,
    r: RealMatrix,
    hbar: f64,
}

impl RateMatrix {
    pub fn new(n: Prime, r: RealMatrix, hbar: f64) -> Result<Self> {
        if r.dim() != n.num_points() {
            return Err(Error::DimensionMismatch {
                expected: n.num_points(),
                found: r.dim(),
            });
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(RateMatrix { n, r, hbar })
    }

    pub fn zeros(n: Prime) -> Self {
        RateMatrix {
            n,
            r: RealMatrix::zeros(n.num_points()),
            hbar: HBAR,
        }
    }

    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.r
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Flattened `(alpha, gamma) -> alpha * N^2 + gamma`.
    pub fn as_vector(&self) -> &[f64] {
        self.r.as_slice()
    }

    /// `max_g |sum_a r_{ag}|`.
    pub fn column_sum_residual(&self) -> f64 {
        self.r
            .column_sums()
            .iter()
            .map(|s| s.abs())
            .fold(0.0, f64::max)
    }
}

/// `r_{ag} = (2/hbar) sum_b Im(Gamma_{abg}) H_b`.
pub fn rates_from_hamiltonian(
    tables: &StructureTables,
    h: &HamiltonianCoefficients,
    hbar: f64,
) -> Result<RateMatrix> {
    let n = tables.n();
    check_modulus(n, h.n())?;
    let m = n.num_points();
    let hv = h.values();
    let scale = 2.0 / hbar;
    let r = RealMatrix::from_fn(m, |a, g| {
        let mut acc = 0.0;
        for (b, &hb) in hv.iter().enumerate() {
            acc += tables.im_gamma(a, b, g) * hb;
        }
        acc * scale
    });
    RateMatrix::new(n, r, hbar)
}

/// `H_b = (hbar/N^2) sum_{a,g} r_{ag} Im(Gamma_{abg})`, the mean-zero
/// Hamiltonian. For rates that are not a Hamiltonian flow this is the
/// Hamiltonian of their projection.
pub fn hamiltonian_from_rates(
    tables: &StructureTables,
    r: &RateMatrix,
) -> Result<HamiltonianCoefficients> {
    let n = tables.n();
    check_modulus(n, r.n())?;
    let m = n.num_points();
    let rm = r.matrix();
    let mut values = vec![0.0; m];
    for a in 0..m {
        for g in 0..m {
            let rag = rm[(a, g)];
            if rag == 0.0 {
                continue;
            }
            for (b, v) in values.iter_mut().enumerate() {
                *v += rag * tables.im_gamma(a, b, g);
            }
        }
    }
    let scale = r.hbar() / m as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    HamiltonianCoefficients::new(n, values)
}

/// The symmetric projector
/// `R_{ag,a'g'} = (2/N^2) sum_b Im(Gamma_{abg}) Im(Gamma_{a'bg'})` on
/// flattened rate vectors.
#[derive(Debug, Clone)]
pub struct RProjector {
    n: Prime,
    r: RealMatrix,
}

pub fn build_r_projector(tables: &StructureTables) -> Result<RProjector> {
    let n = tables.n();
    if n.get() > MAX_PROJECTOR_N {
        return Err(Error::TooLarge {
            n: n.get(),
            max: MAX_PROJECTOR_N,
        });
    }
    let m = n.num_points();
    let side = m * m;
    // G[(ag), b] = Im Gamma_{abg}; R = (2/N^2) G G^T
    let mut g = vec![0.0; side * m];
    for a in 0..m {
        for c in 0..m {
            for b in 0..m {
                g[(a * m + c) * m + b] = tables.im_gamma(a, b, c);
            }
        }
    }
    let scale = 2.0 / m as f64;
    let mut data = vec![0.0; side * side];
    for i in 0..side {
        let gi = &g[i * m..(i + 1) * m];
        for j in i..side {
            let gj = &g[j * m..(j + 1) * m];
            let v = scale * gi.iter().zip(gj).map(|(x, y)| x * y).sum::<f64>();
            data[i * side + j] = v;
            data[j * side + i] = v;
        }
    }
    Ok(RProjector {
        n,
        r: RealMatrix::from_vec(side, data)?,
    })
}

impl RProjector {
    pub fn n(&self) -> Prime {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.r
    }

    pub fn trace(&self) -> f64 {
        self.r.trace()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.r.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.r.dim(),
                found: v.len(),
            });
        }
        Ok(self.r.matvec(v))
    }

    /// `max |R^2 - R|`.
    pub fn idempotency_residual(&self) -> f64 {
        self.r.matmul(&self.r).max_abs_diff(&self.r)
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.r.max_abs_diff(&self.r.transpose())
    }
}

/// `R r`, computed without forming `R` as the round trip
/// rates -> Hamiltonian -> rates.
pub fn project_rate_matrix(tables: &StructureTables, r: &RateMatrix) -> Result<RateMatrix> {
    let h = hamiltonian_from_rates(tables, r)?;
    rates_from_hamiltonian(tables, &h, r.hbar())
}

/// `R v` for an arbitrary flattened vector, reshaped as a rate matrix.
pub fn project_rates(tables: &StructureTables, v: &[f64], hbar: f64) -> Result<RateMatrix> {
    let n = tables.n();
    let m = n.num_points();
    let r = RealMatrix::from_vec(m, v.to_vec())?;
    project_rate_matrix(tables, &RateMatrix::new(n, r, hbar)?)
}

/// Margins behind a rate-matrix verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVerdict {
    /// `max |R r - r|`.
    pub fixed_point_residual: f64,
    /// `max |r + r^T|`.
    pub antisymmetry_residual: f64,
    /// `max_g |sum_a r_{ag}|`.
    pub column_sum_residual: f64,
    pub legal: bool,
    /// N = 2 only: antisymmetry and zero column sums both hold within `tol`.
    /// For qubits this pair of conditions is equivalent to the fixed point.
    pub qubit_conditions: Option<bool>,
}

pub fn validate_rates(tables: &StructureTables, r: &RateMatrix, tol: f64) -> Result<RateVerdict> {
    let projected = project_rate_matrix(tables, r)?;
    let fixed_point_residual = projected.matrix().max_abs_diff(r.matrix());
    let antisymmetry_residual = r.matrix().antisymmetry_residual();
    let column_sum_residual = r.column_sum_residual();
    let qubit_conditions =
        (!r.n().is_odd()).then_some(antisymmetry_residual <= tol && column_sum_residual <= tol);
    Ok(RateVerdict {
        fixed_point_residual,
        antisymmetry_residual,
        column_sum_residual,
        legal: fixed_point_residual <= tol,
        qubit_conditions,
    })
}

/// Max violation of
/// `r_{ag} = (2/N^2) sum_z r_{a+z, g+z} cos[(4 pi/N) <a-g, z>]`, the fixed-point
/// condition for antisymmetric rates at odd N.
pub fn odd_prime_condition_residual(r: &RateMatrix) -> Result<f64> {
    let n = r.n();
    require_odd(
        n,
        "the odd-prime rate condition needs odd N; use validate_rates",
    )?;
    let m = n.num_points();
    let rm = r.matrix();
    let unit = 4.0 * PI / n.get() as f64;
    let cos_table: Vec<f64> = (0..n.get()).map(|k| (unit * k as f64).cos()).collect();
    let scale = 2.0 / m as f64;
    let mut worst = 0.0f64;
    for a in 0..m {
        for g in 0..m {
            let diff = n.sub_idx(a, g);
            let mut acc = 0.0;
            for z in 0..m {
                let k = n.symplectic_idx(diff, z) as usize;
                acc += rm[(n.add_idx(a, z), n.add_idx(g, z))] * cos_table[k];
            }
            worst = worst.max((rm[(a, g)] - scale * acc).abs());
        }
    }
    Ok(worst)
}

/// Complex rates of the (non-Hermitian) generator `D_mu`:
/// `(1/(i hbar)) [delta_{a, g + mu/2} w^{2<a,g>} - delta_{a, g - mu/2} w^{-2<a,g>}]`.
pub fn displacement_rates(mu: PhasePoint, hbar: f64) -> Result<ComplexMatrix> {
    let n = mu.modulus();
    require_odd(n, "displacement-operator rates need odd N")?;
    let half = mu.half()?;
    let m = n.num_points();
    let pref = -I / hbar;
    let mut out = ComplexMatrix::zeros(m);
    for g in n.points() {
        for (target, sign) in [(g + half, 1i64), (g - half, -1i64)] {
            let area = n.symplectic_idx(target.index(), g.index()) as i64;
            out[(target.index(), g.index())] += pref * omega_pow(n, sign * 2 * area) * sign as f64;
        }
    }
    Ok(out)
}

/// `sum_mu kappa_mu r^(mu)`; real for Hermitian combinations.
pub fn rates_from_displacement_expansion(
    n: Prime,
    kappa: &[Complex64],
    hbar: f64,
    tol: f64,
) -> Result<RateMatrix> {
    require_odd(n, "displacement-operator rates need odd N")?;
    if kappa.len() != n.num_points() {
        return Err(Error::DimensionMismatch {
            expected: n.num_points(),
            found: kappa.len(),
        });
    }
    let m = n.num_points();
    let mut acc = ComplexMatrix::zeros(m);
    for mu in n.points() {
        let k = kappa[mu.index()];
        if k == ZERO {
            continue;
        }
        acc = &acc + &displacement_rates(mu, hbar)?.scale(k);
    }
    RateMatrix::new(n, acc.to_real(tol)?, hbar)
}

/// `2 - (X + X^dagger)`: `kappa_0 = 2`, `kappa_(+-1, 0) = -1`.
pub fn ring_hamiltonian(basis: &OperatorBasis) -> Result<HamiltonianCoefficients> {
    let n = basis.n();
    require_odd(n, "the ring Hamiltonian is defined for odd N")?;
    let mut kappa = vec![ZERO; n.num_points()];
    kappa[n.point(0, 0).index()] = Complex64::new(2.0, 0.0);
    kappa[n.point(1, 0).index()] = Complex64::new(-1.0, 0.0);
    kappa[n.point(-1, 0).index()] = Complex64::new(-1.0, 0.0);
    HamiltonianCoefficients::from_displacement_coefficients(basis, kappa, DEFAULT_TOL)
}

/// Closed form of the ring rates:
/// `(2/hbar)(delta_{a, g+eta} - delta_{a, g-eta}) sin(2 pi g2 / N)` with
/// `eta = (1/2, 0)`.
pub fn ring_rates(n: Prime, hbar: f64) -> Result<RateMatrix> {
    require_odd(n, "the ring Hamiltonian is defined for odd N")?;
    let eta = n.point(1, 0).half()?;
    let m = n.num_points();
    let mut r = RealMatrix::zeros(m);
    for g in n.points() {
        let s = 2.0 / hbar * (2.0 * PI * g.a2.value() as f64 / n.get() as f64).sin();
        r[((g + eta).index(), g.index())] += s;
        r[((g - eta).index(), g.index())] -= s;
    }
    RateMatrix::new(n, r, hbar)
}

/// Options for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Integrate rates that fail [`validate_rates`].
    pub allow_illegal: bool,
    pub tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            allow_illegal: false,
            tol: DEFAULT_TOL,
        }
    }
}

/// Frames `W(t_k)` at `t_k = k t / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<WignerFunction>,
}

/// Integrates `dW/dt = r W` from `w0` to time `t`.
pub fn evolve(
    tables: &StructureTables,
    w0: &WignerFunction,
    r: &RateMatrix,
    t: f64,
    steps: usize,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    check_modulus(w0.n(), r.n())?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time must be finite, got {t}"
        )));
    }
    if !opts.allow_illegal {
        let v = validate_rates(tables, r, opts.tol)?;
        if !v.legal {
            return Err(Error::IllegalRates {
                residual: v.fixed_point_residual,
            });
        }
    }
    let dt = t / steps as f64;
    let step = real_exp(&r.matrix().scale(dt))?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut frames = Vec::with_capacity(steps + 1);
    times.push(0.0);
    frames.push(w0.clone());
    for k in 1..=steps {
        let next = step.matvec(frames[k - 1].values());
        times.push(k as f64 * dt);
        frames.push(WignerFunction::new(w0.n(), next)?);
    }
    Ok(Trajectory { times, frames })
}

const EXP_AGREEMENT: f64 = 1e-10;
const MAX_SQUARINGS: u32 = 60;

/// `exp(M)` by scaling and squaring a truncated Taylor series. The number
/// of squarings grows until two successive refinements agree.
pub fn real_exp(m: &RealMatrix) -> Result<RealMatrix> {
    let norm = m.norm_inf();
    let mut s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let mut prev = exp_scaled(m, s);
    while s < MAX_SQUARINGS {
        s += 1;
        let next = exp_scaled(m, s);
        let scale = 1.0f64.max(next.max_abs());
        if next.max_abs_diff(&prev) <= EXP_AGREEMENT * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence {
        what: "matrix exponential",
        iterations: MAX_SQUARINGS as usize,
    })
}

fn exp_scaled(m: &RealMatrix, s: u32) -> RealMatrix {
    let a = m.scale(0.5f64.powi(s as i32));
    let dim = a.dim();
    let mut sum = RealMatrix::identity(dim);
    let mut term = RealMatrix::identity(dim);
    for k in 1..=40 {
        term = term.matmul(&a).scale(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, unitary_propagator, ONE};
    use crate::random;
    use crate::wigner::{purity_residual, wigner_from_density, wigner_from_operator};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn setup(n: u32) -> (OperatorBasis, StructureTables) {
        let b = OperatorBasis::new(Prime::new(n).unwrap());
        let t = StructureTables::new(&b);
        (b, t)
    }

    fn random_h(basis: &OperatorBasis, rng: &mut StdRng) -> HamiltonianCoefficients {
        let h = random::hermitian(basis.n().dim(), rng);
        HamiltonianCoefficients::from_operator(basis, &h, DEFAULT_TOL).unwrap()
    }

    fn random_rates(n: Prime, rng: &mut StdRng) -> RateMatrix {
        let m = n.num_points();
        RateMatrix::new(
            n,
            RealMatrix::from_vec(m, random::real_vector(m * m, rng)).unwrap(),
            HBAR,
        )
        .unwrap()
    }

    fn random_kappa(n: Prime, rng: &mut StdRng) -> Vec<Complex64> {
        let mut kappa = vec![ZERO; n.num_points()];
        for mu in n.points() {
            let (i, j) = (mu.index(), (-mu).index());
            if i < j {
                kappa[i] = random::normal_complex(rng);
                kappa[j] = kappa[i].conj();
            } else if i == j {
                kappa[i] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            }
        }
        kappa
    }

    #[test]
    fn constant_hamiltonian_has_no_rates() {
        for nn in [2, 3, 5] {
            let (basis, tables) = setup(nn);
            let h = HamiltonianCoefficients::from_operator(
                &basis,
                &ComplexMatrix::identity(nn as usize).scale_real(3.0),
                DEFAULT_TOL,
            )
            .unwrap();
            let r = rates_from_hamiltonian(&tables, &h, HBAR).unwrap();
            assert!(r.matrix().max_abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_rates_are_legal() {
        let mut rng = StdRng::seed_from_u64(30);
        for nn in [2, 3, 5] {
            let (basis, tables) = setup(nn);
            for _ in 0..10 {
                let h = random_h(&basis, &mut rng);
                let r = rates_from_hamiltonian(&tables, &h, HBAR).unwrap();
                let v = validate_rates(&tables, &r, DEFAULT_TOL).unwrap();
                assert!(
                    v.legal && v.antisymmetry_residual < 1e-9 && v.column_sum_residual < 1e-9,
                    "{v:?}"
                );
                let back = hamiltonian_from_rates(&tables, &r).unwrap();
                assert!(back.max_abs_diff(&h.mean_zero()) < 1e-9);
                let shifted = HamiltonianCoefficients::new(
                    basis.n(),
                    h.values().iter().map(|x| x + 0.7).collect(),
                )
                .unwrap();
                let r2 = rates_from_hamiltonian(&tables, &shifted, HBAR).unwrap();
                assert!(r2.matrix().max_abs_diff(r.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn von_neumann_oracle() {
        let mut rng = StdRng::seed_from_u64(31);
        for nn in [2, 3, 5] {
            let (basis, tables) = setup(nn);
            for hbar in [1.0, 0.5] {
                let hm = random::hermitian(nn as usize, &mut rng);
                let h = HamiltonianCoefficients::from_operator(&basis, &hm, DEFAULT_TOL).unwrap();
                let r = rates_from_hamiltonian(&tables, &h, hbar).unwrap();
                let rho = random::density(nn as usize, &mut rng);
                let w = wigner_from_density(&basis, &rho, DEFAULT_TOL).unwrap();
                let comm = &hm.matmul(&rho) - &rho.matmul(&hm);
                let drho = comm.scale(-I / hbar);
                let dw = wigner_from_operator(&basis, &drho, 1e-9).unwrap();
                let rw = r.matrix().matvec(w.values());
                for (x, y) in rw.iter().zip(dw.values()) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn r_projector_properties() {
        for nn in [2, 3] {
            let (_, tables) = setup(nn);
            let proj = build_r_projector(&tables).unwrap();
            let m = (nn * nn) as f64;
            assert!((proj.trace() - (m - 1.0)).abs() < 1e-9);
            assert!(proj.idempotency_residual() < 1e-9);
            assert!(proj.symmetry_residual() < 1e-14);
        }
        let (_, t3) = setup(3);
        let proj = build_r_projector(&t3).unwrap();
        let eig = hermitian_eig(&ComplexMatrix::from_real(proj.matrix()), 1e-9).unwrap();
        for l in eig.values {
            assert!(l.abs() < 1e-9 || (l - 1.0).abs() < 1e-9, "{l}");
        }
        let (_, t11) = setup(11);
        assert!(matches!(
            build_r_projector(&t11),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn projection_routes_agree() {
        let mut rng = StdRng::seed_from_u64(32);
        for nn in [2, 3] {
            let (_, tables) = setup(nn);
            let proj = build_r_projector(&tables).unwrap();
            for _ in 0..5 {
                let r = random_rates(tables.n(), &mut rng);
                let dense = proj.apply(r.as_vector()).unwrap();
                let round_trip = project_rate_matrix(&tables, &r).unwrap();
                for (x, y) in dense.iter().zip(round_trip.as_vector()) {
                    assert!((x - y).abs() < 1e-12);
                }
                assert!(
                    validate_rates(&tables, &round_trip, DEFAULT_TOL)
                        .unwrap()
                        .legal
                );
                let again = project_rates(&tables, round_trip.as_vector(), HBAR).unwrap();
                assert!(again.matrix().max_abs_diff(round_trip.matrix()) < 1e-12);
                let h = hamiltonian_from_rates(&tables, &round_trip).unwrap();
                let regenerated = rates_from_hamiltonian(&tables, &h, HBAR).unwrap();
                assert!(regenerated.matrix().max_abs_diff(round_trip.matrix()) < 1e-12);
            }
            let zero = project_rates(&tables, &vec![0.0; (nn as usize).pow(4)], HBAR).unwrap();
            assert_eq!(zero.matrix().max_abs(), 0.0);
        }
    }

    #[test]
    fn im_gamma_lemma() {
        for nn in [2, 3, 5] {
            let (_, tables) = setup(nn);
            let m = tables.n().num_points();
            let inv = 1.0 / m as f64;
            for b in 0..m {
                for b2 in 0..m {
                    let mut acc = 0.0;
                    for a in 0..m {
                        for g in 0..m {
                            acc += tables.im_gamma(a, b, g) * tables.im_gamma(a, b2, g);
                        }
                    }
                    let expected = -inv + if b == b2 { 1.0 } else { 0.0 };
                    assert!((2.0 * inv * acc - expected).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn illegal_rates_detected() {
        let (_, tables) = setup(3);
        let n = tables.n();
        let mut r = RealMatrix::zeros(9);
        r[(4, 4)] = 1.0;
        let v =
            validate_rates(&tables, &RateMatrix::new(n, r, HBAR).unwrap(), DEFAULT_TOL).unwrap();
        assert!(!v.legal && v.fixed_point_residual > 0.1);

        let mut rng = StdRng::seed_from_u64(33);
        let raw = random_rates(n, &mut rng);
        let sym =
            RateMatrix::new(n, &raw.matrix().clone() + &raw.matrix().transpose(), HBAR).unwrap();
        let v = validate_rates(&tables, &sym, DEFAULT_TOL).unwrap();
        assert!(!v.legal && v.fixed_point_residual > 1e-3);
        assert!(v.qubit_conditions.is_none());

        let zero = validate_rates(&tables, &RateMatrix::zeros(n), DEFAULT_TOL).unwrap();
        assert!(zero.legal && zero.fixed_point_residual == 0.0);
    }

    #[test]
    fn qubit_conditions_match_fixed_point() {
        let mut rng = StdRng::seed_from_u64(34);
        let (basis, tables) = setup(2);
        let n = basis.n();
        let mut legal_count = 0;
        for trial in 0..200 {
            let r = match trial % 4 {
                0 => random_rates(n, &mut rng),
                1 => rates_from_hamiltonian(&tables, &random_h(&basis, &mut rng), HBAR).unwrap(),
                2 => {
                    // antisymmetric, column sums generally nonzero
                    let raw = random_rates(n, &mut rng);
                    RateMatrix::new(
                        n,
                        (&raw.matrix().clone() - &raw.matrix().transpose()).scale(0.5),
                        HBAR,
                    )
                    .unwrap()
                }
                _ => {
                    let legal =
                        rates_from_hamiltonian(&tables, &random_h(&basis, &mut rng), HBAR).unwrap();
                    let mut m = legal.matrix().clone();
                    m[(0, 1)] += 0.3;
                    RateMatrix::new(n, m, HBAR).unwrap()
                }
            };
            let v = validate_rates(&tables, &r, DEFAULT_TOL).unwrap();
            assert_eq!(v.qubit_conditions, Some(v.legal), "{v:?}");
            legal_count += v.legal as usize;
        }
        assert_eq!(legal_count, 50);
    }

    #[test]
    fn odd_prime_condition_agrees_with_projector() {
        let mut rng = StdRng::seed_from_u64(35);
        for nn in [3, 5] {
            let (basis, tables) = setup(nn);
            let n = basis.n();
            for trial in 0..10 {
                let r = if trial % 2 == 0 {
                    rates_from_hamiltonian(&tables, &random_h(&basis, &mut rng), HBAR).unwrap()
                } else {
                    let raw = random_rates(n, &mut rng);
                    RateMatrix::new(
                        n,
                        (&raw.matrix().clone() - &raw.matrix().transpose()).scale(0.5),
                        HBAR,
                    )
                    .unwrap()
                };
                let odd = odd_prime_condition_residual(&r).unwrap();
                let v = validate_rates(&tables, &r, DEFAULT_TOL).unwrap();
                assert_eq!(odd <= DEFAULT_TOL, v.legal, "odd {odd} vs {v:?}");
            }
            assert_eq!(
                odd_prime_condition_residual(&RateMatrix::zeros(n)).unwrap(),
                0.0
            );
        }
        let two = Prime::new(2).unwrap();
        assert!(odd_prime_condition_residual(&RateMatrix::zeros(two)).is_err());
    }

    #[test]
    fn displacement_rates_structure() {
        let n = Prime::new(5).unwrap();
        assert_eq!(
            displacement_rates(n.point(0, 0), HBAR).unwrap().max_abs(),
            0.0
        );
        let r = displacement_rates(n.point(1, 0), HBAR).unwrap();
        for a in n.points() {
            for g in n.points() {
                let d = a - g;
                let allowed = d == n.point(3, 0) || d == n.point(2, 0);
                if !allowed {
                    assert_eq!(r[(a.index(), g.index())], ZERO);
                }
            }
        }
        assert!(displacement_rates(Prime::new(2).unwrap().point(1, 0), HBAR).is_err());
    }

    #[test]
    fn displacement_and_phase_point_inputs_agree() {
        let mut rng = StdRng::seed_from_u64(36);
        for nn in [3, 5] {
            let (basis, tables) = setup(nn);
            let n = basis.n();
            for _ in 0..10 {
                let kappa = random_kappa(n, &mut rng);
                let h = HamiltonianCoefficients::from_displacement_coefficients(
                    &basis,
                    kappa.clone(),
                    DEFAULT_TOL,
                )
                .unwrap();
                let via_a = rates_from_hamiltonian(&tables, &h, HBAR).unwrap();
                let via_d =
                    rates_from_displacement_expansion(n, &kappa, HBAR, DEFAULT_TOL).unwrap();
                assert!(via_a.matrix().max_abs_diff(via_d.matrix()) < 1e-10);
                let op = h.to_operator(&basis).unwrap();
                let back = displacement_coefficients(&basis, &op).unwrap();
                for (x, y) in back.iter().zip(&kappa) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
        let (basis, _) = setup(3);
        let mut bad = vec![ZERO; 9];
        bad[basis.n().point(1, 0).index()] = ONE;
        assert!(matches!(
            HamiltonianCoefficients::from_displacement_coefficients(&basis, bad, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn ring_model() {
        let (basis, tables) = setup(5);
        let n = basis.n();
        let h = ring_hamiltonian(&basis).unwrap();
        let op = h.to_operator(&basis).unwrap();
        let x = basis.x();
        let expected = &ComplexMatrix::identity(5).scale_real(2.0) - &(x + &x.adjoint());
        assert!(op.max_abs_diff(&expected) < 1e-12);

        let eig = hermitian_eig(&op, DEFAULT_TOL).unwrap();
        let mut want: Vec<f64> = (0..5)
            .map(|k| 4.0 * (k as f64 * PI / 5.0).sin().powi(2))
            .collect();
        want.sort_by(f64::total_cmp);
        for (l, w) in eig.values.iter().zip(&want) {
            assert!((l - w).abs() < 1e-10);
        }
        // k = 0 momentum eigenvector: uniform superposition, eigenvalue 0
        let uniform = vec![Complex64::new(1.0 / 5f64.sqrt(), 0.0); 5];
        let hv = op.matvec(&uniform);
        assert!(hv.iter().all(|z| z.norm() < 1e-12));

        let r = rates_from_hamiltonian(&tables, &h, HBAR).unwrap();
        let closed = ring_rates(n, HBAR).unwrap();
        assert!(r.matrix().max_abs_diff(closed.matrix()) < 1e-12);
        let mut sum = displacement_rates(n.point(1, 0), HBAR).unwrap();
        sum = &sum + &displacement_rates(n.point(-1, 0), HBAR).unwrap();
        let from_d = sum.scale_real(-1.0).to_real(1e-12).unwrap();
        assert!(from_d.max_abs_diff(closed.matrix()) < 1e-12);
        assert!(odd_prime_condition_residual(&r).unwrap() < 1e-9);

        let back = hamiltonian_from_rates(&tables, &r).unwrap();
        assert!(back.max_abs_diff(&h.mean_zero()) < 1e-10);
        assert!(ring_hamiltonian(&setup(2).0).is_err());
    }

    #[test]
    fn evolve_trivial_cases() {
        let mut rng = StdRng::seed_from_u64(37);
        let (basis, tables) = setup(3);
        let n = basis.n();
        let w = wigner_from_density(&basis, &random::density(3, &mut rng), DEFAULT_TOL).unwrap();
        let traj = evolve(
            &tables,
            &w,
            &RateMatrix::zeros(n),
            1.0,
            4,
            EvolveOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.frames.len(), 5);
        assert_eq!(traj.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(traj.frames.iter().all(|f| f.max_abs_diff(&w) < 1e-15));

        let r = rates_from_hamiltonian(&tables, &random_h(&basis, &mut rng), HBAR).unwrap();
        let u = WignerFunction::uniform(n);
        let traj = evolve(&tables, &u, &r, 3.0, 10, EvolveOptions::default()).unwrap();
        assert!(traj.frames.iter().all(|f| f.max_abs_diff(&u) < 1e-12));

        let mut bad = RealMatrix::zeros(9);
        bad[(0, 0)] = 1.0;
        let bad = RateMatrix::new(n, bad, HBAR).unwrap();
        assert!(matches!(
            evolve(&tables, &u, &bad, 1.0, 2, EvolveOptions::default()),
            Err(Error::IllegalRates { .. })
        ));
        let opts = EvolveOptions {
            allow_illegal: true,
            ..Default::default()
        };
        let traj = evolve(
            &tables,
            &WignerFunction::point_mass(n.point(0, 0)),
            &bad,
            1.0,
            2,
            opts,
        )
        .unwrap();
        assert!((traj.frames[2].values()[0] - 1f64.exp()).abs() < 1e-10);
        assert!(evolve(&tables, &u, &bad, 1.0, 0, opts).is_err());
    }

    #[test]
    fn evolve_matches_hilbert_space() {
        let mut rng = StdRng::seed_from_u64(38);
        for nn in [2, 3, 5] {
            let (basis, tables) = setup(nn);
            let hm = random::hermitian(nn as usize, &mut rng);
            let h = HamiltonianCoefficients::from_operator(&basis, &hm, DEFAULT_TOL).unwrap();
            let r = rates_from_hamiltonian(&tables, &h, HBAR).unwrap();
            let psi = random::pure_state(nn as usize, &mut rng);
            let rho = ComplexMatrix::outer(&psi, &psi);
            let w0 = wigner_from_density(&basis, &rho, DEFAULT_TOL).unwrap();
            let traj = evolve(&tables, &w0, &r, 2.0, 20, EvolveOptions::default()).unwrap();
            for (t, frame) in traj.times.iter().zip(&traj.frames) {
                let u = unitary_propagator(&hm, *t, DEFAULT_TOL).unwrap();
                let rho_t = u.matmul(&rho).matmul(&u.adjoint());
                let w_t = wigner_from_density(&basis, &rho_t, 1e-8).unwrap();
                assert!(frame.max_abs_diff(&w_t) < 1e-8);
                assert!((frame.sum() - 1.0).abs() < 1e-9);
                assert!(purity_residual(&tables, frame) < 1e-8);
            }
        }
    }

    #[test]
    fn real_exp_examples() {
        // rotation generator: exp([[0, -a], [a, 0]]) = [[cos a, -sin a], [sin a, cos a]]
        for a in [0.0, 0.3, 5.0, 40.0] {
            let m = RealMatrix::from_rows(&[vec![0.0, -a], vec![a, 0.0]]).unwrap();
            let e = real_exp(&m).unwrap();
            let want =
                RealMatrix::from_rows(&[vec![a.cos(), -a.sin()], vec![a.sin(), a.cos()]]).unwrap();
            assert!(e.max_abs_diff(&want) < 1e-10, "{a}");
        }
    }
}
