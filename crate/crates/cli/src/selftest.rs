//! Built-in regression checks against known closed-form values.

use std::f64::consts::PI;

use qphase::channels::{
    bmatrix_from_kraus, bmatrix_from_p, choi_in_psi_basis, p_from_map, p_from_unitary,
    validate_channel, KrausSet,
};
use qphase::dynamics::{
    build_r_projector, evolve, rates_from_hamiltonian, ring_hamiltonian, ring_rates, EvolveOptions,
};
use qphase::linalg::hermitian_eig;
use qphase::operators::axiom_residuals;
use qphase::wigner::{gamma_closed_form, gamma_trace, striation_marginals, wigner_from_density};
use qphase::{Complex64, ComplexMatrix, Qudit, WignerFunction, DEFAULT_TOL, HBAR};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

fn check(name: &'static str, residual: f64, tol: f64) -> Check {
    Check {
        name,
        residual,
        pass: residual.is_finite() && residual <= tol,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn run_checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let q2 = Qudit::new(2)?;
    let q3 = Qudit::new(3)?;
    let q5 = Qudit::new(5)?;

    // qubit A at the origin: [[1, (1-i)/2], [(1+i)/2, 0]]
    let expected = ComplexMatrix::from_rows(&[
        vec![c(1.0, 0.0), c(0.5, -0.5)],
        vec![c(0.5, 0.5), c(0.0, 0.0)],
    ])?;
    let origin = q2.n().point(0, 0);
    out.push(check(
        "qubit phase-point operator at the origin",
        q2.basis().phase_point(origin).max_abs_diff(&expected),
        1e-12,
    ));

    let mut worst = 0.0f64;
    for q in [&q2, &q3, &q5] {
        worst = worst.max(axiom_residuals(q.basis())?.max());
    }
    out.push(check(
        "phase-point operator properties, N = 2, 3, 5",
        worst,
        1e-10,
    ));

    // qubit transpose: P = 1/2 - delta_{a+g, (1,1)}
    let transpose = |m: &ComplexMatrix| m.transpose();
    let pt = p_from_map(q2.basis(), &transpose)?;
    let zeta = q2.n().point(1, 1);
    let mut worst = 0.0f64;
    for a in q2.n().points() {
        for g in q2.n().points() {
            let want = if a + g == zeta { -0.5 } else { 0.5 };
            worst = worst.max((pt.matrix()[(a.index(), g.index())] - want).abs());
        }
    }
    out.push(check("qubit transpose transition matrix", worst, 1e-12));

    let bt = bmatrix_from_p(q2.tables(), &pt)?;
    let signs = [
        [1.0, 1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0, 1.0],
    ];
    let want = ComplexMatrix::from_fn(4, |i, j| c(signs[i][j] / 4.0, 0.0));
    out.push(check(
        "qubit transpose B matrix",
        bt.matrix().max_abs_diff(&want),
        1e-12,
    ));
    let eig = hermitian_eig(bt.matrix(), DEFAULT_TOL)?;
    let spectrum = [-0.5, 0.5, 0.5, 0.5];
    let worst = eig
        .values
        .iter()
        .zip(spectrum)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "qubit transpose B spectrum (-1/2, 1/2, 1/2, 1/2)",
        worst,
        1e-10,
    ));
    let verdict = validate_channel(q2.tables(), &pt, DEFAULT_TOL)?;
    out.push(check(
        "qubit transpose judged illegal",
        if verdict.legal { 1.0 } else { 0.0 },
        0.0,
    ));
    let choi = choi_in_psi_basis(q2.basis(), &transpose)?;
    out.push(check(
        "Choi operator in Psi basis equals B (transpose)",
        choi.max_abs_diff(bt.matrix()),
        1e-10,
    ));

    let mut rng = StdRng::seed_from_u64(0x5e1f);
    let k = KrausSet::new(
        q3.n(),
        qphase::random::kraus_operators(3, 3, &mut rng),
        DEFAULT_TOL,
    )?;
    let bk = bmatrix_from_kraus(q3.basis(), &k)?;
    let choi = choi_in_psi_basis(q3.basis(), &k)?;
    out.push(check(
        "Choi operator in Psi basis equals B (Kraus, N = 3)",
        choi.max_abs_diff(bk.matrix()),
        1e-10,
    ));

    let u = qphase::random::unitary(3, &mut rng);
    let pu = p_from_unitary(q3.basis(), &u, DEFAULT_TOL)?;
    let vu = validate_channel(q3.tables(), &pu, DEFAULT_TOL)?;
    let mut resid = (vu.trace - c(1.0, 0.0)).norm();
    if !(vu.legal && vu.unitary && vu.rank == 1) {
        resid = f64::INFINITY;
    }
    out.push(check("unitary channel: Tr B = 1, rank 1", resid, 1e-10));

    for (q, want, name) in [
        (&q2, 3.0, "R projector trace N^2 - 1, N = 2"),
        (&q3, 8.0, "R projector trace N^2 - 1, N = 3"),
    ] {
        let r = build_r_projector(q.tables())?;
        out.push(check(name, (r.trace() - want).abs(), 1e-9));
    }

    let mut worst = 0.0f64;
    for (a, b, g) in [
        ((0, 0), (1, 0), (0, 1)),
        ((1, 2), (2, 2), (0, 1)),
        ((2, 1), (1, 1), (1, 0)),
    ] {
        let n = q3.n();
        let (a, b, g) = (n.point(a.0, a.1), n.point(b.0, b.1), n.point(g.0, g.1));
        worst = worst.max((gamma_closed_form(a, b, g)? - gamma_trace(q3.basis(), a, b, g)).norm());
    }
    out.push(check(
        "three-point function closed form, N = 3",
        worst,
        1e-10,
    ));

    // ring model at N = 5
    let h = ring_hamiltonian(q5.basis())?;
    let hm = h.to_operator(q5.basis())?;
    let eig = hermitian_eig(&hm, DEFAULT_TOL)?;
    let mut want: Vec<f64> = (0..5)
        .map(|k| 4.0 * (k as f64 * PI / 5.0).sin().powi(2))
        .collect();
    want.sort_by(f64::total_cmp);
    let worst = eig
        .values
        .iter()
        .zip(&want)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "ring Hamiltonian eigenvalues 4 sin^2(k pi / 5)",
        worst,
        1e-10,
    ));
    let r = rates_from_hamiltonian(q5.tables(), &h, HBAR)?;
    let closed = ring_rates(q5.n(), HBAR)?;
    out.push(check(
        "ring rates closed form, N = 5",
        r.matrix().max_abs_diff(closed.matrix()),
        1e-12,
    ));

    let mut pos = ComplexMatrix::zeros(5);
    pos[(2, 2)] = c(1.0, 0.0);
    let w2 = wigner_from_density(q5.basis(), &pos, DEFAULT_TOL)?;
    let dw = WignerFunction::new(q5.n(), r.matrix().matvec(w2.values()))?;
    let first_order = striation_marginals(&dw)[0]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    out.push(check(
        "ring: position marginal unchanged to first order",
        first_order,
        1e-12,
    ));

    let uniform = WignerFunction::uniform(q5.n());
    let traj = evolve(q5.tables(), &uniform, &r, 2.0, 10, EvolveOptions::default())?;
    let drift = traj
        .frames
        .iter()
        .map(|f| f.max_abs_diff(&uniform))
        .fold(0.0, f64::max);
    out.push(check("completely mixed state is stationary", drift, 1e-12));

    Ok(out)
}
