//! The qubit walkthrough: Pauli operators, their quadratures and the
//! action of the maximal nonsplit torus.

use mubkit::finite_field::FieldSpec;
use mubkit::multiplier_lab::{enumerate_weyl_multipliers, invariant_multipliers, pullback, MultiplierTable};
use mubkit::phase_space::{LinearMap2, PhaseSpace, PhaseVector, SymplecticForm};
use mubkit::quadrature::{g_action, quadratures_from_weyl, QuadratureSystem};
use mubkit::symplectic_actions::{metaplectic_operator, ordinary_phase_fix, sl_enumerate, Torus};
use mubkit::weyl_rep::{matrix_to_json, max_abs_diff, CMatrix, WeylSystem, TOL_IDENTITY};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::{Outcome, VERSION};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn sigma1() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sigma2() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sigma3() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `½(I + s·σ)` for a Pauli matrix `σ`.
fn half(sign: f64, s: &CMatrix) -> CMatrix {
    (identity() + s * c(sign, 0.)) * c(0.5, 0.)
}

pub fn qubit_space() -> PhaseSpace {
    PhaseSpace::new(&FieldSpec::prime(2).expect("GF(2)"))
}

/// `W(e1) = σ1`, `W(e2) = σ2`, `W(e1 + e2) = σ3`, indexed by `x1·2 + x2`.
pub fn pauli_system(space: &PhaseSpace) -> WeylSystem {
    WeylSystem::from_operators(space, vec![identity(), sigma2(), sigma1(), sigma3()]).expect("Pauli Weyl system")
}

/// The same operators with the roles of `σ1` and `σ2` exchanged.
pub fn swapped_pauli_system(space: &PhaseSpace) -> WeylSystem {
    WeylSystem::from_operators(space, vec![identity(), sigma1(), sigma2(), sigma3()]).expect("Pauli Weyl system")
}

/// The projections of the Pauli quadrature system, by line index.
pub fn expected_pauli_projections() -> Vec<CMatrix> {
    vec![
        half(1., &sigma1()),
        half(-1., &sigma1()),
        half(1., &sigma3()),
        half(-1., &sigma3()),
        half(1., &sigma2()),
        half(-1., &sigma2()),
    ]
}

/// The Pauli multiplier as exponents of `i`: `m(e1, e2) = -i` and cyclic.
pub fn pauli_multiplier(space: &PhaseSpace) -> MultiplierTable {
    let (e1, e2) = (space.index(space.e1()), space.index(space.e2()));
    let e3 = space.add_idx(e1, e2);
    MultiplierTable::from_fn(space, |u, v| match (u, v) {
        _ if u == 0 || v == 0 || u == v => 0,
        (a, b) if (a, b) == (e1, e2) || (a, b) == (e3, e1) || (a, b) == (e2, e3) => 3,
        _ => 1,
    })
    .expect("4 x 4 table")
}

/// `R = [[1, 1], [1, 0]]`, generating the maximal nonsplit torus.
pub fn rotation() -> LinearMap2 {
    let f = FieldSpec::prime(2).expect("GF(2)");
    LinearMap2::new(f.one(), f.one(), f.one(), f.zero())
}

/// `F = [[0, 1], [1, 0]]`.
pub fn flip() -> LinearMap2 {
    let f = FieldSpec::prime(2).expect("GF(2)");
    LinearMap2::new(f.zero(), f.one(), f.one(), f.zero())
}

/// `½[I + i(σ1 + σ2 + σ3)]`.
pub fn expected_rotation_operator() -> CMatrix {
    (identity() + (sigma1() + sigma2() + sigma3()) * I) * c(0.5, 0.)
}

/// `exp(iπ/2 · m·σ)` with `m = (1, -1, 0)/√2`.
pub fn flip_operator() -> CMatrix {
    (sigma1() - sigma2()) * (I / 2f64.sqrt())
}

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub residual: Option<f64>,
}

fn exact(name: &'static str, passed: bool) -> Check {
    Check { name, passed, residual: None }
}

fn within(name: &'static str, residual: f64) -> Check {
    Check { name, passed: residual <= TOL_IDENTITY, residual: Some(residual) }
}

fn apart(name: &'static str, distance: f64) -> Check {
    Check { name, passed: distance > 0.1, residual: Some(distance) }
}

fn worst(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn conj_by(u: &CMatrix, x: &CMatrix) -> CMatrix {
    u * x * u.adjoint()
}

fn line(space: &PhaseSpace, a: PhaseVector, b: PhaseVector) -> usize {
    let d = space.direction_index_of(space.sub(b, a)).expect("distinct points");
    space.line_index_through(a, d)
}

/// Runs every qubit check and collects the results.
pub fn qubit_checks() -> (Vec<Check>, QubitData) {
    let space = qubit_space();
    let f = space.field().clone();
    let s = SymplecticForm::standard();
    let mut checks = Vec::new();

    let w = pauli_system(&space);
    let m = pauli_multiplier(&space);
    checks.push(exact("pauli multiplier", w.multiplier() == &m));

    let all = enumerate_weyl_multipliers(&space, &s).expect("q = 2");
    let two = all.len() == 2 && all.contains(&m) && all.contains(&m.conj()) && m != m.conj();
    checks.push(exact("m and its conjugate are the only Weyl multipliers", two));

    let sl = sl_enumerate(&space).expect("q = 2");
    let sl_inv = invariant_multipliers(&space, &s, &sl).expect("q = 2");
    checks.push(exact("no Weyl multiplier is SL(V)-invariant", sl_inv.is_empty()));

    let r = rotation();
    let t_inv = pullback(&m, &r).expect("pullback") == m && pullback(&m.conj(), &r).expect("pullback") == m.conj();
    checks.push(exact("m and its conjugate are torus-invariant", t_inv));

    let qs = quadratures_from_weyl(&w, PhaseVector::ZERO).expect("Pauli quadratures");
    let expected = expected_pauli_projections();
    checks.push(within(
        "Pauli quadrature projections",
        worst(expected.iter().enumerate().map(|(l, p)| max_abs_diff(qs.proj(l), p))),
    ));

    let swapped = swapped_pauli_system(&space);
    checks.push(exact("swapped system has the conjugate multiplier", swapped.multiplier() == &m.conj()));
    let q_swapped = quadratures_from_weyl(&swapped, PhaseVector::ZERO).expect("swapped quadratures");
    let fl = flip();
    let q_f = g_action(&qs, &fl, PhaseVector::ZERO).expect("relabeling");
    checks.push(within("relabeling by F gives the swapped system", q_f.distance(&q_swapped)));

    let raw_r = metaplectic_operator(&r, &w).expect("U(R)");
    checks.push(within("U(R) formula", max_abs_diff(&raw_r.matrix, &expected_rotation_operator())));
    let r2 = r.compose(&f, &r);
    let raw_r2 = metaplectic_operator(&r2, &w).expect("U(R²)");
    let torus = Torus::generated_by(&space, &r);
    let rep = ordinary_phase_fix(&torus, &[raw_r.clone(), raw_r2]).expect("phase fix");
    let cube = &raw_r.matrix * &raw_r.matrix * &raw_r.matrix;
    checks.push(within("U(R)³ = -I", max_abs_diff(&cube, &(identity() * c(-1., 0.)))));
    checks.push(within("c(R)³ = -1", (rep.phase.powu(3) + 1.0).norm()));
    checks.push(within("fixed torus operators form a representation", rep.homomorphism_residual()));

    let uf = flip_operator();
    checks.push(within("U(F)² = -I", max_abs_diff(&(&uf * &uf), &(identity() * c(-1., 0.)))));
    let sign_flip = worst(space.vectors().enumerate().skip(1).map(|(i, v)| {
        let target = w.op(space.index(fl.apply(&f, v))) * c(-1., 0.);
        max_abs_diff(&conj_by(&uf, w.op(i)), &target)
    }));
    checks.push(within("U(F) W(v) U(F)† = -W(Fv) for v ≠ 0", sign_flip));

    // F R F⁻¹ = R², and the projective class of U(R²) is U(R)².
    let frf = fl.compose(&f, &r).compose(&f, &fl);
    checks.push(exact("F R F⁻¹ = R²", frf == r2));
    let relation = |cr: Complex64| {
        let ur = &raw_r.matrix * cr;
        max_abs_diff(&(&uf * &ur * &uf), &(&ur * &ur * c(-1., 0.)))
    };
    checks.push(within("U(F) U(R) U(F⁻¹) = -U(F R F⁻¹) with c(R) = -1", relation(c(-1., 0.))));
    checks.push(apart("the relation fails for the principal c(R)", relation(rep.phase)));

    let (o, e1, e2) = (PhaseVector::ZERO, space.e1(), space.e2());
    let e3 = space.add(e1, e2);
    let pairs = [((o, e1), (e1, e3)), ((e2, e3), (o, e2)), ((o, e3), (e2, e1))];
    for (name, ((a, b), (x, y))) in [
        "U(F) does not relabel Q on {0, e1}",
        "U(F) does not relabel Q on {e2, e1+e2}",
        "U(F) does not relabel Q on {0, e1+e2}",
    ]
    .into_iter()
    .zip(pairs)
    {
        let l = line(&space, a, b);
        let image = conj_by(&uf, qs.proj(l));
        let lands = max_abs_diff(&image, qs.proj(line(&space, x, y)));
        checks.push(Check {
            name,
            passed: lands <= TOL_IDENTITY && max_abs_diff(&image, q_f.proj(l)) > 0.1,
            residual: Some(lands),
        });
    }

    let data = QubitData { multiplier: m, quadratures: qs, rotation: rep.ops[1].clone(), phase: rep.phase };
    (checks, data)
}

pub struct QubitData {
    pub multiplier: MultiplierTable,
    pub quadratures: QuadratureSystem,
    pub rotation: CMatrix,
    pub phase: Complex64,
}

pub fn qubit_report(seed: u64) -> Outcome {
    let (checks, data) = qubit_checks();
    let space = data.quadratures.space().clone();
    let passed = checks.iter().all(|c| c.passed);
    let table: Vec<Vec<u32>> = (0..4).map(|u| (0..4).map(|v| data.multiplier.get(u, v)).collect()).collect();
    Outcome {
        report: json!({
            "version": VERSION,
            "seed": seed,
            "multiplier_exponents_of_i": table,
            "projections": space.lines().iter().zip(data.quadratures.projections()).map(|(l, p)| json!({
                "line": space.line_to_json(l),
                "matrix": matrix_to_json(p),
            })).collect::<Vec<_>>(),
            "rotation_operator": matrix_to_json(&data.rotation),
            "rotation_phase": [data.phase.re, data.phase.im],
            "checks": checks,
            "passed": passed,
        }),
        passed,
    }
}
