//! Quadrature systems: maps from affine lines to rank-1 projections forming
//! a complete set of mutually unbiased bases.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_field::{FieldDescriptor, FieldSpec};
use crate::multiplier_lab::{intertwiner, phase_modulus, MultiplierError, MultiplierJson, MultiplierTable};
use crate::phase_space::{AffineLine, GeometryError, LineJson, LinearMap2, PhaseSpace, PhaseVector, SymplecticForm};
use crate::weyl_rep::{
    is_irreducible, matrix_from_json, matrix_to_json, max_abs_diff, root_of_unity, svn_intertwiner, trace, CMatrix,
    MatrixJson, WeylError, WeylSystem, TOL_IDENTITY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("Weyl system is not irreducible")]
    NotIrreducible,
    #[error("quadrature system is not translation covariant")]
    NotCovariant,
    #[error("no symplectic form makes the system covariant")]
    NoneFound,
    #[error("several symplectic forms make the system covariant")]
    MultipleFound,
    #[error("associated multiplier depends on the origin")]
    OriginDependent,
    #[error("witness failed verification (residual {0:.3e})")]
    WitnessFailed(f64),
    #[error("malformed bundle: {0}")]
    BadBundle(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Where a system came from, when known.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub origin: PhaseVector,
    pub multiplier: Option<MultiplierTable>,
}

/// A map from line indices to q × q projections.
#[derive(Clone, Debug)]
pub struct QuadratureSystem {
    space: PhaseSpace,
    proj: Vec<CMatrix>,
    provenance: Option<Provenance>,
}

impl QuadratureSystem {
    pub fn new(space: &PhaseSpace, proj: Vec<CMatrix>) -> Result<Self, QuadratureError> {
        let q = space.q();
        if proj.len() != space.num_lines() || proj.iter().any(|p| p.shape() != (q, q)) {
            return Err(QuadratureError::BadBundle(format!(
                "expected {} projections of size {q}x{q}",
                space.num_lines()
            )));
        }
        Ok(QuadratureSystem { space: space.clone(), proj, provenance: None })
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Projection on line index `l`.
    pub fn proj(&self, l: usize) -> &CMatrix {
        &self.proj[l]
    }

    pub fn at(&self, l: &AffineLine) -> &CMatrix {
        &self.proj[self.space.line_index(l)]
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.proj
    }

    /// Replaces one projection; used to build corrupted systems.
    pub fn with_projection(&self, l: usize, p: CMatrix) -> Self {
        let mut out = self.clone();
        out.proj[l] = p;
        out.provenance = None;
        out
    }

    /// `U Q(l) U†` on every line.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        let ud = u.adjoint();
        QuadratureSystem {
            space: self.space.clone(),
            proj: self.proj.iter().map(|p| u * p * &ud).collect(),
            provenance: None,
        }
    }

    /// Largest entrywise difference from another system.
    pub fn distance(&self, other: &Self) -> f64 {
        self.proj.iter().zip(&other.proj).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max)
    }

    /// Unit vectors spanning each projection, first nonzero amplitude real
    /// and positive.
    pub fn mub_vectors(&self) -> Vec<DVector<Complex64>> {
        self.proj
            .iter()
            .map(|p| {
                let col = (0..p.ncols())
                    .max_by(|&a, &b| p.column(a).norm().total_cmp(&p.column(b).norm()))
                    .expect("nonempty");
                let v: DVector<Complex64> = p.column(col).into_owned();
                let v = &v / Complex64::new(v.norm(), 0.0);
                match v.iter().find(|z| z.norm() > 1e-9) {
                    Some(z) => &v * (z.conj() / z.norm()),
                    None => v,
                }
            })
            .collect()
    }
}

/// `exp(2πi Tr S(u, v) / p)`.
fn bichar(space: &PhaseSpace, s: &SymplecticForm, u: PhaseVector, v: PhaseVector) -> Complex64 {
    root_of_unity(space.bicharacter(s, u, v), space.field().characteristic())
}

/// `Q(o + v + D) = (1/q) Σ_{d ∈ D} b_S(v, d) W(d)`.
pub fn quadratures_from_weyl(w: &WeylSystem, o: PhaseVector) -> Result<QuadratureSystem, QuadratureError> {
    if !is_irreducible(w.ops()) {
        return Err(QuadratureError::NotIrreducible);
    }
    let space = w.space();
    let s = w.form();
    let q = space.q();
    let proj = space
        .lines()
        .iter()
        .map(|l| {
            let v = space.sub(l.base, o);
            let mut acc = CMatrix::zeros(q, q);
            for d in space.direction_points(&l.direction) {
                acc += w.op(space.index(d)) * bichar(space, &s, v, d);
            }
            acc / Complex64::new(q as f64, 0.0)
        })
        .collect();
    Ok(QuadratureSystem {
        space: space.clone(),
        proj,
        provenance: Some(Provenance { origin: o, multiplier: Some(w.multiplier().clone()) }),
    })
}

/// Outcome of one axiom check.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AxiomCheck {
    pub passed: bool,
    pub residual: f64,
    /// Line indices of the worst offender.
    pub witness: Option<Vec<usize>>,
}

impl AxiomCheck {
    fn from_worst(worst: f64, witness: Option<Vec<usize>>, tol: f64) -> Self {
        let passed = worst <= tol;
        AxiomCheck { passed, residual: worst, witness: if passed { None } else { witness } }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AxiomReport {
    /// Each Q(l) is a rank-1 orthogonal projection.
    pub projections: AxiomCheck,
    /// Parallel lines give a resolution of the identity.
    pub resolutions: AxiomCheck,
    /// Non-parallel lines have `tr(Q(l1) Q(l2)) = 1/q`.
    pub unbiasedness: AxiomCheck,
    /// The projections span the full operator space.
    pub span: AxiomCheck,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.projections.passed && self.resolutions.passed && self.unbiasedness.passed && self.span.passed
    }

    pub fn worst_residual(&self) -> f64 {
        [&self.projections, &self.resolutions, &self.unbiasedness].iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

pub fn verify_quadrature_axioms(qs: &QuadratureSystem, tol: f64) -> AxiomReport {
    let space = &qs.space;
    let q = space.q();
    let one = Complex64::new(1.0, 0.0);

    let mut worst = (0.0, None);
    for (l, p) in qs.proj.iter().enumerate() {
        let r = max_abs_diff(p, &p.adjoint()).max(max_abs_diff(&(p * p), p)).max((trace(p) - one).norm());
        if r > worst.0 {
            worst = (r, Some(vec![l]));
        }
    }
    let projections = AxiomCheck::from_worst(worst.0, worst.1, tol);

    let mut worst = (0.0, None);
    let id = CMatrix::identity(q, q);
    for d in 0..space.directions().len() {
        let sum = (0..q).fold(CMatrix::zeros(q, q), |acc, k| acc + &qs.proj[d * q + k]);
        let r = max_abs_diff(&sum, &id);
        if r > worst.0 {
            worst = (r, Some((d * q..(d + 1) * q).collect()));
        }
    }
    let resolutions = AxiomCheck::from_worst(worst.0, worst.1, tol);

    let mut worst = (0.0, None);
    let target = Complex64::new(1.0 / q as f64, 0.0);
    let n = space.num_lines();
    for a in 0..n {
        for b in 0..n {
            if space.line_direction(a) != space.line_direction(b) {
                let r = (trace(&(&qs.proj[a] * &qs.proj[b])) - target).norm();
                if r > worst.0 {
                    worst = (r, Some(vec![a, b]));
                }
            }
        }
    }
    let unbiasedness = AxiomCheck::from_worst(worst.0, worst.1, tol);

    let spans = is_irreducible(&qs.proj);
    let span = AxiomCheck { passed: spans, residual: if spans { 0.0 } else { 1.0 }, witness: None };

    AxiomReport { projections, resolutions, unbiasedness, span }
}

/// Largest deviation from `Q(l + v) = W(v) Q(l) W(v)†`.
pub fn translation_covariance_residual(qs: &QuadratureSystem, w: &WeylSystem) -> f64 {
    let space = &qs.space;
    let mut worst: f64 = 0.0;
    for (vi, v) in space.vectors().enumerate() {
        let wv = w.op(vi);
        let wd = wv.adjoint();
        for l in 0..space.num_lines() {
            let moved = space.translate_idx(l, v);
            worst = worst.max(max_abs_diff(&qs.proj[moved], &(wv * &qs.proj[l] * &wd)));
        }
    }
    worst
}

pub fn translation_covariance_check(qs: &QuadratureSystem, w: &WeylSystem) -> bool {
    translation_covariance_residual(qs, w) <= TOL_IDENTITY
}

/// Operators `W_o(u) = Σ_{v + Fu} b_S(u, v) Q(o + v + Fu)`, with `W_o(0) = I`.
fn centered_operators(qs: &QuadratureSystem, o: PhaseVector, s: &SymplecticForm) -> Vec<CMatrix> {
    let space = &qs.space;
    let q = space.q();
    space
        .vectors()
        .map(|u| {
            if u.is_zero() {
                return CMatrix::identity(q, q);
            }
            let d = space.direction_index_of(u).expect("nonzero");
            (0..q).fold(CMatrix::zeros(q, q), |acc, k| {
                let l = space.line(d * q + k);
                acc + &qs.proj[d * q + k] * bichar(space, s, u, space.sub(l.base, o))
            })
        })
        .collect()
}

/// The Weyl system centered at `o` associated with `Q` and the form `S`.
pub fn centered_weyl_from_quadratures(
    qs: &QuadratureSystem,
    o: PhaseVector,
    s: &SymplecticForm,
) -> Result<WeylSystem, QuadratureError> {
    let ops = centered_operators(qs, o, s);
    let w = WeylSystem::from_operators(&qs.space, ops).map_err(|_| QuadratureError::NotCovariant)?;
    if w.form() != *s || !translation_covariance_check(qs, &w) {
        return Err(QuadratureError::NotCovariant);
    }
    Ok(w)
}

/// The unique form for which `Q` is translation covariant.
pub fn induced_symplectic_form(qs: &QuadratureSystem) -> Result<SymplecticForm, QuadratureError> {
    let found: Vec<SymplecticForm> = SymplecticForm::all(qs.space.field())
        .into_iter()
        .filter(|s| centered_weyl_from_quadratures(qs, PhaseVector::ZERO, s).is_ok())
        .collect();
    match found.len() {
        0 => Err(QuadratureError::NoneFound),
        1 => Ok(found[0]),
        _ => Err(QuadratureError::MultipleFound),
    }
}

fn second_origin(space: &PhaseSpace) -> PhaseVector {
    space.vector(space.size() - 1)
}

/// The multiplier of the centered Weyl system, checked at two origins.
pub fn associated_multiplier(qs: &QuadratureSystem) -> Result<MultiplierTable, QuadratureError> {
    let s = induced_symplectic_form(qs)?;
    let m = centered_weyl_from_quadratures(qs, PhaseVector::ZERO, &s)?.multiplier().clone();
    let m2 = centered_weyl_from_quadratures(qs, second_origin(&qs.space), &s)?.multiplier().clone();
    if m != m2 {
        return Err(QuadratureError::OriginDependent);
    }
    Ok(m)
}

/// Largest deviation from `Q2(l) = U Q1(l) U†`.
pub fn conjugation_residual(q1: &QuadratureSystem, q2: &QuadratureSystem, u: &CMatrix) -> f64 {
    q2.distance(&q1.conjugated(u))
}

/// Whether `Q1` and `Q2` are unitarily equivalent, with a verified unitary.
pub fn are_equivalent(
    q1: &QuadratureSystem,
    q2: &QuadratureSystem,
    seed: u64,
) -> Result<Option<CMatrix>, QuadratureError> {
    let s1 = induced_symplectic_form(q1)?;
    let s2 = induced_symplectic_form(q2)?;
    let m1 = associated_multiplier(q1)?;
    let m2 = associated_multiplier(q2)?;
    if s1 != s2 || m1 != m2 {
        return Ok(None);
    }
    let w1 = centered_weyl_from_quadratures(q1, PhaseVector::ZERO, &s1)?;
    let w2 = centered_weyl_from_quadratures(q2, PhaseVector::ZERO, &s2)?;
    let u = svn_intertwiner(&w1, &w2, seed)?;
    let r = conjugation_residual(q1, q2, &u);
    if r > TOL_IDENTITY {
        return Err(QuadratureError::WitnessFailed(r));
    }
    Ok(Some(u))
}

/// `Q_g(l) = Q(g · l)` for `g = (A, v)` acting about the origin.
pub fn g_action(qs: &QuadratureSystem, a: &LinearMap2, v: PhaseVector) -> Result<QuadratureSystem, QuadratureError> {
    let space = &qs.space;
    let perm = space.line_permutation(a, v)?;
    Ok(QuadratureSystem {
        space: space.clone(),
        proj: perm.iter().map(|&k| qs.proj[k].clone()).collect(),
        provenance: None,
    })
}

/// `Q'(l) = Q(l + w_D)` with one shift per direction index.
pub fn shifted(qs: &QuadratureSystem, shifts: &[PhaseVector]) -> QuadratureSystem {
    let space = &qs.space;
    QuadratureSystem {
        space: space.clone(),
        proj: (0..space.num_lines())
            .map(|l| qs.proj[space.translate_idx(l, shifts[space.line_direction(l)])].clone())
            .collect(),
        provenance: None,
    }
}

/// Data realizing `Q2(l) = U Q1(A·l + u_D) U†`, with `D` the direction of `l`.
#[derive(Clone, Debug)]
pub struct RangeWitness {
    pub map: LinearMap2,
    /// Indexed by direction index of `l`.
    pub shifts: Vec<PhaseVector>,
    pub unitary: CMatrix,
}

pub fn range_witness_residual(q1: &QuadratureSystem, q2: &QuadratureSystem, w: &RangeWitness) -> f64 {
    let space = &q1.space;
    let ud = w.unitary.adjoint();
    let mut worst: f64 = 0.0;
    for (li, l) in space.lines().iter().enumerate() {
        let Ok(image) = space.affine_action(&w.map, PhaseVector::ZERO, l) else {
            return f64::INFINITY;
        };
        let shift = w.shifts[space.line_direction(li)];
        let target = space.line_index(&space.translate(&image, shift));
        let rhs = &w.unitary * &q1.proj[target] * &ud;
        worst = worst.max(max_abs_diff(&q2.proj[li], &rhs));
    }
    worst
}

/// A map `A` with `det A = λ2/λ1`, per-direction shifts and a unitary
/// relating two translation-covariant systems.
pub fn range_conjugacy_witness(
    q1: &QuadratureSystem,
    q2: &QuadratureSystem,
    seed: u64,
) -> Result<RangeWitness, QuadratureError> {
    let space = q1.space.clone();
    let f = space.field().clone();
    let s1 = induced_symplectic_form(q1)?;
    let s2 = induced_symplectic_form(q2)?;
    let mu = f.div(s2.lambda(), s1.lambda()).map_err(MultiplierError::from)?;
    let a = LinearMap2::diag(f.one(), mu);
    // Q2'(l) = Q2(A⁻¹ l) carries the form of Q1.
    let q2p = g_action(q2, &a.inverse(&f)?, PhaseVector::ZERO)?;
    if induced_symplectic_form(&q2p)? != s1 {
        return Err(QuadratureError::WitnessFailed(f64::INFINITY));
    }
    let m1 = associated_multiplier(q1)?;
    let m2 = associated_multiplier(&q2p)?;
    let phase = intertwiner(&m1, &m2)?;
    let l = phase_modulus(f.characteristic());
    let p = f.characteristic();

    // Find w_D with a(d) = b_S(w_D, d) for every d ∈ D.
    let mut w = Vec::with_capacity(space.directions().len());
    for dir in space.directions() {
        let pts = space.direction_points(dir);
        let found = space
            .vectors()
            .find(|&cand| pts.iter().all(|&d| phase.at(d) == space.bicharacter(&s1, cand, d) * (l / p) % l));
        w.push(found.ok_or(QuadratureError::NotCovariant)?);
    }
    let q1p = shifted(q1, &w);
    let u = are_equivalent(&q1p, &q2p, seed)?.ok_or(QuadratureError::NotCovariant)?;
    // Q2(l) = Q2'(A l) = U Q1(A l + w_{AD}) U†.
    let shifts = space
        .directions()
        .iter()
        .map(|d| {
            let image = space.span(a.apply(&f, d.rep())).expect("invertible");
            w[space.direction_index(&image)]
        })
        .collect();
    let witness = RangeWitness { map: a, shifts, unitary: u };
    let r = range_witness_residual(q1, q2, &witness);
    if r > TOL_IDENTITY {
        return Err(QuadratureError::WitnessFailed(r));
    }
    Ok(witness)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionJson {
    pub line: LineJson,
    pub matrix: MatrixJson,
}

/// File format for a quadrature system with its construction data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MubBundle {
    pub field: FieldDescriptor,
    pub lambda: Vec<u32>,
    pub origin: [Vec<u32>; 2],
    pub multiplier: MultiplierJson,
    pub projections: Vec<ProjectionJson>,
}

impl MubBundle {
    pub fn from_system(qs: &QuadratureSystem, s: &SymplecticForm, m: &MultiplierTable, o: PhaseVector) -> Self {
        let space = &qs.space;
        MubBundle {
            field: space.field().descriptor(),
            lambda: space.field().coeffs(s.lambda()),
            origin: space.vector_to_json(o),
            multiplier: m.to_json(),
            projections: space
                .lines()
                .iter()
                .zip(&qs.proj)
                .map(|(l, p)| ProjectionJson { line: space.line_to_json(l), matrix: matrix_to_json(p) })
                .collect(),
        }
    }

    /// Rebuilds the system, requiring every line exactly once.
    pub fn to_system(
        &self,
    ) -> Result<(QuadratureSystem, SymplecticForm, MultiplierTable, PhaseVector), QuadratureError> {
        let bad = |e: String| QuadratureError::BadBundle(e);
        let field = FieldSpec::from_descriptor(&self.field).map_err(|e| bad(e.to_string()))?;
        let space = PhaseSpace::new(&field);
        let lambda = field.element(&self.lambda).map_err(|e| bad(e.to_string()))?;
        let s = SymplecticForm::new(lambda)?;
        let o = space.vector_from_json(&self.origin)?;
        let m = MultiplierTable::from_json_on(&space, &self.multiplier)?;
        let mut slots: Vec<Option<CMatrix>> = vec![None; space.num_lines()];
        for pj in &self.projections {
            let l = space.line_from_json(&pj.line)?;
            let idx = space.line_index(&l);
            if slots[idx].is_some() {
                return Err(bad(format!("line {idx} listed twice")));
            }
            slots[idx] = Some(matrix_from_json(&pj.matrix)?);
        }
        let proj = slots
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| bad(format!("line {i} missing"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut qs = QuadratureSystem::new(&space, proj)?;
        qs.provenance = Some(Provenance { origin: o, multiplier: Some(m.clone()) });
        Ok((qs, s, m, o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier_lab::{enumerate_weyl_multipliers, m_inv, pullback};
    use crate::weyl_rep::{random_unitary, weyl_system_from_multiplier, DEFAULT_SEED};
    use rand::SeedableRng;

    fn space(p: u32, r: u32) -> PhaseSpace {
        PhaseSpace::new(&FieldSpec::new(p, r, None).unwrap())
    }

    fn system(m: &MultiplierTable, o: PhaseVector) -> (WeylSystem, QuadratureSystem) {
        let w = weyl_system_from_multiplier(m).unwrap();
        let q = quadratures_from_weyl(&w, o).unwrap();
        (w, q)
    }

    #[test]
    fn axioms_hold_for_constructed_systems() {
        for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let s = space(p, r);
            let all = enumerate_weyl_multipliers(&s, &SymplecticForm::standard()).unwrap();
            for m in all.iter().take(3) {
                let (w, q) = system(m, PhaseVector::ZERO);
                let report = verify_quadrature_axioms(&q, 1e-9);
                assert!(report.all_passed(), "{report:?}");
                assert!(translation_covariance_check(&q, &w));
            }
        }
    }

    #[test]
    fn corrupted_systems_fail() {
        let s = space(3, 1);
        let (w, q) = system(&m_inv(&s, &SymplecticForm::standard()).unwrap(), PhaseVector::ZERO);
        let mixed = q.with_projection(0, CMatrix::identity(3, 3) / Complex64::new(3.0, 0.0));
        let report = verify_quadrature_axioms(&mixed, 1e-9);
        assert!(!report.projections.passed);
        assert_eq!(report.projections.witness, Some(vec![0]));

        let mut swapped = q.clone();
        swapped.proj.swap(0, 3);
        assert!(!verify_quadrature_axioms(&swapped, 1e-9).resolutions.passed);

        let moved = q.with_projection(0, q.proj(1).clone());
        assert!(!translation_covariance_check(&moved, &w));
    }

    #[test]
    fn fourier_round_trip_and_recentering() {
        let s = space(3, 1);
        let form = SymplecticForm::standard();
        let o = PhaseVector::new(s.field().from_int(1), s.field().from_int(2));
        let (w, q) = system(&m_inv(&s, &form).unwrap(), o);
        let wo = centered_weyl_from_quadratures(&q, o, &form).unwrap();
        for v in 0..9 {
            assert!(max_abs_diff(wo.op(v), w.op(v)) < 1e-9);
        }
        for dir in s.directions() {
            let line = q.at(&s.line_through(o, dir));
            for d in s.direction_points(dir) {
                assert!(max_abs_diff(&(wo.op(s.index(d)) * line), line) < 1e-9);
            }
        }
        let o2 = PhaseVector::ZERO;
        let w2 = centered_weyl_from_quadratures(&q, o2, &form).unwrap();
        let shift = wo.op(s.index(s.sub(o2, o)));
        for v in 0..9 {
            let rhs = shift * wo.op(v) * shift.adjoint();
            assert!(max_abs_diff(w2.op(v), &rhs) < 1e-9);
        }
    }

    #[test]
    fn induced_form_round_trip() {
        let s = space(3, 1);
        let f = s.field().clone();
        for lam in [1, 2] {
            let form = SymplecticForm::new(f.from_int(lam)).unwrap();
            let (_, q) = system(&m_inv(&s, &form).unwrap(), PhaseVector::ZERO);
            assert_eq!(induced_symplectic_form(&q).unwrap(), form);
            let a = LinearMap2::diag(f.one(), f.from_int(2));
            let moved = g_action(&q, &a, PhaseVector::ZERO).unwrap();
            assert!(verify_quadrature_axioms(&moved, 1e-9).all_passed());
            let scaled = form.scaled(&f, f.from_int(2)).unwrap();
            assert_eq!(induced_symplectic_form(&moved).unwrap(), scaled);
        }
    }

    #[test]
    fn associated_multiplier_is_origin_and_conjugation_invariant() {
        let s = space(3, 1);
        let all = enumerate_weyl_multipliers(&s, &SymplecticForm::standard()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for m in all.iter().take(4) {
            let (_, q) = system(m, PhaseVector::new(s.field().one(), s.field().zero()));
            assert_eq!(&associated_multiplier(&q).unwrap(), m);
            let u = random_unitary(3, &mut rng);
            assert_eq!(&associated_multiplier(&q.conjugated(&u)).unwrap(), m);
        }
    }

    #[test]
    fn equivalence_and_translations() {
        let s = space(3, 1);
        let form = SymplecticForm::standard();
        let all = enumerate_weyl_multipliers(&s, &form).unwrap();
        let (w, q) = system(&all[0], PhaseVector::ZERO);
        let u = are_equivalent(&q, &q, DEFAULT_SEED).unwrap().unwrap();
        assert!(max_abs_diff(&u, &CMatrix::identity(3, 3)) < 1e-9);
        let (_, other) = system(&all[1], PhaseVector::ZERO);
        assert!(are_equivalent(&q, &other, DEFAULT_SEED).unwrap().is_none());

        let v = PhaseVector::new(s.field().one(), s.field().from_int(2));
        let moved = g_action(&q, &LinearMap2::identity(), v).unwrap();
        let wv = w.op(s.index(v));
        assert!(conjugation_residual(&q, &moved, wv) < 1e-9);
        assert!(are_equivalent(&q, &moved, DEFAULT_SEED).unwrap().is_some());
    }

    #[test]
    fn relabeling_by_shifts_is_equivalent() {
        let s = space(3, 1);
        let form = SymplecticForm::standard();
        let (_, q) = system(&m_inv(&s, &form).unwrap(), PhaseVector::ZERO);
        let shifts: Vec<PhaseVector> = (0..4).map(|d| s.vector(d * 2 % 9)).collect();
        let relabeled = shifted(&q, &shifts);
        assert!(verify_quadrature_axioms(&relabeled, 1e-9).all_passed());
        let m2 = associated_multiplier(&relabeled).unwrap();
        let (_, rebuilt) = system(&m2, PhaseVector::ZERO);
        let u = are_equivalent(&rebuilt, &relabeled, DEFAULT_SEED).unwrap().unwrap();
        assert!(conjugation_residual(&rebuilt, &relabeled, &u) < 1e-9);
    }

    #[test]
    fn range_conjugacy_across_forms() {
        let s = space(3, 1);
        let f = s.field().clone();
        let form1 = SymplecticForm::standard();
        let form2 = SymplecticForm::new(f.from_int(2)).unwrap();
        let (_, q1) = system(&m_inv(&s, &form1).unwrap(), PhaseVector::ZERO);
        let all2 = enumerate_weyl_multipliers(&s, &form2).unwrap();
        for m in all2.iter().take(3) {
            let (_, q2) = system(m, PhaseVector::ZERO);
            let w = range_conjugacy_witness(&q1, &q2, DEFAULT_SEED).unwrap();
            assert_eq!(w.map.det(&f), f.from_int(2));
            assert!(range_witness_residual(&q1, &q2, &w) < 1e-9);
        }
        let same = range_conjugacy_witness(&q1, &q1, DEFAULT_SEED).unwrap();
        assert_eq!(same.map, LinearMap2::identity());
        assert!(same.shifts.iter().all(|v| v.is_zero()));
        assert!(max_abs_diff(&same.unitary, &CMatrix::identity(3, 3)) < 1e-9);
    }

    #[test]
    fn pulled_back_multiplier_matches_g_action() {
        let s = space(3, 1);
        let f = s.field().clone();
        let form = SymplecticForm::standard();
        let m = enumerate_weyl_multipliers(&s, &form).unwrap()[4].clone();
        let (_, q) = system(&m, PhaseVector::ZERO);
        let a = LinearMap2::new(f.one(), f.one(), f.zero(), f.one());
        let moved = g_action(&q, &a, PhaseVector::ZERO).unwrap();
        let expected = pullback(&m, &a).unwrap();
        assert_eq!(associated_multiplier(&moved).unwrap(), expected);
    }

    #[test]
    fn bundle_roundtrip() {
        let s = space(2, 1);
        let form = SymplecticForm::standard();
        let m = enumerate_weyl_multipliers(&s, &form).unwrap()[0].clone();
        let (_, q) = system(&m, PhaseVector::ZERO);
        let b = MubBundle::from_system(&q, &form, &m, PhaseVector::ZERO);
        let text = serde_json::to_string(&b).unwrap();
        let back: MubBundle = serde_json::from_str(&text).unwrap();
        let (q2, s2, m2, o2) = back.to_system().unwrap();
        assert_eq!(q2.distance(&q), 0.0);
        assert_eq!((s2, m2, o2), (form, m, PhaseVector::ZERO));
        let mut dup = back.clone();
        dup.projections[1] = dup.projections[0].clone();
        assert!(dup.to_system().is_err());
    }

    #[test]
    fn mub_vectors_are_unbiased() {
        let s = space(3, 1);
        let (_, q) = system(&m_inv(&s, &SymplecticForm::standard()).unwrap(), PhaseVector::ZERO);
        let vs = q.mub_vectors();
        for a in 0..12 {
            for b in 0..12 {
                let ip = vs[a].dotc(&vs[b]).norm_sqr();
                let expect = if a == b {
                    1.0
                } else if a / 3 == b / 3 {
                    0.0
                } else {
                    1.0 / 3.0
                };
                assert!((ip - expect).abs() < 1e-9);
            }
        }
    }
}
