//! SL(V), nonsplit toruses and metaplectic operators.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::finite_field::QuadraticExtension;
use crate::multiplier_lab::{bicharacter_exp, intertwiner, pullback, MultiplierError, PhaseFunction};
use crate::phase_space::{GeometryError, LinearMap2, PhaseSpace, PhaseVector};
use crate::quadrature::QuadratureSystem;
use crate::weyl_rep::{
    max_abs_diff, root_of_unity, svn_intertwiner, trace, unitarity_residual, CMatrix, WeylError, WeylSystem,
    TOL_IDENTITY,
};

/// Largest field order accepted by `sl_enumerate`.
pub const MAX_SL_ORDER: usize = 9;
/// Largest field order accepted by `sl_extension_probe`.
pub const MAX_PROBE_ORDER: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymplecticError {
    #[error("field of order {q} exceeds the limit {max} for this operation")]
    FieldTooLarge { q: usize, max: usize },
    #[error("map does not have determinant 1")]
    NotUnimodular,
    #[error("multiplier is not invariant under the map")]
    NotInvariantMultiplier,
    #[error("A - I is singular")]
    SingularAminusI,
    #[error("U(A)^n is not scalar (residual {0:.3e})")]
    NotScalarPower(f64),
    #[error("no operator supplied for the torus generator")]
    MissingGenerator,
    #[error("operator check failed (residual {0:.3e})")]
    CheckFailed(f64),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// All maps of determinant 1, row-major lexicographic in the entries.
pub fn sl_enumerate(space: &PhaseSpace) -> Result<Vec<LinearMap2>, SymplecticError> {
    let q = space.q();
    if q > MAX_SL_ORDER {
        return Err(SymplecticError::FieldTooLarge { q, max: MAX_SL_ORDER });
    }
    Ok(space.maps_with_det(space.field().one()))
}

/// Nonsplit test via the characteristic polynomial `X² - tr(A) X + 1`.
pub fn is_nonsplit(space: &PhaseSpace, a: &LinearMap2) -> Result<bool, SymplecticError> {
    let f = space.field();
    if a.det(f) != f.one() {
        return Err(SymplecticError::NotUnimodular);
    }
    Ok(!a.char_poly_has_root(f))
}

/// Nonsplit test via directions: `A D ≠ D` for every direction `D`.
pub fn is_nonsplit_by_directions(space: &PhaseSpace, a: &LinearMap2) -> Result<bool, SymplecticError> {
    let f = space.field();
    if a.det(f) != f.one() {
        return Err(SymplecticError::NotUnimodular);
    }
    Ok(space.directions().iter().all(|d| !space.contains(d, a.apply(f, d.rep()))))
}

/// A cyclic subgroup of SL(V) listed by powers of its generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Torus {
    pub generator: LinearMap2,
    /// `A^0, A^1, …, A^(n-1)`.
    pub elements: Vec<LinearMap2>,
}

impl Torus {
    pub fn generated_by(space: &PhaseSpace, a: &LinearMap2) -> Self {
        let f = space.field();
        let mut elements = vec![LinearMap2::identity()];
        let mut x = *a;
        while x != LinearMap2::identity() {
            elements.push(x);
            x = x.compose(f, a);
        }
        Torus { generator: *a, elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index `k` with `A^k = b`.
    pub fn position(&self, b: &LinearMap2) -> Option<usize> {
        self.elements.iter().position(|x| x == b)
    }
}

/// The torus generated by `[[z0 + z̄0, 1], [-1, 0]]`, where `z0` generates
/// the norm-one subgroup of the quadratic extension.
pub fn maximal_nonsplit_torus(space: &PhaseSpace) -> Torus {
    let f = space.field();
    let ext = QuadraticExtension::new(f);
    let t = ext.ext_trace(ext.norm_one_generator());
    let a = LinearMap2::new(t, f.one(), f.neg(f.one()), f.zero());
    Torus::generated_by(space, &a)
}

/// Elements of SL(V) commuting with the torus generator.
pub fn torus_commutant(space: &PhaseSpace, t: &Torus) -> Result<Vec<LinearMap2>, SymplecticError> {
    let f = space.field();
    let g = t.generator;
    Ok(sl_enumerate(space)?.into_iter().filter(|b| b.compose(f, &g) == g.compose(f, b)).collect())
}

/// Orbits of the torus on direction indices, each sorted, ordered by their
/// smallest member.
pub fn torus_orbits_on_directions(space: &PhaseSpace, t: &Torus) -> Vec<Vec<usize>> {
    let f = space.field();
    let nd = space.directions().len();
    let mut seen = vec![false; nd];
    let mut orbits = Vec::new();
    for start in 0..nd {
        if seen[start] {
            continue;
        }
        let rep = space.direction(start).rep();
        let mut orbit: Vec<usize> =
            t.elements.iter().map(|a| space.direction_index_of(a.apply(f, rep)).expect("invertible")).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &d in &orbit {
            seen[d] = true;
        }
        orbits.push(orbit);
    }
    orbits
}

/// An operator implementing `W(A v) = U W(v) U†`.
#[derive(Clone, Debug)]
pub struct MetaplecticOp {
    pub map: LinearMap2,
    pub matrix: CMatrix,
    /// The scalar `c(A)` multiplying the raw formula.
    pub phase: Complex64,
}

/// Largest deviation from `W(A v) = U W(v) U†`.
pub fn metaplectic_residual(w: &WeylSystem, a: &LinearMap2, u: &CMatrix) -> f64 {
    let space = w.space();
    let f = space.field();
    let ud = u.adjoint();
    space
        .vectors()
        .enumerate()
        .map(|(i, v)| max_abs_diff(w.op(space.index(a.apply(f, v))), &(u * w.op(i) * &ud)))
        .fold(0.0, f64::max)
}

/// `U(A) = (1/q) Σ_u m(u, (A - I)⁻¹ u) W(u)`, with `c(A) = 1`.
pub fn metaplectic_operator(a: &LinearMap2, w: &WeylSystem) -> Result<MetaplecticOp, SymplecticError> {
    let space = w.space();
    let f = space.field();
    let q = space.q();
    if a.det(f) != f.one() {
        return Err(SymplecticError::NotUnimodular);
    }
    let m = w.multiplier();
    if &pullback(m, a)? != m {
        return Err(SymplecticError::NotInvariantMultiplier);
    }
    let k = a.minus_identity(f).inverse(f).map_err(|_| SymplecticError::SingularAminusI)?;
    let l = m.modulus();
    let mut u = CMatrix::zeros(q, q);
    for (i, v) in space.vectors().enumerate() {
        u += w.op(i) * root_of_unity(m.at(v, k.apply(f, v)), l);
    }
    u /= Complex64::new(q as f64, 0.0);
    let r = unitarity_residual(&u).max(metaplectic_residual(w, a, &u));
    if r > TOL_IDENTITY {
        return Err(SymplecticError::CheckFailed(r));
    }
    Ok(MetaplecticOp { map: *a, matrix: u, phase: Complex64::new(1.0, 0.0) })
}

/// An ordinary representation of a torus.
#[derive(Clone, Debug)]
pub struct TorusRepresentation {
    pub torus: Torus,
    /// `U(A^k)` for each torus element in order.
    pub ops: Vec<CMatrix>,
    /// Scalar `ζ` with `U_raw(A)^n = ζ I`.
    pub raw_power: Complex64,
    /// The fixed phase `c(A)` of the generator.
    pub phase: Complex64,
}

impl TorusRepresentation {
    /// Largest deviation from `U(A^j) U(A^k) = U(A^(j+k))`.
    pub fn homomorphism_residual(&self) -> f64 {
        let n = self.ops.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                worst = worst.max(max_abs_diff(&(&self.ops[j] * &self.ops[k]), &self.ops[(j + k) % n]));
            }
        }
        worst
    }
}

/// Rescales the generator's operator by the principal `n`-th root of `ζ̄`
/// (argument in `[0, 2π/n)`), where `U(A)^n = ζ I`, and sets
/// `U(A^k) = U(A)^k`.
pub fn ordinary_phase_fix(t: &Torus, raw: &[MetaplecticOp]) -> Result<TorusRepresentation, SymplecticError> {
    let n = t.order();
    let gen = raw.iter().find(|op| op.map == t.generator).ok_or(SymplecticError::MissingGenerator)?;
    let d = gen.matrix.nrows();
    let mut power = CMatrix::identity(d, d);
    for _ in 0..n {
        power = &power * &gen.matrix;
    }
    let zeta = trace(&power) / d as f64;
    let r = max_abs_diff(&power, &(CMatrix::identity(d, d) * zeta));
    if r > TOL_IDENTITY {
        return Err(SymplecticError::NotScalarPower(r));
    }
    let arg = zeta.conj().arg().rem_euclid(2.0 * PI);
    let c = Complex64::from_polar(1.0, arg / n as f64);
    let fixed = &gen.matrix * c;
    let mut ops = Vec::with_capacity(n);
    let mut x = CMatrix::identity(d, d);
    for _ in 0..n {
        ops.push(x.clone());
        x = &x * &fixed;
    }
    Ok(TorusRepresentation { torus: t.clone(), ops, raw_power: zeta, phase: gen.phase * c })
}

/// Largest deviation from `Q(A·l) = U Q(l) U†` over the given pairs.
pub fn covariance_residual(qs: &QuadratureSystem, family: &[(LinearMap2, CMatrix)]) -> f64 {
    let space = qs.space();
    let mut worst: f64 = 0.0;
    for (a, u) in family {
        let Ok(perm) = space.line_permutation(a, PhaseVector::ZERO) else {
            return f64::INFINITY;
        };
        let ud = u.adjoint();
        for (l, &target) in perm.iter().enumerate() {
            worst = worst.max(max_abs_diff(qs.proj(target), &(u * qs.proj(l) * &ud)));
        }
    }
    worst
}

pub fn covariant_quadrature_check(qs: &QuadratureSystem, family: &[(LinearMap2, CMatrix)]) -> bool {
    covariance_residual(qs, family) <= TOL_IDENTITY
}

/// Cocycle defects of the operators `U_A W(v) U_A† = a(A, v) W(A v)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub group_order: usize,
    /// Pairs `(i, j)` of group indices with at least one nonzero defect
    /// `a(AB, v) - a(A, Bv) - a(B, v)`, and how many `v` are affected.
    pub defective_pairs: Vec<(usize, usize, usize)>,
    pub defect_free: bool,
    /// For q = 2: whether some choice of character corrections removes every defect.
    pub corrected_defect_free: Option<bool>,
    /// Set when no claim is made about the outcome.
    pub informational: bool,
}

/// Probes whether `A ↦ U_A` can be chosen projectively multiplicative.
pub fn sl_extension_probe(w: &WeylSystem, seed: u64) -> Result<ProbeReport, SymplecticError> {
    let space = w.space().clone();
    let q = space.q();
    if q > MAX_PROBE_ORDER {
        return Err(SymplecticError::FieldTooLarge { q, max: MAX_PROBE_ORDER });
    }
    let f = space.field().clone();
    let group = sl_enumerate(&space)?;
    let m = w.multiplier();
    let mut phases: Vec<PhaseFunction> = Vec::with_capacity(group.len());
    for a in &group {
        let pa = intertwiner(&pullback(m, a)?, m)?;
        // Confirms that U_A exists.
        let wa = WeylSystem::from_operators(
            &space,
            space.vectors().map(|v| w.op(space.index(a.apply(&f, v))).clone()).collect(),
        )?
        .rescaled(&pa)?;
        svn_intertwiner(w, &wa, seed)?;
        phases.push(pa);
    }
    let l = m.modulus() as usize;
    let n = space.size();
    let index_of = |x: &LinearMap2| group.iter().position(|g| g == x).expect("closed");
    let image: Vec<Vec<usize>> =
        group.iter().map(|a| (0..n).map(|v| space.index(a.apply(&f, space.vector(v)))).collect()).collect();
    let products: Vec<Vec<usize>> =
        group.iter().map(|a| group.iter().map(|b| index_of(&a.compose(&f, b))).collect()).collect();

    let defects = |corr: &[Vec<usize>]| -> Vec<(usize, usize, usize)> {
        let val = |g: usize, v: usize| (phases[g].get(v) as usize + corr[g][v]) % l;
        let mut out = Vec::new();
        for (i, row) in products.iter().enumerate() {
            for (j, &ab) in row.iter().enumerate() {
                let count = (0..n)
                    .filter(|&v| !(val(ab, v) + 2 * l - val(i, image[j][v]) - val(j, v)).is_multiple_of(l))
                    .count();
                if count > 0 {
                    out.push((i, j, count));
                }
            }
        }
        out
    };
    let zero = vec![vec![0usize; n]; group.len()];
    let defective_pairs = defects(&zero);

    let corrected_defect_free = if q == 2 {
        let s = w.form();
        let chars: Vec<Vec<usize>> = space
            .vectors()
            .map(|c| space.vectors().map(|v| bicharacter_exp(&space, &s, c, v) as usize).collect())
            .collect();
        let k = chars.len();
        let total = k.pow(group.len() as u32);
        let found = (0..total).any(|code| {
            let mut c = code;
            let corr: Vec<Vec<usize>> = (0..group.len())
                .map(|_| {
                    let pick = c % k;
                    c /= k;
                    chars[pick].clone()
                })
                .collect();
            defects(&corr).is_empty()
        });
        Some(found)
    } else {
        None
    };

    Ok(ProbeReport {
        group_order: group.len(),
        defect_free: defective_pairs.is_empty(),
        defective_pairs,
        corrected_defect_free,
        informational: f.characteristic() == 2 && f.degree() > 1,
    })
}
