//! Weyl systems as explicit q × q unitary matrices on ℓ²(F).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_field::{FieldDescriptor, FieldSpec};
use crate::multiplier_lab::{
    canonical_m0, intertwine_cocycles, phase_modulus, weyl_form_of, MultiplierError, MultiplierJson, MultiplierTable,
    PhaseFunction,
};
use crate::phase_space::{PhaseSpace, SymplecticForm};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for matrix identities.
pub const TOL_IDENTITY: f64 = 1e-9;
/// Tolerance for rounding a scalar to an exact root of unity.
pub const TOL_PHASE: f64 = 1e-6;
/// Default seed for randomized fallbacks.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error("operators are not projectively multiplicative (residual {0:.3e})")]
    NotProjective(f64),
    #[error("operator family has inconsistent dimensions")]
    InconsistentDimension,
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("systems have different multipliers")]
    MultiplierMismatch,
    #[error("every seed produced a vanishing average")]
    DegenerateSeed,
    #[error("intertwiner check failed (residual {0:.3e})")]
    IntertwinerFailed(f64),
    #[error("malformed matrix data: {0}")]
    BadMatrix(String),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
}

/// `exp(2πi k / l)`, exact on quarter turns.
pub fn root_of_unity(k: u32, l: u32) -> Complex64 {
    let k = k % l;
    if (4 * k).is_multiple_of(l) {
        match 4 * k / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / l as f64)
    }
}

/// Rounds `z` to the nearest `L`-th root of unity; returns the exponent and
/// the distance.
pub fn round_to_root(z: Complex64, l: u32) -> (u32, f64) {
    let turns = z.arg() / (2.0 * PI) * l as f64;
    let k = (turns.round() as i64).rem_euclid(l as i64) as u32;
    (k, (z - root_of_unity(k, l)).norm())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    max_abs(&(a - b))
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs_diff(&(m * m.adjoint()), &CMatrix::identity(d, d))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Rescales so that the first entry (row-major) of modulus above `1e-9` is
/// real and positive.
pub fn normalize_global_phase(m: &CMatrix) -> CMatrix {
    let d = m.ncols();
    let first = (0..m.len()).map(|k| m[(k / d, k % d)]).find(|z| z.norm() > 1e-9);
    match first {
        Some(z) => m * (z.conj() / z.norm()),
        None => m.clone(),
    }
}

/// Haar-random unitary from QR of a complex Gaussian matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// A projective representation of V with a Weyl multiplier.
#[derive(Clone, Debug)]
pub struct WeylSystem {
    space: PhaseSpace,
    form: SymplecticForm,
    ops: Vec<CMatrix>,
    multiplier: MultiplierTable,
}

impl WeylSystem {
    /// Wraps explicit operators, extracting and checking the multiplier.
    pub fn from_operators(space: &PhaseSpace, ops: Vec<CMatrix>) -> Result<Self, WeylError> {
        let multiplier = multiplier_of(space, &ops)?;
        let form = weyl_form_of(&multiplier)?;
        Ok(WeylSystem { space: space.clone(), form, ops, multiplier })
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn form(&self) -> SymplecticForm {
        self.form
    }

    pub fn multiplier(&self) -> &MultiplierTable {
        &self.multiplier
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `W(v)` by vector index.
    pub fn op(&self, v: usize) -> &CMatrix {
        &self.ops[v]
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `a(v) W(v)`; the multiplier becomes `δa · m`.
    pub fn rescaled(&self, a: &PhaseFunction) -> Result<Self, WeylError> {
        let l = a.modulus();
        let ops = self.ops.iter().enumerate().map(|(v, w)| w * root_of_unity(a.get(v), l)).collect();
        Ok(WeylSystem { ops, multiplier: self.multiplier.twisted(a)?, ..self.clone() })
    }

    /// `U W(v) U†`.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        let ud = u.adjoint();
        WeylSystem { ops: self.ops.iter().map(|w| u * w * &ud).collect(), ..self.clone() }
    }

    /// Largest deviation from `W(u) W(v) = conj(m(u,v)) W(u+v)`.
    pub fn product_residual(&self) -> f64 {
        let n = self.space.size();
        let add = self.space.addition_table();
        let l = self.multiplier.modulus();
        let mut worst: f64 = 0.0;
        for u in 0..n {
            for v in 0..n {
                let lhs = &self.ops[u] * &self.ops[v];
                let phase = root_of_unity(l - self.multiplier.get(u, v), l);
                let rhs = &self.ops[add[u * n + v] as usize] * phase;
                worst = worst.max(max_abs_diff(&lhs, &rhs));
            }
        }
        worst
    }

    pub fn to_json(&self) -> WeylSystemJson {
        let f = self.space.field();
        WeylSystemJson {
            field: f.descriptor(),
            lambda: f.coeffs(self.form.lambda()),
            multiplier: self.multiplier.to_json(),
            matrices: self.ops.iter().map(matrix_to_json).collect(),
        }
    }

    pub fn from_json(j: &WeylSystemJson) -> Result<Self, WeylError> {
        let field = FieldSpec::from_descriptor(&j.field).map_err(MultiplierError::from)?;
        let space = PhaseSpace::new(&field);
        let ops = j.matrices.iter().map(matrix_from_json).collect::<Result<Vec<_>, _>>()?;
        let w = WeylSystem::from_operators(&space, ops)?;
        let declared = MultiplierTable::from_json_on(&space, &j.multiplier)?;
        let lambda = field.element(&j.lambda).map_err(MultiplierError::from)?;
        if declared != w.multiplier || lambda != w.form.lambda() {
            return Err(WeylError::MultiplierMismatch);
        }
        Ok(w)
    }
}

/// Row-major `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(j: &MatrixJson) -> Result<CMatrix, WeylError> {
    let d = j.len();
    if d == 0 || j.iter().any(|row| row.len() != d) {
        return Err(WeylError::BadMatrix("matrix must be square and nonempty".into()));
    }
    Ok(CMatrix::from_fn(d, d, |r, c| Complex64::new(j[r][c][0], j[r][c][1])))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylSystemJson {
    pub field: FieldDescriptor,
    pub lambda: Vec<u32>,
    pub multiplier: MultiplierJson,
    pub matrices: Vec<MatrixJson>,
}

/// Shift `[X_α φ](x) = φ(x + α)` on ℓ²(F).
pub fn shift_operator(f: &FieldSpec, alpha: usize) -> CMatrix {
    let q = f.order();
    let a = f.from_index(alpha).expect("index in range");
    let mut m = CMatrix::zeros(q, q);
    for x in f.elements() {
        m[(x.index(), f.add(x, a).index())] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Modulation `[Z_β φ](x) = exp(2πi Tr(βx) / p) φ(x)` on ℓ²(F).
pub fn modulation_operator(f: &FieldSpec, beta: usize) -> CMatrix {
    let q = f.order();
    let p = f.characteristic();
    let b = f.from_index(beta).expect("index in range");
    let mut m = CMatrix::zeros(q, q);
    for x in f.elements() {
        m[(x.index(), x.index())] = root_of_unity(f.trace(f.mul(b, x)), p);
    }
    m
}

/// `W0(α1 e1 + α2 e2) = X_{α1} Z_{α2}` in the symplectic basis
/// `e1 = (1, 0)`, `e2 = (0, λ⁻¹)`; its multiplier is `canonical_m0`.
pub fn clock_shift_system(space: &PhaseSpace, s: &SymplecticForm) -> Result<WeylSystem, WeylError> {
    let f = space.field();
    let ops = space
        .vectors()
        .map(|u| {
            let a2 = f.mul(s.lambda(), u.x2);
            shift_operator(f, u.x1.index()) * modulation_operator(f, a2.index())
        })
        .collect();
    Ok(WeylSystem { space: space.clone(), form: *s, ops, multiplier: canonical_m0(space, s)? })
}

/// The irreducible Weyl system with multiplier exactly `m`.
pub fn weyl_system_from_multiplier(m: &MultiplierTable) -> Result<WeylSystem, WeylError> {
    let s = weyl_form_of(m)?;
    let base = clock_shift_system(m.space(), &s)?;
    let a = intertwine_cocycles(base.multiplier(), m)?;
    base.rescaled(&a)
}

/// Extracts `m` from `W(u) W(v) = conj(m(u,v)) W(u+v)`.
pub fn multiplier_of(space: &PhaseSpace, ops: &[CMatrix]) -> Result<MultiplierTable, WeylError> {
    multiplier_of_tol(space, ops, TOL_PHASE)
}

pub fn multiplier_of_tol(space: &PhaseSpace, ops: &[CMatrix], tol: f64) -> Result<MultiplierTable, WeylError> {
    let n = space.size();
    if ops.len() != n {
        return Err(WeylError::InconsistentDimension);
    }
    let d = ops[0].nrows();
    if ops.iter().any(|w| w.nrows() != d || w.ncols() != d) {
        return Err(WeylError::InconsistentDimension);
    }
    for w in ops {
        let r = unitarity_residual(w);
        if r > tol {
            return Err(WeylError::NotUnitary(r));
        }
    }
    let add = space.addition_table();
    let l = phase_modulus(space.field().characteristic());
    let mut table = vec![0u32; n * n];
    let mut worst: f64 = 0.0;
    for u in 0..n {
        for v in 0..n {
            let w = &ops[add[u * n + v] as usize];
            let prod = &ops[u] * &ops[v];
            let c = trace(&(w.adjoint() * &prod)) / d as f64;
            let (k, dist) = round_to_root(c.conj(), l);
            let fit = max_abs_diff(&prod, &(w * root_of_unity(l - k, l)));
            worst = worst.max(dist).max(fit);
            table[u * n + v] = k;
        }
    }
    if worst > tol {
        return Err(WeylError::NotProjective(worst));
    }
    Ok(MultiplierTable::from_fn(space, |u, v| table[u * n + v])?)
}

/// Exponents mod p of `conj(m(u,v)) m(v,u)`, row-major over vector indices.
pub fn commutation_bicharacter(space: &PhaseSpace, ops: &[CMatrix]) -> Result<Vec<u32>, WeylError> {
    let m = multiplier_of(space, ops)?;
    let l = m.modulus();
    let p = space.field().characteristic();
    let n = space.size();
    let mut out = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            let e = (l + m.get(v, u) - m.get(u, v)) % l;
            if e % (l / p) != 0 {
                return Err(WeylError::NotProjective(1.0));
            }
            out.push(e / (l / p));
        }
    }
    Ok(out)
}

/// Largest deviation from `W2(v) = U W1(v) U†`.
pub fn intertwining_residual(u: &CMatrix, w1: &WeylSystem, w2: &WeylSystem) -> f64 {
    let ud = u.adjoint();
    w1.ops.iter().zip(&w2.ops).map(|(a, b)| max_abs_diff(&(u * a * &ud), b)).fold(0.0, f64::max)
}

/// Unitary `U` with `W2(v) = U W1(v) U†`.
///
/// Averages `Σ_v W2(v) E W1(v)†` over the seeds `E = e_i e_j†` in row-major
/// order, then over pseudorandom seeds drawn from `seed`.
pub fn svn_intertwiner(w1: &WeylSystem, w2: &WeylSystem, seed: u64) -> Result<CMatrix, WeylError> {
    if w1.space != w2.space || w1.multiplier != w2.multiplier {
        return Err(WeylError::MultiplierMismatch);
    }
    let d = w1.dim();
    if w2.dim() != d {
        return Err(WeylError::InconsistentDimension);
    }
    let average = |e: &CMatrix| -> CMatrix {
        w1.ops.iter().zip(&w2.ops).map(|(a, b)| b * e * a.adjoint()).fold(CMatrix::zeros(d, d), |acc, x| acc + x)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let canonical = (0..d * d).map(|k| {
        let mut e = CMatrix::zeros(d, d);
        e[(k / d, k % d)] = Complex64::new(1.0, 0.0);
        e
    });
    let random: Vec<CMatrix> = (0..8).map(|_| random_unitary(d, &mut rng)).collect();
    for e in canonical.chain(random) {
        let u0 = average(&e);
        let norm2 = trace(&(u0.adjoint() * &u0)).re / d as f64;
        if norm2 < 1e-12 {
            continue;
        }
        let u = normalize_global_phase(&(u0 / Complex64::new(norm2.sqrt(), 0.0)));
        let r = unitarity_residual(&u).max(intertwining_residual(&u, w1, w2));
        if r > TOL_IDENTITY {
            return Err(WeylError::IntertwinerFailed(r));
        }
        return Ok(u);
    }
    Err(WeylError::DegenerateSeed)
}

/// Whether the operators span the full operator algebra.
pub fn is_irreducible(ops: &[CMatrix]) -> bool {
    let d = ops[0].nrows();
    if ops.len() < d * d {
        return false;
    }
    let gram = CMatrix::from_fn(ops.len(), ops.len(), |i, j| trace(&(ops[i].adjoint() * &ops[j])));
    let sv = gram.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-8 * top.max(1.0)).count() == d * d
}
