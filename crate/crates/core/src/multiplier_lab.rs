//! Multipliers of V = F² as exact phase tables.
//!
//! A phase is an integer `k` mod `L` standing for `exp(2πi k / L)`, where
//! `L = p` for odd characteristic and `L = 4` for p = 2. Products of Weyl
//! operators follow `W(u) W(v) = conj(m(u, v)) W(u + v)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_field::{FieldDescriptor, FieldElement, FieldError, FieldSpec};
use crate::phase_space::{GeometryError, LinearMap2, PhaseSpace, PhaseVector, SymplecticForm};

/// Largest field order for which full multiplier tables are built.
pub const MAX_TABLE_ORDER: usize = 16;
/// Largest field order for which all Weyl multipliers are enumerated.
pub const MAX_ENUMERATION_ORDER: usize = 7;
/// Largest field order for which the cocycle identity is checked on every triple.
pub const EXHAUSTIVE_COCYCLE_ORDER: usize = 5;
const SAMPLED_TRIPLES: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultiplierError {
    #[error("cocycle identity fails at ({0:?}, {1:?}, {2:?})")]
    NotACocycle(PhaseVector, PhaseVector, PhaseVector),
    #[error("construction requires odd characteristic")]
    EvenCharacteristic,
    #[error("construction requires characteristic 2")]
    OddCharacteristic,
    #[error("field of order {q} exceeds the limit {max} for this operation")]
    FieldTooLarge { q: usize, max: usize },
    #[error("multipliers are not equivalent")]
    NotEquivalent,
    #[error("table is not a Weyl multiplier for the given form")]
    NotAWeylMultiplier,
    #[error("map does not have determinant 1")]
    NonSymplecticElement,
    #[error("element list is not a maximal nonsplit torus")]
    NotATorus,
    #[error("tables live on different phase spaces")]
    SpaceMismatch,
    #[error("malformed table: {0}")]
    BadTable(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The phase modulus `L` for characteristic `p`.
pub fn phase_modulus(p: u32) -> u32 {
    if p == 2 {
        4
    } else {
        p
    }
}

/// Exponent of `b_S(u, v)` in units of `2π / L`.
pub fn bicharacter_exp(space: &PhaseSpace, s: &SymplecticForm, u: PhaseVector, v: PhaseVector) -> u32 {
    let p = space.field().characteristic();
    space.bicharacter(s, u, v) * (phase_modulus(p) / p)
}

fn check_order(q: usize, max: usize) -> Result<(), MultiplierError> {
    if q > max {
        Err(MultiplierError::FieldTooLarge { q, max })
    } else {
        Ok(())
    }
}

/// A map `V × V → μ_L` stored row-major over vector indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiplierTable {
    space: PhaseSpace,
    l: u32,
    table: Vec<u8>,
}

/// A map `V → μ_L`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PhaseFunction {
    space: PhaseSpace,
    l: u32,
    values: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplierJson {
    pub field: FieldDescriptor,
    #[serde(rename = "L")]
    pub l: u32,
    pub table: Vec<Vec<u32>>,
}

impl MultiplierTable {
    /// Builds a table from an exponent function on vector indices.
    pub fn from_fn(space: &PhaseSpace, mut f: impl FnMut(usize, usize) -> u32) -> Result<Self, MultiplierError> {
        check_order(space.q(), MAX_TABLE_ORDER)?;
        let l = phase_modulus(space.field().characteristic());
        let n = space.size();
        let mut table = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                table.push((f(u, v) % l) as u8);
            }
        }
        Ok(MultiplierTable { space: space.clone(), l, table })
    }

    pub fn trivial(space: &PhaseSpace) -> Result<Self, MultiplierError> {
        Self::from_fn(space, |_, _| 0)
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn modulus(&self) -> u32 {
        self.l
    }

    /// Exponent of `m(u, v)` by vector index.
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.table[u * self.space.size() + v] as u32
    }

    pub fn at(&self, u: PhaseVector, v: PhaseVector) -> u32 {
        self.get(self.space.index(u), self.space.index(v))
    }

    pub fn raw(&self) -> &[u8] {
        &self.table
    }

    /// Sets one entry; used to build perturbed tables.
    pub fn set(&mut self, u: usize, v: usize, value: u32) {
        let n = self.space.size();
        self.table[u * n + v] = (value % self.l) as u8;
    }

    pub fn conj(&self) -> Self {
        let l = self.l;
        MultiplierTable { table: self.table.iter().map(|&x| ((l - x as u32) % l) as u8).collect(), ..self.clone() }
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self, MultiplierError> {
        if self.space != other.space {
            return Err(MultiplierError::SpaceMismatch);
        }
        let l = self.l;
        Ok(MultiplierTable {
            table: self.table.iter().zip(&other.table).map(|(&a, &b)| ((a as u32 + b as u32) % l) as u8).collect(),
            ..self.clone()
        })
    }

    /// `(δa · m)(u, v) = conj(a(u) a(v)) a(u + v) m(u, v)`.
    pub fn twisted(&self, a: &PhaseFunction) -> Result<Self, MultiplierError> {
        self.product(&a.coboundary()?)
    }

    pub fn to_json(&self) -> MultiplierJson {
        let n = self.space.size();
        MultiplierJson {
            field: self.space.field().descriptor(),
            l: self.l,
            table: (0..n).map(|u| (0..n).map(|v| self.get(u, v)).collect()).collect(),
        }
    }

    pub fn from_json(j: &MultiplierJson) -> Result<Self, MultiplierError> {
        let field = FieldSpec::from_descriptor(&j.field)?;
        Self::from_json_on(&PhaseSpace::new(&field), j)
    }

    pub fn from_json_on(space: &PhaseSpace, j: &MultiplierJson) -> Result<Self, MultiplierError> {
        let field = FieldSpec::from_descriptor(&j.field)?;
        if &field != space.field() {
            return Err(MultiplierError::SpaceMismatch);
        }
        let l = phase_modulus(field.characteristic());
        if j.l != l {
            return Err(MultiplierError::BadTable(format!("L must be {l}, found {}", j.l)));
        }
        let n = space.size();
        if j.table.len() != n || j.table.iter().any(|row| row.len() != n) {
            return Err(MultiplierError::BadTable(format!("table must be {n}x{n}")));
        }
        if j.table.iter().flatten().any(|&x| x >= l) {
            return Err(MultiplierError::BadTable(format!("entries must lie in 0..{l}")));
        }
        Self::from_fn(space, |u, v| j.table[u][v])
    }
}

impl PhaseFunction {
    pub fn from_fn(space: &PhaseSpace, mut f: impl FnMut(usize) -> u32) -> Self {
        let l = phase_modulus(space.field().characteristic());
        let values = (0..space.size()).map(|u| (f(u) % l) as u8).collect();
        PhaseFunction { space: space.clone(), l, values }
    }

    pub fn constant_one(space: &PhaseSpace) -> Self {
        Self::from_fn(space, |_| 0)
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn modulus(&self) -> u32 {
        self.l
    }

    pub fn get(&self, u: usize) -> u32 {
        self.values[u] as u32
    }

    pub fn at(&self, u: PhaseVector) -> u32 {
        self.get(self.space.index(u))
    }

    pub fn values(&self) -> Vec<u32> {
        self.values.iter().map(|&x| x as u32).collect()
    }

    /// `(δa)(u, v) = conj(a(u) a(v)) a(u + v)`.
    pub fn coboundary(&self) -> Result<MultiplierTable, MultiplierError> {
        let add = self.space.addition_table();
        let n = self.space.size();
        let l = self.l;
        MultiplierTable::from_fn(&self.space, |u, v| {
            2 * l + self.get(add[u * n + v] as usize) - self.get(u) - self.get(v)
        })
    }

    /// Whether the restriction to every direction is a character.
    pub fn is_character_on_directions(&self) -> bool {
        let s = &self.space;
        let l = self.l;
        s.directions().iter().all(|d| {
            let pts = s.direction_points(d);
            pts.iter().all(|&x| pts.iter().all(|&y| (self.at(x) + self.at(y)) % l == self.at(s.add(x, y))))
        })
    }
}

/// First triple violating `m(g1+g2, g3) m(g1, g2) = m(g1, g2+g3) m(g2, g3)`.
///
/// Exhaustive for q ≤ 5; beyond that a fixed-seed sample of triples.
pub fn cocycle_violation(t: &MultiplierTable) -> Option<(PhaseVector, PhaseVector, PhaseVector)> {
    let s = &t.space;
    let n = s.size();
    let l = t.l;
    let add = s.addition_table();
    let fails = |a: usize, b: usize, c: usize| {
        let lhs = t.get(add[a * n + b] as usize, c) + t.get(a, b);
        let rhs = t.get(a, add[b * n + c] as usize) + t.get(b, c);
        lhs % l != rhs % l
    };
    let witness = |a, b, c| Some((s.vector(a), s.vector(b), s.vector(c)));
    if s.q() <= EXHAUSTIVE_COCYCLE_ORDER {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if fails(a, b, c) {
                        return witness(a, b, c);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d75_626b);
        for _ in 0..SAMPLED_TRIPLES {
            let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            if fails(a, b, c) {
                return witness(a, b, c);
            }
        }
    }
    None
}

pub fn is_multiplier(t: &MultiplierTable) -> bool {
    cocycle_violation(t).is_none()
}

/// Checks triviality on every direction and `conj(m(u,v)) m(v,u) = b_S(u,v)`.
pub fn is_weyl_multiplier(t: &MultiplierTable, s: &SymplecticForm) -> Result<bool, MultiplierError> {
    if let Some((a, b, c)) = cocycle_violation(t) {
        return Err(MultiplierError::NotACocycle(a, b, c));
    }
    Ok(satisfies_weyl_conditions(t, s))
}

fn satisfies_weyl_conditions(t: &MultiplierTable, s: &SymplecticForm) -> bool {
    let sp = &t.space;
    let l = t.l;
    let trivial_on_directions = sp.directions().iter().all(|d| {
        let pts = sp.direction_points(d);
        pts.iter().all(|&x| pts.iter().all(|&y| t.at(x, y) == 0))
    });
    trivial_on_directions
        && sp.vectors().all(|u| sp.vectors().all(|v| (l + t.at(v, u) - t.at(u, v)) % l == bicharacter_exp(sp, s, u, v)))
}

/// The form `S` for which `t` is a Weyl multiplier.
pub fn weyl_form_of(t: &MultiplierTable) -> Result<SymplecticForm, MultiplierError> {
    if let Some((a, b, c)) = cocycle_violation(t) {
        return Err(MultiplierError::NotACocycle(a, b, c));
    }
    SymplecticForm::all(t.space.field())
        .into_iter()
        .find(|s| satisfies_weyl_conditions(t, s))
        .ok_or(MultiplierError::NotAWeylMultiplier)
}

/// Coordinates of `u` in the symplectic basis `e1 = (1, 0)`, `e2 = (0, λ⁻¹)`.
fn symplectic_coords(space: &PhaseSpace, s: &SymplecticForm, u: PhaseVector) -> (FieldElement, FieldElement) {
    (u.x1, space.field().mul(s.lambda(), u.x2))
}

/// `m0(α1 e1 + α2 e2, β1 e1 + β2 e2) = exp(2πi Tr(β1 α2) / p)`.
pub fn canonical_m0(space: &PhaseSpace, s: &SymplecticForm) -> Result<MultiplierTable, MultiplierError> {
    let f = space.field();
    let scale = phase_modulus(f.characteristic()) / f.characteristic();
    MultiplierTable::from_fn(space, |u, v| {
        let (_, a2) = symplectic_coords(space, s, space.vector(u));
        let (b1, _) = symplectic_coords(space, s, space.vector(v));
        f.trace(f.mul(b1, a2)) * scale
    })
}

/// `m_inv(u, v) = b_S(2⁻¹ v, u)`, odd characteristic only.
pub fn m_inv(space: &PhaseSpace, s: &SymplecticForm) -> Result<MultiplierTable, MultiplierError> {
    let f = space.field();
    if f.characteristic() == 2 {
        return Err(MultiplierError::EvenCharacteristic);
    }
    let half = f.inv(f.from_int(2))?;
    MultiplierTable::from_fn(space, |u, v| {
        let hv = space.scale(half, space.vector(v));
        space.bicharacter(s, hv, space.vector(u))
    })
}

/// Exponent (mod 4) of `c_α(γ) = Π i^{z_i²}` where `z_i` are the
/// coordinates of γ in the self-dual basis for α.
pub fn c_alpha(field: &FieldSpec, alpha: FieldElement, gamma: FieldElement) -> Result<u32, MultiplierError> {
    let basis = field.self_dual_basis(alpha)?;
    Ok(c_alpha_in(field, alpha, &basis, gamma))
}

fn c_alpha_in(field: &FieldSpec, alpha: FieldElement, basis: &[FieldElement], gamma: FieldElement) -> u32 {
    field.coordinates_in_dual_basis(gamma, basis, alpha).iter().sum::<u32>() % 4
}

/// The phase function `a` of the characteristic-2 construction: `c_α(γ)` on
/// `γ (e1 + α e2)` and 1 on the two axes.
pub fn appendix_b_phase(space: &PhaseSpace, s: &SymplecticForm) -> Result<PhaseFunction, MultiplierError> {
    let f = space.field();
    if f.characteristic() != 2 {
        return Err(MultiplierError::OddCharacteristic);
    }
    let bases: Vec<Vec<FieldElement>> = f
        .elements()
        .map(|a| if a.is_zero() { Ok(Vec::new()) } else { f.self_dual_basis(a) })
        .collect::<Result<_, _>>()?;
    Ok(PhaseFunction::from_fn(space, |u| {
        let (gamma, a2) = symplectic_coords(space, s, space.vector(u));
        if gamma.is_zero() || a2.is_zero() {
            0
        } else {
            let alpha = f.div(a2, gamma).expect("gamma is nonzero");
            c_alpha_in(f, alpha, &bases[alpha.index()], gamma)
        }
    }))
}

/// `m = conj(a(u) a(v)) a(u + v) m0(u, v)` in characteristic 2.
pub fn appendix_b_multiplier(space: &PhaseSpace, s: &SymplecticForm) -> Result<MultiplierTable, MultiplierError> {
    let a = appendix_b_phase(space, s)?;
    canonical_m0(space, s)?.twisted(&a)
}

/// The Weyl multiplier used as the starting point of enumeration.
pub fn base_weyl_multiplier(space: &PhaseSpace, s: &SymplecticForm) -> Result<MultiplierTable, MultiplierError> {
    if space.field().characteristic() == 2 {
        appendix_b_multiplier(space, s)
    } else {
        m_inv(space, s)
    }
}

/// Number of Weyl multipliers for a field of order q: `q^(q-1)`.
pub fn weyl_multiplier_count(q: usize) -> u128 {
    (q as u128).pow(q as u32 - 1)
}

/// Phase function `a(t d_D) = exp(2πi Tr(β_D t) / p)` for one coefficient
/// `β_D` per direction.
pub fn direction_character_phase(space: &PhaseSpace, betas: &[FieldElement]) -> PhaseFunction {
    let f = space.field();
    let scale = phase_modulus(f.characteristic()) / f.characteristic();
    PhaseFunction::from_fn(space, |u| {
        let v = space.vector(u);
        if v.is_zero() {
            return 0;
        }
        let d = space.direction_index_of(v).expect("nonzero");
        let rep = space.direction(d).rep();
        let t = if rep.x1.is_zero() { v.x2 } else { v.x1 };
        f.trace(f.mul(betas[d], t)) * scale
    })
}

/// All `q^(q-1)` Weyl multipliers for `(V, S)`.
///
/// Each table is `δa · m_base` where `a` restricts to a character on every
/// direction. Characters of V are quotiented out by fixing `a` to 1 on the
/// directions `F(1, 0)` and `F(0, 1)`; this is the lexicographically smallest
/// phase function in its class. Tables are listed in lexicographic order of
/// the remaining direction coefficients.
pub fn enumerate_weyl_multipliers(
    space: &PhaseSpace,
    s: &SymplecticForm,
) -> Result<Vec<MultiplierTable>, MultiplierError> {
    let q = space.q();
    check_order(q, MAX_ENUMERATION_ORDER)?;
    let base = base_weyl_multiplier(space, s)?;
    let f = space.field();
    let free = q - 1;
    let total = q.pow(free as u32);
    let mut out = Vec::with_capacity(total);
    let mut betas = vec![f.zero(); q + 1];
    for code in 0..total {
        let mut c = code;
        for k in (0..free).rev() {
            betas[1 + k] = f.from_index(c % q)?;
            c /= q;
        }
        out.push(base.twisted(&direction_character_phase(space, &betas))?);
    }
    Ok(out)
}

/// Phase function `a` with `m2 = δa · m1`, both Weyl multipliers for one form.
pub fn intertwiner(m1: &MultiplierTable, m2: &MultiplierTable) -> Result<PhaseFunction, MultiplierError> {
    let a = intertwine_cocycles(m1, m2)?;
    if !a.is_character_on_directions() {
        return Err(MultiplierError::NotEquivalent);
    }
    Ok(a)
}

/// Solves `m2 = δa · m1` for arbitrary multipliers.
///
/// `a` is built by telescoping over the Z_p-generators `(p^i, 0)` and
/// `(0, p^i)` of V and then checked on every pair.
pub fn intertwine_cocycles(m1: &MultiplierTable, m2: &MultiplierTable) -> Result<PhaseFunction, MultiplierError> {
    let space = m1.space.clone();
    if space != m2.space {
        return Err(MultiplierError::SpaceMismatch);
    }
    let f = space.field();
    let p = f.characteristic() as usize;
    let l = m1.l as usize;
    let n = space.size();
    let add = space.addition_table();
    let diff = m1.conj().product(m2)?;
    let nd = |u: usize, v: usize| diff.get(u, v) as usize;

    let mut gens = Vec::new();
    let mut pw = 1usize;
    for _ in 0..f.degree() {
        let e = f.from_index(pw)?;
        gens.push(space.index(PhaseVector::new(e, f.zero())));
        gens.push(space.index(PhaseVector::new(f.zero(), e)));
        pw *= p;
    }

    let mut value: Vec<Option<usize>> = vec![None; n];
    value[0] = Some(0);
    let mut span = vec![0usize];
    for &g in &gens {
        // a(g) = x must satisfy p x + Σ_j n(jg, g) ≡ 0 (mod L).
        let mut s = 0usize;
        let mut jg = 0usize;
        for _ in 0..p {
            s += nd(jg, g);
            jg = add[jg * n + g] as usize;
        }
        let x = (0..l).find(|&x| (p * x + s).is_multiple_of(l));
        let x = x.ok_or(MultiplierError::NotEquivalent)?;
        let mut multiples = vec![(0usize, 0usize)];
        let mut cur = (g, x);
        for _ in 1..p {
            multiples.push(cur);
            let next = add[cur.0 * n + g] as usize;
            cur = (next, (cur.1 + x + nd(cur.0, g)) % l);
        }
        let mut new_span = Vec::with_capacity(span.len() * p);
        for &h in &span {
            let ah = value[h].expect("assigned");
            for &(kg, akg) in &multiples {
                let w = add[h * n + kg] as usize;
                if value[w].is_none() {
                    value[w] = Some((ah + akg + nd(h, kg)) % l);
                }
                new_span.push(w);
            }
        }
        span = new_span;
    }
    let a = PhaseFunction::from_fn(&space, |u| value[u].expect("generators span V") as u32);
    if &m1.twisted(&a)? != m2 {
        return Err(MultiplierError::NotEquivalent);
    }
    Ok(a)
}

/// `m_A(u, v) = m(A u, A v)`.
pub fn pullback(m: &MultiplierTable, a: &LinearMap2) -> Result<MultiplierTable, MultiplierError> {
    let space = &m.space;
    let f = space.field();
    if !a.is_invertible(f) {
        return Err(GeometryError::SingularMap.into());
    }
    let image: Vec<usize> = space.vectors().map(|v| space.index(a.apply(f, v))).collect();
    MultiplierTable::from_fn(space, |u, v| m.get(image[u], image[v]))
}

/// Weyl multipliers fixed by every element of `g0`.
pub fn invariant_multipliers(
    space: &PhaseSpace,
    s: &SymplecticForm,
    g0: &[LinearMap2],
) -> Result<Vec<MultiplierTable>, MultiplierError> {
    let f = space.field();
    if g0.iter().any(|a| a.det(f) != f.one()) {
        return Err(MultiplierError::NonSymplecticElement);
    }
    let all = enumerate_weyl_multipliers(space, s)?;
    let mut out = Vec::new();
    for m in all {
        let mut fixed = true;
        for a in g0 {
            if pullback(&m, a)? != m {
                fixed = false;
                break;
            }
        }
        if fixed {
            out.push(m);
        }
    }
    Ok(out)
}

fn is_maximal_nonsplit_torus(f: &FieldSpec, t: &[LinearMap2]) -> bool {
    let id = LinearMap2::identity();
    t.len() == f.order() + 1
        && t.contains(&id)
        && t.iter().all(|a| a.det(f) == f.one())
        && t.iter().filter(|a| **a != id).all(|a| !a.char_poly_has_root(f))
        && t.iter().all(|a| t.iter().all(|b| t.contains(&a.compose(f, b))))
}

/// `Π_{A ∈ T} m(A ·, A ·)` for a maximal nonsplit torus T in characteristic 2.
pub fn torus_average(m: &MultiplierTable, t: &[LinearMap2]) -> Result<MultiplierTable, MultiplierError> {
    let f = m.space.field();
    if f.characteristic() != 2 {
        return Err(MultiplierError::OddCharacteristic);
    }
    if !is_maximal_nonsplit_torus(f, t) {
        return Err(MultiplierError::NotATorus);
    }
    let mut acc = MultiplierTable::trivial(&m.space)?;
    for a in t {
        acc = acc.product(&pullback(m, a)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u32, r: u32) -> PhaseSpace {
        PhaseSpace::new(&FieldSpec::new(p, r, None).unwrap())
    }

    fn std_form() -> SymplecticForm {
        SymplecticForm::standard()
    }

    #[test]
    fn trivial_table_is_multiplier_but_not_weyl() {
        let s = space(3, 1);
        let t = MultiplierTable::trivial(&s).unwrap();
        assert!(is_multiplier(&t));
        assert_eq!(is_weyl_multiplier(&t, &std_form()), Ok(false));
    }

    #[test]
    fn m0_values_and_condition_ii() {
        for p in [2, 3, 5] {
            let s = space(p, 1);
            let m0 = canonical_m0(&s, &std_form()).unwrap();
            let l = phase_modulus(p);
            assert!(is_multiplier(&m0));
            assert_eq!(m0.at(s.e1(), s.e2()), 0);
            assert_eq!(m0.at(s.e2(), s.e1()), l / p);
            for u in s.vectors() {
                for v in s.vectors() {
                    let anti = (l + m0.at(v, u) - m0.at(u, v)) % l;
                    assert_eq!(anti, bicharacter_exp(&s, &std_form(), u, v));
                }
            }
        }
    }

    #[test]
    fn perturbed_table_reports_witness() {
        let s = space(3, 1);
        let mut t = canonical_m0(&s, &std_form()).unwrap();
        t.set(4, 5, t.get(4, 5) + 1);
        let w = cocycle_violation(&t).expect("perturbation breaks the identity");
        assert!(matches!(is_weyl_multiplier(&t, &std_form()), Err(MultiplierError::NotACocycle(..))));
        let (a, b, c) = w;
        let (ai, bi, ci) = (s.index(a), s.index(b), s.index(c));
        let lhs = t.get(s.add_idx(ai, bi), ci) + t.get(ai, bi);
        let rhs = t.get(ai, s.add_idx(bi, ci)) + t.get(bi, ci);
        assert_ne!(lhs % 3, rhs % 3);
    }

    #[test]
    fn m_inv_is_invariant_weyl_multiplier() {
        let s = space(3, 1);
        let f = s.field().clone();
        let m = m_inv(&s, &std_form()).unwrap();
        assert_eq!(is_weyl_multiplier(&m, &std_form()), Ok(true));
        for v in s.vectors() {
            assert_eq!(m.at(v, v), 0);
        }
        for a in s.maps_with_det(f.one()) {
            assert_eq!(pullback(&m, &a).unwrap(), m);
        }
        assert_eq!(m_inv(&space(2, 1), &std_form()), Err(MultiplierError::EvenCharacteristic));
    }

    #[test]
    fn appendix_b_multiplier_is_weyl() {
        for (r, lambda) in [(1, 1), (2, 1), (2, 2), (3, 5)] {
            let s = space(2, r);
            let form = SymplecticForm::new(s.field().from_index(lambda).unwrap()).unwrap();
            let m = appendix_b_multiplier(&s, &form).unwrap();
            assert_eq!(is_weyl_multiplier(&m, &form), Ok(true), "GF(2^{r}), λ index {lambda}");
        }
        assert_eq!(appendix_b_multiplier(&space(3, 1), &std_form()), Err(MultiplierError::OddCharacteristic));
    }

    #[test]
    fn c_alpha_identity_on_gf4() {
        let f = FieldSpec::new(2, 2, None).unwrap();
        for alpha in f.units() {
            assert_eq!(c_alpha(&f, alpha, f.zero()).unwrap(), 0);
            for g in f.elements() {
                for d in f.elements() {
                    let lhs = c_alpha(&f, alpha, f.add(g, d)).unwrap();
                    let sign = 2 * f.trace(f.mul(alpha, f.mul(g, d)));
                    let rhs = c_alpha(&f, alpha, g).unwrap() + c_alpha(&f, alpha, d).unwrap() + sign;
                    assert_eq!(lhs, rhs % 4);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        for (p, r, count) in [(2, 1, 2), (3, 1, 9), (2, 2, 64)] {
            let s = space(p, r);
            let all = enumerate_weyl_multipliers(&s, &std_form()).unwrap();
            assert_eq!(all.len(), count);
            let distinct: std::collections::HashSet<&[u8]> = all.iter().map(|m| m.raw()).collect();
            assert_eq!(distinct.len(), count);
        }
        assert!(matches!(
            enumerate_weyl_multipliers(&space(2, 3), &std_form()),
            Err(MultiplierError::FieldTooLarge { q: 8, .. })
        ));
    }

    #[test]
    fn intertwiners_between_all_gf3_pairs() {
        let s = space(3, 1);
        let all = enumerate_weyl_multipliers(&s, &std_form()).unwrap();
        for m1 in &all {
            assert_eq!(intertwiner(m1, m1).unwrap(), PhaseFunction::constant_one(&s));
            for m2 in &all {
                let a = intertwiner(m1, m2).unwrap();
                assert_eq!(a.get(0), 0);
                assert_eq!(&m1.twisted(&a).unwrap(), m2);
            }
        }
    }

    #[test]
    fn qubit_conjugate_intertwiner() {
        let s = space(2, 1);
        let m = appendix_b_multiplier(&s, &std_form()).unwrap();
        let a = intertwiner(&m, &m.conj()).unwrap();
        assert_eq!(m.twisted(&a).unwrap(), m.conj());
        let e12 = s.add(s.e1(), s.e2());
        assert_eq!(a.at(e12) % 2, 0, "the intertwining phase at e1+e2 is real");
    }

    #[test]
    fn inequivalent_forms_refused() {
        let s = space(3, 1);
        let m1 = m_inv(&s, &std_form()).unwrap();
        let m2 = m_inv(&s, &SymplecticForm::new(s.field().from_int(2)).unwrap()).unwrap();
        assert_eq!(intertwiner(&m1, &m2), Err(MultiplierError::NotEquivalent));
    }

    #[test]
    fn pullback_scales_form() {
        let s = space(3, 1);
        let f = s.field().clone();
        let m = m_inv(&s, &std_form()).unwrap();
        let a = LinearMap2::diag(f.one(), f.from_int(2));
        let pulled = pullback(&m, &a).unwrap();
        let scaled = SymplecticForm::new(f.from_int(2)).unwrap();
        assert_eq!(is_weyl_multiplier(&pulled, &scaled), Ok(true));
        assert_eq!(pullback(&m, &LinearMap2::identity()).unwrap(), m);
        let singular = LinearMap2::diag(f.one(), f.zero());
        assert!(pullback(&m, &singular).is_err());
    }

    #[test]
    fn invariant_multiplier_dichotomy() {
        let s3 = space(3, 1);
        let sl3 = s3.maps_with_det(s3.field().one());
        let inv = invariant_multipliers(&s3, &std_form(), &sl3).unwrap();
        assert_eq!(inv, vec![m_inv(&s3, &std_form()).unwrap()]);
        let s2 = space(2, 1);
        let sl2 = s2.maps_with_det(s2.field().one());
        assert!(invariant_multipliers(&s2, &std_form(), &sl2).unwrap().is_empty());
        let all = invariant_multipliers(&s2, &std_form(), &[LinearMap2::identity()]).unwrap();
        assert_eq!(all.len(), 2);
        let f = s3.field();
        let bad = [LinearMap2::diag(f.one(), f.from_int(2))];
        assert_eq!(invariant_multipliers(&s3, &std_form(), &bad), Err(MultiplierError::NonSymplecticElement));
    }

    #[test]
    fn torus_average_qubit() {
        let s = space(2, 1);
        let f = s.field().clone();
        let r = LinearMap2::new(f.one(), f.one(), f.one(), f.zero());
        let torus = vec![LinearMap2::identity(), r, r.compose(&f, &r)];
        for m in enumerate_weyl_multipliers(&s, &std_form()).unwrap() {
            let avg = torus_average(&m, &torus).unwrap();
            assert_eq!(is_weyl_multiplier(&avg, &std_form()), Ok(true));
            assert_eq!(pullback(&avg, &r).unwrap(), avg);
        }
        let m = appendix_b_multiplier(&s, &std_form()).unwrap();
        assert_eq!(torus_average(&m, &torus[..2]), Err(MultiplierError::NotATorus));
    }

    #[test]
    fn json_roundtrip() {
        let s = space(2, 2);
        let m = appendix_b_multiplier(&s, &std_form()).unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        assert!(text.contains("\"L\":4"));
        let back: MultiplierJson = serde_json::from_str(&text).unwrap();
        assert_eq!(MultiplierTable::from_json(&back).unwrap(), m);
        let mut bad = back.clone();
        bad.table[0][0] = 7;
        assert!(MultiplierTable::from_json(&bad).is_err());
    }
}
