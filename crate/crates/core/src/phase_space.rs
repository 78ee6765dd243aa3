//! The affine plane over a finite field: vectors, directions, lines,
//! symplectic forms and the affine group action on lines.
//!
//! Vectors of V = F² are enumerated lexicographically: index
//! `x1 * q + x2`. Directions are ordered `F(1, α)` for α in field order,
//! then `F(0, 1)`. Lines are ordered by direction, then by canonical base
//! point, so line `dir * q + k` is the k-th line parallel to direction
//! `dir`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_field::{FieldElement, FieldError, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("linear map is singular")]
    SingularMap,
    #[error("symplectic scale must be nonzero")]
    ZeroForm,
    #[error("zero vector does not span a direction")]
    ZeroDirection,
    #[error("line encoding does not describe a line of this plane")]
    BadLine,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PhaseVector {
    pub x1: FieldElement,
    pub x2: FieldElement,
}

impl PhaseVector {
    pub const ZERO: PhaseVector = PhaseVector { x1: FieldElement::ZERO, x2: FieldElement::ZERO };

    pub fn new(x1: FieldElement, x2: FieldElement) -> Self {
        PhaseVector { x1, x2 }
    }

    pub fn is_zero(&self) -> bool {
        self.x1.is_zero() && self.x2.is_zero()
    }
}

/// A one-dimensional subspace, stored by its normalized spanning vector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Direction {
    rep: PhaseVector,
}

impl Direction {
    pub fn rep(&self) -> PhaseVector {
        self.rep
    }
}

/// The coset `base + D`; `base` is the smallest point of the coset.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineLine {
    pub direction: Direction,
    pub base: PhaseVector,
}

/// `S(u, v) = λ (u1 v2 - u2 v1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticForm {
    lambda: FieldElement,
}

impl SymplecticForm {
    pub fn new(lambda: FieldElement) -> Result<Self, GeometryError> {
        if lambda.is_zero() {
            Err(GeometryError::ZeroForm)
        } else {
            Ok(SymplecticForm { lambda })
        }
    }

    pub fn standard() -> Self {
        SymplecticForm { lambda: FieldElement::ONE }
    }

    pub fn lambda(&self) -> FieldElement {
        self.lambda
    }

    pub fn value(&self, f: &FieldSpec, u: PhaseVector, v: PhaseVector) -> FieldElement {
        let det = f.sub(f.mul(u.x1, v.x2), f.mul(u.x2, v.x1));
        f.mul(self.lambda, det)
    }

    /// The form `scale * S`.
    pub fn scaled(&self, f: &FieldSpec, scale: FieldElement) -> Result<Self, GeometryError> {
        Self::new(f.mul(self.lambda, scale))
    }

    /// All q - 1 symplectic forms on F².
    pub fn all(f: &FieldSpec) -> Vec<SymplecticForm> {
        f.units().map(|lambda| SymplecticForm { lambda }).collect()
    }
}

/// A 2x2 matrix over F acting on column vectors.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearMap2 {
    pub a11: FieldElement,
    pub a12: FieldElement,
    pub a21: FieldElement,
    pub a22: FieldElement,
}

impl LinearMap2 {
    pub fn new(a11: FieldElement, a12: FieldElement, a21: FieldElement, a22: FieldElement) -> Self {
        LinearMap2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
        LinearMap2::new(o, z, z, o)
    }

    pub fn diag(a: FieldElement, b: FieldElement) -> Self {
        LinearMap2::new(a, FieldElement::ZERO, FieldElement::ZERO, b)
    }

    pub fn det(&self, f: &FieldSpec) -> FieldElement {
        f.sub(f.mul(self.a11, self.a22), f.mul(self.a12, self.a21))
    }

    pub fn trace(&self, f: &FieldSpec) -> FieldElement {
        f.add(self.a11, self.a22)
    }

    pub fn is_invertible(&self, f: &FieldSpec) -> bool {
        !self.det(f).is_zero()
    }

    pub fn apply(&self, f: &FieldSpec, v: PhaseVector) -> PhaseVector {
        PhaseVector {
            x1: f.add(f.mul(self.a11, v.x1), f.mul(self.a12, v.x2)),
            x2: f.add(f.mul(self.a21, v.x1), f.mul(self.a22, v.x2)),
        }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, f: &FieldSpec, other: &LinearMap2) -> LinearMap2 {
        LinearMap2 {
            a11: f.add(f.mul(self.a11, other.a11), f.mul(self.a12, other.a21)),
            a12: f.add(f.mul(self.a11, other.a12), f.mul(self.a12, other.a22)),
            a21: f.add(f.mul(self.a21, other.a11), f.mul(self.a22, other.a21)),
            a22: f.add(f.mul(self.a21, other.a12), f.mul(self.a22, other.a22)),
        }
    }

    pub fn inverse(&self, f: &FieldSpec) -> Result<LinearMap2, GeometryError> {
        let d = self.det(f);
        let di = f.inv(d).map_err(|_| GeometryError::SingularMap)?;
        Ok(LinearMap2 {
            a11: f.mul(di, self.a22),
            a12: f.mul(di, f.neg(self.a12)),
            a21: f.mul(di, f.neg(self.a21)),
            a22: f.mul(di, self.a11),
        })
    }

    /// Whether `X² - tr(A) X + det(A)` has a root in F.
    pub fn char_poly_has_root(&self, f: &FieldSpec) -> bool {
        let (t, d) = (self.trace(f), self.det(f));
        f.elements().any(|x| f.add(f.sub(f.mul(x, x), f.mul(t, x)), d).is_zero())
    }

    pub fn minus_identity(&self, f: &FieldSpec) -> LinearMap2 {
        LinearMap2 { a11: f.sub(self.a11, f.one()), a22: f.sub(self.a22, f.one()), ..*self }
    }

    pub fn pow(&self, f: &FieldSpec, n: usize) -> LinearMap2 {
        (0..n).fold(LinearMap2::identity(), |acc, _| acc.compose(f, self))
    }

    /// Entries as coefficient vectors, row-major.
    pub fn to_coeffs(&self, f: &FieldSpec) -> [[Vec<u32>; 2]; 2] {
        [[f.coeffs(self.a11), f.coeffs(self.a12)], [f.coeffs(self.a21), f.coeffs(self.a22)]]
    }

    pub fn from_coeffs(f: &FieldSpec, c: &[[Vec<u32>; 2]; 2]) -> Result<Self, GeometryError> {
        Ok(LinearMap2 {
            a11: f.element(&c[0][0])?,
            a12: f.element(&c[0][1])?,
            a21: f.element(&c[1][0])?,
            a22: f.element(&c[1][1])?,
        })
    }
}

/// JSON line encoding: `{"dir":[a,b],"base":[c,d]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineJson {
    pub dir: [Vec<u32>; 2],
    pub base: [Vec<u32>; 2],
}

struct SpaceInner {
    field: FieldSpec,
    q: usize,
    directions: Vec<Direction>,
    lines: Vec<AffineLine>,
}

/// The plane Ω = V = F² with its directions and lines.
#[derive(Clone)]
pub struct PhaseSpace(Arc<SpaceInner>);

impl PartialEq for PhaseSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.field == other.0.field
    }
}

impl Eq for PhaseSpace {}

impl fmt::Debug for PhaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseSpace({:?})", self.0.field)
    }
}

impl PhaseSpace {
    pub fn new(field: &FieldSpec) -> Self {
        let q = field.order();
        let mut directions: Vec<Direction> =
            field.elements().map(|a| Direction { rep: PhaseVector::new(field.one(), a) }).collect();
        directions.push(Direction { rep: PhaseVector::new(field.zero(), field.one()) });
        let mut lines = Vec::with_capacity(q * (q + 1));
        for (d, dir) in directions.iter().enumerate() {
            for k in field.elements() {
                let base = if d < q { PhaseVector::new(field.zero(), k) } else { PhaseVector::new(k, field.zero()) };
                lines.push(AffineLine { direction: *dir, base });
            }
        }
        PhaseSpace(Arc::new(SpaceInner { field: field.clone(), q, directions, lines }))
    }

    pub fn field(&self) -> &FieldSpec {
        &self.0.field
    }

    /// q = |F|.
    pub fn q(&self) -> usize {
        self.0.q
    }

    /// |V| = q².
    pub fn size(&self) -> usize {
        self.0.q * self.0.q
    }

    pub fn index(&self, v: PhaseVector) -> usize {
        v.x1.index() * self.0.q + v.x2.index()
    }

    pub fn vector(&self, idx: usize) -> PhaseVector {
        let f = &self.0.field;
        PhaseVector::new(
            f.from_index(idx / self.0.q).expect("index in range"),
            f.from_index(idx % self.0.q).expect("index in range"),
        )
    }

    /// All vectors in enumeration order.
    pub fn vectors(&self) -> impl Iterator<Item = PhaseVector> + '_ {
        (0..self.size()).map(move |i| self.vector(i))
    }

    pub fn e1(&self) -> PhaseVector {
        PhaseVector::new(FieldElement::ONE, FieldElement::ZERO)
    }

    pub fn e2(&self) -> PhaseVector {
        PhaseVector::new(FieldElement::ZERO, FieldElement::ONE)
    }

    pub fn add(&self, u: PhaseVector, v: PhaseVector) -> PhaseVector {
        let f = &self.0.field;
        PhaseVector::new(f.add(u.x1, v.x1), f.add(u.x2, v.x2))
    }

    pub fn sub(&self, u: PhaseVector, v: PhaseVector) -> PhaseVector {
        self.add(u, self.neg(v))
    }

    pub fn neg(&self, v: PhaseVector) -> PhaseVector {
        let f = &self.0.field;
        PhaseVector::new(f.neg(v.x1), f.neg(v.x2))
    }

    pub fn scale(&self, a: FieldElement, v: PhaseVector) -> PhaseVector {
        let f = &self.0.field;
        PhaseVector::new(f.mul(a, v.x1), f.mul(a, v.x2))
    }

    pub fn add_idx(&self, u: usize, v: usize) -> usize {
        self.index(self.add(self.vector(u), self.vector(v)))
    }

    pub fn neg_idx(&self, u: usize) -> usize {
        self.index(self.neg(self.vector(u)))
    }

    /// Row-major `n × n` table of `u + v` on vector indices.
    pub fn addition_table(&self) -> Vec<u16> {
        let n = self.size();
        let vs: Vec<PhaseVector> = self.vectors().collect();
        let mut t = Vec::with_capacity(n * n);
        for u in &vs {
            for v in &vs {
                t.push(self.index(self.add(*u, *v)) as u16);
            }
        }
        t
    }

    pub fn directions(&self) -> &[Direction] {
        &self.0.directions
    }

    pub fn direction(&self, idx: usize) -> Direction {
        self.0.directions[idx]
    }

    /// The direction spanned by a nonzero vector.
    pub fn span(&self, v: PhaseVector) -> Result<Direction, GeometryError> {
        Ok(self.0.directions[self.direction_index_of(v)?])
    }

    /// Index of the direction `F v`.
    pub fn direction_index_of(&self, v: PhaseVector) -> Result<usize, GeometryError> {
        let f = &self.0.field;
        if v.is_zero() {
            Err(GeometryError::ZeroDirection)
        } else if v.x1.is_zero() {
            Ok(self.0.q)
        } else {
            Ok(f.div(v.x2, v.x1)?.index())
        }
    }

    pub fn direction_index(&self, d: &Direction) -> usize {
        self.direction_index_of(d.rep).expect("directions are nonzero")
    }

    /// The q points of a direction, in field order of the scalar.
    pub fn direction_points(&self, d: &Direction) -> Vec<PhaseVector> {
        self.0.field.elements().map(|a| self.scale(a, d.rep)).collect()
    }

    pub fn contains(&self, d: &Direction, v: PhaseVector) -> bool {
        v.is_zero() || self.direction_index_of(v).ok() == Some(self.direction_index(d))
    }

    pub fn lines(&self) -> &[AffineLine] {
        &self.0.lines
    }

    pub fn line(&self, idx: usize) -> AffineLine {
        self.0.lines[idx]
    }

    pub fn num_lines(&self) -> usize {
        self.0.lines.len()
    }

    /// Index of the line through `x` with direction index `dir`.
    pub fn line_index_through(&self, x: PhaseVector, dir: usize) -> usize {
        let f = &self.0.field;
        let q = self.0.q;
        let k = if dir < q {
            // Lines parallel to (1, α) are labelled by x2 - α x1.
            let alpha = f.from_index(dir).expect("direction index");
            f.sub(x.x2, f.mul(alpha, x.x1))
        } else {
            x.x1
        };
        dir * q + k.index()
    }

    pub fn line_through(&self, x: PhaseVector, d: &Direction) -> AffineLine {
        self.line(self.line_index_through(x, self.direction_index(d)))
    }

    pub fn line_index(&self, l: &AffineLine) -> usize {
        self.line_index_through(l.base, self.direction_index(&l.direction))
    }

    /// Direction index of line `idx`.
    pub fn line_direction(&self, idx: usize) -> usize {
        idx / self.0.q
    }

    /// Points of a line, ordered by the scalar along the direction.
    pub fn line_points(&self, l: &AffineLine) -> Vec<PhaseVector> {
        self.direction_points(&l.direction).into_iter().map(|d| self.add(l.base, d)).collect()
    }

    /// `l + v`.
    pub fn translate(&self, l: &AffineLine, v: PhaseVector) -> AffineLine {
        self.line_through(self.add(l.base, v), &l.direction)
    }

    pub fn translate_idx(&self, l: usize, v: PhaseVector) -> usize {
        let line = self.line(l);
        self.line_index_through(self.add(line.base, v), self.line_direction(l))
    }

    /// Exponent of `b_S(u, v) = exp(2πi Tr S(u, v) / p)`, in Z_p.
    pub fn bicharacter(&self, s: &SymplecticForm, u: PhaseVector, v: PhaseVector) -> u32 {
        self.0.field.trace(s.value(&self.0.field, u, v))
    }

    /// `(A, v) · l = A(x + v) + A D` with the linear part acting about the
    /// origin `(0, 0)`.
    pub fn affine_action(&self, a: &LinearMap2, v: PhaseVector, l: &AffineLine) -> Result<AffineLine, GeometryError> {
        self.affine_action_about(PhaseVector::ZERO, a, v, l)
    }

    /// Affine action with the linear part acting about `origin`:
    /// `x -> o + A(x - o + v)`.
    pub fn affine_action_about(
        &self,
        origin: PhaseVector,
        a: &LinearMap2,
        v: PhaseVector,
        l: &AffineLine,
    ) -> Result<AffineLine, GeometryError> {
        let f = &self.0.field;
        if !a.is_invertible(f) {
            return Err(GeometryError::SingularMap);
        }
        let x = self.add(origin, a.apply(f, self.add(self.sub(l.base, origin), v)));
        let d = self.span(a.apply(f, l.direction.rep))?;
        Ok(self.line_through(x, &d))
    }

    /// Permutation of line indices induced by `(A, v)` about the origin.
    pub fn line_permutation(&self, a: &LinearMap2, v: PhaseVector) -> Result<Vec<usize>, GeometryError> {
        self.lines().iter().map(|l| self.affine_action(a, v, l).map(|m| self.line_index(&m))).collect()
    }

    pub fn vector_to_json(&self, v: PhaseVector) -> [Vec<u32>; 2] {
        [self.0.field.coeffs(v.x1), self.0.field.coeffs(v.x2)]
    }

    pub fn vector_from_json(&self, c: &[Vec<u32>; 2]) -> Result<PhaseVector, GeometryError> {
        Ok(PhaseVector::new(self.0.field.element(&c[0])?, self.0.field.element(&c[1])?))
    }

    pub fn line_to_json(&self, l: &AffineLine) -> LineJson {
        LineJson { dir: self.vector_to_json(l.direction.rep), base: self.vector_to_json(l.base) }
    }

    /// Accepts any spanning vector and any point of the line.
    pub fn line_from_json(&self, j: &LineJson) -> Result<AffineLine, GeometryError> {
        let d = self.vector_from_json(&j.dir).map_err(|_| GeometryError::BadLine)?;
        let x = self.vector_from_json(&j.base).map_err(|_| GeometryError::BadLine)?;
        let dir = self.span(d).map_err(|_| GeometryError::BadLine)?;
        Ok(self.line_through(x, &dir))
    }

    /// Maps of determinant `det`, in row-major lexicographic order.
    pub fn maps_with_det(&self, det: FieldElement) -> Vec<LinearMap2> {
        let f = &self.0.field;
        let mut out = Vec::new();
        for a11 in f.elements() {
            for a12 in f.elements() {
                for a21 in f.elements() {
                    for a22 in f.elements() {
                        let m = LinearMap2::new(a11, a12, a21, a22);
                        if m.det(f) == det {
                            out.push(m);
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn space(p: u32, r: u32) -> PhaseSpace {
        PhaseSpace::new(&FieldSpec::new(p, r, None).unwrap())
    }

    fn v(s: &PhaseSpace, a: i64, b: i64) -> PhaseVector {
        PhaseVector::new(s.field().from_int(a), s.field().from_int(b))
    }

    #[test]
    fn counts() {
        for (p, r, nd) in [(2, 1, 3), (3, 1, 4), (2, 2, 5)] {
            let s = space(p, r);
            assert_eq!(s.directions().len(), nd);
            assert_eq!(s.lines().len(), s.q() * (s.q() + 1));
        }
        assert_eq!(space(3, 1).lines().len(), 12);
    }

    #[test]
    fn qubit_lines_match_listing() {
        let s = space(2, 1);
        let pts = |l: &AffineLine| -> HashSet<(usize, usize)> {
            s.line_points(l).iter().map(|p| (p.x1.index(), p.x2.index())).collect()
        };
        let listed: Vec<Vec<[(usize, usize); 2]>> = vec![
            vec![[(0, 0), (1, 0)], [(0, 1), (1, 1)]],
            vec![[(0, 0), (1, 1)], [(0, 1), (1, 0)]],
            vec![[(0, 0), (0, 1)], [(1, 0), (1, 1)]],
        ];
        // Direction order: F(1,0), F(1,1), F(0,1).
        for (d, class) in listed.iter().enumerate() {
            for (k, pair) in class.iter().enumerate() {
                let expect: HashSet<_> = pair.iter().copied().collect();
                assert_eq!(pts(&s.line(d * 2 + k)), expect);
            }
        }
    }

    #[test]
    fn every_line_has_q_points_and_canonical_base() {
        let s = space(3, 1);
        for l in s.lines() {
            let pts = s.line_points(l);
            assert_eq!(pts.len(), 3);
            assert_eq!(*pts.iter().min_by_key(|p| s.index(**p)).unwrap(), l.base);
            for p in pts {
                assert_eq!(s.line_through(p, &l.direction), *l);
            }
        }
    }

    #[test]
    fn bicharacter_examples() {
        let s2 = space(2, 1);
        let one = SymplecticForm::standard();
        assert_eq!(s2.bicharacter(&one, s2.e1(), s2.e2()), 1);
        let s3 = space(3, 1);
        assert_eq!(s3.bicharacter(&one, s3.e1(), v(&s3, 0, 2)), 2);
        for x in s3.vectors() {
            assert_eq!(s3.bicharacter(&one, x, x), 0);
        }
    }

    #[test]
    fn affine_action_examples() {
        let s = space(2, 1);
        let f = s.field().clone();
        let id = LinearMap2::identity();
        for l in s.lines() {
            assert_eq!(s.affine_action(&id, PhaseVector::ZERO, l).unwrap(), *l);
            let t = s.affine_action(&id, v(&s, 1, 1), l).unwrap();
            assert_eq!(t.direction, l.direction);
        }
        let swap = LinearMap2::new(f.zero(), f.one(), f.one(), f.zero());
        let l = s.line_through(PhaseVector::ZERO, &s.span(s.e1()).unwrap());
        let image = s.affine_action(&swap, PhaseVector::ZERO, &l).unwrap();
        assert_eq!(image, s.line_through(PhaseVector::ZERO, &s.span(s.e2()).unwrap()));

        let singular = LinearMap2::new(f.one(), f.one(), f.one(), f.one());
        assert_eq!(s.affine_action(&singular, PhaseVector::ZERO, &l), Err(GeometryError::SingularMap));
    }

    #[test]
    fn line_json_roundtrip() {
        let s = space(2, 2);
        for l in s.lines() {
            let j = s.line_to_json(l);
            assert_eq!(s.line_from_json(&j).unwrap(), *l);
        }
        let j = LineJson { dir: [vec![0, 0], vec![0, 0]], base: [vec![0, 0], vec![0, 0]] };
        assert_eq!(s.line_from_json(&j), Err(GeometryError::BadLine));
    }
}
