//! Quivers with relations for the n = 2 hearts, explicit representations of
//! the named objects, exhaustive subrepresentation search over F_p, and
//! stability and Harder-Narasimhan checks built on it.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exactmath::{qi, CycloNum, ExactError, PhaseKey, Q};
use crate::extcalc::{self, ExtError};
use crate::hearts::{self, CaseId, CaseLattice, HeartError, Slope, SlopeValue};
use crate::mfcore::WeightedType;
use crate::poly::{monomials_of_degree, Poly};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("type {0} has no quiver presentation here")]
    Unsupported(String),
    #[error("object {0} is not defined for this type")]
    InvalidName(String),
    #[error("resource guard: {0}")]
    ResourceLimit(String),
    #[error("representation violates relation {0}")]
    RelationViolated(usize),
    #[error("prime {0} divides a denominator of the representation")]
    BadReduction(u64),
    #[error("malformed representation: {0}")]
    Malformed(String),
    #[error("maximal destabilizer is not unique: {0}")]
    Diagnostic(String),
    #[error(transparent)]
    Heart(#[from] HeartError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Σ dims above this is refused by the exhaustive search.
pub const MAX_TOTAL_DIM: usize = 18;
pub const MAX_PRIME: u64 = 11;
/// Cap on the number of explicit choices at non-sink vertices.
pub const MAX_BRANCHES: u128 = 2_000_000;

// ---------------------------------------------------------------------------
// F_p linear algebra

fn md(x: i128, p: u64) -> u64 {
    x.rem_euclid(p as i128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let (mut b, mut e) = (a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

type FpMat = Vec<Vec<u64>>;

/// Reduced row echelon form in place; zero rows dropped; returns pivots.
fn rref_fp(m: &mut FpMat, p: u64) -> Vec<usize> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(piv) = (row..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(row, piv);
        let inv = inv_mod(m[row][col], p);
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..ncols {
                    m[r][c] = md(m[r][c] as i128 - (f as i128) * (m[row][c] as i128), p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    pivots
}

fn mat_vec_fp(m: &FpMat, v: &[u64], p: u64) -> Vec<u64> {
    m.iter().map(|row| row.iter().zip(v).fold(0u64, |acc, (a, b)| (acc + a * b) % p)).collect()
}

fn mat_mul_fp(a: &FpMat, b: &FpMat, inner: usize, cols: usize, p: u64) -> FpMat {
    a.iter().map(|row| (0..cols).map(|j| (0..inner).fold(0u64, |acc, k| (acc + row[k] * b[k][j]) % p)).collect()).collect()
}

/// A subspace of F_p^n given by its RREF basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpSubspace {
    pub n: usize,
    pub rows: FpMat,
    pub pivots: Vec<usize>,
}

impl FpSubspace {
    pub fn span(n: usize, vectors: Vec<Vec<u64>>, p: u64) -> FpSubspace {
        let mut rows = vectors;
        let pivots = rref_fp(&mut rows, p);
        FpSubspace { n, rows, pivots }
    }

    pub fn zero(n: usize) -> FpSubspace {
        FpSubspace { n, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// v minus its components along the basis, read at the pivots.
    fn reduce(&self, v: &[u64], p: u64) -> Vec<u64> {
        let mut w = v.to_vec();
        for (r, &c) in self.rows.iter().zip(&self.pivots) {
            let f = w[c];
            if f != 0 {
                for k in 0..self.n {
                    w[k] = md(w[k] as i128 - (f as i128) * (r[k] as i128), p);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64], p: u64) -> bool {
        self.reduce(v, p).iter().all(|&x| x == 0)
    }

    /// Coordinates of v ∈ self in the RREF basis.
    fn coords(&self, v: &[u64]) -> Vec<u64> {
        self.pivots.iter().map(|&c| v[c]).collect()
    }

    /// Standard basis columns spanning a complement.
    fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Coordinates of v + self in V/self, against the complement basis.
    fn quotient_coords(&self, v: &[u64], p: u64) -> Vec<u64> {
        let w = self.reduce(v, p);
        self.complement().iter().map(|&c| w[c]).collect()
    }
}

/// Gaussian binomial [m choose r]_p.
pub fn gaussian_binomial(m: usize, r: usize, p: u64) -> u128 {
    if r > m {
        return 0;
    }
    let p = p as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..r {
        num *= p.pow((m - i) as u32) - 1;
        den *= p.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// Number of subspaces of F_p^m.
pub fn subspace_count(m: usize, p: u64) -> u128 {
    (0..=m).map(|r| gaussian_binomial(m, r, p)).sum()
}

/// Every subspace of F_p^m, as RREF row lists.
fn all_subspaces(m: usize, p: u64) -> Vec<FpMat> {
    let mut out = Vec::new();
    for r in 0..=m {
        let mut piv = Vec::new();
        pivot_sets(m, r, 0, &mut piv, &mut |pivots| {
            // free slots: row i, columns after pivot_i that are not pivots
            let slots: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(i, &c)| ((c + 1)..m).filter(|k| !pivots.contains(k)).map(move |k| (i, k)))
                .collect();
            let total = (p as u128).pow(slots.len() as u32);
            for code in 0..total {
                let mut rows = vec![vec![0u64; m]; r];
                for (i, &c) in pivots.iter().enumerate() {
                    rows[i][c] = 1;
                }
                let mut x = code;
                for &(i, k) in &slots {
                    rows[i][k] = (x % p as u128) as u64;
                    x /= p as u128;
                }
                out.push(rows);
            }
        });
    }
    out
}

fn pivot_sets(m: usize, r: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == r {
        f(cur);
        return;
    }
    for c in start..m {
        cur.push(c);
        pivot_sets(m, r, c + 1, cur, f);
        cur.pop();
    }
}

/// Every subspace U ⊇ K of F_p^n.
fn subspaces_containing(k: &FpSubspace, p: u64) -> Vec<FpSubspace> {
    let comp = k.complement();
    all_subspaces(comp.len(), p)
        .into_iter()
        .map(|s| {
            let mut vecs = k.rows.clone();
            for row in s {
                let mut v = vec![0u64; k.n];
                for (i, &c) in comp.iter().enumerate() {
                    v[c] = row[i];
                }
                vecs.push(v);
            }
            FpSubspace::span(k.n, vecs, p)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// quivers

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    pub label: String,
}

/// Σ c · (path), a path listed in traversal order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relation {
    #[serde(serialize_with = "ser_terms")]
    pub terms: Vec<(Q, Vec<usize>)>,
}

fn ser_terms<S: serde::Serializer>(t: &[(Q, Vec<usize>)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(t.len()))?;
    for (c, path) in t {
        seq.serialize_element(&(c.to_string(), path))?;
    }
    seq.end()
}

/// A point of X in a model over Q; `p1` is None when no monomial involving
/// x1 is ever evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub p1: Option<Q>,
    pub p2: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuiverWithRelations {
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub relations: Vec<Relation>,
    #[serde(skip)]
    pub ty: Option<WeightedType>,
    #[serde(skip)]
    pub points: Vec<ModelPoint>,
}

impl QuiverWithRelations {
    pub fn is_sink(&self, v: usize) -> bool {
        !self.arrows.iter().any(|a| a.source == v)
    }

    fn incoming(&self, v: usize) -> impl Iterator<Item = (usize, &Arrow)> {
        self.arrows.iter().enumerate().filter(move |(_, a)| a.target == v)
    }

    /// Vertices ordered so every arrow goes forward.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut indeg = vec![0; n];
        for a in &self.arrows {
            indeg[a.target] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut out = Vec::new();
        while let Some(v) = ready.pop() {
            out.push(v);
            for a in self.arrows.iter().filter(|a| a.source == v) {
                indeg[a.target] -= 1;
                if indeg[a.target] == 0 {
                    ready.push(a.target);
                }
            }
        }
        out
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn arrow_index(&self, label: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.label == label)
    }
}

/// Rational point models: for a1 = a2 = 1 a configuration projectively
/// equivalent to the Fermat points; otherwise points (·, 1), since only
/// powers of x2 are evaluated.
pub fn model_points(ty: &WeightedType) -> Result<Vec<ModelPoint>, QuiverError> {
    let count = match crate::classify::geometry(ty) {
        Some(crate::classify::Geometry::Points { count }) => count as usize,
        _ => return Err(QuiverError::Unsupported(ty.to_string())),
    };
    let pt = |a: i64, b: i64| ModelPoint { p1: Some(qi(a)), p2: qi(b) };
    if ty.weights == [1, 1] {
        // the Fermat quartic's roots are harmonic, like {∞, 0, 1, −1}
        let all = [pt(1, 0), pt(0, 1), pt(1, 1), pt(1, -1)];
        if count > all.len() {
            return Err(QuiverError::Unsupported(ty.to_string()));
        }
        Ok(all[..count].to_vec())
    } else {
        Ok((0..count).map(|_| ModelPoint { p1: None, p2: Q::one() }).collect())
    }
}

fn eval_monomial(e: &[u32], pt: &ModelPoint) -> Q {
    let mut v = Q::one();
    if e[0] > 0 {
        let p1 = pt.p1.clone().expect("x1 is never evaluated in this model");
        for _ in 0..e[0] {
            v *= &p1;
        }
    }
    for _ in 0..e[1] {
        v *= &pt.p2;
    }
    v
}

fn lattice_for(ty: &WeightedType) -> Result<CaseLattice, QuiverError> {
    let l = hearts::build_lattice(ty)?;
    match l.case_id {
        CaseId::PointsOnElliptic | CaseId::PointsInK3 => Ok(l),
        _ => Err(QuiverError::Unsupported(ty.to_string())),
    }
}

/// The quiver of A_W for n = 2, ε ∈ {−1, −2}. Vertex order matches the
/// lattice basis of the heart.
pub fn heart_quiver(ty: &WeightedType) -> Result<QuiverWithRelations, QuiverError> {
    let l = lattice_for(ty)?;
    let points = model_points(ty)?;
    let k = points.len();
    let mut vertices = Vec::new();
    let mut arrows = Vec::new();
    let mut relations = Vec::new();
    let c0 = match l.case_id {
        CaseId::PointsInK3 => {
            vertices.push("C(1)".to_string());
            vertices.push("C(0)".to_string());
            1
        }
        _ => {
            vertices.push("C(0)".to_string());
            0
        }
    };
    for j in 1..=k {
        vertices.push(format!("p{j}"));
    }
    let mut x_arrows = Vec::new();
    if l.case_id == CaseId::PointsInK3 {
        // one arrow X_i per variable of weight 1
        for (i, &a) in ty.weights.iter().enumerate() {
            if a == 1 {
                x_arrows.push((i, arrows.len()));
                arrows.push(Arrow { source: 0, target: c0, label: format!("X{}", i + 1) });
            }
        }
    }
    for j in 0..k {
        let pi = arrows.len();
        arrows.push(Arrow { source: c0, target: c0 + 1 + j, label: format!("pi{}", j + 1) });
        if x_arrows.len() == 2 {
            let pt = &points[j];
            let p1 = pt.p1.clone().expect("both coordinates in the (1,1) model");
            // p2 π X1 − p1 π X2 = 0
            relations.push(Relation { terms: vec![(pt.p2.clone(), vec![x_arrows[0].1, pi]), (-p1, vec![x_arrows[1].1, pi])] });
        }
    }
    Ok(QuiverWithRelations { vertices, arrows, relations, ty: Some(ty.clone()), points })
}

// ---------------------------------------------------------------------------
// representations

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    Q,
    Fp(u64),
}

/// A representation over Q; mats[a] is dims[target] × dims[source].
#[derive(Clone, Debug, PartialEq)]
pub struct QuiverRep {
    pub dims: Vec<usize>,
    pub mats: Vec<Vec<Vec<Q>>>,
}

/// A representation over F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpRep {
    pub p: u64,
    pub dims: Vec<usize>,
    pub mats: Vec<FpMat>,
}

fn zero_mat<T: Clone>(r: usize, c: usize, z: T) -> Vec<Vec<T>> {
    vec![vec![z; c]; r]
}

fn path_matrix_q(q: &QuiverWithRelations, mats: &[Vec<Vec<Q>>], dims: &[usize], path: &[usize]) -> Vec<Vec<Q>> {
    let cols = dims[q.arrows[path[0]].source];
    let mut acc = mats[path[0]].clone();
    for &a in &path[1..] {
        let m = &mats[a];
        let t = dims[q.arrows[a].target];
        let inner = dims[q.arrows[a].source];
        acc = (0..t).map(|i| (0..cols).map(|j| (0..inner).fold(Q::zero(), |s, k| s + &m[i][k] * &acc[k][j])).collect()).collect();
    }
    acc
}

fn reduce_q(x: &Q, p: u64) -> Result<u64, QuiverError> {
    let den = x.denom().to_i128().ok_or(QuiverError::BadReduction(p))?;
    let num = x.numer().to_i128().ok_or(QuiverError::BadReduction(p))?;
    let dm = md(den, p);
    if dm == 0 {
        return Err(QuiverError::BadReduction(p));
    }
    Ok(md(num, p) * inv_mod(dm, p) % p)
}

impl QuiverRep {
    pub fn zero(q: &QuiverWithRelations) -> QuiverRep {
        QuiverRep { dims: vec![0; q.vertices.len()], mats: q.arrows.iter().map(|_| Vec::new()).collect() }
    }

    /// Index of the first violated relation.
    pub fn violated_relation(&self, q: &QuiverWithRelations) -> Option<usize> {
        q.relations.iter().position(|rel| {
            let (_, first) = &rel.terms[0];
            let (s, t) = (q.arrows[first[0]].source, q.arrows[*first.last().unwrap()].target);
            let mut total = zero_mat(self.dims[t], self.dims[s], Q::zero());
            for (c, path) in &rel.terms {
                let m = path_matrix_q(q, &self.mats, &self.dims, path);
                for (i, row) in m.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        total[i][j] += c * x;
                    }
                }
            }
            total.iter().flatten().any(|x| !x.is_zero())
        })
    }

    pub fn reduce(&self, p: u64) -> Result<FpRep, QuiverError> {
        let red = |x: &Q| reduce_q(x, p);
        let mats = self
            .mats
            .iter()
            .map(|m| m.iter().map(|row| row.iter().map(red).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FpRep { p, dims: self.dims.clone(), mats })
    }
}

impl FpRep {
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn violated_relation(&self, q: &QuiverWithRelations) -> Option<usize> {
        let p = self.p;
        q.relations.iter().position(|rel| {
            let (_, first) = &rel.terms[0];
            let (s, t) = (q.arrows[first[0]].source, q.arrows[*first.last().unwrap()].target);
            let mut total = zero_mat(self.dims[t], self.dims[s], 0u64);
            for (c, path) in &rel.terms {
                let mut acc = self.mats[path[0]].clone();
                for &a in &path[1..] {
                    let inner = self.dims[q.arrows[a].source];
                    acc = mat_mul_fp(&self.mats[a], &acc, inner, self.dims[s], p);
                }
                let c = reduce_q(c, p).unwrap_or(0);
                for (i, row) in acc.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        total[i][j] = (total[i][j] + c * x) % p;
                    }
                }
            }
            total.iter().flatten().any(|&x| x != 0)
        })
    }

    /// The subrepresentation on the given subspaces.
    pub fn restrict(&self, q: &QuiverWithRelations, subs: &[FpSubspace]) -> FpRep {
        let p = self.p;
        let mats = q
            .arrows
            .iter()
            .enumerate()
            .map(|(ai, a)| {
                let (us, ut) = (&subs[a.source], &subs[a.target]);
                // column b = coordinates of M·(basis_b) in the target basis
                let cols: Vec<Vec<u64>> = us.rows.iter().map(|b| ut.coords(&mat_vec_fp(&self.mats[ai], b, p))).collect();
                (0..ut.dim()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
            })
            .collect();
        FpRep { p, dims: subs.iter().map(|s| s.dim()).collect(), mats }
    }

    /// The quotient representation by the given subrepresentation.
    pub fn quotient(&self, q: &QuiverWithRelations, subs: &[FpSubspace]) -> FpRep {
        let p = self.p;
        let mats = q
            .arrows
            .iter()
            .enumerate()
            .map(|(ai, a)| {
                let (us, ut) = (&subs[a.source], &subs[a.target]);
                let cols: Vec<Vec<u64>> = us
                    .complement()
                    .iter()
                    .map(|&c| {
                        let mut e = vec![0u64; self.dims[a.source]];
                        e[c] = 1;
                        ut.quotient_coords(&mat_vec_fp(&self.mats[ai], &e, p), p)
                    })
                    .collect();
                let rows = self.dims[a.target] - ut.dim();
                (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
            })
            .collect();
        FpRep { p, dims: self.dims.iter().zip(subs).map(|(n, s)| n - s.dim()).collect(), mats }
    }
}

/// Monomial basis of R_k (k < d, so R_k = A_k).
fn graded_piece(ty: &WeightedType, k: i64) -> Vec<Vec<u32>> {
    monomials_of_degree(&ty.weights, k)
}

/// Matrix of multiplication by x_i from R_k to R_{k+a_i} in monomial bases.
fn mult_matrix(ty: &WeightedType, i: usize, k: i64) -> Vec<Vec<Q>> {
    let src = graded_piece(ty, k);
    let tgt = graded_piece(ty, k + ty.weights[i] as i64);
    let w = ty.fermat_w().expect("Fermat");
    tgt.iter()
        .map(|t| {
            src.iter()
                .map(|s| {
                    let mut e = s.clone();
                    e[i] += 1;
                    let red = Poly::monomial(e, Q::one()).rem(&w);
                    let c = red.terms().find(|(m, _)| *m == t).map(|(_, c)| c.clone()).unwrap_or_else(Q::zero);
                    c
                })
                .collect()
        })
        .collect()
}

fn eval_row(ty: &WeightedType, k: i64, pt: &ModelPoint) -> Vec<Q> {
    graded_piece(ty, k).iter().map(|e| eval_monomial(e, pt)).collect()
}

pub const OBJECT_NAMES: [&str; 5] = ["C1m1", "C2m1", "tauPsiOx", "PsiOx", "C0"];

/// Explicit representation of a named object; `point` selects x = p^{(point)}
/// (1-based) for the point objects.
pub fn named_object(ty: &WeightedType, name: &str, point: usize) -> Result<QuiverRep, QuiverError> {
    let q = heart_quiver(ty)?;
    let l = lattice_for(ty)?;
    let k = q.points.len();
    let c0 = q.vertex_index("C(0)").unwrap();
    let bad = || QuiverError::InvalidName(name.to_string());
    let mut rep = QuiverRep::zero(&q);
    let set_dims = |rep: &mut QuiverRep, dims: Vec<usize>| {
        rep.mats = q.arrows.iter().map(|a| zero_mat(dims[a.target], dims[a.source], Q::zero())).collect();
        rep.dims = dims;
    };
    let pi = |j: usize| q.arrow_index(&format!("pi{}", j + 1)).unwrap();
    match (name, l.case_id) {
        ("C0", _) => {
            let mut d = vec![0; q.vertices.len()];
            d[c0] = 1;
            set_dims(&mut rep, d);
        }
        ("PsiOx", _) | ("tauPsiOx", _) => {
            if point == 0 || point > k {
                return Err(bad());
            }
            let mut d = vec![0; q.vertices.len()];
            d[c0 + point] = 1;
            if name == "tauPsiOx" {
                d[c0] = 1;
            }
            set_dims(&mut rep, d);
            if name == "tauPsiOx" {
                rep.mats[pi(point - 1)] = vec![vec![Q::one()]];
            }
        }
        ("C1m1", CaseId::PointsOnElliptic) => {
            // R_1 at C(0) with evaluation maps to every point
            let r1 = graded_piece(ty, 1).len();
            let mut d = vec![1; q.vertices.len()];
            d[c0] = r1;
            set_dims(&mut rep, d);
            for j in 0..k {
                rep.mats[pi(j)] = vec![eval_row(ty, 1, &q.points[j])];
            }
        }
        ("C1m1", CaseId::PointsInK3) => {
            // C(1) is the simple at its vertex; C(1)[−1] lies in the tilt
            let mut d = vec![0; q.vertices.len()];
            d[0] = 1;
            set_dims(&mut rep, d);
        }
        ("C2m1", CaseId::PointsInK3) => {
            let mut d = vec![1; q.vertices.len()];
            d[0] = graded_piece(ty, 1).len();
            d[c0] = graded_piece(ty, 2).len();
            set_dims(&mut rep, d);
            for (ai, a) in q.arrows.iter().enumerate() {
                if let Some(xi) = a.label.strip_prefix('X') {
                    let i: usize = xi.parse::<usize>().unwrap() - 1;
                    rep.mats[ai] = mult_matrix(ty, i, 1);
                }
            }
            for j in 0..k {
                rep.mats[pi(j)] = vec![eval_row(ty, 2, &q.points[j])];
            }
        }
        _ => return Err(bad()),
    }
    if let Some(r) = rep.violated_relation(&q) {
        return Err(QuiverError::RelationViolated(r));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// exhaustive subrepresentation search

fn image_span(q: &QuiverWithRelations, rep: &FpRep, chosen: &[Option<FpSubspace>], v: usize) -> FpSubspace {
    let mut vecs = Vec::new();
    for (ai, a) in q.incoming(v) {
        if let Some(us) = &chosen[a.source] {
            for b in &us.rows {
                vecs.push(mat_vec_fp(&rep.mats[ai], b, rep.p));
            }
        }
    }
    FpSubspace::span(rep.dims[v], vecs, rep.p)
}

fn guard(rep: &FpRep) -> Result<(), QuiverError> {
    if rep.total_dim() > MAX_TOTAL_DIM {
        return Err(QuiverError::ResourceLimit(format!("total dimension {} > {MAX_TOTAL_DIM}", rep.total_dim())));
    }
    if !is_prime(rep.p) || rep.p > MAX_PRIME {
        return Err(QuiverError::ResourceLimit(format!("p = {} must be a prime ≤ {MAX_PRIME}", rep.p)));
    }
    Ok(())
}

fn branch_guard(q: &QuiverWithRelations, rep: &FpRep) -> Result<(), QuiverError> {
    let est: u128 = (0..q.vertices.len()).filter(|&v| !q.is_sink(v)).map(|v| subspace_count(rep.dims[v], rep.p)).product();
    if est > MAX_BRANCHES {
        return Err(QuiverError::ResourceLimit(format!("{est} branches at non-sink vertices")));
    }
    Ok(())
}

/// Depth-first search over subspaces at non-sink vertices (in topological
/// order); calls `f` with the choices and, for each sink, the image span it
/// must contain.
fn search_nonsinks(q: &QuiverWithRelations, rep: &FpRep, f: &mut dyn FnMut(&[Option<FpSubspace>], &[FpSubspace])) {
    let order: Vec<usize> = q.topological_order().into_iter().filter(|&v| !q.is_sink(v)).collect();
    let sinks: Vec<usize> = (0..q.vertices.len()).filter(|&v| q.is_sink(v)).collect();
    let mut chosen: Vec<Option<FpSubspace>> = vec![None; q.vertices.len()];
    fn go(
        q: &QuiverWithRelations,
        rep: &FpRep,
        order: &[usize],
        sinks: &[usize],
        idx: usize,
        chosen: &mut Vec<Option<FpSubspace>>,
        f: &mut dyn FnMut(&[Option<FpSubspace>], &[FpSubspace]),
    ) {
        if idx == order.len() {
            let ks: Vec<FpSubspace> = sinks.iter().map(|&t| image_span(q, rep, chosen, t)).collect();
            f(chosen, &ks);
            return;
        }
        let v = order[idx];
        let k = image_span(q, rep, chosen, v);
        for u in subspaces_containing(&k, rep.p) {
            chosen[v] = Some(u);
            go(q, rep, order, sinks, idx + 1, chosen, f);
        }
        chosen[v] = None;
    }
    go(q, rep, &order, &sinks, 0, &mut chosen, f);
}

/// Multiset of dimension vectors of all subrepresentations.
pub fn all_subreps(q: &QuiverWithRelations, rep: &FpRep) -> Result<BTreeMap<Vec<usize>, u128>, QuiverError> {
    guard(rep)?;
    branch_guard(q, rep)?;
    let sinks: Vec<usize> = (0..q.vertices.len()).filter(|&v| q.is_sink(v)).collect();
    let mut out: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
    search_nonsinks(q, rep, &mut |chosen, ks| {
        let mut partial: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
        let base: Vec<usize> = chosen.iter().map(|c| c.as_ref().map_or(0, |u| u.dim())).collect();
        partial.insert(base, 1);
        for (t, k) in sinks.iter().zip(ks) {
            let free = rep.dims[*t] - k.dim();
            let mut next = BTreeMap::new();
            for (dv, c) in &partial {
                for r in 0..=free {
                    let mut d = dv.clone();
                    d[*t] = k.dim() + r;
                    *next.entry(d).or_insert(0) += c * gaussian_binomial(free, r, rep.p);
                }
            }
            partial = next;
        }
        for (dv, c) in partial {
            *out.entry(dv).or_insert(0) += c;
        }
    });
    Ok(out)
}

/// Explicit enumeration of every subrepresentation (small inputs only).
pub fn enumerate_subreps(q: &QuiverWithRelations, rep: &FpRep) -> Result<Vec<Vec<FpSubspace>>, QuiverError> {
    guard(rep)?;
    branch_guard(q, rep)?;
    let sinks: Vec<usize> = (0..q.vertices.len()).filter(|&v| q.is_sink(v)).collect();
    let mut out = Vec::new();
    search_nonsinks(q, rep, &mut |chosen, ks| {
        let mut partial: Vec<Vec<Option<FpSubspace>>> = vec![chosen.to_vec()];
        for (t, k) in sinks.iter().zip(ks) {
            let opts = subspaces_containing(k, rep.p);
            partial = partial
                .into_iter()
                .flat_map(|c| {
                    opts.iter().map(move |u| {
                        let mut c2 = c.clone();
                        c2[*t] = Some(u.clone());
                        c2
                    })
                })
                .collect();
        }
        out.extend(partial.into_iter().map(|c| c.into_iter().map(|u| u.unwrap()).collect()));
    });
    Ok(out)
}

/// A subrepresentation with the given dimension vector, if one exists.
fn find_subrep(q: &QuiverWithRelations, rep: &FpRep, target: &[usize]) -> Option<Vec<FpSubspace>> {
    let sinks: Vec<usize> = (0..q.vertices.len()).filter(|&v| q.is_sink(v)).collect();
    let mut found = None;
    search_nonsinks(q, rep, &mut |chosen, ks| {
        if found.is_some() {
            return;
        }
        let matches = chosen.iter().enumerate().all(|(v, c)| c.as_ref().map_or(true, |u| u.dim() == target[v]));
        let fits = sinks.iter().zip(ks).all(|(t, k)| k.dim() <= target[*t]);
        if matches && fits {
            let mut subs: Vec<FpSubspace> = chosen.iter().map(|c| c.clone().unwrap_or_else(|| FpSubspace::zero(0))).collect();
            for (t, k) in sinks.iter().zip(ks) {
                let mut vecs = k.rows.clone();
                for &c in k.complement().iter().take(target[*t] - k.dim()) {
                    let mut e = vec![0u64; rep.dims[*t]];
                    e[c] = 1;
                    vecs.push(e);
                }
                subs[*t] = FpSubspace::span(rep.dims[*t], vecs, rep.p);
            }
            found = Some(subs);
        }
    });
    found
}

// ---------------------------------------------------------------------------
// stability

/// Phase of Z^† in a window, or a slope.
#[derive(Clone, Debug)]
pub enum StabilitySpec {
    Phase { zg_row: Vec<CycloNum>, window_start: Q },
    Slope { slope: Slope },
}

/// Comparison key of a class.
#[derive(Clone, Debug)]
pub enum Key {
    Phase(PhaseKey),
    Slope(SlopeValue),
}

impl Key {
    pub fn cmp(&self, other: &Key) -> Ordering {
        match (self, other) {
            (Key::Phase(a), Key::Phase(b)) => a.cmp(b),
            (Key::Slope(a), Key::Slope(b)) => a.cmp(b),
            _ => panic!("keys of different kinds"),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Key::Phase(p) => format!("{:.6}", p.value),
            Key::Slope(s) => s.to_string(),
        }
    }
}

impl StabilitySpec {
    /// The stability used for A_W: Z_G-phases for ε = −1 (where the tilt is
    /// trivial), the slope μ for ε = −2.
    pub fn for_lattice(l: &CaseLattice) -> StabilitySpec {
        match l.case_id {
            CaseId::PointsInK3 => StabilitySpec::Slope { slope: l.slope.clone() },
            _ => StabilitySpec::Phase { zg_row: l.zg_row.clone(), window_start: &l.theta - &l.theta_w },
        }
    }

    pub fn key(&self, dims: &[usize]) -> Result<Key, QuiverError> {
        let v: Vec<i64> = dims.iter().map(|&x| x as i64).collect();
        Ok(match self {
            StabilitySpec::Phase { zg_row, window_start } => {
                let z = v.iter().zip(zg_row).fold(CycloNum::zero(1), |acc, (&c, r)| &acc + &r.scale(&qi(c)));
                let start = crate::exactmath::rational_to_f64(window_start) - 1e-9;
                Key::Phase(PhaseKey::new(&z, start)?)
            }
            StabilitySpec::Slope { slope } => Key::Slope(slope.eval(&v)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    SemistableOnly { witness: Vec<usize> },
    Unstable { witness: Vec<usize> },
}

impl Verdict {
    pub fn is_semistable(&self) -> bool {
        !matches!(self, Verdict::Unstable { .. })
    }
}

fn verdict_from(subs: &BTreeMap<Vec<usize>, u128>, total: &[usize], spec: &StabilitySpec) -> Result<Verdict, QuiverError> {
    if total.iter().all(|&x| x == 0) {
        return Ok(Verdict::SemistableOnly { witness: Vec::new() });
    }
    let ke = spec.key(total)?;
    let mut tie = None;
    for dv in subs.keys() {
        if dv.iter().all(|&x| x == 0) || dv == total {
            continue;
        }
        match spec.key(dv)?.cmp(&ke) {
            Ordering::Greater => return Ok(Verdict::Unstable { witness: dv.clone() }),
            Ordering::Equal if tie.is_none() => tie = Some(dv.clone()),
            _ => {}
        }
    }
    Ok(match tie {
        Some(w) => Verdict::SemistableOnly { witness: w },
        None => Verdict::Stable,
    })
}

/// Compares every proper nonzero subrepresentation with the whole.
pub fn is_stable(q: &QuiverWithRelations, rep: &FpRep, spec: &StabilitySpec) -> Result<Verdict, QuiverError> {
    let subs = all_subreps(q, rep)?;
    verdict_from(&subs, &rep.dims, spec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub object: String,
    pub dims: Vec<usize>,
    pub primes: Vec<u64>,
    pub verdicts: Vec<Verdict>,
    pub consistent: bool,
}

impl StabilityReport {
    pub fn stable(&self) -> bool {
        self.consistent && self.verdicts.iter().all(|v| *v == Verdict::Stable)
    }

    pub fn summary(&self) -> String {
        let ps: Vec<String> = self.primes.iter().map(|p| format!("F_{p}")).collect();
        let word = match self.verdicts.first() {
            Some(Verdict::Stable) if self.stable() => "stable",
            Some(Verdict::SemistableOnly { .. }) if self.consistent => "semistable, not stable",
            Some(Verdict::Unstable { .. }) if self.consistent => "unstable",
            _ => "inconsistent across primes",
        };
        format!("{word} (verified over {})", ps.join(", "))
    }
}

/// Stability of a named object, over each prime of the list.
pub fn stability_over_primes(ty: &WeightedType, name: &str, point: usize, primes: &[u64]) -> Result<StabilityReport, QuiverError> {
    let q = heart_quiver(ty)?;
    let l = lattice_for(ty)?;
    let spec = StabilitySpec::for_lattice(&l);
    let rep = named_object(ty, name, point)?;
    let mut verdicts = Vec::new();
    for &p in primes {
        let r = rep.reduce(p)?;
        verdicts.push(is_stable(&q, &r, &spec)?);
    }
    let consistent = verdicts.windows(2).all(|w| std::mem::discriminant(&w[0]) == std::mem::discriminant(&w[1]));
    Ok(StabilityReport { object: name.to_string(), dims: rep.dims.clone(), primes: primes.to_vec(), verdicts, consistent })
}

#[derive(Clone, Debug)]
pub struct HnFactor {
    pub rep: FpRep,
    pub key: Key,
}

/// Maximal destabilizing subrepresentation: maximal key, then maximal total
/// dimension. Its dimension vector must be realized by a unique subrep.
pub fn max_destabilizer(q: &QuiverWithRelations, rep: &FpRep, spec: &StabilitySpec) -> Result<Vec<FpSubspace>, QuiverError> {
    let subs = all_subreps(q, rep)?;
    let mut best: Option<(Vec<usize>, Key)> = None;
    for dv in subs.keys() {
        if dv.iter().all(|&x| x == 0) {
            continue;
        }
        let k = spec.key(dv)?;
        let better = match &best {
            None => true,
            Some((bd, bk)) => match k.cmp(bk) {
                Ordering::Greater => true,
                Ordering::Equal => dv.iter().sum::<usize>() > bd.iter().sum::<usize>() || (dv.iter().sum::<usize>() == bd.iter().sum::<usize>() && dv < bd),
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((dv.clone(), k));
        }
    }
    let (dv, bk) = best.ok_or_else(|| QuiverError::Malformed("zero representation".into()))?;
    // other subreps with the same key and total dimension signal a bug
    let total = dv.iter().sum::<usize>();
    let rivals: u128 = subs
        .iter()
        .filter(|(d, _)| d.iter().sum::<usize>() == total && d.iter().any(|&x| x > 0))
        .filter(|(d, _)| spec.key(d).map(|k| k.cmp(&bk) == Ordering::Equal).unwrap_or(false))
        .map(|(_, c)| *c)
        .sum();
    if rivals != 1 {
        return Err(QuiverError::Diagnostic(format!("{rivals} subrepresentations realize {dv:?}")));
    }
    find_subrep(q, rep, &dv).ok_or_else(|| QuiverError::Diagnostic(format!("no subrepresentation of dimension {dv:?}")))
}

/// Harder-Narasimhan factors, by repeated extraction of the maximal
/// destabilizer from successive quotients.
pub fn hn_filtration(q: &QuiverWithRelations, rep: &FpRep, spec: &StabilitySpec) -> Result<Vec<HnFactor>, QuiverError> {
    guard(rep)?;
    let mut rest = rep.clone();
    let mut out = Vec::new();
    while rest.total_dim() > 0 {
        let subs = max_destabilizer(q, &rest, spec)?;
        let factor = rest.restrict(q, &subs);
        let key = spec.key(&factor.dims)?;
        rest = rest.quotient(q, &subs);
        out.push(HnFactor { rep: factor, key });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HnCheck {
    pub factors: Vec<Vec<usize>>,
    pub keys: Vec<String>,
    pub telescopes: bool,
    pub semistable: bool,
    pub decreasing: bool,
}

impl HnCheck {
    pub fn ok(&self) -> bool {
        self.telescopes && self.semistable && self.decreasing
    }
}

/// HN filtration plus the oracle checks on its factors.
pub fn hn_checked(q: &QuiverWithRelations, rep: &FpRep, spec: &StabilitySpec) -> Result<HnCheck, QuiverError> {
    let factors = hn_filtration(q, rep, spec)?;
    let mut sum = vec![0usize; rep.dims.len()];
    let mut semistable = true;
    for f in &factors {
        for (s, d) in sum.iter_mut().zip(&f.rep.dims) {
            *s += d;
        }
        semistable &= f.rep.violated_relation(q).is_none() && is_stable(q, &f.rep, spec)?.is_semistable();
    }
    let decreasing = factors.windows(2).all(|w| w[0].key.cmp(&w[1].key) == Ordering::Greater);
    Ok(HnCheck {
        factors: factors.iter().map(|f| f.rep.dims.clone()).collect(),
        keys: factors.iter().map(|f| f.key.render()).collect(),
        telescopes: sum == rep.dims,
        semistable,
        decreasing,
    })
}

/// Weak seesaw: for every proper nonzero subrep S, the keys of S, E, E/S are
/// monotone in one direction.
pub fn seesaw_holds(q: &QuiverWithRelations, rep: &FpRep, spec: &StabilitySpec) -> Result<bool, QuiverError> {
    let subs = all_subreps(q, rep)?;
    if rep.total_dim() == 0 {
        return Ok(true);
    }
    let ke = spec.key(&rep.dims)?;
    for dv in subs.keys() {
        if dv.iter().all(|&x| x == 0) || *dv == rep.dims {
            continue;
        }
        let quo: Vec<usize> = rep.dims.iter().zip(dv).map(|(a, b)| a - b).collect();
        let (ks, kq) = (spec.key(dv)?, spec.key(&quo)?);
        let up = ks.cmp(&ke) != Ordering::Greater && ke.cmp(&kq) != Ordering::Greater;
        let down = ks.cmp(&ke) != Ordering::Less && ke.cmp(&kq) != Ordering::Less;
        if !(up || down) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A random representation over F_p satisfying the relations, with
/// dimensions at most `max_dim` per vertex and `max_total` overall.
pub fn random_rep<R: Rng>(q: &QuiverWithRelations, p: u64, max_dim: usize, max_total: usize, rng: &mut R) -> FpRep {
    let dims: Vec<usize> = loop {
        let d: Vec<usize> = (0..q.vertices.len()).map(|_| rng.gen_range(0..=max_dim)).collect();
        if d.iter().sum::<usize>() <= max_total {
            break d;
        }
    };
    let mut mats: Vec<FpMat> =
        q.arrows.iter().map(|a| (0..dims[a.target]).map(|_| (0..dims[a.source]).map(|_| rng.gen_range(0..p)).collect()).collect()).collect();
    // relations Σ c_t π X_t = 0: rows of π must kill N = Σ c_t X_t
    for rel in &q.relations {
        let pi = *rel.terms[0].1.last().unwrap();
        let (vs, vt) = (q.arrows[rel.terms[0].1[0]].source, q.arrows[pi].source);
        let mut n: FpMat = zero_mat(dims[vt], dims[vs], 0u64);
        for (c, path) in &rel.terms {
            let c = reduce_q(c, p).unwrap_or(0);
            for (i, row) in mats[path[0]].iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    n[i][j] = (n[i][j] + c * x) % p;
                }
            }
        }
        // left kernel of n: nullspace of nᵀ
        let mut nt: FpMat = (0..dims[vs]).map(|j| (0..dims[vt]).map(|i| n[i][j]).collect()).collect();
        let kernel = if nt.is_empty() {
            (0..dims[vt]).map(|i| (0..dims[vt]).map(|k| (k == i) as u64).collect()).collect()
        } else {
            nullspace_fp(&mut nt, dims[vt], p)
        };
        let rows = dims[q.arrows[pi].target];
        mats[pi] = (0..rows)
            .map(|_| {
                let mut r = vec![0u64; dims[vt]];
                for kv in &kernel {
                    let c = rng.gen_range(0..p);
                    for (x, y) in r.iter_mut().zip(kv) {
                        *x = (*x + c * y) % p;
                    }
                }
                r
            })
            .collect();
    }
    FpRep { p, dims, mats }
}

fn nullspace_fp(m: &mut FpMat, ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let pivots = rref_fp(m, p);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0u64; ncols];
            v[free] = 1;
            for (r, &pc) in m.iter().zip(&pivots) {
                v[pc] = md(-(r[free] as i128), p);
            }
            v
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuiverExtCheck {
    pub arrows_ok: bool,
    pub relations_ok: bool,
    pub coefficients_ok: bool,
    pub details: Vec<String>,
}

impl QuiverExtCheck {
    pub fn ok(&self) -> bool {
        self.arrows_ok && self.relations_ok && self.coefficients_ok
    }
}

/// Arrow counts against Ext^1, relation counts against Ext^2, and the
/// relation coefficient patterns against the Yoneda computation.
pub fn ext_quiver_consistency(ty: &WeightedType) -> Result<QuiverExtCheck, QuiverError> {
    let q = heart_quiver(ty)?;
    let pts = extcalc::fermat_points(ty)?;
    let c_vertices: Vec<(usize, i64)> = q
        .vertices
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.strip_prefix("C(").and_then(|s| s.strip_suffix(')')).map(|s| (i, s.parse::<i64>().unwrap())))
        .collect();
    let count_arrows = |s: usize, t: usize| q.arrows.iter().filter(|a| a.source == s && a.target == t).count();
    let count_rel = |s: usize, t: usize| {
        q.relations
            .iter()
            .filter(|r| q.arrows[r.terms[0].1[0]].source == s && q.arrows[*r.terms[0].1.last().unwrap()].target == t)
            .count()
    };
    let mut details = Vec::new();
    let (mut arrows_ok, mut relations_ok) = (true, true);
    for &(s, js) in &c_vertices {
        for &(t, jt) in &c_vertices {
            if js > jt {
                let e1 = extcalc::ext_cc(ty, js - jt, 1)?.dim;
                let e2 = extcalc::ext_cc(ty, js - jt, 2)?.dim;
                arrows_ok &= e1 == count_arrows(s, t);
                relations_ok &= e2 == count_rel(s, t);
                details.push(format!("C({js})->C({jt}): Ext1 {e1}, arrows {}; Ext2 {e2}", count_arrows(s, t)));
            }
        }
        for (j, p) in pts.iter().enumerate() {
            let t = q.vertex_index(&format!("p{}", j + 1)).unwrap();
            let e1 = extcalc::ext_cm(ty, js, p, 1)?.dim;
            let e2 = extcalc::ext_cm(ty, js, p, 2)?.dim;
            arrows_ok &= e1 == count_arrows(s, t);
            relations_ok &= e2 == count_rel(s, t);
            details.push(format!("C({js})->p{}: Ext1 {e1}, arrows {}; Ext2 {e2}, relations {}", j + 1, count_arrows(s, t), count_rel(s, t)));
        }
    }
    let y = extcalc::yoneda_relations(ty)?;
    let cc_ok = y.cc_lifts_are_chain_maps
        && y.cc.iter().all(|c| match c.term.as_str() {
            "x1⊗x2" => c.coeff == qi(1),
            "x2⊗x1" => c.coeff == qi(-1),
            _ => c.coeff.is_zero(),
        });
    // relations with a point: proportional to (p2, −p1), both in the Ext
    // computation and in the quiver
    let ext_ok = y.cm.iter().filter(|r| r.coeff_x1.is_some() && r.coeff_x2.is_some()).all(|r| r.scalar.is_some());
    let quiver_ok = q.relations.iter().enumerate().all(|(j, r)| {
        let pt = &q.points[j];
        r.terms.len() == 2 && r.terms[0].0 == pt.p2 && Some(-r.terms[1].0.clone()) == pt.p1
    });
    details.push(format!("x1⊗x2 − x2⊗x1 pattern: {cc_ok}; point relations ∝ (p2, −p1): ext {ext_ok}, quiver {quiver_ok}"));
    Ok(QuiverExtCheck { arrows_ok, relations_ok, coefficients_ok: cc_ok && ext_ok && quiver_ok, details })
}

/// JSON form {field, p?, dims: {vertex: n}, mats: {arrow: [[..]]}}.
pub fn rep_to_json(q: &QuiverWithRelations, dims: &[usize], mats: &[Vec<Vec<String>>], field: Field) -> serde_json::Value {
    let mut dm = serde_json::Map::new();
    for (v, d) in q.vertices.iter().zip(dims) {
        dm.insert(v.clone(), (*d).into());
    }
    let mut mm = serde_json::Map::new();
    for (a, m) in q.arrows.iter().zip(mats) {
        mm.insert(a.label.clone(), serde_json::to_value(m).unwrap());
    }
    let mut obj = serde_json::Map::new();
    match field {
        Field::Q => {
            obj.insert("field".into(), "Q".into());
        }
        Field::Fp(p) => {
            obj.insert("field".into(), "Fp".into());
            obj.insert("p".into(), p.into());
        }
    }
    obj.insert("dims".into(), dm.into());
    obj.insert("mats".into(), mm.into());
    obj.into()
}

impl QuiverRep {
    pub fn to_json(&self, q: &QuiverWithRelations) -> serde_json::Value {
        let mats: Vec<Vec<Vec<String>>> = self.mats.iter().map(|m| m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()).collect();
        rep_to_json(q, &self.dims, &mats, Field::Q)
    }
}

impl FpRep {
    pub fn to_json(&self, q: &QuiverWithRelations) -> serde_json::Value {
        let mats: Vec<Vec<Vec<String>>> = self.mats.iter().map(|m| m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()).collect();
        rep_to_json(q, &self.dims, &mats, Field::Fp(self.p))
    }
}

/// Parses the JSON form into a rational representation and its field.
pub fn rep_from_json(q: &QuiverWithRelations, v: &serde_json::Value) -> Result<(QuiverRep, Field), QuiverError> {
    let bad = |m: &str| QuiverError::Malformed(m.to_string());
    let field = match v.get("field").and_then(|f| f.as_str()) {
        Some("Q") => Field::Q,
        Some("Fp") => {
            let p = v.get("p").and_then(|p| p.as_u64()).ok_or_else(|| bad("missing p"))?;
            if !is_prime(p) {
                return Err(bad("p is not prime"));
            }
            Field::Fp(p)
        }
        _ => return Err(bad("field must be \"Q\" or \"Fp\"")),
    };
    let dims_obj = v.get("dims").and_then(|d| d.as_object()).ok_or_else(|| bad("missing dims"))?;
    let dims: Vec<usize> =
        q.vertices.iter().map(|name| dims_obj.get(name).and_then(|x| x.as_u64()).unwrap_or(0) as usize).collect();
    let mats_obj = v.get("mats").and_then(|m| m.as_object()).cloned().unwrap_or_default();
    let mut mats = Vec::new();
    for a in &q.arrows {
        let (r, c) = (dims[a.target], dims[a.source]);
        let m = match mats_obj.get(&a.label) {
            None => zero_mat(r, c, Q::zero()),
            Some(val) => {
                let rows = val.as_array().ok_or_else(|| bad("matrix must be an array"))?;
                if rows.len() != r {
                    return Err(bad(&format!("arrow {} needs {r} rows", a.label)));
                }
                rows.iter()
                    .map(|row| {
                        let row = row.as_array().ok_or_else(|| bad("row must be an array"))?;
                        if row.len() != c {
                            return Err(bad(&format!("arrow {} needs {c} columns", a.label)));
                        }
                        row.iter()
                            .map(|x| match x {
                                serde_json::Value::Number(n) => n.as_i64().map(qi).ok_or_else(|| bad("entries must be integers or strings")),
                                serde_json::Value::String(s) => crate::exactmath::parse_rational(s).map_err(|_| bad("bad rational")),
                                _ => Err(bad("bad entry")),
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        mats.push(m);
    }
    let rep = QuiverRep { dims, mats };
    // over F_p the caller checks relations after reduction
    if field == Field::Q {
        if let Some(i) = rep.violated_relation(q) {
            return Err(QuiverError::RelationViolated(i));
        }
    }
    Ok((rep, field))
}

/// The dimension vector as a lattice class.
pub fn class_of(dims: &[usize]) -> Vec<i64> {
    dims.iter().map(|&d| d as i64).collect()
}

/// Whether the rational numbers of a model point avoid p (good reduction).
pub fn good_prime(q: &QuiverWithRelations, p: u64) -> bool {
    let ok = |x: &Q| x.denom().to_i128().map_or(false, |d| md(d, p) != 0);
    let coords: Vec<Q> = q.points.iter().flat_map(|pt| pt.p1.iter().cloned().chain(std::iter::once(pt.p2.clone()))).collect();
    if !coords.iter().all(ok) {
        return false;
    }
    // distinct points stay distinct: 2×2 minors nonzero mod p
    for (i, a) in q.points.iter().enumerate() {
        for b in &q.points[i + 1..] {
            if let (Some(a1), Some(b1)) = (&a.p1, &b.p1) {
                let det = a1 * &b.p2 - b1 * &a.p2;
                let n = det.numer().to_i128().unwrap_or(0);
                if det.is_zero() || md(n, p) == 0 {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ty(s: &str) -> WeightedType {
        WeightedType::parse(s).unwrap()
    }

    const N2: [&str; 5] = ["1,1:3", "2,1:4", "3,2:6", "1,1:4", "3,1:6"];

    #[test]
    fn quiver_shapes() {
        let q = heart_quiver(&ty("1,1:3")).unwrap();
        assert_eq!(q.vertices, vec!["C(0)", "p1", "p2", "p3"]);
        assert_eq!(q.arrows.len(), 3);
        assert!(q.relations.is_empty());
        let q4 = heart_quiver(&ty("1,1:4")).unwrap();
        assert_eq!(q4.arrows.iter().filter(|a| a.label.starts_with('X')).count(), 2);
        assert_eq!(q4.relations.len(), 4);
        let q6 = heart_quiver(&ty("3,1:6")).unwrap();
        assert_eq!(q6.vertices.len(), 4);
        assert_eq!(q6.arrows.iter().map(|a| a.label.as_str()).collect::<Vec<_>>(), vec!["X2", "pi1", "pi2"]);
        assert!(q6.relations.is_empty());
        assert!(heart_quiver(&ty("1,1,1:3")).is_err());
    }

    #[test]
    fn named_dims_match_lattice() {
        for s in N2 {
            let t = ty(s);
            let l = hearts::build_lattice(&t).unwrap();
            let tau = named_object(&t, "tauPsiOx", 1).unwrap();
            let named = l.named_classes();
            let want = |lab: &str| named.iter().find(|c| c.label == lab).unwrap().class.clone();
            assert_eq!(class_of(&tau.dims), want("tauPsiO_x"), "{s}");
            if l.case_id == CaseId::PointsOnElliptic {
                assert_eq!(class_of(&named_object(&t, "C1m1", 0).unwrap().dims), want("C1m1"), "{s}");
            } else {
                assert_eq!(class_of(&named_object(&t, "C2m1", 0).unwrap().dims), want("C2m1"), "{s}");
            }
        }
        assert!(named_object(&ty("1,1:3"), "C2m1", 0).is_err());
        assert!(named_object(&ty("1,1:3"), "PsiOx", 9).is_err());
    }

    #[test]
    fn gaussian_counts() {
        assert_eq!(gaussian_binomial(2, 1, 5), 6);
        assert_eq!(subspace_count(3, 7), 1 + 57 + 57 + 1);
        for m in 0..4 {
            assert_eq!(all_subspaces(m, 3).len() as u128, subspace_count(m, 3));
        }
    }

    #[test]
    fn small_subrep_lattices() {
        let t = ty("1,1:3");
        let q = heart_quiver(&t).unwrap();
        let r = named_object(&t, "tauPsiOx", 2).unwrap().reduce(5).unwrap();
        let subs = all_subreps(&q, &r).unwrap();
        let keys: Vec<Vec<usize>> = subs.keys().cloned().collect();
        assert_eq!(keys, vec![vec![0, 0, 0, 0], vec![0, 0, 1, 0], vec![1, 0, 1, 0]]);
        // two copies of the simple at one vertex: p + 3 subspaces of F_p^2
        let two = FpRep { p: 5, dims: vec![0, 2, 0, 0], mats: q.arrows.iter().map(|a| zero_mat(if a.target == 1 { 2 } else { 0 }, 0, 0)).collect() };
        assert_eq!(all_subreps(&q, &two).unwrap().values().sum::<u128>(), 8);
        let zero = FpRep { p: 5, dims: vec![0; 4], mats: q.arrows.iter().map(|_| Vec::new()).collect() };
        assert_eq!(all_subreps(&q, &zero).unwrap().len(), 1);
    }

    #[test]
    fn counts_agree_with_explicit_enumeration() {
        let t = ty("1,1:4");
        let q = heart_quiver(&t).unwrap();
        let r = named_object(&t, "C2m1", 0).unwrap().reduce(5).unwrap();
        let fast = all_subreps(&q, &r).unwrap();
        let slow = enumerate_subreps(&q, &r).unwrap();
        assert_eq!(fast.values().sum::<u128>(), slow.len() as u128);
        for subs in &slow {
            let dv: Vec<usize> = subs.iter().map(|s| s.dim()).collect();
            assert!(fast.contains_key(&dv));
            let sub = r.restrict(&q, subs);
            assert!(sub.violated_relation(&q).is_none());
        }
    }

    #[test]
    fn named_objects_are_stable() {
        for s in N2 {
            let t = ty(s);
            let k = model_points(&t).unwrap().len();
            for x in 1..=k {
                let rep = stability_over_primes(&t, "tauPsiOx", x, &[5, 7]).unwrap();
                assert!(rep.stable(), "{s} tauPsiOx({x}): {:?}", rep.verdicts);
            }
            let rep = stability_over_primes(&t, "C1m1", 0, &[5, 7]).unwrap();
            assert!(rep.stable(), "{s}");
        }
        for s in ["1,1:4", "3,1:6"] {
            let rep = stability_over_primes(&ty(s), "C2m1", 0, &[5, 7, 11]).unwrap();
            assert!(rep.stable(), "{s} {:?}", rep.verdicts);
        }
        let r = stability_over_primes(&ty("1,1:3"), "C1m1", 0, &[5, 7]).unwrap();
        assert_eq!(r.summary(), "stable (verified over F_5, F_7)");
    }

    #[test]
    fn direct_sum_is_unstable_with_two_hn_factors() {
        let t = ty("1,1:3");
        let q = heart_quiver(&t).unwrap();
        let l = hearts::build_lattice(&t).unwrap();
        let spec = StabilitySpec::for_lattice(&l);
        let tau = named_object(&t, "tauPsiOx", 1).unwrap();
        // τΨO_{p1} ⊕ ΨO_{p2}
        let mut sum = tau.clone();
        sum.dims[2] = 1;
        sum.mats = q.arrows.iter().map(|a| zero_mat(sum.dims[a.target], sum.dims[a.source], Q::zero())).collect();
        sum.mats[0] = vec![vec![Q::one()]];
        let r = sum.reduce(5).unwrap();
        assert!(matches!(is_stable(&q, &r, &spec).unwrap(), Verdict::Unstable { .. }));
        let hn = hn_checked(&q, &r, &spec).unwrap();
        assert!(hn.ok());
        assert_eq!(hn.factors.len(), 2);
        // HN factors come in decreasing phase
        let phases = phase_values(&l, &hn.factors);
        assert!(phases[0] > phases[1]);
    }

    fn phase_values(l: &CaseLattice, factors: &[Vec<usize>]) -> Vec<f64> {
        let spec = StabilitySpec::for_lattice(l);
        factors.iter().map(|f| match spec.key(f).unwrap() {
            Key::Phase(p) => p.value,
            _ => unreachable!(),
        }).collect()
    }

    #[test]
    fn random_reps_hn_and_seesaw() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for s in N2 {
            let t = ty(s);
            let q = heart_quiver(&t).unwrap();
            let spec = StabilitySpec::for_lattice(&hearts::build_lattice(&t).unwrap());
            for _ in 0..15 {
                let r = random_rep(&q, 5, 3, MAX_TOTAL_DIM, &mut rng);
                assert!(r.violated_relation(&q).is_none());
                let hn = hn_checked(&q, &r, &spec).unwrap();
                assert!(hn.ok(), "{s} {:?} {:?}", r.dims, hn);
                assert!(seesaw_holds(&q, &r, &spec).unwrap());
            }
        }
    }

    #[test]
    fn ext_consistency() {
        for s in N2 {
            let c = ext_quiver_consistency(&ty(s)).unwrap();
            assert!(c.ok(), "{s}: {:?}", c.details);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = ty("1,1:4");
        let q = heart_quiver(&t).unwrap();
        let rep = named_object(&t, "C2m1", 0).unwrap();
        let (back, f) = rep_from_json(&q, &rep.to_json(&q)).unwrap();
        assert_eq!(back, rep);
        assert_eq!(f, Field::Q);
        let bad = serde_json::json!({"field": "Fp", "p": 4, "dims": {}});
        assert!(rep_from_json(&q, &bad).is_err());
    }

    #[test]
    fn guards() {
        let t = ty("1,1:3");
        let q = heart_quiver(&t).unwrap();
        let big = FpRep { p: 5, dims: vec![7, 4, 4, 4], mats: q.arrows.iter().map(|_| zero_mat(4, 7, 0)).collect() };
        assert!(matches!(all_subreps(&q, &big), Err(QuiverError::ResourceLimit(_))));
        assert!(good_prime(&heart_quiver(&ty("1,1:4")).unwrap(), 5));
        assert!(!good_prime(&heart_quiver(&ty("1,1:4")).unwrap(), 2));
    }
}
