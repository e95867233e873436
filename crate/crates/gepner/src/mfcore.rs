//! Graded matrix factorizations over weighted polynomial rings.
//!
//! A generator of `A(n)` has degree `-n`, so a map `A(n) → A(m)` is a
//! polynomial of weighted degree `m - n`.  The supertrace puts weight ζ^n on
//! each summand `A(n)`, positive on `P0` and negative on `P1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactmath::{cyclo, CycloNum, Q};
use crate::poly::{Poly, PolyError};
use num_traits::One;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MfError {
    #[error("bad weighted type {0:?}: {1}")]
    BadType(String, String),
    #[error("matrix factorization has no maps")]
    MissingMaps,
    #[error("map matrix has shape {got:?}, expected {want:?}")]
    BadShape { got: (usize, usize), want: (usize, usize) },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Weight system (a_1 ≥ … ≥ a_n; d) with ε = Σa_i − d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightedType {
    pub weights: Vec<u32>,
    pub degree: u32,
    pub epsilon: i64,
    pub fermat_exponents: Option<Vec<u32>>,
}

impl WeightedType {
    pub fn new(mut weights: Vec<u32>, degree: u32) -> Result<Self, MfError> {
        let label = format!("{weights:?}:{degree}");
        if weights.is_empty() || weights.contains(&0) || degree == 0 {
            return Err(MfError::BadType(label, "weights and degree must be positive".into()));
        }
        weights.sort_unstable_by(|a, b| b.cmp(a));
        let epsilon = weights.iter().map(|&a| a as i64).sum::<i64>() - degree as i64;
        let fermat_exponents = if weights.iter().all(|&a| degree % a == 0 && degree / a >= 2) {
            Some(weights.iter().map(|&a| degree / a).collect())
        } else {
            None
        };
        Ok(WeightedType { weights, degree, epsilon, fermat_exponents })
    }

    /// Parses `a1,…,an:d`.
    pub fn parse(s: &str) -> Result<Self, MfError> {
        let bad = |m: &str| MfError::BadType(s.to_string(), m.to_string());
        let (w, d) = s.split_once(':').ok_or_else(|| bad("expected a1,...,an:d"))?;
        let weights = w
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad("weights must be positive integers")))
            .collect::<Result<Vec<_>, _>>()?;
        let degree = d.trim().parse::<u32>().map_err(|_| bad("degree must be a positive integer"))?;
        Self::new(weights, degree)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn is_fermat(&self) -> bool {
        self.fermat_exponents.is_some()
    }

    /// The Fermat polynomial Σ x_i^{d/a_i}.
    pub fn fermat_w(&self) -> Option<Poly> {
        let ex = self.fermat_exponents.as_ref()?;
        let n = self.n();
        let mut w = Poly::zero(n);
        for (i, &k) in ex.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = k;
            w = &w + &Poly::monomial(e, Q::one());
        }
        Some(w)
    }

    pub fn label(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|a| a.to_string()).collect();
        format!("{}:{}", w.join(","), self.degree)
    }
}

impl fmt::Display for WeightedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|a| a.to_string()).collect();
        write!(f, "({};{})", w.join(","), self.degree)
    }
}

/// ⊕ A(n) over the multiset of shifts.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GradedFreeModule {
    pub shifts: Vec<i64>,
}

impl GradedFreeModule {
    pub fn new(shifts: Vec<i64>) -> Self {
        GradedFreeModule { shifts }
    }
    pub fn rank(&self) -> usize {
        self.shifts.len()
    }
    pub fn twist(&self, k: i64) -> Self {
        GradedFreeModule { shifts: self.shifts.iter().map(|s| s + k).collect() }
    }
}

/// Polynomial matrix, rows indexed by the target module.
pub type PolyMatrix = Vec<Vec<Poly>>;

#[derive(Clone, Debug, PartialEq)]
pub struct GradedMF {
    pub ty: WeightedType,
    pub w: Poly,
    pub p0: GradedFreeModule,
    pub p1: GradedFreeModule,
    /// (p0: P0 → P1, p1: P1 → P0(d)).
    pub maps: Option<(PolyMatrix, PolyMatrix)>,
}

/// Signed multiset of shifts; Z_G factors through it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KClassMF {
    pub positive: Vec<i64>,
    pub negative: Vec<i64>,
}

impl KClassMF {
    pub fn zg(&self, d: u32) -> CycloNum {
        let mut z = CycloNum::zero(d);
        for &n in &self.positive {
            z = &z + &cyclo(d, n);
        }
        for &n in &self.negative {
            z = &z - &cyclo(d, n);
        }
        z
    }
}

impl GradedMF {
    /// Shift data only; W defaults to the Fermat polynomial when one exists.
    pub fn from_shifts(ty: WeightedType, p0: Vec<i64>, p1: Vec<i64>) -> Self {
        let w = ty.fermat_w().unwrap_or_else(|| Poly::zero(ty.n()));
        GradedMF { ty, w, p0: GradedFreeModule::new(p0), p1: GradedFreeModule::new(p1), maps: None }
    }

    pub fn with_maps(mut self, w: Poly, p0: PolyMatrix, p1: PolyMatrix) -> Result<Self, MfError> {
        let want0 = (self.p1.rank(), self.p0.rank());
        let want1 = (self.p0.rank(), self.p1.rank());
        let shape = |m: &PolyMatrix| (m.len(), m.first().map_or(0, |r| r.len()));
        if shape(&p0) != want0 && !(want0.0 == 0 || want0.1 == 0) {
            return Err(MfError::BadShape { got: shape(&p0), want: want0 });
        }
        if shape(&p1) != want1 && !(want1.0 == 0 || want1.1 == 0) {
            return Err(MfError::BadShape { got: shape(&p1), want: want1 });
        }
        self.w = w;
        self.maps = Some((p0, p1));
        Ok(self)
    }

    pub fn class(&self) -> KClassMF {
        KClassMF { positive: self.p0.shifts.clone(), negative: self.p1.shifts.clone() }
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.p0.rank(), self.p1.rank())
    }
}

/// Σ_{A(n)⊂P0} ζ^n − Σ_{A(n)⊂P1} ζ^n.
pub fn zg(mf: &GradedMF) -> CycloNum {
    mf.class().zg(mf.ty.degree)
}

/// Grade shift by k: every A(n) becomes A(n+k).
pub fn tau(mf: &GradedMF, k: i64) -> GradedMF {
    GradedMF { p0: mf.p0.twist(k), p1: mf.p1.twist(k), ..mf.clone() }
}

fn neg_matrix(m: &PolyMatrix) -> PolyMatrix {
    m.iter().map(|r| r.iter().map(|p| -p).collect()).collect()
}

fn shift_once(mf: &GradedMF) -> GradedMF {
    let d = mf.ty.degree as i64;
    GradedMF {
        ty: mf.ty.clone(),
        w: mf.w.clone(),
        p0: mf.p1.clone(),
        p1: mf.p0.twist(d),
        maps: mf.maps.as_ref().map(|(a, b)| (neg_matrix(b), neg_matrix(a))),
    }
}

fn unshift_once(mf: &GradedMF) -> GradedMF {
    let d = mf.ty.degree as i64;
    GradedMF {
        ty: mf.ty.clone(),
        w: mf.w.clone(),
        p0: mf.p1.twist(-d),
        p1: mf.p0.clone(),
        maps: mf.maps.as_ref().map(|(a, b)| (neg_matrix(b), neg_matrix(a))),
    }
}

/// Homological shift [k]; [1] sends (P0, P1) to (P1, P0(d)) with negated maps.
pub fn shift(mf: &GradedMF, k: i64) -> GradedMF {
    let mut out = mf.clone();
    for _ in 0..k.unsigned_abs() {
        out = if k > 0 { shift_once(&out) } else { unshift_once(&out) };
    }
    out
}

/// Shift data of the Koszul factorization C(j): wedge x_S with |S| = 2k+1
/// (into P0) or 2k (into P1) sits in A(dk + j − Σ_{i∈S} a_i).
pub fn koszul_c(ty: &WeightedType, j: i64) -> GradedMF {
    let n = ty.n();
    let d = ty.degree as i64;
    let (mut p0, mut p1) = (Vec::new(), Vec::new());
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as i64;
        let sum: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ty.weights[i] as i64).sum();
        let k = size / 2;
        let s = d * k + j - sum;
        if size % 2 == 1 {
            p0.push(s);
        } else {
            p1.push(s);
        }
    }
    p0.sort_unstable();
    p1.sort_unstable();
    GradedMF::from_shifts(ty.clone(), p0, p1)
}

/// Q_{j,l} = {A(j−l) →x^l A(j) →x^{d−l} A(j−l+d)} for W = x^d.
pub fn q_jl(d: u32, j: i64, l: u32) -> GradedMF {
    let ty = WeightedType::new(vec![1], d).expect("valid type");
    let x = |k: u32| Poly::monomial(vec![k], Q::one());
    let w = x(d);
    GradedMF::from_shifts(ty, vec![j - l as i64], vec![j])
        .with_maps(w, vec![vec![x(l)]], vec![vec![x(d - l)]])
        .expect("1x1 maps")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    Inhomogeneous { map: usize, row: usize, col: usize, degrees: Vec<i64> },
    WrongDegree { map: usize, row: usize, col: usize, expected: i64, found: i64 },
    Composition { which: String, row: usize, col: usize, residual: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Inhomogeneous { map, row, col, degrees } => {
                write!(f, "p{map}[{row},{col}] is not homogeneous (degrees {degrees:?})")
            }
            Violation::WrongDegree { map, row, col, expected, found } => {
                write!(f, "p{map}[{row},{col}] has degree {found}, expected {expected}")
            }
            Violation::Composition { which, row, col, residual } => {
                write!(f, "{which}[{row},{col}] differs from W·id by {residual}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn matmul(a: &PolyMatrix, b: &PolyMatrix, nvars: usize) -> PolyMatrix {
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let mut acc = Poly::zero(nvars);
                    for k in 0..inner {
                        acc = &acc + &(&a[r][k] * &b[k][c]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Checks homogeneity of every entry and p1∘p0 = W·id, p0(d)∘p1 = W·id.
pub fn validate(mf: &GradedMF) -> Result<ValidationReport, MfError> {
    let (m0, m1) = mf.maps.as_ref().ok_or(MfError::MissingMaps)?;
    let wts = &mf.ty.weights;
    let d = mf.ty.degree as i64;
    let mut violations = Vec::new();
    let mut check = |map: usize, m: &PolyMatrix, expected: &dyn Fn(usize, usize) -> i64| {
        for (r, row) in m.iter().enumerate() {
            for (c, p) in row.iter().enumerate() {
                match p.homogeneous_degree(wts) {
                    Ok(None) => {}
                    Ok(Some(deg)) => {
                        let want = expected(r, c);
                        if deg != want {
                            violations.push(Violation::WrongDegree { map, row: r, col: c, expected: want, found: deg });
                        }
                    }
                    Err(degrees) => violations.push(Violation::Inhomogeneous { map, row: r, col: c, degrees }),
                }
            }
        }
    };
    check(0, m0, &|r, c| mf.p1.shifts[r] - mf.p0.shifts[c]);
    check(1, m1, &|r, c| mf.p0.shifts[r] + d - mf.p1.shifts[c]);
    let nv = mf.ty.n();
    for (which, prod, size) in [
        ("p1∘p0", matmul(m1, m0, nv), mf.p0.rank()),
        ("p0(d)∘p1", matmul(m0, m1, nv), mf.p1.rank()),
    ] {
        for r in 0..size {
            for c in 0..size {
                let got = prod.get(r).and_then(|row| row.get(c)).cloned().unwrap_or_else(|| Poly::zero(nv));
                let want = if r == c { mf.w.clone() } else { Poly::zero(nv) };
                let residual = &got - &want;
                if !residual.is_zero() {
                    violations.push(Violation::Composition {
                        which: which.to_string(),
                        row: r,
                        col: c,
                        residual: residual.to_string(),
                    });
                }
            }
        }
    }
    Ok(ValidationReport { violations })
}

// JSON form: {type:{weights,degree}, p0_shifts, p1_shifts, W?, maps?:[[[..]],[[..]]]}

#[derive(Serialize, Deserialize)]
struct TypeJson {
    weights: Vec<u32>,
    degree: u32,
}

#[derive(Serialize, Deserialize)]
struct MfJson {
    #[serde(rename = "type")]
    ty: TypeJson,
    p0_shifts: Vec<i64>,
    p1_shifts: Vec<i64>,
    #[serde(rename = "W", skip_serializing_if = "Option::is_none", default)]
    w: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    maps: Option<Vec<Vec<Vec<String>>>>,
}

impl GradedMF {
    pub fn to_json(&self) -> serde_json::Value {
        let strs = |m: &PolyMatrix| m.iter().map(|r| r.iter().map(|p| p.to_string()).collect()).collect();
        let j = MfJson {
            ty: TypeJson { weights: self.ty.weights.clone(), degree: self.ty.degree },
            p0_shifts: self.p0.shifts.clone(),
            p1_shifts: self.p1.shifts.clone(),
            w: if self.w.is_zero() { None } else { Some(self.w.to_string()) },
            maps: self.maps.as_ref().map(|(a, b)| vec![strs(a), strs(b)]),
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, MfError> {
        let j: MfJson = serde_json::from_value(v.clone())
            .map_err(|e| MfError::BadType(v.to_string(), e.to_string()))?;
        let ty = WeightedType::new(j.ty.weights, j.ty.degree)?;
        let n = ty.n();
        let mut mf = GradedMF::from_shifts(ty, j.p0_shifts, j.p1_shifts);
        if let Some(ws) = j.w {
            mf.w = Poly::parse(&ws, n)?;
        }
        if let Some(maps) = j.maps {
            if maps.len() != 2 {
                return Err(MfError::BadShape { got: (maps.len(), 0), want: (2, 0) });
            }
            let parse = |m: &Vec<Vec<String>>| -> Result<PolyMatrix, MfError> {
                m.iter()
                    .map(|r| r.iter().map(|s| Poly::parse(s, n).map_err(MfError::from)).collect())
                    .collect()
            };
            let (a, b) = (parse(&maps[0])?, parse(&maps[1])?);
            let w = mf.w.clone();
            mf = mf.with_maps(w, a, b)?;
        }
        Ok(mf)
    }
}

/// −∏_j (1 − ζ^{−a_j}), the closed form of Z_G(C(0)).
pub fn koszul_closed_form(ty: &WeightedType) -> CycloNum {
    let d = ty.degree;
    let mut acc = CycloNum::from_int(d, -1);
    for &a in &ty.weights {
        acc = &acc * &(&CycloNum::one(d) - &cyclo(d, -(a as i64)));
    }
    acc
}

pub fn is_zero_class(mf: &GradedMF) -> bool {
    zg(mf).is_zero() && mf.p0.shifts.is_empty() && mf.p1.shifts.is_empty()
}
