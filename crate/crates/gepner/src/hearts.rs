//! Numerical K-theory lattices of the five hearts, with the charge
//! functional, the grade shift action, slopes and phase bookkeeping.
//!
//! `tau_mat[i][j]` is the i-th coordinate of τ(e_j); classes are integer
//! column vectors. Charges are stored in units of C_W.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::classify::{self, Geometry};
use crate::exactmath::{cyclo, embed, phase_of, q, qi, rational_to_f64, CycloNum, ExactError, Phase, RationalPhase, Q};
use crate::geomcharge::{self, ChClass, GeomModel};
use crate::mfcore::{koszul_c, q_jl, shift, zg, WeightedType};
use crate::poly::monomials_of_degree;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum HeartError {
    #[error("type {0} is not one of the five supported cases")]
    UnsupportedCase(String),
    #[error("charge is not compatible with τ on basis vectors {0:?}")]
    GepnerIdentityFailure(Vec<usize>),
    #[error(transparent)]
    Geom(#[from] geomcharge::GeomError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CaseId {
    #[serde(rename = "(3,0)")]
    Elliptic,
    #[serde(rename = "(2,-1)")]
    PointsOnElliptic,
    #[serde(rename = "(4,0)")]
    K3,
    #[serde(rename = "(3,-1)")]
    CurveInK3,
    #[serde(rename = "(2,-2)")]
    PointsInK3,
}

impl CaseId {
    pub fn n_eps(self) -> (usize, i64) {
        match self {
            CaseId::Elliptic => (3, 0),
            CaseId::PointsOnElliptic => (2, -1),
            CaseId::K3 => (4, 0),
            CaseId::CurveInK3 => (3, -1),
            CaseId::PointsInK3 => (2, -2),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, e) = self.n_eps();
        write!(f, "({n},{e})")
    }
}

/// Slope value; the actual slope is the rational part times √radicand.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlopeValue {
    NegInf,
    Finite(Q),
    PosInf,
}

impl SlopeValue {
    pub fn is_positive(&self) -> bool {
        match self {
            SlopeValue::NegInf => false,
            SlopeValue::Finite(x) => x.is_positive(),
            SlopeValue::PosInf => true,
        }
    }
}

impl fmt::Display for SlopeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlopeValue::NegInf => write!(f, "-inf"),
            SlopeValue::Finite(x) => write!(f, "{x}"),
            SlopeValue::PosInf => write!(f, "+inf"),
        }
    }
}

/// μ = √radicand · (num·v)/(den·v), or a constant.
#[derive(Clone, Debug, PartialEq)]
pub enum Slope {
    Constant(Q),
    Ratio { num: Vec<Q>, den: Vec<Q>, radicand: Q, at_zero: SlopeValue },
}

impl Slope {
    pub fn eval(&self, v: &[i64]) -> SlopeValue {
        match self {
            Slope::Constant(c) => SlopeValue::Finite(c.clone()),
            Slope::Ratio { num, den, at_zero, .. } => {
                let dot = |f: &[Q]| f.iter().zip(v).map(|(a, &b)| a * qi(b)).sum::<Q>();
                let dn = dot(den);
                if dn.is_zero() {
                    at_zero.clone()
                } else {
                    SlopeValue::Finite(dot(num) / dn)
                }
            }
        }
    }

    pub fn radicand(&self) -> Q {
        match self {
            Slope::Constant(_) => Q::one(),
            Slope::Ratio { radicand, .. } => radicand.clone(),
        }
    }

    pub fn render(&self, s: &SlopeValue) -> String {
        let r = self.radicand();
        match s {
            SlopeValue::Finite(x) if !r.is_one() && !x.is_zero() => format!("{x}*sqrt({r})"),
            _ => s.to_string(),
        }
    }
}

/// An object of the heart A_W given by its class, with a name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedClass {
    pub label: String,
    pub class: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct CaseLattice {
    pub case_id: CaseId,
    pub ty: WeightedType,
    pub labels: Vec<String>,
    pub zg_row: Vec<CycloNum>,
    pub tau_mat: Vec<Vec<i64>>,
    pub slope: Slope,
    pub theta: RationalPhase,
    pub theta_w: RationalPhase,
    pub c_w: CycloNum,
    pub geometry: Geometry,
}

/// dim_k of R = A/(W), using that W is a nonzerodivisor of degree d.
pub fn dim_r(ty: &WeightedType, k: i64) -> i64 {
    monomials_of_degree(&ty.weights, k).len() as i64 - monomials_of_degree(&ty.weights, k - ty.degree as i64).len() as i64
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}

fn columns_to_mat(cols: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let n = cols.len();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn case_of(ty: &WeightedType) -> Option<CaseId> {
    classify::geometry(ty)?;
    Some(match (ty.n(), ty.epsilon) {
        (3, 0) => CaseId::Elliptic,
        (2, -1) => CaseId::PointsOnElliptic,
        (4, 0) => CaseId::K3,
        (3, -1) => CaseId::CurveInK3,
        (2, -2) => CaseId::PointsInK3,
        _ => return None,
    })
}

pub fn build_lattice(ty: &WeightedType) -> Result<CaseLattice, HeartError> {
    let case_id = case_of(ty).ok_or_else(|| HeartError::UnsupportedCase(ty.to_string()))?;
    let geometry = classify::geometry(ty).expect("checked by case_of");
    let d = ty.degree;
    let model = GeomModel::new(ty)?;
    let consts = model.consts.clone();
    let z = cyclo(d, 1);
    let one_minus_z = &CycloNum::one(d) - &z;
    let pt = CycloNum::from_int(d, -1);
    let h = geometry.hyperplane_self_intersection().to_integer().try_into().unwrap_or(0i64);
    let cosd = (&(&z + &cyclo(d, -1)).scale(&q(1, 2))).as_rational();

    let (labels, zg_row, cols, slope, theta): (Vec<String>, Vec<CycloNum>, Vec<Vec<i64>>, Slope, Q) = match case_id {
        CaseId::Elliptic => {
            let labels = vec!["r".into(), "deg".into()];
            let zg_row = vec![&z - &CycloNum::one(d), pt];
            // F_* = e^H ch − χ(ch(1))·1 on (r, deg)
            let cols = vec![vec![1 - h, h], vec![-1, 1]];
            (labels, zg_row, cols, Slope::Constant(qi(-1)), consts.theta_w.clone())
        }
        CaseId::K3 => {
            // untwisted Mukai coordinates (v0, c, s): ch = (v0, c·H, (s − v0)·pt)
            let m = h / 2;
            let labels = vec!["v0".into(), "c".into(), "s".into()];
            let basis_ch = [(1, 0, -1), (0, 1, 0), (0, 0, 1)];
            let zg_row = basis_ch
                .iter()
                .map(|&(r, c, s)| geomcharge::zg_dag(&ChClass::k3(h as u32, qi(r), qi(c), qi(s)), &model.sol))
                .collect::<Result<Vec<_>, _>>()?;
            // (r, c, s) ↦ v·e^H = (r, c + r, s + 2mc + mr) then ST_O: (−s', c', −r')
            let tau = |r: i64, c: i64, s: i64| {
                let (r1, c1, s1) = (r, c + r, s + 2 * m * c + m * r);
                vec![-s1, c1, -r1]
            };
            let cols = vec![tau(1, 0, 0), tau(0, 1, 0), tau(0, 0, 1)];
            let slope = Slope::Ratio {
                num: vec![q(h, 2), qi(h), qi(0)],
                den: vec![qi(1), qi(0), qi(0)],
                radicand: Q::one(),
                at_zero: SlopeValue::PosInf,
            };
            (labels, zg_row, cols, slope, &consts.theta_w - qi(1))
        }
        CaseId::PointsOnElliptic => {
            let k = h as usize;
            let mut labels = vec!["C(0)".to_string()];
            labels.extend((1..=k).map(|j| format!("PsiO_p{j}")));
            let mut zg_row = vec![one_minus_z.clone()];
            zg_row.extend(std::iter::repeat(pt).take(k));
            let r1 = dim_r(ty, 1);
            let mut cols = Vec::new();
            // τ[C(0)] = [C(1)] = −(dim R_1·[C(0)] + Σ_j [ΨO_p_j])
            let mut c1 = vec![-r1];
            c1.extend(std::iter::repeat(-1).take(k));
            cols.push(c1);
            for j in 1..=k {
                let mut c = unit(k + 1, j);
                c[0] += 1;
                cols.push(c);
            }
            (labels, zg_row, cols, Slope::Constant(qi(-1)), q(5, 6) + &consts.theta_w)
        }
        CaseId::PointsInK3 => {
            let k = h as usize;
            let mut labels = vec!["C(1)".to_string(), "C(0)".to_string()];
            labels.extend((1..=k).map(|j| format!("PsiO_p{j}")));
            let mut zg_row = vec![&z * &one_minus_z, one_minus_z.clone()];
            zg_row.extend(std::iter::repeat(pt).take(k));
            let (r1, r2) = (dim_r(ty, 1), dim_r(ty, 2));
            let mut c2 = vec![-r1, -r2];
            c2.extend(std::iter::repeat(-1).take(k));
            let mut cols = vec![c2, unit(k + 2, 0)];
            for j in 0..k {
                let mut c = unit(k + 2, j + 2);
                c[1] += 1;
                cols.push(c);
            }
            let one_minus_cos = Q::one() - cosd.clone().expect("rational cosine for d ∈ {4, 6}");
            let mut num = vec![qi(1), one_minus_cos];
            num.extend(std::iter::repeat(qi(-1)).take(k));
            let mut den = vec![qi(0), qi(0)];
            den.extend(std::iter::repeat(qi(1)).take(k));
            let slope = Slope::Ratio { num, den, radicand: Q::one(), at_zero: SlopeValue::PosInf };
            (labels, zg_row, cols, slope, &consts.theta_w + q(1, 2))
        }
        CaseId::CurveInK3 => {
            let labels = vec!["C(0)".into(), "PsiO_X".into(), "PsiO_pt".into()];
            let g = match geometry {
                Geometry::Curve { genus, .. } => genus as i64,
                _ => unreachable!(),
            };
            let zg_ox = geomcharge::zg_dag(&ChClass::curve(g as u32, h as u32, qi(1), qi(0)), &model.sol)?;
            let zg_row = vec![one_minus_z.clone(), zg_ox, pt];
            let r1 = dim_r(ty, 1);
            // τ[C(0)] = −(dim R_1·[C(0)] + [Ψω_X]), ω_X = O_X(1) of degree ∫H
            // τ[ΨF] = [ΨF(1)] + χ(F(1))·[C(0)]
            let chi_o1 = h + 1 - g;
            let cols = vec![vec![-r1, -1, -h], vec![chi_o1, 1, h], vec![1, 0, 1]];
            // μ = −Im Z^†/R = √(Ĥ²d)/2·(1/2 − r/R)
            let rad = q(h * d as i64, 4);
            let (num_scale, radicand) = perfect_square_split(&rad);
            let slope = Slope::Ratio {
                num: vec![num_scale.clone(), -&num_scale * qi(2), qi(0)],
                den: vec![qi(2), qi(0), qi(0)],
                radicand,
                at_zero: SlopeValue::NegInf,
            };
            (labels, zg_row, cols, slope, consts.theta_w.clone())
        }
    };
    let lat = CaseLattice {
        case_id,
        ty: ty.clone(),
        labels,
        zg_row,
        tau_mat: columns_to_mat(cols),
        slope,
        theta,
        theta_w: consts.theta_w,
        c_w: consts.c_w,
        geometry,
    };
    let bad = lat.gepner_failures();
    if !bad.is_empty() {
        return Err(HeartError::GepnerIdentityFailure(bad));
    }
    Ok(lat)
}

/// Writes x = s²·t with t squarefree over the integers (x a positive
/// integer or integer/4); returns (s, t).
fn perfect_square_split(x: &Q) -> (Q, Q) {
    let num = x.numer().clone();
    let den = x.denom().clone();
    let split = |n: &num_bigint::BigInt| {
        let mut s = num_bigint::BigInt::one();
        let mut t = n.clone();
        let mut p = num_bigint::BigInt::from(2);
        while &p * &p <= t {
            while (&t % (&p * &p)).is_zero() {
                t /= &p * &p;
                s *= &p;
            }
            p += 1;
        }
        (s, t)
    };
    let (sn, tn) = split(&(num * &den));
    // √(n/m) = √(n·m)/m
    (Q::new(sn, den), Q::from_integer(tn))
}

impl CaseLattice {
    pub fn rank(&self) -> usize {
        self.zg_row.len()
    }

    pub fn d(&self) -> u32 {
        self.ty.degree
    }

    pub fn zg_class(&self, v: &[i64]) -> CycloNum {
        v.iter().zip(&self.zg_row).fold(CycloNum::zero(self.d()), |acc, (&c, z)| &acc + &z.scale(&qi(c)))
    }

    /// Z_G itself, C_W·Z^†.
    pub fn zg_full(&self, v: &[i64]) -> CycloNum {
        &self.c_w * &self.zg_class(v)
    }

    pub fn tau_apply(&self, v: &[i64]) -> Vec<i64> {
        self.tau_mat.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn tau_pow(&self, v: &[i64], k: usize) -> Vec<i64> {
        (0..k).fold(v.to_vec(), |acc, _| self.tau_apply(&acc))
    }

    /// Basis indices where Z^†(τ e_j) ≠ ζ Z^†(e_j).
    pub fn gepner_failures(&self) -> Vec<usize> {
        let z = cyclo(self.d(), 1);
        (0..self.rank())
            .filter(|&j| {
                let col: Vec<i64> = self.tau_mat.iter().map(|r| r[j]).collect();
                self.zg_class(&col) != &z * &self.zg_row[j]
            })
            .collect()
    }

    pub fn verify_gepner(&self) -> bool {
        self.gepner_failures().is_empty()
    }

    /// Lattice Serre map (−1)^{n−2} τ^{−ε}.
    pub fn serre_mat(&self) -> Vec<Vec<i64>> {
        let n = self.rank();
        let sign = if self.ty.n() % 2 == 0 { 1 } else { -1 };
        let cols: Vec<Vec<i64>> =
            (0..n).map(|j| self.tau_pow(&unit(n, j), (-self.ty.epsilon) as usize).iter().map(|x| sign * x).collect()).collect();
        columns_to_mat(cols)
    }

    pub fn slope_mu(&self, v: &[i64]) -> SlopeValue {
        self.slope.eval(v)
    }

    /// Basis vector of the first point, when the case has point vertices.
    fn point_index(&self) -> Option<usize> {
        self.labels.iter().position(|l| l.starts_with("PsiO_p"))
    }

    /// Class of C(j) for 0 ≤ j ≤ −ε, as produced by τ from C(0).
    pub fn c_class(&self, j: usize) -> Option<Vec<i64>> {
        let c0 = self.labels.iter().position(|l| l == "C(0)")?;
        Some(self.tau_pow(&unit(self.rank(), c0), j))
    }

    /// Named objects of A_W used for window and stability checks.
    pub fn named_classes(&self) -> Vec<NamedClass> {
        let n = self.rank();
        let mk = |label: &str, class: Vec<i64>| NamedClass { label: label.into(), class };
        match self.case_id {
            CaseId::Elliptic => vec![mk("PsiO_x", vec![0, 1]), mk("PsiO_X", vec![1, 0])],
            CaseId::K3 => vec![mk("PsiO_x", vec![0, 0, 1]), mk("PsiO_X", vec![1, 0, 1]), mk("PsiI_x", vec![1, 0, 0])],
            _ => {
                let eps = (-self.ty.epsilon) as usize;
                let c0 = self.c_class(0).unwrap();
                let p = self.point_index().map(|i| unit(n, i)).unwrap_or_else(|| {
                    // (3,−1): the point class is the last basis vector
                    unit(n, n - 1)
                });
                let tau_ox: Vec<i64> = c0.iter().zip(&p).map(|(a, b)| a + b).collect();
                let mut out = vec![mk("C0", c0.clone()), mk("PsiO_x", p), mk("tauPsiO_x", tau_ox)];
                if self.case_id == CaseId::CurveInK3 {
                    out.push(mk("PsiO_X", unit(n, 1)));
                }
                for j in 1..eps {
                    out.push(mk(&format!("C{j}"), self.c_class(j).unwrap()));
                }
                out.push(mk(&format!("C{eps}m1"), neg(&self.c_class(eps).unwrap())));
                out
            }
        }
    }

    /// The shift k with E[−k] in the tilted heart, for a μ-semistable E ∈ A_W.
    pub fn tilt_shift(&self, v: &[i64]) -> i64 {
        match tilt_side(&self.slope_mu(v)) {
            TiltSide::Torsion => 1,
            TiltSide::Free => 0,
        }
    }

    /// Phase of E ∈ A_W: the phase of E[−k] ∈ A_G in (θ, θ+1], plus k.
    /// Returns None when E[−k] falls outside the window.
    pub fn heart_phase(&self, v: &[i64]) -> Result<Option<Q>, HeartError> {
        let k = self.tilt_shift(v);
        let sign = if k == 1 { -1 } else { 1 };
        let zv = self.zg_full(v).scale(&qi(sign));
        match phase_of(&zv, &self.theta)? {
            Phase::Exact(p) if p <= &self.theta + qi(1) => Ok(Some(p + qi(k))),
            _ => Ok(None),
        }
    }

    /// (Htheta) for E[−k]: its Z_G lies in the window (θ, θ+1].
    pub fn window_check(&self, v: &[i64]) -> Result<bool, HeartError> {
        let k = self.tilt_shift(v);
        let zv = self.zg_full(v).scale(&qi(if k == 1 { -1 } else { 1 }));
        Ok(match phase_of(&zv, &self.theta)? {
            Phase::Exact(p) => p <= &self.theta + qi(1),
            Phase::Approx { value, error } => value + error <= rational_to_f64(&self.theta) + 1.0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltSide {
    Torsion,
    Free,
}

/// Torsion part T_μ is μ > 0.
pub fn tilt_side(mu: &SlopeValue) -> TiltSide {
    if mu.is_positive() {
        TiltSide::Torsion
    } else {
        TiltSide::Free
    }
}

pub fn zg_class(l: &CaseLattice, v: &[i64]) -> CycloNum {
    l.zg_class(v)
}

pub fn verify_gepner(l: &CaseLattice) -> bool {
    l.verify_gepner()
}

pub fn slope_mu(l: &CaseLattice, v: &[i64]) -> SlopeValue {
    l.slope_mu(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub label: String,
    pub class: Vec<i64>,
    pub computed: Option<String>,
    pub closed_form: String,
    pub agree: bool,
}

/// Phases of τΨ(O_x) and C(j), 1 ≤ j ≤ −ε, computed from the lattice and
/// compared with θ_W + 1 + 2/d and θ_W + 1/d + 2j/d + 3/2.
pub fn phase_table(l: &CaseLattice) -> Result<Vec<PhaseRow>, HeartError> {
    let eps = -l.ty.epsilon;
    if eps <= 0 {
        return Ok(Vec::new());
    }
    let d = l.d() as i64;
    let tw = &l.theta_w;
    let named = l.named_classes();
    let mut rows = Vec::new();
    let tau_ox = named.iter().find(|c| c.label == "tauPsiO_x").expect("named").class.clone();
    let mut push = |label: String, class: Vec<i64>, extra: i64, closed: Q| -> Result<(), HeartError> {
        let got = l.heart_phase(&class)?.map(|p| p + qi(extra));
        rows.push(PhaseRow {
            agree: got.as_ref() == Some(&closed),
            label,
            class,
            computed: got.map(|p| p.to_string()),
            closed_form: closed.to_string(),
        });
        Ok(())
    };
    push("tauPsiO_x".into(), tau_ox, 0, tw + qi(1) + q(2, d))?;
    for j in 1..=eps {
        let closed = tw + q(1, d) + q(2 * j, d) + q(3, 2);
        let cj = l.c_class(j as usize).unwrap();
        if j < eps {
            push(format!("C({j})"), cj, 0, closed)?;
        } else {
            // C(−ε)[−1] lies in A_W
            push(format!("C({j})"), neg(&cj), 1, closed)?;
        }
    }
    Ok(rows)
}

/// The chain θ < θ_W+1 < θ_W+1+2/d < θ_W+1/d+3/2 < … ≤ θ+2 for n = 2,
/// together with the admissible range of θ.
pub fn window_inequalities(l: &CaseLattice) -> bool {
    let (d, eps, tw, th) = (l.d() as i64, l.ty.epsilon, &l.theta_w, &l.theta);
    let lower = tw - q(1, d) - q(2 * eps, d) - q(1, 2);
    if !(lower <= *th && *th < tw + qi(1)) {
        return false;
    }
    let mut chain = vec![th.clone(), tw + qi(1), tw + qi(1) + q(2, d)];
    for j in 0..=(-1 - eps) {
        chain.push(tw + q(1, d) + q(2 * j, d) + q(3, 2));
    }
    let strict = chain.windows(2).all(|w| w[0] < w[1]);
    strict && chain.last().unwrap() <= &(th + qi(2))
}

/// Whether Hom^k(F_2, F_1) must vanish: φ1 > φ2 + n − k − 2 − 2ε/d.
pub fn hom_vanishing_window(phi1: &Q, phi2: &Q, k: i64, ty: &WeightedType) -> bool {
    *phi1 > phi2 + qi(ty.n() as i64 - k - 2) - q(2 * ty.epsilon, ty.degree as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinitePhase {
    pub label: String,
    pub phase: String,
    pub ray_consistent: bool,
    #[serde(skip)]
    pub value: Q,
}

/// Phase assignments for n = 1 (objects Q_{j,l}) and for n = 2, ε = 0
/// (objects C(j)); the type is gcd-normalized first. Each phase is checked
/// against the ray of Z_G.
pub fn finite_phases(ty: &WeightedType) -> Result<Vec<FinitePhase>, HeartError> {
    let (ty, _) = classify::normalize_gcd(ty);
    let d = ty.degree;
    let di = d as i64;
    let ray = |z: &CycloNum, phi: &Q| -> Result<bool, HeartError> {
        Ok(match phase_of(z, &(phi - qi(1)))? {
            Phase::Exact(p) => p == *phi,
            Phase::Approx { value, error } => (value - rational_to_f64(phi)).abs() <= error.max(1e-9),
        })
    };
    let mut out = Vec::new();
    match (ty.n(), ty.epsilon) {
        (1, _) => {
            for j in 0..di {
                for l in 1..di {
                    let phi = q(-1, 2) - q(l, di) + q(2 * j, di);
                    let z = zg(&q_jl(d, j, l as u32));
                    out.push(FinitePhase {
                        label: format!("Q_{{{j},{l}}}"),
                        phase: phi.to_string(),
                        ray_consistent: ray(&z, &phi)?,
                        value: phi,
                    });
                }
            }
        }
        (2, 0) => {
            let z0 = zg(&koszul_c(&ty, 0));
            let phi0 = match phase_of(&z0, &qi(-1))? {
                Phase::Exact(p) => p,
                Phase::Approx { .. } => return Err(HeartError::UnsupportedCase(ty.to_string())),
            };
            for j in 0..di {
                for k in [0i64, 1] {
                    let phi = &phi0 + qi(k) + q(2 * j, di);
                    let z = zg(&shift(&koszul_c(&ty, j), k));
                    out.push(FinitePhase {
                        label: format!("C({j})[{k}]"),
                        phase: phi.to_string(),
                        ray_consistent: ray(&z, &phi)?,
                        value: phi,
                    });
                }
            }
        }
        _ => return Err(HeartError::UnsupportedCase(ty.to_string())),
    }
    Ok(out)
}

/// Whether the Clifford hypothesis 0 ≤ δ < 2g·r applies.
pub fn clifford_applies(r: i64, delta: i64, genus: i64) -> bool {
    0 <= delta && delta < 2 * genus * r
}

/// R ≤ δ/2 + r.
pub fn clifford_predicate(big_r: i64, r: i64, delta: i64, _genus: i64) -> bool {
    qi(big_r) <= q(delta, 2) + qi(r)
}

/// δ > R(1 − cos(2π/d)), exact for rational cosines and certified otherwise.
pub fn crucial_inequality(big_r: i64, delta: i64, d: u32) -> bool {
    let c = (&cyclo(d, 1) + &cyclo(d, -1)).scale(&q(1, 2));
    match c.as_rational() {
        Some(c) => qi(delta) > qi(big_r) * (Q::one() - c),
        None => {
            let rhs = embed(&(&CycloNum::one(d) - &c).scale(&qi(big_r)), 80);
            qi(delta) > rhs.re.hi()
        }
    }
}

/// Class of C(2)[−1] as displayed in the d = 6 quiver picture, (v1,v0,w) =
/// (0,1,1,1); it differs from the class forced by the charge.
pub fn displayed_c2m1_d6() -> Vec<i64> {
    vec![0, 1, 1, 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::normalize_phase;
    use proptest::prelude::*;

    fn ty(s: &str) -> WeightedType {
        WeightedType::parse(s).unwrap()
    }

    fn lat(s: &str) -> CaseLattice {
        build_lattice(&ty(s)).unwrap()
    }

    #[test]
    fn all_table_lattices_build() {
        for row in classify::table1() {
            let l = build_lattice(&row.ty).unwrap();
            assert!(l.verify_gepner(), "{}", row.ty);
            // τ^d = id on classes
            for j in 0..l.rank() {
                assert_eq!(l.tau_pow(&unit(l.rank(), j), l.d() as usize), unit(l.rank(), j), "{}", row.ty);
            }
        }
    }

    #[test]
    fn mutations_break_the_identity() {
        for row in classify::table1() {
            let l = build_lattice(&row.ty).unwrap();
            for i in 0..l.rank() {
                for j in 0..l.rank() {
                    let mut m = l.clone();
                    m.tau_mat[i][j] += 1;
                    assert!(!m.verify_gepner());
                }
            }
        }
    }

    #[test]
    fn elliptic_tau() {
        let l = lat("1,1,1:3");
        assert_eq!(l.tau_apply(&[1, 0]), vec![-2, 3]);
        assert_eq!(l.tau_apply(&[0, 1]), vec![-1, 1]);
        assert_eq!(l.zg_class(&l.tau_apply(&[0, 1])), -cyclo(3, 1));
    }

    #[test]
    fn points_in_k3_values() {
        let l = lat("1,1:4");
        let i = cyclo(4, 1);
        assert_eq!(l.tau_apply(&[1, 0, 0, 0, 0, 0]), vec![-2, -3, -1, -1, -1, -1]);
        assert_eq!(l.zg_class(&[0, 1, 1, 0, 0, 0]), -i.clone());
        let c2m2 = l.tau_pow(&[0, 1, 0, 0, 0, 0], 2);
        assert_eq!(l.zg_class(&c2m2), &i - &CycloNum::one(4));
        assert_eq!(l.slope_mu(&[0, 1, 1, 0, 0, 0]), SlopeValue::Finite(qi(0)));
        assert_eq!(l.slope_mu(&[2, 3, 1, 1, 1, 1]), SlopeValue::Finite(q(1, 4)));
        let l6 = lat("3,1:6");
        assert_eq!(l6.slope_mu(&[1, 1, 1, 1]), SlopeValue::Finite(q(-1, 4)));
        // the displayed d = 6 class is not −τ[C(1)]
        assert_ne!(l6.zg_class(&displayed_c2m1_d6()), -l6.zg_class(&l6.tau_apply(&[1, 0, 0, 0])));
        assert_eq!(l6.zg_class(&[1, 1, 1, 1]), -cyclo(6, 1));
    }

    #[test]
    fn curve_case_values() {
        let l = lat("1,1,1:4");
        assert_eq!(l.zg_class(&[0, 1, 0]), cyclo(4, 1).scale(&qi(2)));
        assert_eq!(l.zg_class(&l.tau_apply(&[1, 0, 0])), &CycloNum::one(4) + &cyclo(4, 1));
        assert_eq!(l.slope_mu(&[2, 1, 0]), SlopeValue::Finite(qi(0)));
        // μ(C(1)[−1]) from the slope formula
        assert_eq!(l.slope_mu(&[3, 1, 4]), SlopeValue::Finite(q(1, 3)));
        assert_eq!(l.slope_mu(&[0, 1, 0]), SlopeValue::NegInf);
        let l6 = lat("3,1,1:6");
        assert_eq!(l6.slope_mu(&[2, 1, 2]), SlopeValue::Finite(qi(0)));
        assert_eq!(l6.slope.radicand(), qi(3));
    }

    #[test]
    fn k3_lattice() {
        let l = lat("1,1,1,1:4");
        let i = cyclo(4, 1);
        assert_eq!(l.zg_class(&[1, 0, 1]), &i - &CycloNum::one(4));
        assert_eq!(l.zg_class(&[1, 0, 0]), i.clone());
        assert_eq!(l.zg_class(&l.tau_apply(&[0, 0, 1])), -i);
        assert_eq!(l.slope_mu(&[0, 0, 1]), SlopeValue::PosInf);
        assert_eq!(l.theta, &l.theta_w - qi(1));
    }

    #[test]
    fn serre_sign() {
        assert_eq!(lat("1,1,1,1:4").serre_mat(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(lat("1,1,1:3").serre_mat(), vec![vec![-1, 0], vec![0, -1]]);
        for row in classify::table1() {
            let l = build_lattice(&row.ty).unwrap();
            let s = l.serre_mat();
            let factor = &cyclo(l.d(), -row.epsilon) * &CycloNum::from_int(l.d(), if row.weights.len() % 2 == 0 { 1 } else { -1 });
            for j in 0..l.rank() {
                let col: Vec<i64> = s.iter().map(|r| r[j]).collect();
                assert_eq!(l.zg_class(&col), &factor * &l.zg_row[j]);
            }
        }
    }

    #[test]
    fn windows_and_phases() {
        for row in classify::table1() {
            let l = build_lattice(&row.ty).unwrap();
            for nc in l.named_classes() {
                assert!(l.window_check(&nc.class).unwrap(), "{} {}", row.ty, nc.label);
            }
            for pr in phase_table(&l).unwrap() {
                assert!(pr.agree, "{} {:?}", row.ty, pr);
            }
            if row.weights.len() == 2 {
                assert!(window_inequalities(&l), "{}", row.ty);
            }
        }
        let l = lat("1,1:3");
        assert_eq!(phase_table(&l).unwrap()[0].closed_form, "7/6");
    }

    #[test]
    fn tilt_examples() {
        assert_eq!(tilt_side(&SlopeValue::Finite(q(1, 6))), TiltSide::Torsion);
        assert_eq!(tilt_side(&SlopeValue::Finite(qi(0))), TiltSide::Free);
        assert_eq!(tilt_side(&SlopeValue::NegInf), TiltSide::Free);
    }

    #[test]
    fn hom_window_examples() {
        let t = ty("1,1,1:3");
        assert!(hom_vanishing_window(&qi(1), &qi(0), 1, &t));
        assert!(hom_vanishing_window(&qi(0), &qi(0), 50, &t));
        let t4 = ty("1,1:4");
        // boundary k = n − 2 − 2ε/d
        assert!(!hom_vanishing_window(&qi(0), &qi(0), 1, &t4));
    }

    #[test]
    fn finite_phase_tables() {
        for d in 3..=12 {
            let t = WeightedType::new(vec![1], d).unwrap();
            let tab = finite_phases(&t).unwrap();
            assert!(tab.iter().all(|e| e.ray_consistent), "d = {d}");
        }
        let t = finite_phases(&WeightedType::new(vec![1], 4).unwrap()).unwrap();
        assert_eq!(t.iter().find(|e| e.label == "Q_{0,1}").unwrap().value, q(-3, 4));
        let t = finite_phases(&ty("1,1:2")).unwrap();
        assert!(t.iter().all(|e| e.ray_consistent));
        let t2 = finite_phases(&ty("2,2:4")).unwrap();
        assert_eq!(t.len(), t2.len());
    }

    #[test]
    fn clifford_examples() {
        assert!(clifford_predicate(2, 1, 2, 3));
        assert!(!crucial_inequality(2, 2, 4));
        assert!(crucial_inequality(2, 3, 4));
        assert!(!crucial_inequality(2, 1, 6));
        // cos(2π/5) is irrational: 1 − cos ≈ 0.691
        assert!(crucial_inequality(1, 1, 5));
        assert!(!crucial_inequality(2, 1, 5));
    }

    #[test]
    fn dim_r_values() {
        assert_eq!(dim_r(&ty("1,1:4"), 2), 3);
        assert_eq!(dim_r(&ty("1,1:4"), 5), 4);
        assert_eq!(dim_r(&ty("3,1:6"), 1), 1);
        assert_eq!(dim_r(&ty("1,1,1:4"), 1), 3);
        assert_eq!(dim_r(&ty("3,1,1:6"), 1), 2);
    }

    proptest! {
        #[test]
        fn tau_shifts_phase(seed in proptest::collection::vec(-3i64..4, 6), which in 0usize..12) {
            let row = &classify::table1()[which];
            let l = build_lattice(&row.ty).unwrap();
            let v: Vec<i64> = seed.into_iter().take(l.rank()).chain(std::iter::repeat(0)).take(l.rank()).collect();
            let z = l.zg_full(&v);
            prop_assume!(!z.is_zero());
            let tz = l.zg_full(&l.tau_apply(&v));
            if let (Phase::Exact(a), Phase::Exact(b)) = (phase_of(&z, &qi(0)).unwrap(), phase_of(&tz, &qi(0)).unwrap()) {
                prop_assert_eq!(normalize_phase(&(a + q(2, l.d() as i64)), &qi(0)), b);
            }
        }
    }
}
