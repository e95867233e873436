//! The central charge on Calabi-Yau targets in geometric form.
//!
//! Classes are written in scalar coordinates: `ch = r + c·H + s·pt` on a
//! surface, `ch = r + δ·pt` on a curve, a point count `w` in dimension zero.
//! A solution of the eigen equation is stored as the linear functional `ℓ`
//! in these coordinates, so that Z_G^† = ℓ·ch and Z_G = C_W·Z_G^†.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::classify::{self, Geometry};
use crate::exactmath::{cyclo, cyclo_nullspace, embed, phase_of, q, qi, ser_q, ser_qvec, CycloNum, Phase, RationalPhase, Q};
use crate::mfcore::WeightedType;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("ζ is not an eigenvalue of M")]
    NoEigenvalue,
    #[error("ζ-eigenspace has dimension {0}, expected 1")]
    EigenspaceDimensionNot1(usize),
    #[error("class/solution mismatch: {0}")]
    Mismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Chern character in scalar coordinates together with the intersection
/// number `h` (point count, ∫H, or H²) and the Todd class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChClass {
    pub dim: usize,
    #[serde(serialize_with = "ser_qvec")]
    pub comps: Vec<Q>,
    #[serde(serialize_with = "ser_q")]
    pub h: Q,
    #[serde(serialize_with = "ser_qvec")]
    pub td: Vec<Q>,
}

impl ChClass {
    pub fn points(count: u32, w: Q) -> ChClass {
        ChClass { dim: 0, comps: vec![w], h: qi(count as i64), td: vec![Q::one()] }
    }

    /// (rank, degree) on a curve of the given genus and hyperplane degree.
    pub fn curve(genus: u32, degree: u32, r: Q, deg: Q) -> ChClass {
        ChClass { dim: 1, comps: vec![r, deg], h: qi(degree as i64), td: vec![Q::one(), qi(1 - genus as i64)] }
    }

    pub fn elliptic(h: u32, r: Q, deg: Q) -> ChClass {
        ChClass::curve(1, h, r, deg)
    }

    pub fn k3(h2: u32, r: Q, c: Q, s: Q) -> ChClass {
        ChClass { dim: 2, comps: vec![r, c, s], h: qi(h2 as i64), td: vec![Q::one(), Q::zero(), qi(2)] }
    }

    /// ch(i_*E) for X ⊂ X̂ the hyperplane section of a Calabi-Yau X̂ one
    /// dimension up. Grothendieck-Riemann-Roch with td(N)^{-1} = 1 − Ĥ/2 gives
    /// points ↦ (0, w) and (r, δ) ↦ (0, r, δ − r·Ĥ²/2).
    pub fn push(&self) -> Result<ChClass, GeomError> {
        match self.dim {
            0 => Ok(ChClass { dim: 1, comps: vec![Q::zero(), self.comps[0].clone()], h: self.h.clone(), td: vec![Q::one(), Q::zero()] }),
            1 => {
                let m = &self.h / qi(2);
                let (r, deg) = (&self.comps[0], &self.comps[1]);
                Ok(ChClass {
                    dim: 2,
                    comps: vec![Q::zero(), r.clone(), deg - r * &m],
                    h: self.h.clone(),
                    td: vec![Q::one(), Q::zero(), qi(2)],
                })
            }
            _ => Err(GeomError::UnsupportedGeometry("no ambient above a surface".into())),
        }
    }
}

/// Action of F = ST_O ∘ (⊗O(1)) on scalar coordinates, as a matrix acting on
/// column vectors: ch ↦ e^H ch − (∫ e^H ch td)·1.
pub fn build_m(geom: &Geometry) -> Result<Vec<Vec<Q>>, GeomError> {
    match *geom {
        Geometry::Elliptic { h } => {
            let h = qi(h as i64);
            Ok(vec![vec![Q::one() - &h, qi(-1)], vec![h, Q::one()]])
        }
        Geometry::K3 { h2 } if h2 % 2 == 0 => {
            let m = (h2 / 2) as i64;
            Ok(vec![
                vec![qi(-1 - m), qi(-2 * m), qi(-1)],
                vec![qi(1), qi(1), qi(0)],
                vec![qi(m), qi(2 * m), qi(1)],
            ])
        }
        ref g => Err(GeomError::UnsupportedGeometry(g.to_string())),
    }
}

/// The functional ℓ with ℓ·M = ζℓ and ℓ_top = −1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaSolution {
    pub d: u32,
    pub ell: Vec<CycloNum>,
}

impl AlphaSolution {
    /// ∫_X α_0^†.
    pub fn int_alpha0(&self) -> &CycloNum {
        &self.ell[0]
    }

    /// Coefficient of H in α_1^† on a surface with the given H².
    pub fn alpha1_h(&self, h2: &Q) -> CycloNum {
        self.ell[1].scale(&(Q::one() / h2))
    }
}

pub fn solve_alpha(m: &[Vec<Q>], d: u32) -> Result<AlphaSolution, GeomError> {
    let n = m.len();
    let z = cyclo(d, 1);
    // (Mᵀ − ζ) ℓᵀ = 0
    let a: Vec<Vec<CycloNum>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = CycloNum::from_rational(d, m[j][i].clone());
                    if i == j {
                        &e - &z
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    let ker = cyclo_nullspace(&a);
    match ker.len() {
        0 => return Err(GeomError::NoEigenvalue),
        1 => {}
        k => return Err(GeomError::EigenspaceDimensionNot1(k)),
    }
    let v = &ker[0];
    let last = v[n - 1].clone();
    if last.is_zero() {
        return Err(GeomError::Mismatch("eigenvector has vanishing top coordinate".into()));
    }
    let f = (-&last).inv().expect("nonzero");
    Ok(AlphaSolution { d, ell: v.iter().map(|x| x * &f).collect() })
}

/// C_W and θ_W.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GepnerConstants {
    pub c_w: CycloNum,
    #[serde(serialize_with = "ser_q")]
    pub theta_w: RationalPhase,
}

/// ∏_j (1 − ζ^{−a_j}).
pub fn int_alpha0_closed_form(ty: &WeightedType) -> CycloNum {
    let d = ty.degree;
    ty.weights.iter().fold(CycloNum::one(d), |acc, &a| &acc * &(&CycloNum::one(d) - &cyclo(d, -(a as i64))))
}

pub fn constants(ty: &WeightedType) -> GepnerConstants {
    let d = ty.degree;
    let one_minus_z = &CycloNum::one(d) - &cyclo(d, 1);
    let c_w = -(&int_alpha0_closed_form(ty) * &one_minus_z.inv().expect("ζ ≠ 1 for d ≥ 2"));
    let sum: i64 = ty.weights.iter().map(|&a| a as i64).sum();
    let theta_w = q(ty.n() as i64 - 1, 2) - q(sum + 1, d as i64);
    GepnerConstants { c_w, theta_w }
}

impl GepnerConstants {
    /// Exact: C_W lies on the ray of θ_W.
    pub fn ray_is_exact(&self) -> bool {
        matches!(phase_of(&self.c_w, &(&self.theta_w - qi(1))), Ok(Phase::Exact(ref p)) if *p == self.theta_w)
    }

    /// Angular distance, in units of π, between embed(C_W) and e^{iπθ_W}.
    pub fn ray_deviation(&self, precision: u32) -> f64 {
        let (re, im) = embed(&self.c_w, precision).mid_f64();
        let got = im.atan2(re) / std::f64::consts::PI;
        let want = crate::exactmath::rational_to_f64(&self.theta_w);
        let diff = (got - want).rem_euclid(2.0);
        diff.min(2.0 - diff)
    }
}

/// Z_G^†(Ψ(E)); classes on a hyperplane section are pushed to the ambient
/// Calabi-Yau first.
pub fn zg_dag(e: &ChClass, sol: &AlphaSolution) -> Result<CycloNum, GeomError> {
    let mut e = e.clone();
    while e.comps.len() < sol.ell.len() {
        e = e.push()?;
    }
    if e.comps.len() != sol.ell.len() {
        return Err(GeomError::Mismatch(format!("class of dimension {} against a solution of length {}", e.dim, sol.ell.len())));
    }
    Ok(e.comps.iter().zip(&sol.ell).fold(CycloNum::zero(sol.d), |acc, (c, l)| &acc + &l.scale(c)))
}

/// Z_G(Ψ(E)) = C_W·Z_G^†(Ψ(E)).
pub fn zg_geom(e: &ChClass, sol: &AlphaSolution, consts: &GepnerConstants) -> Result<CycloNum, GeomError> {
    Ok(&consts.c_w * &zg_dag(e, sol)?)
}

/// Everything needed to evaluate the geometric charge of one type: the
/// Calabi-Yau it lives on (the ambient when ε < 0) and the solved functional.
#[derive(Clone, Debug)]
pub struct GeomModel {
    pub ty: WeightedType,
    pub cy: Geometry,
    pub m: Vec<Vec<Q>>,
    pub sol: AlphaSolution,
    pub consts: GepnerConstants,
}

impl GeomModel {
    pub fn new(ty: &WeightedType) -> Result<GeomModel, GeomError> {
        let amb = classify::ambient(ty);
        let cy = classify::geometry(&amb).ok_or_else(|| GeomError::UnsupportedGeometry(ty.to_string()))?;
        let m = build_m(&cy)?;
        let sol = solve_alpha(&m, ty.degree)?;
        Ok(GeomModel { ty: ty.clone(), cy, m, sol, consts: constants(ty) })
    }

    /// Class of a skyscraper sheaf on X.
    pub fn point_class(&self) -> ChClass {
        let h = self.cy.hyperplane_self_intersection().to_integer().try_into().unwrap_or(0);
        match (self.ty.n() as i64 - self.ty.epsilon, self.ty.n()) {
            (_, 2) => ChClass::points(h, Q::one()),
            (4, 3) => ChClass::curve(0, h, Q::zero(), Q::one()),
            (3, _) => ChClass::elliptic(h, Q::zero(), Q::one()),
            _ => ChClass::k3(h, Q::zero(), Q::zero(), Q::one()),
        }
    }
}

/// B-twisted Mukai vector (v0, v1·H, v2) with B = −H/2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MukaiVector {
    #[serde(serialize_with = "ser_q")]
    pub v0: Q,
    #[serde(serialize_with = "ser_q")]
    pub v1h: Q,
    #[serde(serialize_with = "ser_q")]
    pub v2: Q,
}

impl MukaiVector {
    /// v² = (v1·H)²/H² − 2 v0 v2 on the rank-one sublattice.
    pub fn square(&self, h2: &Q) -> Q {
        &self.v1h * &self.v1h / h2 - qi(2) * &self.v0 * &self.v2
    }
}

pub fn mukai(e: &ChClass) -> Result<MukaiVector, GeomError> {
    if e.dim != 2 {
        return Err(GeomError::Precondition("Mukai vectors need a surface class".into()));
    }
    let m = &e.h / qi(2);
    let (r, c, s) = (&e.comps[0], &e.comps[1], &e.comps[2]);
    // √td = 1 + (td_2/2)pt, then e^{H/2} = 1 + H/2 + (m/4)pt
    let v2 = s + r * &e.td[2] / qi(2);
    let c_b = c + r / qi(2);
    Ok(MukaiVector {
        v0: r.clone(),
        v1h: &c_b * &e.h,
        v2: v2 + c * &m + r * &m / qi(4),
    })
}

/// √(−x) in Q(ζ_d) with positive imaginary part, for x = s² or 3s².
pub fn sqrt_neg(x: &Q, d: u32) -> Result<CycloNum, GeomError> {
    let rational_sqrt = |y: &Q| -> Option<Q> {
        let (n, m) = (y.numer(), y.denom());
        let (rn, rm) = (n.sqrt(), m.sqrt());
        (&rn * &rn == *n && &rm * &rm == *m).then(|| Q::new(rn, rm))
    };
    let root = if let (Some(s), true) = (rational_sqrt(x), d % 4 == 0) {
        cyclo(d, (d / 4) as i64).scale(&s)
    } else if let (Some(s), true) = (rational_sqrt(&(x / qi(3))), d % 3 == 0) {
        (&cyclo(d, (d / 3) as i64) - &cyclo(d, (2 * d / 3) as i64)).scale(&s)
    } else {
        return Err(GeomError::UnsupportedGeometry(format!("√(−{x}) outside Q(ζ_{d})")));
    };
    debug_assert!(&root * &root == CycloNum::from_rational(d, -x.clone()));
    Ok(root)
}

/// −v2 + (d/8)v0 + (1/2)√(d/H²)·(v1·H)·i.
pub fn zg_k3(v: &MukaiVector, d: u32, h2: &Q) -> Result<CycloNum, GeomError> {
    let kappa = sqrt_neg(&(qi(d as i64) / h2), d)?;
    let re = -&v.v2 + &v.v0 * q(d as i64, 8);
    Ok(&CycloNum::from_rational(d, re) + &kappa.scale(&(&v.v1h / qi(2))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SphericalVerdict {
    Positive,
    ViolatedRank1,
    ViolatedOther,
}

/// Sign of −v2 + (d/8)v0 for a spherical class with v1·H = 0.
pub fn spherical_check(v: &MukaiVector, d: u32, h2: &Q) -> Result<SphericalVerdict, GeomError> {
    if v.square(h2) != qi(-2) || !v.v1h.is_zero() || !v.v0.is_positive() {
        return Err(GeomError::Precondition("need v² = −2, v1·H = 0, v0 > 0".into()));
    }
    let val = -&v.v2 + &v.v0 * q(d as i64, 8);
    Ok(if val.is_positive() {
        SphericalVerdict::Positive
    } else if v.v0.is_one() {
        SphericalVerdict::ViolatedRank1
    } else {
        SphericalVerdict::ViolatedOther
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::cyclo;
    use proptest::prelude::*;

    fn ty(s: &str) -> WeightedType {
        WeightedType::parse(s).unwrap()
    }

    fn det3(m: &[Vec<Q>]) -> Q {
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    #[test]
    fn k3_characteristic_polynomial() {
        for h2 in [2u32, 4, 6, 8] {
            let m = build_m(&Geometry::K3 { h2 }).unwrap();
            let mm = (h2 / 2) as i64;
            for lam in -3..=3 {
                let l = qi(lam);
                let mut a = m.clone();
                for i in 0..3 {
                    a[i][i] -= &l;
                }
                let want = -(&l + qi(1)) * (&l * &l + qi(mm - 2) * &l + qi(1));
                assert_eq!(det3(&a), want);
            }
        }
    }

    #[test]
    fn alpha_values() {
        for (h, d) in [(3, 3), (2, 4), (1, 6)] {
            let sol = solve_alpha(&build_m(&Geometry::Elliptic { h }).unwrap(), d).unwrap();
            assert_eq!(*sol.int_alpha0(), &cyclo(d, 1) - &CycloNum::one(d));
        }
        for (h2, d) in [(4u32, 4u32), (2, 6)] {
            let sol = solve_alpha(&build_m(&Geometry::K3 { h2 }).unwrap(), d).unwrap();
            let z = cyclo(d, 1);
            assert_eq!(*sol.int_alpha0(), &z - &CycloNum::one(d));
            let want = z.div(&(&CycloNum::one(d) - &z)).unwrap();
            assert_eq!(sol.alpha1_h(&qi(h2 as i64)), want);
        }
        // ζ_5 is not an eigenvalue of the quartic K3 matrix
        assert_eq!(solve_alpha(&build_m(&Geometry::K3 { h2: 4 }).unwrap(), 5), Err(GeomError::NoEigenvalue));
    }

    #[test]
    fn constants_examples() {
        let c = constants(&ty("1,1,1,1:4"));
        assert_eq!(c.c_w, &CycloNum::from_int(4, 2) + &cyclo(4, 1).scale(&qi(2)));
        assert_eq!(c.theta_w, q(1, 4));
        assert_eq!(constants(&ty("1,1:4")).theta_w, q(-1, 4));
        for row in classify::table1() {
            let c = constants(&row.ty);
            assert!(c.ray_is_exact(), "{}", row.ty);
            assert!(c.ray_deviation(96) < 1e-12);
        }
    }

    #[test]
    fn k3_values() {
        let model = GeomModel::new(&ty("1,1,1,1:4")).unwrap();
        let i = cyclo(4, 1);
        let ox = ChClass::k3(4, qi(1), qi(0), qi(0));
        let ix = ChClass::k3(4, qi(1), qi(0), qi(-1));
        assert_eq!(zg_dag(&ox, &model.sol).unwrap(), &i - &CycloNum::one(4));
        assert_eq!(zg_dag(&ix, &model.sol).unwrap(), i);
        let v = mukai(&ox).unwrap();
        assert_eq!(v, MukaiVector { v0: qi(1), v1h: qi(2), v2: q(3, 2) });
        assert_eq!(zg_dag(&model.point_class(), &model.sol).unwrap(), CycloNum::from_int(4, -1));
    }

    #[test]
    fn elliptic_point() {
        let model = GeomModel::new(&ty("1,1,1:3")).unwrap();
        assert_eq!(zg_dag(&ChClass::elliptic(3, qi(0), qi(1)), &model.sol).unwrap(), CycloNum::from_int(3, -1));
    }

    #[test]
    fn pushes_from_hyperplane_sections() {
        // ΨO_X on the quartic curve: ch(i_*O_X) = 1 − e^{−H}
        let model = GeomModel::new(&ty("1,1,1:4")).unwrap();
        let ox = ChClass::curve(3, 4, qi(1), qi(0));
        assert_eq!(ox.push().unwrap().comps, vec![qi(0), qi(1), qi(-2)]);
        assert_eq!(zg_dag(&ox, &model.sol).unwrap(), cyclo(4, 1).scale(&qi(2)));
        for row in classify::table1().iter().filter(|r| r.epsilon < 0) {
            let model = GeomModel::new(&row.ty).unwrap();
            assert_eq!(zg_dag(&model.point_class(), &model.sol).unwrap(), CycloNum::from_int(row.d, -1));
        }
    }

    #[test]
    fn spherical_examples() {
        let h2 = qi(4);
        let v = |v0, v2: Q| MukaiVector { v0: qi(v0), v1h: qi(0), v2 };
        assert_eq!(spherical_check(&v(2, q(1, 2)), 4, &h2), Ok(SphericalVerdict::Positive));
        assert_eq!(spherical_check(&v(2, q(1, 2)), 6, &qi(2)), Ok(SphericalVerdict::Positive));
        assert_eq!(spherical_check(&v(1, qi(1)), 4, &h2), Ok(SphericalVerdict::ViolatedRank1));
        assert_eq!(spherical_check(&v(3, q(1, 3)), 4, &h2), Ok(SphericalVerdict::Positive));
        assert!(spherical_check(&v(1, qi(2)), 4, &h2).is_err());
    }

    proptest! {
        #[test]
        fn k3_forms_agree(r in -20i64..20, c in -20i64..20, s in -20i64..20, which in 0usize..2) {
            let (t, h2) = [("1,1,1,1:4", 4u32), ("3,1,1,1:6", 2)][which];
            let model = GeomModel::new(&ty(t)).unwrap();
            let e = ChClass::k3(h2, qi(r), qi(c), qi(s));
            let a = zg_dag(&e, &model.sol).unwrap();
            let b = zg_k3(&mukai(&e).unwrap(), model.ty.degree, &qi(h2 as i64)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn gepner_identity_on_charts(r in -20i64..20, c in -20i64..20, s in -20i64..20, which in 0usize..5) {
            let t = ["1,1,1,1:4", "3,1,1,1:6", "1,1,1:3", "2,1,1:4", "3,2,1:6"][which];
            let model = GeomModel::new(&ty(t)).unwrap();
            let n = model.m.len();
            let v: Vec<Q> = [r, c, s][..n].iter().map(|&x| qi(x)).collect();
            let fv: Vec<Q> = (0..n).map(|i| (0..n).map(|j| &model.m[i][j] * &v[j]).sum()).collect();
            let z = |w: &[Q]| w.iter().zip(&model.sol.ell).fold(CycloNum::zero(model.ty.degree), |a, (x, l)| &a + &l.scale(x));
            prop_assert_eq!(z(&fv), &cyclo(model.ty.degree, 1) * &z(&v));
        }
    }
}
