//! Fermat weight systems with n − ε ∈ {3, 4}: enumeration, gcd
//! normalization, the eigenvalue constraints and the geometry of X.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::exactmath::{cyclo, qi, CycloNum, Q};
use crate::mfcore::WeightedType;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("type {0} is not of Fermat type")]
    NotFermat(String),
}

/// Geometry of the hypersurface X cut out by W.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Points { count: u32 },
    /// Curve of the given genus and hyperplane degree ∫_X H.
    Curve { genus: u32, degree: u32 },
    Elliptic { h: u32 },
    K3 { h2: u32 },
}

impl Geometry {
    /// ∫H for curves, H² for surfaces, the point count for n = 2.
    pub fn hyperplane_self_intersection(&self) -> Q {
        match *self {
            Geometry::Points { count } => qi(count as i64),
            Geometry::Curve { degree, .. } => qi(degree as i64),
            Geometry::Elliptic { h } => qi(h as i64),
            Geometry::K3 { h2 } => qi(h2 as i64),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Points { count: 1 } => write!(f, "1 point"),
            Geometry::Points { count } => write!(f, "{count} points"),
            Geometry::Curve { genus, .. } => write!(f, "genus {genus} curve"),
            Geometry::Elliptic { .. } => write!(f, "elliptic curve"),
            Geometry::K3 { .. } => write!(f, "K3 surface"),
        }
    }
}

/// Divides weights and degree by their common gcd.
pub fn normalize_gcd(ty: &WeightedType) -> (WeightedType, u32) {
    let g = ty.weights.iter().fold(ty.degree, |g, &a| g.gcd(&a));
    let w = ty.weights.iter().map(|a| a / g).collect();
    (WeightedType::new(w, ty.degree / g).expect("positive entries stay positive"), g)
}

/// No point of the Fermat hypersurface has a nontrivial stabilizer iff the
/// weights are pairwise coprime.
pub fn is_stacky_free(ty: &WeightedType) -> Result<bool, ClassifyError> {
    if !ty.weights.iter().all(|&a| ty.degree % a == 0) {
        return Err(ClassifyError::NotFermat(ty.to_string()));
    }
    let w = &ty.weights;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i].gcd(&w[j]) > 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// ζ_d + ζ_d^{-1} = 2cos(2π/d), exactly.
fn two_cos(d: u32) -> CycloNum {
    &cyclo(d, 1) + &cyclo(d, -1)
}

/// Whether ζ_d is a root of λ² + (m − 2)λ + 1, i.e. 2cos(2π/d) = 2 − m.
/// Four positive weights summing to d force d ≥ 4, which rules out (3, 3).
pub fn k3_constraint(m: i64, d: u32) -> bool {
    m >= 1 && d >= 4 && two_cos(d) == CycloNum::from_int(d, 2 - m)
}

/// Whether 2cos(2π/d) = 2 − h, the elliptic analogue with h = ∫_X H.
pub fn elliptic_constraint(h: i64, d: u32) -> bool {
    d >= 1 && two_cos(d) == CycloNum::from_int(d, 2 - h)
}

/// The inequality (n − 3)d ≤ 2ε.
pub fn uniqueness_regime(ty: &WeightedType) -> bool {
    (ty.n() as i64 - 3) * ty.degree as i64 <= 2 * ty.epsilon
}

/// The Calabi-Yau type obtained by adding −ε weights equal to 1.
pub fn ambient(ty: &WeightedType) -> WeightedType {
    let mut w = ty.weights.clone();
    w.extend(std::iter::repeat(1).take((-ty.epsilon).max(0) as usize));
    WeightedType::new(w, ty.degree).expect("valid")
}

fn weight_product(ty: &WeightedType) -> u32 {
    ty.weights.iter().product()
}

/// Geometry of X, or None when the type fails the constraints.
pub fn geometry(ty: &WeightedType) -> Option<Geometry> {
    if !ty.is_fermat() || ty.n() < 2 || !is_stacky_free(ty).ok()? {
        return None;
    }
    let (eps, n, d) = (ty.epsilon, ty.n() as i64, ty.degree);
    if eps > 0 || eps < n - 4 {
        return None;
    }
    let prod = weight_product(ty);
    if d % prod != 0 {
        return None;
    }
    let h = (d / prod) as i64;
    match n - eps {
        3 if elliptic_constraint(h, d) => Some(match n {
            2 => Geometry::Points { count: h as u32 },
            _ => Geometry::Elliptic { h: h as u32 },
        }),
        4 if h % 2 == 0 && k3_constraint(h / 2, d) => Some(match n {
            2 => Geometry::Points { count: h as u32 },
            3 => {
                // adjunction: 2g − 2 = −ε·∫H
                Geometry::Curve { genus: ((2 - eps * h) / 2) as u32, degree: h as u32 }
            }
            _ => Geometry::K3 { h2: h as u32 },
        }),
        _ => None,
    }
}

/// The Fermat polynomial as a string, e.g. "x1^2 + x2^6".
pub fn w_string(ty: &WeightedType) -> String {
    ty.fermat_exponents
        .as_ref()
        .map(|ex| ex.iter().enumerate().map(|(i, k)| format!("x{}^{}", i + 1, k)).collect::<Vec<_>>().join(" + "))
        .unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeRow {
    pub weights: Vec<u32>,
    pub d: u32,
    pub epsilon: i64,
    #[serde(rename = "W_string")]
    pub w_string: String,
    pub geometry: Geometry,
    #[serde(skip)]
    pub ty: WeightedType,
}

fn weight_tuples(n: usize, d: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for a in (1..=max).rev() {
        if d % a == 0 && d / a >= 2 {
            prefix.push(a);
            weight_tuples(n, d, a, prefix, out);
            prefix.pop();
        }
    }
}

/// All gcd-normalized stacky-free Fermat types with n in the range and
/// d ≤ d_max passing the constraints, ordered as in the reference table:
/// n − ε = 4 first, then n descending, then d ascending.
pub fn enumerate_types(n_range: std::ops::RangeInclusive<usize>, d_max: u32) -> Vec<TypeRow> {
    let mut rows = Vec::new();
    for n in n_range {
        for d in 2..=d_max {
            let mut tuples = Vec::new();
            weight_tuples(n, d, d / 2, &mut Vec::new(), &mut tuples);
            for w in tuples {
                let ty = WeightedType::new(w, d).expect("positive");
                if normalize_gcd(&ty).1 != 1 {
                    continue;
                }
                if let Some(geometry) = geometry(&ty) {
                    rows.push(TypeRow {
                        weights: ty.weights.clone(),
                        d,
                        epsilon: ty.epsilon,
                        w_string: w_string(&ty),
                        geometry,
                        ty,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        let key = |r: &TypeRow| (-(r.weights.len() as i64 - r.epsilon), -(r.weights.len() as i64), r.d);
        key(a).cmp(&key(b)).then_with(|| b.weights.cmp(&a.weights))
    });
    rows
}

/// The twelve reference types.
pub fn table1() -> Vec<TypeRow> {
    enumerate_types(2..=4, 6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> WeightedType {
        WeightedType::parse(s).unwrap()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(normalize_gcd(&ty("2,2:8")), (ty("1,1:4"), 2));
        assert_eq!(normalize_gcd(&ty("3,2,1:6")), (ty("3,2,1:6"), 1));
        assert_eq!(normalize_gcd(&ty("6,2:12")), (ty("3,1:6"), 2));
    }

    #[test]
    fn stacky_examples() {
        assert!(!is_stacky_free(&ty("2,2,1,1:6")).unwrap());
        assert!(is_stacky_free(&ty("3,1,1,1:6")).unwrap());
        assert!(is_stacky_free(&ty("3,2,1:6")).unwrap());
        assert!(is_stacky_free(&ty("4,1:6")).is_err());
    }

    #[test]
    fn k3_examples() {
        assert!(k3_constraint(2, 4));
        assert!(k3_constraint(1, 6));
        assert!(!k3_constraint(3, 5));
        let hits: Vec<_> = (1..=6).flat_map(|m| (1..=100).map(move |d| (m, d))).filter(|&(m, d)| k3_constraint(m, d)).collect();
        assert_eq!(hits, vec![(1, 6), (2, 4)]);
    }

    #[test]
    fn regime_examples() {
        assert!(!uniqueness_regime(&ty("1,1,1,1:4")));
        assert!(uniqueness_regime(&ty("1,1,1:3")));
        assert!(uniqueness_regime(&ty("1,1:4")));
    }

    #[test]
    fn geometry_examples() {
        assert_eq!(geometry(&ty("1,1,1:3")), Some(Geometry::Elliptic { h: 3 }));
        assert_eq!(geometry(&ty("1,1:4")), Some(Geometry::Points { count: 4 }));
        assert_eq!(geometry(&ty("1,1,1:4")), Some(Geometry::Curve { genus: 3, degree: 4 }));
        assert_eq!(geometry(&ty("3,1,1:6")), Some(Geometry::Curve { genus: 2, degree: 2 }));
        assert_eq!(geometry(&ty("1,1:2")), None);
    }

    #[test]
    fn table_golden() {
        let got: Vec<String> = table1().iter().map(|r| format!("{} {} {}", r.ty, r.w_string, r.geometry)).collect();
        let want = [
            "(1,1,1,1;4) x1^4 + x2^4 + x3^4 + x4^4 K3 surface",
            "(3,1,1,1;6) x1^2 + x2^6 + x3^6 + x4^6 K3 surface",
            "(1,1,1;4) x1^4 + x2^4 + x3^4 genus 3 curve",
            "(3,1,1;6) x1^2 + x2^6 + x3^6 genus 2 curve",
            "(1,1;4) x1^4 + x2^4 4 points",
            "(3,1;6) x1^2 + x2^6 2 points",
            "(1,1,1;3) x1^3 + x2^3 + x3^3 elliptic curve",
            "(2,1,1;4) x1^2 + x2^4 + x3^4 elliptic curve",
            "(3,2,1;6) x1^2 + x2^3 + x3^6 elliptic curve",
            "(1,1;3) x1^3 + x2^3 3 points",
            "(2,1;4) x1^2 + x2^4 2 points",
            "(3,2;6) x1^2 + x2^3 1 point",
        ];
        assert_eq!(got, want);
    }
}
