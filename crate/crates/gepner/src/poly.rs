//! Sparse multivariate polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exactmath::{parse_rational, qi, CycloNum, Q};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("cannot parse polynomial {0:?}: {1}")]
    Parse(String, String),
}

/// Polynomial as a map exponent vector → coefficient; zero terms never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Poly {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn monomial(exps: Vec<u32>, c: Q) -> Poly {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The variable x_{i+1}.
    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, Q::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(Q::zero)
    }

    /// Weighted degree of a monomial.
    pub fn weighted_degree(e: &[u32], weights: &[u32]) -> i64 {
        e.iter().zip(weights).map(|(a, w)| (*a as i64) * (*w as i64)).sum()
    }

    /// Common weighted degree of all terms, `Ok(None)` for the zero polynomial,
    /// `Err(degrees)` when terms disagree.
    pub fn homogeneous_degree(&self, weights: &[u32]) -> Result<Option<i64>, Vec<i64>> {
        let mut degs: Vec<i64> = self.terms.keys().map(|e| Poly::weighted_degree(e, weights)).collect();
        degs.dedup();
        degs.sort();
        degs.dedup();
        match degs.len() {
            0 => Ok(None),
            1 => Ok(Some(degs[0])),
            _ => Err(degs),
        }
    }

    pub fn eval(&self, pt: &[CycloNum]) -> CycloNum {
        let d = pt.iter().map(|c| c.order()).fold(1, num_integer::lcm);
        let mut acc = CycloNum::zero(d);
        for (e, c) in &self.terms {
            let mut t = CycloNum::from_rational(d, c.clone());
            for (x, k) in pt.iter().zip(e) {
                if *k > 0 {
                    t = &t * &x.pow(*k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    pub fn eval_q(&self, pt: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, k) in pt.iter().zip(e) {
                for _ in 0..*k {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Leading exponent in lex order with x1 > x2 > ….
    pub fn leading(&self) -> Option<(&Vec<u32>, &Q)> {
        self.terms.iter().next_back()
    }

    /// Remainder of division by a single polynomial in lex order; zero
    /// exactly when `divisor` divides `self`.
    pub fn rem(&self, divisor: &Poly) -> Poly {
        let (le, lc) = divisor.leading().expect("division by zero polynomial");
        let (le, lc) = (le.clone(), lc.clone());
        let mut rem = Poly::zero(self.nvars);
        let mut p = self.clone();
        while let Some((e, c)) = p.leading().map(|(e, c)| (e.clone(), c.clone())) {
            if e.iter().zip(&le).all(|(a, b)| a >= b) {
                let shift: Vec<u32> = e.iter().zip(&le).map(|(a, b)| a - b).collect();
                let f = Poly::monomial(shift, &c / &lc);
                p = &p - &(&f * divisor);
            } else {
                rem.add_term(e.clone(), c);
                p.terms.remove(&e);
            }
        }
        rem
    }

    /// Parses strings such as `3/2*x1^2*x3 - x2`.
    pub fn parse(s: &str, nvars: usize) -> Result<Poly, PolyError> {
        let err = |m: &str| PolyError::Parse(s.to_string(), m.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty"));
        }
        let mut out = Poly::zero(nvars);
        let mut chunks = Vec::new();
        let mut cur = String::new();
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                chunks.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        chunks.push(cur);
        for chunk in chunks {
            let (sign, body) = match chunk.strip_prefix('-') {
                Some(b) => (-Q::one(), b),
                None => (Q::one(), chunk.strip_prefix('+').unwrap_or(&chunk)),
            };
            if body.is_empty() {
                return Err(err("dangling sign"));
            }
            let mut coef = sign;
            let mut e = vec![0u32; nvars];
            for factor in body.split('*') {
                if let Some(v) = factor.strip_prefix('x') {
                    let (idx, pw) = match v.split_once('^') {
                        Some((a, b)) => (a, b.parse::<u32>().map_err(|_| err("bad exponent"))?),
                        None => (v, 1),
                    };
                    let i: usize = idx.parse().map_err(|_| err("bad variable index"))?;
                    if i == 0 || i > nvars {
                        return Err(err("variable index out of range"));
                    }
                    e[i - 1] += pw;
                } else {
                    coef *= parse_rational(factor).map_err(|_| err("bad coefficient"))?;
                }
            }
            out.add_term(e, coef);
        }
        Ok(out)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut p = Poly::zero(self.nvars.max(rhs.nvars));
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                p.add_term(e, x * y);
            }
        }
        p
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&qi(-1))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| if *k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Monomials of weighted degree `deg` (exponent vectors), lex-descending.
pub fn monomials_of_degree(weights: &[u32], deg: i64) -> Vec<Vec<u32>> {
    fn go(weights: &[u32], deg: i64, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == weights.len() {
            if deg == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let w = weights[prefix.len()] as i64;
        let mut k = deg / w;
        loop {
            prefix.push(k as u32);
            go(weights, deg - k * w, prefix, out);
            prefix.pop();
            if k == 0 {
                break;
            }
            k -= 1;
        }
    }
    let mut out = Vec::new();
    if deg >= 0 {
        go(weights, deg, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::q;

    #[test]
    fn parse_and_print() {
        let p = Poly::parse("3/2*x1^2*x3 - x2", 3).unwrap();
        assert_eq!(p.to_string(), "3/2*x1^2*x3 - x2");
        assert_eq!(p.homogeneous_degree(&[1, 1, 1]), Err(vec![1, 3]));
        assert_eq!(p.homogeneous_degree(&[1, 3, 1]), Ok(Some(3)));
        assert!(Poly::parse("x4", 3).is_err());
        assert!(Poly::parse("", 3).is_err());
        let c = Poly::parse("-2", 2).unwrap();
        assert_eq!(c.constant_term(), qi(-2));
    }

    #[test]
    fn division_by_w() {
        let w = Poly::parse("x1^4 + x2^4", 2).unwrap();
        let m = &Poly::parse("x1^2 - 3*x2", 2).unwrap() * &w;
        assert!(m.rem(&w).is_zero());
        let r = Poly::parse("x1^5", 2).unwrap().rem(&w);
        assert_eq!(r, Poly::parse("-x1*x2^4", 2).unwrap());
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_of_degree(&[1, 1], 3).len(), 4);
        assert_eq!(monomials_of_degree(&[3, 1], 4), vec![vec![1, 1], vec![0, 4]]);
        assert!(monomials_of_degree(&[2, 2], 3).is_empty());
    }

    #[test]
    fn evaluation() {
        let p = Poly::parse("x1^2 + 1/2*x2", 2).unwrap();
        assert_eq!(p.eval_q(&[qi(2), qi(3)]), q(11, 2));
        let i = crate::exactmath::cyclo(4, 1);
        assert!(p.eval(&[i.clone(), CycloNum::zero(4)]) == CycloNum::from_int(4, -1));
    }
}
