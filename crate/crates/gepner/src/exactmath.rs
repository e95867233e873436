//! Exact arithmetic in cyclotomic fields and phase computations.
//!
//! A [`CycloNum`] stores an element of Q(ζ_d) in the power basis
//! `1, ζ, …, ζ^{φ(d)-1}` reduced modulo the cyclotomic polynomial Φ_d, so
//! equality is coefficient equality.  Numeric embeddings are certified
//! rational balls built from Machin's formula and alternating Taylor series.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Q = BigRational;

/// A phase φ, meaning the ray R_{>0}·e^{iπφ}, as an exact rational.
pub type RationalPhase = Q;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("zero value has no phase")]
    ZeroValue,
    #[error("not invertible: zero value")]
    DivisionByZero,
    #[error("bad rational literal {0:?}")]
    BadRational(String),
    #[error("coefficient vector has length {got}, expected φ({d}) = {want}")]
    BadLength { d: u32, got: usize, want: usize },
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<Q, ExactError> {
    let t = s.trim();
    let bad = || ExactError::BadRational(s.to_string());
    match t.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

pub fn rational_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale down before converting
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n.max(d) - 900).max(0) as usize;
        let a = (x.numer() >> shift).to_f64().unwrap_or(0.0);
        let b = (x.denom() >> shift).to_f64().unwrap_or(1.0);
        a / b
    })
}

pub fn euler_phi(d: u32) -> usize {
    let mut n = d;
    let mut r = d;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r as usize
}

fn poly_divexact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut out = vec![0i64; num.len() - dn];
    for k in (0..out.len()).rev() {
        let c = rem[k + dn] / den[dn];
        out[k] = c;
        for (i, &b) in den.iter().enumerate() {
            rem[k + i] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    out
}

/// Coefficients (low to high) of the cyclotomic polynomial Φ_d.
pub fn cyclotomic_poly(d: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&d) {
        return p.clone();
    }
    let mut num = vec![0i64; d as usize + 1];
    num[0] = -1;
    num[d as usize] = 1;
    for e in 1..d {
        if d % e == 0 {
            num = poly_divexact(&num, &cyclotomic_poly(e));
        }
    }
    let p = Arc::new(num);
    cache.lock().unwrap().insert(d, p.clone());
    p
}

/// Element of Q(ζ_d), ζ = e^{2πi/d}, in canonical power-basis form.
#[derive(Clone, Debug)]
pub struct CycloNum {
    d: u32,
    coeffs: Vec<Q>,
}

impl CycloNum {
    pub fn zero(d: u32) -> Self {
        assert!(d >= 1, "root-of-unity order must be positive");
        CycloNum { d, coeffs: vec![Q::zero(); euler_phi(d)] }
    }

    pub fn from_rational(d: u32, r: Q) -> Self {
        let mut z = Self::zero(d);
        z.coeffs[0] = r;
        z
    }

    pub fn from_int(d: u32, n: i64) -> Self {
        Self::from_rational(d, qi(n))
    }

    pub fn one(d: u32) -> Self {
        Self::from_int(d, 1)
    }

    pub fn from_coeffs(d: u32, coeffs: Vec<Q>) -> Result<Self, ExactError> {
        let want = euler_phi(d);
        if coeffs.len() != want {
            return Err(ExactError::BadLength { d, got: coeffs.len(), want });
        }
        Ok(CycloNum { d, coeffs })
    }

    /// Reduces an arbitrary-length coefficient vector in ζ_d modulo Φ_d.
    pub fn from_poly(d: u32, mut poly: Vec<Q>) -> Self {
        let phi = cyclotomic_poly(d);
        let n = phi.len() - 1;
        for k in (n..poly.len()).rev() {
            let c = std::mem::take(&mut poly[k]);
            if c.is_zero() {
                continue;
            }
            for (i, &b) in phi.iter().enumerate().take(n) {
                if b != 0 {
                    poly[k - n + i] -= &c * qi(b);
                }
            }
        }
        poly.resize(n, Q::zero());
        CycloNum { d, coeffs: poly }
    }

    pub fn order(&self) -> u32 {
        self.d
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Sum of absolute values of the coefficients.
    pub fn height(&self) -> Q {
        self.coeffs.iter().fold(Q::zero(), |a, c| a + c.abs())
    }

    /// The rational value, when the element lies in Q.
    pub fn as_rational(&self) -> Option<Q> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Image under Q(ζ_d) ⊂ Q(ζ_e); requires d | e.
    pub fn promote(&self, e: u32) -> CycloNum {
        if e == self.d {
            return self.clone();
        }
        assert!(e % self.d == 0, "cannot embed Q(ζ_{}) into Q(ζ_{})", self.d, e);
        let step = (e / self.d) as usize;
        let mut poly = vec![Q::zero(); step * self.coeffs.len().max(1)];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[k * step] = c.clone();
        }
        CycloNum::from_poly(e, poly)
    }

    fn common(&self, other: &CycloNum) -> (CycloNum, CycloNum) {
        if self.d == other.d {
            return (self.clone(), other.clone());
        }
        let l = self.d.lcm(&other.d);
        (self.promote(l), other.promote(l))
    }

    /// Complex conjugate: ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> CycloNum {
        let d = self.d as usize;
        let mut poly = vec![Q::zero(); d];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[(d - k) % d] += c;
        }
        CycloNum::from_poly(self.d, poly)
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// Real part (x + x̄)/2, still an element of Q(ζ_d).
    pub fn re(&self) -> CycloNum {
        (self + &self.conj()).scale(&q(1, 2))
    }

    pub fn scale(&self, r: &Q) -> CycloNum {
        CycloNum { d: self.d, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn pow(&self, mut e: u32) -> CycloNum {
        let mut base = self.clone();
        let mut acc = CycloNum::one(self.d);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<CycloNum, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.coeffs.len();
        // columns: coordinates of self·ζ^k
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            let mut poly = vec![Q::zero(); n + k];
            for (i, c) in self.coeffs.iter().enumerate() {
                poly[i + k] = c.clone();
            }
            cols.push(CycloNum::from_poly(self.d, poly).coeffs);
        }
        let mut a: Vec<Vec<Q>> = (0..n)
            .map(|r| {
                let mut row: Vec<Q> = (0..n).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { Q::one() } else { Q::zero() });
                row
            })
            .collect();
        let sol = solve_square(&mut a).ok_or(ExactError::DivisionByZero)?;
        Ok(CycloNum { d: self.d, coeffs: sol })
    }

    pub fn div(&self, other: &CycloNum) -> Result<CycloNum, ExactError> {
        let (a, b) = self.common(other);
        Ok(&a * &b.inv()?)
    }

    /// Quick uncertified f64 embedding.
    pub fn to_c64(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.d as f64;
            let v = rational_to_f64(c);
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("CycloNum serializes")
    }
}

/// ζ_d^k in canonical form.
pub fn cyclo(d: u32, k: i64) -> CycloNum {
    assert!(d >= 1, "root-of-unity order must be positive");
    let e = k.rem_euclid(d as i64) as usize;
    let mut poly = vec![Q::zero(); e + 1];
    poly[e] = Q::one();
    CycloNum::from_poly(d, poly)
}

/// Gaussian elimination on an augmented n×(n+1) matrix.
pub(crate) fn solve_square(a: &mut [Vec<Q>]) -> Option<Vec<Q>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for c in col..=n {
            let v = &a[col][c] / &p;
            a[col][c] = v;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
            }
        }
    }
    Some(a.iter().map(|row| row[n].clone()).collect())
}

/// Serde helpers writing rationals as "p/q" strings.
pub fn ser_q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_qvec<S: Serializer>(x: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|v| v.to_string()))
}

/// Row-reduces a matrix over Q(ζ_d) in place (entries promoted to a common
/// order) and returns the pivot columns.
pub fn cyclo_rref(m: &mut [Vec<CycloNum>]) -> Vec<usize> {
    let d = m.iter().flatten().map(|x| x.d).fold(1, |a, b| a.lcm(&b));
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x = x.promote(d);
        }
    }
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("nonzero pivot");
        m[r] = m[r].iter().map(|x| x * &inv).collect();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let sub: Vec<CycloNum> = m[r].iter().map(|x| x * &f).collect();
                for (x, s) in m[i].iter_mut().zip(&sub) {
                    *x = &*x - s;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

pub fn cyclo_rank(m: &[Vec<CycloNum>]) -> usize {
    let mut m = m.to_vec();
    cyclo_rref(&mut m).len()
}

/// Basis of {x : m·x = 0}.
pub fn cyclo_nullspace(m: &[Vec<CycloNum>]) -> Vec<Vec<CycloNum>> {
    let mut m = m.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let d = m.iter().flatten().map(|x| x.d).fold(1, |a, b| a.lcm(&b));
    let pivots = cyclo_rref(&mut m);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![CycloNum::zero(d); ncols];
        v[free] = CycloNum::one(d);
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[row][free];
        }
        basis.push(v);
    }
    basis
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        if self.d == other.d {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}
impl Eq for CycloNum {}

impl<'a> Add<&'a CycloNum> for &'a CycloNum {
    type Output = CycloNum;
    fn add(self, rhs: &CycloNum) -> CycloNum {
        let (mut a, b) = self.common(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x += y;
        }
        a
    }
}

impl<'a> Sub<&'a CycloNum> for &'a CycloNum {
    type Output = CycloNum;
    fn sub(self, rhs: &CycloNum) -> CycloNum {
        let (mut a, b) = self.common(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x -= y;
        }
        a
    }
}

impl<'a> Mul<&'a CycloNum> for &'a CycloNum {
    type Output = CycloNum;
    fn mul(self, rhs: &CycloNum) -> CycloNum {
        let (a, b) = self.common(rhs);
        let n = a.coeffs.len();
        let mut poly = vec![Q::zero(); 2 * n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    poly[i + j] += x * y;
                }
            }
        }
        CycloNum::from_poly(a.d, poly)
    }
}

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        self.scale(&-Q::one())
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: CycloNum) -> CycloNum {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: &CycloNum) -> CycloNum {
                (&self).$m(rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        -(&self)
    }
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if k == 1 {
                        write!(f, "z{}", self.d)?;
                    } else {
                        write!(f, "z{}^{}", self.d, k)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycloJson {
    d: u32,
    coeffs: Vec<String>,
}

impl Serialize for CycloNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CycloJson { d: self.d, coeffs: self.coeffs.iter().map(|c| c.to_string()).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloNum {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = CycloJson::deserialize(de)?;
        if j.d == 0 {
            return Err(D::Error::custom("d must be positive"));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        CycloNum::from_coeffs(j.d, coeffs).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// certified numerics

/// Rational ball `mid ± rad`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub mid: Q,
    pub rad: Q,
}

impl Ball {
    pub fn exact(mid: Q) -> Ball {
        Ball { mid, rad: Q::zero() }
    }
    pub fn lo(&self) -> Q {
        &self.mid - &self.rad
    }
    pub fn hi(&self) -> Q {
        &self.mid + &self.rad
    }
    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }
    fn add(&self, o: &Ball) -> Ball {
        Ball { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad }
    }
    fn scale(&self, r: &Q) -> Ball {
        Ball { mid: &self.mid * r, rad: &self.rad * r.abs() }
    }
    fn neg(&self) -> Ball {
        Ball { mid: -&self.mid, rad: self.rad.clone() }
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Rounds to the dyadic grid 2^{-bits}, returning the rounded value.
fn round_dyadic(x: &Q, bits: u32) -> Q {
    let s = pow2(bits);
    let n = (x * Q::from_integer(s.clone())).floor().to_integer();
    Q::new(n, s)
}

fn atan_inv(qn: i64, bits: u32) -> Ball {
    // alternating series Σ (-1)^n / ((2n+1) q^{2n+1})
    let eps = Q::new(BigInt::one(), pow2(bits + 4));
    let qq = Q::from_integer(BigInt::from(qn));
    let mut sum = Q::zero();
    let mut pw = qq.clone();
    let mut n: i64 = 0;
    loop {
        let term = Q::one() / (&pw * qi(2 * n + 1));
        if term < eps {
            return Ball { mid: round_dyadic(&sum, bits + 8), rad: term + Q::new(BigInt::one(), pow2(bits + 8)) };
        }
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        pw = &pw * &qq * &qq;
        n += 1;
    }
}

pub fn pi_ball(bits: u32) -> Ball {
    let a = atan_inv(5, bits + 6).scale(&qi(16));
    let b = atan_inv(239, bits + 6).scale(&qi(4));
    a.add(&b.neg())
}

/// cos and sin of a rational point x with |x| ≤ 2, alternating Taylor series
/// with rounded terms; each result carries its truncation and rounding error.
fn cos_sin_point(x: &Q, bits: u32) -> (Ball, Ball) {
    let g = bits + 24;
    let ulp = Q::new(BigInt::one(), pow2(g));
    let eps = Q::new(BigInt::one(), pow2(bits + 4));
    let x2 = round_dyadic(&(x * x), g);
    let series = |start: Q, first_den: i64| -> Ball {
        // terms t_{n} = t_{n-1} * x²/((k)(k+1))
        let mut t = start;
        let mut sum = Q::zero();
        let mut err = Q::zero();
        let mut k = first_den;
        let mut sign = true;
        loop {
            if t.abs() < eps && k > 4 {
                return Ball { mid: sum, rad: t.abs() + err + &eps };
            }
            if sign {
                sum += &t;
            } else {
                sum -= &t;
            }
            sign = !sign;
            t = round_dyadic(&(&t * &x2 / qi(k * (k + 1))), g);
            err += &ulp * qi(8 * k);
            k += 2;
        }
    };
    let c = series(Q::one(), 1);
    let s = series(round_dyadic(x, g), 2);
    (c, s)
}

fn cos_sin_2pi_frac(k: u64, d: u64, bits: u32) -> (Ball, Ball) {
    // reduce r = k/d to [0, 1/4] by symmetries
    let mut r = Q::new(BigInt::from(k % d), BigInt::from(d));
    let (mut cs, mut ss) = (1i64, 1i64);
    if r > q(1, 2) {
        r = Q::one() - r;
        ss = -ss;
    }
    if r > q(1, 4) {
        r = q(1, 2) - r;
        cs = -cs;
    }
    let pi = pi_ball(bits + 8);
    let two_r = &r * qi(2);
    let x = Ball { mid: round_dyadic(&(&pi.mid * &two_r), bits + 16), rad: &pi.rad * &two_r + Q::new(BigInt::one(), pow2(bits + 16)) };
    let (c, s) = cos_sin_point(&x.mid, bits + 4);
    let c = Ball { mid: c.mid, rad: c.rad + &x.rad }.scale(&qi(cs));
    let s = Ball { mid: s.mid, rad: s.rad + &x.rad }.scale(&qi(ss));
    (c, s)
}

fn root_table(d: u32, bits: u32) -> Arc<Vec<(Ball, Ball)>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<Vec<(Ball, Ball)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(d, bits)) {
        return t.clone();
    }
    let n = euler_phi(d);
    let t: Vec<(Ball, Ball)> = (0..n).map(|k| cos_sin_2pi_frac(k as u64, d as u64, bits + 2)).collect();
    let t = Arc::new(t);
    cache.lock().unwrap().insert((d, bits), t.clone());
    t
}

/// Certified enclosure of a complex number as a pair of rational balls.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexInterval {
    pub re: Ball,
    pub im: Ball,
}

impl ComplexInterval {
    pub fn mid_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.re.mid), rational_to_f64(&self.im.mid))
    }
    pub fn rad_f64(&self) -> f64 {
        rational_to_f64(&self.re.rad).max(rational_to_f64(&self.im.rad))
    }
    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }
}

/// Interval containing the image of x under ζ ↦ e^{2πi/d}; each component has
/// radius at most 2^{-precision-2}·height(x).
pub fn embed(x: &CycloNum, precision: u32) -> ComplexInterval {
    let table = root_table(x.d, precision.max(8));
    let mut re = Ball::exact(Q::zero());
    let mut im = Ball::exact(Q::zero());
    for (c, (cr, ci)) in x.coeffs.iter().zip(table.iter()) {
        if c.is_zero() {
            continue;
        }
        re = re.add(&cr.scale(c));
        im = im.add(&ci.scale(c));
    }
    ComplexInterval { re, im }
}

// ---------------------------------------------------------------------------
// phases

/// Phase φ of a nonzero value, exact when the value lies on a rational ray.
#[derive(Clone, Debug, PartialEq)]
pub enum Phase {
    Exact(RationalPhase),
    Approx { value: f64, error: f64 },
}

impl Phase {
    pub fn to_f64(&self) -> f64 {
        match self {
            Phase::Exact(r) => rational_to_f64(r),
            Phase::Approx { value, .. } => *value,
        }
    }
    pub fn exact(&self) -> Option<&Q> {
        match self {
            Phase::Exact(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Exact(r) => write!(f, "{r}"),
            Phase::Approx { value, error } => write!(f, "{value:.12} (±{error:.1e})"),
        }
    }
}

/// Moves φ into (start, start + 2].
pub fn normalize_phase(phi: &Q, start: &Q) -> Q {
    let m = ((phi - start - qi(2)) / qi(2)).ceil();
    phi - m * qi(2)
}

fn normalize_phase_f64(phi: f64, start: f64) -> f64 {
    let m = ((phi - start - 2.0) / 2.0).ceil();
    phi - 2.0 * m
}

/// Whether x lies on the ray R_{>0}·e^{iπ k/(2d)}, decided exactly.
fn on_rational_ray(x: &CycloNum, k: i64) -> bool {
    let l = 4 * x.d;
    let y = &x.promote(l) * &cyclo(l, -k);
    if !y.is_real() {
        return false;
    }
    positive_real(&y)
}

/// Sign test for a nonzero real element, by refining the embedding.
fn positive_real(y: &CycloNum) -> bool {
    let mut bits = 64;
    loop {
        let b = embed(y, bits);
        if !b.re.contains_zero() {
            return b.re.mid.is_positive();
        }
        bits *= 2;
        assert!(bits <= 1 << 14, "sign of a nonzero real value not resolved");
    }
}

fn approx_phase(x: &CycloNum) -> (f64, f64) {
    let mut bits = 64;
    loop {
        let b = embed(x, bits);
        let (re, im) = b.mid_f64();
        let r = (re * re + im * im).sqrt();
        let rad = rational_to_f64(&b.re.rad) + rational_to_f64(&b.im.rad);
        if r > 4.0 * rad && r > 0.0 {
            let err = rad / (r - rad) / std::f64::consts::PI + 4.0 * f64::EPSILON;
            if err < 1e-10 || bits >= 1 << 12 {
                return (im.atan2(re) / std::f64::consts::PI, err);
            }
        }
        bits *= 2;
        assert!(bits <= 1 << 14, "phase of a nonzero value not resolved");
    }
}

/// The phase φ ∈ (window_start, window_start + 2] with x ∈ R_{>0}e^{iπφ}.
pub fn phase_of(x: &CycloNum, window_start: &Q) -> Result<Phase, ExactError> {
    if x.is_zero() {
        return Err(ExactError::ZeroValue);
    }
    let (est, err) = approx_phase(x);
    let two_d = 2 * x.d as i64;
    let k0 = (est * two_d as f64).round() as i64;
    for k in [k0, k0 - 1, k0 + 1] {
        if ((k as f64) / two_d as f64 - est).abs() < 1e-6 && on_rational_ray(x, k) {
            let phi = Q::new(BigInt::from(k), BigInt::from(two_d));
            return Ok(Phase::Exact(normalize_phase(&phi, window_start)));
        }
    }
    let w = rational_to_f64(window_start);
    Ok(Phase::Approx { value: normalize_phase_f64(est, w), error: err })
}

/// Whether x and y span the same ray (both nonzero).
pub fn same_ray(x: &CycloNum, y: &CycloNum) -> bool {
    let w = x * &y.conj();
    w.is_real() && positive_real(&w)
}

/// Certified phase bound used for repeated comparisons.
#[derive(Clone, Debug)]
pub struct PhaseKey {
    pub value: f64,
    pub error: f64,
    pub z: CycloNum,
}

impl PhaseKey {
    /// Phase of z placed in (start, start + 2].
    pub fn new(z: &CycloNum, start: f64) -> Result<PhaseKey, ExactError> {
        if z.is_zero() {
            return Err(ExactError::ZeroValue);
        }
        let (v, e) = approx_phase(z);
        Ok(PhaseKey { value: normalize_phase_f64(v, start), error: e, z: z.clone() })
    }

    /// Exact-aware comparison: ties within error are resolved by an exact
    /// ray test; distinct rays this close are separated by the error bound
    /// (< 1e-10), which suffices for every lattice in scope.
    pub fn cmp(&self, other: &PhaseKey) -> Ordering {
        let gap = self.value - other.value;
        if gap.abs() > self.error + other.error {
            return if gap > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        if same_ray(&self.z, &other.z) {
            return Ordering::Equal;
        }
        if gap > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(12), 4);
    }

    #[test]
    fn constructor_examples() {
        assert_eq!(cyclo(4, 1).coeffs(), &[qi(0), qi(1)]);
        assert_eq!(cyclo(3, 2).coeffs(), &[qi(-1), qi(-1)]);
        assert_eq!(cyclo(6, 3), CycloNum::from_int(6, -1));
    }

    #[test]
    fn mixed_orders_promote() {
        let i = cyclo(4, 1);
        let w = cyclo(3, 1);
        let p = &i * &w;
        assert_eq!(p.order(), 12);
        assert_eq!(p, cyclo(12, 7));
        assert_eq!(CycloNum::one(3), CycloNum::one(5));
    }

    #[test]
    fn inverse_roundtrip() {
        let x = &CycloNum::one(5) - &cyclo(5, 2);
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, CycloNum::one(5));
        assert!(CycloNum::zero(5).inv().is_err());
    }

    #[test]
    fn embed_examples() {
        let b = embed(&cyclo(4, 1), 64);
        assert!(b.re.contains_zero());
        assert!((b.mid_f64().1 - 1.0).abs() < 1e-15);
        let z = &CycloNum::one(3) - &cyclo(3, 1);
        let (re, im) = embed(&z, 64).mid_f64();
        assert!((re - 1.5).abs() < 1e-12 && (im + 0.75f64.sqrt()).abs() < 1e-12);
        let zero = embed(&CycloNum::zero(7), 64);
        assert_eq!(zero.re, Ball::exact(Q::zero()));
    }

    #[test]
    fn embed_width_bound() {
        let x = CycloNum::from_poly(7, vec![q(3, 2), qi(-4), q(1, 3), qi(5)]);
        for prec in [20u32, 53, 100, 200] {
            let b = embed(&x, prec);
            let bound = x.height() * Q::new(BigInt::one(), pow2(prec + 1));
            assert!(b.re.rad.clone() * qi(2) <= bound);
            assert!(b.im.rad.clone() * qi(2) <= bound);
        }
        let pi = pi_ball(200);
        let s = "3.14159265358979323846264338327950288419716939937510";
        let approx = parse_rational(&format!("{}/{}", s.replace('.', ""), "1".to_string() + &"0".repeat(50))).unwrap();
        assert!((pi.mid - approx).abs() < q(1, 1_000_000_000_000_000));
    }

    #[test]
    fn phase_examples() {
        let x = &CycloNum::one(4) - &cyclo(4, 1);
        assert_eq!(phase_of(&x, &qi(-1)).unwrap(), Phase::Exact(q(-1, 4)));
        assert_eq!(phase_of(&CycloNum::from_int(4, -1), &qi(0)).unwrap(), Phase::Exact(qi(1)));
        let cw = CycloNum::from_poly(4, vec![qi(2), qi(2)]);
        assert_eq!(phase_of(&cw, &qi(0)).unwrap(), Phase::Exact(q(1, 4)));
        assert_eq!(phase_of(&CycloNum::zero(3), &qi(0)), Err(ExactError::ZeroValue));
        // i lies on a ray of denominator 2 even for d = 3
        let i3 = cyclo(12, 3);
        let v = CycloNum::from_int(3, 2) * i3;
        assert_eq!(phase_of(&v, &qi(0)).unwrap(), Phase::Exact(q(1, 2)));
    }

    #[test]
    fn irrational_ray_is_approximate() {
        let x = CycloNum::from_poly(5, vec![qi(1), qi(1)]) + CycloNum::from_int(5, 1);
        match phase_of(&x, &qi(-1)).unwrap() {
            Phase::Approx { value, error } => {
                let (re, im) = x.to_c64();
                assert!((value - im.atan2(re) / std::f64::consts::PI).abs() < 1e-12);
                assert!(error < 1e-9);
            }
            p => panic!("unexpected exact phase {p:?}"),
        }
    }

    #[test]
    fn json_roundtrip() {
        let x = CycloNum::from_poly(6, vec![q(3, 2), qi(-1)]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"d":6,"coeffs":["3/2","-1"]}"#);
        let y: CycloNum = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        assert!(serde_json::from_str::<CycloNum>(r#"{"d":6,"coeffs":["1"]}"#).is_err());
    }

    #[test]
    fn phase_key_ordering() {
        let a = PhaseKey::new(&cyclo(8, 1), -1.0).unwrap();
        let b = PhaseKey::new(&(cyclo(8, 1) * CycloNum::from_int(8, 3)), -1.0).unwrap();
        let c = PhaseKey::new(&cyclo(8, 2), -1.0).unwrap();
        assert_eq!(a.cmp(&b), Ordering::Equal);
        assert_eq!(a.cmp(&c), Ordering::Less);
    }
}
