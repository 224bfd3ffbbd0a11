//! Exact cyclotomic scalars, a float complex backend, and the coefficient
//! trait shared by scalar- and matrix-valued functions.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::padic::{ipow, Root, Q};

fn ck_mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("exact arithmetic overflow")
}

fn ck_add(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("exact arithmetic overflow")
}

/// φ(p^m), the degree of Q(ζ_{p^m}).
pub fn phi(p: u64, m: u32) -> usize {
    if m == 0 {
        1
    } else {
        ((p - 1) * ipow(p, m - 1) as u64) as usize
    }
}

/// Element of Q(ζ_{p^m}) on the power basis 1, ζ, …, ζ^{φ-1}, with a
/// common denominator. Always canonical: reduced modulo Φ_{p^m}, gcd-free,
/// and stored in the smallest cyclotomic subfield containing it. Rationals
/// use `p = 0, m = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycScalar {
    p: u64,
    m: u32,
    den: i128,
    num: Vec<i128>,
}

impl CycScalar {
    pub fn zero() -> CycScalar {
        CycScalar {
            p: 0,
            m: 0,
            den: 1,
            num: vec![0],
        }
    }

    pub fn one() -> CycScalar {
        CycScalar::int(1)
    }

    pub fn int(n: i128) -> CycScalar {
        CycScalar {
            p: 0,
            m: 0,
            den: 1,
            num: vec![n],
        }
    }

    pub fn rational(n: i128, d: i128) -> CycScalar {
        assert!(d != 0);
        let mut c = CycScalar {
            p: 0,
            m: 0,
            den: d,
            num: vec![n],
        };
        c.normalize();
        c
    }

    pub fn from_q(q: &Q) -> CycScalar {
        CycScalar::rational(*q.numer(), *q.denom())
    }

    pub fn from_root(r: Root) -> CycScalar {
        if r.m == 0 {
            return CycScalar::one();
        }
        let n = ipow(r.p, r.m) as usize;
        let mut g = vec![0i128; n];
        g[r.e as usize] = 1;
        CycScalar::from_group_ring(r.p, r.m, 1, g)
    }

    /// Builds from coefficients on the power basis of Q(ζ_{p^m}).
    pub fn from_coeffs(p: u64, m: u32, coeffs: &[Q]) -> Result<CycScalar> {
        if coeffs.len() != phi(p, m) {
            return Err(Error::Parse(format!(
                "expected {} coefficients for Q(ζ_{}^{})",
                phi(p, m),
                p,
                m
            )));
        }
        let den = coeffs.iter().fold(1i128, |l, c| l.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| ck_mul(*c.numer(), den / c.denom()))
            .collect();
        let mut c = CycScalar { p, m, den, num };
        c.normalize();
        Ok(c)
    }

    pub fn depth(&self) -> (u64, u32) {
        (self.p, self.m)
    }

    /// Coefficients on the power basis (as rationals).
    pub fn coeffs(&self) -> Vec<Q> {
        self.num.iter().map(|n| Q::new(*n, self.den)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.num[0] == 0
    }

    pub fn as_rational(&self) -> Option<Q> {
        (self.m == 0).then(|| Q::new(self.num[0], self.den))
    }

    fn from_group_ring(p: u64, m: u32, den: i128, mut g: Vec<i128>) -> CycScalar {
        fold(p, m, &mut g);
        let mut c = CycScalar { p, m, den, num: g };
        c.normalize();
        c
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.den = -self.den;
            for x in self.num.iter_mut() {
                *x = -*x;
            }
        }
        let mut g = self.den;
        for x in &self.num {
            if g == 1 {
                break;
            }
            g = g.gcd(x);
        }
        if g > 1 {
            self.den /= g;
            for x in self.num.iter_mut() {
                *x /= g;
            }
        }
        if self.num.iter().all(|x| *x == 0) {
            *self = CycScalar::zero();
            return;
        }
        // descend to the smallest subfield
        while self.m >= 2 {
            let p = self.p as usize;
            if self
                .num
                .iter()
                .enumerate()
                .any(|(k, x)| *x != 0 && k % p != 0)
            {
                break;
            }
            self.num = self.num.iter().step_by(p).copied().collect();
            self.m -= 1;
        }
        if self.m == 1 && self.num[1..].iter().all(|x| *x == 0) {
            self.num.truncate(1);
            self.m = 0;
        }
        if self.m == 0 {
            self.p = 0;
        }
    }

    /// Coefficients lifted to Q(ζ_{p^m}) for m >= self.m, as a group-ring
    /// vector of length p^m (entries beyond φ are zero).
    fn lifted(&self, p: u64, m: u32) -> Vec<i128> {
        let n = if m == 0 { 1 } else { ipow(p, m) as usize };
        let mut g = vec![0i128; n];
        let step = if self.m == 0 {
            0
        } else {
            ipow(p, m - self.m) as usize
        };
        for (k, x) in self.num.iter().enumerate() {
            if *x != 0 {
                g[k * step] = *x;
            }
        }
        g
    }

    fn target(&self, o: &CycScalar) -> (u64, u32) {
        let p = if self.p != 0 { self.p } else { o.p };
        assert!(
            self.p == 0 || o.p == 0 || self.p == o.p,
            "cyclotomic fields over different primes"
        );
        (p, self.m.max(o.m))
    }

    pub fn add(&self, o: &CycScalar) -> CycScalar {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let (p, m) = self.target(o);
        let den = self.den.lcm(&o.den);
        let (fa, fb) = (den / self.den, den / o.den);
        let a = self.lifted(p, m);
        let b = o.lifted(p, m);
        let g: Vec<i128> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| ck_add(ck_mul(*x, fa), ck_mul(*y, fb)))
            .collect();
        CycScalar::from_group_ring(p, m, den, g)
    }

    pub fn neg(&self) -> CycScalar {
        CycScalar {
            p: self.p,
            m: self.m,
            den: self.den,
            num: self.num.iter().map(|x| -x).collect(),
        }
    }

    pub fn sub(&self, o: &CycScalar) -> CycScalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &CycScalar) -> CycScalar {
        if self.is_zero() || o.is_zero() {
            return CycScalar::zero();
        }
        if self.m == 0 {
            return o.scale_int(self.num[0], self.den);
        }
        if o.m == 0 {
            return self.scale_int(o.num[0], o.den);
        }
        let (p, m) = self.target(o);
        let n = ipow(p, m) as usize;
        let a = self.lifted(p, m);
        let b = o.lifted(p, m);
        let f = phi(p, m);
        let mut g = vec![0i128; n];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                if b[j] != 0 {
                    let k = (i + j) % n;
                    g[k] = ck_add(g[k], ck_mul(a[i], b[j]));
                }
            }
        }
        CycScalar::from_group_ring(p, m, ck_mul(self.den, o.den), g)
    }

    fn scale_int(&self, n: i128, d: i128) -> CycScalar {
        let mut c = CycScalar {
            p: self.p,
            m: self.m,
            den: ck_mul(self.den, d),
            num: self.num.iter().map(|x| ck_mul(*x, n)).collect(),
        };
        c.normalize();
        c
    }

    pub fn scale_q(&self, q: &Q) -> CycScalar {
        self.scale_int(*q.numer(), *q.denom())
    }

    pub fn mul_root(&self, r: Root) -> CycScalar {
        if r.m == 0 || self.is_zero() {
            return self.clone();
        }
        let p = r.p;
        assert!(
            self.p == 0 || self.p == p,
            "cyclotomic fields over different primes"
        );
        let m = self.m.max(r.m);
        let n = ipow(p, m) as usize;
        let a = self.lifted(p, m);
        let shift = (r.e * ipow(p, m - r.m)) as usize;
        let mut g = vec![0i128; n];
        for (k, x) in a.iter().enumerate() {
            if *x != 0 {
                g[(k + shift) % n] = *x;
            }
        }
        CycScalar::from_group_ring(p, m, self.den, g)
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> CycScalar {
        if self.m == 0 {
            return self.clone();
        }
        let n = ipow(self.p, self.m) as usize;
        let mut g = vec![0i128; n];
        for (k, x) in self.num.iter().enumerate() {
            g[(n - k) % n] = *x;
        }
        CycScalar::from_group_ring(self.p, self.m, self.den, g)
    }

    pub fn to_c64(&self) -> Complex64 {
        if self.m == 0 {
            return Complex64::new(self.num[0] as f64 / self.den as f64, 0.0);
        }
        let n = ipow(self.p, self.m) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, x) in self.num.iter().enumerate() {
            if *x != 0 {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n;
                acc += Complex64::new(t.cos(), t.sin()) * (*x as f64);
            }
        }
        acc / self.den as f64
    }

    /// |c| when it is rational (c·c̄ a rational square), else `None`.
    pub fn abs_exact(&self) -> Option<Q> {
        let r = self.mul(&self.conj()).as_rational()?;
        let sn = isqrt(*r.numer())?;
        let sd = isqrt(*r.denom())?;
        Some(Q::new(sn, sd))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs()
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect()
    }

    pub fn from_strings(p: u64, strs: &[String]) -> Result<CycScalar> {
        let mut m = 0;
        while phi(p, m) < strs.len() {
            m += 1;
        }
        if phi(p, m) != strs.len() {
            return Err(Error::Parse(format!(
                "{} coefficients is not a cyclotomic degree for p={p}",
                strs.len()
            )));
        }
        let coeffs = strs
            .iter()
            .map(|s| parse_q(s))
            .collect::<Result<Vec<_>>>()?;
        CycScalar::from_coeffs(if m == 0 { 0 } else { p }, m, &coeffs)
    }
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Reduces a group-ring vector of length p^m modulo Φ_{p^m} in place and
/// truncates it to the power basis.
fn fold(p: u64, m: u32, g: &mut Vec<i128>) {
    if m == 0 {
        g.truncate(1);
        return;
    }
    let n = ipow(p, m) as usize;
    let f = phi(p, m);
    let q = ipow(p, m - 1) as usize;
    debug_assert_eq!(g.len(), n);
    for j in f..n {
        let c = g[j];
        if c != 0 {
            for i in 1..p as usize {
                g[j - i * q] -= c;
            }
        }
    }
    g.truncate(f);
}

/// Accumulates Σ c_i·ζ_i in the group ring of a common cyclotomic field,
/// avoiding a canonical reduction per term.
#[derive(Clone, Debug)]
pub struct CycAcc {
    p: u64,
    m: u32,
    den: i128,
    g: Vec<i128>,
}

impl Default for CycAcc {
    fn default() -> Self {
        CycAcc {
            p: 0,
            m: 0,
            den: 1,
            g: vec![0],
        }
    }
}

impl CycAcc {
    fn grow(&mut self, p: u64, m: u32) {
        if m <= self.m {
            return;
        }
        let n = ipow(p, m) as usize;
        let step = if self.m == 0 {
            0
        } else {
            ipow(p, m - self.m) as usize
        };
        let mut g = vec![0i128; n];
        for (k, x) in self.g.iter().enumerate() {
            if *x != 0 {
                g[k * step] = *x;
            }
        }
        self.p = p;
        self.m = m;
        self.g = g;
    }

    pub fn add_rooted(&mut self, c: &CycScalar, r: Root) {
        if c.is_zero() {
            return;
        }
        let p = if c.p != 0 { c.p } else { r.p };
        let m = self.m.max(c.m).max(r.m);
        if m > 0 {
            self.grow(p, m);
        }
        let l = self.den.lcm(&c.den);
        if l != self.den {
            let f = l / self.den;
            for x in self.g.iter_mut() {
                *x = ck_mul(*x, f);
            }
            self.den = l;
        }
        let cf = l / c.den;
        let n = self.g.len();
        let shift = if r.m == 0 {
            0
        } else {
            (r.e * ipow(p, m - r.m)) as usize
        };
        let step = if c.m == 0 {
            0
        } else {
            ipow(p, m - c.m) as usize
        };
        for (k, x) in c.num.iter().enumerate() {
            if *x != 0 {
                let i = (k * step + shift) % n;
                self.g[i] = ck_add(self.g[i], ck_mul(*x, cf));
            }
        }
    }

    pub fn finish(self) -> CycScalar {
        if self.m == 0 {
            return CycScalar::rational(self.g[0], self.den);
        }
        CycScalar::from_group_ring(self.p, self.m, self.den, self.g)
    }
}

/// Accumulator for `Scalar`: exact until a float term arrives.
#[derive(Clone, Debug)]
pub enum ScalarAcc {
    Exact(CycAcc),
    Float(Complex64),
}

impl Default for ScalarAcc {
    fn default() -> Self {
        ScalarAcc::Exact(CycAcc::default())
    }
}

impl ScalarAcc {
    pub fn add_rooted(&mut self, v: &Scalar, r: Root) {
        match (&mut *self, v) {
            (ScalarAcc::Exact(a), Scalar::Exact(c)) => a.add_rooted(c, r),
            (ScalarAcc::Float(z), v) => *z += v.to_c64() * r.to_c64(),
            (ScalarAcc::Exact(a), Scalar::Float(w)) => {
                let z = std::mem::take(a).finish().to_c64();
                *self = ScalarAcc::Float(z + w * r.to_c64());
            }
        }
    }

    pub fn add(&mut self, v: &Scalar) {
        if !v.is_zero() {
            self.add_rooted(v, Root::one(3));
        }
    }

    pub fn finish(self) -> Scalar {
        match self {
            ScalarAcc::Exact(a) => Scalar::Exact(a.finish()),
            ScalarAcc::Float(z) => Scalar::Float(z),
        }
    }
}

/// A scalar on either backend. Exact rationals combine freely with floats;
/// irrational exact values mixed with floats are a backend error.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(CycScalar),
    Float(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Exact(CycScalar::zero())
    }

    pub fn one() -> Scalar {
        Scalar::Exact(CycScalar::one())
    }

    pub fn int(n: i128) -> Scalar {
        Scalar::Exact(CycScalar::int(n))
    }

    pub fn rat(n: i128, d: i128) -> Scalar {
        Scalar::Exact(CycScalar::rational(n, d))
    }

    pub fn from_q(q: &Q) -> Scalar {
        Scalar::Exact(CycScalar::from_q(q))
    }

    pub fn from_root(r: Root) -> Scalar {
        Scalar::Exact(CycScalar::from_root(r))
    }

    pub fn float(re: f64, im: f64) -> Scalar {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn on(&self, b: Backend) -> Scalar {
        match (self, b) {
            (Scalar::Exact(c), Backend::Float) => Scalar::Float(c.to_c64()),
            _ => self.clone(),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(c) => c.to_c64(),
            Scalar::Float(z) => *z,
        }
    }

    pub fn exact(&self) -> Option<&CycScalar> {
        match self {
            Scalar::Exact(c) => Some(c),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.conj()),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn mul_root(&self, r: Root) -> Scalar {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.mul_root(r)),
            Scalar::Float(z) => Scalar::Float(z * r.to_c64()),
        }
    }

    pub fn scale_q(&self, q: &Q) -> Scalar {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.scale_q(q)),
            Scalar::Float(z) => Scalar::Float(z * (*q.numer() as f64 / *q.denom() as f64)),
        }
    }

    /// Strict binary operation: errors when backends differ.
    pub fn try_op(&self, o: &Scalar, op: ScalarOp) -> Result<Scalar> {
        if self.backend() != o.backend() {
            return Err(Error::MixedBackends);
        }
        Ok(match op {
            ScalarOp::Add => self + o,
            ScalarOp::Mul => self * o,
        })
    }

    fn pair<'a>(a: &'a Scalar, b: &'a Scalar) -> Pair<'a> {
        match (a, b) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Pair::Exact(x, y),
            (Scalar::Float(x), Scalar::Float(y)) => Pair::Float(*x, *y),
            (Scalar::Exact(x), Scalar::Float(y)) => Pair::Float(promote(x), *y),
            (Scalar::Float(x), Scalar::Exact(y)) => Pair::Float(*x, promote(y)),
        }
    }

    pub fn approx_eq(&self, o: &Scalar, tol: f64) -> bool {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_c64() - o.to_c64()).norm() <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ScalarOp {
    Add,
    Mul,
}

enum Pair<'a> {
    Exact(&'a CycScalar, &'a CycScalar),
    Float(Complex64, Complex64),
}

fn promote(c: &CycScalar) -> Complex64 {
    assert!(c.m == 0, "mixed scalar backends");
    c.to_c64()
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match Scalar::pair(self, o) {
            Pair::Exact(a, b) => Scalar::Exact(a.add(b)),
            Pair::Float(a, b) => Scalar::Float(a + b),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        match Scalar::pair(self, o) {
            Pair::Exact(a, b) => Scalar::Exact(a.sub(b)),
            Pair::Float(a, b) => Scalar::Float(a - b),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match Scalar::pair(self, o) {
            Pair::Exact(a, b) => Scalar::Exact(a.mul(b)),
            Pair::Float(a, b) => Scalar::Float(a * b),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.neg()),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Element of the space of function values: scalars, or elements of a
/// finite-dimensional *-algebra realised as square matrices.
pub trait Coeff: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Space: Clone + Debug + PartialEq + Send + Sync;

    fn zero(space: &Self::Space) -> Self;
    fn one(space: &Self::Space) -> Self;
    fn space(&self) -> Self::Space;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn star(&self) -> Self;
    fn scale(&self, s: &Scalar) -> Self;
    fn scale_q(&self, q: &Q) -> Self;
    fn mul_root(&self, r: Root) -> Self;
    /// C*-norm (float).
    fn norm(&self) -> f64;
    fn on(&self, b: Backend) -> Self;
    fn approx_eq(&self, o: &Self, tol: f64) -> bool;
    /// Size k of the k×k scalar block representing an element.
    fn block_dim(space: &Self::Space) -> usize;
    fn block(&self, i: usize, j: usize) -> Scalar;
    fn from_block(space: &Self::Space, entries: Vec<Scalar>) -> Self;

    type Acc: Send;
    fn acc_new(space: &Self::Space) -> Self::Acc;
    /// acc += v·r
    fn acc_add(acc: &mut Self::Acc, v: &Self, r: Root);
    fn acc_finish(acc: Self::Acc, space: &Self::Space) -> Self;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Exact |c| where available (used for exact sup norms).
    fn norm_exact(&self) -> Option<Q> {
        None
    }

    /// Entrywise |c|² summed, exactly (Hilbert–Schmidt weight).
    fn hs_sq(&self) -> Scalar {
        let k = Self::block_dim(&self.space());
        let mut acc = Scalar::zero();
        for i in 0..k {
            for j in 0..k {
                let b = self.block(i, j);
                acc = &acc + &(&b.conj() * &b);
            }
        }
        acc
    }
}

impl Coeff for Scalar {
    type Space = ();

    fn zero(_: &()) -> Scalar {
        Scalar::zero()
    }
    fn one(_: &()) -> Scalar {
        Scalar::one()
    }
    fn space(&self) {}
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Scalar) -> Scalar {
        self + o
    }
    fn neg(&self) -> Scalar {
        -self
    }
    fn mul(&self, o: &Scalar) -> Scalar {
        self * o
    }
    fn star(&self) -> Scalar {
        self.conj()
    }
    fn scale(&self, s: &Scalar) -> Scalar {
        self * s
    }
    fn scale_q(&self, q: &Q) -> Scalar {
        Scalar::scale_q(self, q)
    }
    fn mul_root(&self, r: Root) -> Scalar {
        Scalar::mul_root(self, r)
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn on(&self, b: Backend) -> Scalar {
        Scalar::on(self, b)
    }
    fn approx_eq(&self, o: &Scalar, tol: f64) -> bool {
        Scalar::approx_eq(self, o, tol)
    }
    fn block_dim(_: &()) -> usize {
        1
    }
    fn block(&self, _: usize, _: usize) -> Scalar {
        self.clone()
    }
    fn from_block(_: &(), mut e: Vec<Scalar>) -> Scalar {
        e.pop().unwrap()
    }
    fn norm_exact(&self) -> Option<Q> {
        self.exact()?.abs_exact()
    }

    type Acc = ScalarAcc;
    fn acc_new(_: &()) -> ScalarAcc {
        ScalarAcc::default()
    }
    fn acc_add(acc: &mut ScalarAcc, v: &Scalar, r: Root) {
        acc.add_rooted(v, r)
    }
    fn acc_finish(acc: ScalarAcc, _: &()) -> Scalar {
        acc.finish()
    }
}

/// Square matrix over `Scalar`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub n: usize,
    pub e: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(n: usize) -> Mat {
        Mat {
            n,
            e: vec![Scalar::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.e[i * n + i] = Scalar::one();
        }
        m
    }

    /// Matrix unit e_{ij}.
    pub fn unit(n: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(n);
        m.e[i * n + j] = Scalar::one();
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.e[i * self.n + j] = v;
    }

    pub fn to_c64(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_c64())
    }

    pub fn trace(&self) -> Scalar {
        (0..self.n).fold(Scalar::zero(), |acc, i| &acc + self.get(i, i))
    }
}

/// Largest singular value of a complex matrix.
pub fn op_norm_c64(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

impl Coeff for Mat {
    type Space = usize;

    fn zero(n: &usize) -> Mat {
        Mat::zeros(*n)
    }
    fn one(n: &usize) -> Mat {
        Mat::identity(*n)
    }
    fn space(&self) -> usize {
        self.n
    }
    fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }
    fn add(&self, o: &Mat) -> Mat {
        assert_eq!(self.n, o.n, "matrix size mismatch");
        Mat {
            n: self.n,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect(),
        }
    }
    fn neg(&self) -> Mat {
        Mat {
            n: self.n,
            e: self.e.iter().map(|a| -a).collect(),
        }
    }
    fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.n, o.n, "matrix size mismatch");
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + &(a * b);
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }
    fn star(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }
    fn scale(&self, s: &Scalar) -> Mat {
        Mat {
            n: self.n,
            e: self.e.iter().map(|a| a * s).collect(),
        }
    }
    fn scale_q(&self, q: &Q) -> Mat {
        Mat {
            n: self.n,
            e: self.e.iter().map(|a| a.scale_q(q)).collect(),
        }
    }
    fn mul_root(&self, r: Root) -> Mat {
        Mat {
            n: self.n,
            e: self.e.iter().map(|a| a.mul_root(r)).collect(),
        }
    }
    fn norm(&self) -> f64 {
        op_norm_c64(&self.to_c64())
    }
    fn on(&self, b: Backend) -> Mat {
        Mat {
            n: self.n,
            e: self.e.iter().map(|a| a.on(b)).collect(),
        }
    }
    fn approx_eq(&self, o: &Mat, tol: f64) -> bool {
        self.n == o.n && self.e.iter().zip(&o.e).all(|(a, b)| a.approx_eq(b, tol))
    }
    fn block_dim(n: &usize) -> usize {
        *n
    }
    fn block(&self, i: usize, j: usize) -> Scalar {
        self.get(i, j).clone()
    }
    fn from_block(n: &usize, e: Vec<Scalar>) -> Mat {
        assert_eq!(e.len(), n * n);
        Mat { n: *n, e }
    }

    type Acc = Vec<ScalarAcc>;
    fn acc_new(n: &usize) -> Vec<ScalarAcc> {
        vec![ScalarAcc::default(); n * n]
    }
    fn acc_add(acc: &mut Vec<ScalarAcc>, v: &Mat, r: Root) {
        for (a, x) in acc.iter_mut().zip(&v.e) {
            if !x.is_zero() {
                a.add_rooted(x, r);
            }
        }
    }
    fn acc_finish(acc: Vec<ScalarAcc>, n: &usize) -> Mat {
        Mat {
            n: *n,
            e: acc.into_iter().map(|a| a.finish()).collect(),
        }
    }
}

/// JSON form of a scalar: exact values as arrays of "num/den" strings on the
/// power basis, floats as `[re, im]`.
pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(c) => Value::Array(c.to_strings().into_iter().map(Value::String).collect()),
        Scalar::Float(z) => serde_json::json!([z.re, z.im]),
    }
}

pub fn scalar_from_json(p: u64, v: &Value) -> Result<Scalar> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("scalar must be an array".into()))?;
    if arr.iter().all(|x| x.is_string()) {
        let strs: Vec<String> = arr
            .iter()
            .map(|x| x.as_str().unwrap().to_string())
            .collect();
        return Ok(Scalar::Exact(CycScalar::from_strings(p, &strs)?));
    }
    if arr.len() == 2 && arr.iter().all(|x| x.is_number()) {
        return Ok(Scalar::float(
            arr[0].as_f64().unwrap(),
            arr[1].as_f64().unwrap(),
        ));
    }
    Err(Error::Parse(
        "scalar must be exact coefficient strings or [re, im]".into(),
    ))
}

/// JSON codec for coefficient types.
pub trait CoeffJson: Coeff {
    fn to_json(&self) -> Value;
    fn from_json(p: u64, space: &Self::Space, v: &Value) -> Result<Self>;
    fn space_from_json(v: &Value) -> Result<Self::Space>;
    fn space_to_json(space: &Self::Space) -> Option<Value>;
}

impl CoeffJson for Scalar {
    fn to_json(&self) -> Value {
        scalar_to_json(self)
    }
    fn from_json(p: u64, _: &(), v: &Value) -> Result<Scalar> {
        scalar_from_json(p, v)
    }
    fn space_from_json(_: &Value) -> Result<()> {
        Ok(())
    }
    fn space_to_json(_: &()) -> Option<Value> {
        None
    }
}

impl CoeffJson for Mat {
    fn to_json(&self) -> Value {
        Value::Array(
            (0..self.n)
                .map(|i| {
                    Value::Array(
                        (0..self.n)
                            .map(|j| scalar_to_json(self.get(i, j)))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
    fn from_json(p: u64, n: &usize, v: &Value) -> Result<Mat> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        if rows.len() != *n {
            return Err(Error::Parse(format!("expected {n} rows")));
        }
        let mut e = Vec::with_capacity(n * n);
        for r in rows {
            let r = r
                .as_array()
                .ok_or_else(|| Error::Parse("matrix row".into()))?;
            if r.len() != *n {
                return Err(Error::Parse(format!("expected {n} columns")));
            }
            for x in r {
                e.push(scalar_from_json(p, x)?);
            }
        }
        Ok(Mat { n: *n, e })
    }
    fn space_from_json(v: &Value) -> Result<usize> {
        v.as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| Error::Parse("matrix size".into()))
    }
    fn space_to_json(n: &usize) -> Option<Value> {
        Some(Value::from(*n))
    }
}

impl Zero for Scalar {
    fn zero() -> Scalar {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl One for Scalar {
    fn one() -> Scalar {
        Scalar::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, e: i128, m: u32) -> CycScalar {
        CycScalar::from_root(Root::new(p, e, m))
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let s = z(3, 1, 1).add(&z(3, 2, 1)).add(&CycScalar::one());
        assert!(s.is_zero());
    }

    #[test]
    fn conj_negates_phase() {
        assert_eq!(z(3, 2, 2).conj(), z(3, 7, 2));
    }

    #[test]
    fn group_law() {
        assert_eq!(z(3, 1, 1).mul(&z(3, 1, 1)), z(3, 2, 1));
        assert_eq!(z(3, 4, 2).mul(&z(3, 5, 2)), CycScalar::one());
        assert_eq!(z(5, 3, 2).mul_root(Root::new(5, 2, 1)), z(5, 13, 2));
    }

    #[test]
    fn all_roots_of_depth_sum_to_zero() {
        for p in [3u64, 5, 7] {
            for m in 1..=3 {
                let n = ipow(p, m);
                let mut acc = CycScalar::zero();
                for e in 0..n {
                    acc = acc.add(&z(p, e, m));
                }
                assert!(acc.is_zero(), "p={p} m={m}");
            }
        }
    }

    #[test]
    fn subfield_descent() {
        // ζ_9^3 = ζ_3
        assert_eq!(z(3, 3, 2), z(3, 1, 1));
        assert_eq!(z(3, 3, 2).depth(), (3, 1));
        let r = z(3, 1, 2).mul(&z(3, 8, 2));
        assert_eq!(r.as_rational(), Some(Q::from_integer(1)));
    }

    #[test]
    fn to_complex_values() {
        let w = z(3, 1, 1).to_c64();
        assert!((w.re + 0.5).abs() < 1e-15 && (w.im - 0.75f64.sqrt()).abs() < 1e-15);
        let r = CycScalar::rational(13, 9).to_c64();
        assert!((r.re - 13.0 / 9.0).abs() < 1e-15 && r.im == 0.0);
        assert_eq!(CycScalar::zero().to_c64(), Complex64::new(0.0, 0.0));
        for e in 0..27 {
            assert!((z(3, e, 3).to_c64().norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn abs_exact_of_scaled_root() {
        let c = z(3, 2, 2).scale_q(&Q::new(-5, 3));
        assert_eq!(c.abs_exact(), Some(Q::new(5, 3)));
        assert_eq!(
            z(3, 1, 1).add(&CycScalar::one()).abs_exact(),
            Some(Q::from_integer(1))
        );
        assert_eq!(z(3, 1, 2).add(&CycScalar::one()).abs_exact(), None);
    }

    #[test]
    fn string_round_trip() {
        let c = z(3, 5, 2)
            .scale_q(&Q::new(2, 7))
            .add(&CycScalar::rational(1, 3));
        let s = c.to_strings();
        assert_eq!(CycScalar::from_strings(3, &s).unwrap(), c);
    }

    #[test]
    fn accumulator_matches_direct_sum() {
        let vals = [
            z(3, 1, 1).scale_q(&Q::new(1, 2)),
            CycScalar::rational(2, 3),
            z(3, 5, 2),
        ];
        let roots = [Root::new(3, 4, 3), Root::new(3, 1, 1), Root::one(3)];
        let mut acc = CycAcc::default();
        let mut direct = CycScalar::zero();
        for (v, r) in vals.iter().zip(roots) {
            acc.add_rooted(v, r);
            direct = direct.add(&v.mul_root(r));
        }
        assert_eq!(acc.finish(), direct);
        assert!(CycAcc::default().finish().is_zero());
    }

    #[test]
    fn mixed_backend_strict_op_errors() {
        let a = Scalar::from_root(Root::new(3, 1, 1));
        let b = Scalar::float(1.0, 0.0);
        assert_eq!(a.try_op(&b, ScalarOp::Add), Err(Error::MixedBackends));
        assert!(Scalar::one().try_op(&Scalar::int(2), ScalarOp::Mul).is_ok());
    }
}
