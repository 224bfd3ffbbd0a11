//! Exact arithmetic on Q_p at finite resolution.
//!
//! Coordinates are ordinary rationals whose denominators may contain both
//! powers of p and units; a unit `w` in a denominator is inverted modulo the
//! power of p that matters. This keeps ½ and θ^{-1} = p^{-t}u^{-1} exact.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rational numbers used for coordinates and symplectic pairings.
pub type Q = Ratio<i128>;

/// Largest exponent we allow in `p^k` computations on `i128`.
pub const MAX_DEPTH: u32 = 40;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidPrime(p));
    }
    Ok(())
}

pub fn ipow(p: u64, e: u32) -> i128 {
    (p as i128).checked_pow(e).expect("p-power overflow")
}

/// p-adic valuation of a nonzero integer.
pub fn val_int(p: u64, mut n: i128) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// p-adic valuation of a rational, `None` for zero.
pub fn val(p: u64, x: &Q) -> Option<i32> {
    if x.is_zero() {
        return None;
    }
    Some(val_int(p, *x.numer()) as i32 - val_int(p, *x.denom()) as i32)
}

pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let e = a.mod_floor(&m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.mod_floor(&m))
}

/// Residue of `x` in Z_p/p^k Z_p, or `None` when `x` is not in Z_p.
pub fn residue(p: u64, x: &Q, k: u32) -> Option<i128> {
    let m = ipow(p, k);
    if x.is_zero() || k == 0 {
        return if val(p, x).is_none_or(|v| v >= 0) {
            Some(0)
        } else {
            None
        };
    }
    let (mut a, mut b) = (*x.numer(), *x.denom());
    let mut vb = 0u32;
    while b % p as i128 == 0 {
        b /= p as i128;
        vb += 1;
    }
    let mut va = 0u32;
    while a % p as i128 == 0 {
        a /= p as i128;
        va += 1;
    }
    if va < vb {
        return None;
    }
    let e = va - vb;
    if e >= k {
        return Some(0);
    }
    let rest = ipow(p, k - e);
    let w = mod_inv(b, rest).expect("unit denominator");
    let base = mul_mod(a.mod_floor(&rest), w, rest);
    Some((base * ipow(p, e)).mod_floor(&m))
}

pub fn mul_mod(a: i128, b: i128, m: i128) -> i128 {
    match a.checked_mul(b) {
        Some(v) => v.mod_floor(&m),
        None => {
            // Schoolbook doubling keeps us exact for the rare large modulus.
            let (mut a, mut b) = (a.mod_floor(&m), b.mod_floor(&m));
            let mut acc = 0i128;
            while b > 0 {
                if b & 1 == 1 {
                    acc = (acc + a) % m;
                }
                a = (a + a) % m;
                b >>= 1;
            }
            acc
        }
    }
}

/// Exact value p^e, or 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerOfP {
    Zero,
    Pow(i32),
}

impl PowerOfP {
    pub fn mul(self, o: PowerOfP) -> PowerOfP {
        match (self, o) {
            (PowerOfP::Pow(a), PowerOfP::Pow(b)) => PowerOfP::Pow(a + b),
            _ => PowerOfP::Zero,
        }
    }

    pub fn max(self, o: PowerOfP) -> PowerOfP {
        match (self, o) {
            (PowerOfP::Zero, x) | (x, PowerOfP::Zero) => x,
            (PowerOfP::Pow(a), PowerOfP::Pow(b)) => PowerOfP::Pow(a.max(b)),
        }
    }

    pub fn powi(self, n: i32) -> PowerOfP {
        match self {
            PowerOfP::Pow(a) => PowerOfP::Pow(a * n),
            PowerOfP::Zero if n > 0 => PowerOfP::Zero,
            PowerOfP::Zero => panic!("0 raised to a non-positive power"),
        }
    }

    pub fn exponent(self) -> Option<i32> {
        match self {
            PowerOfP::Pow(a) => Some(a),
            PowerOfP::Zero => None,
        }
    }

    pub fn to_q(self, p: u64) -> Q {
        match self {
            PowerOfP::Zero => Q::zero(),
            PowerOfP::Pow(e) if e >= 0 => Q::from_integer(ipow(p, e as u32)),
            PowerOfP::Pow(e) => Q::new(1, ipow(p, (-e) as u32)),
        }
    }

    pub fn to_f64(self, p: u64) -> f64 {
        match self {
            PowerOfP::Zero => 0.0,
            PowerOfP::Pow(e) => (p as f64).powi(e),
        }
    }
}

impl PartialOrd for PowerOfP {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(match (self, o) {
            (PowerOfP::Zero, PowerOfP::Zero) => std::cmp::Ordering::Equal,
            (PowerOfP::Zero, _) => std::cmp::Ordering::Less,
            (_, PowerOfP::Zero) => std::cmp::Ordering::Greater,
            (PowerOfP::Pow(a), PowerOfP::Pow(b)) => a.cmp(b),
        })
    }
}

/// |x| = p^{-val(x)}.
pub fn padic_abs(p: u64, x: &Q) -> PowerOfP {
    match val(p, x) {
        None => PowerOfP::Zero,
        Some(v) => PowerOfP::Pow(-v),
    }
}

/// max of |x_i| over a vector (sup norm).
pub fn norm(p: u64, xs: &[Q]) -> PowerOfP {
    xs.iter()
        .fold(PowerOfP::Zero, |m, x| m.max(padic_abs(p, x)))
}

/// The weight μ0(X) = max{1, |2x|, |2ξ|}; for odd p this is max{1, |X|}.
pub fn mu0(p: u64, xs: &[Q]) -> PowerOfP {
    PowerOfP::Pow(0).max(norm(p, xs))
}

/// log_p μ0(X), a non-negative integer.
pub fn mu0_exp(p: u64, xs: &[Q]) -> u32 {
    mu0(p, xs).exponent().unwrap() as u32
}

/// A p-power root of unity exp(2πi e/p^m), stored with minimal m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root {
    pub p: u64,
    pub m: u32,
    pub e: i128,
}

impl Root {
    pub fn new(p: u64, e: i128, m: u32) -> Root {
        let mut r = Root {
            p,
            m,
            e: e.mod_floor(&ipow(p, m)),
        };
        while r.m > 0 && r.e % p as i128 == 0 {
            r.e /= p as i128;
            r.m -= 1;
        }
        if r.m == 0 {
            r.e = 0;
        }
        r
    }

    pub fn one(p: u64) -> Root {
        Root { p, m: 0, e: 0 }
    }

    pub fn is_one(&self) -> bool {
        self.m == 0
    }

    pub fn mul(self, o: Root) -> Root {
        let m = self.m.max(o.m);
        let a = self.e * ipow(self.p, m - self.m);
        let b = o.e * ipow(self.p, m - o.m);
        Root::new(self.p, a + b, m)
    }

    pub fn conj(self) -> Root {
        Root::new(self.p, -self.e, self.m)
    }

    pub fn pow(self, k: i128) -> Root {
        Root::new(self.p, mul_mod(self.e, k, ipow(self.p, self.m)), self.m)
    }

    /// Phase as a reduced fraction e/p^m in [0,1).
    pub fn phase(&self) -> Q {
        Q::new(self.e, ipow(self.p, self.m))
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        let t = 2.0 * std::f64::consts::PI * (self.e as f64) / (ipow(self.p, self.m) as f64);
        num_complex::Complex64::new(t.cos(), t.sin())
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.e, self.p, self.m)
    }
}

impl Root {
    /// Parses the "e/p^m" form produced by `Display`.
    pub fn parse(s: &str) -> Result<Root> {
        let bad = || Error::Parse(format!("root of unity `{s}`"));
        let (e, rest) = s.split_once('/').ok_or_else(bad)?;
        let (p, m) = rest.split_once('^').ok_or_else(bad)?;
        let e: i128 = e.trim().parse().map_err(|_| bad())?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let m: u32 = m.trim().parse().map_err(|_| bad())?;
        Ok(Root::new(p, e, m))
    }
}

/// Ψ0(x) = exp(2πi {x}_p) for a rational x; the unit part of the denominator
/// is inverted modulo the p-part. Fails when the p-part exceeds p^max_depth.
pub fn psi0(p: u64, x: &Q, max_depth: u32) -> Result<Root> {
    if x.is_zero() {
        return Ok(Root::one(p));
    }
    let mut b = *x.denom();
    let mut k = 0u32;
    while b % p as i128 == 0 {
        b /= p as i128;
        k += 1;
    }
    if k == 0 {
        return Ok(Root::one(p));
    }
    if k > max_depth {
        return Err(Error::DepthExceeded {
            needed: k,
            max: max_depth,
        });
    }
    let m = ipow(p, k);
    let w = mod_inv(b, m).expect("unit");
    Ok(Root::new(p, mul_mod(x.numer().mod_floor(&m), w, m), k))
}

/// Ψ0 without a depth cap beyond the arithmetic limit.
pub fn psi(p: u64, x: &Q) -> Root {
    psi0(p, x, MAX_DEPTH).expect("character depth")
}

/// [X,Y] = ⟨y,ξ⟩ − ⟨x,η⟩ for X = (x,ξ), Y = (y,η) in k^{2d}.
pub fn sympl_pair(xs: &[Q], ys: &[Q]) -> Q {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len().is_multiple_of(2), "phase space has even dimension");
    let d = xs.len() / 2;
    let mut acc = Q::zero();
    for i in 0..d {
        acc += ys[i] * xs[d + i] - xs[i] * ys[d + i];
    }
    acc
}

/// ∫ μ0^{-N} over k^{2d}, exactly: 1 + (1−p^{−2d}) p^{2d−N}/(1−p^{2d−N}).
pub fn mu0_weight_l1(p: u64, d: u32, n: u32) -> Result<Q> {
    if n <= 2 * d {
        return Err(Error::Divergent { n, d });
    }
    let pq = Q::from_integer(p as i128);
    let q = pq.pow(2 * d as i32 - n as i32);
    Ok(Q::one() + (Q::one() - pq.pow(-2 * d as i32)) * q / (Q::one() - q))
}

/// θ = p^t·u with u a unit integer, or θ = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theta {
    Zero,
    Unit { t: u32, u: i64 },
}

impl Theta {
    pub fn new(p: u64, t: u32, u: i64) -> Result<Theta> {
        if u == 0 || u.rem_euclid(p as i64) == 0 {
            return Err(Error::InvalidTheta(format!("u={u} is not a unit mod {p}")));
        }
        Ok(Theta::Unit { t, u })
    }

    pub fn one() -> Theta {
        Theta::Unit { t: 0, u: 1 }
    }

    /// Builds θ from an integer, splitting off the p-part.
    pub fn from_int(p: u64, n: i128) -> Theta {
        if n == 0 {
            return Theta::Zero;
        }
        let t = val_int(p, n);
        Theta::Unit {
            t,
            u: (n / ipow(p, t)) as i64,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Theta::Zero)
    }

    pub fn t(&self) -> u32 {
        match self {
            Theta::Unit { t, .. } => *t,
            Theta::Zero => panic!("θ = 0 has no valuation"),
        }
    }

    pub fn value(&self, p: u64) -> Q {
        match self {
            Theta::Zero => Q::zero(),
            Theta::Unit { t, u } => Q::from_integer(ipow(p, *t) * *u as i128),
        }
    }

    pub fn int_value(&self, p: u64) -> i128 {
        *self.value(p).numer()
    }

    pub fn inv(&self, p: u64) -> Q {
        self.value(p).recip()
    }

    pub fn neg(&self) -> Theta {
        match self {
            Theta::Zero => Theta::Zero,
            Theta::Unit { t, u } => Theta::Unit { t: *t, u: -u },
        }
    }

    pub fn add(&self, o: &Theta, p: u64) -> Theta {
        Theta::from_int(p, self.int_value(p) + o.int_value(p))
    }

    /// |θ| = p^{-t}.
    pub fn abs(&self) -> PowerOfP {
        match self {
            Theta::Zero => PowerOfP::Zero,
            Theta::Unit { t, .. } => PowerOfP::Pow(-(*t as i32)),
        }
    }

    /// Parses "t,u" or "0".
    pub fn parse(p: u64, s: &str) -> Result<Theta> {
        let s = s.trim();
        if s == "0" {
            return Ok(Theta::Zero);
        }
        let bad = || Error::InvalidTheta(format!("expected `t,u` or `0`, got `{s}`"));
        let (t, u) = s.split_once(',').ok_or_else(bad)?;
        let t: u32 = t.trim().parse().map_err(|_| bad())?;
        let u: i64 = u.trim().parse().map_err(|_| bad())?;
        Theta::new(p, t, u)
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theta::Zero => write!(f, "0"),
            Theta::Unit { t, u } => write!(f, "{t},{u}"),
        }
    }
}

/// Resolution (r, s): support in p^{-r}Z_p^n, constant on cosets of p^s Z_p^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub r: i32,
    pub s: i32,
}

impl Resolution {
    pub fn new(r: i32, s: i32) -> Result<Resolution> {
        if r + s < 0 {
            return Err(Error::Resolution(format!(
                "r+s must be >= 0, got ({r},{s})"
            )));
        }
        Ok(Resolution { r, s })
    }

    pub fn depth(&self) -> u32 {
        (self.r + self.s) as u32
    }

    pub fn join(&self, o: &Resolution) -> Resolution {
        Resolution {
            r: self.r.max(o.r),
            s: self.s.max(o.s),
        }
    }

    pub fn contains(&self, o: &Resolution) -> bool {
        self.r >= o.r && self.s >= o.s
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.r, self.s)
    }
}

/// A point of p^{-r}Z_p^n / p^s Z_p^n. Coordinate i is a_i/p^r with
/// 0 <= a_i < p^{r+s}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub p: u64,
    pub res: Resolution,
    pub a: Vec<i128>,
}

/// Outcome of scaling a grid point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scaled {
    Point(GridPoint),
    /// Scaling by 0 collapses everything to the zero coset.
    CollapseToZero,
}

impl GridPoint {
    pub fn from_q(p: u64, res: Resolution, xs: &[Q]) -> Result<GridPoint> {
        let mut a = Vec::with_capacity(xs.len());
        for x in xs {
            let shifted = x * pow_signed_q(p, res.r);
            let v = residue(p, &shifted, res.depth())
                .ok_or_else(|| Error::Resolution(format!("{x} lies outside p^-{}Z_p", res.r)))?;
            a.push(v);
        }
        Ok(GridPoint { p, res, a })
    }

    pub fn zero(p: u64, res: Resolution, n: usize) -> GridPoint {
        GridPoint {
            p,
            res,
            a: vec![0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn coords(&self) -> Vec<Q> {
        let den = pow_signed_q(self.p, -self.res.r);
        self.a.iter().map(|&a| Q::from_integer(a) * den).collect()
    }

    pub fn refine(&self, res: Resolution) -> Result<GridPoint> {
        if !res.contains(&self.res) {
            return Err(Error::Resolution(format!(
                "{} does not refine {}",
                res, self.res
            )));
        }
        GridPoint::from_q(self.p, res, &self.coords())
    }

    fn common(&self, o: &GridPoint) -> Result<Resolution> {
        if self.p != o.p || self.dim() != o.dim() {
            return Err(Error::Mismatch(
                "grid points differ in p or dimension".into(),
            ));
        }
        Ok(Resolution {
            r: self.res.r.max(o.res.r),
            s: self.res.s.min(o.res.s),
        })
    }

    /// Sum at the coarsest resolution on which both cosets are defined.
    pub fn add(&self, o: &GridPoint) -> Result<GridPoint> {
        let res = self.common(o)?;
        let xs: Vec<Q> = self
            .coords()
            .iter()
            .zip(o.coords())
            .map(|(a, b)| a + b)
            .collect();
        GridPoint::from_q(self.p, res, &xs)
    }

    pub fn neg(&self) -> GridPoint {
        let n = ipow(self.p, self.res.depth());
        GridPoint {
            p: self.p,
            res: self.res,
            a: self.a.iter().map(|a| (-a).mod_floor(&n)).collect(),
        }
    }

    /// Multiplies by θ = p^t u: support shrinks by t, constancy grows by t.
    pub fn scale(&self, th: &Theta) -> Scaled {
        match th {
            Theta::Zero => Scaled::CollapseToZero,
            Theta::Unit { t, u } => {
                let res = Resolution {
                    r: self.res.r - *t as i32,
                    s: self.res.s + *t as i32,
                };
                let n = ipow(self.p, res.depth());
                let a = self.a.iter().map(|&a| mul_mod(a, *u as i128, n)).collect();
                Scaled::Point(GridPoint { p: self.p, res, a })
            }
        }
    }

    /// Multiplies by a rational unit (numerator and denominator prime to p).
    pub fn scale_unit(&self, c: &Q) -> Result<GridPoint> {
        if val(self.p, c) != Some(0) {
            return Err(Error::Mismatch(format!("{c} is not a p-adic unit")));
        }
        let n = ipow(self.p, self.res.depth());
        let k = residue(self.p, c, self.res.depth()).unwrap();
        Ok(GridPoint {
            p: self.p,
            res: self.res,
            a: self.a.iter().map(|&a| mul_mod(a, k, n)).collect(),
        })
    }

    /// "a@p^-r..p^s" per coordinate.
    pub fn to_strings(&self) -> Vec<String> {
        self.a
            .iter()
            .map(|a| format!("{a}@{}^{}..{}^{}", self.p, -self.res.r, self.p, self.res.s))
            .collect()
    }

    pub fn parse(strs: &[String]) -> Result<GridPoint> {
        let bad = |s: &str| Error::Parse(format!("grid coordinate `{s}`"));
        let mut out: Option<(u64, Resolution)> = None;
        let mut a = Vec::new();
        for s in strs {
            let (num, rest) = s.split_once('@').ok_or_else(|| bad(s))?;
            let (lo, hi) = rest.split_once("..").ok_or_else(|| bad(s))?;
            let (p1, e1) = lo.split_once('^').ok_or_else(|| bad(s))?;
            let (p2, e2) = hi.split_once('^').ok_or_else(|| bad(s))?;
            let p: u64 = p1.parse().map_err(|_| bad(s))?;
            if p2.parse::<u64>().map_err(|_| bad(s))? != p {
                return Err(bad(s));
            }
            let r = -e1.parse::<i32>().map_err(|_| bad(s))?;
            let sres: i32 = e2.parse().map_err(|_| bad(s))?;
            let res = Resolution::new(r, sres)?;
            if let Some(prev) = out {
                if prev != (p, res) {
                    return Err(Error::Parse(
                        "grid coordinates disagree on resolution".into(),
                    ));
                }
            }
            out = Some((p, res));
            let v: i128 = num.parse().map_err(|_| bad(s))?;
            a.push(v.mod_floor(&ipow(p, res.depth())));
        }
        let (p, res) = out.ok_or_else(|| Error::Parse("empty grid point".into()))?;
        Ok(GridPoint { p, res, a })
    }
}

/// p^e as a rational for any sign of e.
pub fn pow_signed_q(p: u64, e: i32) -> Q {
    if e >= 0 {
        Q::from_integer(ipow(p, e as u32))
    } else {
        Q::new(1, ipow(p, (-e) as u32))
    }
}

/// Vector helpers for phase-space points.
pub fn vadd(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(c: &Q, a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| c * x).collect()
}

pub fn vneg(a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| -x).collect()
}

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn is_integral(p: u64, x: &Q) -> bool {
    val(p, x).is_none_or(|v| v >= 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_examples() {
        assert_eq!(padic_abs(3, &qi(9)), PowerOfP::Pow(-2));
        assert_eq!(padic_abs(3, &qi(0)), PowerOfP::Zero);
        assert_eq!(padic_abs(3, &q(1, 3)), PowerOfP::Pow(1));
        assert_eq!(padic_abs(3, &q(5, 18)).to_q(3), qi(9));
    }

    #[test]
    fn mu0_examples() {
        assert_eq!(mu0(3, &[qi(0), qi(0)]), PowerOfP::Pow(0));
        assert_eq!(mu0(3, &[q(1, 9), qi(0)]).to_q(3), qi(9));
        assert_eq!(mu0(3, &[q(1, 3), q(1, 9)]).to_q(3), qi(9));
    }

    #[test]
    fn psi0_examples() {
        assert_eq!(psi0(3, &q(1, 3), 4).unwrap(), Root::new(3, 1, 1));
        assert!(psi0(3, &qi(2), 4).unwrap().is_one());
        let a = psi0(3, &q(1, 3), 4).unwrap();
        assert_eq!(a.mul(a), psi0(3, &q(2, 3), 4).unwrap());
        // 1/2 is a unit: Ψ(1/(2·3)) = ζ_3^{2^{-1} mod 3} = ζ_3^2
        assert_eq!(psi0(3, &q(1, 6), 4).unwrap(), Root::new(3, 2, 1));
        assert!(psi0(3, &q(1, 81), 3).is_err());
    }

    #[test]
    fn sympl_examples() {
        let x = [q(1, 3), qi(0)];
        let y = [qi(0), q(1, 3)];
        assert_eq!(sympl_pair(&x, &y), q(-1, 9));
        assert_eq!(sympl_pair(&x, &x), qi(0));
        assert_eq!(sympl_pair(&x, &y) + sympl_pair(&y, &x), qi(0));
    }

    #[test]
    fn weight_l1_values() {
        assert_eq!(mu0_weight_l1(3, 1, 3).unwrap(), q(13, 9));
        assert_eq!(mu0_weight_l1(3, 1, 4).unwrap(), q(10, 9));
        assert!(mu0_weight_l1(3, 1, 2).is_err());
    }

    #[test]
    fn grid_examples() {
        let res = Resolution::new(1, 1).unwrap();
        let a = GridPoint::from_q(3, res, &[q(1, 3)]).unwrap();
        assert_eq!(a.add(&a).unwrap().coords(), vec![q(2, 3)]);
        let z = GridPoint::zero(3, res, 1);
        assert_eq!(z.neg(), z);
        match a.scale(&Theta::new(3, 1, 1).unwrap()) {
            Scaled::Point(g) => {
                assert_eq!(g.res, Resolution { r: 0, s: 2 });
                assert_eq!(g.coords(), vec![qi(1)]);
            }
            Scaled::CollapseToZero => panic!(),
        }
        assert_eq!(a.scale(&Theta::Zero), Scaled::CollapseToZero);
    }

    #[test]
    fn grid_string_round_trip() {
        let res = Resolution::new(2, 1).unwrap();
        let g = GridPoint::from_q(3, res, &[q(4, 9), q(-1, 3)]).unwrap();
        let s = g.to_strings();
        assert_eq!(s[0], "4@3^-2..3^1");
        assert_eq!(GridPoint::parse(&s).unwrap(), g);
    }

    #[test]
    fn residue_handles_units() {
        // 1/2 mod 9 = 5
        assert_eq!(residue(3, &q(1, 2), 2), Some(5));
        assert_eq!(residue(3, &q(1, 3), 2), None);
        assert_eq!(residue(3, &q(3, 2), 2), Some(6));
    }

    #[test]
    fn theta_parse_and_sum() {
        let th = Theta::parse(3, "1,2").unwrap();
        assert_eq!(th.value(3), qi(6));
        assert!(Theta::parse(3, "1,3").is_err());
        assert_eq!(th.add(&th.neg(), 3), Theta::Zero);
        assert_eq!(
            Theta::one().add(&Theta::from_int(3, 2), 3),
            Theta::Unit { t: 1, u: 1 }
        );
    }
}
