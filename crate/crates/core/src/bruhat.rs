//! Schwartz–Bruhat functions on Q_p^n as dense coefficient tables.
//!
//! A function at resolution (r,s) is supported in p^{-r}Z_p^n and constant on
//! cosets of p^sZ_p^n. Cell `idx = Σ a_i N^i` (N = p^{r+s}) is the coset of the
//! point with coordinates a_i·p^{-r}; digits are least significant first.

use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::padic::{
    check_prime, ipow, mu0, norm, pow_signed_q, psi, residue, sympl_pair, val, GridPoint, PowerOfP,
    Resolution, Root, Q,
};
use crate::scalars::{Backend, Coeff, CoeffJson, CycScalar, Mat, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct SBFunction<C: Coeff = Scalar> {
    pub p: u64,
    pub n: usize,
    pub res: Resolution,
    pub space: C::Space,
    pub coeffs: Vec<C>,
}

/// Number of cells along one axis.
pub fn side(p: u64, res: Resolution) -> usize {
    ipow(p, res.depth()) as usize
}

/// log_p of a `PowerOfP` that is known to be nonzero, else `i32::MIN`.
pub fn log_abs(x: PowerOfP) -> i32 {
    x.exponent().unwrap_or(i32::MIN)
}

/// Smallest e such that every coordinate lies in p^{-e}Z_p (i.e. log_p |xs|),
/// floored at `lo`.
pub fn support_exp(p: u64, xs: &[Q], lo: i32) -> i32 {
    log_abs(norm(p, xs)).max(lo)
}

impl<C: Coeff> SBFunction<C> {
    pub fn zeros(p: u64, n: usize, res: Resolution, space: C::Space) -> SBFunction<C> {
        let cells = side(p, res).pow(n as u32);
        SBFunction {
            p,
            n,
            res,
            coeffs: vec![C::zero(&space); cells],
            space,
        }
    }

    pub fn new(
        p: u64,
        n: usize,
        res: Resolution,
        space: C::Space,
        coeffs: Vec<C>,
    ) -> Result<SBFunction<C>> {
        check_prime(p)?;
        Resolution::new(res.r, res.s)?;
        if coeffs.len() != side(p, res).pow(n as u32) {
            return Err(Error::Mismatch(format!(
                "{} coefficients for {} cells",
                coeffs.len(),
                side(p, res).pow(n as u32)
            )));
        }
        Ok(SBFunction {
            p,
            n,
            res,
            space,
            coeffs,
        })
    }

    /// Tabulates `f` at one representative of each cell.
    pub fn from_fn<F>(p: u64, n: usize, res: Resolution, space: C::Space, f: F) -> SBFunction<C>
    where
        F: Fn(&[Q]) -> C + Sync + Send,
    {
        let cells = side(p, res).pow(n as u32);
        let coeffs = (0..cells)
            .into_par_iter()
            .map(|idx| f(&cell_point(p, n, res, idx)))
            .collect();
        SBFunction {
            p,
            n,
            res,
            space,
            coeffs,
        }
    }

    pub fn side(&self) -> usize {
        side(self.p, self.res)
    }

    pub fn ncells(&self) -> usize {
        self.coeffs.len()
    }

    pub fn digits(&self, idx: usize) -> Vec<i128> {
        cell_digits(self.side(), self.n, idx)
    }

    pub fn point(&self, idx: usize) -> Vec<Q> {
        cell_point(self.p, self.n, self.res, idx)
    }

    pub fn grid_point(&self, idx: usize) -> GridPoint {
        GridPoint {
            p: self.p,
            res: self.res,
            a: self.digits(idx),
        }
    }

    /// Cell containing `xs`, or `None` outside the support box.
    pub fn locate(&self, xs: &[Q]) -> Option<usize> {
        locate(self.p, self.n, self.res, xs)
    }

    pub fn eval(&self, xs: &[Q]) -> C {
        match self.locate(xs) {
            Some(i) => self.coeffs[i].clone(),
            None => C::zero(&self.space),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn map<F: Fn(&C) -> C + Sync + Send>(&self, f: F) -> SBFunction<C> {
        SBFunction {
            p: self.p,
            n: self.n,
            res: self.res,
            space: self.space.clone(),
            coeffs: self.coeffs.par_iter().map(f).collect(),
        }
    }

    /// Same function on a finer grid.
    pub fn refine(&self, res: Resolution) -> Result<SBFunction<C>> {
        if !res.contains(&self.res) {
            return Err(Error::Resolution(format!(
                "{res} does not refine {}",
                self.res
            )));
        }
        if res == self.res {
            return Ok(self.clone());
        }
        let new_side = side(self.p, res) as i128;
        let old_side = self.side() as i128;
        let drop = ipow(self.p, (res.r - self.res.r) as u32);
        let n = self.n;
        let zero = C::zero(&self.space);
        let cells = (new_side as usize).pow(n as u32);
        let coeffs = (0..cells)
            .into_par_iter()
            .map(|idx| {
                let mut old = 0usize;
                let mut mult = 1usize;
                let mut rest = idx;
                for _ in 0..n {
                    let a = (rest % new_side as usize) as i128;
                    rest /= new_side as usize;
                    if a % drop != 0 {
                        return zero.clone();
                    }
                    old += ((a / drop) % old_side) as usize * mult;
                    mult *= old_side as usize;
                }
                self.coeffs[old].clone()
            })
            .collect();
        Ok(SBFunction {
            p: self.p,
            n,
            res,
            space: self.space.clone(),
            coeffs,
        })
    }

    /// Same function on a coarser grid; fails unless it vanishes outside the
    /// smaller support and is constant on the larger cells.
    pub fn coarsen(&self, res: Resolution) -> Result<SBFunction<C>> {
        if !self.res.contains(&res) {
            return Err(Error::Resolution(format!(
                "{res} is not coarser than {}",
                self.res
            )));
        }
        Resolution::new(res.r, res.s)?;
        let new_side = side(self.p, res);
        let old_side = self.side();
        let drop = ipow(self.p, (self.res.r - res.r) as u32) as usize;
        let mut out: Vec<Option<C>> = vec![None; new_side.pow(self.n as u32)];
        let not_constant = || Error::NotConstant(format!("{res}"));
        for (idx, c) in self.coeffs.iter().enumerate() {
            let mut target = 0usize;
            let mut mult = 1usize;
            let mut rest = idx;
            let mut inside = true;
            for _ in 0..self.n {
                let a = rest % old_side;
                rest /= old_side;
                if !a.is_multiple_of(drop) {
                    inside = false;
                    break;
                }
                target += ((a / drop) % new_side) * mult;
                mult *= new_side;
            }
            if !inside {
                if !c.is_zero() {
                    return Err(not_constant());
                }
                continue;
            }
            match &out[target] {
                None => out[target] = Some(c.clone()),
                Some(prev) if prev == c => {}
                Some(_) => return Err(not_constant()),
            }
        }
        let coeffs = out
            .into_iter()
            .map(|c| c.expect("every coarse cell has a fine cell"))
            .collect();
        Ok(SBFunction {
            p: self.p,
            n: self.n,
            res,
            space: self.space.clone(),
            coeffs,
        })
    }

    /// Moves to any resolution that can represent the function.
    pub fn to_res(&self, res: Resolution) -> Result<SBFunction<C>> {
        self.refine(self.res.join(&res))?.coarsen(res)
    }

    /// Coarsest exact resolution.
    pub fn trim(&self) -> SBFunction<C> {
        let mut f = self.clone();
        loop {
            let before = f.res;
            while f.res.r + f.res.s > 0 {
                match f.coarsen(Resolution {
                    r: f.res.r - 1,
                    s: f.res.s,
                }) {
                    Ok(g) => f = g,
                    Err(_) => break,
                }
            }
            while f.res.r + f.res.s > 0 {
                match f.coarsen(Resolution {
                    r: f.res.r,
                    s: f.res.s - 1,
                }) {
                    Ok(g) => f = g,
                    Err(_) => break,
                }
            }
            if f.res == before {
                return f;
            }
        }
    }

    fn check_compat(&self, o: &SBFunction<C>) -> Result<()> {
        if self.p != o.p || self.n != o.n {
            return Err(Error::Mismatch(format!(
                "functions on Q_{}^{} and Q_{}^{}",
                self.p, self.n, o.p, o.n
            )));
        }
        if self.space != o.space {
            return Err(Error::Mismatch("coefficient spaces differ".into()));
        }
        Ok(())
    }

    /// Both functions refined to the join of their resolutions.
    pub fn common(&self, o: &SBFunction<C>) -> Result<(SBFunction<C>, SBFunction<C>)> {
        self.check_compat(o)?;
        let res = self.res.join(&o.res);
        Ok((self.refine(res)?, o.refine(res)?))
    }

    fn zip<F: Fn(&C, &C) -> C + Sync + Send>(
        &self,
        o: &SBFunction<C>,
        f: F,
    ) -> Result<SBFunction<C>> {
        let (a, b) = self.common(o)?;
        let coeffs = a
            .coeffs
            .par_iter()
            .zip(&b.coeffs)
            .map(|(x, y)| f(x, y))
            .collect();
        Ok(SBFunction { coeffs, ..a })
    }

    pub fn add(&self, o: &SBFunction<C>) -> Result<SBFunction<C>> {
        self.zip(o, |x, y| x.add(y))
    }

    pub fn sub(&self, o: &SBFunction<C>) -> Result<SBFunction<C>> {
        self.zip(o, |x, y| x.sub(y))
    }

    /// Pointwise product (the algebra product for matrix values).
    pub fn mul(&self, o: &SBFunction<C>) -> Result<SBFunction<C>> {
        self.zip(o, |x, y| x.mul(y))
    }

    pub fn neg(&self) -> SBFunction<C> {
        self.map(|x| x.neg())
    }

    /// Pointwise involution f*(X) = f(X)*.
    pub fn star(&self) -> SBFunction<C> {
        self.map(|x| x.star())
    }

    pub fn scale(&self, s: &Scalar) -> SBFunction<C> {
        self.map(|x| x.scale(s))
    }

    pub fn scale_q(&self, q: &Q) -> SBFunction<C> {
        self.map(|x| x.scale_q(q))
    }

    pub fn on(&self, b: Backend) -> SBFunction<C> {
        self.map(|x| x.on(b))
    }

    /// Equality as functions, independent of the stored resolution.
    pub fn same(&self, o: &SBFunction<C>) -> bool {
        match self.common(o) {
            Ok((a, b)) => a.coeffs == b.coeffs,
            Err(_) => false,
        }
    }

    pub fn approx_same(&self, o: &SBFunction<C>, tol: f64) -> bool {
        match self.common(o) {
            Ok((a, b)) => a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .all(|(x, y)| x.approx_eq(y, tol)),
            Err(_) => false,
        }
    }

    /// τ_Y f(X) = f(X+Y).
    pub fn translate(&self, y: &[Q]) -> Result<SBFunction<C>> {
        if y.len() != self.n {
            return Err(Error::Mismatch("translation vector dimension".into()));
        }
        let r = support_exp(self.p, y, self.res.r);
        let res = Resolution { r, s: self.res.s };
        Ok(SBFunction::from_fn(
            self.p,
            self.n,
            res,
            self.space.clone(),
            |x| {
                let moved: Vec<Q> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                self.eval(&moved)
            },
        ))
    }

    /// D_γ f(X) = f(γX) for γ = p^t·u, t of either sign.
    pub fn dilate(&self, t: i32, u: i64) -> Result<SBFunction<C>> {
        if u == 0 || u.rem_euclid(self.p as i64) == 0 {
            return Err(Error::InvalidTheta(format!("u={u} is not a unit")));
        }
        let res = Resolution {
            r: self.res.r + t,
            s: self.res.s - t,
        };
        let side = self.side();
        let n = self.n;
        let um = (u as i128).mod_floor(&(side as i128));
        let coeffs = (0..self.ncells())
            .into_par_iter()
            .map(|idx| {
                let mut old = 0usize;
                let mut mult = 1usize;
                let mut rest = idx;
                for _ in 0..n {
                    let a = (rest % side) as i128;
                    rest /= side;
                    old += ((a * um).mod_floor(&(side as i128))) as usize * mult;
                    mult *= side;
                }
                self.coeffs[old].clone()
            })
            .collect();
        Ok(SBFunction {
            p: self.p,
            n,
            res,
            space: self.space.clone(),
            coeffs,
        })
    }

    /// Volume of one cell, p^{-sn}.
    pub fn cell_volume(&self) -> Q {
        pow_signed_q(self.p, -self.res.s * self.n as i32)
    }

    /// ∫ f over Q_p^n.
    pub fn integral(&self) -> C {
        let mut acc = C::acc_new(&self.space);
        let one = Root::one(self.p);
        for c in &self.coeffs {
            if !c.is_zero() {
                C::acc_add(&mut acc, c, one);
            }
        }
        C::acc_finish(acc, &self.space).scale_q(&self.cell_volume())
    }

    /// ⟨f,g⟩ = ∫ f(X)*g(X)dX, conjugate-linear in the first slot.
    pub fn inner(&self, o: &SBFunction<C>) -> Result<C> {
        let (a, b) = self.common(o)?;
        let one = Root::one(self.p);
        let mut acc = C::acc_new(&a.space);
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            if !x.is_zero() && !y.is_zero() {
                C::acc_add(&mut acc, &x.star().mul(y), one);
            }
        }
        Ok(C::acc_finish(acc, &a.space).scale_q(&a.cell_volume()))
    }

    /// ‖f‖₂² with the Hilbert–Schmidt norm on values, exactly.
    pub fn l2_sq(&self) -> Scalar {
        let mut acc = crate::scalars::ScalarAcc::default();
        for c in &self.coeffs {
            if !c.is_zero() {
                acc.add(&c.hs_sq());
            }
        }
        acc.finish().scale_q(&self.cell_volume())
    }

    pub fn l1(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        s * q_to_f64(&self.cell_volume())
    }

    /// ‖f‖₁ exactly, when every value has a rational norm.
    pub fn l1_exact(&self) -> Option<Q> {
        let mut acc = Q::zero();
        for c in &self.coeffs {
            if !c.is_zero() {
                acc += c.norm_exact()?;
            }
        }
        Some(acc * self.cell_volume())
    }

    pub fn linf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn linf_exact(&self) -> Option<Q> {
        let mut m = Q::zero();
        for c in &self.coeffs {
            if !c.is_zero() {
                m = m.max(c.norm_exact()?);
            }
        }
        Some(m)
    }

    /// Multiplies every cell by a root of unity depending on the cell.
    pub fn twist<F: Fn(&[Q]) -> Root + Sync + Send>(&self, phase: F) -> SBFunction<C> {
        let coeffs = (0..self.ncells())
            .into_par_iter()
            .map(|i| {
                let c = &self.coeffs[i];
                if c.is_zero() {
                    c.clone()
                } else {
                    c.mul_root(phase(&self.point(i)))
                }
            })
            .collect();
        SBFunction {
            coeffs,
            ..self.clone()
        }
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

pub fn cell_digits(side: usize, n: usize, mut idx: usize) -> Vec<i128> {
    let mut a = Vec::with_capacity(n);
    for _ in 0..n {
        a.push((idx % side) as i128);
        idx /= side;
    }
    a
}

pub fn cell_index(side: usize, digits: &[i128]) -> usize {
    digits
        .iter()
        .rev()
        .fold(0usize, |acc, a| acc * side + *a as usize)
}

pub fn cell_point(p: u64, n: usize, res: Resolution, idx: usize) -> Vec<Q> {
    let den = pow_signed_q(p, -res.r);
    cell_digits(side(p, res), n, idx)
        .into_iter()
        .map(|a| Q::from_integer(a) * den)
        .collect()
}

pub fn locate(p: u64, n: usize, res: Resolution, xs: &[Q]) -> Option<usize> {
    debug_assert_eq!(xs.len(), n);
    let scale = pow_signed_q(p, res.r);
    let side = side(p, res);
    let mut idx = 0usize;
    let mut mult = 1usize;
    for x in xs {
        let a = residue(p, &(x * scale), res.depth())?;
        idx += a as usize * mult;
        mult *= side;
    }
    Some(idx)
}

/// Indicator of the ball c + p^m Z_p^n at its minimal resolution.
pub fn indicator(p: u64, center: &[Q], m: i32) -> Result<SBFunction<Scalar>> {
    check_prime(p)?;
    let n = center.len();
    let res = Resolution {
        r: support_exp(p, center, -m),
        s: m,
    };
    let scale = pow_signed_q(p, -m);
    Ok(SBFunction::from_fn(p, n, res, (), |x| {
        let inside = x
            .iter()
            .zip(center)
            .all(|(a, c)| val(p, &((a - c) * scale)).is_none_or(|v| v >= 0));
        if inside {
            Scalar::one()
        } else {
            Scalar::zero()
        }
    }))
}

/// The phase function Ψ_Y(X) = Ψ(2[X,Y]) on k^{2d}.
pub fn psi_y(p: u64, y: &[Q], x: &[Q]) -> Root {
    psi(p, &(sympl_pair(x, y) * Q::from_integer(2)))
}

/// Ψ_Y restricted to the ball p^m Z_p^{2d}.
pub fn character_window(p: u64, y: &[Q], m: i32) -> Result<SBFunction<Scalar>> {
    check_prime(p)?;
    if !y.len().is_multiple_of(2) {
        return Err(Error::Mismatch("phase space has even dimension".into()));
    }
    let s = support_exp(p, y, m);
    let res = Resolution { r: -m, s };
    Ok(SBFunction::from_fn(p, y.len(), res, (), |x| {
        Scalar::from_root(psi_y(p, y, x))
    }))
}

/// Random small-integer combinations a + bζ_p (exact) or uniform complex
/// values (float); deterministic in the seed.
pub fn random(
    p: u64,
    n: usize,
    res: Resolution,
    seed: u64,
    backend: Backend,
) -> SBFunction<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = side(p, res).pow(n as u32);
    let coeffs = (0..cells)
        .map(|_| random_scalar(p, &mut rng, backend))
        .collect();
    SBFunction {
        p,
        n,
        res,
        space: (),
        coeffs,
    }
}

pub fn random_scalar(p: u64, rng: &mut impl Rng, backend: Backend) -> Scalar {
    match backend {
        Backend::Exact => {
            let a: i128 = rng.gen_range(-2..=2);
            let b: i128 = rng.gen_range(-2..=2);
            let z = CycScalar::from_root(Root::new(p, 1, 1)).scale_q(&Q::from_integer(b));
            Scalar::Exact(z.add(&CycScalar::int(a)))
        }
        Backend::Float => Scalar::float(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    }
}

/// Random M_k-valued function.
pub fn random_mat(
    p: u64,
    n: usize,
    res: Resolution,
    k: usize,
    seed: u64,
    backend: Backend,
) -> SBFunction<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = side(p, res).pow(n as u32);
    let coeffs = (0..cells)
        .map(|_| Mat {
            n: k,
            e: (0..k * k)
                .map(|_| random_scalar(p, &mut rng, backend))
                .collect(),
        })
        .collect();
    SBFunction {
        p,
        n,
        res,
        space: k,
        coeffs,
    }
}

/// μ0 of the cell with the given digits at resolution (r,s), s ≥ 0.
pub fn cell_mu0(p: u64, res: Resolution, digits: &[i128]) -> PowerOfP {
    let den = pow_signed_q(p, -res.r);
    let xs: Vec<Q> = digits.iter().map(|a| Q::from_integer(*a) * den).collect();
    mu0(p, &xs)
}

impl<C: CoeffJson> SBFunction<C> {
    /// `{p, n, r, s, cells: [{coord, value}]}`; zero cells are omitted.
    /// Matrix-valued functions add `algebra_dim`.
    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| json!({"coord": self.grid_point(i).to_strings(), "value": c.to_json()}))
            .collect();
        let mut m = Map::new();
        m.insert("p".into(), json!(self.p));
        m.insert("n".into(), json!(self.n));
        m.insert("r".into(), json!(self.res.r));
        m.insert("s".into(), json!(self.res.s));
        m.insert("cells".into(), Value::Array(cells));
        if let Some(sp) = C::space_to_json(&self.space) {
            m.insert("algebra_dim".into(), sp);
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<SBFunction<C>> {
        let get = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Parse(format!("missing `{k}`")))
        };
        let int = |k: &str| -> Result<i64> {
            get(k)?
                .as_i64()
                .ok_or_else(|| Error::Parse(format!("`{k}` must be an integer")))
        };
        let p = int("p")? as u64;
        check_prime(p)?;
        let n = int("n")? as usize;
        let res = Resolution::new(int("r")? as i32, int("s")? as i32)?;
        let space = C::space_from_json(v.get("algebra_dim").unwrap_or(&Value::Null))?;
        let mut f = SBFunction::zeros(p, n, res, space.clone());
        let cells = get("cells")?
            .as_array()
            .ok_or_else(|| Error::Parse("`cells` must be an array".into()))?;
        for cell in cells {
            let coord = cell
                .get("coord")
                .and_then(|c| c.as_array())
                .ok_or_else(|| Error::Parse("cell without `coord`".into()))?;
            let strs: Vec<String> = coord
                .iter()
                .filter_map(|c| c.as_str().map(String::from))
                .collect();
            let g = GridPoint::parse(&strs)?;
            if g.p != p || g.res != res || g.dim() != n {
                return Err(Error::Parse(
                    "cell coordinate does not match the declared grid".into(),
                ));
            }
            let value = C::from_json(
                p,
                &space,
                cell.get("value")
                    .ok_or_else(|| Error::Parse("cell without `value`".into()))?,
            )?;
            let idx = cell_index(f.side(), &g.a);
            f.coeffs[idx] = value;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{q, qi};

    fn res(r: i32, s: i32) -> Resolution {
        Resolution::new(r, s).unwrap()
    }

    #[test]
    fn indicator_of_unit_ball() {
        let f = indicator(3, &[qi(0)], 0).unwrap();
        assert_eq!(f.res, res(0, 0));
        assert_eq!(f.coeffs, vec![Scalar::one()]);
        assert_eq!(f.integral(), Scalar::one());
        let g = indicator(3, &[qi(0)], 1).unwrap();
        assert_eq!(g.integral(), Scalar::rat(1, 3));
    }

    #[test]
    fn character_window_phases() {
        let w = character_window(3, &[q(1, 3), qi(0)], 0).unwrap();
        assert_eq!(w.res, res(0, 1));
        assert_eq!(w.ncells(), 9);
        // Ψ(2[X,Y]) with X=(x,ξ), Y=(1/3,0): 2[X,Y] = 2ξ/3
        for i in 0..9 {
            let x = w.point(i);
            let want = Root::new(3, 2 * *x[1].numer(), 1);
            assert_eq!(w.coeffs[i], Scalar::from_root(want));
        }
    }

    #[test]
    fn refine_coarsen_round_trip() {
        let f = indicator(3, &[qi(0)], 0).unwrap();
        let g = f.refine(res(0, 1)).unwrap();
        assert_eq!(g.coeffs, vec![Scalar::one(); 3]);
        assert_eq!(g.coarsen(res(0, 0)).unwrap(), f);
        let w = character_window(3, &[q(1, 3), qi(0)], 0).unwrap();
        assert!(w.coarsen(res(0, 0)).is_err());
    }

    #[test]
    fn trim_finds_minimal_resolution() {
        let f = indicator(3, &[q(1, 3)], 1).unwrap();
        let g = f.refine(res(3, 2)).unwrap();
        assert_eq!(g.trim(), f);
    }

    #[test]
    fn translate_and_dilate() {
        let f = indicator(3, &[qi(0)], 0).unwrap();
        assert!(f.translate(&[qi(0)]).unwrap().same(&f));
        let t = f.translate(&[q(1, 3)]).unwrap();
        assert!(t.same(&indicator(3, &[q(-1, 3)], 0).unwrap()));
        let d = f.dilate(1, 1).unwrap();
        assert!(d.same(&indicator(3, &[qi(0)], -1).unwrap()));
    }

    #[test]
    fn disjoint_inner_product_vanishes() {
        let a = indicator(3, &[qi(0)], 1).unwrap();
        let b = indicator(3, &[qi(-1)], 1).unwrap();
        assert!(a.inner(&b).unwrap().is_zero());
        assert_eq!(a.inner(&a).unwrap(), Scalar::rat(1, 3));
    }

    #[test]
    fn pointwise_algebra() {
        let o = indicator(3, &[qi(0), qi(0)], 0).unwrap();
        assert!(o.mul(&o).unwrap().same(&o));
        let f = random(3, 2, res(1, 1), 5, Backend::Exact);
        assert!(f.add(&f.neg()).unwrap().is_zero());
        let w = character_window(3, &[q(1, 3), qi(0)], 0).unwrap();
        assert!(w.star().mul(&w).unwrap().same(&o));
    }

    #[test]
    fn random_is_deterministic() {
        let a = random(3, 2, res(1, 1), 7, Backend::Exact);
        let b = random(3, 2, res(1, 1), 7, Backend::Exact);
        assert_eq!(a, b);
        assert_ne!(a, random(3, 2, res(1, 1), 8, Backend::Exact));
    }

    #[test]
    fn json_round_trip() {
        let f = random(3, 2, res(1, 0), 1, Backend::Exact);
        assert_eq!(SBFunction::<Scalar>::from_json(&f.to_json()).unwrap(), f);
        let m = random_mat(3, 2, res(0, 1), 2, 1, Backend::Exact);
        assert_eq!(SBFunction::<Mat>::from_json(&m.to_json()).unwrap(), m);
    }
}
