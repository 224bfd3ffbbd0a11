//! Weyl quantization Ω_θ on L²(Q_p^d) as exact matrices.
//!
//! Vectors are stored as function values on the cells of a `CellBasis`;
//! an operator with kernel K has matrix p^{-Sd}·K(x_i, y_j). In this
//! representation the adjoint is the conjugate transpose, and matrix
//! entries coincide with those in the orthonormal basis p^{Sd/2}1_c.

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bruhat::{cell_point, locate, side, support_exp, SBFunction};
use crate::error::{Error, Result};
use crate::fourier::apply_j;
use crate::padic::{
    mu0_weight_l1, pow_signed_q, psi, sympl_pair, vadd, vscale, vsub, Resolution, Root, Theta, Q,
};
use crate::scalars::{op_norm_c64, scalar_to_json, Coeff, Scalar, ScalarAcc};

/// The cells of p^{-R}Z_p^d / p^S Z_p^d, a finite model of L²(Q_p^d).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellBasis {
    pub p: u64,
    pub d: usize,
    pub res: Resolution,
}

impl CellBasis {
    pub fn new(p: u64, d: usize, r: i32, s: i32) -> Result<CellBasis> {
        Ok(CellBasis {
            p,
            d,
            res: Resolution::new(r, s)?,
        })
    }

    pub fn dim(&self) -> usize {
        side(self.p, self.res).pow(self.d as u32)
    }

    pub fn point(&self, i: usize) -> Vec<Q> {
        cell_point(self.p, self.d, self.res, i)
    }

    pub fn locate(&self, x: &[Q]) -> Option<usize> {
        locate(self.p, self.d, self.res, x)
    }

    /// Cell volume p^{-Sd}.
    pub fn volume(&self) -> Q {
        pow_signed_q(self.p, -self.res.s * self.d as i32)
    }

    pub fn join(&self, o: &CellBasis) -> CellBasis {
        CellBasis {
            res: self.res.join(&o.res),
            ..*self
        }
    }

    /// A vector of this basis as function values.
    pub fn vector(&self, f: &SBFunction<Scalar>) -> Result<Vec<Scalar>> {
        if f.n != self.d || f.p != self.p {
            return Err(Error::Mismatch("vector lives on a different space".into()));
        }
        if !self.res.contains(&f.res) {
            let g = f.trim();
            if !self.res.contains(&g.res) {
                return Err(Error::Inadequate {
                    what: "vector".into(),
                    r: g.res.r,
                    s: g.res.s,
                });
            }
            return Ok(g.refine(self.res)?.coeffs);
        }
        Ok(f.refine(self.res)?.coeffs)
    }

    pub fn function(&self, v: Vec<Scalar>) -> SBFunction<Scalar> {
        SBFunction {
            p: self.p,
            n: self.d,
            res: self.res,
            space: (),
            coeffs: v,
        }
    }

    fn json(&self) -> Value {
        json!({"p": self.p, "d": self.d, "R": self.res.r, "S": self.res.s})
    }
}

/// Dense matrix over a cell basis, optionally tensored with C^k.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOperator {
    pub basis: CellBasis,
    pub k: usize,
    pub m: Vec<Scalar>,
}

impl LinOperator {
    pub fn size(&self) -> usize {
        self.basis.dim() * self.k
    }

    pub fn zeros(basis: CellBasis, k: usize) -> LinOperator {
        let n = basis.dim() * k;
        LinOperator {
            basis,
            k,
            m: vec![Scalar::zero(); n * n],
        }
    }

    pub fn identity(basis: CellBasis, k: usize) -> LinOperator {
        let mut o = LinOperator::zeros(basis, k);
        let n = o.size();
        for i in 0..n {
            o.m[i * n + i] = Scalar::one();
        }
        o
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.m[i * self.size() + j]
    }

    fn same_shape(&self, o: &LinOperator) -> Result<()> {
        if self.basis != o.basis || self.k != o.k {
            return Err(Error::Mismatch("operators on different bases".into()));
        }
        Ok(())
    }

    pub fn mul(&self, o: &LinOperator) -> Result<LinOperator> {
        self.same_shape(o)?;
        let n = self.size();
        let rows: Vec<Vec<Scalar>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut accs = vec![ScalarAcc::default(); n];
                for l in 0..n {
                    let a = self.get(i, l);
                    if a.is_zero() {
                        continue;
                    }
                    for (j, acc) in accs.iter_mut().enumerate() {
                        let b = o.get(l, j);
                        if !b.is_zero() {
                            acc.add(&(a * b));
                        }
                    }
                }
                accs.into_iter().map(|a| a.finish()).collect()
            })
            .collect();
        Ok(LinOperator {
            basis: self.basis,
            k: self.k,
            m: rows.concat(),
        })
    }

    pub fn adjoint(&self) -> LinOperator {
        let n = self.size();
        let mut m = vec![Scalar::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                m[j * n + i] = self.get(i, j).conj();
            }
        }
        LinOperator { m, ..self.clone() }
    }

    pub fn add(&self, o: &LinOperator) -> Result<LinOperator> {
        self.same_shape(o)?;
        Ok(LinOperator {
            m: self.m.iter().zip(&o.m).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, o: &LinOperator) -> Result<LinOperator> {
        self.same_shape(o)?;
        Ok(LinOperator {
            m: self.m.iter().zip(&o.m).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, s: &Scalar) -> LinOperator {
        LinOperator {
            m: self.m.iter().map(|a| a * s).collect(),
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|x| x.is_zero())
    }

    /// ‖T‖²_HS, exact on the exact backend.
    pub fn hs_sq(&self) -> Scalar {
        let mut acc = ScalarAcc::default();
        for x in &self.m {
            if !x.is_zero() {
                acc.add(&(&x.conj() * x));
            }
        }
        acc.finish()
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = ScalarAcc::default();
        for i in 0..self.size() {
            acc.add(self.get(i, i));
        }
        acc.finish()
    }

    pub fn op_norm(&self) -> f64 {
        let n = self.size();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| self.get(i, j).to_c64());
        op_norm_c64(&m)
    }

    /// Exact ‖T‖² when T*T = c·P for an idempotent P and rational c.
    pub fn op_norm_sq_exact(&self) -> Option<Q> {
        let tt = self.adjoint().mul(self).ok()?;
        // c is the unique nonzero eigenvalue: c = tr(T*T)²/tr((T*T)²)
        let tr = tt.trace().exact()?.as_rational()?;
        let tt2 = tt.mul(&tt).ok()?;
        let tr2 = tt2.trace().exact()?.as_rational()?;
        if tr2.is_zero() {
            return None;
        }
        let c = tr2 / tr;
        let p = tt.scale(&Scalar::from_q(&c.recip()));
        (p.mul(&p).ok()? == p).then_some(c)
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        let n = self.size();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = ScalarAcc::default();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc.add(&(a * x));
                    }
                }
                acc.finish()
            })
            .collect()
    }

    /// Every row and column holds exactly one nonzero entry.
    pub fn is_monomial(&self) -> bool {
        let n = self.size();
        let mut cols = vec![0usize; n];
        for i in 0..n {
            let mut row = 0;
            for j in 0..n {
                if !self.get(i, j).is_zero() {
                    row += 1;
                    cols[j] += 1;
                }
            }
            if row != 1 {
                return false;
            }
        }
        cols.iter().all(|c| *c == 1)
    }

    /// κ with self = κ·o, if any.
    pub fn ratio_to(&self, o: &LinOperator) -> Option<Scalar> {
        let idx = o.m.iter().position(|x| !x.is_zero())?;
        let oc = o.m[idx].exact()?.clone();
        let norm_sq = oc.mul(&oc.conj()).as_rational()?;
        let kappa = Scalar::Exact(
            self.m[idx]
                .exact()?
                .mul(&oc.conj())
                .scale_q(&norm_sq.recip()),
        );
        (o.scale(&kappa) == *self).then_some(kappa)
    }

    /// |u⟩⟨v|: φ ↦ ⟨v,φ⟩u.
    pub fn rank_one(basis: CellBasis, u: &[Scalar], v: &[Scalar]) -> LinOperator {
        let n = basis.dim();
        let vol = basis.volume();
        let mut m = Vec::with_capacity(n * n);
        for ui in u {
            for vj in v {
                m.push((ui * &vj.conj()).scale_q(&vol));
            }
        }
        LinOperator { basis, k: 1, m }
    }

    pub fn to_json(&self) -> Value {
        let n = self.size();
        let rows: Vec<Value> = (0..n)
            .map(|i| Value::Array((0..n).map(|j| scalar_to_json(self.get(i, j))).collect()))
            .collect();
        json!({"basis": self.basis.json(), "block": self.k, "matrix": rows})
    }

    /// Row-major CSV of the float values, `re+imi` per cell.
    pub fn to_csv(&self) -> String {
        let n = self.size();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let z = self.get(i, j).to_c64();
                    format!("{}{:+}i", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn theta_t(theta: &Theta) -> Result<i32> {
    match theta {
        Theta::Zero => Err(Error::InvalidTheta("quantization needs θ ≠ 0".into())),
        Theta::Unit { t, .. } => Ok(*t as i32),
    }
}

fn split(x: &[Q]) -> (&[Q], &[Q]) {
    x.split_at(x.len() / 2)
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + x * y)
}

/// Smallest basis on which U_θ(X) acts by cell permutation and cell-constant
/// phases.
pub fn basis_for_point(p: u64, theta: &Theta, x: &[Q]) -> Result<CellBasis> {
    let t = theta_t(theta)?;
    let (xs, xi) = split(x);
    let r = support_exp(p, xs, 0);
    let s = (support_exp(p, xi, i32::MIN / 4) + t).max(0);
    CellBasis::new(p, xs.len(), r, s)
}

/// Smallest basis that represents Ω_θ(F) for F at resolution `res`.
pub fn basis_for_symbol(p: u64, d: usize, theta: &Theta, res: Resolution) -> Result<CellBasis> {
    let t = theta_t(theta)?;
    let r = res.r.max(res.s - t);
    let s = res.s.max(res.r + t).max(t - res.s);
    let s = s.max(-r);
    CellBasis::new(p, d, r, s)
}

fn require(basis: &CellBasis, need: &CellBasis, what: &str) -> Result<()> {
    if !basis.res.contains(&need.res) {
        return Err(Error::Inadequate {
            what: what.into(),
            r: need.res.r.max(basis.res.r),
            s: need.res.s.max(basis.res.s),
        });
    }
    Ok(())
}

/// U_θ(X)φ(y) = Ψ(θ^{-1}⟨ξ, y − x/2⟩)φ(y − x).
pub fn schrodinger_u(theta: &Theta, x: &[Q], basis: &CellBasis) -> Result<LinOperator> {
    require(basis, &basis_for_point(basis.p, theta, x)?, "U_θ(X)")?;
    let inv = theta.inv(basis.p);
    let (xs, xi) = split(x);
    let half = Q::new(1, 2);
    monomial(basis, |y| {
        let src = vsub(y, xs);
        let ph = psi(basis.p, &(inv * dot(xi, &vsub(y, &vscale(&half, xs)))));
        (src, ph)
    })
}

/// Σφ(y) = φ(−y).
pub fn sigma(basis: &CellBasis) -> LinOperator {
    monomial(basis, |y| {
        (y.iter().map(|a| -a).collect(), Root::one(basis.p))
    })
    .expect("parity permutes cells")
}

/// Ω_θ(X)φ(y) = Ψ(2θ^{-1}⟨ξ, y − x⟩)φ(2x − y) = U_θ(X)ΣU_θ(X)*φ(y).
pub fn omega_point(theta: &Theta, x: &[Q], basis: &CellBasis) -> Result<LinOperator> {
    require(basis, &basis_for_point(basis.p, theta, x)?, "Ω_θ(X)")?;
    let inv = theta.inv(basis.p);
    let (xs, xi) = split(x);
    let two = Q::from_integer(2);
    monomial(basis, |y| {
        let src = vsub(&vscale(&two, xs), y);
        let ph = psi(basis.p, &(two * inv * dot(xi, &vsub(y, xs))));
        (src, ph)
    })
}

/// (Tφ)(y) = phase(y)·φ(src(y)).
pub(crate) fn monomial<F>(basis: &CellBasis, f: F) -> Result<LinOperator>
where
    F: Fn(&[Q]) -> (Vec<Q>, Root) + Sync + Send,
{
    let n = basis.dim();
    let cols: Vec<Result<(usize, Root)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (src, ph) = f(&basis.point(i));
            let j = basis
                .locate(&src)
                .ok_or_else(|| Error::Resolution("operator leaves the basis box".into()))?;
            Ok((j, ph))
        })
        .collect();
    let mut out = LinOperator::zeros(*basis, 1);
    for (i, c) in cols.into_iter().enumerate() {
        let (j, ph) = c?;
        out.m[i * n + j] = Scalar::from_root(ph);
    }
    Ok(out)
}

/// Ω_θ(F), kernel K(x,y) = |θ|^{-d}∫F((x+y)/2, η)Ψ(θ^{-1}⟨x−y, η⟩)dη.
/// Algebra-valued symbols give block operators.
pub fn quantize<C: Coeff>(
    f: &SBFunction<C>,
    theta: &Theta,
    basis: &CellBasis,
) -> Result<LinOperator> {
    let t = theta_t(theta)?;
    if f.n != 2 * basis.d || f.p != basis.p {
        return Err(Error::Mismatch("symbol and basis dimensions differ".into()));
    }
    let need = basis_for_symbol(f.p, basis.d, theta, f.res)?;
    require(basis, &need, "quantize")?;
    let p = f.p;
    let d = basis.d;
    let k = C::block_dim(&f.space);
    let nb = basis.dim();
    let inv = theta.inv(p);
    let half = Q::new(1, 2);
    let eta_cells = side(p, f.res).pow(d as u32);
    let etas: Vec<Vec<Q>> = (0..eta_cells).map(|i| cell_point(p, d, f.res, i)).collect();
    let reach = f.res.s - t;
    // |θ|^{-d}·p^{-sd}·p^{-Sd}
    let factor = pow_signed_q(
        p,
        t * d as i32 - f.res.s * d as i32 - basis.res.s * d as i32,
    );
    let entries: Vec<C> = (0..nb * nb)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / nb, ij % nb);
            let x = basis.point(i);
            let y = basis.point(j);
            let w = vsub(&x, &y);
            if support_exp(p, &w, i32::MIN / 4) > reach {
                return C::zero(&f.space);
            }
            let m = vscale(&half, &vadd(&x, &y));
            let Some(mi) = locate(p, d, f.res, &m) else {
                return C::zero(&f.space);
            };
            let mut acc = C::acc_new(&f.space);
            for (e, eta) in etas.iter().enumerate() {
                let c = &f.coeffs[mi + eta_cells * e];
                if !c.is_zero() {
                    C::acc_add(&mut acc, c, psi(p, &(inv * dot(&w, eta))));
                }
            }
            C::acc_finish(acc, &f.space).scale_q(&factor)
        })
        .collect();
    let n = nb * k;
    let mut m = vec![Scalar::zero(); n * n];
    for (ij, c) in entries.iter().enumerate() {
        let (i, j) = (ij / nb, ij % nb);
        for a in 0..k {
            for b in 0..k {
                m[(i * k + a) * n + j * k + b] = c.block(a, b);
            }
        }
    }
    Ok(LinOperator {
        basis: *basis,
        k,
        m,
    })
}

/// Inverse of [`quantize`]: F(m,ξ) = ∫K(m + w/2, m − w/2)Ψ(−θ^{-1}⟨ξ,w⟩)dw,
/// returned at its coarsest exact resolution.
pub fn symbol<C: Coeff>(
    op: &LinOperator,
    theta: &Theta,
    space: &C::Space,
) -> Result<SBFunction<C>> {
    let t = theta_t(theta)?;
    let k = C::block_dim(space);
    if k != op.k {
        return Err(Error::Mismatch(format!(
            "block size {} vs coefficient size {k}",
            op.k
        )));
    }
    let b = op.basis;
    let (p, d) = (b.p, b.d);
    let res = Resolution {
        r: b.res.r.max(b.res.s - t),
        s: b.res.s.max(b.res.r + t),
    };
    let inv = theta.inv(p);
    let half = Q::new(1, 2);
    let nb = b.dim();
    let ws: Vec<Vec<Q>> = (0..nb).map(|i| b.point(i)).collect();
    let n = op.size();
    let f = SBFunction::from_fn(p, 2 * d, res, space.clone(), |mx| {
        let (m, xi) = split(mx);
        if b.locate(m).is_none() {
            return C::zero(space);
        }
        let mut accs = vec![ScalarAcc::default(); k * k];
        for w in &ws {
            let hw = vscale(&half, w);
            let (Some(i), Some(j)) = (b.locate(&vadd(m, &hw)), b.locate(&vsub(m, &hw))) else {
                continue;
            };
            let ph = psi(p, &(-inv * dot(xi, w)));
            for a in 0..k {
                for c in 0..k {
                    let v = &op.m[(i * k + a) * n + j * k + c];
                    if !v.is_zero() {
                        accs[a * k + c].add_rooted(v, ph);
                    }
                }
            }
        }
        C::from_block(space, accs.into_iter().map(|a| a.finish()).collect())
    });
    Ok(f.trim())
}

/// f ⋆_θ g by the double integral
/// |2/θ|^{2d}∫∫Ψ̄((2/θ)[Y−X, Z−X])f(Y)g(Z)dYdZ; θ = 0 is the pointwise product.
pub fn moyal_star<C: Coeff>(
    f: &SBFunction<C>,
    g: &SBFunction<C>,
    theta: &Theta,
) -> Result<SBFunction<C>> {
    if f.n != g.n || !f.n.is_multiple_of(2) || f.p != g.p {
        return Err(Error::Mismatch(
            "Moyal product needs two functions on the same k^{2d}".into(),
        ));
    }
    let t = match theta {
        Theta::Zero => return f.mul(g),
        Theta::Unit { t, .. } => *t as i32,
    };
    let p = f.p;
    let n = f.n;
    // on cells with 2s ≥ t the cell integral factorizes into two ball indicators
    let s = f.res.s.max(g.res.s).max((t + 1) / 2);
    let r = f.res.r.max(g.res.r).max(s - t);
    let out_res = Resolution { r, s };
    let off_res = Resolution { r: s - t, s };
    let offsets: Vec<Vec<Q>> = (0..side(p, off_res).pow(n as u32))
        .map(|i| cell_point(p, n, off_res, i))
        .collect();
    let c = Q::from_integer(2) * theta.inv(p);
    let phases: Vec<Vec<Root>> = offsets
        .par_iter()
        .map(|a| {
            offsets
                .iter()
                .map(|b| psi(p, &(-c * sympl_pair(a, b))))
                .collect()
        })
        .collect();
    let factor = pow_signed_q(p, (2 * t - 4 * s) * (n as i32 / 2));
    let one = Root::one(p);
    let out = SBFunction::from_fn(p, n, out_res, f.space.clone(), |x| {
        let fv: Vec<C> = offsets.iter().map(|a| f.eval(&vadd(x, a))).collect();
        let gv: Vec<C> = offsets.iter().map(|b| g.eval(&vadd(x, b))).collect();
        let mut acc = C::acc_new(&f.space);
        for (ai, fa) in fv.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            let mut h = C::acc_new(&f.space);
            for (bi, gb) in gv.iter().enumerate() {
                if !gb.is_zero() {
                    C::acc_add(&mut h, gb, phases[ai][bi]);
                }
            }
            let h = C::acc_finish(h, &f.space);
            if !h.is_zero() {
                C::acc_add(&mut acc, &fa.mul(&h), one);
            }
        }
        C::acc_finish(acc, &f.space).scale_q(&factor)
    });
    Ok(out.trim())
}

/// f ⋆_θ g as the symbol of Ω_θ(f)Ω_θ(g).
pub fn moyal_via_operators<C: Coeff>(
    f: &SBFunction<C>,
    g: &SBFunction<C>,
    theta: &Theta,
) -> Result<SBFunction<C>> {
    if theta.is_zero() {
        return Err(Error::InvalidTheta(
            "no quantization exists at θ = 0".into(),
        ));
    }
    let d = f.n / 2;
    let b = basis_for_symbol(f.p, d, theta, f.res)?.join(&basis_for_symbol(f.p, d, theta, g.res)?);
    let prod = quantize(f, theta, &b)?.mul(&quantize(g, theta, &b)?)?;
    symbol(&prod, theta, &f.space)
}

/// The normalized indicator η of Z_p^d.
pub fn eta(p: u64, d: usize) -> SBFunction<Scalar> {
    SBFunction {
        p,
        n: d,
        res: Resolution { r: 0, s: 0 },
        space: (),
        coeffs: vec![Scalar::one()],
    }
}

/// U_θ(X)φ as a function.
pub fn u_apply(theta: &Theta, x: &[Q], phi: &SBFunction<Scalar>) -> Result<SBFunction<Scalar>> {
    let t = theta_t(theta)?;
    let p = phi.p;
    let (xs, xi) = split(x);
    let res = Resolution {
        r: phi.res.r.max(support_exp(p, xs, phi.res.r)),
        s: phi.res.s.max(support_exp(p, xi, i32::MIN / 4) + t),
    };
    let inv = theta.inv(p);
    let half = Q::new(1, 2);
    Ok(SBFunction::from_fn(p, phi.n, res, (), |y| {
        let v = phi.eval(&vsub(y, xs));
        if v.is_zero() {
            return v;
        }
        v.mul_root(psi(p, &(inv * dot(xi, &vsub(y, &vscale(&half, xs))))))
    }))
}

/// Ω_θ(X)φ as a function.
pub fn omega_apply(theta: &Theta, x: &[Q], phi: &SBFunction<Scalar>) -> Result<SBFunction<Scalar>> {
    let t = theta_t(theta)?;
    let p = phi.p;
    let (xs, xi) = split(x);
    let res = Resolution {
        r: phi.res.r.max(support_exp(p, xs, phi.res.r)),
        s: phi.res.s.max(support_exp(p, xi, i32::MIN / 4) + t),
    };
    let inv = theta.inv(p);
    let two = Q::from_integer(2);
    Ok(SBFunction::from_fn(p, phi.n, res, (), |y| {
        let v = phi.eval(&vsub(&vscale(&two, xs), y));
        if v.is_zero() {
            return v;
        }
        v.mul_root(psi(p, &(two * inv * dot(xi, &vsub(y, xs)))))
    }))
}

/// Coherent state η_X^θ = U_θ(X)η.
pub fn coherent(p: u64, theta: &Theta, x: &[Q]) -> Result<SBFunction<Scalar>> {
    u_apply(theta, x, &eta(p, x.len() / 2))
}

/// Resolution on which W_{X,Y}^θ is exactly cell-constant and supported.
pub fn wigner_resolution(p: u64, theta: &Theta, x: &[Q], y: &[Q]) -> Result<Resolution> {
    let t = theta_t(theta)?;
    let l = support_exp(p, x, 0).max(support_exp(p, y, 0));
    Resolution::new(l, l + t)
}

/// W_{X,Y}^θ(Z) = ⟨η_X, Ω_θ(Z)η_Y⟩.
pub fn wigner(p: u64, theta: &Theta, x: &[Q], y: &[Q]) -> Result<SBFunction<Scalar>> {
    if x.len() != y.len() || !x.len().is_multiple_of(2) {
        return Err(Error::Mismatch(
            "phase-space points of different dimension".into(),
        ));
    }
    let res = wigner_resolution(p, theta, x, y)?;
    let ex = coherent(p, theta, x)?;
    let ey = coherent(p, theta, y)?;
    Ok(SBFunction::from_fn(p, x.len(), res, (), |z| {
        wigner_pair(theta, &ex, &ey, z).expect("θ checked")
    }))
}

/// W_{X,Y}^θ at a single point Z, without tabulating the whole function.
pub fn wigner_at(p: u64, theta: &Theta, x: &[Q], y: &[Q], z: &[Q]) -> Result<Scalar> {
    if x.len() != y.len() || x.len() != z.len() || !x.len().is_multiple_of(2) {
        return Err(Error::Mismatch(
            "phase-space points of different dimension".into(),
        ));
    }
    wigner_pair(theta, &coherent(p, theta, x)?, &coherent(p, theta, y)?, z)
}

fn wigner_pair(
    theta: &Theta,
    ex: &SBFunction<Scalar>,
    ey: &SBFunction<Scalar>,
    z: &[Q],
) -> Result<Scalar> {
    ex.inner(&omega_apply(theta, z, ey)?)
}

/// The coherent-state lemma: |W_{X,Y}^θ| is the indicator of
/// Z_θ − ½(X_θ + Y_θ) ∈ Z_p^{2d}, X_θ = (x, θ^{-1}ξ).
pub fn wigner_modulus_predicted(p: u64, theta: &Theta, x: &[Q], y: &[Q], z: &[Q]) -> bool {
    let d = x.len() / 2;
    let inv = theta.inv(p);
    let half = Q::new(1, 2);
    let m = vsub(z, &vscale(&half, &vadd(x, y)));
    let (ms, mxi) = m.split_at(d);
    support_exp(p, ms, i32::MIN / 4) <= 0 && support_exp(p, &vscale(&inv, mxi), i32::MIN / 4) <= 0
}

/// Both sides of the reproducing formula with window η:
/// ⟨φ,ψ⟩ and |θ|^{-d}∫⟨φ,η_X⟩⟨η_X,ψ⟩dX.
pub fn reproducing_check(
    phi: &SBFunction<Scalar>,
    psi_f: &SBFunction<Scalar>,
    theta: &Theta,
) -> Result<(Scalar, Scalar)> {
    let t = theta_t(theta)?;
    let lhs = phi.inner(psi_f)?;
    let p = phi.p;
    let d = phi.n;
    let res = phi.res.join(&psi_f.res);
    // ⟨φ,η_X⟩⟨η_X,ψ⟩ has x-support p^{max(r,0)}, ξ-support p^{max(s,0)-t},
    // and is constant on x-cells of size 1 and ξ-cells of size p^{-t-max(r,0)}
    let big = res.r.max(res.s).max(0);
    let grid = Resolution { r: big, s: big + t };
    let cells = side(p, grid).pow(2 * d as u32);
    let terms: Vec<Scalar> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let x = cell_point(p, 2 * d, grid, i);
            let ex = coherent(p, theta, &x).expect("θ checked");
            let a = phi.inner(&ex).expect("same space");
            if a.is_zero() {
                return a;
            }
            &a * &ex.inner(psi_f).expect("same space")
        })
        .collect();
    let mut acc = ScalarAcc::default();
    for v in &terms {
        acc.add(v);
    }
    let factor = pow_signed_q(p, t * d as i32 - 2 * d as i32 * grid.s);
    Ok((lhs, acc.finish().scale_q(&factor)))
}

#[derive(Clone, Debug)]
pub struct CvReport {
    pub lhs: f64,
    /// ‖Ω_θ(F)‖² when it is exactly computable.
    pub lhs_sq_exact: Option<Q>,
    pub weight_l1: Q,
    pub j_sup: f64,
    pub j_sup_exact: Option<Q>,
    pub rhs: f64,
    pub rhs_exact: Option<Q>,
}

impl CvReport {
    pub fn holds(&self, tol: f64) -> bool {
        match (&self.lhs_sq_exact, &self.rhs_exact) {
            (Some(l), Some(r)) => *l <= r * r,
            _ => self.lhs <= self.rhs + tol,
        }
    }
}

/// ‖Ω_θ(F)‖ against ‖μ0^{-2d-1}‖₁·‖J^{2d+1}F‖_∞.
pub fn cv_check<C: Coeff>(f: &SBFunction<C>, theta: &Theta) -> Result<CvReport> {
    let d = f.n / 2;
    let basis = basis_for_symbol(f.p, d, theta, f.res)?;
    let op = quantize(f, theta, &basis)?;
    let lhs = op.op_norm();
    let lhs_sq_exact = if op.size() <= 81 {
        op.op_norm_sq_exact()
    } else {
        None
    };
    let n = 2 * d as u32 + 1;
    let weight_l1 = mu0_weight_l1(f.p, d as u32, n)?;
    let jf = apply_j(f, n as i32, None)?;
    let j_sup = jf.linf();
    let j_sup_exact = jf.linf_exact();
    let wl = crate::bruhat::q_to_f64(&weight_l1);
    Ok(CvReport {
        lhs,
        lhs_sq_exact,
        rhs: wl * j_sup,
        rhs_exact: j_sup_exact.map(|j| j * weight_l1),
        weight_l1,
        j_sup,
        j_sup_exact,
    })
}

/// U_θ(Y)Ω_θ(F)U_θ(Y)* and Ω_θ(τ_{-Y}F) on a common basis.
pub fn covariance_pair<C: Coeff>(
    f: &SBFunction<C>,
    theta: &Theta,
    y: &[Q],
) -> Result<(LinOperator, LinOperator)> {
    let d = f.n / 2;
    let moved = f.translate(&y.iter().map(|a| -a).collect::<Vec<_>>())?;
    let basis = basis_for_symbol(f.p, d, theta, f.res)?
        .join(&basis_for_symbol(f.p, d, theta, moved.res)?)
        .join(&basis_for_point(f.p, theta, y)?);
    let u = schrodinger_u(theta, y, &basis)?;
    let q = quantize(f, theta, &basis)?;
    let u = block_extend(&u, q.k);
    let lhs = u.mul(&q)?.mul(&u.adjoint())?;
    Ok((lhs, quantize(&moved, theta, &basis)?))
}

/// T ⊗ 1_k.
pub fn block_extend(t: &LinOperator, k: usize) -> LinOperator {
    if k == t.k {
        return t.clone();
    }
    let nb = t.basis.dim();
    let n = nb * k;
    let mut m = vec![Scalar::zero(); n * n];
    for i in 0..nb {
        for j in 0..nb {
            let v = t.get(i, j);
            if !v.is_zero() {
                for a in 0..k {
                    m[(i * k + a) * n + j * k + a] = v.clone();
                }
            }
        }
    }
    LinOperator {
        basis: t.basis,
        k,
        m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{indicator, random};
    use crate::padic::{q, qi};
    use crate::scalars::Backend;

    fn unit_ball() -> SBFunction<Scalar> {
        indicator(3, &[qi(0), qi(0)], 0).unwrap()
    }

    fn th(n: i128) -> Theta {
        Theta::from_int(3, n)
    }

    #[test]
    fn schrodinger_basics() {
        let b = CellBasis::new(3, 1, 1, 1).unwrap();
        let id = LinOperator::identity(b, 1);
        assert_eq!(schrodinger_u(&th(1), &[qi(0), qi(0)], &b).unwrap(), id);
        let s = sigma(&b);
        assert_eq!(s.mul(&s).unwrap(), id);
        let x = [q(1, 3), qi(1)];
        let o = omega_point(&th(1), &x, &b).unwrap();
        assert_eq!(o.mul(&o).unwrap(), id);
        assert_eq!(o.adjoint(), o);
        let u = schrodinger_u(&th(1), &x, &b).unwrap();
        assert!(u.is_monomial());
        assert_eq!(u.mul(&u.adjoint()).unwrap(), id);
        assert_eq!(u.mul(&s).unwrap().mul(&u.adjoint()).unwrap(), o);
        assert_eq!(u.hs_sq(), Scalar::int(9));
    }

    #[test]
    fn inadequate_basis_is_reported() {
        let b = CellBasis::new(3, 1, 0, 0).unwrap();
        let e = schrodinger_u(&th(1), &[q(1, 3), qi(0)], &b).unwrap_err();
        assert!(matches!(e, Error::Inadequate { r: 1, .. }));
        let f = random(3, 2, Resolution { r: 1, s: 1 }, 1, Backend::Exact);
        assert!(matches!(
            quantize(&f, &th(1), &b),
            Err(Error::Inadequate { .. })
        ));
    }

    #[test]
    fn cocycle_on_81_cells() {
        let b = CellBasis::new(3, 1, 2, 2).unwrap();
        assert_eq!(b.dim(), 81);
        let x = [q(1, 3), qi(0)];
        let y = [qi(0), q(1, 3)];
        let ux = schrodinger_u(&th(1), &x, &b).unwrap();
        let uy = schrodinger_u(&th(1), &y, &b).unwrap();
        let uxy = schrodinger_u(&th(1), &vadd(&x, &y), &b).unwrap();
        let phase = psi(3, &(sympl_pair(&x, &y) / qi(2)));
        assert_eq!(ux.mul(&uy).unwrap(), uxy.scale(&Scalar::from_root(phase)));
        // [X,Y] = -1/9 so the phase is a primitive 9th root
        assert_eq!(phase, Root::new(3, 4, 2));
    }

    #[test]
    fn quantized_unit_ball_is_the_eta_projector() {
        let b = CellBasis::new(3, 1, 1, 1).unwrap();
        let e = b.vector(&eta(3, 1)).unwrap();
        let proj = LinOperator::rank_one(b, &e, &e);
        let qf = quantize(&unit_ball(), &th(1), &b).unwrap();
        assert_eq!(qf, proj);
        assert_eq!(qf.trace(), Scalar::one());
        assert_eq!(qf.op_norm_sq_exact(), Some(qi(1)));
        assert!((qf.op_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hs_unitarity_inverse_and_adjoint() {
        for (seed, n) in [(1u64, 1i128), (2, 3), (3, 9)] {
            let t = th(n);
            let f = random(3, 2, Resolution { r: 1, s: 0 }, seed, Backend::Exact);
            let b = basis_for_symbol(3, 1, &t, f.res).unwrap();
            let qf = quantize(&f, &t, &b).unwrap();
            let abs_theta = t.abs().to_q(3);
            assert_eq!(qf.hs_sq().scale_q(&abs_theta), f.l2_sq());
            assert!(symbol::<Scalar>(&qf, &t, &()).unwrap().same(&f));
            assert_eq!(quantize(&f.star(), &t, &b).unwrap(), qf.adjoint());
        }
    }

    #[test]
    fn moyal_products() {
        let one = unit_ball();
        assert!(moyal_star(&one, &one, &th(1)).unwrap().same(&one));
        let res = Resolution { r: 1, s: 0 };
        let f = random(3, 2, res, 11, Backend::Exact);
        let g = random(3, 2, res, 12, Backend::Exact);
        assert!(moyal_star(&f, &g, &Theta::Zero)
            .unwrap()
            .same(&f.mul(&g).unwrap()));
        assert!(moyal_via_operators(&f, &g, &Theta::Zero).is_err());
        for n in [1, 3] {
            let t = th(n);
            let d = moyal_star(&f, &g, &t).unwrap();
            assert!(d.same(&moyal_via_operators(&f, &g, &t).unwrap()));
            assert!(d
                .star()
                .same(&moyal_star(&g.star(), &f.star(), &t).unwrap()));
        }
    }

    #[test]
    fn wigner_lemma_and_rank_one_symbols() {
        let p = 3;
        let w00 = wigner(p, &th(1), &[qi(0), qi(0)], &[qi(0), qi(0)]).unwrap();
        assert_eq!(w00.eval(&[qi(0), qi(0)]), Scalar::one());
        for t in [th(1), th(3)] {
            for (x, y) in [
                ([q(1, 3), qi(1)], [qi(2), q(1, 3)]),
                ([qi(1), q(2, 3)], [q(-1, 3), qi(0)]),
            ] {
                let w = wigner(p, &t, &x, &y).unwrap();
                for i in 0..w.ncells() {
                    let z = w.point(i);
                    let m = w.coeffs[i].exact().unwrap().abs_exact().unwrap();
                    let want = if wigner_modulus_predicted(p, &t, &x, &y, &z) {
                        1
                    } else {
                        0
                    };
                    assert_eq!(m, qi(want));
                }
                // symbol of φ ↦ ⟨η_X, φ⟩η_Y, with constant 1
                let b = basis_for_symbol(p, 1, &t, w.res).unwrap();
                let ex = b.vector(&coherent(p, &t, &x).unwrap()).unwrap();
                let ey = b.vector(&coherent(p, &t, &y).unwrap()).unwrap();
                let qw = quantize(&w, &t, &b).unwrap();
                assert_eq!(
                    qw.ratio_to(&LinOperator::rank_one(b, &ey, &ex)),
                    Some(Scalar::one())
                );
                assert_eq!(qw.ratio_to(&LinOperator::rank_one(b, &ex, &ey)), None);
            }
        }
    }

    #[test]
    fn wigner_at_matches_the_table() {
        let t = th(3);
        let (x, y) = ([q(1, 3), qi(1)], [qi(2), q(1, 3)]);
        let w = wigner(3, &t, &x, &y).unwrap();
        for i in (0..w.ncells()).step_by(5) {
            assert_eq!(wigner_at(3, &t, &x, &y, &w.point(i)).unwrap(), w.coeffs[i]);
        }
        // outside the table's support
        assert!(wigner_at(3, &t, &x, &y, &[qi(0), q(1, 27)])
            .unwrap()
            .is_zero());
    }

    #[test]
    fn wigner_is_refinement_stable() {
        let t = th(1);
        let (x, y) = ([q(1, 3), qi(1)], [qi(2), q(1, 3)]);
        let w = wigner(3, &t, &x, &y).unwrap();
        let fine = w
            .refine(Resolution {
                r: w.res.r,
                s: w.res.s + 1,
            })
            .unwrap();
        let ex = coherent(3, &t, &x).unwrap();
        let ey = coherent(3, &t, &y).unwrap();
        for i in (0..fine.ncells()).step_by(7) {
            let z = fine.point(i);
            let direct = ex.inner(&omega_apply(&t, &z, &ey).unwrap()).unwrap();
            assert_eq!(fine.coeffs[i], direct);
        }
    }

    #[test]
    fn reproducing_formula() {
        let e = eta(3, 1);
        let (l, r) = reproducing_check(&e, &e, &th(1)).unwrap();
        assert_eq!((l, r), (Scalar::one(), Scalar::one()));
        let f = random(3, 1, Resolution { r: 1, s: 1 }, 5, Backend::Exact);
        let g = random(3, 1, Resolution { r: 0, s: 1 }, 6, Backend::Exact);
        for n in [1, 3] {
            let (l, r) = reproducing_check(&f, &g, &th(n)).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn cv_bound_on_unit_ball() {
        for n in [1, 3, 9] {
            let rep = cv_check(&unit_ball(), &th(n)).unwrap();
            assert_eq!(rep.rhs_exact, Some(q(13, 9)));
            if n == 1 {
                assert_eq!(rep.lhs_sq_exact, Some(qi(1)));
            }
            assert!(rep.holds(1e-9));
        }
    }

    #[test]
    fn wigner_eigenrelation() {
        use crate::fourier::apply_i;
        use crate::padic::mu0;
        let half = q(1, 2);
        for n in [1, 3] {
            let t = th(n);
            let (x, y) = ([qi(3), q(1, 3)], [q(1, 3), qi(1)]);
            let w = wigner(3, &t, &x, &y).unwrap();
            let a = mu0(3, &vscale(&half, &vadd(&x, &y))).to_q(3);
            let b = mu0(3, &vscale(&(half * t.inv(3)), &vsub(&x, &y))).to_q(3);
            let lhs = apply_j(&apply_i(&w, 2), 1, None).unwrap();
            assert!(lhs.same(&w.scale_q(&(a * a * b))));
        }
    }

    #[test]
    fn covariance() {
        let f = random(3, 2, Resolution { r: 0, s: 1 }, 9, Backend::Exact);
        let (l, r) = covariance_pair(&f, &th(3), &[q(1, 3), qi(1)]).unwrap();
        assert_eq!(l, r);
    }
}
