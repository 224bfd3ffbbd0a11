//! Fourier transform, the symplectic transform G, and the operators
//! I = μ0·, J = G I G with their θ-dilated variants.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bruhat::{cell_digits, cell_index, cell_point, side, support_exp, SBFunction};
use crate::error::{Error, Result};
use crate::padic::{
    ipow, mu0, pow_signed_q, psi, sympl_pair, val_int, vsub, PowerOfP, Resolution, Root, Theta, Q,
};
use crate::scalars::{Coeff, Scalar, ScalarAcc};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> i128 {
        match self {
            Direction::Forward => 1,
            Direction::Inverse => -1,
        }
    }
}

/// Splits `coeffs` into the lines along `axis` and applies `line` to each.
fn per_axis<C: Coeff, F>(coeffs: &[C], side: usize, n: usize, axis: usize, line: F) -> Vec<C>
where
    F: Fn(&[C]) -> Vec<C> + Sync + Send,
{
    let stride = side.pow(axis as u32);
    let lines = coeffs.len() / side;
    let results: Vec<(usize, Vec<C>)> = (0..lines)
        .into_par_iter()
        .map(|l| {
            let lo = l % stride;
            let hi = l / stride;
            let base = lo + hi * stride * side;
            let input: Vec<C> = (0..side)
                .map(|k| coeffs[base + k * stride].clone())
                .collect();
            (base, line(&input))
        })
        .collect();
    let _ = n;
    let mut out = coeffs.to_vec();
    for (base, vals) in results {
        for (k, v) in vals.into_iter().enumerate() {
            out[base + k * stride] = v;
        }
    }
    out
}

/// Fourier transform with Ψ(±x·ξ). Input at (r,s) gives output at (s,r);
/// each cell integral is evaluated in closed form, axis by axis.
pub fn fourier<C: Coeff>(f: &SBFunction<C>, dir: Direction) -> SBFunction<C> {
    let side = f.side();
    let depth = f.res.depth();
    let p = f.p;
    let sg = dir.sign();
    let space = f.space.clone();
    let mut coeffs = f.coeffs.clone();
    for axis in 0..f.n {
        coeffs = per_axis(&coeffs, side, f.n, axis, |x| {
            (0..side)
                .map(|b| {
                    let mut acc = C::acc_new(&space);
                    for (a, v) in x.iter().enumerate() {
                        if !v.is_zero() {
                            C::acc_add(&mut acc, v, Root::new(p, sg * (a * b) as i128, depth));
                        }
                    }
                    C::acc_finish(acc, &space)
                })
                .collect()
        });
    }
    let vol = pow_signed_q(p, -f.res.s * f.n as i32);
    SBFunction {
        p,
        n: f.n,
        res: Resolution {
            r: f.res.s,
            s: f.res.r,
        },
        space: f.space.clone(),
        coeffs,
    }
    .scale_q(&vol)
}

/// Radix-p decimation-in-time DFT of length p^k with ω = ζ_{p^k}^{sign}.
fn fft_line(x: &[Scalar], p: u64, depth: u32, sign: i128) -> Vec<Scalar> {
    let n = x.len();
    if n == 1 {
        return x.to_vec();
    }
    let pu = p as usize;
    let m = n / pu;
    let subs: Vec<Vec<Scalar>> = (0..pu)
        .map(|j| {
            let part: Vec<Scalar> = x.iter().skip(j).step_by(pu).cloned().collect();
            fft_line(&part, p, depth - 1, sign)
        })
        .collect();
    (0..n)
        .map(|b| {
            let mut acc = ScalarAcc::default();
            for (j, y) in subs.iter().enumerate() {
                let v = &y[b % m];
                if !v.is_zero() {
                    acc.add_rooted(v, Root::new(p, sign * (j * b) as i128, depth));
                }
            }
            acc.finish()
        })
        .collect()
}

/// Same transform as [`fourier`] through a radix-p fast path.
pub fn fft_fast(f: &SBFunction<Scalar>, dir: Direction) -> SBFunction<Scalar> {
    let side = f.side();
    let depth = f.res.depth();
    let p = f.p;
    let sg = dir.sign();
    let mut coeffs = f.coeffs.clone();
    for axis in 0..f.n {
        coeffs = per_axis(&coeffs, side, f.n, axis, |x| fft_line(x, p, depth, sg));
    }
    let vol = pow_signed_q(p, -f.res.s * f.n as i32);
    SBFunction {
        p,
        n: f.n,
        res: Resolution {
            r: f.res.s,
            s: f.res.r,
        },
        space: (),
        coeffs,
    }
    .scale_q(&vol)
}

fn check_even<C: Coeff>(f: &SBFunction<C>) -> Result<usize> {
    if !f.n.is_multiple_of(2) {
        return Err(Error::Mismatch(format!(
            "symplectic transform needs even dimension, got {}",
            f.n
        )));
    }
    Ok(f.n / 2)
}

/// Gf(X) = ∫ f(Y)Ψ(2[Y,X])dY = (Ff)(−2ξ, 2x).
pub fn symplectic_g<C: Coeff>(f: &SBFunction<C>) -> Result<SBFunction<C>> {
    check_even(f)?;
    Ok(reorient(&fourier(f, Direction::Forward)))
}

/// G through the fast transform.
pub fn symplectic_g_fast(f: &SBFunction<Scalar>) -> Result<SBFunction<Scalar>> {
    check_even(f)?;
    Ok(reorient(&fft_fast(f, Direction::Forward)))
}

/// X = (x,ξ) ↦ F(−2ξ, 2x), an exact relabelling of cells.
fn reorient<C: Coeff>(ff: &SBFunction<C>) -> SBFunction<C> {
    let d = ff.n / 2;
    let side = ff.side();
    let sd = side as i128;
    let coeffs = (0..ff.ncells())
        .map(|idx| {
            let b = cell_digits(side, ff.n, idx);
            let mut w = vec![0i128; ff.n];
            for i in 0..d {
                w[i] = (-2 * b[d + i]).rem_euclid(sd);
                w[d + i] = (2 * b[i]).rem_euclid(sd);
            }
            ff.coeffs[cell_index(side, &w)].clone()
        })
        .collect();
    SBFunction {
        coeffs,
        ..ff.clone()
    }
}

/// log_p |X| of a cell (`None` for the cell containing 0 at its own scale).
fn cell_abs_exp(p: u64, res: Resolution, digits: &[i128]) -> Option<i32> {
    let v = digits
        .iter()
        .filter(|a| **a != 0)
        .map(|a| val_int(p, *a) as i32)
        .min()?;
    Some(res.r - v)
}

/// Multiplication by (D_γ μ0)^m with γ = p^t (a unit part does not change
/// μ0). `t = 0` is I^m.
fn mul_weight<C: Coeff>(f: &SBFunction<C>, m: i32, t: i32) -> SBFunction<C> {
    let s = f.res.s.max(-t);
    let res = Resolution {
        r: f.res.r,
        s: s.max(-f.res.r),
    };
    let f = f.refine(res).expect("refinement");
    let p = f.p;
    let side = f.side();
    let n = f.n;
    let coeffs = f
        .coeffs
        .par_iter()
        .enumerate()
        .map(|(idx, c)| {
            if c.is_zero() || m == 0 {
                return c.clone();
            }
            let e = match cell_abs_exp(p, res, &cell_digits(side, n, idx)) {
                Some(e) => (e - t).max(0),
                None => 0,
            };
            c.scale_q(&pow_signed_q(p, e * m))
        })
        .collect();
    SBFunction { coeffs, ..f }
}

/// I^m f = μ0^m·f.
pub fn apply_i<C: Coeff>(f: &SBFunction<C>, m: i32) -> SBFunction<C> {
    mul_weight(f, m, 0)
}

/// I_θ^m f = (D_θμ0)^m·f; θ = 0 gives the identity.
pub fn apply_i_theta<C: Coeff>(f: &SBFunction<C>, m: i32, theta: &Theta) -> SBFunction<C> {
    match theta {
        Theta::Zero => f.clone(),
        Theta::Unit { t, .. } => mul_weight(f, m, *t as i32),
    }
}

/// J^n = G I^n G, or J_θ^n = G I_θ^n G when θ is given.
pub fn apply_j<C: Coeff>(
    f: &SBFunction<C>,
    n: i32,
    theta: Option<&Theta>,
) -> Result<SBFunction<C>> {
    let g = symplectic_g(f)?;
    let w = match theta {
        None => apply_i(&g, n),
        Some(th) => apply_i_theta(&g, n, th),
    };
    symplectic_g(&w)
}

/// D_θ f(X) = f(θX).
pub fn dilate_theta<C: Coeff>(f: &SBFunction<C>, theta: &Theta) -> Result<SBFunction<C>> {
    match theta {
        Theta::Zero => Err(Error::InvalidTheta(
            "dilation by 0 is not defined on SB functions".into(),
        )),
        Theta::Unit { t, u } => f.dilate(*t as i32, *u),
    }
}

/// ∫ μ0^n·Gψ, the pairing ⟨G(μ0^n), ψ⟩, for any SB ψ.
pub fn gmu_pair_any<C: Coeff>(n: i32, psi_fn: &SBFunction<C>) -> Result<C> {
    Ok(apply_i(&symplectic_g(psi_fn)?, n).integral())
}

/// ⟨G(μ0^n), ψ⟩ for ψ supported in Z_p^{2d}.
pub fn gmu_pair<C: Coeff>(n: i32, psi_fn: &SBFunction<C>) -> Result<C> {
    for (i, c) in psi_fn.coeffs.iter().enumerate() {
        if !c.is_zero() && padic_abs_cell(psi_fn, i) > PowerOfP::Pow(0) {
            return Err(Error::Resolution(
                "ψ must be supported in the unit ball".into(),
            ));
        }
    }
    gmu_pair_any(n, psi_fn)
}

fn padic_abs_cell<C: Coeff>(f: &SBFunction<C>, idx: usize) -> PowerOfP {
    match cell_abs_exp(f.p, f.res, &f.digits(idx)) {
        Some(e) => PowerOfP::Pow(e),
        None => PowerOfP::Zero,
    }
}

/// A finite sum F = Σ_j Ψ_{P_j} ⊗ a_j of phase functions Ψ_P(X) = Ψ(2[X,P]).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSum<C: Coeff = Scalar> {
    pub p: u64,
    pub d: usize,
    pub space: C::Space,
    pub terms: Vec<(Vec<Q>, C)>,
}

impl<C: Coeff> PhaseSum<C> {
    pub fn new(p: u64, d: usize, space: C::Space, terms: Vec<(Vec<Q>, C)>) -> Result<PhaseSum<C>> {
        for (i, (w, _)) in terms.iter().enumerate() {
            if w.len() != 2 * d {
                return Err(Error::Mismatch("weight dimension".into()));
            }
            if terms[..i].iter().any(|(v, _)| v == w) {
                return Err(Error::Mismatch("weights must be distinct".into()));
            }
        }
        Ok(PhaseSum { p, d, space, terms })
    }

    pub fn eval(&self, x: &[Q]) -> C {
        let mut acc = C::acc_new(&self.space);
        for (w, c) in &self.terms {
            C::acc_add(
                &mut acc,
                c,
                psi(self.p, &(sympl_pair(x, w) * Q::from_integer(2))),
            );
        }
        C::acc_finish(acc, &self.space)
    }

    /// F is constant on cosets of p^e Z_p^{2d} for e = this value (≥ 0).
    pub fn constancy(&self) -> i32 {
        self.terms
            .iter()
            .map(|(w, _)| support_exp(self.p, w, 0))
            .max()
            .unwrap_or(0)
    }

    /// I^m F as a pointwise-evaluable function (I leaves the spectral form).
    pub fn apply_i(&self, m: i32) -> impl Fn(&[Q]) -> C + '_ {
        move |x| {
            let e = mu0(self.p, x).exponent().unwrap();
            self.eval(x).scale_q(&pow_signed_q(self.p, e * m))
        }
    }

    /// Restriction to the ball p^m Z_p^{2d} as an SB function.
    pub fn window(&self, m: i32) -> SBFunction<C> {
        let res = Resolution {
            r: -m,
            s: self.constancy().max(m),
        };
        SBFunction::from_fn(self.p, 2 * self.d, res, self.space.clone(), |x| {
            self.eval(x)
        })
    }
}

/// J^nF(X) = ⟨G(μ0^n), W ↦ F(X−W)1_{Z_p^{2d}}(W)⟩ for a bounded function F
/// constant on cosets of p^{s}Z_p^{2d}.
pub fn pointwise_j<C, F>(
    p: u64,
    d: usize,
    space: C::Space,
    f: F,
    s: i32,
    n: i32,
    x: &[Q],
) -> Result<C>
where
    C: Coeff,
    F: Fn(&[Q]) -> C + Sync + Send,
{
    let res = Resolution { r: 0, s: s.max(0) };
    let local = SBFunction::from_fn(p, 2 * d, res, space, |w| f(&vsub(x, w)));
    gmu_pair(n, &local)
}

/// J^nF(X) for a phase sum.
pub fn pointwise_j_spec<C: Coeff>(spec: &PhaseSum<C>, n: i32, x: &[Q]) -> Result<C> {
    pointwise_j(
        spec.p,
        spec.d,
        spec.space.clone(),
        |y| spec.eval(y),
        spec.constancy(),
        n,
        x,
    )
}

/// Right-hand side of the integral representation
/// J^nF(X) = ∫∫ Ψ̄(2[Y,Z]) μ0^n(Y−Z) μ0^{−N}(Y) μ0^{−N}(Z) (J^N F)(Y+X) dY dZ,
/// evaluated exactly: Z inside the ball of radius p^R is summed on a grid,
/// the shells beyond it in closed form.
pub fn integral_representation<C: Coeff>(
    f: &SBFunction<C>,
    n: u32,
    big_n: u32,
    x: &[Q],
) -> Result<C> {
    let d = check_even(f)?;
    if big_n < n + 2 * d as u32 + 1 {
        return Err(Error::Divergent {
            n: big_n,
            d: d as u32,
        });
    }
    let p = f.p;
    let h = apply_j(f, big_n as i32, None)?.translate(x)?.trim();
    let big_r = h.res.r.max(0);
    let y_res = Resolution {
        r: h.res.r,
        s: h.res.s.max(big_r).max(0),
    };
    let z_res = Resolution {
        r: big_r,
        s: h.res.r.max(0),
    };
    let h = h.refine(y_res)?;
    let dim = 2 * d;
    let y_vol = pow_signed_q(p, -y_res.s * dim as i32);
    let z_vol = pow_signed_q(p, -z_res.s * dim as i32);
    let z_cells: Vec<Vec<Q>> = (0..side(p, z_res).pow(dim as u32))
        .map(|i| cell_point(p, dim, z_res, i))
        .collect();
    let mu = |xs: &[Q]| -> Q { mu0(p, xs).to_q(p) };
    let two = Q::from_integer(2);
    let parts: Vec<(C, Vec<(Root, Q)>)> = (0..h.ncells())
        .into_par_iter()
        .filter(|i| !h.coeffs[*i].is_zero())
        .map(|i| {
            let y = h.point(i);
            let mut terms = Vec::new();
            let wy = mu(&y).pow(-(big_n as i32));
            for z in &z_cells {
                let w = mu(&vsub(&y, z)).pow(n as i32)
                    * wy
                    * mu(z).pow(-(big_n as i32))
                    * y_vol
                    * z_vol;
                terms.push((psi(p, &(-two * sympl_pair(&y, z))), w));
            }
            // shells |Z| = p^j, j > R: μ0(Y−Z) = |Z| and ∫_{shell}Ψ̄(2[Y,Z])dZ
            // = p^{2dj}1[|Y|≤p^{-j}] − p^{2d(j−1)}1[|Y|≤p^{1−j}], integrated over the Y cell.
            let cell_r = cell_abs_exp(p, y_res, &h.digits(i));
            let vol_ball = |k: i32| -> Q {
                match cell_r {
                    Some(e) if e <= -k => y_vol,
                    Some(_) => Q::zero(),
                    None => pow_signed_q(p, -(y_res.s.max(k)) * dim as i32),
                }
            };
            let last = match cell_r {
                Some(e) => -e + 1,
                None => y_res.s + 1,
            };
            let mut tail = Q::zero();
            for j in (big_r + 1)..=last.max(big_r) {
                let shell = pow_signed_q(p, dim as i32 * j) * vol_ball(j)
                    - pow_signed_q(p, dim as i32 * (j - 1)) * vol_ball(j - 1);
                tail += pow_signed_q(p, j * (n as i32 - big_n as i32)) * wy * shell;
            }
            if !tail.is_zero() {
                terms.push((Root::one(p), tail));
            }
            (h.coeffs[i].clone(), terms)
        })
        .collect();
    let mut acc = C::acc_new(&f.space);
    for (c, terms) in parts {
        let mut inner = ScalarAcc::default();
        for (r, w) in terms {
            inner.add_rooted(&Scalar::from_q(&w), r);
        }
        let s = inner.finish();
        if !s.is_zero() {
            C::acc_add(&mut acc, &c.scale(&s), Root::one(p));
        }
    }
    Ok(C::acc_finish(acc, &f.space))
}

/// Closed-form value of ⟨G(μ0^n), 1_{p^kZ_p^{2d}}⟩ = p^{−2dk}∫_{|X|≤p^k}μ0^n.
pub fn gmu_ball(p: u64, d: u32, n: i32, k: u32) -> Q {
    let pd = Q::from_integer(ipow(p, 2 * d));
    let mut total = Q::one();
    for j in 1..=k as i32 {
        let shell = pd.pow(j) - pd.pow(j - 1);
        total += shell * Q::from_integer(p as i128).pow(n * j);
    }
    total / pd.pow(k as i32)
}

/// |X|-bucket of a point, exposed for tests.
pub fn abs_exp(p: u64, xs: &[Q]) -> Option<i32> {
    crate::padic::norm(p, xs).exponent()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{character_window, indicator, random};
    use crate::padic::{q, qi};
    use crate::scalars::Backend;

    fn res(r: i32, s: i32) -> Resolution {
        Resolution::new(r, s).unwrap()
    }

    /// Naive oracle: Ff(ξ) = Σ_cells f(c)·p^{−sn}·Ψ(c·ξ)·1[|ξ| ≤ p^s],
    /// evaluated with rational arithmetic at every output cell.
    fn naive_fourier(f: &SBFunction<Scalar>) -> SBFunction<Scalar> {
        let out_res = Resolution {
            r: f.res.s,
            s: f.res.r,
        };
        let vol = pow_signed_q(f.p, -f.res.s * f.n as i32);
        SBFunction::from_fn(f.p, f.n, out_res, (), |xi| {
            let mut acc = Scalar::zero();
            for i in 0..f.ncells() {
                let c = f.point(i);
                let dot: Q = c
                    .iter()
                    .zip(xi)
                    .map(|(a, b)| a * b)
                    .fold(Q::zero(), |s, t| s + t);
                acc = &acc + &f.coeffs[i].mul_root(psi(f.p, &dot));
            }
            acc.scale_q(&vol)
        })
    }

    #[test]
    fn fourier_of_balls() {
        let o = indicator(3, &[qi(0)], 0).unwrap();
        assert!(fourier(&o, Direction::Forward).same(&o));
        assert!(naive_fourier(&o).same(&o));
        let b = indicator(3, &[qi(0)], 1).unwrap();
        let want = indicator(3, &[qi(0)], -1).unwrap().scale_q(&q(1, 3));
        assert!(naive_fourier(&b).same(&want));
        assert!(fourier(&b, Direction::Forward).same(&want));
    }

    #[test]
    fn fourier_matches_naive_oracle() {
        for seed in 0..5 {
            let f = random(3, 2, res(1, 0), seed, Backend::Exact);
            assert_eq!(fourier(&f, Direction::Forward), naive_fourier(&f));
            let g = random(5, 1, res(0, 2), seed, Backend::Exact);
            assert_eq!(fourier(&g, Direction::Forward), naive_fourier(&g));
        }
    }

    #[test]
    fn fourier_inverts() {
        let f = random(3, 2, res(1, 1), 3, Backend::Exact);
        assert_eq!(
            fourier(&fourier(&f, Direction::Forward), Direction::Inverse),
            f
        );
    }

    #[test]
    fn fast_path_agrees() {
        for seed in 0..4 {
            let f = random(3, 1, res(2, 1), seed, Backend::Exact);
            assert_eq!(
                fft_fast(&f, Direction::Forward),
                fourier(&f, Direction::Forward)
            );
            let g = random(3, 2, res(1, 1), seed, Backend::Exact);
            assert_eq!(
                fft_fast(&g, Direction::Inverse),
                fourier(&g, Direction::Inverse)
            );
        }
        let f = random(3, 1, res(3, 3), 9, Backend::Float);
        assert!(
            fft_fast(&f, Direction::Forward).approx_same(&fourier(&f, Direction::Forward), 1e-11)
        );
    }

    #[test]
    fn g_of_unit_ball_and_involution() {
        let o = indicator(3, &[qi(0), qi(0)], 0).unwrap();
        assert!(symplectic_g(&o).unwrap().same(&o));
        let f = random(3, 2, res(1, 1), 11, Backend::Exact);
        let gg = symplectic_g(&symplectic_g(&f).unwrap()).unwrap();
        assert_eq!(gg, f);
        assert_eq!(symplectic_g(&f).unwrap().l2_sq(), f.l2_sq());
        assert!(symplectic_g(&indicator(3, &[qi(0)], 0).unwrap()).is_err());
    }

    /// G checked against its definition ∫f(Y)Ψ(2[Y,X])dY, cell by cell.
    #[test]
    fn g_matches_definition() {
        let f = random(3, 2, res(1, 0), 2, Backend::Exact);
        let g = symplectic_g(&f).unwrap();
        let vol = f.cell_volume();
        for i in 0..g.ncells() {
            let x = g.point(i);
            let mut acc = Scalar::zero();
            for j in 0..f.ncells() {
                let y = f.point(j);
                acc = &acc + &f.coeffs[j].mul_root(psi(3, &(sympl_pair(&y, &x) * qi(2))));
            }
            assert_eq!(g.coeffs[i], acc.scale_q(&vol));
        }
    }

    #[test]
    fn i_and_j_on_unit_ball() {
        let o = indicator(3, &[qi(0), qi(0)], 0).unwrap();
        assert!(apply_i(&o, 1).same(&o));
        assert!(apply_j(&o, 1, None).unwrap().same(&o));
        let cell = indicator(3, &[q(1, 9), qi(0)], 0).unwrap();
        assert!(apply_i(&cell, 1).same(&cell.scale_q(&qi(9))));
        let f = random(3, 2, res(1, 1), 4, Backend::Exact);
        assert!(apply_i(&apply_i(&f, 1), -1).same(&f));
    }

    #[test]
    fn i_commutes_with_j() {
        let f = random(3, 2, res(1, 1), 6, Backend::Exact);
        let a = apply_i(&apply_j(&f, 1, None).unwrap(), 1);
        let b = apply_j(&apply_i(&f, 1), 1, None).unwrap();
        assert!(a.same(&b));
    }

    #[test]
    fn gmu_pair_values() {
        let o = indicator(3, &[qi(0), qi(0)], 0).unwrap();
        for n in 0..4 {
            assert_eq!(gmu_pair(n, &o).unwrap(), Scalar::one());
        }
        let b = indicator(3, &[qi(0), qi(0)], 1).unwrap();
        assert_eq!(gmu_pair(1, &b).unwrap(), Scalar::rat(25, 9));
        assert_eq!(gmu_ball(3, 1, 1, 1), q(25, 9));
        let outside = indicator(3, &[q(1, 3), qi(0)], 0).unwrap();
        assert!(gmu_pair(1, &outside).is_err());
        assert!(gmu_pair_any(2, &outside).unwrap().is_zero());
    }

    #[test]
    fn eigenrelation_on_phase_sum() {
        let p = 3;
        let w = vec![q(1, 3), q(2, 9)];
        let spec = PhaseSum::new(p, 1, (), vec![(w.clone(), Scalar::one())]).unwrap();
        for x in [vec![qi(0), qi(0)], vec![q(1, 3), q(5, 9)]] {
            let got = pointwise_j_spec(&spec, 2, &x).unwrap();
            let want = spec.eval(&x).scale_q(&qi(81));
            assert_eq!(got, want);
        }
    }

    #[test]
    fn j_eigen_on_window() {
        // Ψ_Y windowed on a ball invariant under the J-kernel (supported in Z_p^2)
        let y = vec![q(1, 3), qi(0)];
        let w = character_window(3, &y, -1).unwrap();
        let j = apply_j(&w, 1, None).unwrap();
        assert!(j.same(&w.scale_q(&qi(3))));
    }

    #[test]
    fn integral_representation_matches_j() {
        let f = random(3, 2, res(0, 1), 8, Backend::Exact);
        let jf = apply_j(&f, 1, None).unwrap();
        for x in [vec![qi(0), qi(0)], vec![q(1, 3), qi(2)]] {
            let rhs = integral_representation(&f, 1, 4, &x).unwrap();
            assert_eq!(rhs, jf.eval(&x));
        }
    }
}
