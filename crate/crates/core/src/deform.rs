//! Rieffel-type deformation of finite-dimensional *-algebras carrying a
//! spectral action α_X(a_j) = Ψ(2[X,P_j])a_j of k^{2d}.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bruhat::{cell_point, locate, side, support_exp, SBFunction};
use crate::error::{Error, Result};
use crate::fourier::{pointwise_j_spec, PhaseSum};
use crate::padic::{
    mu0, mu0_exp, mu0_weight_l1, pow_signed_q, psi, sympl_pair, vadd, vneg, vscale, GridPoint,
    Resolution, Root, Theta, Q,
};
use crate::scalars::{
    op_norm_c64, parse_q, scalar_from_json, scalar_to_json, Coeff, Mat, Scalar, ScalarAcc,
};

/// An element Σ x_j a_j, by coefficients.
pub type Element = Vec<Scalar>;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAlgebra {
    pub p: u64,
    pub d: usize,
    pub labels: Vec<String>,
    /// P_j ∈ k^{2d}.
    pub weights: Vec<Vec<Q>>,
    /// Sparse structure constants (j, k, l, c): a_j a_k = Σ c a_l.
    pub constants: Vec<(usize, usize, usize, Scalar)>,
    /// a_j* = phase·a_{σ(j)}.
    pub involution: Vec<(usize, Root)>,
    /// Faithful representation ρ(a_j).
    pub representation: Vec<Mat>,
}

/// A_θ on the carrier of A: the constants are twisted, the rest is shared.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformedAlgebra {
    pub base: SpectralAlgebra,
    pub theta: Theta,
    pub constants: Vec<(usize, usize, usize, Scalar)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Validation {
    pub violations: Vec<String>,
}

impl Validation {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl SpectralAlgebra {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn rep_dim(&self) -> usize {
        self.representation.first().map_or(0, |m| m.n)
    }

    pub fn basis_element(&self, j: usize) -> Element {
        let mut e = vec![Scalar::zero(); self.dim()];
        e[j] = Scalar::one();
        e
    }

    pub fn rho(&self, a: &[Scalar]) -> Mat {
        let n = self.rep_dim();
        let mut m = Mat::zeros(n);
        for (x, r) in a.iter().zip(&self.representation) {
            if !x.is_zero() {
                m = m.add(&r.scale(x));
            }
        }
        m
    }

    /// ‖a‖_A, the C*-norm through the faithful representation.
    pub fn norm(&self, a: &[Scalar]) -> f64 {
        op_norm_c64(&self.rho(a).to_c64())
    }

    pub fn mul(&self, a: &[Scalar], b: &[Scalar]) -> Element {
        product(self.dim(), &self.constants, a, b)
    }

    pub fn star(&self, a: &[Scalar]) -> Element {
        let mut out = vec![Scalar::zero(); self.dim()];
        for (j, x) in a.iter().enumerate() {
            if !x.is_zero() {
                let (s, ph) = self.involution[j];
                out[s] = &out[s] + &x.conj().mul_root(ph);
            }
        }
        out
    }

    /// α_X(a).
    pub fn alpha(&self, x: &[Q], a: &[Scalar]) -> Element {
        a.iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                if c.is_zero() {
                    c.clone()
                } else {
                    c.mul_root(psi(self.p, &(Q::from_integer(2) * sympl_pair(x, w))))
                }
            })
            .collect()
    }

    /// τ(a_j) = Tr ρ(a_j) on the weight-zero part, zero elsewhere.
    pub fn trace_functional(&self) -> Vec<Scalar> {
        self.weights
            .iter()
            .zip(&self.representation)
            .map(|(w, r)| {
                if w.iter().all(|x| x.is_zero()) {
                    r.trace()
                } else {
                    Scalar::zero()
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Validation {
        let mut v = Vec::new();
        let m = self.dim();
        if self.weights.len() != m || self.involution.len() != m || self.representation.len() != m {
            v.push("labels, weights, involution and representation differ in length".into());
            return Validation { violations: v };
        }
        for w in &self.weights {
            if w.len() != 2 * self.d {
                v.push(format!("weight {w:?} is not a point of k^{}", 2 * self.d));
            }
        }
        for (j, k, l, c) in &self.constants {
            if *j >= m || *k >= m || *l >= m {
                v.push(format!("structure constant ({j},{k},{l}) out of range"));
                continue;
            }
            if !c.is_zero() && self.weights[*l] != vadd(&self.weights[*j], &self.weights[*k]) {
                v.push(format!(
                    "weight additivity fails: c[{},{}->{}] ≠ 0 but P_{} ≠ P_{} + P_{}",
                    self.labels[*j],
                    self.labels[*k],
                    self.labels[*l],
                    self.labels[*l],
                    self.labels[*j],
                    self.labels[*k]
                ));
            }
        }
        for (j, (s, _)) in self.involution.iter().enumerate() {
            if *s >= m {
                v.push(format!("involution of {} out of range", self.labels[j]));
            } else if self.weights[*s] != vneg(&self.weights[j]) {
                v.push(format!(
                    "involution does not flip the weight of {}",
                    self.labels[j]
                ));
            }
        }
        if !v.is_empty() {
            return Validation { violations: v };
        }
        for j in 0..m {
            for k in 0..m {
                let lhs = self.representation[j].mul(&self.representation[k]);
                let rhs = self.rho(&self.mul(&self.basis_element(j), &self.basis_element(k)));
                if lhs != rhs {
                    v.push(format!(
                        "ρ is not multiplicative on ({}, {})",
                        self.labels[j], self.labels[k]
                    ));
                }
            }
            if self.rho(&self.star(&self.basis_element(j))) != self.representation[j].star() {
                v.push(format!(
                    "ρ does not intertwine the involution at {}",
                    self.labels[j]
                ));
            }
        }
        let n = self.rep_dim();
        let stacked = DMatrix::from_fn(m, n * n, |j, e| self.representation[j].e[e].to_c64());
        let sv = stacked.svd(false, false).singular_values;
        if sv.iter().any(|s| *s < 1e-9) {
            v.push("representation is not faithful (ρ(a_j) linearly dependent)".into());
        }
        // α_X is a *-automorphism; sample the grid p^{-1}Z_p^{2d}/p Z_p^{2d}
        let res = Resolution { r: 1, s: 1 };
        let cells = side(self.p, res).pow(2 * self.d as u32);
        for i in (0..cells).step_by((cells / 16).max(1)) {
            let x = cell_point(self.p, 2 * self.d, res, i);
            for j in 0..m {
                let aj = self.basis_element(j);
                if self.alpha(&x, &self.star(&aj)) != self.star(&self.alpha(&x, &aj)) {
                    v.push(format!("α_X does not commute with * at {}", self.labels[j]));
                }
                for k in 0..m {
                    let ak = self.basis_element(k);
                    if self.alpha(&x, &self.mul(&aj, &ak))
                        != self.mul(&self.alpha(&x, &aj), &self.alpha(&x, &ak))
                    {
                        v.push(format!(
                            "α_X is not multiplicative on ({}, {})",
                            self.labels[j], self.labels[k]
                        ));
                    }
                }
            }
        }
        v.sort();
        v.dedup();
        Validation { violations: v }
    }

    pub fn undeformed(&self) -> DeformedAlgebra {
        DeformedAlgebra {
            base: self.clone(),
            theta: Theta::Zero,
            constants: self.constants.clone(),
        }
    }

    /// ‖a‖_n = sup_X ‖Σ μ0^n(P_j)Ψ(2[X,P_j])x_j a_j‖. The sup is over the
    /// orbit of b = Σ μ0^n(P_j)x_j a_j under α, which acts isometrically,
    /// so it equals ‖b‖.
    pub fn seminorm(&self, a: &[Scalar], n: u32) -> f64 {
        self.norm(&self.weighted(a, n))
    }

    /// Σ μ0^n(P_j)x_j a_j.
    pub fn weighted(&self, a: &[Scalar], n: u32) -> Element {
        a.iter()
            .zip(&self.weights)
            .map(|(x, w)| x.scale_q(&mu0(self.p, w).powi(n as i32).to_q(self.p)))
            .collect()
    }

    /// max over α-orbit samples on the grid (r,s), for cross-checking [`Self::seminorm`].
    pub fn seminorm_sampled(&self, a: &[Scalar], n: u32, res: Resolution) -> f64 {
        let b = self.weighted(a, n);
        let cells = side(self.p, res).pow(2 * self.d as u32);
        (0..cells)
            .into_par_iter()
            .map(|i| self.norm(&self.alpha(&cell_point(self.p, 2 * self.d, res, i), &b)))
            .reduce(|| 0.0, f64::max)
    }

    /// α_φ(a) = Σ (∫φΨ_{P_j})·x_j a_j, with exact cell integrals of characters.
    pub fn smoothing(&self, a: &[Scalar], phi: &SBFunction<Scalar>) -> Result<Element> {
        if phi.n != 2 * self.d {
            return Err(Error::Mismatch(
                "smoothing function lives on the wrong space".into(),
            ));
        }
        Ok(a.iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                if x.is_zero() {
                    x.clone()
                } else {
                    x * &character_integral(phi, w)
                }
            })
            .collect())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "d": self.d,
            "basis": self.labels,
            "weights": self.weights.iter().map(|w| w.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "structure_constants": self.constants.iter().map(|(j, k, l, c)| json!([j, k, l, scalar_to_json(c)])).collect::<Vec<_>>(),
            "involution": self.involution.iter().map(|(s, r)| json!([s, r.to_string()])).collect::<Vec<_>>(),
            "representation": self.representation.iter().map(|m| (0..m.n).map(|i| (0..m.n).map(|j| scalar_to_json(m.get(i, j))).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<SpectralAlgebra> {
        let bad = |w: &str| Error::Parse(format!("spectral algebra: {w}"));
        let p = v["p"].as_u64().ok_or_else(|| bad("p"))?;
        crate::padic::check_prime(p)?;
        let d = v["d"].as_u64().ok_or_else(|| bad("d"))? as usize;
        let labels: Vec<String> = v["basis"]
            .as_array()
            .ok_or_else(|| bad("basis"))?
            .iter()
            .map(|x| {
                x.as_str()
                    .map(String::from)
                    .ok_or_else(|| bad("basis label"))
            })
            .collect::<Result<_>>()?;
        let weights = v["weights"]
            .as_array()
            .ok_or_else(|| bad("weights"))?
            .iter()
            .map(|w| {
                let strs: Vec<String> =
                    serde_json::from_value(w.clone()).map_err(|_| bad("weight"))?;
                // exact rationals, or grid-point syntax read as its representative
                if strs.iter().any(|x| x.contains('@')) {
                    Ok(GridPoint::parse(&strs)?.coords())
                } else {
                    strs.iter().map(|x| parse_q(x)).collect()
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let constants = v["structure_constants"]
            .as_array()
            .ok_or_else(|| bad("structure_constants"))?
            .iter()
            .map(|t| {
                let idx = |i: usize| {
                    t[i].as_u64()
                        .map(|x| x as usize)
                        .ok_or_else(|| bad("constant index"))
                };
                Ok((idx(0)?, idx(1)?, idx(2)?, scalar_from_json(p, &t[3])?))
            })
            .collect::<Result<Vec<_>>>()?;
        let involution = v["involution"]
            .as_array()
            .ok_or_else(|| bad("involution"))?
            .iter()
            .map(|t| {
                let s = t[0].as_u64().ok_or_else(|| bad("involution index"))? as usize;
                Ok((
                    s,
                    Root::parse(t[1].as_str().ok_or_else(|| bad("involution phase"))?)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let representation = v["representation"]
            .as_array()
            .ok_or_else(|| bad("representation"))?
            .iter()
            .map(|m| {
                let rows = m.as_array().ok_or_else(|| bad("matrix"))?;
                let n = rows.len();
                let mut out = Mat::zeros(n);
                for (i, row) in rows.iter().enumerate() {
                    let row = row
                        .as_array()
                        .filter(|r| r.len() == n)
                        .ok_or_else(|| bad("matrix row"))?;
                    for (j, x) in row.iter().enumerate() {
                        out.set(i, j, scalar_from_json(p, x)?);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralAlgebra {
            p,
            d,
            labels,
            weights,
            constants,
            involution,
            representation,
        })
    }
}

fn product(
    m: usize,
    constants: &[(usize, usize, usize, Scalar)],
    a: &[Scalar],
    b: &[Scalar],
) -> Element {
    let mut accs = vec![ScalarAcc::default(); m];
    for (j, k, l, c) in constants {
        let (x, y) = (&a[*j], &b[*k]);
        if !x.is_zero() && !y.is_zero() {
            accs[*l].add(&(&(x * y) * c));
        }
    }
    accs.into_iter().map(|a| a.finish()).collect()
}

/// ∫φ(X)Ψ(2[X,P])dX, summed cell by cell: a cell c + p^sZ_p^{2d} contributes
/// Ψ(2[c,P])p^{-2ds} when |P| ≤ p^s and nothing otherwise.
pub fn character_integral(phi: &SBFunction<Scalar>, w: &[Q]) -> Scalar {
    let p = phi.p;
    if support_exp(p, w, i32::MIN / 4) > phi.res.s {
        return Scalar::zero();
    }
    let mut acc = ScalarAcc::default();
    for (i, c) in phi.coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc.add_rooted(
                c,
                psi(p, &(Q::from_integer(2) * sympl_pair(&phi.point(i), w))),
            );
        }
    }
    acc.finish().scale_q(&phi.cell_volume())
}

/// φ_k = p^{2dk}1_{p^kZ_p^{2d}}, the approximate unit.
pub fn approximate_unit(p: u64, d: usize, k: i32) -> SBFunction<Scalar> {
    let res = Resolution { r: -k, s: k };
    SBFunction {
        p,
        n: 2 * d,
        res,
        space: (),
        coeffs: vec![Scalar::from_q(&pow_signed_q(p, 2 * d as i32 * k))],
    }
}

/// Ψ(2θ[P_j,P_k]), the twist of a_j a_k.
pub fn twist_phase(p: u64, theta: &Theta, pj: &[Q], pk: &[Q]) -> Root {
    psi(
        p,
        &(Q::from_integer(2) * theta.value(p) * sympl_pair(pj, pk)),
    )
}

/// A_θ: c'_{jk}^l = Ψ(2θ[P_j,P_k])c_{jk}^l.
pub fn deform_sc(a: &SpectralAlgebra, theta: &Theta) -> Result<DeformedAlgebra> {
    let v = a.validate();
    if !v.ok() {
        return Err(Error::InvalidAlgebra(v.violations.join("; ")));
    }
    Ok(a.undeformed().deform(theta))
}

impl DeformedAlgebra {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// (A_θ)_{θ'}: twists the current constants again.
    pub fn deform(&self, theta2: &Theta) -> DeformedAlgebra {
        let p = self.base.p;
        let w = &self.base.weights;
        let constants = self
            .constants
            .iter()
            .map(|(j, k, l, c)| {
                (
                    *j,
                    *k,
                    *l,
                    c.mul_root(twist_phase(p, theta2, &w[*j], &w[*k])),
                )
            })
            .collect();
        DeformedAlgebra {
            base: self.base.clone(),
            theta: self.theta.add(theta2, p),
            constants,
        }
    }

    pub fn mul(&self, a: &[Scalar], b: &[Scalar]) -> Element {
        product(self.dim(), &self.constants, a, b)
    }

    pub fn star(&self, a: &[Scalar]) -> Element {
        self.base.star(a)
    }

    pub fn alpha(&self, x: &[Q], a: &[Scalar]) -> Element {
        self.base.alpha(x, a)
    }

    /// Matrix of b ↦ a ⋆ b in the basis a_j.
    pub fn left_regular(&self, a: &[Scalar]) -> DMatrix<Complex64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for (j, k, l, c) in &self.constants {
            if !a[*j].is_zero() {
                out[(*l, *k)] += (&a[*j] * c).to_c64();
            }
        }
        out
    }

    /// G_{ik} = τ(a_i* ⋆ a_k), positive definite for a faithful trace.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let tau = self.base.trace_functional();
        let m = self.dim();
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            let si = self.star(&self.base.basis_element(i));
            for k in 0..m {
                let prod = self.mul(&si, &self.base.basis_element(k));
                let mut acc = ScalarAcc::default();
                for (x, t) in prod.iter().zip(&tau) {
                    if !x.is_zero() && !t.is_zero() {
                        acc.add(&(x * t));
                    }
                }
                g[(i, k)] = acc.finish().to_c64();
            }
        }
        g
    }

    /// The C*-norm of A_θ, realized by the GNS representation of τ = Tr∘ρ∘E.
    pub fn norm(&self, a: &[Scalar]) -> Result<f64> {
        Ok(self.norms(&[a.to_vec()])?[0])
    }

    pub fn norms(&self, elems: &[Element]) -> Result<Vec<f64>> {
        let g = self.gram();
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::InvalidAlgebra("trace Tr∘ρ∘E is not faithful".into()))?;
        let l = chol.l();
        let lh = l.adjoint();
        let lh_inv = lh
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidAlgebra("singular Gram matrix".into()))?;
        Ok(elems
            .iter()
            .map(|a| op_norm_c64(&(&lh * self.left_regular(a) * &lh_inv)))
            .collect())
    }

    pub fn to_json(&self) -> Result<Value> {
        let m = self.dim();
        let norms = self.norms(
            &(0..m)
                .map(|j| self.base.basis_element(j))
                .collect::<Vec<_>>(),
        )?;
        let mut v = self.base.to_json();
        v["theta"] = json!(self.theta.to_string());
        v["twisted_constants"] = Value::Array(
            self.constants
                .iter()
                .map(|(j, k, l, c)| json!([j, k, l, scalar_to_json(c)]))
                .collect(),
        );
        v["norms"] = Value::Array(
            self.base
                .labels
                .iter()
                .zip(norms)
                .map(|(lab, n)| json!({"element": lab, "norm": n}))
                .collect(),
        );
        Ok(v)
    }
}

/// Matrix units e_ij of M_n with α-weights w_i − w_j.
pub fn matrix_units(p: u64, d: usize, w: &[Vec<Q>]) -> SpectralAlgebra {
    block_matrix_units(p, d, &[w.to_vec()], &|_, _, _| 0)
}

/// ⊕_b M_{n_b} spanned by b_ij = ζ_p^{φ(b,i,j)}e_ij; block b carries weights
/// w_i − w_j.
pub fn block_matrix_units(
    p: u64,
    d: usize,
    blocks: &[Vec<Vec<Q>>],
    phase: &dyn Fn(usize, usize, usize) -> i128,
) -> SpectralAlgebra {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    let mut reps = Vec::new();
    let mut index = Vec::new();
    let mut offset = 0;
    for (bi, w) in blocks.iter().enumerate() {
        for i in 0..w.len() {
            for j in 0..w.len() {
                index.push((bi, i, j));
                labels.push(if blocks.len() == 1 {
                    format!("e{}{}", i + 1, j + 1)
                } else {
                    format!("e{}_{}{}", bi + 1, i + 1, j + 1)
                });
                weights.push(crate::padic::vsub(&w[i], &w[j]));
                let ph = Root::new(p, phase(bi, i, j), 1);
                let mut m = Mat::zeros(n);
                m.set(offset + i, offset + j, Scalar::from_root(ph));
                reps.push(m);
            }
        }
        offset += w.len();
    }
    let find =
        |b: usize, i: usize, j: usize| index.iter().position(|t| *t == (b, i, j)).expect("unit");
    let ph = |b: usize, i: usize, j: usize| Root::new(p, phase(b, i, j), 1);
    let mut constants = Vec::new();
    let mut involution = Vec::new();
    for (x, &(b, i, j)) in index.iter().enumerate() {
        // b_ij* = conj(ζ^φij)e_ji = ζ^{-φij-φji} b_ji
        involution.push((find(b, j, i), ph(b, i, j).conj().mul(ph(b, j, i).conj())));
        for (y, &(b2, j2, k)) in index.iter().enumerate() {
            if b2 == b && j2 == j {
                let c = ph(b, i, j).mul(ph(b, j, k)).mul(ph(b, i, k).conj());
                constants.push((x, y, find(b, i, k), Scalar::from_root(c)));
            }
        }
    }
    SpectralAlgebra {
        p,
        d,
        labels,
        weights,
        constants,
        involution,
        representation: reps,
    }
}

/// The M_3 example: w = ((1/3,0), (0,0), (0,1/3)) over Q_3, d = 1.
pub fn flagship() -> SpectralAlgebra {
    let q = |n, d| Q::new(n, d);
    matrix_units(
        3,
        1,
        &[
            vec![q(1, 3), q(0, 1)],
            vec![q(0, 1), q(0, 1)],
            vec![q(0, 1), q(1, 3)],
        ],
    )
}

/// A random block matrix-unit algebra with weights in p^{-1}Z_p^{2d} and
/// random root-of-unity rescalings of the basis.
pub fn random_spectral(p: u64, d: usize, seed: u64) -> SpectralAlgebra {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nblocks = rng.gen_range(1..=2);
    let blocks: Vec<Vec<Vec<Q>>> = (0..nblocks)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            (0..n)
                .map(|_| {
                    (0..2 * d)
                        .map(|_| {
                            Q::new(
                                rng.gen_range(-(p as i128 * p as i128)..(p as i128 * p as i128)),
                                p as i128,
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let phases: Vec<i128> = (0..64).map(|_| rng.gen_range(0..p as i128)).collect();
    block_matrix_units(p, d, &blocks, &|b, i, j| phases[(b * 9 + i * 3 + j) % 64])
}

/// A random element with small exact coefficients.
pub fn random_element(a: &SpectralAlgebra, seed: u64) -> Element {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..a.dim())
        .map(|_| crate::bruhat::random_scalar(a.p, &mut rng, crate::scalars::Backend::Exact))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    /// Oscillatory trick with weights μ0^{-N}.
    None,
    /// Weight e^{-μ0(Y)μ0(Z)/M}, no oscillatory trick.
    Exponential { m: u32 },
}

#[derive(Clone, Debug)]
pub struct OscResult {
    pub value: Vec<Complex64>,
    /// Rigorous bound on |value − a⋆b| for `Regularizer::None`; for the
    /// exponential regularizer, the distance of the regularized value
    /// from its M → ∞ limit.
    pub bound: f64,
    pub n: u32,
    pub t: u32,
}

fn big_pow(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

/// Σ_{a=A}^{T} λ_a with μ0^{-N}1[|X| ≤ p^T] = Σ_a λ_a 1[|X| ≤ p^a]; telescopes
/// to p^{-NA} − p^{-N(T+1)} (zero when A > T).
fn truncated_weight(p: u64, n: u32, a: u32, t: u32) -> BigRational {
    if a > t {
        return BigRational::zero();
    }
    big_pow(p, n * a).recip() - big_pow(p, n * (t + 1)).recip()
}

/// ∫_{|X|>p^T} μ0^{-N} = (1 − p^{-2d})p^{-(N−2d)(T+1)}/(1 − p^{-(N−2d)}).
pub fn weight_tail(p: u64, d: u32, n: u32, t: u32) -> f64 {
    let pf = p as f64;
    let k = (n - 2 * d) as f64;
    (1.0 - pf.powi(-2 * d as i32)) * pf.powf(-k * (t as f64 + 1.0)) / (1.0 - pf.powf(-k))
}

/// Smallest T whose tail bound falls below `rel` of the leading scale.
pub fn default_truncation(a: &SpectralAlgebra, theta: &Theta, n: u32, rel: f64) -> u32 {
    let scale = a
        .weights
        .iter()
        .map(|w| mu0_exp(a.p, w) + mu0_exp(a.p, &vscale(&theta.value(a.p), w)))
        .max()
        .unwrap_or(0);
    let c = (a.p as f64).powi((n * scale) as i32);
    let l1 = crate::bruhat::q_to_f64(&mu0_weight_l1(a.p, a.d as u32, n).unwrap_or(Q::one()));
    (0..200)
        .find(|&t| c * 2.0 * l1 * weight_tail(a.p, a.d as u32, n, t) < rel)
        .unwrap_or(200)
}

/// Evaluates a ⋆_θ b from the oscillatory integral
/// ∫∫Ψ̄(2[X,Y])μ0^{-N}(X)μ0^{-N}(Y)(J_θ^N ᾱ(a))(θX)(J^N ᾱ(b))(Y)dXdY
/// restricted to |X|,|Y| ≤ p^T. The J-factors come from the integral
/// representation of J on phase functions; the truncated integrals are
/// summed over the ball decomposition of the weights, where the Y-integral
/// is an indicator of |X + P_k| and the X-integral is a character over the
/// intersection of two balls.
pub fn osc_oracle(
    alg: &SpectralAlgebra,
    a: &[Scalar],
    b: &[Scalar],
    theta: &Theta,
    n: u32,
    t: u32,
    reg: Regularizer,
) -> Result<OscResult> {
    let (p, d) = (alg.p, alg.d);
    if n <= 2 * d as u32 && reg == Regularizer::None {
        return Err(Error::Divergent { n, d: d as u32 });
    }
    let th = theta.value(p);
    let l1 = crate::bruhat::q_to_f64(&mu0_weight_l1(p, d as u32, n.max(2 * d as u32 + 1))?);
    let m = alg.dim();
    // J-eigenfactors: (J^N Ψ_P)(0), using J_θ^N F(θX) = J^N(D_θF)(X), D_θΨ_P = Ψ_{θP}
    let jfactor = |w: &[Q]| -> Result<Q> {
        let spec = PhaseSum::new(p, d, (), vec![(w.to_vec(), Scalar::one())])?;
        let v = pointwise_j_spec(&spec, n as i32, &vec![Q::zero(); 2 * d])?;
        v.exact()
            .and_then(|c| c.as_rational())
            .ok_or_else(|| Error::Unsupported("non-rational J factor".into()))
    };
    let mut value = vec![Complex64::zero(); m];
    let mut bound = 0.0;
    for (j, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (k, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let pj = &alg.weights[j];
            let pk = &alg.weights[k];
            let tpj = vscale(&th, pj);
            // the ball B(−P_k, p^{-b}) inside B(0, p^a) needs |P_k| ≤ p^a; its
            // character integral needs |θP_j| ≤ p^b
            let ak = mu0_exp(p, pk);
            let bj = mu0_exp(p, &tpj);
            let phase = psi(p, &(Q::from_integer(2) * sympl_pair(&vneg(pk), &tpj)));
            let prod = alg.mul(&alg.basis_element(j), &alg.basis_element(k));
            let coef = (x * y).to_c64();
            let (mag, err) = match reg {
                Regularizer::None => {
                    let cj = jfactor(&tpj)?;
                    let ck = jfactor(pk)?;
                    let s = truncated_weight(p, n, ak, t) * truncated_weight(p, n, bj, t);
                    let c = crate::bruhat::q_to_f64(&(cj * ck));
                    let tail = 2.0 * l1 * weight_tail(p, d as u32, n, t);
                    (c * s.to_f64().unwrap_or(0.0), c.abs() * tail)
                }
                Regularizer::Exponential { m: big_m } => {
                    // weight e^{-p^{a}p^{b}/M} on the shells, telescoped over balls
                    let w = |a: u32, b: u32| -> f64 {
                        if a > t || b > t {
                            0.0
                        } else {
                            (-(p as f64).powi((a + b) as i32) / big_m as f64).exp()
                        }
                    };
                    let mut s = 0.0;
                    for aa in ak..=t {
                        for bb in bj..=t {
                            s += w(aa, bb) - w(aa + 1, bb) - w(aa, bb + 1) + w(aa + 1, bb + 1);
                        }
                    }
                    (s, (1.0 - s).abs())
                }
            };
            let pn = alg.norm(&prod);
            bound += coef.norm() * err * pn;
            let scale = coef * phase.to_c64() * mag;
            for (l, c) in prod.iter().enumerate() {
                if !c.is_zero() {
                    value[l] += scale * c.to_c64();
                }
            }
        }
    }
    Ok(OscResult { value, bound, n, t })
}

/// Ψ_P ⋆_θ g = Ψ_P·τ_{θP}g (left) and g ⋆_θ Ψ_P = Ψ_P·τ_{−θP}g (right),
/// summed over the terms of the phase sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn char_star<C: Coeff>(
    f: &PhaseSum<C>,
    g: &SBFunction<C>,
    theta: &Theta,
    side: Side,
) -> Result<SBFunction<C>> {
    let p = g.p;
    if f.p != p || 2 * f.d != g.n {
        return Err(Error::Mismatch(
            "phase sum and function on different spaces".into(),
        ));
    }
    let th = theta.value(p);
    let mut r = g.res.r;
    let mut s = g.res.s;
    for (w, _) in &f.terms {
        r = r.max(support_exp(p, &vscale(&th, w), r));
        s = s.max(support_exp(p, w, s));
    }
    let res = Resolution::new(r, s)?;
    let two = Q::from_integer(2);
    Ok(SBFunction::from_fn(p, g.n, res, g.space.clone(), |x| {
        let mut acc = C::acc_new(&g.space);
        for (w, c) in &f.terms {
            let shift = match side {
                Side::Left => vscale(&th, w),
                Side::Right => vscale(&-th, w),
            };
            let gv = g.eval(&vadd(x, &shift));
            if gv.is_zero() {
                continue;
            }
            let v = match side {
                Side::Left => c.mul(&gv),
                Side::Right => gv.mul(c),
            };
            C::acc_add(&mut acc, &v, psi(p, &(two * sympl_pair(x, w))));
        }
        C::acc_finish(acc, &g.space)
    }))
}

/// f ⋆_θ^τ g for the translation action, from
/// (f ⋆ g)(X) = ∫∫Ψ̄(2[Y,Z])f(X + θY)g(X + Z)dYdZ.
/// With Y-cells of size p^{-s_Y} and Z-cells of size p^{-s_Z}, s_Y + s_Z ≥ 0,
/// each cell pair integrates to Ψ̄(2[Y0,Z0])p^{-2d(s_Y+s_Z)} restricted to
/// |Y0| ≤ p^{s_Z}, |Z0| ≤ p^{s_Y}.
pub fn translation_model<C: Coeff>(
    f: &SBFunction<C>,
    g: &SBFunction<C>,
    theta: &Theta,
) -> Result<SBFunction<C>> {
    if f.n != g.n || f.p != g.p || !f.n.is_multiple_of(2) {
        return Err(Error::Mismatch(
            "translation model needs two functions on the same k^{2d}".into(),
        ));
    }
    let p = f.p;
    let nn = f.n;
    let t = match theta {
        Theta::Zero => return f.mul(g),
        Theta::Unit { t, .. } => *t as i32,
    };
    let th = theta.value(p);
    let s_y = 0.max(f.res.s - t);
    let s_z = g.res.s.max(-s_y);
    let yres = Resolution::new(s_z, s_y)?;
    let zres = Resolution::new(s_y, s_z)?;
    let ys: Vec<Vec<Q>> = (0..side(p, yres).pow(nn as u32))
        .map(|i| cell_point(p, nn, yres, i))
        .collect();
    let zs: Vec<Vec<Q>> = (0..side(p, zres).pow(nn as u32))
        .map(|i| cell_point(p, nn, zres, i))
        .collect();
    let two = Q::from_integer(2);
    let phases: Vec<Vec<Root>> = ys
        .par_iter()
        .map(|y| {
            zs.iter()
                .map(|z| psi(p, &(-two * sympl_pair(y, z))))
                .collect()
        })
        .collect();
    let thetay: Vec<Vec<Q>> = ys.iter().map(|y| vscale(&th, y)).collect();
    let out_res = Resolution {
        r: f.res.r.max(g.res.r).max(s_z - t).max(s_y),
        s: f.res.s.max(g.res.s),
    };
    let factor = pow_signed_q(p, -(nn as i32) * (s_y + s_z));
    let one = Root::one(p);
    let out = SBFunction::from_fn(p, nn, out_res, f.space.clone(), |x| {
        let fv: Vec<C> = thetay.iter().map(|y| f.eval(&vadd(x, y))).collect();
        let gv: Vec<C> = zs.iter().map(|z| g.eval(&vadd(x, z))).collect();
        let mut acc = C::acc_new(&f.space);
        for (yi, fy) in fv.iter().enumerate() {
            if fy.is_zero() {
                continue;
            }
            let mut h = C::acc_new(&f.space);
            for (zi, gz) in gv.iter().enumerate() {
                if !gz.is_zero() {
                    C::acc_add(&mut h, gz, phases[yi][zi]);
                }
            }
            let h = C::acc_finish(h, &f.space);
            if !h.is_zero() {
                C::acc_add(&mut acc, &fy.mul(&h), one);
            }
        }
        C::acc_finish(acc, &f.space).scale_q(&factor)
    });
    Ok(out.trim())
}

/// ‖L_θ(ᾱ(a))‖ compressed to the box |X| ≤ p^R of L²(k^{2d}) ⊗ C^n, where
/// L_θ(ᾱ(a))f = ᾱ(a) ⋆_θ f = Σ_j x_j Ψ_{P_j}ρ(a_j)τ_{θP_j}f.
/// Largest singular value by power iteration on L*L.
pub fn module_norm(alg: &SpectralAlgebra, a: &[Scalar], theta: &Theta, radius: i32) -> Result<f64> {
    let (p, d) = (alg.p, alg.d);
    let nn = 2 * d;
    let th = theta.value(p);
    let s = alg
        .weights
        .iter()
        .map(|w| support_exp(p, w, 0))
        .max()
        .unwrap_or(0);
    let res = Resolution::new(radius, s)?;
    let cells = side(p, res).pow(nn as u32);
    let k = alg.rep_dim();
    let terms: Vec<(usize, Vec<Complex64>, Vec<Q>, &Vec<Q>)> = a
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(j, x)| {
            let r = alg.representation[j].scale(x);
            (
                j,
                r.e.iter().map(|e| e.to_c64()).collect(),
                vscale(&th, &alg.weights[j]),
                &alg.weights[j],
            )
        })
        .collect();
    // sparse rows: (row, col, value)
    let two = Q::from_integer(2);
    let entries: Vec<(usize, usize, Complex64)> = (0..cells)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = cell_point(p, nn, res, i);
            let mut out = Vec::new();
            for (_, m, shift, w) in &terms {
                let Some(src) = locate(p, nn, res, &vadd(&x, shift)) else {
                    continue;
                };
                let ph = psi(p, &(two * sympl_pair(&x, w))).to_c64();
                for r in 0..k {
                    for c in 0..k {
                        let v = m[r * k + c];
                        if v != Complex64::zero() {
                            out.push((i * k + r, src * k + c, ph * v));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let dim = cells * k;
    let apply = |v: &[Complex64], adj: bool| -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); dim];
        for (r, c, x) in &entries {
            if adj {
                out[*c] += x.conj() * v[*r];
            } else {
                out[*r] += x * v[*c];
            }
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)))
        .collect();
    let nrm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let n0 = nrm(&v);
        if n0 == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|z| *z /= n0);
        let w = apply(&apply(&v, false), true);
        let next = nrm(&w);
        let done = (next - lambda).abs() <= 1e-13 * next.max(1.0);
        lambda = next;
        v = w;
        if done {
            break;
        }
    }
    Ok(lambda.sqrt())
}

/// Norms of every basis element and of the extra elements across θ values.
pub fn theta_scan(
    alg: &SpectralAlgebra,
    thetas: &[Theta],
    extra: &[Element],
) -> Result<Vec<(Theta, Vec<f64>)>> {
    let base = alg.undeformed();
    let mut elems: Vec<Element> = (0..alg.dim()).map(|j| alg.basis_element(j)).collect();
    elems.extend_from_slice(extra);
    thetas
        .iter()
        .map(|t| Ok((*t, base.deform(t).norms(&elems)?)))
        .collect()
}

/// Stage law and norms: (A_θ)_{θ'} against A_{θ+θ'}, with finite-dimensional
/// and truncated-module norms of each element.
#[derive(Clone, Debug)]
pub struct StageReport {
    pub stage_law: bool,
    pub rows: Vec<StageRow>,
}

#[derive(Clone, Debug)]
pub struct StageRow {
    pub element: String,
    pub norm: f64,
    pub module_norm: f64,
    pub gap: f64,
}

pub fn stage_and_norm(
    alg: &SpectralAlgebra,
    theta: &Theta,
    theta2: &Theta,
    extra: &[(String, Element)],
    radius: i32,
) -> Result<StageReport> {
    let a1 = deform_sc(alg, theta)?;
    let staged = a1.deform(theta2);
    let direct = deform_sc(alg, &theta.add(theta2, alg.p))?;
    let stage_law = staged.constants == direct.constants && staged.theta == direct.theta;
    let mut elems: Vec<(String, Element)> = (0..alg.dim())
        .map(|j| (alg.labels[j].clone(), alg.basis_element(j)))
        .collect();
    elems.extend_from_slice(extra);
    let target = &direct.theta;
    let norms = direct.norms(&elems.iter().map(|e| e.1.clone()).collect::<Vec<_>>())?;
    let rows = elems
        .iter()
        .zip(norms)
        .map(|((name, e), n)| {
            let m = module_norm(alg, e, target, radius)?;
            Ok(StageRow {
                element: name.clone(),
                norm: n,
                module_norm: m,
                gap: (m - n).abs() / n.max(1e-300),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StageReport { stage_law, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{indicator, random};
    use crate::fourier::apply_j;
    use crate::padic::{q, qi};
    use crate::scalars::Backend;
    use crate::weyl::moyal_star;

    fn th(n: i128) -> Theta {
        Theta::from_int(3, n)
    }

    #[test]
    fn flagship_validates_and_twists() {
        let a = flagship();
        assert!(a.validate().ok(), "{:?}", a.validate());
        let d0 = deform_sc(&a, &Theta::Zero).unwrap();
        assert_eq!(d0.constants, a.constants);
        let d1 = deform_sc(&a, &th(1)).unwrap();
        let (e12, e23, e13) = (a.basis_element(1), a.basis_element(5), a.basis_element(2));
        // Ψ(2θ[P_12, P_23]) with [P_12, P_23] = 1/9
        let z = Scalar::from_root(Root::new(3, 2, 2));
        assert_eq!(
            d1.mul(&e12, &e23),
            e13.iter().map(|x| x * &z).collect::<Vec<_>>()
        );
    }

    #[test]
    fn tampered_constants_are_reported() {
        let mut a = flagship();
        a.constants.push((1, 1, 0, Scalar::one()));
        let v = a.validate();
        assert!(
            v.violations.iter().any(|s| s.contains("weight additivity")),
            "{v:?}"
        );
        let mut b = flagship();
        b.involution[1].0 = 1;
        assert!(b.validate().violations.iter().any(|s| s.contains("flip")));
    }

    #[test]
    fn integral_weights_do_not_deform() {
        let w = vec![vec![qi(1), qi(2)], vec![qi(0), qi(-4)], vec![qi(5), qi(0)]];
        let a = matrix_units(3, 1, &w);
        for n in [1, 3, -7] {
            assert_eq!(deform_sc(&a, &th(n)).unwrap().constants, a.constants);
        }
        let triv = matrix_units(3, 1, &vec![vec![qi(0), qi(0)]; 2]);
        assert!(triv.validate().ok());
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let a = flagship();
        let t = th(1);
        let d = deform_sc(&a, &t).unwrap();
        let n = 3;
        let big_t = default_truncation(&a, &t, n, 1e-6);
        for j in 0..a.dim() {
            for k in 0..a.dim() {
                let (x, y) = (a.basis_element(j), a.basis_element(k));
                let exact = d.mul(&x, &y);
                for nn in [n, n + 1] {
                    let o = osc_oracle(&a, &x, &y, &t, nn, big_t, Regularizer::None).unwrap();
                    assert!(o.bound < 1e-6);
                    for (u, v) in o.value.iter().zip(&exact) {
                        assert!((u - v.to_c64()).norm() <= o.bound + 1e-12);
                    }
                }
            }
        }
        assert!(osc_oracle(
            &a,
            &a.basis_element(0),
            &a.basis_element(0),
            &t,
            2,
            5,
            Regularizer::None
        )
        .is_err());
    }

    #[test]
    fn exponential_regularizer_converges() {
        let a = flagship();
        let t = th(1);
        let (x, y) = (a.basis_element(1), a.basis_element(5));
        let exact = deform_sc(&a, &t).unwrap().mul(&x, &y);
        let mut last = f64::INFINITY;
        for m in [10, 100, 1000, 100000] {
            let o = osc_oracle(&a, &x, &y, &t, 0, 40, Regularizer::Exponential { m }).unwrap();
            let err: f64 = o
                .value
                .iter()
                .zip(&exact)
                .map(|(u, v)| (u - v.to_c64()).norm())
                .sum();
            assert!(err <= o.bound + 1e-12 && err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn star_algebra_laws_on_random_algebras() {
        for seed in 0..6 {
            let a = random_spectral(3, 1, seed);
            assert!(a.validate().ok(), "{:?}", a.validate());
            let d = deform_sc(&a, &th(1)).unwrap();
            let (x, y, z) = (
                random_element(&a, seed),
                random_element(&a, seed + 100),
                random_element(&a, seed + 200),
            );
            assert_eq!(d.mul(&d.mul(&x, &y), &z), d.mul(&x, &d.mul(&y, &z)));
            assert_eq!(d.star(&d.mul(&x, &y)), d.mul(&d.star(&y), &d.star(&x)));
            let xp = [q(1, 3), q(2, 9)];
            assert_eq!(
                d.alpha(&xp, &d.mul(&x, &y)),
                d.mul(&d.alpha(&xp, &x), &d.alpha(&xp, &y))
            );
        }
    }

    #[test]
    fn stage_law() {
        let a = flagship();
        let d = deform_sc(&a, &th(1)).unwrap();
        assert_eq!(
            d.deform(&th(2)).constants,
            deform_sc(&a, &th(3)).unwrap().constants
        );
        let back = d.deform(&th(-1));
        assert_eq!(back.constants, a.constants);
        assert!(back.theta.is_zero());
    }

    #[test]
    fn seminorms() {
        let a = matrix_units(3, 1, &[vec![q(1, 3), qi(0)], vec![qi(0), qi(0)]]);
        let e = a.basis_element(1);
        assert!((a.seminorm(&e, 2) - 9.0).abs() < 1e-9);
        let x = random_element(&a, 4);
        let s = a.seminorm(&x, 0);
        assert!((s - a.norm(&x)).abs() < 1e-9);
        assert!((a.seminorm_sampled(&x, 0, Resolution { r: 1, s: 1 }) - s).abs() < 1e-9);
        let z = matrix_units(3, 1, &[vec![qi(1), qi(0)], vec![qi(0), qi(2)]]);
        let y = random_element(&z, 5);
        for n in 0..4 {
            assert!((z.seminorm(&y, n) - z.norm(&y)).abs() < 1e-9);
        }
    }

    #[test]
    fn smoothing_and_approximate_unit() {
        let a = flagship();
        let ball = indicator(3, &[qi(0), qi(0)], 0).unwrap();
        let x = random_element(&a, 1);
        let sm = a.smoothing(&x, &ball).unwrap();
        for (j, w) in a.weights.iter().enumerate() {
            let inside = support_exp(3, w, 0) == 0;
            assert_eq!(sm[j], if inside { x[j].clone() } else { Scalar::zero() });
        }
        assert_eq!(a.smoothing(&x, &approximate_unit(3, 1, 1)).unwrap(), x);
        assert_ne!(a.smoothing(&x, &approximate_unit(3, 1, 0)).unwrap(), x);
    }

    #[test]
    fn deformed_norms() {
        let a = flagship();
        let x = random_element(&a, 2);
        let n0 = a.undeformed().norm(&x).unwrap();
        assert!((n0 - a.norm(&x)).abs() < 1e-9);
        let l1 = crate::bruhat::q_to_f64(&mu0_weight_l1(3, 1, 3).unwrap());
        for n in [1, 2, 4] {
            let nt = deform_sc(&a, &th(n)).unwrap().norm(&x).unwrap();
            assert!(nt <= l1 * a.seminorm(&x, 3) + 1e-9);
        }
    }

    /// Radial kernel R(W) = ∫Ψ(2[Y,W])μ0^{-N}(Y)dY integrated over the ball
    /// B(c, p^{-s}), s ≥ 0.
    fn ball_integral_of_r(p: u64, d: u32, n: u32, c: &[Q], s: i32) -> Q {
        let lam =
            |a: i32| pow_signed_q(p, -(n as i32) * a) - pow_signed_q(p, -(n as i32) * (a + 1));
        let vol = |e: i32| pow_signed_q(p, -2 * d as i32 * e);
        let lc = crate::bruhat::log_abs(crate::padic::norm(p, c));
        let mut acc = Q::zero();
        if lc <= -s {
            for a in 0..=s {
                acc += lam(a) * pow_signed_q(p, 2 * d as i32 * a) * vol(s);
            }
            acc += pow_signed_q(p, -(n as i32) * (s + 1));
        } else {
            for a in 0..=(-lc) {
                acc += lam(a) * pow_signed_q(p, 2 * d as i32 * a) * vol(s);
            }
        }
        acc
    }

    #[test]
    fn char_star_matches_oscillatory_formula() {
        let p = 3;
        let n = 3;
        let wp = vec![q(1, 3), qi(0)];
        let spec = PhaseSum::new(p, 1, (), vec![(wp.clone(), Scalar::one())]).unwrap();
        for (t, g) in [
            (th(1), indicator(p, &[qi(0), qi(0)], 0).unwrap()),
            (
                th(3),
                random(p, 2, Resolution { r: 0, s: 1 }, 3, Backend::Exact),
            ),
        ] {
            let got = char_star(&spec, &g, &t, Side::Left).unwrap();
            let tp = vscale(&t.value(p), &wp);
            let e1 = pointwise_j_spec(
                &PhaseSum::new(p, 1, (), vec![(tp.clone(), Scalar::one())]).unwrap(),
                n as i32,
                &[qi(0), qi(0)],
            )
            .unwrap();
            let h = apply_j(&g, n as i32, None).unwrap();
            let h = h
                .refine(Resolution {
                    r: h.res.r,
                    s: h.res.s.max(0),
                })
                .unwrap();
            for i in 0..got.ncells() {
                let x = got.point(i);
                let mut acc = ScalarAcc::default();
                for (ci, hv) in h.coeffs.iter().enumerate() {
                    if hv.is_zero() {
                        continue;
                    }
                    let z0 = crate::padic::vsub(&h.point(ci), &x);
                    let w = mu0(p, &z0).powi(-(n as i32)).to_q(p)
                        * ball_integral_of_r(p, 1, n, &crate::padic::vsub(&tp, &z0), h.res.s);
                    acc.add(&hv.scale_q(&w));
                }
                let ph = psi(p, &(Q::from_integer(2) * sympl_pair(&x, &wp)));
                let want = (&acc.finish() * &e1).mul_root(ph);
                assert_eq!(got.coeffs[i], want, "cell {i}");
            }
        }
        // P = 0 is the unit, θ = 0 the pointwise product
        let g = random(p, 2, Resolution { r: 0, s: 1 }, 7, Backend::Exact);
        let unit = PhaseSum::new(p, 1, (), vec![(vec![qi(0), qi(0)], Scalar::one())]).unwrap();
        assert!(char_star(&unit, &g, &th(1), Side::Left).unwrap().same(&g));
        let pw = char_star(&spec, &g, &Theta::Zero, Side::Right).unwrap();
        assert!(pw.same(&g.twist(|x| psi(p, &(Q::from_integer(2) * sympl_pair(x, &wp))))));
    }

    #[test]
    fn translation_model_is_moyal() {
        for seed in 0..4 {
            let f = random(3, 2, Resolution { r: 0, s: 1 }, seed, Backend::Exact);
            let g = random(3, 2, Resolution { r: 1, s: 0 }, seed + 50, Backend::Exact);
            for t in [Theta::Zero, th(1), th(3)] {
                assert!(translation_model(&f, &g, &t)
                    .unwrap()
                    .same(&moyal_star(&f, &g, &t).unwrap()));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let a = random_spectral(3, 1, 9);
        let back = SpectralAlgebra::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        let dj = deform_sc(&a, &th(1)).unwrap().to_json().unwrap();
        assert_eq!(dj["theta"], json!(th(1).to_string()));
    }

    #[test]
    fn module_norm_tracks_deformed_norm() {
        let a = flagship();
        let t = th(1);
        let d = deform_sc(&a, &t).unwrap();
        let x = random_element(&a, 3);
        let nd = d.norm(&x).unwrap();
        let nm = module_norm(&a, &x, &t, 2).unwrap();
        assert!(nm <= nd * (1.0 + 1e-9));
        assert!((module_norm(&a, &a.basis_element(1), &t, 2).unwrap() - 1.0).abs() < 1e-9);
    }
}
