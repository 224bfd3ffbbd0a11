//! Property suites behind `ultraweyl verify` and the acceptance test. Each
//! numbered criterion yields one record per identity, aggregated over its
//! seeded samples; the first counterexample is kept.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bruhat::{indicator, random, random_mat, SBFunction};
use crate::config::Tolerances;
use crate::deform::{
    approximate_unit, default_truncation, deform_sc, flagship, module_norm, osc_oracle,
    random_element, random_spectral, translation_model, Regularizer, SpectralAlgebra,
};
use crate::error::{Error, Result};
use crate::fourier::{
    apply_i, apply_j, dilate_theta, pointwise_j_spec, symplectic_g, symplectic_g_fast, PhaseSum,
};
use crate::padic::{mu0, mu0_exp, pow_signed_q, q, sympl_pair, vadd, Resolution, Theta, Q};
use crate::report::{CheckRecord, Status, VerificationReport};
use crate::scalars::{scalar_to_json, Backend, Coeff, Scalar};
use crate::twisted::{
    big_pi, g_theta, pi_apply, pi_theta, represent, twisted_basis, twisted_conv, v_of_f, weyl_v,
    AlgFunction,
};
use crate::weyl::{
    basis_for_point, basis_for_symbol, coherent, covariance_pair, cv_check, moyal_star, quantize,
    reproducing_check, wigner, wigner_at, wigner_modulus_predicted, LinOperator,
};

pub const SUITES: &[&str] = &["fourier", "weyl", "moyal", "deform", "twisted"];

/// Checks whose literal statement is refuted by the computation; each has a
/// corrected companion check. See the `note` of the record for the analysis.
pub const KNOWN_DEVIATIONS: &[&str] = &["c11.g_theta_intertwining", "c11.pi_theta_identity"];

pub fn criteria_of(suite: &str) -> Option<&'static [u32]> {
    Some(match suite {
        "fourier" => &[1, 2, 3],
        "weyl" => &[4, 6, 7, 8],
        "moyal" => &[5, 10],
        "deform" => &[9, 12, 13],
        "twisted" => &[11],
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub p: u64,
    pub d: usize,
    pub theta: Theta,
    /// Largest resolution drawn for random inputs.
    pub res: Resolution,
    pub backend: Backend,
    pub seed: u64,
    pub tol: Tolerances,
    /// Overrides every per-criterion sample count.
    pub samples: Option<usize>,
    /// Desk budget: operators built for one sample have at most this
    /// dimension, phase-space sums at most its square in cells. Samples that
    /// cannot fit even at the smallest input resolution are not run.
    pub max_dim: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            p: 3,
            d: 1,
            theta: Theta::one(),
            res: Resolution { r: 1, s: 1 },
            backend: Backend::Exact,
            seed: 0,
            tol: Tolerances::default(),
            samples: None,
            max_dim: 81,
        }
    }
}

pub fn theta_str(t: &Theta) -> String {
    match t {
        Theta::Zero => "0".into(),
        Theta::Unit { t, u } => format!("{t},{u}"),
    }
}

impl SuiteParams {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "d": self.d,
            "theta": theta_str(&self.theta),
            "res": [self.res.r, self.res.s],
            "backend": match self.backend { Backend::Exact => "exact", Backend::Float => "float" },
            "samples": self.samples,
            "max_dim": self.max_dim,
            "tolerances": {"norm": self.tol.norm, "transform": self.tol.transform, "oracle_rel": self.tol.oracle_rel, "module_gap": self.tol.module_gap},
        })
    }

    fn exact(&self) -> bool {
        self.backend == Backend::Exact
    }

    fn count(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn seed_for(&self, criterion: u32, i: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(criterion as u64 * 100_000 + i as u64)
    }

    fn rng(&self, criterion: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed_for(criterion, 99_999))
    }

    /// Random-input resolutions: every (r, s) ≤ `res` with r + s ≥ 0, cycled.
    fn res_for(&self, i: usize) -> Resolution {
        let mut all = Vec::new();
        for r in 0..=self.res.r.max(0) {
            for s in 0..=self.res.s.max(0) {
                all.push(Resolution { r, s });
            }
        }
        all[i % all.len()]
    }

    /// The first resolution of the sample cycle, starting at sample `i`,
    /// whose cost fits in `budget`.
    fn fit_res(
        &self,
        i: usize,
        budget: usize,
        cost: impl Fn(Resolution) -> Result<usize>,
    ) -> Option<Resolution> {
        let k = self.cycle_len();
        (0..k)
            .map(|j| self.res_for(i + j))
            .find(|r| cost(*r).is_ok_and(|c| c <= budget))
    }

    fn cycle_len(&self) -> usize {
        (self.res.r.max(0) as usize + 1) * (self.res.s.max(0) as usize + 1)
    }

    /// The configured θ and p·θ, alternated across samples.
    fn theta_for(&self, i: usize) -> Theta {
        match (self.theta, i % 2) {
            (Theta::Unit { t, u }, 1) => Theta::Unit { t: t + 1, u },
            (t, _) => t,
        }
    }

    fn nonzero_theta(&self) -> Theta {
        if self.theta.is_zero() {
            Theta::one()
        } else {
            self.theta
        }
    }
}

struct Outcome {
    ok: bool,
    lhs: String,
    rhs: String,
    disc: Option<f64>,
}

fn fmt_scalar(s: &Scalar) -> String {
    match scalar_to_json(s) {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

fn fmt_fn<C: Coeff>(f: &SBFunction<C>) -> String {
    let t = f.trim();
    format!(
        "SB function at (r,s)=({},{}), |f|_2^2 = {}",
        t.res.r,
        t.res.s,
        fmt_scalar(&t.l2_sq())
    )
}

fn max_diff<C: Coeff>(a: &SBFunction<C>, b: &SBFunction<C>) -> Option<f64> {
    let (a, b) = a.common(b).ok()?;
    let k = C::block_dim(&a.space);
    let mut m = 0.0f64;
    for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
        for i in 0..k {
            for j in 0..k {
                m = m.max((x.block(i, j).to_c64() - y.block(i, j).to_c64()).norm());
            }
        }
    }
    Some(m)
}

fn cmp_fn<C: Coeff>(a: &SBFunction<C>, b: &SBFunction<C>, ps: &SuiteParams) -> Outcome {
    let ok = if ps.exact() {
        a.trim().same(&b.trim())
    } else {
        a.approx_same(b, ps.tol.transform)
    };
    Outcome {
        ok,
        lhs: fmt_fn(a),
        rhs: fmt_fn(b),
        disc: if ok { None } else { max_diff(a, b) },
    }
}

fn cmp_scalar(a: &Scalar, b: &Scalar, exact: bool, tol: f64) -> Outcome {
    let ok = if exact { a == b } else { a.approx_eq(b, tol) };
    Outcome {
        ok,
        lhs: fmt_scalar(a),
        rhs: fmt_scalar(b),
        disc: Some((a.to_c64() - b.to_c64()).norm()).filter(|_| !ok),
    }
}

fn cmp_op(a: &LinOperator, b: &LinOperator, ps: &SuiteParams) -> Outcome {
    let ok = if ps.exact() {
        a == b
    } else {
        a.basis == b.basis
            && a.k == b.k
            && a.m
                .iter()
                .zip(&b.m)
                .all(|(x, y)| x.approx_eq(y, ps.tol.transform))
    };
    let disc =
        a.m.iter()
            .zip(&b.m)
            .map(|(x, y)| (x.to_c64() - y.to_c64()).norm())
            .fold(0.0, f64::max);
    Outcome {
        ok,
        lhs: format!("{}x{} operator", a.size(), a.size()),
        rhs: format!("{}x{} operator", b.size(), b.size()),
        disc: Some(disc).filter(|_| !ok),
    }
}

fn truth(ok: bool, lhs: impl Into<String>, rhs: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        lhs: lhs.into(),
        rhs: rhs.into(),
        disc: None,
    }
}

struct Tally {
    rec: CheckRecord,
    n: usize,
    failed: bool,
    elapsed: f64,
    /// Samples not run because they exceed the desk budget.
    over: usize,
    max_dim: usize,
}

impl Tally {
    fn new(id: &str, anchor: &str, params: Value) -> Tally {
        Tally {
            rec: CheckRecord::new(id, anchor, params),
            n: 0,
            failed: false,
            elapsed: 0.0,
            over: 0,
            max_dim: 0,
        }
    }

    fn run(&mut self, f: impl FnOnce() -> Result<Outcome>) {
        let start = Instant::now();
        let r = f();
        self.elapsed += start.elapsed().as_secs_f64() * 1e3;
        let i = self.n;
        self.n += 1;
        if self.failed {
            return;
        }
        match r {
            Ok(o) if o.ok => {
                if self.rec.lhs.is_none() {
                    self.rec.lhs = Some(o.lhs);
                    self.rec.rhs = Some(o.rhs);
                }
            }
            Ok(o) => {
                self.failed = true;
                self.rec.status = Status::Fail;
                self.rec.lhs = Some(o.lhs);
                self.rec.rhs = Some(o.rhs);
                self.rec.discrepancy = o.disc;
                self.rec.note = Some(format!("first counterexample at sample {i}"));
            }
            Err(e) => {
                self.failed = true;
                self.rec.status = Status::Fail;
                self.rec.note = Some(format!("sample {i}: {e}"));
            }
        }
    }

    fn over_budget(&mut self, max_dim: usize) {
        self.over += 1;
        self.max_dim = max_dim;
    }

    fn skip(mut self, why: &str) -> CheckRecord {
        self.rec.status = Status::Skipped(why.into());
        self.rec.elapsed_ms = self.elapsed;
        self.rec
    }

    fn finish(mut self) -> CheckRecord {
        if self.over > 0 {
            let why = format!(
                "{} samples exceed the desk budget max_dim = {}",
                self.over, self.max_dim
            );
            if self.n == 0 {
                return self.skip(&why);
            }
            self.rec.note = Some(match self.rec.note.take() {
                Some(n) => format!("{n}; {why} and were not run"),
                None => format!("{why} and were not run"),
            });
        }
        if let Value::Object(m) = &mut self.rec.params {
            m.insert("samples".into(), json!(self.n));
        }
        self.rec.elapsed_ms = self.elapsed;
        self.rec
    }
}

fn random_point(rng: &mut ChaCha8Rng, p: u64, n: usize, e: i32) -> Vec<Q> {
    let pe = p.pow(e.max(0) as u32) as i128;
    (0..n)
        .map(|_| q(rng.gen_range(-pe * pe..=pe * pe), pe))
        .collect()
}

fn c01(ps: &SuiteParams) -> Vec<CheckRecord> {
    let n = 2 * ps.d;
    let pj = json!({});
    let mut inv = Tally::new("c01.involution", "G(G f) = f", pj.clone());
    let mut pl = Tally::new("c01.plancherel", "|G f|_2^2 = |f|_2^2", pj.clone());
    let mut fl = Tally::new(
        "c01.float_backend",
        "fast float G agrees with exact G; involution and Plancherel in floats",
        json!({"tol": ps.tol.transform}),
    );
    for i in 0..ps.count(100) {
        let f = random(ps.p, n, ps.res_for(i), ps.seed_for(1, i), ps.backend);
        let g = symplectic_g(&f);
        inv.run(|| {
            g.clone()
                .and_then(|g| Ok(cmp_fn(&symplectic_g(&g)?, &f, ps)))
        });
        pl.run(|| {
            g.clone()
                .map(|g| cmp_scalar(&g.l2_sq(), &f.l2_sq(), ps.exact(), ps.tol.transform))
        });
        fl.run(|| {
            let ff = f.on(Backend::Float);
            let gf = symplectic_g_fast(&ff)?;
            let back = symplectic_g_fast(&gf)?;
            let tol = ps.tol.transform;
            let e1 = max_diff(&gf, &g?.on(Backend::Float)).unwrap_or(f64::INFINITY);
            let e2 = max_diff(&back, &ff).unwrap_or(f64::INFINITY);
            let e3 = (gf.l2_sq().to_c64() - ff.l2_sq().to_c64()).norm();
            let e = e1.max(e2).max(e3);
            Ok(Outcome {
                ok: e <= tol,
                lhs: format!("max deviation {e:.3e}"),
                rhs: format!("tolerance {tol:e}"),
                disc: Some(e),
            })
        });
    }
    vec![inv.finish(), pl.finish(), fl.finish()]
}

fn c02(ps: &SuiteParams) -> Vec<CheckRecord> {
    let n = 2 * ps.d;
    let p = ps.p as i128;
    let thetas = [
        Theta::from_int(ps.p, 1),
        Theta::from_int(ps.p, p),
        Theta::from_int(ps.p, 2 * p),
    ];
    let tj = json!({"theta": thetas.iter().map(theta_str).collect::<Vec<_>>(), "n": 1, "m": 1});
    let mut ij = Tally::new("c02.i_j_commute", "I J f = J I f", tj.clone());
    let mut ijt = Tally::new(
        "c02.i_jtheta_commute",
        "I J_theta f = J_theta I f",
        tj.clone(),
    );
    let mut dil = Tally::new("c02.dilation", "J^n D_theta f = D_theta J_theta^n f", tj);
    for i in 0..ps.count(50) {
        let f = random(ps.p, n, ps.res_for(i), ps.seed_for(2, i), ps.backend);
        let th = thetas[i % 3];
        ij.run(|| {
            Ok(cmp_fn(
                &apply_i(&apply_j(&f, 1, None)?, 1),
                &apply_j(&apply_i(&f, 1), 1, None)?,
                ps,
            ))
        });
        ijt.run(|| {
            Ok(cmp_fn(
                &apply_i(&apply_j(&f, 1, Some(&th))?, 1),
                &apply_j(&apply_i(&f, 1), 1, Some(&th))?,
                ps,
            ))
        });
        dil.run(|| {
            Ok(cmp_fn(
                &apply_j(&dilate_theta(&f, &th)?, 1, None)?,
                &dilate_theta(&apply_j(&f, 1, Some(&th))?, &th)?,
                ps,
            ))
        });
    }
    vec![ij.finish(), ijt.finish(), dil.finish()]
}

fn c03(ps: &SuiteParams) -> Vec<CheckRecord> {
    let mut rng = ps.rng(3);
    let p = ps.p;
    let mut t = Tally::new(
        "c03.eigenrelation",
        "J^n Psi_P = mu0(P)^n Psi_P pointwise",
        json!({"max_mu0": p.pow(3)}),
    );
    for i in 0..ps.count(20) {
        let e = (i % 4) as i32;
        let w = random_point(&mut rng, p, 2 * ps.d, e);
        let n = 1 + (i % 3) as i32;
        let x = random_point(&mut rng, p, 2 * ps.d, 1);
        t.run(|| {
            let spec = PhaseSum::new(p, ps.d, (), vec![(w.clone(), Scalar::one())])?;
            let got = pointwise_j_spec(&spec, n, &x)?;
            let want = spec.eval(&x).scale_q(&mu0(p, &w).powi(n).to_q(p));
            Ok(cmp_scalar(&got, &want, true, 0.0))
        });
    }
    vec![t.finish()]
}

fn c04(ps: &SuiteParams) -> Vec<CheckRecord> {
    let p = ps.p;
    let thetas = [
        Theta::one(),
        Theta::from_int(p, p as i128),
        Theta::from_int(p, (p * p) as i128),
    ];
    let mut t = Tally::new(
        "c04.hs_unitarity",
        "|quantize(F)|_HS^2 |theta|^d = |F|_2^2",
        json!({"theta": thetas.iter().map(theta_str).collect::<Vec<_>>()}),
    );
    for i in 0..ps.count(50) {
        let th = thetas[i % 3];
        let Some(res) = ps.fit_res(i, ps.max_dim, |r| {
            Ok(basis_for_symbol(p, ps.d, &th, r)?.dim())
        }) else {
            t.over_budget(ps.max_dim);
            continue;
        };
        let f = random(p, 2 * ps.d, res, ps.seed_for(4, i), ps.backend);
        t.run(|| {
            let b = basis_for_symbol(p, ps.d, &th, f.res)?;
            let hs = quantize(&f, &th, &b)?
                .hs_sq()
                .scale_q(&th.abs().powi(ps.d as i32).to_q(p));
            Ok(cmp_scalar(&hs, &f.l2_sq(), ps.exact(), ps.tol.norm))
        });
    }
    vec![t.finish()]
}

fn c05(ps: &SuiteParams) -> Vec<CheckRecord> {
    let p = ps.p;
    let pj = json!({"theta": [theta_str(&ps.theta_for(0)), theta_str(&ps.theta_for(1))]});
    let mut hom = Tally::new(
        "c05.homomorphism",
        "quantize(f * g) = quantize(f) quantize(g)",
        pj.clone(),
    );
    let mut assoc = Tally::new("c05.associativity", "(f * g) * h = f * (g * h)", pj);
    let mut zero = Tally::new("c05.theta_zero", "f *_0 g = f g", json!({}));
    for i in 0..ps.count(30) {
        let th = ps.theta_for(i);
        let small = Resolution {
            r: ps.res.r.min(1),
            s: ps.res.s.min(1),
        };
        let sp = SuiteParams {
            res: small,
            ..ps.clone()
        };
        let mk = |k: u64| {
            random(
                p,
                2 * ps.d,
                sp.res_for(i + k as usize),
                ps.seed_for(5, 3 * i + k as usize),
                ps.backend,
            )
        };
        let (f, g, h) = (mk(0), mk(1), mk(2));
        if !th.is_zero() {
            let fg = moyal_star(&f, &g, &th);
            let basis = fg.clone().and_then(|fg| {
                Ok(basis_for_symbol(p, ps.d, &th, f.res)?
                    .join(&basis_for_symbol(p, ps.d, &th, g.res)?)
                    .join(&basis_for_symbol(p, ps.d, &th, fg.res)?))
            });
            if basis.as_ref().is_ok_and(|b| b.dim() > ps.max_dim) {
                hom.over_budget(ps.max_dim);
            } else {
                hom.run(|| {
                    let (fg, b) = (fg?, basis?);
                    Ok(cmp_op(
                        &quantize(&fg, &th, &b)?,
                        &quantize(&f, &th, &b)?.mul(&quantize(&g, &th, &b)?)?,
                        ps,
                    ))
                });
            }
        }
        assoc.run(|| {
            let l = moyal_star(&moyal_star(&f, &g, &th)?, &h, &th)?;
            let r = moyal_star(&f, &moyal_star(&g, &h, &th)?, &th)?;
            Ok(cmp_fn(&l, &r, ps))
        });
        zero.run(|| Ok(cmp_fn(&moyal_star(&f, &g, &Theta::Zero)?, &f.mul(&g)?, ps)));
    }
    let hom = if hom.n == 0 && hom.over == 0 {
        hom.skip("quantization needs theta != 0")
    } else {
        hom.finish()
    };
    vec![hom, assoc.finish(), zero.finish()]
}

fn c06(ps: &SuiteParams) -> Vec<CheckRecord> {
    let mut rng = ps.rng(6);
    let mut t = Tally::new(
        "c06.covariance",
        "U(Y) quantize(F) U(Y)* = quantize(tau_{-Y} F)",
        json!({}),
    );
    for i in 0..ps.count(20) {
        let th = ps.theta_for(i);
        if th.is_zero() {
            return vec![t.skip("quantization needs theta != 0")];
        }
        let y = random_point(&mut rng, ps.p, 2 * ps.d, 1);
        // τ_{-Y}F lives at the resolution of F joined with the support of Y
        let cost = |r: Resolution| -> Result<usize> {
            let b = basis_for_symbol(ps.p, ps.d, &th, r)?;
            let moved = Resolution {
                r: r.r.max(crate::bruhat::support_exp(ps.p, &y, r.r)),
                s: r.s,
            };
            Ok(b.join(&basis_for_symbol(ps.p, ps.d, &th, moved)?)
                .join(&basis_for_point(ps.p, &th, &y)?)
                .dim())
        };
        let Some(res) = ps.fit_res(i, ps.max_dim, cost) else {
            t.over_budget(ps.max_dim);
            continue;
        };
        let f = random(ps.p, 2 * ps.d, res, ps.seed_for(6, i), ps.backend);
        t.run(|| {
            let (l, r) = covariance_pair(&f, &th, &y)?;
            Ok(cmp_op(&l, &r, ps))
        });
    }
    vec![t.finish()]
}

fn c07(ps: &SuiteParams) -> Vec<CheckRecord> {
    let p = ps.p;
    let tol = ps.tol.norm;
    let bound = |r: Result<crate::weyl::CvReport>| -> Result<Outcome> {
        let r = r?;
        Ok(Outcome {
            ok: r.holds(tol),
            lhs: format!("{:.12}", r.lhs),
            rhs: format!("{:.12}", r.rhs),
            disc: Some(r.lhs - r.rhs).filter(|d| *d > 0.0),
        })
    };
    let mut sc = Tally::new(
        "c07.scalar_bound",
        "|quantize(F)| <= |mu0^{-2d-1}|_1 |J^{2d+1} F|_inf",
        json!({}),
    );
    for i in 0..ps.count(200) {
        let th = ps
            .theta_for(i)
            .is_zero()
            .then(Theta::one)
            .unwrap_or(ps.theta_for(i));
        let Some(res) = ps.fit_res(i, ps.max_dim, |r| {
            Ok(basis_for_symbol(p, ps.d, &th, r)?.dim())
        }) else {
            sc.over_budget(ps.max_dim);
            continue;
        };
        let f = random(p, 2 * ps.d, res, ps.seed_for(7, i), ps.backend);
        sc.run(|| bound(cv_check(&f, &th)));
    }
    let mut mt = Tally::new(
        "c07.matrix_bound",
        "same bound for M_2-valued symbols",
        json!({"k": 2}),
    );
    for i in 0..ps.count(50) {
        let th = ps.nonzero_theta();
        let Some(res) = ps.fit_res(i, ps.max_dim, |r| {
            Ok(2 * basis_for_symbol(p, ps.d, &th, r)?.dim())
        }) else {
            mt.over_budget(ps.max_dim);
            continue;
        };
        let f = random_mat(p, 2 * ps.d, res, 2, ps.seed_for(7, 1000 + i), ps.backend);
        mt.run(|| bound(cv_check(&f, &th)));
    }
    let unit = Tally::new(
        "c07.unit_ball",
        "F = 1_{Z_p^2}, theta = 1: lhs = 1, rhs = 13/9",
        json!({"theta": "0,1"}),
    );
    let unit = if p != 3 || ps.d != 1 {
        unit.skip("the closed form 13/9 is for p = 3, d = 1")
    } else {
        let mut unit = unit;
        unit.run(|| {
            let r = cv_check(
                &indicator(3, &[Q::from_integer(0), Q::from_integer(0)], 0)?,
                &Theta::one(),
            )?;
            let ok = r.lhs_sq_exact == Some(Q::from_integer(1)) && r.rhs_exact == Some(q(13, 9));
            Ok(truth(
                ok,
                format!("lhs^2 = {:?}", r.lhs_sq_exact.map(|x| x.to_string())),
                format!("rhs = {:?}", r.rhs_exact.map(|x| x.to_string())),
            ))
        });
        unit.finish()
    };
    let thetas = [
        Theta::one(),
        Theta::from_int(p, p as i128),
        Theta::from_int(p, (p * p) as i128),
    ];
    let mut indep = Tally::new(
        "c07.rhs_theta_independent",
        "rhs identical for theta in {1, p, p^2}",
        json!({}),
    );
    for i in 0..ps.count(10) {
        let widest = &thetas[2];
        let Some(res) = ps.fit_res(i, ps.max_dim, |r| {
            Ok(basis_for_symbol(p, ps.d, widest, r)?.dim())
        }) else {
            indep.over_budget(ps.max_dim);
            continue;
        };
        let f = random(p, 2 * ps.d, res, ps.seed_for(7, 2000 + i), ps.backend);
        indep.run(|| {
            let rs = thetas
                .iter()
                .map(|t| cv_check(&f, t).map(|r| (r.rhs_exact, r.rhs)))
                .collect::<Result<Vec<_>>>()?;
            // exact when |J^3 F| is rational on every cell, else compared in floats
            let ok = rs
                .iter()
                .all(|r| r.0 == rs[0].0 && (r.1 - rs[0].1).abs() <= tol);
            Ok(truth(
                ok,
                format!("{:.12}", rs[0].1),
                format!("{:?}", rs.iter().map(|r| r.1).collect::<Vec<_>>()),
            ))
        });
    }
    vec![sc.finish(), mt.finish(), unit, indep.finish()]
}

fn c08(ps: &SuiteParams) -> Vec<CheckRecord> {
    let p = ps.p;
    let th = ps.nonzero_theta();
    let anchor = "|W_{X,Y}(Z)| = indicator predicted by the coherent-state lemma";
    let mut modulus = Tally::new(
        "c08.wigner_modulus",
        anchor,
        json!({"theta": theta_str(&th)}),
    );
    if ps.d != 1 {
        let mut out = vec![modulus.skip("the 9x9x81 sample is laid out for d = 1")];
        out.extend(c08_rest(ps, &th));
        return out;
    }
    let pts: Vec<Vec<Q>> = (0..9)
        .map(|i| vec![q((i % 3) as i128, p as i128), q((i / 3) as i128, p as i128)])
        .collect();
    let zres = Resolution { r: 1, s: 1 };
    let zs: Vec<Vec<Q>> = (0..81)
        .map(|i| {
            crate::bruhat::cell_point(p, 2, zres, i * crate::bruhat::side(p, zres).pow(2) / 81)
        })
        .collect();
    for x in &pts {
        for y in &pts {
            modulus.run(|| {
                for z in &zs {
                    let v = wigner_at(p, &th, x, y, z)?;
                    let m = v.exact().and_then(|c| c.abs_exact());
                    let want = if wigner_modulus_predicted(p, &th, x, y, z) {
                        1
                    } else {
                        0
                    };
                    if m != Some(Q::from_integer(want)) {
                        return Ok(truth(
                            false,
                            format!("|W| = {:?} at Z = {:?}", m.map(|x| x.to_string()), z),
                            format!("{want}"),
                        ));
                    }
                }
                Ok(truth(true, "moduli on 81 points", "lemma indicator"))
            });
        }
    }
    let mut out = vec![modulus.finish()];
    out.extend(c08_rest(ps, &th));
    out
}

fn c08_rest(ps: &SuiteParams, th: &Theta) -> Vec<CheckRecord> {
    let p = ps.p;
    let d = ps.d;
    let mut rep = Tally::new(
        "c08.reproducing",
        "<phi,psi> = |theta|^{-d} int <phi,eta_X><eta_X,psi> dX",
        json!({}),
    );
    for i in 0..ps.count(20) {
        let t = ps
            .theta_for(i)
            .is_zero()
            .then_some(*th)
            .unwrap_or(ps.theta_for(i));
        // the phase-space sum runs over p^{2d(2b+t)} cells, b = max(r, s, 0)
        let cells = |r: Resolution| -> Result<usize> {
            let b = r.r.max(r.s).max(0);
            Ok((ps.p as usize).pow((2 * d as i32 * (2 * b + t.t() as i32)) as u32))
        };
        let budget = ps.max_dim * ps.max_dim;
        let (Some(rf), Some(rg)) = (
            ps.fit_res(i, budget, cells),
            ps.fit_res(i + 1, budget, cells),
        ) else {
            rep.over_budget(ps.max_dim);
            continue;
        };
        let f = random(p, d, rf, ps.seed_for(8, i), ps.backend);
        let g = random(p, d, rg, ps.seed_for(8, 100 + i), ps.backend);
        rep.run(|| {
            reproducing_check(&f, &g, &t).map(|(l, r)| cmp_scalar(&l, &r, ps.exact(), ps.tol.norm))
        });
    }
    let mut rng = ps.rng(8);
    let mut kappa = Tally::new(
        "c08.kappa_constant",
        "quantize(W_{X,Y}) = kappa |eta_Y><eta_X| with one kappa",
        json!({"theta": theta_str(th)}),
    );
    let mut first: Option<Scalar> = None;
    // points with |X|, |Y| ≤ p^e; W_{X,Y} then lives at (e, e + t)
    let fits = |e: i32| {
        basis_for_symbol(
            p,
            d,
            th,
            Resolution {
                r: e,
                s: e + th.t() as i32,
            },
        )
        .is_ok_and(|b| b.dim() <= ps.max_dim)
    };
    let e = [1, 0].into_iter().find(|e| fits(*e));
    for _ in 0..ps.count(20) {
        let Some(e) = e else {
            kappa.over_budget(ps.max_dim);
            continue;
        };
        let x = random_point(&mut rng, p, 2 * d, e);
        let y = random_point(&mut rng, p, 2 * d, e);
        kappa.run(|| {
            let w = wigner(p, th, &x, &y)?;
            let b = basis_for_symbol(p, d, th, w.res)?;
            let ex = b.vector(&coherent(p, th, &x)?)?;
            let ey = b.vector(&coherent(p, th, &y)?)?;
            let k = quantize(&w, th, &b)?.ratio_to(&LinOperator::rank_one(b, &ey, &ex));
            let Some(k) = k else {
                return Ok(truth(
                    false,
                    "quantize(W) is not a multiple of |eta_Y><eta_X|",
                    "",
                ));
            };
            let reference = first.get_or_insert_with(|| k.clone()).clone();
            Ok(cmp_scalar(&k, &reference, true, 0.0))
        });
    }
    let mut rec = kappa.finish();
    if let Some(k) = first {
        rec.note = Some(format!("kappa = {}", fmt_scalar(&k)));
    }
    vec![rep.finish(), rec]
}

fn algebras(ps: &SuiteParams, n: usize) -> Vec<(String, SpectralAlgebra)> {
    let mut out = Vec::new();
    if ps.p == 3 && ps.d == 1 {
        out.push(("flagship".to_string(), flagship()));
    }
    for i in 0..n {
        out.push((
            format!("random{i}"),
            random_spectral(ps.p, ps.d, ps.seed_for(90, i)),
        ));
    }
    out
}

fn c09(ps: &SuiteParams) -> Vec<CheckRecord> {
    let th = ps.nonzero_theta();
    let p = ps.p;
    let n = 2 * ps.d as u32 + 1;
    let rel = ps.tol.oracle_rel;
    let pj = json!({"theta": theta_str(&th), "N": n, "rel": rel});
    let mut flag = Tally::new(
        "c09.oracle_flagship",
        "deform_sc = oscillatory integral within its tail bound, all basis pairs",
        pj.clone(),
    );
    let mut rand_o = Tally::new(
        "c09.oracle_random",
        "deform_sc = oscillatory integral within its tail bound",
        pj,
    );
    let mut assoc = Tally::new(
        "c09.associativity",
        "(x * y) * z = x * (y * z) in A_theta",
        json!({}),
    );
    let mut invol = Tally::new("c09.involution", "(x * y)^* = y^* * x^*", json!({}));
    let mut equiv = Tally::new(
        "c09.equivariance",
        "alpha_X(x * y) = alpha_X(x) * alpha_X(y)",
        json!({}),
    );
    let mut stage = Tally::new(
        "c09.stage_law",
        "(A_theta)_theta' = A_{theta + theta'}, including theta' = -theta",
        json!({}),
    );
    let oracle_case = |alg: &SpectralAlgebra, a: &[Scalar], b: &[Scalar]| -> Result<Outcome> {
        let d = deform_sc(alg, &th)?;
        let exact = d.mul(a, b);
        let scale = exact.iter().map(|c| c.to_c64().norm()).fold(1.0, f64::max);
        // the per-pair default can be loose for elements with many terms
        let mut big_t = default_truncation(alg, &th, n, rel);
        let mut o = osc_oracle(alg, a, b, &th, n, big_t, Regularizer::None)?;
        while o.bound >= rel * scale && big_t < 200 {
            big_t += 2;
            o = osc_oracle(alg, a, b, &th, n, big_t, Regularizer::None)?;
        }
        let err = o
            .value
            .iter()
            .zip(&exact)
            .map(|(u, v)| (u - v.to_c64()).norm())
            .fold(0.0, f64::max);
        let ok = err <= o.bound + 1e-12 && o.bound < rel * scale;
        Ok(Outcome {
            ok,
            lhs: format!("error {err:.3e}"),
            rhs: format!("bound {:.3e} (T = {big_t})", o.bound),
            disc: Some(err).filter(|_| !ok),
        })
    };
    let algs = algebras(ps, ps.count(20));
    let mut rng = ps.rng(9);
    for (i, (name, alg)) in algs.iter().enumerate() {
        if name == "flagship" {
            for j in 0..alg.dim() {
                for k in 0..alg.dim() {
                    flag.run(|| oracle_case(alg, &alg.basis_element(j), &alg.basis_element(k)));
                }
            }
        } else {
            let (a, b) = (
                random_element(alg, ps.seed_for(9, 2 * i)),
                random_element(alg, ps.seed_for(9, 2 * i + 1)),
            );
            rand_o.run(|| oracle_case(alg, &a, &b));
        }
        let dd = match deform_sc(alg, &th) {
            Ok(d) => d,
            Err(e) => {
                assoc.run(|| Err(e));
                continue;
            }
        };
        let (x, y, z) = (
            random_element(alg, ps.seed_for(9, 1000 + i)),
            random_element(alg, ps.seed_for(9, 2000 + i)),
            random_element(alg, ps.seed_for(9, 3000 + i)),
        );
        let eqv = |a: &[Scalar], b: &[Scalar]| a == b;
        let l = dd.mul(&dd.mul(&x, &y), &z);
        let r = dd.mul(&x, &dd.mul(&y, &z));
        assoc.run(|| Ok(truth(eqv(&l, &r), "(xy)z", "x(yz)")));
        let l = dd.star(&dd.mul(&x, &y));
        let r = dd.mul(&dd.star(&y), &dd.star(&x));
        invol.run(|| Ok(truth(eqv(&l, &r), "(xy)*", "y*x*")));
        let xp = random_point(&mut rng, p, 2 * ps.d, 2);
        let l = dd.alpha(&xp, &dd.mul(&x, &y));
        let r = dd.mul(&dd.alpha(&xp, &x), &dd.alpha(&xp, &y));
        equiv.run(|| Ok(truth(eqv(&l, &r), "alpha(xy)", "alpha(x)alpha(y)")));
        let th2 = Theta::from_int(p, 2);
        stage.run(|| {
            let direct = deform_sc(alg, &th.add(&th2, p))?;
            let staged = dd.deform(&th2);
            let back = dd.deform(&th.neg());
            let ok = staged.constants == direct.constants
                && back.constants == alg.constants
                && back.theta.is_zero();
            Ok(truth(ok, "staged constants", "direct constants"))
        });
    }
    let flag = if flag.n == 0 {
        flag.skip("the M_3 flagship is defined for p = 3, d = 1")
    } else {
        flag.finish()
    };
    vec![
        flag,
        rand_o.finish(),
        assoc.finish(),
        invol.finish(),
        equiv.finish(),
        stage.finish(),
    ]
}

fn c10(ps: &SuiteParams) -> Vec<CheckRecord> {
    let mut t = Tally::new(
        "c10.translation_model",
        "translation-model product = Moyal product",
        json!({}),
    );
    for i in 0..ps.count(50) {
        let th = ps.theta_for(i);
        let f = random(
            ps.p,
            2 * ps.d,
            ps.res_for(i),
            ps.seed_for(10, 2 * i),
            ps.backend,
        );
        let g = random(
            ps.p,
            2 * ps.d,
            ps.res_for(i + 1),
            ps.seed_for(10, 2 * i + 1),
            ps.backend,
        );
        t.run(|| {
            Ok(cmp_fn(
                &translation_model(&f, &g, &th)?,
                &moyal_star(&f, &g, &th)?,
                ps,
            ))
        });
    }
    vec![t.finish()]
}

const G_THETA_NOTE: &str = "fails for |theta| != 1: with V_{f1}V_{f2} = V_{f1*f2} and G_theta an involution \
(both verified exactly) and the Moyal product normalized by |2/theta|^{2d}, the computed relation is \
G_theta(f1 * f2) = |theta|^d G_theta(f1) star G_theta(f2); for f = 1_{Z^2}, theta = p the two sides are \
p^{-1} 1_{Z^2} and 1_{Z^2}. The scaled relation is checked separately.";

const PI_THETA_NOTE: &str =
    "Pi_theta = G S_theta G translates the a_j coordinate by +theta P_j, while \
pi_theta(f) = int alpha(f(X)) star tau_X dX translates by -theta P_j; the computed identity is \
pi_theta(f) = pi(Pi_{-theta} f), checked separately.";

fn c11(ps: &SuiteParams) -> Vec<CheckRecord> {
    let p = ps.p;
    let d = ps.d;
    let n = 2 * d;
    let mut rng = ps.rng(11);
    let pj = json!({"theta": [theta_str(&ps.nonzero_theta()), theta_str(&ps.theta_for(1))]});
    let mut weyl = Tally::new(
        "c11.weyl_relation",
        "V_{X+Y} = conj Psi((2/theta)[X,Y]) V_X V_Y",
        pj.clone(),
    );
    let mut hom = Tally::new(
        "c11.v_homomorphism",
        "V_{f1} V_{f2} = V_{f1 * f2}",
        pj.clone(),
    );
    let mut gi = Tally::new(
        "c11.g_theta_intertwining",
        "G_theta(f1 * f2) = G_theta f1 star G_theta f2",
        pj.clone(),
    );
    let mut gs = Tally::new(
        "c11.g_theta_intertwining_scaled",
        "G_theta(f1 * f2) = |theta|^d G_theta f1 star G_theta f2",
        pj.clone(),
    );
    let mut pinv = Tally::new("c11.pi_inverse", "Pi_theta Pi_{-theta} = id", pj.clone());
    let mut lit = Tally::new(
        "c11.pi_theta_identity",
        "pi_theta(f) xi = pi(Pi_theta f) xi",
        pj.clone(),
    );
    let mut refl = Tally::new(
        "c11.pi_theta_identity_reflected",
        "pi_theta(f) xi = pi(Pi_{-theta} f) xi",
        pj,
    );
    let small = Resolution { r: 0, s: 1 };
    for i in 0..ps.count(30) {
        let th = if ps.theta_for(i).is_zero() {
            Theta::from_int(p, (p as i128).pow(i as u32 % 2))
        } else {
            ps.theta_for(i)
        };
        let t = th.t() as i32;
        // |X|, |Y| ≤ p^e with e + t = 1 keeps the basis at (e, 1)
        let e = 1 - t.min(1);
        if (p as usize).pow((n as i32 * (2 * e + t)) as u32) > ps.max_dim {
            weyl.over_budget(ps.max_dim);
        } else {
            weyl.run(|| {
                let x = random_point(&mut rng, p, n, e);
                let y = random_point(&mut rng, p, n, e);
                let b = crate::weyl::CellBasis::new(p, n, e, e + t)?;
                let l = weyl_v(&th, &vadd(&x, &y), &b)?;
                let r = weyl_v(&th, &x, &b)?.mul(&weyl_v(&th, &y, &b)?)?;
                let c =
                    crate::padic::psi(p, &(Q::from_integer(2) * th.inv(p) * sympl_pair(&x, &y)))
                        .conj();
                Ok(cmp_op(
                    &l.op,
                    &r.op.scale(&Scalar::from_root(c)),
                    &SuiteParams {
                        backend: Backend::Exact,
                        ..ps.clone()
                    },
                ))
            });
        }
        let f1 = random(p, n, small, ps.seed_for(11, 2 * i), ps.backend);
        let f2 = random(p, n, small, ps.seed_for(11, 2 * i + 1), ps.backend);
        let conv = twisted_conv(&f1, &f2, &th);
        let basis = conv
            .clone()
            .and_then(|c| twisted_basis(p, d, &th, c.res.join(&small)));
        if basis.as_ref().is_ok_and(|b| b.dim() > ps.max_dim) {
            hom.over_budget(ps.max_dim);
        } else {
            hom.run(|| {
                let (conv, b) = (conv.clone()?, basis?);
                let l = v_of_f(&f1, &th, &b)?.mul(&v_of_f(&f2, &th, &b)?)?;
                Ok(cmp_op(&l.op, &v_of_f(&conv, &th, &b)?.op, ps))
            });
        }
        let sides = (|| -> Result<(SBFunction<Scalar>, SBFunction<Scalar>)> {
            let l = g_theta(&conv.clone()?, &th)?;
            let r = moyal_star(&g_theta(&f1, &th)?, &g_theta(&f2, &th)?, &th)?;
            Ok((l, r))
        })();
        gi.run(|| sides.clone().map(|(l, r)| cmp_fn(&l, &r, ps)));
        gs.run(|| sides.map(|(l, r)| cmp_fn(&l, &r.scale_q(&pow_signed_q(p, -t * d as i32)), ps)));
        let alg = random_spectral(p, d, ps.seed_for(11, 500 + i));
        let comps = |k: usize| -> AlgFunction {
            (0..alg.dim())
                .map(|j| {
                    random(
                        p,
                        n,
                        small,
                        ps.seed_for(11, 10_000 + 100 * k + j),
                        ps.backend,
                    )
                })
                .collect()
        };
        let f = comps(3 * i);
        pinv.run(|| {
            let back = big_pi(&alg, &big_pi(&alg, &f, &th)?, &th.neg())?;
            let ok = back.iter().zip(&f).all(|(a, b)| cmp_fn(a, b, ps).ok);
            Ok(truth(ok, "Pi_theta Pi_-theta f", "f"))
        });
        let pis = (|| {
            let xi = represent(&alg, &comps(3 * i + 1))?;
            let r = pi_theta(&alg, &f, &xi, &th)?;
            let neg = pi_apply(&alg, &big_pi(&alg, &f, &th.neg())?, &xi)?;
            Ok::<_, Error>((r, neg))
        })();
        lit.run(|| {
            pis.clone()
                .map(|(r, _)| cmp_fn(&r.pi_xi, &r.pi_theta_xi, ps))
        });
        refl.run(|| pis.map(|(r, neg)| cmp_fn(&neg, &r.pi_theta_xi, ps)));
    }
    let mut gi = gi.finish();
    if !gi.passed() {
        gi.note = Some(format!(
            "{} [{}]",
            G_THETA_NOTE,
            gi.note.unwrap_or_default()
        ));
    }
    let mut lit = lit.finish();
    if !lit.passed() {
        lit.note = Some(format!(
            "{} [{}]",
            PI_THETA_NOTE,
            lit.note.unwrap_or_default()
        ));
    }
    vec![
        weyl.finish(),
        hom.finish(),
        gi,
        gs.finish(),
        pinv.finish(),
        lit,
        refl.finish(),
    ]
}

fn c12(ps: &SuiteParams) -> Vec<CheckRecord> {
    let mut t = Tally::new(
        "c12.approximate_unit",
        "alpha_{phi_k}(a) = a once p^k >= max mu0(P_j)",
        json!({"extra_k": 2}),
    );
    let mut sharp = Tally::new(
        "c12.threshold_sharp",
        "below the threshold the top-weight component is killed",
        json!({}),
    );
    for (i, (_, alg)) in algebras(ps, ps.count(20)).iter().enumerate() {
        let kmin = alg
            .weights
            .iter()
            .map(|w| mu0_exp(ps.p, w))
            .max()
            .unwrap_or(0) as i32;
        let a = random_element(alg, ps.seed_for(12, i));
        for k in kmin..=kmin + 2 {
            t.run(|| {
                alg.smoothing(&a, &approximate_unit(ps.p, ps.d, k))
                    .map(|s| truth(s == a, "alpha_phi(a)", "a"))
            });
        }
        if kmin > 0 {
            let j = (0..alg.dim())
                .find(|j| mu0_exp(ps.p, &alg.weights[*j]) as i32 == kmin)
                .expect("a top weight exists");
            let e = alg.basis_element(j);
            sharp.run(|| {
                alg.smoothing(&e, &approximate_unit(ps.p, ps.d, kmin - 1))
                    .map(|s| truth(s != e, "alpha_phi(a_j)", "a_j"))
            });
        }
    }
    vec![t.finish(), sharp.finish()]
}

fn c13(ps: &SuiteParams) -> Vec<CheckRecord> {
    let th = ps.nonzero_theta();
    let radius = 3;
    let pj =
        json!({"theta": theta_str(&th), "radius_exp": radius, "warn_above": ps.tol.module_gap});
    let rec = Tally::new(
        "c13.module_norm",
        "truncated module norm vs finite-dimensional deformed norm",
        pj,
    );
    if ps.p != 3 || ps.d != 1 {
        return vec![rec.skip("the M_3 flagship is defined for p = 3, d = 1")];
    }
    let mut rec = rec;
    let alg = flagship();
    let mut elems: Vec<(String, Vec<Scalar>)> = (0..alg.dim())
        .map(|j| (alg.labels[j].clone(), alg.basis_element(j)))
        .collect();
    elems.push(("random".into(), random_element(&alg, ps.seed_for(13, 0))));
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    rec.run(|| {
        let dd = deform_sc(&alg, &th)?;
        for (name, e) in &elems {
            let n = dd.norm(e)?;
            let m = module_norm(&alg, e, &th, radius)?;
            let gap = (m - n).abs() / n.max(1e-300);
            worst = worst.max(gap);
            rows.push(format!("{name}: {n:.9} vs {m:.9}"));
        }
        Ok(truth(
            true,
            rows.join("; "),
            format!("max relative gap {worst:.3e}"),
        ))
    });
    let mut rec = rec.finish();
    if rec.passed() {
        rec.discrepancy = Some(worst);
        if worst > ps.tol.module_gap {
            rec.note = Some(format!(
                "warning: gap {worst:.3e} exceeds {}",
                ps.tol.module_gap
            ));
        }
    }
    vec![rec]
}

pub fn run_criterion(n: u32, ps: &SuiteParams) -> Vec<CheckRecord> {
    match n {
        1 => c01(ps),
        2 => c02(ps),
        3 => c03(ps),
        4 => c04(ps),
        5 => c05(ps),
        6 => c06(ps),
        7 => c07(ps),
        8 => c08(ps),
        9 => c09(ps),
        10 => c10(ps),
        11 => c11(ps),
        12 => c12(ps),
        13 => c13(ps),
        _ => Vec::new(),
    }
}

/// Runs a named suite, or every suite for "all".
pub fn run_suite(name: &str, ps: &SuiteParams) -> Result<VerificationReport> {
    let criteria: Vec<u32> = if name == "all" {
        (1..=13).collect()
    } else {
        criteria_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{name}`")))?
            .to_vec()
    };
    let checks = criteria
        .iter()
        .flat_map(|n| run_criterion(*n, ps))
        .collect();
    Ok(VerificationReport {
        suite: name.into(),
        seed: ps.seed,
        params: ps.to_json(),
        checks,
    })
}
