use proptest::prelude::*;
use ultraweyl::bruhat::random;
use ultraweyl::deform::{deform_sc, flagship, random_element};
use ultraweyl::fourier::{fourier, symplectic_g, Direction};
use ultraweyl::padic::{mu0, norm, padic_abs, psi, q, vadd, PowerOfP};
use ultraweyl::suites::run_suite;
use ultraweyl::weyl::{basis_for_symbol, moyal_star, quantize};
use ultraweyl::{Backend, Resolution, SuiteParams, Theta, Q};

const P: u64 = 3;

fn small_q() -> impl Strategy<Value = Q> {
    (-200i128..200, 0u32..4).prop_map(|(n, k)| q(n, 3i128.pow(k)))
}

fn res_small() -> impl Strategy<Value = Resolution> {
    (0i32..2, 0i32..2).prop_map(|(r, s)| Resolution { r, s })
}

fn theta() -> impl Strategy<Value = Theta> {
    (0u32..2, prop_oneof![Just(1i64), Just(2), Just(-1)])
        .prop_map(|(t, u)| Theta::new(P, t, u).unwrap())
}

fn le(a: PowerOfP, b: PowerOfP) -> bool {
    a.to_q(P) <= b.to_q(P)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ultrametric(x in small_q(), y in small_q()) {
        let (ax, ay) = (padic_abs(P, &x), padic_abs(P, &y));
        let s = padic_abs(P, &(x + y));
        prop_assert!(le(s, ax.max(ay)));
        if ax != ay {
            prop_assert_eq!(s, ax.max(ay));
        }
    }

    #[test]
    fn peetre(x in prop::collection::vec(small_q(), 2), y in prop::collection::vec(small_q(), 2)) {
        prop_assert!(le(mu0(P, &vadd(&x, &y)), mu0(P, &x).mul(mu0(P, &y))));
    }

    #[test]
    fn mu0_translation_invariant(x in prop::collection::vec(small_q(), 2), a in -50i128..50, b in -50i128..50) {
        let z = vec![Q::from_integer(a), Q::from_integer(b)];
        prop_assert_eq!(mu0(P, &vadd(&x, &z)), mu0(P, &x));
    }

    #[test]
    fn psi_homomorphism(x in small_q(), y in small_q()) {
        prop_assert_eq!(psi(P, &(x + y)), psi(P, &x).mul(psi(P, &y)));
        prop_assert_eq!(psi(P, &x).is_one(), norm(P, &[x]).to_q(P) <= Q::from_integer(1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fourier_round_trip(res in res_small(), seed in any::<u64>()) {
        let f = random(P, 2, res, seed, Backend::Exact);
        let g = fourier(&fourier(&f, Direction::Forward), Direction::Inverse);
        prop_assert_eq!(g, f);
    }

    #[test]
    fn symplectic_g_involution(res in res_small(), seed in any::<u64>()) {
        let f = random(P, 2, res, seed, Backend::Exact);
        prop_assert_eq!(symplectic_g(&symplectic_g(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn plancherel(res in res_small(), seed in any::<u64>()) {
        let f = random(P, 2, res, seed, Backend::Exact);
        prop_assert_eq!(fourier(&f, Direction::Forward).l2_sq(), f.l2_sq());
    }

    #[test]
    fn refine_preserves_values(res in res_small(), seed in any::<u64>(), x in prop::collection::vec(small_q(), 2)) {
        let f = random(P, 2, res, seed, Backend::Exact);
        let g = f.refine(Resolution { r: res.r + 1, s: res.s + 1 }).unwrap();
        prop_assert_eq!(g.eval(&x), f.eval(&x));
        prop_assert_eq!(g.integral(), f.integral());
    }

    #[test]
    fn quantize_adjoint(res in res_small(), seed in any::<u64>(), th in theta()) {
        let f = random(P, 2, res, seed, Backend::Exact);
        let basis = basis_for_symbol(P, 1, &th, res).unwrap();
        let a = quantize(&f, &th, &basis).unwrap();
        let b = quantize(&f.star(), &th, &basis).unwrap();
        prop_assert!(b.sub(&a.adjoint()).unwrap().is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn moyal_associative(seed in any::<u64>(), th in theta()) {
        let res = Resolution { r: 0, s: 1 };
        let f = random(P, 2, res, seed, Backend::Exact);
        let g = random(P, 2, res, seed ^ 1, Backend::Exact);
        let h = random(P, 2, res, seed ^ 2, Backend::Exact);
        let l = moyal_star(&moyal_star(&f, &g, &th).unwrap(), &h, &th).unwrap();
        let r = moyal_star(&f, &moyal_star(&g, &h, &th).unwrap(), &th).unwrap();
        prop_assert!(l.sub(&r).unwrap().is_zero());
    }

    #[test]
    fn deformed_algebra_laws(seed in any::<u64>(), th in theta()) {
        let alg = flagship();
        let def = deform_sc(&alg, &th).unwrap();
        let a = random_element(&alg, seed);
        let b = random_element(&alg, seed ^ 7);
        let c = random_element(&alg, seed ^ 11);
        prop_assert_eq!(def.mul(&def.mul(&a, &b), &c), def.mul(&a, &def.mul(&b, &c)));
        prop_assert_eq!(def.star(&def.mul(&a, &b)), def.mul(&def.star(&b), &def.star(&a)));
        let back = def.deform(&th.neg());
        prop_assert_eq!(back.mul(&a, &b), alg.mul(&a, &b));
    }
}

#[test]
fn reports_are_deterministic() {
    let ps = SuiteParams {
        seed: 42,
        ..SuiteParams::default()
    };
    let a = run_suite("fourier", &ps).unwrap().render(false);
    let b = run_suite("fourier", &ps).unwrap().render(false);
    assert_eq!(a, b);
}
