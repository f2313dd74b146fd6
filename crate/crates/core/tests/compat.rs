use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

use coarsekit::channel::{unitary_channel, KrausChannel};
use coarsekit::compat::{
    check_fiber_preservation, construct_emergent, run_all, sdp_feasibility, search_witness,
    solve_algebraic_v, verify_dual_identity, verify_kraus_equivalence, CheckConfig, Scenario,
    SdpStatus, Verdict,
};
use coarsekit::linalg::{null_space, CMatrix, DEFAULT_RANK_TOL};
use coarsekit::random::rng_from_seed;
use coarsekit::scenarios::{
    example1, example2, lookup, pm_diagonal, pm_rotation, random_scenario, registry,
    spin_dichotomization, spin_half_rotation, CoherenceMode, Expectation,
};
use rand::Rng;

fn quick() -> CheckConfig {
    CheckConfig {
        trials: 300,
        ..CheckConfig::default()
    }
}

fn random_axis<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n: f64 = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

#[test]
fn registry_verdicts_match_expectations() {
    for ns in registry().unwrap() {
        let r = run_all(&ns.scenario, &quick()).unwrap();
        match ns.expected {
            Expectation::Compatible => {
                assert_eq!(r.verdict, Verdict::Compatible, "{}", ns.name);
                assert!(
                    r.methods.all(Verdict::Compatible),
                    "{}: {:?}",
                    ns.name,
                    r.methods
                );
            }
            Expectation::Incompatible => {
                assert_eq!(r.verdict, Verdict::Incompatible, "{}", ns.name);
                assert!(!r.fiber.preserved);
                assert!(r.emergent.is_none());
            }
            Expectation::Unknown => unreachable!(),
        }
    }
}

#[test]
fn spin_one_rotations_have_half_angle_emergent_map() {
    let mut rng = rng_from_seed(31);
    for _ in 0..10 {
        let alpha = rng.random_range(-3.0..3.0);
        let n = random_axis(&mut rng);
        let s = spin_dichotomization(3, alpha, n).unwrap().scenario;
        let gamma = construct_emergent(&s).unwrap().expect("emergent map");
        let expected = unitary_channel(&spin_half_rotation(alpha, n)).unwrap();
        assert!(gamma.channel.choi().mat().distance(expected.choi().mat()) < 1e-7);
        assert!(
            verify_kraus_equivalence(&s, &gamma.channel)
                .unwrap()
                .equivalent
        );
    }
}

#[test]
fn spin_d2_is_self_consistent() {
    let n = [0.0, 1.0, 0.0];
    let s = spin_dichotomization(2, 0.9, n).unwrap().scenario;
    let sol = solve_algebraic_v(&s).unwrap();
    let v = sol.v.expect("intertwiner for the identity coarse-graining");
    assert!(verify_dual_identity(&s, &v).unwrap() < 1e-10);
}

#[test]
fn example1_dichotomy() {
    let ok = example1(&pm_diagonal(0.5, -2.0)).unwrap().scenario;
    let f = check_fiber_preservation(&ok).unwrap();
    assert!(f.residual < 1e-8);
    assert_eq!(
        sdp_feasibility(&ok, 20_000, 1e-7).unwrap().status,
        SdpStatus::Feasible
    );

    let bad = example1(&pm_rotation(FRAC_PI_4)).unwrap().scenario;
    assert!(check_fiber_preservation(&bad).unwrap().residual > 1e-3);
    assert_ne!(
        sdp_feasibility(&bad, 20_000, 1e-7).unwrap().status,
        SdpStatus::Feasible
    );
    let w = search_witness(&bad, 1000, 1, 42).unwrap().expect("witness");
    assert!(w.pg_after - w.pg_before > 1e-4);
}

/// Kernel invariance computed from scratch: basis of `ker T_Λ` mapped through
/// `T_Λ·T_U`, largest column norm.
fn kernel_oracle(s: &Scenario) -> bool {
    let t = s.coarse_graining().transfer().mat().clone();
    let tu = coarsekit::linalg::kron(&s.unitary().conj(), s.unitary());
    let m = t.matmul(&tu);
    null_space(&t, DEFAULT_RANK_TOL)
        .unwrap()
        .iter()
        .all(|v| m.matvec(v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-8)
}

#[test]
fn example2_block_criterion() {
    let a = pm_diagonal(1.1, 0.2);
    let equal = example2(2, 2, &[a.clone(), a.clone()], CoherenceMode::Full).unwrap();
    let differ = example2(
        2,
        2,
        &[a.clone(), a.matmul(&pm_rotation(FRAC_PI_3))],
        CoherenceMode::Full,
    )
    .unwrap();
    let cfg = quick();

    let r = run_all(&equal.scenario, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Compatible);
    assert!(kernel_oracle(&equal.scenario));

    let r = run_all(&differ.scenario, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Incompatible);
    assert!(!kernel_oracle(&differ.scenario));

    // a global phase between blocks is harmless
    let phased = example2(
        2,
        2,
        &[
            a.clone(),
            a.scale(coarsekit::Complex64::from_polar(1.0, 0.4)),
        ],
        CoherenceMode::Full,
    )
    .unwrap();
    assert_eq!(phased.expected, Expectation::Compatible);
    assert!(kernel_oracle(&phased.scenario));

    let none = example2(
        2,
        2,
        &[a.clone(), a.matmul(&pm_rotation(FRAC_PI_3))],
        CoherenceMode::None,
    )
    .unwrap();
    assert_eq!(
        run_all(&none.scenario, &cfg).unwrap().verdict,
        Verdict::Compatible
    );
}

#[test]
fn implications_on_random_scenarios() {
    let mut found_v = 0;
    for seed in 0..60u64 {
        let micro = [3, 4, 6][(seed % 3) as usize];
        let macro_dim = [2, 3][(seed / 3 % 2) as usize];
        let s = random_scenario(micro, macro_dim, 1 + (seed % 4) as usize, seed)
            .unwrap()
            .scenario;
        let fiber = check_fiber_preservation(&s).unwrap();
        let sol = solve_algebraic_v(&s).unwrap();
        if let Some(v) = &sol.v {
            found_v += 1;
            assert!(fiber.preserved);
            assert!(verify_dual_identity(&s, v).unwrap() <= 1e-7);
        }
        let sdp = sdp_feasibility(&s, 2_000, 1e-7).unwrap();
        if sdp.status == SdpStatus::Feasible {
            assert!(fiber.preserved);
        }
    }
    // generic random scenarios are incompatible
    assert_eq!(found_v, 0);
}

#[test]
fn planted_intertwiner_scenarios() {
    // Λ = partial trace over a k-dimensional factor, U = V ⊗ W
    let mut rng = rng_from_seed(77);
    for (d, k, trivial_w) in [(2, 2, true), (3, 2, true), (2, 2, false), (2, 3, false)] {
        let v = coarsekit::random::haar_unitary(d, &mut rng);
        let w = if trivial_w {
            CMatrix::identity(k)
        } else {
            coarsekit::random::haar_unitary(k, &mut rng)
        };
        let kraus: Vec<CMatrix> = (0..k)
            .map(|j| {
                let mut bra = CMatrix::zeros(1, k);
                bra[(0, j)] = coarsekit::Complex64::new(1.0, 0.0);
                coarsekit::linalg::kron(&CMatrix::identity(d), &bra)
            })
            .collect();
        let s = Scenario::new(
            KrausChannel::new(kraus).unwrap(),
            coarsekit::linalg::kron(&v, &w),
        )
        .unwrap();
        let sol = solve_algebraic_v(&s).unwrap();
        assert_eq!(sol.v.is_some(), trivial_w);
        let r = run_all(&s, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Compatible);
        let gamma = r.emergent.unwrap().channel;
        assert!(
            gamma
                .choi()
                .mat()
                .distance(unitary_channel(&v).unwrap().choi().mat())
                < 1e-7
        );
    }
}

#[test]
fn global_phase_does_not_change_verdicts() {
    let ns = lookup("example1-incompatible").unwrap().unwrap();
    let phased = Scenario::new(
        ns.scenario.coarse_graining().clone(),
        ns.scenario
            .unitary()
            .scale(coarsekit::Complex64::from_polar(1.0, 2.1)),
    )
    .unwrap();
    let a = check_fiber_preservation(&ns.scenario).unwrap().residual;
    let b = check_fiber_preservation(&phased).unwrap().residual;
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn run_all_is_deterministic() {
    let ns = lookup("example1-incompatible").unwrap().unwrap();
    let cfg = CheckConfig { seed: 5, ..quick() };
    let a = run_all(&ns.scenario, &cfg).unwrap().witness.unwrap();
    let b = run_all(&ns.scenario, &cfg).unwrap().witness.unwrap();
    assert_eq!(a.rho0, b.rho0);
    assert_eq!(a.pg_after, b.pg_after);
}
