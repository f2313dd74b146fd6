//! Acceptance suite: one `[PASS]` / `[FAIL]` line per criterion.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use coarsekit::channel::{
    choi_to_kraus, connecting_unitary, remix, unitary_channel, DensityMatrix, KrausChannel,
};
use coarsekit::classical::{
    do_intervention, observational_vs_do, random_chain_model, random_do_model, random_table,
    verify_total_probability, CondTable, DoModel,
};
use coarsekit::compat::{
    check_fiber_preservation, construct_emergent, helstrom_pguess, run_all, sdp_feasibility,
    search_witness, solve_algebraic_v, verify_dual_identity, verify_kraus_equivalence, CheckConfig,
    Scenario, SdpStatus, Verdict, DEFAULT_MAX_ITER, DEFAULT_SDP_TOL,
};
use coarsekit::linalg::{kron, null_space, CMatrix, DEFAULT_RANK_TOL};
use coarsekit::random::{
    derive_seed, ginibre, haar_unitary, random_channel, random_mixed_state, rng_from_seed,
    SeededRng,
};
use coarsekit::scenarios::{
    example1, example2, pm_diagonal, pm_rotation, random_scenario, registry, spin_dichotomization,
    spin_half_rotation, CoherenceMode,
};
use coarsekit::Complex64;
use rand::Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        (
            "spin dichotomization commutes",
            spin_dichotomization_commutes,
        ),
        ("example 1 dichotomy", example1_dichotomy),
        ("example 2 block criterion", example2_block_criterion),
        (
            "intertwiner implies fiber preservation and dual identity",
            intertwiner_implication,
        ),
        (
            "emergent maps pass Kraus equivalence",
            kraus_equivalence_round_trip,
        ),
        ("channel representation integrity", representation_integrity),
        ("classical exactness", classical_exactness),
        (
            "Helstrom data-processing monotonicity",
            helstrom_monotonicity,
        ),
        ("CLI end to end", cli_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown".into())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_axis(rng: &mut SeededRng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn choi_distance(a: &KrausChannel, b: &KrausChannel) -> f64 {
    a.choi().mat().distance(b.choi().mat())
}

fn spin_dichotomization_commutes() -> Result<String, String> {
    let mut rng = rng_from_seed(1001);
    let mut worst: f64 = 0.0;
    let mut literal_min = f64::INFINITY;
    for i in 0..50 {
        let alpha = rng.random_range(-PI..PI);
        let n = random_axis(&mut rng);
        let s = spin_dichotomization(3, alpha, n).map_err(err)?.scenario;
        let cfg = CheckConfig {
            seed: derive_seed(1001, i),
            ..CheckConfig::default()
        };
        let r = run_all(&s, &cfg).map_err(err)?;
        ensure!(
            r.methods.all(Verdict::Compatible),
            "α={alpha:.4}, n={n:?}: methods {:?}",
            r.methods
        );
        let gamma = r.emergent.ok_or("no emergent map")?.channel;
        let half = unitary_channel(&spin_half_rotation(alpha, n)).map_err(err)?;
        let d = choi_distance(&gamma, &half);
        ensure!(
            d < 1e-7,
            "α={alpha:.4}: Choi distance {d:.3e} to exp(-iα⟨σ,n⟩/2)"
        );
        worst = worst.max(d);
        // exp(-iα⟨σ,n⟩) is the half-angle rotation at 2α
        let full = unitary_channel(&spin_half_rotation(2.0 * alpha, n)).map_err(err)?;
        literal_min = literal_min.min(choi_distance(&gamma, &full));
    }
    Ok(format!(
        "50/50 compatible by all four methods; Γ = conjugation by exp(-iα⟨σ,n⟩/2), max Choi distance {worst:.2e} \
         (conjugation by exp(-iα⟨σ,n⟩) itself is off by at least {literal_min:.2e})"
    ))
}

fn example1_dichotomy() -> Result<String, String> {
    let ok = example1(&pm_diagonal(0.5, -2.0)).map_err(err)?.scenario;
    let f_ok = check_fiber_preservation(&ok).map_err(err)?.residual;
    ensure!(f_ok < 1e-8, "diagonal U₂: fiber residual {f_ok:.3e}");
    let sdp_ok = sdp_feasibility(&ok, DEFAULT_MAX_ITER, DEFAULT_SDP_TOL).map_err(err)?;
    ensure!(
        sdp_ok.status == SdpStatus::Feasible,
        "diagonal U₂: SDP {:?}",
        sdp_ok.status
    );

    let bad = example1(&pm_rotation(FRAC_PI_4)).map_err(err)?.scenario;
    let f_bad = check_fiber_preservation(&bad).map_err(err)?.residual;
    ensure!(f_bad > 1e-3, "mixing U₂: fiber residual {f_bad:.3e}");
    let sdp_bad = sdp_feasibility(&bad, DEFAULT_MAX_ITER, DEFAULT_SDP_TOL).map_err(err)?;
    ensure!(
        sdp_bad.status != SdpStatus::Feasible,
        "mixing U₂: SDP feasible"
    );
    let mut witness = None;
    for n in [1, 2, 3] {
        if let Some(w) = search_witness(&bad, 1000, n, 42).map_err(err)? {
            witness = Some(w);
            break;
        }
    }
    let w = witness.ok_or("no witness in 1000 trials")?;
    ensure!(w.gap() > 1e-4, "witness gap {:.3e}", w.gap());
    Ok(format!(
        "fiber residual {f_ok:.1e} / {f_bad:.3}, SDP feasible / {}, witness gap {:.3e} with ancilla {}",
        sdp_bad.status.as_str(),
        w.gap(),
        w.ancilla_dim
    ))
}

/// Kernel invariance from scratch: every kernel vector of `T_Λ` stays in the
/// kernel after `T_U`.
fn kernel_oracle(s: &Scenario) -> Result<bool, String> {
    let t = s.coarse_graining().transfer().mat().clone();
    let m = t.matmul(&kron(&s.unitary().conj(), s.unitary()));
    Ok(null_space(&t, DEFAULT_RANK_TOL)
        .map_err(err)?
        .iter()
        .all(|v| m.matvec(v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-8))
}

fn example2_block_criterion() -> Result<String, String> {
    let mut rng = rng_from_seed(1003);
    let cfg = CheckConfig {
        trials: 300,
        ..CheckConfig::default()
    };
    let mut cases = 0;
    for nblocks in [2, 3] {
        for _ in 0..3 {
            let a = pm_diagonal(rng.random_range(-PI..PI), rng.random_range(-PI..PI));
            let mut differ = vec![a.clone(); nblocks];
            differ[nblocks - 1] = a.matmul(&pm_rotation(FRAC_PI_3));
            for (blocks, want) in [
                (vec![a.clone(); nblocks], Verdict::Compatible),
                (differ, Verdict::Incompatible),
            ] {
                let s = example2(2, nblocks, &blocks, CoherenceMode::Full)
                    .map_err(err)?
                    .scenario;
                let r = run_all(&s, &cfg).map_err(err)?;
                let oracle = kernel_oracle(&s)?;
                ensure!(
                    r.verdict == want,
                    "{nblocks} blocks: verdict {:?}, expected {want:?}",
                    r.verdict
                );
                ensure!(
                    oracle == (r.verdict == Verdict::Compatible),
                    "{nblocks} blocks: oracle {oracle} against verdict {:?}",
                    r.verdict
                );
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} block scenarios, verdicts equal the kernel-invariance oracle"
    ))
}

/// Partial trace over a `k`-dimensional factor, with `U = V ⊗ I`.
fn planted(d: usize, k: usize, rng: &mut SeededRng) -> Result<(Scenario, CMatrix), String> {
    let v = haar_unitary(d, rng);
    let kraus = (0..k)
        .map(|j| {
            let mut bra = CMatrix::zeros(1, k);
            bra[(0, j)] = Complex64::new(1.0, 0.0);
            kron(&CMatrix::identity(d), &bra)
        })
        .collect();
    let s = Scenario::new(
        KrausChannel::new(kraus).map_err(err)?,
        kron(&v, &CMatrix::identity(k)),
    )
    .map_err(err)?;
    Ok((s, v))
}

fn intertwiner_implication() -> Result<String, String> {
    let mut with_v = 0;
    let mut worst_dual: f64 = 0.0;
    let check = |s: &Scenario, with_v: &mut usize, worst: &mut f64| -> Result<(), String> {
        let sol = solve_algebraic_v(s).map_err(err)?;
        if let Some(v) = &sol.v {
            ensure!(
                sol.residual <= 1e-8,
                "intertwiner accepted at residual {:.3e}",
                sol.residual
            );
            *with_v += 1;
            let f = check_fiber_preservation(s).map_err(err)?;
            ensure!(
                f.preserved,
                "intertwiner found but fiber residual {:.3e}",
                f.residual
            );
            let dual = verify_dual_identity(s, v).map_err(err)?;
            ensure!(dual <= 1e-7, "dual identity residual {dual:.3e}");
            *worst = worst.max(dual);
        }
        Ok(())
    };
    for seed in 0..200u64 {
        let micro = [3, 4, 6][(seed % 3) as usize];
        let macro_dim = [2, 3][(seed / 3 % 2) as usize];
        let kraus_count = 1 + (seed / 6 % 4) as usize;
        let s = random_scenario(micro, macro_dim, kraus_count, seed)
            .map_err(err)?
            .scenario;
        check(&s, &mut with_v, &mut worst_dual)?;
    }
    let random_hits = with_v;
    let mut rng = rng_from_seed(1004);
    for (d, k) in [(2, 2), (3, 2), (2, 3)] {
        for _ in 0..5 {
            let (s, _) = planted(d, k, &mut rng)?;
            let before = with_v;
            check(&s, &mut with_v, &mut worst_dual)?;
            ensure!(
                with_v == before + 1,
                "planted intertwiner not found (d={d}, k={k})"
            );
        }
    }
    Ok(format!(
        "200 random scenarios ({random_hits} with an intertwiner), 15 planted; max dual identity residual {worst_dual:.2e}"
    ))
}

/// `ρ ↦ ⟨0|ρ|0⟩·|+⟩⟨+| + ⟨1|ρ|1⟩·|0⟩⟨0|` with `U = I`: only the Choi search
/// yields a CPTP map here.
fn measure_prepare() -> Result<Scenario, String> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let k0 = CMatrix::from_real_rows(&[&[h, 0.0], &[h, 0.0]]);
    let k1 = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    Scenario::new(
        KrausChannel::new(vec![k0, k1]).map_err(err)?,
        CMatrix::identity(2),
    )
    .map_err(err)
}

fn kraus_equivalence_round_trip() -> Result<String, String> {
    let mut rng = rng_from_seed(1005);
    let mut scenarios: Vec<Scenario> = registry()
        .map_err(err)?
        .into_iter()
        .map(|n| n.scenario)
        .collect();
    for _ in 0..10 {
        let n = random_axis(&mut rng);
        scenarios.push(
            spin_dichotomization(3, rng.random_range(-PI..PI), n)
                .map_err(err)?
                .scenario,
        );
    }
    for (d, k) in [(2, 2), (3, 2), (2, 3)] {
        scenarios.push(planted(d, k, &mut rng)?.0);
    }
    scenarios.push(measure_prepare()?);
    for seed in 0..10 {
        scenarios.push(random_scenario(3, 2, 2, seed).map_err(err)?.scenario);
    }

    let mut built = 0;
    let mut worst: f64 = 0.0;
    for s in &scenarios {
        if let Some(e) = construct_emergent(s).map_err(err)? {
            built += 1;
            let eq = verify_kraus_equivalence(s, &e.channel).map_err(err)?;
            ensure!(
                eq.equivalent && eq.residual <= 1e-7,
                "emergent map from {} fails equivalence (residual {:.3e})",
                e.source.as_str(),
                eq.residual
            );
            worst = worst.max(eq.residual);
        }
    }

    let mut recover_worst: f64 = 0.0;
    for _ in 0..100 {
        let (din, dout, k) = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let b = random_channel(din, dout, k, &mut rng);
        let n = b.kraus().len() + rng.random_range(0..=2);
        let a = remix(&b, &haar_unitary(n, &mut rng)).map_err(err)?;
        let w = connecting_unitary(&a, &b, 1e-8).map_err(err)?;
        ensure!(w.unitary_defect() < 1e-8, "connecting matrix not unitary");
        let back = remix(&b, &w).map_err(err)?;
        let res = a
            .kraus()
            .iter()
            .zip(back.kraus())
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max);
        ensure!(res <= 1e-7, "plant-and-recover residual {res:.3e}");
        recover_worst = recover_worst.max(res);
    }
    Ok(format!(
        "{built} of {} scenarios yield Γ, max mixing residual {worst:.2e}; 100 planted mixings recovered, max residual {recover_worst:.2e}",
        scenarios.len()
    ))
}

fn representation_integrity() -> Result<String, String> {
    let mut rng = rng_from_seed(1006);
    let (mut rt, mut du): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (din, dout, k) = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let ch = random_channel(din, dout, k, &mut rng);
        let choi = ch.choi().clone();
        let t = ch.transfer();
        let back = choi_to_kraus(&choi, DEFAULT_RANK_TOL).map_err(err)?;
        rt = rt
            .max(back.choi().mat().distance(choi.mat()))
            .max(t.to_choi().mat().distance(choi.mat()))
            .max(choi.to_transfer().mat().distance(t.mat()))
            .max(back.transfer().mat().distance(t.mat()));

        let dual = ch.dual();
        du = du.max(
            dual.apply(&CMatrix::identity(dout))
                .map_err(err)?
                .distance(&CMatrix::identity(din)),
        );
        let a = ginibre(dout, dout, &mut rng);
        let rho = random_mixed_state(din, din, &mut rng);
        let lhs = a.matmul(&ch.apply_operator(&rho).map_err(err)?).trace();
        let rhs = dual.apply(&a).map_err(err)?.matmul(&rho).trace();
        du = du.max((lhs - rhs).norm());
    }
    ensure!(rt <= 1e-8, "round-trip error {rt:.3e}");
    ensure!(du <= 1e-9, "dual error {du:.3e}");
    Ok(format!(
        "100 channels, round-trip error {rt:.2e}, dual error {du:.2e}"
    ))
}

fn classical_exactness() -> Result<String, String> {
    let mut rng = rng_from_seed(1007);
    let mut tp: f64 = 0.0;
    for _ in 0..100 {
        let sizes = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let m = random_chain_model(sizes, &mut rng);
        tp = tp.max(verify_total_probability(&m).map_err(err)?);
    }
    ensure!(tp <= 1e-12, "total probability residual {tp:.3e}");

    let mut inv: f64 = 0.0;
    for _ in 0..100 {
        let (na, nb, nx, ny) = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let m = random_do_model((na, nb, nx, ny), &mut rng);
        let other = m
            .with_x_given_a(random_table(nx, na, &mut rng))
            .map_err(err)?;
        for x in 0..nx {
            let p = do_intervention(&m, x).map_err(err)?;
            let q = do_intervention(&other, x).map_err(err)?;
            inv = p
                .iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(inv, f64::max);
        }
    }
    ensure!(inv <= 1e-12, "do-distribution moved by {inv:.3e}");

    // A drives both X and B; B ignores X
    let m = DoModel::new(
        vec![0.5, 0.5],
        CondTable::from_rows(&[vec![0.95, 0.05], vec![0.05, 0.95]]).map_err(err)?,
        CondTable::from_rows(&[vec![0.95, 0.95, 0.05, 0.05], vec![0.05, 0.05, 0.95, 0.95]])
            .map_err(err)?,
        CondTable::identity(2),
    )
    .map_err(err)?;
    let (obs, intv) = observational_vs_do(&m, 0).map_err(err)?;
    let gap: f64 = obs.iter().zip(&intv).map(|(a, b)| (a - b).abs()).sum();
    ensure!(gap > 0.1, "confounded gap {gap:.3e}");
    Ok(format!(
        "total probability residual {tp:.1e}, do drift {inv:.1e}, confounded obs/do gap {gap:.3}"
    ))
}

fn helstrom_monotonicity() -> Result<String, String> {
    let mut rng = rng_from_seed(1008);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (din, dout, k) = (
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        );
        let phi = random_channel(din, dout, k, &mut rng);
        let r0 = DensityMatrix::new(random_mixed_state(din, rng.random_range(1..=din), &mut rng))
            .map_err(err)?;
        let r1 = DensityMatrix::new(random_mixed_state(din, rng.random_range(1..=din), &mut rng))
            .map_err(err)?;
        let p0 = rng.random_range(0.0..=1.0);
        let before = helstrom_pguess(p0, &r0, &r1).map_err(err)?;
        let after = helstrom_pguess(
            p0,
            &phi.apply(&r0).map_err(err)?,
            &phi.apply(&r1).map_err(err)?,
        )
        .map_err(err)?;
        worst = worst.max(after - before);
    }
    ensure!(worst <= 1e-10, "guessing probability grew by {worst:.3e}");
    Ok(format!(
        "100 post-processings, largest increase {worst:.2e}"
    ))
}

fn cli_end_to_end() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_coarsekit");
    let dir = tempfile::tempdir().map_err(err)?;
    let mp = dir.path().join("mp.json");
    std::fs::write(
        &mp,
        r#"{"version": 1, "D": 2, "d": 2,
  "kraus": [[[[0.7071067811865476, 0], [0, 0]], [[0.7071067811865476, 0], [0, 0]]],
            [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]],
  "unitary": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#,
    )
    .map_err(err)?;
    let nu = dir.path().join("nu.json");
    std::fs::write(
        &nu,
        r#"{"version": 1, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]],
  "unitary": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}"#,
    )
    .map_err(err)?;
    let mp = mp.to_str().unwrap();
    let nu = nu.to_str().unwrap();
    let missing = dir.path().join("missing.json");

    let run = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env_remove("COARSEKIT_SEED")
            .output()
            .map_err(err)
    };
    let cases: [(&[&str], i32); 5] = [
        (&["check", "spin-d3"], 0),
        (&["check", "example1-incompatible"], 1),
        (&["check", mp, "--max-iter", "5"], 2),
        (&["check", missing.to_str().unwrap()], 64),
        (&["check", nu], 65),
    ];
    for (args, want) in cases {
        let code = run(args)?.status.code();
        ensure!(
            code == Some(want),
            "{args:?}: exit {code:?}, expected {want}"
        );
    }
    for name in ["example1-incompatible", "spin-d3"] {
        let a = run(&["check", name, "--seed", "11", "--json", "-"])?.stdout;
        let b = run(&["check", name, "--seed", "11", "--json", "-"])?.stdout;
        ensure!(!a.is_empty() && a == b, "{name}: JSON differs between runs");
    }
    Ok("exit codes 0, 1, 2, 64, 65 observed; JSON byte-identical across runs".into())
}
