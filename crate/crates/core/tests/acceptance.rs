//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the summary is always printed; exits nonzero on any failure.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use qmac::channels::{collective_phase_flip, erasure_mac, random_channel_with, QuantumChannel};
use qmac::information::{
    binary_entropy, channel_coherent_information, coherent_information_between,
    conditional_coherent_information, mutual_information_between, run_property_suite, Direction,
    SuiteConfig,
};
use qmac::linalg::{diag, SubsystemLayout};
use qmac::regions::{
    analytic_erasure_region, cq_input_values, cq_point, cq_state, cq_values, optimize_cq_region,
    optimize_qq_region, qq_corners, regularized_region, CqInput, OptimizerConfig, Pentagon,
    RatePoint, RateRegion, RegionKind, RegionMetadata,
};
use qmac::states::{
    maximally_entangled_on, random_density_with, random_pure_with, rng_from_seed, CqEnsemble,
    DensityMatrix, PureState, CLASSICAL_LABEL,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn h2(p: f64) -> f64 {
    binary_entropy(p).unwrap().0
}

fn erasure_ensemble(q: f64) -> CqEnsemble {
    CqEnsemble::new(
        vec![q, 1.0 - q],
        vec![
            PureState::basis(2, 0, "A'").unwrap(),
            PureState::basis(2, 1, "A'").unwrap(),
        ],
        maximally_entangled_on(2, "B", "B'").unwrap(),
    )
    .unwrap()
}

fn full_config(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        restarts: 20,
        seed,
        ..OptimizerConfig::default()
    }
}

fn criterion_1(erasure_region: &RateRegion, elapsed: f64) -> Outcome {
    let ch = erasure_mac(2).unwrap();
    let qs = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let mut worst_exact: f64 = 0.0;
    for q in qs {
        let pt = cq_point(&ch, &erasure_ensemble(q)).map_err(|e| e.to_string())?;
        worst_exact = worst_exact
            .max((pt.rectangle.a_max - h2(q)).abs())
            .max((pt.rectangle.b_max - (1.0 - 2.0 * q)).abs());
    }
    ensure(worst_exact <= 1e-9, || {
        format!("cq_point off by {worst_exact:e}")
    })?;
    for q in qs {
        let target = RatePoint(h2(q), 1.0 - 2.0 * q);
        ensure(erasure_region.contains(target, 0.02), || {
            format!("optimized region misses ({:.4}, {:.4})", target.0, target.1)
        })?;
    }
    ensure(elapsed < 300.0, || {
        format!("optimization took {elapsed:.1} s")
    })?;
    Ok(format!(
        "cq_point error {worst_exact:.1e}; all 6 analytic points within 0.02; optimizer {elapsed:.1} s"
    ))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.0, 0.1, 0.25, 0.5] {
        let ch = collective_phase_flip(p).unwrap();
        let pent = qq_corners(
            &ch,
            &maximally_entangled_on(2, "A", "A'").unwrap(),
            &maximally_entangled_on(2, "B", "B'").unwrap(),
        )
        .map_err(|e| e.to_string())?;
        worst = worst
            .max((pent.a_max - 1.0).abs())
            .max((pent.b_max - 1.0).abs())
            .max((pent.sum_max - (2.0 - h2(p))).abs());
    }
    ensure(worst <= 1e-9, || format!("qq_corners off by {worst:e}"))?;
    let ch = collective_phase_flip(0.1).unwrap();
    let region = optimize_qq_region(&ch, &full_config(2)).map_err(|e| e.to_string())?;
    let gap = (region.max_sum_rate() - (2.0 - h2(0.1))).abs();
    ensure(gap <= 0.01, || {
        format!("optimized sum rate off by {gap:.4}")
    })?;
    Ok(format!(
        "qq_corners error {worst:.1e}; optimized sum rate within {gap:.1e}"
    ))
}

fn ic(rho: &DensityMatrix, ch: &QuantumChannel) -> f64 {
    channel_coherent_information(rho, ch).unwrap().0
}

fn rho_alpha(alpha: f64, layout: &SubsystemLayout) -> DensityMatrix {
    let m = diag(&[
        alpha / 2.0,
        (1.0 - alpha) / 2.0,
        (1.0 - alpha) / 2.0,
        alpha / 2.0,
    ]);
    DensityMatrix::new(m, layout.clone()).unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(3);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut alpha_err: f64 = 0.0;
    for p in [0.1, 0.3] {
        let ch = collective_phase_flip(p).unwrap();
        let layout = ch.input_layout().clone();
        for _ in 0..1000 {
            let rank0 = rng.random_range(1..=4);
            let rank1 = rng.random_range(1..=4);
            let r0 = random_density_with(&mut rng, 4, rank0)
                .unwrap()
                .with_layout(layout.clone())
                .unwrap();
            let r1 = random_density_with(&mut rng, 4, rank1)
                .unwrap()
                .with_layout(layout.clone())
                .unwrap();
            let lambda: f64 = rng.random();
            let mix = r0.mix(&r1, lambda).unwrap();
            let violation = lambda * ic(&r0, &ch) + (1.0 - lambda) * ic(&r1, &ch) - ic(&mix, &ch);
            worst = worst.max(violation);
        }
        // golden-section search for the maximizing alpha of the diagonal family
        let f = |a: f64| ic(&rho_alpha(a, &layout), &ch);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut f1, mut f2) = (f(x1), f(x2));
        while hi - lo > 1e-9 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            }
        }
        let a_star = 0.5 * (lo + hi);
        alpha_err = alpha_err.max((a_star - 0.5).abs());
        let at_half = f(0.5);
        ensure((at_half - (2.0 - h2(p))).abs() < 1e-9, || {
            format!("I_c(rho_1/2) = {at_half}, expected 2 - H({p})")
        })?;
    }
    ensure(worst <= 1e-9, || format!("concavity violated by {worst:e}"))?;
    ensure(alpha_err <= 1e-6, || {
        format!("argmax alpha off by {alpha_err:e}")
    })?;
    Ok(format!(
        "2000 triples, worst violation {worst:.1e}; argmax alpha within {alpha_err:.1e} of 1/2"
    ))
}

fn criterion_4() -> Outcome {
    let reports = run_property_suite(&SuiteConfig {
        trials: 1000,
        dims: vec![2, 3, 4],
        seed: 42,
    });
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} ({} violations)", r.check, r.violations))
        .collect();
    ensure(failed.is_empty(), || failed.join(", "))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_qmac"))
        .args(["props", "--trials", "1000", "--seed", "42", "--out"])
        .arg(dir.path().join("props.json"))
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(status.code() == Some(0), || {
        format!("`props` exited with {status}")
    })?;
    let worst = reports
        .iter()
        .map(|r| r.worst_violation)
        .fold(0.0, f64::max);
    Ok(format!(
        "{} checks x 1000 trials, zero violations (worst excess {worst:.1e}); props exit 0",
        reports.len()
    ))
}

fn as_mac(ch: QuantumChannel, da: usize, db: usize) -> QuantumChannel {
    let dout = ch.dout();
    ch.with_layouts(
        SubsystemLayout::new(vec![da, db], vec!["A'", "B'"]).unwrap(),
        SubsystemLayout::single(dout, "C"),
    )
    .unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = rng_from_seed(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (d1, d2) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let (o1, e1, o2, e2) = (
            rng.random_range(2..=3),
            rng.random_range(2..=3),
            rng.random_range(2..=3),
            rng.random_range(2..=3),
        );
        let n1 = random_channel_with(&mut rng, d1, o1, e1);
        let n2 = random_channel_with(&mut rng, d2, o2, e2);
        let n2 = n2
            .clone()
            .with_layouts(
                n2.input_layout().relabel("A'", "A2").unwrap(),
                n2.output_layout().relabel("B", "B2").unwrap(),
            )
            .unwrap();
        let (k1, k2) = (rng.random_range(1..=d1), rng.random_range(1..=d2));
        let r1 = random_density_with(&mut rng, d1, k1).unwrap();
        let r1 = r1.with_layout(n1.input_layout().clone()).unwrap();
        let r2 = random_density_with(&mut rng, d2, k2).unwrap();
        let r2 = r2.with_layout(n2.input_layout().clone()).unwrap();
        let joint = ic(&r1.tensor(&r2).unwrap(), &n1.tensor(&n2).unwrap());
        worst = worst.max((joint - ic(&r1, &n1) - ic(&r2, &n2)).abs());
    }
    ensure(worst <= 1e-9, || format!("additivity off by {worst:e}"))?;

    // product construction: half the uses at q0, half at q1
    let (q0, q1) = (0.1, 0.4);
    let ch = erasure_mac(2).unwrap();
    let ch2 = ch.tensor_power(2).unwrap();
    let a = CqInput::from_ensemble(&erasure_ensemble(q0)).unwrap();
    let b = CqInput::from_ensemble(&erasure_ensemble(q1)).unwrap();
    let v = cq_input_values(&ch2, &a.tensor(&b))
        .map_err(|e| e.to_string())?
        .scaled(0.5);
    let mid = RatePoint(
        0.5 * (h2(q0) + h2(q1)),
        0.5 * ((1.0 - 2.0 * q0) + (1.0 - 2.0 * q1)),
    );
    let err = (v.mutual_c - mid.0)
        .abs()
        .max((v.coherent_cx - mid.1).abs());
    ensure(err <= 1e-9, || {
        format!("product point off the midpoint by {err:e}")
    })?;
    let product_region = RateRegion::from_generators(
        vec![Pentagon::rectangle(v.mutual_c, v.coherent_cx)],
        2,
        false,
        RegionMetadata::default(),
    );
    ensure(product_region.contains(mid, 1e-9), || {
        "region_contains rejects the midpoint".into()
    })?;
    let oracle = analytic_erasure_region(2, 51).unwrap();
    ensure(oracle.contains(mid, 1e-9), || {
        "analytic region rejects the midpoint".into()
    })?;
    Ok(format!(
        "200 product instances within {worst:.1e}; k=2 product hits the midpoint within {err:.1e}"
    ))
}

fn criterion_6(m5: &RateRegion) -> Outcome {
    let ch = erasure_mac(2).unwrap();
    let cfg = OptimizerConfig {
        ensemble_size: Some(10),
        ..full_config(11)
    };
    let m10 = optimize_cq_region(&ch, &cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (a, b) in m5.metadata.sweep.iter().zip(&m10.metadata.sweep) {
        worst = worst.max((a.objective - b.objective).abs());
    }
    ensure(m5.metadata.ensemble_size == Some(5), || {
        "default ensemble size is not 5".into()
    })?;
    ensure(worst <= 0.01, || {
        format!("frontiers differ by {worst:.4} bits")
    })?;
    Ok(format!(
        "|X| = 5 vs 10: largest difference over {} weights {worst:.1e} bits",
        m5.metadata.sweep.len()
    ))
}

fn criterion_7() -> Outcome {
    // the k = 2 search starts from the product of the k = 1 optimum, so a
    // short budget suffices
    let cfg = OptimizerConfig {
        restarts: 1,
        max_iters: 300,
        seed: 7,
        ..OptimizerConfig::default()
    };
    let mut notes = Vec::new();
    for (name, ch, kind) in [
        ("erasure", erasure_mac(2).unwrap(), RegionKind::Cq),
        (
            "phase flip",
            collective_phase_flip(0.1).unwrap(),
            RegionKind::Qq,
        ),
    ] {
        let k1 = regularized_region(&ch, kind, 1, &cfg).map_err(|e| e.to_string())?;
        let k2 = regularized_region(&ch, kind, 2, &cfg).map_err(|e| e.to_string())?;
        ensure(k2.contains_region(&k1, 0.02), || {
            format!("{name}: k=2 region does not contain the k=1 region")
        })?;
        k2.check_invariants(1e-9)
            .map_err(|e| format!("{name}: {e}"))?;
        notes.push(format!("{name} ok"));
    }
    Ok(format!(
        "(1/2) region(N^2) contains region(N) within 0.02: {}",
        notes.join(", ")
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = rng_from_seed(8);
    let mut worst: f64 = 0.0;
    let mut worst_dual: f64 = 0.0;
    for _ in 0..200 {
        let (da, db): (usize, usize) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let dout: usize = rng.random_range(2..=4);
        let min_env = (da * db).div_ceil(dout);
        let denv = rng.random_range(min_env..=min_env + 2);
        let ch = as_mac(random_channel_with(&mut rng, da * db, dout, denv), da, db);
        let m = rng.random_range(1..=4);
        let probs: Vec<f64> = {
            let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.05).collect();
            let t: f64 = w.iter().sum();
            w.iter().map(|x| x / t).collect()
        };
        let states = (0..m)
            .map(|_| {
                let s = random_pure_with(&mut rng, da).unwrap();
                PureState::new(s.amplitudes().clone(), SubsystemLayout::single(da, "A'")).unwrap()
            })
            .collect();
        let r = random_pure_with(&mut rng, db * db).unwrap();
        let reference = PureState::new(
            r.amplitudes().clone(),
            SubsystemLayout::new(vec![db, db], vec!["B", "B'"]).unwrap(),
        )
        .unwrap();
        let ens = CqEnsemble::new(probs, states, reference).unwrap();
        let v = cq_values(&ch, &ens).map_err(|e| e.to_string())?;
        worst = worst.max((v.mutual_c + v.coherent_cx - v.mutual_bc - v.coherent_c).abs());
        // independent density-matrix route
        let cqq = cq_state(&ch, &ens).map_err(|e| e.to_string())?;
        let sigma = cqq.assemble();
        let x = CLASSICAL_LABEL;
        let lhs = mutual_information_between(&sigma, &[x], &["C"]).unwrap().0
            + conditional_coherent_information(&cqq, Direction::FirstToSecond)
                .unwrap()
                .0;
        let rhs = mutual_information_between(&sigma, &[x], &["B", "C"])
            .unwrap()
            .0
            + coherent_information_between(&sigma, &["B"], &["C"])
                .unwrap()
                .0;
        worst_dual = worst_dual
            .max((lhs - rhs).abs())
            .max((lhs - v.mutual_c - v.coherent_cx).abs());
    }
    ensure(worst <= 1e-9 && worst_dual <= 1e-9, || {
        format!("identity off by {worst:e} (density route {worst_dual:e})")
    })?;
    Ok(format!(
        "200 instances: identity within {worst:.1e}, density route within {worst_dual:.1e}"
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qmac"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "`qmac {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn criterion_9() -> Outcome {
    let state = r#"{"matrix": [[[0.5,0],[0,0],[0,0],[0.5,0]],[[0,0],[0,0],[0,0],[0,0]],
        [[0,0],[0,0],[0,0],[0,0]],[[0.5,0],[0,0],[0,0],[0.5,0]]], "dims": [2, 2]}"#;
    let commands: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (
            vec![
                "region",
                "cq",
                "--builtin",
                "erasure",
                "--d",
                "2",
                "--seed",
                "7",
                "--restarts",
                "2",
                "--max-iters",
                "300",
                "--weights",
                "6",
                "--out",
                "r.json",
            ],
            vec!["r.json", "r.csv"],
        ),
        (
            vec![
                "region",
                "qq",
                "--builtin",
                "phase_flip",
                "--p",
                "0.1",
                "--seed",
                "3",
                "--restarts",
                "2",
                "--max-iters",
                "300",
                "--weights",
                "6",
                "--out",
                "q.json",
            ],
            vec!["q.json", "q.csv"],
        ),
        (
            vec![
                "props",
                "--trials",
                "20",
                "--seed",
                "42",
                "--out",
                "props.json",
            ],
            vec!["props.json"],
        ),
        (
            vec![
                "plot", "--region", "r.json", "--oracle", "erasure", "--out", "r.svg",
            ],
            vec!["r.svg"],
        ),
        (
            vec!["eval", "ic", "--state", "bell.json", "--out", "ic.json"],
            vec!["ic.json"],
        ),
    ];
    let mut runs: Vec<Vec<Vec<u8>>> = Vec::new();
    let mut manifests: Vec<Vec<serde_json::Value>> = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        std::fs::write(dir.path().join("bell.json"), state).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        let mut hashes = Vec::new();
        for (args, files) in &commands {
            run_cli(dir.path(), args)?;
            for f in files {
                outputs.push(std::fs::read(dir.path().join(f)).map_err(|e| format!("{f}: {e}"))?);
            }
            let manifest_path = dir
                .path()
                .join(Path::new(files[0]).with_extension("manifest.json"));
            let text = std::fs::read_to_string(&manifest_path).map_err(|e| e.to_string())?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            hashes.push(v["outputs"].clone());
        }
        runs.push(outputs);
        manifests.push(hashes);
    }
    let n = runs[0].len();
    ensure(runs[0] == runs[1], || {
        "outputs differ between identical runs".into()
    })?;
    ensure(manifests[0] == manifests[1], || {
        "manifest output hashes differ".into()
    })?;
    Ok(format!(
        "{} commands, {n} output files byte-identical across reruns",
        commands.len()
    ))
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn main() {
    let started = Instant::now();
    let t = Instant::now();
    let erasure_region = optimize_cq_region(&erasure_mac(2).unwrap(), &full_config(11));
    let elapsed = t.elapsed().as_secs_f64();

    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut run = |n, name, f: &dyn Fn() -> Outcome| {
        let (out, secs) = timed(f);
        results.push((n, name, out, secs));
    };
    match &erasure_region {
        Ok(region) => {
            run(1, "erasure CQ region", &|| criterion_1(region, elapsed));
            run(6, "cardinality sufficiency", &|| criterion_6(region));
        }
        Err(e) => {
            run(1, "erasure CQ region", &|| Err(e.to_string()));
            run(6, "cardinality sufficiency", &|| Err(e.to_string()));
        }
    }
    run(2, "phase-flip pentagon", &criterion_2);
    run(3, "degradable concavity", &criterion_3);
    run(4, "inequality suite", &criterion_4);
    run(5, "additivity and time sharing", &criterion_5);
    run(7, "regularization monotonicity", &criterion_7);
    run(8, "CQ pentagon identity", &criterion_8);
    run(9, "determinism", &criterion_9);
    results.sort_by_key(|r| r.0);

    let mut failures = 0;
    for (n, name, outcome, secs) in &results {
        match outcome {
            Ok(msg) => println!("criterion {n} [{name}]: PASS - {msg} [{secs:.1} s]"),
            Err(msg) => {
                failures += 1;
                println!("criterion {n} [{name}]: FAIL - {msg} [{secs:.1} s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed ({:.1} s)",
        results.len() - failures,
        started.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
