//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use freqbeam::components::{compile_component, fbs_unitary, AomCoupler, Compiled};
use freqbeam::device::{self, AcousticDrive, AomGeometry, MaterialTable};
use freqbeam::fock::{enumerate_occupations, ModeUnitary};
use freqbeam::io::{parse_circuit, run_document, Circuit, CircuitDocument};
use freqbeam::scenarios::{
    run_biexciton_fbs, run_biexciton_fbs_prime, run_erasure, run_hom, BiexcitonConfig,
    ErasureConfig,
};
use freqbeam::{
    apply_mode_unitary, transition_amplitude_oracle, Mode, ModeRegistry, Occupation, Polarization,
    PureState,
};

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn grid(n: usize, to: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| to * i as f64 / (n - 1) as f64)
}

fn criterion_1() -> Outcome {
    let mut reg = ModeRegistry::new();
    let wi = reg.add_bin("wi", 3.30001e14).unwrap();
    let wd = reg.add_bin("wd", 3.3e14).unwrap();
    let i = reg
        .add_mode(Mode::new("beam", wi, Polarization::None))
        .unwrap();
    let d = reg
        .add_mode(Mode::new("beam", wd, Polarization::None))
        .unwrap();
    let reg = Arc::new(reg);
    let u = fbs_unitary(&AomCoupler::new("fbs", vec![(i, d)], FRAC_PI_4, 1e9), &reg)
        .map_err(|e| e.to_string())?;
    let h = FRAC_1_SQRT_2;
    let mut worst: f64 = 0.0;
    for (input, expect) in [
        (i, [Complex64::new(h, 0.0), Complex64::new(0.0, h)]),
        (d, [Complex64::new(0.0, h), Complex64::new(h, 0.0)]),
    ] {
        let occ = Occupation::from_pairs(2, &[(input, 1)]).unwrap();
        let out =
            apply_mode_unitary(&PureState::basis(Arc::clone(&reg), occ).unwrap(), &u).unwrap();
        for (m, e) in [i, d].into_iter().zip(expect) {
            let a = out.amplitude(&Occupation::from_pairs(2, &[(m, 1)]).unwrap());
            worst = worst.max((a - e).norm());
        }
    }
    // the prism-enclosed document compiles to the same map
    let doc = load("frequency_beam_splitter.json")?;
    let circuit = Circuit::build(&doc).map_err(|e| e.to_string())?;
    let compiled = freqbeam::io::compiled_unitary(&circuit).map_err(|e| e.to_string())?;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max((compiled[(r, c)] - u[(r, c)]).norm());
        }
    }
    check(worst <= 1e-12, format!("max amplitude error {worst:e}"))?;
    Ok(format!("max amplitude error {worst:.1e} (<= 1e-12)"))
}

fn criterion_2() -> Outcome {
    let half = device::conversion_efficiency(FRAC_PI_4);
    let full = device::conversion_efficiency(FRAC_PI_2);
    check(
        (half - 0.5).abs() <= 1e-12 && (full - 1.0).abs() <= 1e-12,
        format!("{half}, {full}"),
    )?;
    Ok(format!("sin²(π/4) = {half}, sin²(π/2) = {full}"))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for theta in grid(100, FRAC_PI_2) {
        let r = run_hom(&ErasureConfig::with_theta(theta)).map_err(|e| e.to_string())?;
        let expect = (2.0 * theta).cos().powi(2);
        worst = worst.max((r.metrics["coincidence"] - expect).abs());
        worst = worst.max((r.metrics["coincidence_oracle"] - expect).abs());
    }
    let dip = run_hom(&ErasureConfig::with_theta(FRAC_PI_4)).map_err(|e| e.to_string())?;
    let (sim, oracle) = (
        dip.metrics["coincidence"],
        dip.metrics["coincidence_oracle"],
    );
    check(worst <= 1e-10, format!("grid error {worst:e}"))?;
    check(
        sim.abs() <= 1e-15 && oracle.abs() <= 1e-15,
        format!("dip {sim:e} / oracle {oracle:e}"),
    )?;
    Ok(format!(
        "grid error {worst:.1e} (<= 1e-10); dip {sim:.1e}, oracle {oracle:.1e}"
    ))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for theta in grid(100, FRAC_PI_2) {
        let r = run_erasure(&ErasureConfig::with_theta(theta)).map_err(|e| e.to_string())?;
        worst =
            worst.max((r.which_way_distinguishability.unwrap() - (2.0 * theta).cos().abs()).abs());
    }
    let r = run_erasure(&ErasureConfig::with_theta(FRAC_PI_4)).map_err(|e| e.to_string())?;
    let d = r.which_way_distinguishability.unwrap();
    let clicks: Vec<f64> = r
        .outcomes
        .iter()
        .filter(|o| o.outcome != "no-click")
        .map(|o| o.probability)
        .collect();
    check(worst <= 1e-10, format!("grid error {worst:e}"))?;
    check(d.abs() <= 1e-10, format!("D(π/4) = {d:e}"))?;
    check(
        clicks.len() == 2 && clicks.iter().all(|p| (p - 0.5).abs() <= 1e-10),
        format!("clicks {clicks:?}"),
    )?;
    Ok(format!(
        "grid error {worst:.1e}; D(π/4) = {d:.1e}; clicks {clicks:?}"
    ))
}

fn criterion_5() -> Outcome {
    let run = |theta: f64, phase: f64| {
        run_biexciton_fbs(&BiexcitonConfig {
            theta,
            phase,
            ..BiexcitonConfig::default()
        })
        .map_err(|e| e.to_string())
    };
    let c0 = run(0.0, 0.0)?.concurrence.unwrap();
    check(c0.abs() <= 1e-12, format!("C(0) = {c0}"))?;
    let mut worst_f: f64 = 0.0;
    for phase in [0.0, PI / 3.0, PI] {
        let r = run(FRAC_PI_2, phase)?;
        check(
            (r.concurrence.unwrap() - 1.0).abs() <= 1e-12,
            format!("C(π/2) = {:?}", r.concurrence),
        )?;
        worst_f = worst_f.max((r.fidelity_to_target.unwrap() - 1.0).abs());
    }
    check(worst_f <= 1e-12, format!("fidelity error {worst_f:e}"))?;
    let mut worst: f64 = 0.0;
    for theta in grid(25, FRAC_PI_2) {
        worst = worst.max((run(theta, 0.4)?.concurrence.unwrap() - theta.sin().powi(2)).abs());
    }
    check(worst <= 1e-9, format!("grid error {worst:e}"))?;
    Ok(format!(
        "C(0) = {c0:.1e}; fidelity error at π/2 {worst_f:.1e}; sin²θ grid error {worst:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let run = |alpha: f64, a: f64| {
        run_biexciton_fbs_prime(&BiexcitonConfig {
            shift_efficiency: alpha,
            absorption: a,
            ..BiexcitonConfig::default()
        })
        .map_err(|e| e.to_string())
    };
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.3, 0.5, 0.8, 1.0] {
        for a in [0.0, 0.0005, 0.01, 0.05] {
            let r = run(alpha, a)?;
            worst = worst.max((r.success_probability - (alpha * (1.0 - a)).powi(2)).abs());
        }
    }
    let r = run(0.8, 0.0005)?;
    let p = r.success_probability;
    let bound = 0.95f64.powi(2) * 0.64;
    check(worst <= 1e-12, format!("α²(1−a)² error {worst:e}"))?;
    check((p - 0.63936).abs() <= 1e-6, format!("success {p}"))?;
    check(p >= bound, format!("{p} < {bound}"))?;
    Ok(format!(
        "success {p:.8} (0.63936 ± 1e-6) >= {bound:.4}; α²(1−a)² error {worst:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let gap = MaterialTable::builtin()
        .get("GaP")
        .map_err(|e| e.to_string())?
        .crystal();
    let drive = AcousticDrive {
        intensity: 1e6,
        modulation_frequency: 1e9,
    };
    let r = device::interaction_r(
        &gap,
        &drive,
        &AomGeometry {
            interaction_length: 1e-3,
        },
    )
    .map_err(|e| e.to_string())?;
    check((1e-16..=1e-14).contains(&r), format!("R = {r:e}"))?;
    let omega = 2.0 * PI * 3.3e14;
    let errors: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|dr| device::bandwidth_ratio(omega, dr / r, r).map(|b| b.error()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    check(
        ratios.iter().all(|q| (3.5..=4.5).contains(q)),
        format!("error ratios {ratios:?} (errors {errors:?})"),
    )?;
    Ok(format!(
        "GaP R = {r:.2e} s at 1e6 W/m², 1 mm; first-order error ratios {:.3}, {:.3} (quadratic: 4)",
        ratios[0], ratios[1]
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for _ in 0..100 {
        let modes = rng.random_range(1..=6);
        let mut reg = ModeRegistry::new();
        let w = reg.add_bin("w", 3e14).unwrap();
        for m in 0..modes {
            reg.add_mode(Mode::new(format!("p{m}"), w, Polarization::None))
                .unwrap();
        }
        let reg = Arc::new(reg);
        let u = ModeUnitary::random(modes, &mut rng);
        for photons in 0..=2 {
            let outs = enumerate_occupations(modes, photons);
            for input in &outs {
                let evolved = apply_mode_unitary(
                    &PureState::basis(Arc::clone(&reg), input.clone()).unwrap(),
                    &u,
                )
                .map_err(|e| e.to_string())?;
                for output in &outs {
                    let oracle = transition_amplitude_oracle(input, output, &u)
                        .map_err(|e| e.to_string())?;
                    worst = worst.max((evolved.amplitude(output) - oracle).norm());
                    compared += 1;
                }
            }
        }
    }
    check(worst <= 1e-10, format!("max diff {worst:e}"))?;
    Ok(format!(
        "{compared} amplitudes over 100 Haar unitaries, max diff {worst:.1e} (<= 1e-10)"
    ))
}

fn circuits_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("circuits")
}

fn load(name: &str) -> Result<CircuitDocument, String> {
    let text =
        std::fs::read_to_string(circuits_dir().join(name)).map_err(|e| format!("{name}: {e}"))?;
    parse_circuit(&text).map_err(|e| format!("{name}: {e}"))
}

const SHIPPED: [&str; 5] = [
    "frequency_beam_splitter.json",
    "which_way_erasure.json",
    "two_source_interference.json",
    "biexciton_rectifier.json",
    "heralded_rectifier.json",
];

fn criterion_9() -> Outcome {
    let mut unitaries = 0;
    let mut worst_dev: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for name in SHIPPED {
        let doc = load(name)?;
        let circuit = Circuit::build(&doc).map_err(|e| format!("{name}: {e}"))?;
        for c in circuit.components() {
            if let Compiled::Unitary(u) =
                compile_component(c, &circuit.registry).map_err(|e| e.to_string())?
            {
                worst_dev = worst_dev.max(u.deviation());
                unitaries += 1;
            }
        }
        let reparsed =
            parse_circuit(&doc.to_json()).map_err(|e| format!("{name} round trip: {e}"))?;
        check(
            reparsed == doc,
            format!("{name}: round trip changed the document"),
        )?;
        let a = run_document(&doc).map_err(|e| format!("{name}: {e}"))?;
        let b = run_document(&reparsed).map_err(|e| format!("{name}: {e}"))?;
        check(
            a.comparable_json() == b.comparable_json(),
            format!("{name}: runs differ"),
        )?;
        for d in &a.detections {
            let total: f64 = d.outcomes.iter().map(|o| o.probability).sum();
            worst_sum = worst_sum.max((total - 1.0).abs());
        }
        for h in &a.heralds {
            worst_sum = worst_sum.max((h.click + h.no_click - 1.0).abs());
        }
    }
    check(
        worst_dev <= 1e-12,
        format!("unitarity deviation {worst_dev:e}"),
    )?;
    check(
        worst_sum <= 1e-9,
        format!("probability sum error {worst_sum:e}"),
    )?;
    Ok(format!(
        "{unitaries} compiled unitaries, max |UU†−I| {worst_dev:.1e}; probability sums within {worst_sum:.1e}; \
         {} documents round-trip and run deterministically",
        SHIPPED.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("FBS single-photon map", criterion_1),
        ("conversion efficiency", criterion_2),
        ("HOM dip", criterion_3),
        ("which-way erasure", criterion_4),
        ("biexciton rectification", criterion_5),
        ("heralded FBS' success", criterion_6),
        ("device physics", criterion_7),
        ("oracle equivalence", criterion_8),
        ("structural invariants", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
