//! Acceptance harness: one PASS/FAIL line per criterion, indented detail
//! below it.
//!
//! Failures are reported, not hidden: by default the process exits 0 so the
//! rest of `cargo test` still runs; set `ACCEPTANCE_STRICT=1` to exit 1 when
//! any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use vem_spectra::adapt::{refine_fem, refine_vem, Strategy};
use vem_spectra::eig::{solve_smallest, EigOptions};
use vem_spectra::experiment::{run_test1, run_test2, ExperimentConfig, MeshFamily, Test1Result};
use vem_spectra::mesh::{
    generate_hexagonal_mesh, generate_trapezoidal_mesh, generate_triangle_mesh, generate_vessel_mesh,
    PolyMesh,
};
use vem_spectra::vem::{assemble, Material, StabilizationScaling};

const TRAPEZOID_TABLE: [[f64; 4]; 6] = [
    [2977.026, 2955.750, 2948.391, 2945.748],
    [7386.910, 7362.542, 7353.758, 7350.500],
    [7992.109, 7910.264, 7888.147, 7881.905],
    [13100.223, 12838.752, 12770.544, 12752.434],
    [13289.395, 13122.017, 13072.453, 13057.320],
    [15209.829, 14975.380, 14912.534, 14895.790],
];
const TRAPEZOID_ORDERS: [f64; 6] = [1.52, 1.46, 1.88, 1.93, 1.75, 1.90];
const TRAPEZOID_LIMIT: f64 = 2944.387;
const HEXAGON_ORDERS: [f64; 6] = [1.41, 1.51, 1.87, 1.83, 1.72, 1.98];
const HEXAGON_LIMIT: f64 = 2943.964;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

fn report(number: usize, title: &str, started: Instant, outcome: &Outcome) {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {number} {verdict}  {title}: {} [{:.1} s]",
        outcome.summary,
        started.elapsed().as_secs_f64()
    );
    for line in &outcome.details {
        println!("    {line}");
    }
}

fn oracle_equivalence() -> Outcome {
    let mut details = Vec::new();
    let (mut matrices, mut eigen) = (0.0f64, 0.0f64);
    for (name, mesh, material) in triangle_meshes() {
        let (a, b, l) = oracle_defects(&mesh, &material, 6);
        details.push(format!(
            "{name}: {} dofs, stiffness {a:.1e}, mass {b:.1e}, eigenvalues {l:.1e}",
            2 * mesh.dirichlet_vertices().iter().filter(|f| !**f).count()
        ));
        matrices = matrices.max(a).max(b);
        eigen = eigen.max(l);
    }
    Outcome {
        pass: matrices <= 1e-12 && eigen <= 1e-10,
        summary: format!("matrix defect {matrices:.1e} (tol 1e-12), eigenvalue defect {eigen:.1e} (tol 1e-10)"),
        details,
    }
}

fn property_suite() -> Outcome {
    let pool = sample_elements(250, 2024);
    let mut rng = rng(99);
    let mut total = PropertyDefects::default();
    let mut kinds = std::collections::BTreeMap::<&str, usize>::new();
    for (kind, points) in &pool {
        let material = if kinds.get(kind).unwrap_or(&0).is_multiple_of(2) {
            Material::steel()
        } else {
            random_material(&mut rng)
        };
        total.merge(&check_element(points, &material, &mut rng));
        *kinds.entry(kind).or_default() += 1;
    }
    let mut details: Vec<String> = total
        .named()
        .iter()
        .map(|(name, v)| format!("{name}: worst relative defect {v:.1e}"))
        .collect();
    details.push(format!("elements: {kinds:?}"));
    Outcome {
        pass: total.worst() <= PROPERTY_TOL,
        summary: format!("{} elements, worst defect {:.1e} (tol {PROPERTY_TOL:.0e})", pool.len(), total.worst()),
        details,
    }
}

fn square_study(family: MeshFamily, scaling: StabilizationScaling) -> Test1Result {
    let mut config = ExperimentConfig::square(family);
    config.stabilization = scaling;
    run_test1(&config).expect("uniform study")
}

fn fit_lines(result: &Test1Result, orders: &[f64; 6]) -> (Vec<String>, f64) {
    let mut worst: f64 = 0.0;
    let lines = result
        .fits
        .iter()
        .zip(orders)
        .enumerate()
        .map(|(i, (fit, &expected))| match fit {
            Some(fit) => {
                worst = worst.max((fit.order - expected).abs());
                format!(
                    "mode {}: order {:.2} (table {expected:.2}), extrapolated {:.3}",
                    i + 1,
                    fit.order,
                    fit.limit
                )
            }
            None => {
                worst = f64::INFINITY;
                format!("mode {}: no fit", i + 1)
            }
        })
        .collect();
    (lines, worst)
}

fn trapezoid_checks(result: &Test1Result) -> (bool, String, Vec<String>) {
    let mut details = Vec::new();
    let mut misses = 0;
    let mut worst: f64 = 0.0;
    for (k, run) in result.runs.iter().enumerate() {
        let devs: Vec<f64> = (0..6)
            .map(|i| run.frequencies[i] / TRAPEZOID_TABLE[i][k] - 1.0)
            .collect();
        misses += devs.iter().filter(|d| d.abs() > 0.01).count();
        worst = devs.iter().fold(worst, |a, d| a.max(d.abs()));
        details.push(format!(
            "n={:>3} ({} dofs): deviations {}",
            run.n,
            run.dofs,
            devs.iter().map(|d| format!("{:+.2}%", 100.0 * d)).collect::<Vec<_>>().join(" ")
        ));
    }
    let (fit_lines, order_dev) = fit_lines(result, &TRAPEZOID_ORDERS);
    details.extend(fit_lines);
    let limit = result.fits[0].map_or(f64::NAN, |f| f.limit);
    let limit_dev = (limit / TRAPEZOID_LIMIT - 1.0).abs();
    let pass = misses == 0 && limit_dev <= 0.005 && order_dev <= 0.3;
    let summary = format!(
        "{misses}/24 entries outside 1% (worst {:.2}%), extrapolated {limit:.2} ({:.3}% off), worst order deviation {order_dev:.2}",
        100.0 * worst,
        100.0 * limit_dev
    );
    (pass, summary, details)
}

fn hexagon_checks(result: &Test1Result) -> (bool, String, Vec<String>) {
    let mut details: Vec<String> = result
        .runs
        .iter()
        .map(|run| format!("n={:>3} ({} dofs): {:.3?}", run.n, run.dofs, run.frequencies))
        .collect();
    let (fit_lines, order_dev) = fit_lines(result, &HEXAGON_ORDERS);
    details.extend(fit_lines);
    let limit = result.fits[0].map_or(f64::NAN, |f| f.limit);
    let limit_dev = (limit / HEXAGON_LIMIT - 1.0).abs();
    let pass = limit_dev <= 0.005 && order_dev <= 0.4;
    let summary = format!(
        "extrapolated {limit:.2} ({:.3}% off), worst order deviation {order_dev:.2}",
        100.0 * limit_dev
    );
    (pass, summary, details)
}

fn table1(
    family: MeshFamily,
    checks: fn(&Test1Result) -> (bool, String, Vec<String>),
) -> Outcome {
    let (pass, summary, mut details) = checks(&square_study(family, StabilizationScaling::default()));
    // Not part of the verdict: how the alternative trace scaling fares.
    let (alt_pass, alt_summary, _) = checks(&square_study(family, StabilizationScaling::Trace));
    details.push(format!(
        "supplementary, trace stabilization scaling: {} - {alt_summary}",
        if alt_pass { "would pass" } else { "would fail" }
    ));
    Outcome { pass, summary, details }
}

fn adaptive_rates(config: &ExperimentConfig) -> (Outcome, Outcome) {
    let result = run_test2(config).expect("adaptive study");
    let expected = [
        (Strategy::Vem, -1.0),
        (Strategy::Fem, -0.98),
        (Strategy::Uniform, -0.73),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut details = Vec::new();
    for (strategy, target) in expected {
        let run = result.run(strategy).expect("strategy run");
        let rate = run.rate.map_or(f64::NAN, |r| r.exponent);
        pass &= (rate - target).abs() <= 0.15;
        parts.push(format!("{} {rate:.3} (target {target})", strategy.name()));
        details.push(format!(
            "{}: {} steps, N {} -> {}, error {:.3e} -> {:.3e}",
            strategy.name(),
            run.steps.len(),
            run.steps[0].dofs,
            run.steps.last().unwrap().dofs,
            run.steps[0].error.unwrap_or(f64::NAN),
            run.steps.last().unwrap().error.unwrap_or(f64::NAN),
        ));
    }
    let rates = Outcome {
        pass,
        summary: format!("{} (tol 0.15)", parts.join(", ")),
        details,
    };

    let steps = &result.run(Strategy::Vem).expect("adaptive-vem run").steps;
    let mut details = Vec::new();
    let theta0 = steps[0].theta2 / steps[0].eta2;
    let theta_ok = theta0 <= 1e-12;
    let (mut wide_ok, mut narrow_ok, mut decreasing) = (true, true, true);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (k, s) in steps.iter().enumerate() {
        let eff = s.effectivity.unwrap_or(f64::NAN);
        wide_ok &= (0.1..=1.0).contains(&eff);
        if s.dofs >= 300 {
            narrow_ok &= (0.25..=0.55).contains(&eff);
            lo = lo.min(eff);
            hi = hi.max(eff);
        }
        if k >= 2 {
            decreasing &= s.eta2 < steps[k - 1].eta2;
        }
        details.push(format!(
            "N={:>6} omega={:.6} error={:.3e} R2={:.3e} theta2={:.3e} J2={:.3e} eta2={:.3e} effectivity={eff:.4}",
            s.dofs,
            s.omega,
            s.error.unwrap_or(f64::NAN),
            s.r2,
            s.theta2,
            s.j2,
            s.eta2
        ));
    }
    let behaviour = Outcome {
        pass: theta_ok && wide_ok && narrow_ok && decreasing,
        summary: format!(
            "theta2/eta2 at step 0 {theta0:.1e} ({}), effectivity in [0.1,1] {}, effectivity for N>=300 in [{lo:.3},{hi:.3}] vs [0.25,0.55] ({}), eta2 decreasing from step 1 {}",
            ok(theta_ok),
            ok(wide_ok),
            ok(narrow_ok),
            ok(decreasing)
        ),
        details,
    };
    (rates, behaviour)
}

fn ok(flag: bool) -> &'static str {
    if flag { "ok" } else { "violated" }
}

fn rigid_zero() -> Outcome {
    let vessel = generate_vessel_mesh().unwrap();
    let every_third: Vec<usize> = (0..vessel.num_elements()).step_by(3).collect();
    let meshes: Vec<(&str, PolyMesh)> = vec![
        ("trapezoid n=4", generate_trapezoidal_mesh(4).unwrap()),
        ("trapezoid n=16", generate_trapezoidal_mesh(16).unwrap()),
        ("hexagon n=8", generate_hexagonal_mesh(8).unwrap()),
        ("hexagon n=16", generate_hexagonal_mesh(16).unwrap()),
        ("triangle n=8", generate_triangle_mesh(8).unwrap()),
        ("vessel", vessel.clone()),
        ("vessel, polygon split", refine_vem(&vessel, &every_third).unwrap()),
        ("vessel, bisected", refine_fem(&vessel, &every_third).unwrap()),
    ];
    let motions = [
        Affine::rigid(1.0, 0.0, 0.0),
        Affine::rigid(0.0, -2.0, 0.0),
        Affine::rigid(0.3, 0.1, 1.0),
    ];
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (name, mesh) in &meshes {
        for material in [Material::steel(), Material::unit()] {
            let mesh_worst = motions
                .iter()
                .map(|&m| {
                    let (eta, scale) = rigid_indicator(mesh, &material, m);
                    eta / scale
                })
                .fold(0.0, f64::max);
            worst = worst.max(mesh_worst);
            details.push(format!("{name}, lambda+2mu={:.2e}: eta/scale {mesh_worst:.1e}", material.lambda + 2.0 * material.mu));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        summary: format!("{} meshes, worst eta relative to a unit-gradient field {worst:.1e} (tol 1e-12)", meshes.len()),
        details,
    }
}

fn spurious_modes() -> Outcome {
    let material = Material::steel();
    let mut counts = Vec::new();
    let mut details = Vec::new();
    for n in [8, 16, 32] {
        let mesh = generate_trapezoidal_mesh(n).unwrap();
        let system = assemble(&mesh, &material).unwrap();
        let modes = solve_smallest(&system.stiffness, &system.mass, 10, &EigOptions::default()).unwrap();
        let omega = modes.frequencies().unwrap();
        let count = omega.iter().filter(|&&w| w < 16_000.0).count();
        details.push(format!("n={n}: {count} below 16000, lowest ten {omega:.1?}"));
        counts.push(count);
    }
    Outcome {
        pass: counts.iter().all(|&c| c == 6),
        summary: format!("counts {counts:?} (expected 6 each)"),
        details,
    }
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut passed = 0;
    let mut record = |number: usize, title: &str, run: &mut dyn FnMut() -> Outcome| {
        let started = Instant::now();
        let outcome = run();
        report(number, title, started, &outcome);
        passed += outcome.pass as usize;
    };

    record(1, "oracle equivalence on triangle meshes", &mut oracle_equivalence);
    record(2, "element property suite", &mut property_suite);
    record(3, "Test 1 trapezoidal frequencies", &mut || {
        table1(MeshFamily::Trapezoid, trapezoid_checks)
    });
    record(4, "Test 1 hexagonal frequencies", &mut || table1(MeshFamily::Hexagon, hexagon_checks));

    let started = Instant::now();
    let (rates, behaviour) = adaptive_rates(&ExperimentConfig::vessel());
    report(5, "Test 2 error rates", started, &rates);
    report(6, "Test 2 estimator behaviour", started, &behaviour);
    passed += rates.pass as usize + behaviour.pass as usize;

    let mut record = |number: usize, title: &str, run: &mut dyn FnMut() -> Outcome| {
        let started = Instant::now();
        let outcome = run();
        report(number, title, started, &outcome);
        passed += outcome.pass as usize;
    };
    record(7, "rigid motions give a zero indicator", &mut rigid_zero);
    record(8, "no spurious modes below 16000", &mut spurious_modes);

    println!("acceptance: {passed}/8 criteria pass");
    if strict && passed < 8 {
        std::process::exit(1);
    }
}
