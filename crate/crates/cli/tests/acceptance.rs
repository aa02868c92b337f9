//! Acceptance criteria, one line per criterion on stderr.
//!
//! Run with `cargo test -p lindloc-cli --test acceptance`. The lines are
//! written straight to the stderr handle so they show up without
//! `--nocapture`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use lindloc::baths::{rate, BathSpec, SpectralModel};
use lindloc::dynamics::{evolve, steady_state, SolverConfig};
use lindloc::linalg::{hermitian_eig, kron, pauli};
use lindloc::liouvillian::{build_modified_local, Generator};
use lindloc::models::{bundled_models, single_qubit_model, two_qubit_model, TwoQubitParams};
use lindloc::spectral::{decompose_operator, secular_filter, EnergyLevels};
use lindloc::thermo::{audit, audit_trajectory, heat_current, internal_energy_rate};
use lindloc::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_matrix(r: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let data = (0..d * d).map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    ComplexMatrix::from_vec(d, d, data).unwrap()
}

fn random_density(r: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = random_matrix(r, d);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

fn random_pure(r: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let v = hermitian_eig(&random_matrix(r, d).hermitian_part()).unwrap().eigenvector(0);
    ComplexMatrix::outer(&v, &v)
}

fn modified(spec: &lindloc::liouvillian::SystemSpec) -> Generator {
    build_modified_local(spec).unwrap()
}

/// Largest stable step, rounded down to leave margin under the guard.
fn stable_dt(g: &Generator) -> f64 {
    0.09 / g.superop_norm_inf()
}

fn c1_secular_filter() -> Check {
    let p = TwoQubitParams::default();
    let xx = kron(&pauli::sigma_x(), &pauli::sigma_x());
    let g = modified(&two_qubit_model(&p).unwrap());
    let levels = EnergyLevels::from_hamiltonian(&g.h_s, None).map_err(|e| e.to_string())?;
    let filtered = secular_filter(&xx, &levels).map_err(|e| e.to_string())?;
    let exchange = &kron(&pauli::sigma_plus(), &pauli::sigma_minus()) + &kron(&pauli::sigma_minus(), &pauli::sigma_plus());
    let err = filtered.max_abs_diff(&exchange);
    ensure(err <= 1e-12, || format!("resonant filter error {err:e}"))?;

    let gd = modified(&two_qubit_model(&TwoQubitParams { e2: 1.5, ..p }).unwrap());
    let levels = EnergyLevels::from_hamiltonian(&gd.h_s, None).map_err(|e| e.to_string())?;
    let detuned = secular_filter(&xx, &levels).map_err(|e| e.to_string())?.max_abs();
    ensure(detuned <= 1e-12, || format!("detuned filter leaves {detuned:e}"))?;
    Ok(format!("resonant error {err:.1e}, detuned residue {detuned:.1e}"))
}

fn c2_decomposition() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let d = 2 + case % 15;
        let h = random_matrix(&mut r, d).hermitian_part();
        let a = random_matrix(&mut r, d).hermitian_part();
        let levels = EnergyLevels::from_hamiltonian(&h, None).map_err(|e| e.to_string())?;
        let dec = decompose_operator(&a, &levels).map_err(|e| e.to_string())?;
        worst = worst.max(dec.resum().max_abs_diff(&a));
        for term in &dec.terms {
            let partner = dec.component(-term.omega, 1e-8).ok_or_else(|| format!("case {case}: no A(-ω)"))?;
            worst = worst.max(partner.op.max_abs_diff(&term.op.adjoint()));
        }
    }
    ensure(worst <= 1e-10, || format!("worst defect {worst:e}"))?;
    Ok(format!("50 operators, dims 2..16, worst defect {worst:.1e}"))
}

fn c3_detailed_balance() -> Check {
    let models = [
        SpectralModel::default(),
        SpectralModel::Ohmic { coupling_scale: 0.1, cutoff: 5.0 },
    ];
    let mut worst: f64 = 0.0;
    for sp in models {
        for t in [0.5, 1.0, 2.0] {
            let bath = BathSpec::from_temperature("b", t, sp, vec![]).map_err(|e| e.to_string())?;
            for k in 0..100 {
                let w = 0.05 + 0.05 * k as f64;
                let (up, down) = (rate(-w, &bath), rate(w, &bath));
                worst = worst.max((down - up * (bath.beta * w).exp()).abs() / down);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("worst relative defect {worst:e}"))?;
    Ok(format!("flat and ohmic, 3 temperatures x 100 frequencies, worst {worst:.1e}"))
}

fn c4_gibbs_fixed_point() -> Check {
    let mut worst: f64 = 0.0;
    for (name, spec) in bundled_models() {
        let g = modified(&spec);
        let r = g.apply_partial(&g.tau_s).map_err(|e| e.to_string())?.max_abs();
        ensure(r <= 1e-9, || format!("{name}: {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("max |L'[tau_s]| = {worst:.1e}"))
}

fn c5_first_law() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for (name, spec) in bundled_models() {
        let g = modified(&spec);
        for _ in 0..100 {
            let rho = random_density(&mut r, g.dim());
            let e = internal_energy_rate(&g, &rho).map_err(|e| e.to_string())?;
            let q: f64 = (0..g.bath_count()).map(|i| heat_current(&g, &rho, i).unwrap()).sum();
            let defect = (e - q).abs();
            ensure(defect <= 1e-10, || format!("{name}: {defect:e}"))?;
            worst = worst.max(defect);
        }
    }
    Ok(format!("100 random states per model, worst {worst:.1e}"))
}

fn c6_second_law() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let (mut min_ep, mut worst_spohn, mut points) = (f64::INFINITY, 0.0f64, 0);
    for (name, spec) in bundled_models() {
        let g = modified(&spec);
        let t_max = 20.0 / g.slowest_rate().unwrap();
        let dt = stable_dt(&g);
        let stride = ((t_max / dt).round() as usize / 200).max(1);
        let rho0 = random_pure(&mut r, g.dim());
        let mut traj = evolve(&g, &rho0, &SolverConfig::new(dt, t_max, stride)).map_err(|e| format!("{name}: {e}"))?;
        audit_trajectory(&g, &mut traj).map_err(|e| e.to_string())?;
        for rep in &traj.reports {
            min_ep = min_ep.min(rep.entropy_production);
            worst_spohn = worst_spohn.max(rep.spohn_defect());
            ensure(rep.entropy_production >= -1e-9, || format!("{name}: {}", rep.entropy_production))?;
            ensure(rep.spohn_defect() <= 1e-9, || format!("{name}: Spohn defect {}", rep.spohn_defect()))?;
        }
        points += traj.len();
    }
    Ok(format!("{points} audited points, min entropy production {min_ep:.2e}, worst Spohn defect {worst_spohn:.1e}"))
}

// Independent null-space oracle (numpy SVD of the 16x16 superoperator).
const Q1_BY_T1: [(f64, f64); 4] = [
    (0.5, -1.2235554416286393e-05),
    (1.0, 0.0),
    (1.5, 8.969844441955045e-06),
    (2.0, 1.5356402288472655e-05),
];
const Q1_BY_ALPHA: [(f64, f64); 3] =
    [(0.005, 3.839736536521733e-06), (0.01, 1.5356402288472655e-05), (0.02, 6.138494111628667e-05)];

fn steady_currents(p: &TwoQubitParams) -> Result<Vec<f64>, String> {
    let g = modified(&two_qubit_model(p).unwrap());
    let ss = steady_state(&g).map_err(|e| e.to_string())?;
    Ok(audit(&g, &ss.rho_ss).map_err(|e| e.to_string())?.q_dot)
}

fn c7_two_qubit_physics() -> Check {
    let base = TwoQubitParams::default();
    let close = |got: f64, want: f64| (got - want).abs() <= 1e-12 + 1e-8 * want.abs();

    let q = steady_currents(&base)?;
    ensure(q[0] > 0.0 && q[1] < 0.0, || format!("(a) signs wrong: {q:?}"))?;
    ensure((q[0] + q[1]).abs() <= 1e-12, || format!("(a) Q1 + Q2 = {:e}", q[0] + q[1]))?;

    let mut sweep = Vec::new();
    for (t1, want) in Q1_BY_T1 {
        let q = steady_currents(&TwoQubitParams { t1, ..base.clone() })?;
        ensure(close(q[0], want), || format!("T1 = {t1}: {} vs oracle {want}", q[0]))?;
        sweep.push(q[0]);
    }
    ensure(sweep[1].abs() <= 1e-12, || format!("(b) T1 = T2 gives {:e}", sweep[1]))?;
    ensure(sweep[0] < 0.0 && sweep[2] > 0.0, || format!("(c) no sign change bracketing T1 = T2: {sweep:?}"))?;

    let mut last = 0.0;
    for (alpha, want) in Q1_BY_ALPHA {
        let q = steady_currents(&TwoQubitParams { alpha, beta_coupling: alpha, ..base.clone() })?;
        ensure(close(q[0], want), || format!("alpha = {alpha}: {} vs oracle {want}", q[0]))?;
        ensure(q[0] > last, || "alpha sweep not monotone".into())?;
        last = q[0];
    }

    let detuned = steady_currents(&TwoQubitParams { e2: 1.5, ..base })?;
    ensure(detuned.iter().all(|q| q.abs() <= 1e-12), || format!("detuned currents {detuned:?}"))?;
    Ok(format!("Q1 = {:.6e} at T1 = 2; oracle fixtures matched to 1e-8 relative", q[0]))
}

fn c8_thermalization() -> Check {
    let (e, t, beta) = (1.0, 1.0, 0.01);
    let spec = single_qubit_model(e, t, SpectralModel::default(), beta).unwrap();
    let g = modified(&spec);
    let ss = steady_state(&g).map_err(|e| e.to_string())?;
    let boltz = (-e / t).exp();
    // Index 0 is the excited level (+E/2).
    let gibbs = ComplexMatrix::from_real_diag(&[boltz / (1.0 + boltz), 1.0 / (1.0 + boltz)]);
    let ss_err = ss.rho_ss.max_abs_diff(&gibbs);
    ensure(ss_err <= 1e-8, || format!("steady state off Gibbs by {ss_err:e}"))?;

    let bath = &spec.baths[0];
    let (down, up) = (beta * beta * rate(e, bath), beta * beta * rate(-e, bath));
    let total = down + up;
    let p_eq = up / total;
    let dt = stable_dt(&g);
    let t_max = 8.0 / total;
    let stride = ((t_max / dt).round() as usize / 400).max(1);
    let traj = evolve(&g, &ComplexMatrix::from_real_diag(&[1.0, 0.0]), &SolverConfig::new(dt, t_max, stride))
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let p = p_eq + (1.0 - p_eq) * (-total * t).exp();
        let exact = ComplexMatrix::from_real_diag(&[p, 1.0 - p]);
        worst = worst.max(rho.max_abs_diff(&exact));
    }
    ensure(worst <= 1e-6, || format!("trajectory off the rate equation by {worst:e}"))?;
    Ok(format!("steady error {ss_err:.1e}, trajectory error {worst:.1e} over {} records", traj.len()))
}

fn c9_integrator_order() -> Check {
    let g = modified(&two_qubit_model(&TwoQubitParams::default()).unwrap());
    let rho0 = random_pure(&mut ChaCha8Rng::seed_from_u64(9), 4);
    let t = 20.0;
    let finals = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt: &f64| {
            let n = (t / dt).round() as usize;
            evolve(&g, &rho0, &SolverConfig::new(dt, t, n)).map(|mut tr| tr.states.pop().unwrap())
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let (e1, e2) = (finals[0].max_abs_diff(&finals[1]), finals[1].max_abs_diff(&finals[2]));
    let ratio = e1 / e2;
    ensure((12.0..=20.0).contains(&ratio), || format!("ratio {ratio}"))?;
    Ok(format!("step-halving ratio {ratio:.3} (differences {e1:.2e}, {e2:.2e})"))
}

fn c10_steady_vs_evolution() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for (name, spec) in bundled_models() {
        let g = modified(&spec);
        let ss = steady_state(&g).map_err(|e| format!("{name}: {e}"))?;
        ensure(ss.residual <= 1e-8, || format!("{name}: residual {:e}", ss.residual))?;
        let t_max = 50.0 / g.slowest_rate().unwrap();
        let dt = stable_dt(&g);
        let stride = ((t_max / dt).round() as usize / 50).max(1);
        let rho0 = random_pure(&mut r, g.dim());
        let traj = evolve(&g, &rho0, &SolverConfig::new(dt, t_max, stride)).map_err(|e| format!("{name}: {e}"))?;
        let diff = traj.final_state().unwrap().max_abs_diff(&ss.rho_ss);
        ensure(diff <= 1e-6, || format!("{name}: {diff:e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("{} models, worst |rho_ss - rho(t_max)| = {worst:.1e}", bundled_models().len()))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn lindloc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindloc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("LINDLOC_LOG", "error")
        .output()
        .expect("binary runs")
}

fn c11_cli_contract() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = |name: &str| configs_dir().join(name).to_string_lossy().into_owned();
    let run = |cmd: &str, name: &str, expect: i32| -> Result<Output, String> {
        let out = lindloc(&[cmd, &cfg(name)], &tmp.path().join(format!("{cmd}-{name}")));
        let code = out.status.code().unwrap_or(-1);
        ensure(code == expect, || {
            format!("{cmd} {name}: exit {code}, expected {expect}: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(out)
    };

    let mut runs = 0;
    for entry in std::fs::read_dir(configs_dir()).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(configs_dir().join(&name)).map_err(|e| e.to_string())?;
        if name == "degenerate.toml" {
            let out = run("steady", &name, 1)?;
            let msg = String::from_utf8_lossy(&out.stderr);
            ensure(msg.contains("not unique"), || format!("degenerate message: {msg}"))?;
            runs += 1;
            continue;
        }
        run("steady", &name, 0)?;
        runs += 1;
        if text.contains("[solver]") {
            run("simulate", &name, 0)?;
            run("compare", &name, 0)?;
            runs += 2;
        }
        if text.contains("[sweep]") {
            run("sweep", &name, 0)?;
            runs += 1;
        }
    }

    // Naive generator: violations are reported, never fatal.
    let naive = tmp.path().join("naive.toml");
    let text = std::fs::read_to_string(cfg("two_qubit_resonant.toml")).unwrap().replace("\"modified\"", "\"naive\"");
    std::fs::write(&naive, text).unwrap();
    let out = lindloc(&["simulate", naive.to_str().unwrap()], &tmp.path().join("naive"));
    ensure(out.status.code() == Some(0), || "naive simulate did not exit 0".into())?;

    // Malformed config names the offending key.
    let bad = tmp.path().join("bad.toml");
    let text = std::fs::read_to_string(cfg("two_qubit_resonant.toml")).unwrap().replacen("temperature = 2.0", "", 1);
    std::fs::write(&bad, text).unwrap();
    let out = lindloc(&["steady", bad.to_str().unwrap()], &tmp.path().join("bad"));
    let msg = String::from_utf8_lossy(&out.stderr);
    ensure(out.status.code() == Some(1) && msg.contains("baths[0].temperature"), || format!("malformed: {msg}"))?;

    // Round trip through --dump-config.
    let dump = |path: &str| lindloc(&["steady", path, "--dump-config"], tmp.path()).stdout;
    let first = dump(&cfg("two_qubit_resonant.toml"));
    let dumped = tmp.path().join("dumped.toml");
    std::fs::write(&dumped, &first).unwrap();
    ensure(dump(dumped.to_str().unwrap()) == first, || "dump-config is not a fixed point".into())?;

    // Sweep order under --jobs 4.
    let sweep = |dir: &str| {
        let out_dir = tmp.path().join(dir);
        let out = lindloc(&["sweep", &cfg("two_qubit_resonant.toml"), "--jobs", "4"], &out_dir);
        (out.status.code(), std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap_or_default())
    };
    let (a, b) = (sweep("sweep-a"), sweep("sweep-b"));
    ensure(a.0 == Some(0) && a == b, || "sweep output differs between runs".into())?;
    let first_col: Vec<&str> = a.1.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    ensure(first_col == ["0.5", "1.0", "1.5", "2.0"], || format!("sweep rows out of order: {first_col:?}"))?;

    Ok(format!("{runs} bundled runs, naive/malformed/round-trip/sweep-order checks passed"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion { id: 1, name: "secular filter", budget: Duration::from_secs(1), run: c1_secular_filter },
        Criterion { id: 2, name: "decomposition", budget: Duration::from_secs(5), run: c2_decomposition },
        Criterion { id: 3, name: "detailed balance", budget: Duration::from_secs(1), run: c3_detailed_balance },
        Criterion { id: 4, name: "Gibbs fixed point", budget: Duration::from_secs(10), run: c4_gibbs_fixed_point },
        Criterion { id: 5, name: "first law", budget: Duration::from_secs(10), run: c5_first_law },
        Criterion { id: 6, name: "second law", budget: Duration::from_secs(60), run: c6_second_law },
        Criterion { id: 7, name: "two-qubit steady state", budget: Duration::from_secs(10), run: c7_two_qubit_physics },
        Criterion { id: 8, name: "thermalization", budget: Duration::from_secs(5), run: c8_thermalization },
        Criterion { id: 9, name: "integrator order", budget: Duration::from_secs(10), run: c9_integrator_order },
        Criterion { id: 10, name: "steady vs evolution", budget: Duration::from_secs(60), run: c10_steady_vs_evolution },
        Criterion { id: 11, name: "CLI contract", budget: Duration::from_secs(30), run: c11_cli_contract },
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for c in criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => ("FAIL", d),
        };
        let _ = writeln!(err, "acceptance {:>2} {:<24} {status} ({:.2?}) {detail}", c.id, c.name, elapsed);
        if status == "FAIL" {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
