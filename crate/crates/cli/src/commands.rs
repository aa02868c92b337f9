//! The four subcommands. Each returns the process exit status on success;
//! errors propagate to `main` and exit with status 1.

use std::path::PathBuf;

use lindloc::dynamics::{evolve, steady_state, SolverConfig, SteadyStateResult, Trajectory};
use lindloc::linalg::{hermitian_eig, von_neumann_entropy};
use lindloc::liouvillian::{build_modified_local, build_naive_local, Generator, GeneratorKind, SystemSpec};
use lindloc::thermo::{audit, audit_trajectory, ThermoReport, SECOND_LAW_TOL};
use rayon::prelude::*;

use crate::config::{self, GeneratorChoice, OutputFormat, RunConfig};
use crate::output::{matrix_csv, num, OutputDir, Report, Table};
use crate::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 2;

pub struct Context {
    pub cfg: RunConfig,
    /// Raw config text, re-edited for every sweep point.
    pub text: String,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
}

impl Context {
    fn output(&self) -> Result<OutputDir, CliError> {
        OutputDir::create(&self.out_dir)
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.cfg.formats().contains(&f)
    }
}

fn build(spec: &SystemSpec, choice: GeneratorChoice) -> Result<Generator, CliError> {
    Ok(match choice {
        GeneratorChoice::Modified => build_modified_local(spec)?,
        GeneratorChoice::Naive => build_naive_local(spec)?,
    })
}

fn solver(cfg: &RunConfig) -> Result<(SolverConfig, &config::SolverSection), CliError> {
    let s = cfg.solver.as_ref().ok_or_else(|| CliError::Config("missing [solver] section".into()))?;
    let mut sc = SolverConfig::new(s.dt, s.t_max, s.record_stride);
    sc.positivity_tol = s.positivity_tol;
    Ok((sc, s))
}

fn bath_labels(spec: &SystemSpec) -> Vec<String> {
    spec.baths.iter().map(|b| b.label.clone()).collect()
}

fn describe_generator(report: &mut Report, gen: &Generator) {
    report.add("generator", format!("{:?}", gen.kind));
    report.add("dims", format!("{:?}", gen.dims));
    report.add(
        "spectrum_diagnostics",
        gen.diagnostics.as_ref().map_or_else(|| "n/a".to_string(), |d| d.summary()),
    );
}

fn describe_thermo(report: &mut Report, labels: &[String], r: &ThermoReport) {
    for (label, q) in labels.iter().zip(&r.q_dot) {
        report.add_num(format!("q_dot[{label}]"), *q);
    }
    report.add_num("e_dot", r.e_dot);
    report.add_num("s_dot", r.s_dot);
    report.add_num("first_law_residual", r.first_law_residual);
    report.add_num("entropy_production", r.entropy_production);
    report.add_num("spohn_lhs", r.spohn_lhs);
    report.add_num("spohn_rhs", r.spohn_rhs);
    report.add_num("sum_beta_q_dot", r.weighted_heat);
}

struct TrajectoryRows {
    table: Table,
    min_entropy_production: f64,
    max_first_law_residual: f64,
    violations: usize,
}

fn trajectory_rows(gen: &Generator, labels: &[String], traj: &Trajectory) -> Result<TrajectoryRows, CliError> {
    let basis = hermitian_eig(&gen.h_s)?;
    let d = gen.dim();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..d).map(|k| format!("p{k}")));
    header.extend(["entropy".into(), "e_dot".into()]);
    header.extend(labels.iter().map(|l| format!("q_dot_{l}")));
    header.extend(["first_law_residual".into(), "entropy_production".into(), "violation".into()]);
    let mut out = TrajectoryRows {
        table: Table::new(header),
        min_entropy_production: f64::INFINITY,
        max_first_law_residual: 0.0,
        violations: 0,
    };
    for ((t, rho), r) in traj.times.iter().zip(&traj.states).zip(&traj.reports) {
        let mut row = vec![num(*t)];
        for k in 0..d {
            let v = basis.eigenvector(k);
            let p: f64 = (0..d)
                .map(|i| (0..d).map(|j| (v[i].conj() * rho[(i, j)] * v[j]).re).sum::<f64>())
                .sum();
            row.push(num(p));
        }
        row.push(num(von_neumann_entropy(rho)?));
        row.push(num(r.e_dot));
        row.extend(r.q_dot.iter().map(|q| num(*q)));
        row.push(num(r.first_law_residual));
        row.push(num(r.entropy_production));
        let violated = !r.second_law_ok();
        row.push(u8::from(violated).to_string());
        out.table.push(row);
        out.min_entropy_production = out.min_entropy_production.min(r.entropy_production);
        out.max_first_law_residual = out.max_first_law_residual.max(r.first_law_residual.abs());
        out.violations += usize::from(violated);
    }
    Ok(out)
}

fn run_trajectory(gen: &Generator, cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let (solver_cfg, section) = solver(cfg)?;
    let rho0 = section.initial.to_state(&gen.h_s, solver_cfg.positivity_tol)?;
    let mut traj = evolve(gen, &rho0, &solver_cfg)?;
    audit_trajectory(gen, &mut traj)?;
    Ok(traj)
}

pub fn simulate(ctx: &Context) -> Result<u8, CliError> {
    let spec = ctx.cfg.model.to_spec()?;
    let labels = bath_labels(&spec);
    let gen = build(&spec, ctx.cfg.generator)?;
    let traj = run_trajectory(&gen, &ctx.cfg)?;
    let rows = trajectory_rows(&gen, &labels, &traj)?;

    let out = ctx.output()?;
    if ctx.wants(OutputFormat::Csv) {
        out.write("trajectory.csv", &rows.table.to_csv())?;
    }
    let mut report = Report::default();
    describe_generator(&mut report, &gen);
    report.add("records", traj.len());
    report.add_num("t_final", *traj.times.last().unwrap_or(&0.0));
    report.add_num("min_entropy_production", rows.min_entropy_production);
    report.add_num("max_abs_first_law_residual", rows.max_first_law_residual);
    report.add("second_law_violations", rows.violations);
    if let Some(last) = traj.reports.last() {
        describe_thermo(&mut report, &labels, last);
    }
    if ctx.wants(OutputFormat::Report) {
        out.write("simulate_report.txt", &report.render())?;
    }
    print!("{}", report.render());

    if rows.violations > 0 {
        if gen.kind == GeneratorKind::ModifiedLocal {
            log::error!("{} recorded states violate the second law", rows.violations);
            return Ok(EXIT_VIOLATION);
        }
        log::warn!("{} recorded states violate the second law (naive generator, reported only)", rows.violations);
    }
    Ok(EXIT_OK)
}

struct SteadyPoint {
    gen: Generator,
    result: SteadyStateResult,
    report: ThermoReport,
}

fn solve_steady(spec: &SystemSpec, choice: GeneratorChoice) -> Result<SteadyPoint, CliError> {
    let gen = build(spec, choice)?;
    let result = steady_state(&gen)?;
    let report = audit(&gen, &result.rho_ss)?;
    Ok(SteadyPoint { gen, result, report })
}

pub fn steady(ctx: &Context) -> Result<u8, CliError> {
    let spec = ctx.cfg.model.to_spec()?;
    let labels = bath_labels(&spec);
    let p = solve_steady(&spec, ctx.cfg.generator)?;

    let mut report = Report::default();
    describe_generator(&mut report, &p.gen);
    report.add_num("residual", p.result.residual);
    report.add("null_dim", p.result.null_dim);
    report.add(
        "smallest_singular_values",
        p.result.smallest_singular_values.iter().map(|s| num(*s)).collect::<Vec<_>>().join(" "),
    );
    describe_thermo(&mut report, &labels, &p.report);

    let out = ctx.output()?;
    if ctx.wants(OutputFormat::Csv) {
        out.write("rho_ss.csv", &matrix_csv(&p.result.rho_ss))?;
    }
    if ctx.wants(OutputFormat::Report) {
        out.write("steady_report.txt", &report.render())?;
    }
    print!("{}", report.render());

    if !p.report.second_law_ok() && p.gen.kind == GeneratorKind::ModifiedLocal {
        log::error!("steady state violates the second law");
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

pub fn sweep(ctx: &Context) -> Result<u8, CliError> {
    let sweep = ctx.cfg.sweep.as_ref().ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    if sweep.values.is_empty() {
        return Err(CliError::Config("sweep.values: at least one value is required".into()));
    }
    let mut paths = vec![sweep.parameter.as_str()];
    paths.extend(sweep.linked.iter().map(String::as_str));

    let run_point = |v: f64| -> Result<(Vec<String>, SteadyPoint), CliError> {
        let text = config::with_values(&ctx.text, &paths, v)?;
        let cfg = config::parse(&text)?;
        let spec = cfg.model.to_spec()?;
        Ok((bath_labels(&spec), solve_steady(&spec, cfg.generator)?))
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = ctx.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    // Indexed collect keeps input order whatever the completion order.
    let points: Vec<_> = pool.install(|| sweep.values.par_iter().map(|&v| run_point(v)).collect());

    let mut table: Option<Table> = None;
    let mut violations = 0;
    for (&v, point) in sweep.values.iter().zip(points) {
        let (labels, p) = point.map_err(|e| e.context(format!("sweep point {} = {}", sweep.parameter, num(v))))?;
        let table = table.get_or_insert_with(|| {
            let mut header = vec![sweep.parameter.clone()];
            header.extend(labels.iter().map(|l| format!("q_dot_{l}")));
            header.extend(["entropy_production".into(), "residual".into()]);
            Table::new(header)
        });
        let mut row = vec![v];
        row.extend(&p.report.q_dot);
        row.extend([p.report.entropy_production, p.result.residual]);
        table.push_numbers(row);
        if !p.report.second_law_ok() && p.gen.kind == GeneratorKind::ModifiedLocal {
            violations += 1;
        }
    }
    let table = table.expect("at least one sweep value");
    let out = ctx.output()?;
    out.write("sweep.csv", &table.to_csv())?;
    print!("{}", table.to_csv());

    if violations > 0 {
        log::error!("{violations} sweep points violate the second law");
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

struct Column {
    trajectory: Result<TrajectoryRows, CliError>,
    steady: Result<SteadyPoint, CliError>,
}

fn compare_column(spec: &SystemSpec, cfg: &RunConfig, choice: GeneratorChoice) -> Result<Column, CliError> {
    let gen = build(spec, choice)?;
    let labels = bath_labels(spec);
    let trajectory = run_trajectory(&gen, cfg).and_then(|t| trajectory_rows(&gen, &labels, &t));
    let steady = solve_steady(spec, choice);
    Ok(Column { trajectory, steady })
}

pub fn compare(ctx: &Context) -> Result<u8, CliError> {
    solver(&ctx.cfg)?;
    let spec = ctx.cfg.model.to_spec()?;
    let labels = bath_labels(&spec);
    let modified = compare_column(&spec, &ctx.cfg, GeneratorChoice::Modified)?;
    let naive = compare_column(&spec, &ctx.cfg, GeneratorChoice::Naive)?;

    let mut table = Table::new(["quantity", "modified", "naive"]);
    let cell = |c: &Column, f: &dyn Fn(&TrajectoryRows) -> String| match &c.trajectory {
        Ok(rows) => f(rows),
        Err(e) => format!("\"failed: {}\"", e.to_string().replace('"', "'")),
    };
    let steady_cell = |c: &Column, f: &dyn Fn(&SteadyPoint) -> f64| match &c.steady {
        Ok(p) => num(f(p)),
        Err(e) => format!("\"failed: {}\"", e.to_string().replace('"', "'")),
    };
    let traj_rows: [(&str, &dyn Fn(&TrajectoryRows) -> String); 3] = [
        ("min_entropy_production", &|r| num(r.min_entropy_production)),
        ("max_abs_first_law_residual", &|r| num(r.max_first_law_residual)),
        ("second_law_violations", &|r| r.violations.to_string()),
    ];
    for (name, f) in traj_rows {
        table.push(vec![name.into(), cell(&modified, f), cell(&naive, f)]);
    }
    table.push(vec![
        "steady_entropy_production".into(),
        steady_cell(&modified, &|p| p.report.entropy_production),
        steady_cell(&naive, &|p| p.report.entropy_production),
    ]);
    table.push(vec![
        "steady_first_law_residual".into(),
        steady_cell(&modified, &|p| p.report.first_law_residual),
        steady_cell(&naive, &|p| p.report.first_law_residual),
    ]);
    for (i, label) in labels.iter().enumerate() {
        table.push(vec![
            format!("steady_q_dot_{label}"),
            steady_cell(&modified, &|p| p.report.q_dot[i]),
            steady_cell(&naive, &|p| p.report.q_dot[i]),
        ]);
    }

    let out = ctx.output()?;
    out.write("compare.csv", &table.to_csv())?;
    print!("{}", table.to_csv());

    // Only the modified column is held to the second law.
    let rows = modified.trajectory?;
    if rows.min_entropy_production < -SECOND_LAW_TOL {
        log::error!("modified generator violates the second law: {}", num(rows.min_entropy_production));
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}
