//! Subcommand implementations. Each returns a one-line human summary; the
//! machine-readable result is written to the output file.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{self, OutputFormat, RunConfig};
use super::output::{json_document, write_file, Metadata, Table};
use super::{effective_config, Cli, CliError, Command};
use crate::curve::ArcCurve;
use crate::dynamo::curl::{curl_advective_identity_check, CurlGrid, VectorField};
use crate::dynamo::{dynamo_report, field_solution, radius_profile};
use crate::energy::energy_report;
use crate::metric::{metric_at, printed_matrix_report, SampleGrid, TubeConfig};
use crate::rrc::{frenet_rrc, gamma_112, printed_b_s_n, rrc_check_report, unstretch_ratio, FormulaDeviation, RrcTable};
use crate::shape::ShapeFunction;

/// Seed of the random solenoidal fields used by `validate`.
pub const CURL_SEED: u64 = 2024;
/// Tolerance below which a validate section is reported as consistent.
const CONSISTENT_TOL: f64 = 1e-10;

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::Frenet(_) => frenet(cfg),
        Command::Metric(a) => metric(cfg, a.report),
        Command::Rrc(a) => rrc(cfg, a.check),
        Command::Energy(_) => energy(cfg),
        Command::Dynamo(a) => dynamo(cfg, a.report),
        Command::Validate(_) => validate(cfg),
    }
}

fn output_path(cfg: &RunConfig, command: &str, ext: &str) -> PathBuf {
    cfg.output
        .path
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("{command}.{ext}")))
}

fn write_table(cfg: &RunConfig, command: &str, table: &Table, grid: Value) -> Result<PathBuf, CliError> {
    let meta = Metadata::new(command, cfg, grid);
    let (ext, body) = match cfg.output_format()? {
        OutputFormat::Csv => ("csv", table.to_csv(&meta)),
        OutputFormat::Json => ("json", table.to_json(&meta)),
    };
    let path = output_path(cfg, command, ext);
    write_file(&path, &body)?;
    Ok(path)
}

fn write_report(cfg: &RunConfig, command: &str, result: &impl Serialize, grid: Value) -> Result<PathBuf, CliError> {
    cfg.output_format()?;
    let meta = Metadata::new(command, cfg, grid);
    let path = output_path(cfg, command, "json");
    write_file(&path, &json_document(&meta, result))?;
    Ok(path)
}

fn optional_curve(cfg: &RunConfig) -> Result<Option<ArcCurve>, CliError> {
    match cfg.curve.preset {
        Some(_) => config::build_curve(cfg).map(Some),
        None => Ok(None),
    }
}

/// Shape, tube and sample grid shared by `metric`, `rrc` and `validate`.
fn tube_setup(cfg: &mut RunConfig) -> Result<(ShapeFunction, TubeConfig, SampleGrid), CliError> {
    cfg.fill_curve_defaults();
    cfg.fill_shape_defaults();
    cfg.fill_tube_defaults();
    cfg.fill_grid_defaults();
    let curve = optional_curve(cfg)?;
    let shape = config::build_shape(cfg)?;
    let tube = config::build_tube(cfg, curve.as_ref())?;
    shape.validate_domain(tube.length)?;
    let grid = config::build_grid(cfg, tube.length)?;
    Ok((shape, tube, grid))
}

fn grid_meta(grid: &SampleGrid, tube: &TubeConfig) -> Value {
    json!({ "grid": grid, "tube": tube })
}

fn frenet(mut cfg: RunConfig) -> Result<String, CliError> {
    cfg.fill_curve_defaults();
    if cfg.curve.preset.is_none() {
        return Err(CliError::Config("missing required flag --curve (or `curve.preset` in the config file)".into()));
    }
    let curve = config::build_curve(&cfg)?;
    let length = curve.length();
    let step = *cfg.curve.step.get_or_insert(curve.default_step());
    if !(step > 0.0) {
        return Err(CliError::Config(format!("--step must be positive, got {step}")));
    }
    let n = cfg.curve.n_points.unwrap_or(101);
    if n == 0 {
        return Err(CliError::Config("--n-points must be positive".into()));
    }
    // Residual step: small against the curve scale, inside the cell.
    let h_res = (1e-3f64).min(0.25 * length / n as f64);
    let mut table = Table::new(&[
        "s", "x", "y", "z", "tx", "ty", "tz", "nx", "ny", "nz", "bx", "by", "bz", "kappa", "tau", "res_t", "res_n", "res_b",
    ]);
    let mut worst = 0.0f64;
    for i in 0..n {
        let s = (i as f64 + 0.5) * length / n as f64;
        let f = curve.frenet_at(s, step)?;
        let r = curve.frenet_serret_residual(s, h_res)?;
        worst = worst.max(r[0]).max(r[1]).max(r[2]);
        let mut row = vec![s];
        for v in [f.position, f.tangent, f.normal, f.binormal] {
            row.extend_from_slice(&[v.x, v.y, v.z]);
        }
        row.extend_from_slice(&[f.kappa, f.tau, r[0], r[1], r[2]]);
        table.push(row);
    }
    let grid = json!({ "length": length, "n_points": n, "frame_step": step, "residual_step": h_res });
    let path = write_table(&cfg, "frenet", &table, grid)?;
    Ok(format!(
        "frenet: {n} points over L = {length:.6}, max Frenet-Serret residual {worst:.3e} -> {}",
        path.display()
    ))
}

fn metric(mut cfg: RunConfig, report: bool) -> Result<String, CliError> {
    let (shape, tube, grid) = tube_setup(&mut cfg)?;
    let meta = grid_meta(&grid, &tube);
    if report {
        let rep = printed_matrix_report(&shape, &tube, &grid);
        let path = write_report(&cfg, "metric", &rep, meta)?;
        return Ok(format!(
            "metric report: max |printed - Gram| = {:.3e}, flagged [{}] -> {}",
            rep.max_abs_dev(),
            rep.flagged().join(", "),
            path.display()
        ));
    }
    let mut table = Table::new(&[
        "s", "chi", "phi", "theta", "g11", "g12", "g13", "g21", "g22", "g23", "g31", "g32", "g33", "det_g", "sqrt_g",
        "valid",
    ]);
    let mut invalid = 0usize;
    for [s, chi, phi] in grid.points() {
        let m = metric_at(&shape, &tube, s, chi, phi);
        invalid += usize::from(!m.valid);
        let mut row = vec![s, chi, phi, m.triad.theta];
        for i in 0..3 {
            for j in 0..3 {
                row.push(m.g[(i, j)]);
            }
        }
        row.extend_from_slice(&[m.det_g, m.sqrt_g, f64::from(u8::from(m.valid))]);
        table.push(row);
    }
    let path = write_table(&cfg, "metric", &table, meta)?;
    Ok(format!(
        "metric: {} grid points, {invalid} outside the valid region -> {}",
        grid.len(),
        path.display()
    ))
}

const SLOT_NAMES: [&str; 3] = ["s", "chi", "phi"];

fn rrc(mut cfg: RunConfig, check: bool) -> Result<String, CliError> {
    let (shape, tube, grid) = tube_setup(&mut cfg)?;
    let meta = grid_meta(&grid, &tube);
    if check {
        let entries = rrc_check_report(&shape, &tube, &grid);
        let result = json!({
            "frenet": frenet_rrc(tube.kappa0, tube.tau0),
            "printed_b_s_n": printed_b_s_n(tube.tau0),
            "entries": entries,
        });
        let path = write_report(&cfg, "rrc", &result, meta)?;
        let bad: Vec<&str> = entries.iter().filter(|e| !e.consistent).map(|e| e.quantity.as_str()).collect();
        return Ok(format!("rrc check: discrepancies in [{}] -> {}", bad.join(", "), path.display()));
    }
    let mut columns: Vec<String> = ["s", "chi", "phi"].iter().map(|c| c.to_string()).collect();
    for a in SLOT_NAMES {
        for i in 1..=3 {
            for j in 1..=3 {
                columns.push(format!("gamma_{i}{a}{j}"));
            }
        }
    }
    for c in [
        "n_ds_e1",
        "n_ds_e2",
        "n_ds_e3",
        "t_ds_e2",
        "gamma_112_printed",
        "gamma_112_derivative_form",
        "gamma_132",
        "b",
        "b_as_printed",
    ] {
        columns.push(c.to_string());
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&cols);
    let mut degenerate = 0usize;
    for [s, chi, phi] in grid.points() {
        let mut row = vec![s, chi, phi];
        match RrcTable::build(&shape, &tube, s, chi, phi) {
            Ok(t) => {
                for a in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            row.push(t.lowered[a][i][j]);
                        }
                    }
                }
                row.extend_from_slice(&[
                    t.frenet_proj[0][1][0],
                    t.frenet_proj[0][1][1],
                    t.frenet_proj[0][1][2],
                    t.frenet_proj[0][0][1],
                ]);
            }
            Err(_) => {
                degenerate += 1;
                row.extend(std::iter::repeat_n(f64::NAN, 31));
            }
        }
        let g = gamma_112(&shape, &tube, s, chi, phi);
        row.push(g.as_printed);
        row.push(g.derivative_form);
        match unstretch_ratio(&shape, &tube, s, chi, phi) {
            Ok(u) => row.extend_from_slice(&[u.gamma_132, u.b, u.b_as_printed]),
            Err(_) => row.extend_from_slice(&[crate::rrc::gamma_132(&shape, &tube, s, chi, phi), f64::NAN, f64::NAN]),
        }
        table.push(row);
    }
    let path = write_table(&cfg, "rrc", &table, meta)?;
    Ok(format!(
        "rrc: {} grid points, {degenerate} degenerate -> {}",
        grid.len(),
        path.display()
    ))
}

fn energy(mut cfg: RunConfig) -> Result<String, CliError> {
    cfg.fill_curve_defaults();
    cfg.fill_shape_defaults();
    cfg.fill_tube_defaults();
    cfg.fill_quadrature_defaults();
    cfg.fill_energy_defaults();
    let curve = optional_curve(&cfg)?;
    let shape = config::build_shape(&cfg)?;
    let tube = config::build_tube(&cfg, curve.as_ref())?;
    shape.validate_domain(tube.length)?;
    let quad = config::build_quadrature(&cfg)?;
    let e = config::build_energy(&cfg)?;
    let rep = energy_report(&shape, &tube, e.ratio, &quad, &e.levels, e.b3_sq_mean, e.mode)?;
    let path = write_report(&cfg, "energy", &rep, json!({ "quadrature": quad, "tube": tube }))?;
    Ok(format!(
        "energy: M = {:.10e}, V_T = {:.10e}, <M> = {:.6e} -> {}",
        rep.m,
        rep.v_total,
        rep.mean_m,
        path.display()
    ))
}

fn dynamo(mut cfg: RunConfig, report: bool) -> Result<String, CliError> {
    cfg.fill_dynamo_defaults(false)?;
    let d = config::build_dynamo(&cfg)?;
    let meta = json!({ "s": { "min": 0.0, "max": d.s_grid.last(), "n": d.s_grid.len() }, "t0": d.t0, "t1": d.t1 });
    if report {
        let rep = dynamo_report(&d.params, &d.s_grid, d.t0)?;
        let path = write_report(&cfg, "dynamo", &rep, meta)?;
        return Ok(format!(
            "dynamo report: {:?}, printed/exact rate {:?}, printed residual {:.3e} -> {}",
            rep.classification,
            rep.rate_ratio,
            rep.printed_field_max_residual,
            path.display()
        ));
    }
    let samples = radius_profile(&d.params, &d.s_grid)?;
    let sol = field_solution(&d.params, samples.profile, d.mode)?;
    let mut table = Table::new(&["s", "R", "R_s", "B3_t0", "B3_t1", "transport_residual"]);
    let mut worst = 0.0f64;
    for (k, &s) in samples.s.iter().enumerate() {
        let res = sol.transport_residual(s, d.t0);
        worst = worst.max(res.abs());
        table.push(vec![s, samples.r[k], samples.r_s[k], sol.b3(s, d.t0), sol.b3(s, d.t1), res]);
    }
    let path = write_table(&cfg, "dynamo", &table, meta)?;
    Ok(format!(
        "dynamo: {} samples, R_inf = {:?}, max field residual {worst:.3e} -> {}",
        samples.s.len(),
        samples.r_infinity,
        path.display()
    ))
}

#[derive(Debug, Clone, Serialize)]
struct Section {
    name: &'static str,
    max_abs_dev: f64,
    verdict: &'static str,
    details: Value,
}

impl Section {
    fn new(name: &'static str, max_abs_dev: f64, consistent: bool, details: Value) -> Self {
        Self {
            name,
            max_abs_dev,
            verdict: if consistent { "consistent" } else { "discrepancy" },
            details,
        }
    }

    fn from_formulas(name: &'static str, rows: Vec<&FormulaDeviation>) -> Self {
        let dev = rows.iter().map(|r| r.max_abs_dev).fold(0.0, f64::max);
        let ok = rows.iter().all(|r| r.consistent);
        Self::new(name, dev, ok, json!(rows))
    }
}

#[derive(Debug, Clone, Serialize)]
struct ValidationReport {
    scenario: String,
    consistent: usize,
    discrepancies: usize,
    sections: Vec<Section>,
}

fn validate(mut cfg: RunConfig) -> Result<String, CliError> {
    let (shape, tube, grid) = tube_setup(&mut cfg)?;
    cfg.fill_quadrature_defaults();
    cfg.fill_energy_defaults();
    cfg.fill_dynamo_defaults(true)?;
    let mut sections = Vec::new();

    let matrix = printed_matrix_report(&shape, &tube, &grid);
    sections.push(Section::new(
        "metric_matrix",
        matrix.max_abs_dev(),
        matrix.flagged().is_empty(),
        json!(matrix),
    ));

    let checks = rrc_check_report(&shape, &tube, &grid);
    let pick = |names: &[&str]| -> Vec<&FormulaDeviation> {
        checks.iter().filter(|c| names.contains(&c.quantity.as_str())).collect()
    };
    sections.push(Section::from_formulas(
        "gamma_112_forms",
        pick(&["Gamma_112_derivative_form", "Gamma_112_lowered"]),
    ));
    sections.push(Section::from_formulas(
        "rrc_printed_forms",
        pick(&["Gamma^n_s1", "Gamma^n_s2", "Gamma^n_s3", "Gamma^s_s2", "Gamma_132"]),
    ));
    sections.push(Section::from_formulas("frenet_sign", pick(&["Gamma_bsn"])));
    sections.push(unstretch_section(&shape, &tube, &grid));

    let d = config::build_dynamo(&cfg)?;
    let rep = dynamo_report(&d.params, &d.s_grid, d.t0)?;
    sections.push(Section::new(
        "radius_decay_rate",
        rep.slope_max_abs_dev,
        rep.slope_max_abs_dev <= CONSISTENT_TOL,
        json!({
            "printed_rate": rep.printed_rate,
            "exact_rate": rep.exact_rate,
            "rate_ratio": rep.rate_ratio,
            "excluded_branch": rep.excluded_branch,
            "r_infinity": rep.r_infinity,
        }),
    ));
    sections.push(Section::new(
        "field_solution",
        rep.printed_field_max_residual,
        rep.printed_field_max_residual <= 1e-8,
        json!({
            "printed_field_max_residual": rep.printed_field_max_residual,
            "printed_residual_vs_rs_b3": rep.printed_residual_vs_rs_b3,
            "exact_field_max_residual": rep.exact_field_max_residual,
            "classification": rep.classification,
            "growth": rep.growth,
        }),
    ));

    let curve = optional_curve(&cfg)?;
    let quad = config::build_quadrature(&cfg)?;
    let e = config::build_energy(&cfg)?;
    let energy = energy_report(&shape, &tube, e.ratio, &quad, &e.levels, e.b3_sq_mean, e.mode)?;
    let dev = (energy.mean_m - energy.mean_m_alternate).abs();
    sections.push(Section::new(
        "epsilon_modes",
        dev,
        dev <= CONSISTENT_TOL * energy.mean_m.abs().max(1.0),
        json!(energy),
    ));

    sections.push(curl_section()?);
    if let Some(curve) = &curve {
        sections.push(frenet_section(&cfg, curve)?);
    }

    let consistent = sections.iter().filter(|s| s.verdict == "consistent").count();
    let report = ValidationReport {
        scenario: cfg.scenario.clone().unwrap_or_else(|| "custom".into()),
        consistent,
        discrepancies: sections.len() - consistent,
        sections,
    };
    let meta = json!({ "grid": grid, "tube": tube, "quadrature": quad, "curl_seed": CURL_SEED });
    let path = write_report(&cfg, "validate", &report, meta)?;
    let flagged: Vec<&str> = report
        .sections
        .iter()
        .filter(|s| s.verdict != "consistent")
        .map(|s| s.name)
        .collect();
    Ok(format!(
        "validate: {} consistent, {} discrepancies [{}] -> {}",
        report.consistent,
        report.discrepancies,
        flagged.join(", "),
        path.display()
    ))
}

fn unstretch_section(shape: &ShapeFunction, tube: &TubeConfig, grid: &SampleGrid) -> Section {
    let mut solved = 0.0f64;
    let mut printed = 0.0f64;
    let mut approx = 0.0f64;
    let mut degenerate = 0usize;
    for [s, chi, phi] in grid.points() {
        match unstretch_ratio(shape, tube, s, chi, phi) {
            Ok(u) => {
                solved = solved.max(u.constraint_residual().abs());
                printed = printed.max((-u.b_as_printed * u.gamma_112 + u.gamma_132).abs());
                approx = approx.max((u.thin_tube_approximation + u.b).abs());
            }
            Err(_) => degenerate += 1,
        }
    }
    Section::new(
        "unstretch_ratio",
        printed,
        printed <= CONSISTENT_TOL,
        json!({
            "constraint_residual_b": solved,
            "constraint_residual_b_as_printed": printed,
            "thin_tube_approximation_max_abs_dev": approx,
            "degenerate_points": degenerate,
        }),
    )
}

fn curl_section() -> Result<Section, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(CURL_SEED);
    let v = VectorField::random_trig(&mut rng, 3, 2);
    let b = VectorField::random_trig(&mut rng, 3, 2);
    let main = curl_advective_identity_check(&v, &b, &CurlGrid::new(16, 1e-4)?)?;
    let coarse = curl_advective_identity_check(&v, &b, &CurlGrid::new(8, 1e-2)?)?;
    let fine = curl_advective_identity_check(&v, &b, &CurlGrid::new(8, 5e-3)?)?;
    let order = (coarse.max_deviation / fine.max_deviation).log2();
    Ok(Section::new(
        "curl_identity",
        main.max_deviation,
        main.max_deviation < 1e-6 && (order - 2.0).abs() < 0.2,
        json!({ "report": main, "convergence_order": order }),
    ))
}

fn frenet_section(cfg: &RunConfig, curve: &ArcCurve) -> Result<Section, CliError> {
    let (a, c) = (cfg.curve.a.unwrap_or(1.0), cfg.curve.c.unwrap_or(1.0));
    let is_helix = cfg.curve.preset.as_deref() == Some("helix");
    let (k_exact, t_exact) = (a / (a * a + c * c), c / (a * a + c * c));
    let n = 16;
    let length = curve.length();
    let mut dev = 0.0f64;
    let mut residual = 0.0f64;
    for i in 0..n {
        let s = (i as f64 + 0.5) * length / n as f64;
        let f = curve.frenet_at(s, curve.default_step())?;
        if is_helix {
            dev = dev.max((f.kappa - k_exact).abs()).max((f.tau - t_exact).abs());
        }
        let r = curve.frenet_serret_residual(s, 1e-3f64.min(0.25 * length / n as f64))?;
        residual = residual.max(r[0]).max(r[1]).max(r[2]);
    }
    Ok(Section::new(
        "frenet_oracle",
        dev,
        dev < 1e-6 && residual < 1e-6,
        json!({
            "analytic_available": is_helix,
            "kappa_exact": k_exact,
            "tau_exact": t_exact,
            "max_frenet_serret_residual": residual,
        }),
    ))
}
