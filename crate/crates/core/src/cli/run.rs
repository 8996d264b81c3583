//! Sweep execution and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{assign, parse, parse_path, Mode, SweepConfig, Target};
use super::plot::plot_script;
use super::CliError;
use crate::charge_basis::{build_hamiltonian, parity_expectation, Diagonalizer, Truncation};
use crate::circuit::{closed_form_inverse, CircuitSpec};
use crate::effective_spin::{
    band_structure_on, extract_single_loop, extract_two_loop, half_zone_axis, BandOptions,
};
use crate::giant_spin::{lmg_spectrum, LMGProblem};
use crate::par::{map_indexed, with_workers, Execution};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    /// Overrides the configured output prefix.
    pub out: Option<String>,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub meta: PathBuf,
    pub rows: usize,
    pub all_converged: bool,
}

/// One table row: values in column order plus the convergence flag.
struct Row {
    values: Vec<f64>,
    converged: bool,
    error: Option<String>,
}

impl Row {
    fn failed(width: usize, error: String) -> Self {
        Self {
            values: vec![f64::NAN; width],
            converged: false,
            error: Some(error),
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
fn fmt(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "NaN".into()
    } else if a == 0.0 || (1e-5..1e16).contains(&a) || a.is_infinite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn read_config(path: &Path) -> Result<SweepConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse(&text)
        .and_then(|c| c.resolve())
        .map_err(CliError::Config)
}

/// Schema check only.
pub fn validate(path: &Path) -> Result<SweepConfig, CliError> {
    read_config(path)
}

pub fn run(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let cfg = read_config(path)?;
    run_config(&cfg, opts)
}

fn level_columns(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Row>,
    results: Value,
}

pub fn run_config(cfg: &SweepConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut cfg = cfg.resolve().map_err(CliError::Config)?;
    if let Some(out) = &opts.out {
        cfg.output = out.clone();
    }
    let table = with_workers(opts.workers, || compute(&cfg, opts.execution))?;

    let prefix = PathBuf::from(&cfg.output);
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    let with_ext = |ext: &str| {
        let mut s = prefix.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    let (csv_path, gp_path, meta_path) =
        (with_ext(".csv"), with_ext(".gp"), with_ext(".meta.json"));

    let axis_names: Vec<String> = cfg.sweep.iter().map(|a| a.label()).collect();
    let has_flag = cfg.mode != Mode::Capmat;
    let mut header = axis_names.clone();
    header.extend(table.columns.iter().cloned());
    if has_flag {
        header.push("converged".into());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)
        .map_err(|e| CliError::Output(e.to_string()))?;
    let n_rows = table.rows.len();
    for (i, row) in table.rows.iter().enumerate() {
        let mut rec: Vec<String> = if cfg.mode == Mode::Capmat {
            Vec::new()
        } else {
            cfg.grid_point(i).into_iter().map(fmt).collect()
        };
        rec.extend(row.values.iter().copied().map(fmt));
        if has_flag {
            rec.push(row.converged.to_string());
        }
        w.write_record(&rec)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    write_file(&csv_path, &bytes)?;

    let csv_name = csv_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    write_file(&gp_path, plot_script(&cfg, &csv_name, &header).as_bytes())?;

    let all_converged = table.rows.iter().all(|r| r.converged);
    let failures: Vec<Value> = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.error.as_ref().map(|e| json!({"index": i, "error": e})))
        .collect();
    let meta = json!({
        "tool": "jjarray",
        "version": VERSION,
        "config": cfg,
        "columns": header,
        "rows": n_rows,
        "converged": table.rows.iter().map(|r| r.converged).collect::<Vec<_>>(),
        "all_converged": all_converged,
        "failures": failures,
        "results": table.results,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Output(e.to_string()))?;
    write_file(&meta_path, text.as_bytes())?;

    Ok(RunReport {
        csv: csv_path,
        plot: gp_path,
        meta: meta_path,
        rows: n_rows,
        all_converged,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn targets(cfg: &SweepConfig) -> Vec<Vec<Target>> {
    cfg.sweep
        .iter()
        .map(|a| a.paths.iter().filter_map(|p| parse_path(p)).collect())
        .collect()
}

fn point_spec(cfg: &SweepConfig, base: &CircuitSpec, idx: usize) -> CircuitSpec {
    let mut s = base.clone();
    for (ts, v) in targets(cfg).iter().zip(cfg.grid_point(idx)) {
        for &t in ts {
            assign(t, v, Some(&mut s), None);
        }
    }
    s
}

fn compute(cfg: &SweepConfig, exec: Execution) -> Result<Table, CliError> {
    match cfg.mode {
        Mode::Spectrum | Mode::SweepCharge | Mode::SweepFlux => spectrum_table(cfg, exec),
        Mode::FitTb => fit_table(cfg, exec),
        Mode::LmgScan => lmg_table(cfg, exec),
        Mode::Capmat => capmat_table(cfg),
    }
}

fn spectrum_table(cfg: &SweepConfig, exec: Execution) -> Result<Table, CliError> {
    let base = cfg.circuit_spec().map_err(CliError::Config)?;
    let k = cfg.levels;
    let keep = cfg.flags.keep_eigenvectors;
    let mut columns = level_columns("E", k);
    columns.push("E01".into());
    if keep {
        columns.extend(level_columns("parity", k));
    }
    columns.push("n_max_used".into());
    let width = columns.len();
    let solver = Diagonalizer::default().with_vectors(keep);
    let rows = map_indexed(exec, cfg.grid_len(), |idx| {
        let spec = point_spec(cfg, &base, idx);
        let r = match solver.converged_spectrum(&spec, &cfg.truncation, k) {
            Ok(r) => r,
            Err(e) => return Row::failed(width, e.to_string()),
        };
        let mut values = r.energies.clone();
        values.push(r.e01);
        if keep {
            let t = Truncation {
                n_max: r.n_max_used,
                ..cfg.truncation
            };
            match build_hamiltonian(&spec, &t) {
                Ok(op) => values
                    .extend((0..k).map(|i| parity_expectation(&op, &r, i).unwrap_or(f64::NAN))),
                Err(e) => return Row::failed(width, e.to_string()),
            }
        }
        values.push(r.n_max_used as f64);
        Row {
            values,
            converged: r.converged,
            error: None,
        }
    });
    Ok(Table {
        columns,
        rows,
        results: json!({}),
    })
}

fn fit_table(cfg: &SweepConfig, exec: Execution) -> Result<Table, CliError> {
    let base = cfg.circuit_spec().map_err(CliError::Config)?;
    let columns: Vec<String> = [
        "t",
        "t_plus",
        "t_minus",
        "j",
        "epsilon",
        "residual_rms",
        "bandwidth",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let width = columns.len();
    let axis =
        half_zone_axis(cfg.fit.grid_points).map_err(|e| CliError::Config(vec![e.to_string()]))?;
    let opts = BandOptions {
        truncation: cfg.truncation,
        diagonalizer: Diagonalizer::default(),
        execution: exec,
    };
    let rows = map_indexed(exec, cfg.grid_len(), |idx| {
        let spec = point_spec(cfg, &base, idx);
        let axes = vec![axis.clone(); spec.n_loops()];
        let bands = match band_structure_on(&spec, axes, cfg.levels, &opts) {
            Ok(b) => b,
            Err(e) => return Row::failed(width, e.to_string()),
        };
        let fit = if spec.n_loops() == 1 {
            extract_single_loop(&bands)
        } else {
            extract_two_loop(&bands)
        };
        match fit {
            Ok(f) => Row {
                values: vec![
                    f.t,
                    f.t_plus,
                    f.t_minus,
                    f.j,
                    f.epsilon.first().copied().unwrap_or(f64::NAN),
                    f.residual_rms,
                    f.bandwidth,
                ],
                converged: bands.converged.iter().all(|&c| c),
                error: None,
            },
            Err(e) => Row::failed(width, e.to_string()),
        }
    });
    Ok(Table {
        columns,
        rows,
        results: json!({ "fit_axis": axis }),
    })
}

fn lmg_table(cfg: &SweepConfig, exec: Execution) -> Result<Table, CliError> {
    let base: LMGProblem = cfg
        .lmg
        .as_ref()
        .map(|l| l.problem())
        .ok_or_else(|| CliError::Config(vec!["lmg: required for mode lmg-scan".into()]))?;
    let k = cfg.levels.min(base.n + 1);
    let mut columns = level_columns("E", k);
    columns.extend(
        [
            "gap_e10",
            "eps_over_2j",
            "gap_over_4j",
            "sz_mean",
            "sx_mean",
        ]
        .into_iter()
        .map(String::from),
    );
    let width = columns.len();
    let tg = targets(cfg);
    let problems: Vec<LMGProblem> = (0..cfg.grid_len())
        .map(|idx| {
            let mut p = base;
            for (ts, v) in tg.iter().zip(cfg.grid_point(idx)) {
                for &t in ts {
                    assign(t, v, None, Some(&mut p));
                }
            }
            p
        })
        .collect();
    let rows = map_indexed(exec, problems.len(), |idx| {
        let p = &problems[idx];
        match lmg_spectrum(p, k) {
            Ok(r) => {
                let mut values = r.energies.clone();
                values.extend([
                    r.gap_e10,
                    p.epsilon / (2.0 * p.j),
                    r.gap_e10 / (4.0 * p.j),
                    r.sz_mean,
                    r.sx_mean,
                ]);
                Row {
                    values,
                    converged: true,
                    error: None,
                }
            }
            Err(e) => Row::failed(width, e.to_string()),
        }
    });
    // transition estimate along a sweep over ε alone
    let eps_only = cfg.sweep.len() == 1 && cfg.sweep[0].paths.iter().all(|p| p == "lmg.epsilon");
    let estimate = if eps_only {
        rows.iter()
            .zip(&problems)
            .find(|(r, p)| r.values[k] >= cfg.flags.gap_threshold * 4.0 * p.j)
            .map(|(_, p)| p.epsilon / (2.0 * p.j))
    } else {
        None
    };
    Ok(Table {
        columns,
        rows,
        results: json!({
            "gap_threshold": cfg.flags.gap_threshold,
            "transition_eps_over_2j": estimate,
        }),
    })
}

fn capmat_table(cfg: &SweepConfig) -> Result<Table, CliError> {
    let spec = cfg.circuit_spec().map_err(CliError::Config)?;
    let report = capmat(&spec)?;
    let n = spec.n_loops();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            rows.push(Row {
                values: vec![
                    i as f64,
                    j as f64,
                    report.numerical[(i, j)],
                    report.closed_form[(i, j)],
                    (report.numerical[(i, j)] - report.closed_form[(i, j)]).abs(),
                    report.ec[(i, j)],
                ],
                converged: true,
                error: None,
            });
        }
    }
    Ok(Table {
        columns: [
            "i",
            "j",
            "inv_cap_numerical",
            "inv_cap_closed_form",
            "abs_deviation",
            "ec_ghz",
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        rows,
        results: json!({ "max_relative_deviation": report.max_relative_deviation }),
    })
}

pub struct CapmatReport {
    pub numerical: nalgebra::DMatrix<f64>,
    pub closed_form: nalgebra::DMatrix<f64>,
    pub ec: nalgebra::DMatrix<f64>,
    pub max_relative_deviation: f64,
}

/// Numerical branch-reduced inverse next to the closed form.
pub fn capmat(spec: &CircuitSpec) -> Result<CapmatReport, CliError> {
    let cm = spec.charging_matrix()?;
    let closed = closed_form_inverse(spec.n_loops(), spec.c_big, spec.c_small)?;
    let scale = closed.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let dev = cm
        .inv_cap
        .iter()
        .zip(closed.iter())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        / scale;
    Ok(CapmatReport {
        numerical: cm.inv_cap,
        closed_form: closed,
        ec: cm.ec,
        max_relative_deviation: dev,
    })
}

/// Human-readable output of the `capmat` subcommand.
pub fn capmat_text(n: usize, c_big: f64, c_small: f64) -> Result<String, CliError> {
    let lp = crate::circuit::InterferometerLoop::cos2phi(0.0);
    let spec = CircuitSpec::uniform(n, lp, c_big, c_small);
    spec.validate()?;
    let r = capmat(&spec)?;
    let mut s = String::new();
    let mut block = |title: &str, m: &nalgebra::DMatrix<f64>| {
        s.push_str(title);
        s.push('\n');
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .map(|j| format!("{:>14.9}", m[(i, j)]))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    };
    block("inverse capacitance, numerical (1/fF):", &r.numerical);
    block("inverse capacitance, closed form (1/fF):", &r.closed_form);
    block("charging energies E_C^(ij) (GHz):", &r.ec);
    s.push_str(&format!(
        "max relative deviation: {:e}\n",
        r.max_relative_deviation
    ));
    Ok(s)
}
