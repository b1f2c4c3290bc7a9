//! ξ sweeps: grid rows, row pairs straddling branch crossings, CSV and JSON summary.

use std::f64::consts::PI;
use std::fmt::Write as _;

use cavity_thermo::oracle::compare_regularized;
use cavity_thermo::thermo::{spectral::lowest_mode, ThermoModel, ThermoReport};
use cavity_thermo::{CutoffConstants, Error};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::parallel::map_points;

/// Offset of the rows that straddle a branch crossing.
pub const BOUNDARY_OFFSET: f64 = 1e-6;
/// Shift applied to a grid point that falls on a crossing.
const NUDGE: f64 = 2e-9;

pub const CSV_HEADER: &str = "xi,f_total,f_bb,delta_f,s_total,s_bb,delta_s,e_total,e_bb,delta_e,c_v,\
p1,p2,p3,p1_bb,p2_bb,p3_bb,branch_id";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Grid,
    Boundary,
}

struct Row {
    xi: f64,
    kind: Kind,
    nudged: bool,
    result: Result<ThermoReport, Error>,
}

fn evaluate(model: &ThermoModel, xi: f64, kind: Kind) -> Row {
    match model.report(xi) {
        Err(Error::BranchBoundary { .. }) if kind == Kind::Grid => {
            Row { xi: xi + NUDGE, kind, nudged: true, result: model.report(xi + NUDGE) }
        }
        result => Row { xi, kind, nudged: false, result },
    }
}

/// Crossings that get row pairs: the `cap` largest ones in the grid range. Only the part
/// of the range whose estimated crossing count fits the cap is enumerated.
fn select_boundaries(model: &ThermoModel, lo: f64, hi: f64, cap: usize) -> (Vec<f64>, bool, f64) {
    if cap == 0 || hi <= 0.0 {
        return (Vec::new(), true, hi);
    }
    let g = model.geometry();
    let c = model.cutoffs();
    let a1 = g.a1();
    // Distinct crossings above ξ: octant images with u ≤ v_V a₁/ξ plus single-axis images.
    let estimate = |x: f64| {
        let u = c.v_v * a1 / x;
        let vol = PI * u.powi(3) / (48.0 * g.volume());
        let edge: f64 = g.edges().iter().map(|a| c.v_e * a1 / (2.0 * a * x)).sum();
        vol + edge
    };
    let mut floor = lo.max(1e-12 * hi);
    if estimate(floor) > cap as f64 {
        let (mut a, mut b) = (floor, hi);
        for _ in 0..100 {
            let m = (a * b).sqrt();
            if estimate(m) > cap as f64 {
                a = m;
            } else {
                b = m;
            }
        }
        floor = b;
    }
    let mut found = model.boundaries_between(floor, hi);
    let over = found.len() > cap;
    if over {
        found.drain(..found.len() - cap);
    }
    let truncated = over || floor > lo;
    let lowest = if over { found[0] } else { floor };
    (found, truncated, lowest)
}

fn csv_number(out: &mut String, x: f64) {
    let _ = write!(out, ",{x:.16e}");
}

fn csv_row(out: &mut String, row: &Row) {
    let _ = write!(out, "{:.16e}", row.xi);
    match &row.result {
        Ok(r) => {
            for p in [r.f, r.s, r.e] {
                csv_number(out, p.total);
                csv_number(out, p.blackbody);
                csv_number(out, p.delta);
            }
            csv_number(out, r.c_v.total);
            for p in &r.p {
                csv_number(out, p.total);
            }
            for p in &r.p {
                csv_number(out, p.blackbody);
            }
            let _ = writeln!(out, ",{}", r.branch_id());
        }
        Err(_) => {
            for _ in 0..16 {
                out.push_str(",NaN");
            }
            out.push_str(",\n");
        }
    }
}

pub struct SweepOutput {
    pub csv: String,
    pub summary: Value,
    pub flagged: usize,
}

pub fn geometry_json(model: &ThermoModel) -> Value {
    let g = model.geometry();
    json!({ "a1": g.a(0), "a2": g.a(1), "a3": g.a(2), "volume": g.volume(), "edge_sum": g.edge_sum() })
}

/// Thermal parts of the regularized route against direct mode sums at each ξ.
pub fn direct_comparisons(model: &ThermoModel, xis: &[f64]) -> Result<Value, Error> {
    let g = model.geometry();
    let mut out = Vec::new();
    for &xi in xis {
        let t = g.t_from_xi(xi);
        let omega_max = lowest_mode(g) + 60.0 * t;
        let c = compare_regularized(t, g, model.cutoffs(), model.policy(), omega_max)?;
        out.push(serde_json::to_value(c).expect("plain data"));
    }
    Ok(Value::Array(out))
}

pub fn run(cfg: &RunConfig, cutoffs: CutoffConstants) -> Result<SweepOutput, Error> {
    let model = ThermoModel::new(cfg.geometry, cutoffs, cfg.policy)?;
    // Fill the shared caches before fanning out. A failure here resurfaces in every row
    // that needs the cached value, and those rows are flagged.
    let e0 = model.casimir().ok().map(|c| c.energy);
    let switch_xi = cfg.geometry.xi_from_t(model.switch_temperature());
    let _ = model.calibration();

    let grid = cfg.grid.values();
    let (bounds, truncated, lowest) = select_boundaries(&model, cfg.grid.min, cfg.grid.max, cfg.boundary_rows);
    let mut points: Vec<(f64, Kind)> = grid.iter().map(|&x| (x, Kind::Grid)).collect();
    for &b in &bounds {
        for x in [b - BOUNDARY_OFFSET, b + BOUNDARY_OFFSET] {
            if x >= cfg.grid.min && x <= cfg.grid.max {
                points.push((x, Kind::Boundary));
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let rows: Vec<Row> = map_points(&points, cfg.threads, |&(xi, kind)| evaluate(&model, xi, kind));
    // A straddling row that lands on a neighbouring crossing carries no extra information.
    let (rows, skipped): (Vec<Row>, Vec<Row>) = rows
        .into_iter()
        .partition(|r| !(r.kind == Kind::Boundary && matches!(r.result, Err(Error::BranchBoundary { .. }))));

    let mut csv = String::with_capacity(rows.len() * 330);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv_row(&mut csv, r);
    }

    let flagged: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().err().map(|e| json!({ "xi": r.xi, "error": e.to_string() })))
        .collect();
    let eos = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok())
        .map(|r| r.eos_residual())
        .fold(0.0, f64::max);
    let nudged: Vec<f64> = rows.iter().filter(|r| r.nudged).map(|r| r.xi).collect();
    let oracle = if cfg.oracle_block { direct_comparisons(&model, &cfg.oracle_xi)? } else { Value::Null };

    let summary = json!({
        "geometry": geometry_json(&model),
        "cutoffs": { "v_v": cutoffs.v_v, "v_e": cutoffs.v_e },
        "policy": cfg.policy,
        "eos_max_residual": eos,
        "config": cfg.echo,
        "grid": cfg.grid,
        "casimir_energy": e0,
        "route_switch_xi": switch_xi,
        "rows": {
            "total": rows.len(),
            "grid": rows.iter().filter(|r| r.kind == Kind::Grid).count(),
            "boundary": rows.iter().filter(|r| r.kind == Kind::Boundary).count(),
        },
        "boundaries": {
            "used": bounds.len(),
            "truncated": truncated,
            "lowest_xi_covered": lowest,
            "offset": BOUNDARY_OFFSET,
            "skipped_rows": skipped.len(),
        },
        "nudged_grid_points": nudged,
        "flagged": flagged,
        "oracle": oracle,
        "csv": cfg.csv,
    });
    Ok(SweepOutput { csv, summary, flagged: flagged.len() })
}
