use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use dcf_core::equilibrium::{classify, operating_point, solve};
use dcf_core::params::report_attempt_rate;
use dcf_core::stability::{region_report, stable_region_infinite, throughput};
use dcf_core::{Delay, ModelError, Status, SystemParams};
use dcf_sim::compare::relative;
use dcf_sim::{measure_vs_analysis, run, SimConfig, SimRecord, SimStats};
use rayon::prelude::*;

use crate::args::{Spacing, SweepVar};
use crate::output::{delay, gnuplot_script, num, opt, write_text, Table};
use crate::scenario::{CurveGrid, Settings, SweepGrid};
use crate::CliError;

/// Result of one subcommand: the CSV plus a human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: Table,
    pub summary: Option<String>,
    /// Script text when `--plot` was requested.
    pub plot: Option<String>,
}

fn mech(p: &SystemParams) -> String {
    p.mechanism.label().to_string()
}

fn units(p: &SystemParams) -> String {
    p.units.label().to_string()
}

fn millis(p: &SystemParams, slots: f64) -> f64 {
    p.to_millis(slots * p.a)
}

fn no_roots(e: ModelError) -> CliError {
    match e {
        ModelError::NoRoots { .. } => CliError::NoRoots(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

pub fn curve(s: &Settings, grid: &CurveGrid) -> Result<Report, CliError> {
    let p = s.params;
    let mut table = Table::new(vec!["mechanism", "units", "G_per_us", "x", "lambda_out"]);
    for x in grid.values() {
        let lambda = throughput(&p, x).map_err(|e| CliError::Usage(e.to_string()))?;
        table.rows.push(vec![mech(&p), units(&p), num(report_attempt_rate(x)), num(x), num(lambda)]);
    }
    let plot = s.plot.as_ref().map(|_| {
        let data = s.out.as_deref().unwrap_or(Path::new("-"));
        let title = format!("throughput versus attempt rate ({})", p.mechanism);
        gnuplot_script(data, &title, "G_per_us", &[("lambda_out", "lines")], grid.spacing == Spacing::Log)
    });
    Ok(Report { table, summary: None, plot })
}

pub const REGION_HEADER: [&str; 18] = [
    "mechanism", "units", "n", "lambda_hat", "demand", "lambda_max", "x_max", "x_S", "x_L", "G_S_per_us",
    "G_L_per_us", "RT_lo", "RT_hi", "RT_clamped", "RD_lo", "RD_hi", "RT_inf_lo", "RT_inf_hi",
];

pub fn regions(s: &Settings) -> Result<Report, CliError> {
    let p = s.params;
    let r = region_report(&p, s.n, s.lambda_hat).map_err(no_roots)?;
    let inf = stable_region_infinite(&p, s.lambda_hat).map_err(no_roots)?;
    let mut table = Table::new(REGION_HEADER.to_vec());
    table.rows.push(vec![
        mech(&p),
        units(&p),
        s.n.to_string(),
        num(s.lambda_hat),
        num(r.roots.demand),
        num(r.roots.peak.lambda_out),
        num(r.roots.peak.x),
        num(r.roots.small),
        num(r.roots.large),
        num(r.attempt.lo),
        num(r.attempt.hi),
        num(r.stable.lo),
        num(r.stable.hi),
        r.stable_clamped.to_string(),
        opt(r.bounded.map(|b| b.lo)),
        opt(r.bounded.map(|b| b.hi)),
        num(inf.lo),
        num(inf.hi),
    ]);
    let rd = r.bounded.map_or_else(|| "empty".to_string(), |b| b.to_string());
    let summary = format!(
        "{} n={} lambda_hat={}: demand {:.6}, lambda_max {:.6} at x={:.6}\n\
         x_S = {:.7}  x_L = {:.6}  [G_S, G_L] = [{:.6}, {:.6}] per us\n\
         R_T = {}{}\nR_D = {}\n",
        p.mechanism,
        s.n,
        s.lambda_hat,
        r.roots.demand,
        r.roots.peak.lambda_out,
        r.roots.peak.x,
        r.roots.small,
        r.roots.large,
        r.attempt.lo,
        r.attempt.hi,
        r.stable,
        if r.stable_clamped { " (upper edge clamped to 1)" } else { "" },
        rd,
    );
    Ok(Report { table, summary: Some(summary), plot: None })
}

const SWEEP_HEADER: [&str; 21] = [
    "mechanism", "units", "n", "lambda_hat", "q", "K", "demand", "status", "x_eq", "G_eq_per_us", "rho_eq",
    "eq_delay_slots", "eq_delay_ms", "x_S", "G_S_per_us", "rho", "mean_service_slots", "mean_service_ms",
    "delay_slots", "delay_ms", "error",
];

const SWEEP_SIM_HEADER: [&str; 10] = [
    "seed", "horizon", "sim_throughput", "sim_throughput_ci", "sim_sojourn_slots", "sim_sojourn_ms",
    "sim_sojourn_ci", "sim_mean_service", "sim_collision_rate", "sim_error",
];

fn analytic_cells(s: &Settings, n: usize, lambda_hat: f64, q: f64) -> Vec<String> {
    let p = s.params;
    let mut errors = Vec::new();
    let mut row = vec![
        mech(&p),
        units(&p),
        n.to_string(),
        num(lambda_hat),
        num(q),
        s.cutoff.to_string(),
        num(p.demand(lambda_hat)),
    ];
    let eq = solve(&p, n, lambda_hat, q);
    let status = match &eq {
        Ok(e) => e.status,
        Err(_) => classify(region_report(&p, n, lambda_hat).ok().as_ref(), q),
    };
    row.push(status.label().into());
    match eq {
        Ok(e) => {
            let d = e.delay.map(|v| p.to_slots(v));
            row.extend([
                num(e.x),
                num(report_attempt_rate(e.x)),
                num(e.rho),
                delay(d),
                delay(d.map(|v| millis(&p, v))),
            ]);
        }
        Err(err) => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            errors.push(format!("balance: {err}"));
        }
    }
    match operating_point(&p, n, lambda_hat, q) {
        Ok(op) => {
            let svc = p.to_slots(op.moments.mean);
            let d = op.delay.map(|v| p.to_slots(v));
            row.extend([
                num(op.x),
                num(report_attempt_rate(op.x)),
                num(op.load.rho),
                num(svc),
                num(millis(&p, svc)),
                delay(d),
                delay(d.map(|v| millis(&p, v))),
            ]);
        }
        Err(err) => {
            row.extend(std::iter::repeat_n(String::new(), 7));
            errors.push(format!("operating point: {err}"));
        }
    }
    row.push(errors.join("; "));
    row
}

fn sim_cells(s: &Settings, cfg: &SimConfig) -> Vec<String> {
    let mut row = vec![cfg.seed.to_string(), cfg.horizon.to_string()];
    match run(cfg) {
        Ok(out) => {
            let st = out.stats;
            row.extend([
                num(st.throughput.mean),
                num(st.throughput.half_width),
                num(st.mean_sojourn.mean),
                num(millis(&s.params, st.mean_sojourn.mean)),
                num(st.mean_sojourn.half_width),
                num(st.mean_service),
                num(st.collision_rate),
                String::new(),
            ]);
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(e.to_string());
        }
    }
    row
}

pub fn sweep(s: &Settings, grid: &SweepGrid) -> Result<Report, CliError> {
    let mut header = SWEEP_HEADER.to_vec();
    if grid.simulate {
        header.extend(SWEEP_SIM_HEADER);
    }
    let points: Vec<(usize, f64, f64)> = grid
        .values()
        .into_iter()
        .map(|v| match grid.variable {
            SweepVar::Q => (s.n, s.lambda_hat, v),
            SweepVar::Lambda => (s.n, v, s.q),
            SweepVar::N => (v.max(0.0) as usize, s.lambda_hat, s.q),
        })
        .collect();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&(n, lambda_hat, q)| {
            if n == 0 {
                let mut row = vec![String::new(); header.len()];
                row[..7].clone_from_slice(&[
                    mech(&s.params),
                    units(&s.params),
                    n.to_string(),
                    num(lambda_hat),
                    num(q),
                    s.cutoff.to_string(),
                    num(s.params.demand(lambda_hat)),
                ]);
                row[20] = "node count must be >= 1".into();
                return row;
            }
            let mut row = analytic_cells(s, n, lambda_hat, q);
            if grid.simulate {
                row.extend(sim_cells(s, &s.sim_config(n, lambda_hat, q, 0)));
            }
            row
        })
        .collect();
    let plot = s.plot.as_ref().map(|_| {
        let data = s.out.as_deref().unwrap_or(Path::new("-"));
        let x = match grid.variable {
            SweepVar::Q => "q",
            SweepVar::Lambda => "lambda_hat",
            SweepVar::N => "n",
        };
        let mut ys = vec![("delay_ms", "linespoints")];
        if grid.simulate {
            ys.push(("sim_sojourn_ms", "points"));
        }
        gnuplot_script(data, &format!("mean packet delay ({})", s.params.mechanism), x, &ys, false)
    });
    Ok(Report { table: Table { header, rows }, summary: None, plot })
}

fn check(cfg: &SimConfig) -> Result<(), CliError> {
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))
}

fn write_trace(path: &Path, cfg: &SimConfig) -> Result<(), CliError> {
    let traced = SimConfig { trace: true, ..cfg.clone() };
    let out = run(&traced).map_err(|e| CliError::Usage(e.to_string()))?;
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "slot,event,node").map_err(io)?;
    for e in out.trace.unwrap_or_default() {
        writeln!(w, "{},{},{}", e.slot, e.code.code(), e.node).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn configs(s: &Settings) -> Result<Vec<SimConfig>, CliError> {
    let cfgs: Vec<SimConfig> = (0..s.replications).map(|r| s.sim_config(s.n, s.lambda_hat, s.q, r)).collect();
    for c in &cfgs {
        check(c)?;
    }
    Ok(cfgs)
}

fn record_cells(r: &SimRecord) -> Vec<String> {
    vec![
        r.mechanism.to_string(),
        r.n.to_string(),
        num(r.lambda_hat),
        num(r.q),
        r.k.to_string(),
        r.seed.to_string(),
        r.horizon.to_string(),
        num(r.throughput),
        num(r.throughput_ci),
        num(r.mean_sojourn_slots),
        num(r.mean_sojourn_ci),
        num(r.mean_service),
        num(r.collision_rate),
    ]
}

pub fn simulate(s: &Settings) -> Result<Report, CliError> {
    let cfgs = configs(s)?;
    if let Some(path) = &s.trace {
        write_trace(path, &cfgs[0])?;
    }
    let stats: Vec<SimStats> = cfgs
        .par_iter()
        .map(|c| run(c).map(|o| o.stats))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut table = Table::new(SimRecord::HEADER.to_vec());
    let mut summary = String::new();
    for (c, st) in cfgs.iter().zip(&stats) {
        table.rows.push(record_cells(&SimRecord::new(c, st)));
        summary.push_str(&format!(
            "seed {}: throughput {:.5} +- {:.5}, sojourn {:.2} +- {:.2} slots, {} delivered, conserved {}\n",
            c.seed,
            st.throughput.mean,
            st.throughput.half_width,
            st.mean_sojourn.mean,
            st.mean_sojourn.half_width,
            st.delivered,
            st.conserved()
        ));
    }
    Ok(Report { table, summary: Some(summary), plot: None })
}

const COMPARE_HEADER: [&str; 25] = [
    "mechanism", "n", "lambda_hat", "q", "K", "seed", "horizon", "demand", "status", "sim_throughput",
    "sim_throughput_ci", "throughput_rel_err", "mean_service_slots", "sim_mean_service", "service_rel_err",
    "delay_slots", "delay_ms", "sim_sojourn_slots", "sim_sojourn_ms", "sim_sojourn_ci", "sojourn_rel_err",
    "delay_in_ci", "x_eq", "rho_eq", "rho",
];

pub fn compare(s: &Settings) -> Result<Report, CliError> {
    let cfgs = configs(s)?;
    if let Some(path) = &s.trace {
        write_trace(path, &cfgs[0])?;
    }
    let results = cfgs
        .par_iter()
        .map(measure_vs_analysis)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let p = s.params;
    let mut table = Table::new(COMPARE_HEADER.to_vec());
    let mut summary = String::new();
    for (c, cmp) in cfgs.iter().zip(&results) {
        let a = cmp.analysis.as_ref().map_err(|e| no_roots(e.clone()))?;
        let st = &cmp.stats;
        let status = match &a.balance {
            Ok(e) => e.status,
            Err(_) if c.lambda_hat == 0.0 => Status::Stable,
            Err(_) => classify(region_report(&p, c.n, c.lambda_hat).ok().as_ref(), c.q),
        };
        let in_ci = a.sojourn_slots.finite().map(|d| st.mean_sojourn.contains(d));
        table.rows.push(vec![
            mech(&p),
            c.n.to_string(),
            num(c.lambda_hat),
            num(c.q),
            c.cutoff.to_string(),
            c.seed.to_string(),
            c.horizon.to_string(),
            num(a.demand),
            status.label().into(),
            num(st.throughput.mean),
            num(st.throughput.half_width),
            num(relative(st.throughput.mean, a.demand)),
            num(a.service_slots),
            num(st.mean_service),
            num(relative(st.mean_service, a.service_slots)),
            delay(a.sojourn_slots),
            delay(a.sojourn_slots.map(|v| millis(&p, v))),
            num(st.mean_sojourn.mean),
            num(millis(&p, st.mean_sojourn.mean)),
            num(st.mean_sojourn.half_width),
            opt(a.sojourn_slots.finite().map(|d| relative(st.mean_sojourn.mean, d))),
            in_ci.map_or_else(String::new, |b| b.to_string()),
            opt(a.balance.as_ref().ok().map(|e| e.x)),
            opt(a.balance.as_ref().ok().map(|e| e.rho)),
            num(a.operating.load.rho),
        ]);
        let predicted = match a.sojourn_slots {
            Delay::Finite(d) => format!("{d:.2}"),
            Delay::Unbounded => "inf".into(),
        };
        summary.push_str(&format!(
            "seed {}: throughput {:.5} (demand {:.5}), sojourn {:.2} slots (analysis {predicted}), service {:.2} (analysis {:.2})\n",
            c.seed, st.throughput.mean, a.demand, st.mean_sojourn.mean, st.mean_service, a.service_slots
        ));
    }
    Ok(Report { table, summary: Some(summary), plot: None })
}

/// Writes the CSV, the optional script and the summary.
pub fn emit(s: &Settings, report: &Report) -> Result<(), CliError> {
    report.table.emit(s.out.as_deref())?;
    if let (Some(path), Some(script)) = (&s.plot, &report.plot) {
        write_text(path, script)?;
    }
    if let Some(text) = &report.summary {
        if s.out.is_some() {
            print!("{text}");
        } else {
            eprint!("{text}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::GlobalArgs;
    use crate::scenario::Scenario;

    fn settings(g: GlobalArgs) -> Settings {
        Settings::resolve(&g, &Scenario::default()).unwrap()
    }

    #[test]
    fn regions_row_basic() {
        let r = regions(&settings(GlobalArgs::default())).unwrap();
        let row = &r.table.rows[0];
        assert_eq!(row.len(), REGION_HEADER.len());
        let hi: f64 = row[12].parse().unwrap();
        assert!((hi - 0.875).abs() < 0.05);
        assert!(r.summary.unwrap().contains("R_T = ["));
    }

    #[test]
    fn infeasible_demand_is_no_roots() {
        let g = GlobalArgs { lambda: Some(0.95), ..Default::default() };
        assert!(matches!(regions(&settings(g)), Err(CliError::NoRoots(_))));
    }

    #[test]
    fn sweep_marks_unbounded_and_bad_rows() {
        let grid = SweepGrid { variable: SweepVar::Q, start: 0.0, stop: 0.3, step: 0.01, simulate: false };
        let r = sweep(&settings(GlobalArgs::default()), &grid).unwrap();
        assert_eq!(r.table.rows.len(), 31);
        assert!(!r.table.rows[0][20].is_empty(), "q = 0 must be flagged");
        let delay_col = SWEEP_HEADER.iter().position(|h| *h == "delay_slots").unwrap();
        // R_D starts near 0.049: q = 0.03 is unbounded, q = 0.2 finite
        assert_eq!(r.table.rows[3][delay_col], "inf");
        assert!(r.table.rows[20][delay_col].parse::<f64>().unwrap().is_finite());
        assert!(r.table.rows.iter().all(|row| row.len() == SWEEP_HEADER.len()));
    }

    #[test]
    fn curve_rows() {
        let grid = CurveGrid { x_min: 0.01, x_max: 5.0, points: 50, spacing: Spacing::Linear };
        let r = curve(&settings(GlobalArgs::default()), &grid).unwrap();
        assert_eq!(r.table.rows.len(), 50);
        assert_eq!(r.table.rows[0][0], "basic");
    }
}
