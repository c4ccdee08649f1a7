use std::io::Write;

use fracbound::birman_schwinger::{
    assemble, finite_bound_check, hs_bound, hs_norm, rule_for, top_eigenpair, trace_abs, BSKernel,
};
use fracbound::greens::{dgreens_series, greens_eval, greens_oracle, GreensContext, SERIES_M_MAX};
use fracbound::ground_state::GroundStateSolver;
use fracbound::validation::{self, CriterionReport};
use fracbound::weyl::{grid_ground_energy, SpectralGrid};
use fracbound::FractionalIndex;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{render, Format, Record};
use crate::{CliError, KernelPart};

fn compute(e: fracbound::Error) -> CliError {
    CliError::Compute(e.to_string())
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn context(cfg: &RunConfig) -> Result<GreensContext, CliError> {
    GreensContext::new(cfg.alpha()?, cfg.k_alpha, cfg.kappa).map_err(compute)
}

fn emit(records: &[Record], format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    out.write_all(render(records, format).as_bytes()).map_err(io)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Rows (r, z, G_oracle, G_series, branch, rel_diff).
pub fn greens(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = context(cfg)?;
    let rows = cfg
        .r
        .par_iter()
        .map(|&r| {
            let oracle = greens_oracle(r, &ctx, cfg.tol)?;
            let series = greens_eval(r, &ctx)?;
            let mut rec = Record::default();
            rec.push("r", r)
                .push("z", ctx.z(r))
                .push("G_oracle", oracle)
                .push("G_series", series.value)
                .push("branch", series.branch.as_str())
                .push("rel_diff", rel_diff(series.value, oracle));
            Ok(rec)
        })
        .collect::<fracbound::Result<Vec<_>>>()
        .map_err(compute)?;
    emit(&rows, cfg.format.unwrap_or(Format::Csv), out)
}

/// Rows (r, z, dG_series, dG_fd, rel_diff); the series columns are empty
/// where the residue series is refused.
pub fn dgreens(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = context(cfg)?;
    let h = 1e-4 * cfg.kappa;
    let up = ctx.with_kappa(cfg.kappa + h).map_err(compute)?;
    let down = ctx.with_kappa(cfg.kappa - h).map_err(compute)?;
    let rows = cfg
        .r
        .par_iter()
        .map(|&r| {
            let fd = (greens_oracle(r, &up, cfg.tol)? - greens_oracle(r, &down, cfg.tol)?) / (2.0 * h);
            let series = dgreens_series(r, &ctx, SERIES_M_MAX).ok();
            let mut rec = Record::default();
            rec.push("r", r)
                .push("z", ctx.z(r))
                .push("dG_series", series)
                .push("dG_fd", fd)
                .push("rel_diff", series.map(|s| rel_diff(s, fd)));
            Ok(rec)
        })
        .collect::<fracbound::Result<Vec<_>>>()
        .map_err(compute)?;
    emit(&rows, cfg.format.unwrap_or(Format::Csv), out)
}

fn kernel_summary(cfg: &RunConfig, kernel: &BSKernel) -> Result<Record, CliError> {
    let ctx = kernel.context();
    let nodes = &kernel.rule().nodes;
    let bound = finite_bound_check(kernel, 1e-8).map_err(compute)?;
    let (lambda, _) = top_eigenpair(kernel).map_err(compute)?;
    let mut rec = Record::default();
    rec.push("n", kernel.len())
        .push("alpha", ctx.alpha().value())
        .push("K", ctx.k_alpha())
        .push("kappa", ctx.kappa())
        .push("L", 0.5 * (nodes[nodes.len() - 1] - nodes[0]))
        .push("trace", trace_abs(kernel))
        .push("lambda_max", lambda)
        .push("hs_norm", hs_norm(kernel))
        .push("hs_bound_sq", hs_bound(&cfg.potential, ctx).map_err(compute)?)
        .push("bound_ratio", bound.max_ratio)
        .push("edge_warning", kernel.edge_warning.clone());
    Ok(rec)
}

/// CSV: the requested matrix; JSON: a one-line summary of the kernel.
pub fn kernel(cfg: &RunConfig, part: KernelPart, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = context(cfg)?;
    let rule = rule_for(&cfg.potential, cfg.n, cfg.rule, cfg.half_width).map_err(compute)?;
    let kernel = assemble(&cfg.potential, &rule, &ctx).map_err(compute)?;
    if let Some(w) = &kernel.edge_warning {
        eprintln!("warning: {w}");
    }
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let matrix = match part {
                KernelPart::Full => kernel.full.clone(),
                KernelPart::Sing => kernel.sing.clone(),
                KernelPart::Fin => kernel.fin.clone(),
                KernelPart::FullCorrected => kernel.full_operator(),
                KernelPart::FinCorrected => kernel.fin_operator(),
            };
            kernel.write_csv(&matrix, out).map_err(io)
        }
        Format::Json => emit(&[kernel_summary(cfg, &kernel)?], Format::Json, out),
    }
}

fn solve_record(cfg: &RunConfig, alpha: FractionalIndex, g: f64) -> (Record, bool) {
    let mut rec = Record::default();
    rec.push("g", g).push("alpha", alpha.value()).push("K", cfg.k_alpha);
    let solved = GroundStateSolver::new(cfg.potential, alpha, cfg.k_alpha, cfg.n, cfg.rule, cfg.half_width)
        .and_then(|s| s.solve_kappa(g));
    let oracle = cfg.oracle.map(|o| {
        SpectralGrid::new(o.half_width, o.points)
            .and_then(|grid| grid_ground_energy(&cfg.potential, g, &grid, alpha, cfg.k_alpha))
            .map(|s| s.energy)
    });
    let mut errors = Vec::new();
    match &solved {
        Ok(sol) => {
            rec.push("kappa_star", sol.kappa_star)
                .push("E", sol.energy)
                .push("kappa_pow", sol.kappa_pow)
                .push("expansion", sol.expansion)
                .push("expansion_discrepancy", sol.expansion_discrepancy)
                .push("residual", sol.residual)
                .push("full_kernel_check", sol.full_kernel_check)
                .push("H", sol.h_value)
                .push("iterations", sol.iterations);
        }
        Err(e) => {
            for key in [
                "kappa_star",
                "E",
                "kappa_pow",
                "expansion",
                "expansion_discrepancy",
                "residual",
                "full_kernel_check",
                "H",
                "iterations",
            ] {
                rec.push(key, None::<f64>);
            }
            errors.push(format!("solve: {e}"));
        }
    }
    match oracle {
        Some(Ok(e)) => {
            rec.push("oracle_E", e);
        }
        Some(Err(e)) => {
            rec.push("oracle_E", None::<f64>);
            errors.push(format!("oracle: {e}"));
        }
        None => {
            rec.push("oracle_E", None::<f64>);
        }
    }
    let half_width = solved.as_ref().map(|sol| sol.half_width).ok();
    rec.push("n", cfg.n).push("L", half_width);
    let ok = errors.is_empty();
    rec.push("error", (!ok).then(|| errors.join("; ")));
    (rec, ok)
}

fn solve_all(cfg: &RunConfig, points: Vec<(FractionalIndex, f64)>, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let results: Vec<(Record, bool)> = points
        .par_iter()
        .map(|&(alpha, g)| solve_record(cfg, alpha, g))
        .collect();
    let failed = results.iter().filter(|(_, ok)| !ok).count();
    let records: Vec<Record> = results.into_iter().map(|(r, _)| r).collect();
    emit(&records, format, out)?;
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} solves failed", records.len())));
    }
    Ok(())
}

/// One record per g.
pub fn ground_state(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let alpha = cfg.alpha()?;
    let points = cfg.couplings()?.iter().map(|&g| (alpha, g)).collect();
    solve_all(cfg, points, cfg.format.unwrap_or(Format::Json), out)
}

/// One record per (alpha, g) pair, alpha-major.
pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let gs = cfg.couplings()?;
    let points = cfg
        .alphas
        .iter()
        .flat_map(|&a| gs.iter().map(move |&g| (a, g)))
        .collect();
    solve_all(cfg, points, cfg.format.unwrap_or(Format::Csv), out)
}

/// Runs the acceptance criteria, printing each report as it finishes.
pub fn validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let mut write_err = None;
    let mut write = |r: &CriterionReport| {
        let text = match cfg.format {
            Some(Format::Json) => serde_json::to_string(r).expect("reports serialize"),
            _ => r.to_string(),
        };
        if let Err(e) = writeln!(out, "{text}").and_then(|_| out.flush()) {
            write_err.get_or_insert(e);
        }
    };
    let reports = validation::run(&cfg.only, &mut write);
    if let Some(e) = write_err {
        return Err(io(e));
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if cfg.format != Some(Format::Json) {
        writeln!(out, "\n{} passed, {failed} failed", reports.len() - failed).map_err(io)?;
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} acceptance criteria failed")));
    }
    Ok(())
}
