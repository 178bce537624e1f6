//! Implementations of the subcommands; each returns its report text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nlwave_core::critical_search::{solve_branch, solve_n, SolutionRecord};
use nlwave_core::evolve::{return_error, EvolutionConfig, RETURN_TOL};
use nlwave_core::frequency::{admissible_with_n0, existence_window, max_admissible_n_with_n0, DEFAULT_N0};
use nlwave_core::verification_suite::run_suite;
use nlwave_core::{make_context, NonlinearitySpec};

use crate::config::{ConfigDocument, Plan};
use crate::error::{CliError, CliResult};
use crate::record::{read_record, write_record};

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<impl std::fmt::Display>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn analyze_f(f: &NonlinearitySpec) -> CliResult<String> {
    let cl = *f.classification()?;
    let w = existence_window(f, DEFAULT_N0)?;
    let taylor: Vec<String> = f.taylor().iter().map(|(k, v)| format!("{k}={v}")).collect();
    let mut out = String::new();
    writeln!(out, "taylor = {}", taylor.join(",")).unwrap();
    writeln!(out, "p = {}", cl.p).unwrap();
    writeln!(out, "a = {}", cl.a).unwrap();
    writeln!(out, "case = {}", cl.case.name()).unwrap();
    writeln!(out, "q = {}", cl.q).unwrap();
    writeln!(out, "d = {}", opt(cl.d)).unwrap();
    writeln!(out, "b = {}", opt(cl.b)).unwrap();
    writeln!(out, "side = {}", w.side.name()).unwrap();
    writeln!(out, "n_min = {}", w.n_min).unwrap();
    writeln!(out, "exponent = {}", w.exponent).unwrap();
    Ok(out)
}

pub fn freq(omega: f64, l_max: usize, f: Option<&NonlinearitySpec>, c: f64) -> CliResult<String> {
    let ctx = make_context(omega, l_max)?;
    let mut out = String::new();
    writeln!(out, "omega = {}", num(ctx.omega)).unwrap();
    writeln!(out, "eps = {}", num(ctx.eps)).unwrap();
    writeln!(out, "gamma = {}", num(ctx.gamma)).unwrap();
    writeln!(out, "l_max = {l_max}").unwrap();
    if let Some(f) = f {
        let n_max = max_admissible_n_with_n0(&ctx, f, c, DEFAULT_N0)?;
        let ns: Vec<String> = (1..=n_max)
            .filter(|&n| admissible_with_n0(&ctx, n, f, c, DEFAULT_N0).map(|r| r.ok).unwrap_or(false))
            .map(|n| n.to_string())
            .collect();
        writeln!(out, "c = {c}").unwrap();
        writeln!(out, "n_omega = {n_max}").unwrap();
        writeln!(out, "admissible = {}", ns.join(",")).unwrap();
    }
    Ok(out)
}

fn record_path(plan: &Plan, n: usize, partner: bool) -> PathBuf {
    if plan.n.is_some() && !partner {
        if let Some(p) = &plan.output.record {
            return p.clone();
        }
    }
    let dir = plan.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    dir.join(if partner { format!("record_n{n}_partner.json") } else { format!("record_n{n}.json") })
}

fn summary(r: &SolutionRecord, path: &Path) -> String {
    format!(
        "n = {} accepted = {} residual = {} phi = {} predicted_level = {} h1 = {} path = {}",
        r.n,
        r.accepted,
        num(r.residual),
        num(r.phi),
        num(r.predicted_level),
        num(r.norms.h1),
        path.display()
    )
}

pub fn solve(doc: &ConfigDocument) -> CliResult<String> {
    let plan = doc.plan()?;
    if plan.omegas.len() != 1 {
        return Err(CliError::Config("solve takes a single frequency.omega".into()));
    }
    let ctx = make_context(plan.omegas[0], plan.l_max())?;
    let results = match plan.n {
        Some(n) => vec![(n, solve_n(&ctx, &plan.f, n, &plan.settings))],
        None => solve_branch(&ctx, &plan.f, plan.n_max, &plan.settings)?
            .into_iter()
            .map(|b| (b.n, b.outcome))
            .collect(),
    };
    if results.is_empty() {
        return Err(CliError::Failed(format!(
            "no admissible n <= {} at omega = {} (gamma = {:.3e})",
            plan.n_max, ctx.omega, ctx.gamma
        )));
    }
    let mut out = String::new();
    let mut failures = Vec::new();
    for (n, outcome) in results {
        match outcome {
            Ok((recs, _)) => {
                let r = &recs[0];
                let path = record_path(&plan, n, false);
                write_record(&path, r)?;
                writeln!(out, "{}", summary(r, &path)).unwrap();
                if plan.partners {
                    let p = r.partner_record();
                    let path = record_path(&plan, n, true);
                    write_record(&path, &p)?;
                    writeln!(out, "{}", summary(&p, &path)).unwrap();
                }
                if !r.accepted {
                    failures.push(format!("n = {n}: not accepted"));
                }
            }
            Err(e) => {
                writeln!(out, "n = {n} error = {e}").unwrap();
                failures.push(format!("n = {n}: {e}"));
            }
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Failed(format!("{out}{}", failures.join("\n"))))
    }
}

pub const SCAN_HEADER: &str = "omega,gamma,n_omega,n,status,h1,sup,energy,residual,phi,predicted_level,accepted";

pub fn scan(doc: &ConfigDocument) -> CliResult<String> {
    let plan = doc.plan()?;
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    let s = &plan.settings;
    for &omega in &plan.omegas {
        let ctx = make_context(omega, plan.l_max())?;
        let n_omega = max_admissible_n_with_n0(&ctx, &plan.f, s.c, s.n0)?;
        let ns: Vec<usize> = match plan.n {
            Some(n) => vec![n],
            None => (1..=plan.n_max.min(n_omega)).collect(),
        };
        for n in ns {
            if !s.force && !admissible_with_n0(&ctx, n, &plan.f, s.c, s.n0)?.ok {
                continue;
            }
            let head = format!("{},{},{n_omega},{n}", num(omega), num(ctx.gamma));
            match solve_n(&ctx, &plan.f, n, s) {
                Ok((recs, _)) => {
                    let r = &recs[0];
                    writeln!(
                        out,
                        "{head},ok,{},{},{},{},{},{},{}",
                        num(r.norms.h1),
                        num(r.norms.sup),
                        num(r.energy),
                        num(r.residual),
                        num(r.phi),
                        num(r.predicted_level),
                        r.accepted
                    )
                    .unwrap();
                }
                Err(e) => {
                    let msg = e.to_string().replace([',', '\n'], ";");
                    writeln!(out, "{head},error: {msg},,,,,,,false").unwrap();
                }
            }
        }
    }
    if let Some(path) = &plan.output.table {
        std::fs::write(path, &out).map_err(|e| CliError::io(path, e))?;
        return Ok(format!("table = {}\n", path.display()));
    }
    Ok(out)
}

pub fn verify(selection: &str, seed: u64) -> CliResult<String> {
    let names: Vec<String> = selection.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let reports = run_suite(&names, seed)?;
    let mut out = String::new();
    for r in &reports {
        let details: Vec<String> = r.details.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect();
        writeln!(
            out,
            "{} {} measured={} tolerance={} {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            num(r.measured),
            num(r.tolerance),
            details.join(" ")
        )
        .unwrap();
    }
    if reports.iter().all(|r| r.passed) {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

pub fn evolve(record: &Path, periods: usize) -> CliResult<String> {
    let r = read_record(record)?;
    if periods == 0 {
        return Err(CliError::Config("periods must be >= 1".into()));
    }
    let cfg = EvolutionConfig::for_record(&r, periods);
    let rep = return_error(&r, &cfg)?;
    let mut out = String::new();
    writeln!(out, "periods = {periods}").unwrap();
    writeln!(out, "dt = {}", num(cfg.dt)).unwrap();
    writeln!(out, "substeps = {}", cfg.substeps).unwrap();
    writeln!(out, "modes = {}", cfg.modes).unwrap();
    for (k, e) in rep.period_errors.iter().enumerate() {
        writeln!(out, "return_error_{} = {}", k + 1, num(*e)).unwrap();
    }
    writeln!(out, "minimal_period_error = {}", num(rep.minimal_period_error)).unwrap();
    writeln!(out, "witness_time = {}", num(rep.witness_time)).unwrap();
    writeln!(out, "witness_error = {}", num(rep.witness_error)).unwrap();
    writeln!(out, "energy_drift = {}", num(rep.energy_drift)).unwrap();
    let returns = rep.returns(RETURN_TOL);
    let witness = rep.witnesses_minimality(RETURN_TOL);
    writeln!(out, "returns = {returns}").unwrap();
    writeln!(out, "witness = {witness}").unwrap();
    if returns && witness {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

/// `u` on `nt` times over one period `2 pi / omega` and `nx + 1` points of `[0, pi]`.
pub fn export_grid(r: &SolutionRecord, nt: usize, nx: usize) -> String {
    let mut out = String::from("t,x,u\n");
    let period = 2.0 * std::f64::consts::PI / r.omega;
    for i in 0..nt {
        let t = period * i as f64 / nt as f64;
        for k in 0..=nx {
            let x = std::f64::consts::PI * k as f64 / nx as f64;
            writeln!(out, "{},{},{}", num(t), num(x), num(r.u.eval(r.omega * t, x))).unwrap();
        }
    }
    out
}

/// Nonzero coefficients of `u` on physical indices.
pub fn export_spectrum(r: &SolutionRecord) -> String {
    let mut out = String::from("l,j,coeff\n");
    let la = r.u.lattice();
    for a in 0..=r.u.lt() {
        for b in 1..=r.u.lx() {
            let c = r.u.get(a, b);
            if c != 0.0 {
                writeln!(out, "{},{},{}", la.l(a), la.j(b), num(c)).unwrap();
            }
        }
    }
    out
}

/// `|omega - 1|` against `h1` for the accepted rows of a scan table.
pub fn export_loglog(table: &str) -> CliResult<String> {
    let mut lines = table.lines();
    if lines.next() != Some(SCAN_HEADER) {
        return Err(CliError::Config("not a scan table".into()));
    }
    let mut out = String::from("n,abs_eps,h1,log10_abs_eps,log10_h1\n");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 12 || cols[11] != "true" {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| CliError::Config(format!("bad number {s:?}")));
        let omega = parse(cols[0])?;
        let h1 = parse(cols[5])?;
        let e = (omega - 1.0).abs();
        writeln!(out, "{},{},{},{},{}", cols[3], num(e), num(h1), num(e.log10()), num(h1.log10())).unwrap();
    }
    Ok(out)
}
