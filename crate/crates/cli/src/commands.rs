use afpp::bifurcation::{
    hysteresis_sweep, saddlenode_xi_critical, sine_schedule, trace_branches, transcritical_xi_critical,
    BifurcationEvent, ContinuationOptions,
};
use afpp::control::{calibrate_bounds, solve, switching_function, verify_pmp, ControlProblem, ControlSolution};
use afpp::equilibria::{equilibrium_at, find_all_equilibria, find_interior_equilibria, prey_free_point, EquilibriumKind};
use afpp::global::{atlas, consequences_report, log_grid, LABEL_TABLE};
use afpp::model::{predator_nullcline_y, prey_nullcline_y, Checks};
use afpp::simulation::{default_envelope, integrate, lyapunov_w, IntegratorOptions, Trajectory};
use afpp::suites::run_all;
use afpp::{Error, ModelParams, ParamName, Result, State};
use serde_json::{json, Value};

use crate::config::{load_params, load_problem};
use crate::output::{num, opt_num, Output};
use crate::{Command, Common};

fn checks(c: &Common) -> Checks {
    Checks {
        allow_zero_food: c.allow_zero_food,
        allow_low_conversion: c.allow_low_conversion,
    }
}

fn params(c: &Common) -> Result<ModelParams> {
    load_params(c.params.as_deref(), &c.set, checks(c))
}

fn integrator(c: &Common) -> Result<IntegratorOptions> {
    let mut o = IntegratorOptions::default();
    if let Some(r) = c.tol_rtol {
        o.rtol = r;
    }
    if let Some(a) = c.tol_atol {
        o.atol = a;
    }
    if !(o.rtol > 0.0 && o.atol > 0.0) {
        return Err(Error::Config("integrator tolerances must be > 0".into()));
    }
    Ok(o)
}

fn continuation(c: &Common) -> Result<ContinuationOptions> {
    let mut o = ContinuationOptions::default();
    if let Some(t) = c.tol_newton {
        if !(t > 0.0) {
            return Err(Error::Config("--tol-newton must be > 0".into()));
        }
        o.newton_tol = t;
    }
    Ok(o)
}

fn tolerances(c: &Common) -> Result<Value> {
    let i = integrator(c)?;
    let k = continuation(c)?;
    Ok(json!({
        "rtol": i.rtol,
        "atol": i.atol,
        "newton": k.newton_tol,
        "hyperbolic": afpp::equilibria::TOL_HYP,
        "bifurcation": afpp::bifurcation::TOL_BIF,
        "positivity": afpp::simulation::TOL_POS,
        "envelope": afpp::simulation::ENVELOPE_TOL,
    }))
}

fn base_meta(c: &Common, p: Option<&ModelParams>) -> Result<Value> {
    Ok(json!({
        "params": p,
        "tolerances": tolerances(c)?,
        "seed": c.seed,
    }))
}

pub fn run(c: &Common, cmd: &Command) -> Result<()> {
    match cmd {
        Command::Equilibria { nullcline_points } => equilibria(c, *nullcline_points),
        Command::Simulate {
            t_end,
            initial,
            samples,
        } => simulate(c, *t_end, initial, *samples),
        Command::Bifurcate {
            param,
            from,
            to,
            axial_points,
        } => bifurcate(c, *param, (*from, *to), *axial_points),
        Command::Hysteresis {
            eps_min,
            eps_max,
            period,
            cycles,
            initial,
            samples,
        } => hysteresis(c, *eps_min, *eps_max, *period, *cycles, *initial, *samples),
        Command::Atlas {
            alpha_min,
            alpha_max,
            xi_min,
            xi_max,
            n,
        } => atlas_cmd(c, (*alpha_min, *alpha_max), (*xi_min, *xi_max), *n),
        Command::Control {
            problem,
            calibrate_to,
            calibrate_tol,
        } => control(c, problem, *calibrate_to, *calibrate_tol),
        Command::Verify => verify(c),
    }
}

fn eq_row(kind: &str, e: &afpp::equilibria::Equilibrium) -> Vec<String> {
    let f = &e.flags;
    let b = |v: Option<bool>| v.map(|b| b.to_string()).unwrap_or_default();
    vec![
        kind.to_string(),
        num(e.location.x),
        num(e.location.y),
        num(e.eigenvalues[0].re),
        num(e.eigenvalues[0].im),
        num(e.eigenvalues[1].re),
        num(e.eigenvalues[1].im),
        e.class.to_string(),
        num(f.phi1),
        num(f.phi2),
        num(f.phi3),
        b(f.below_food_root),
        b(f.above_pest_floor),
        b(f.stability_window),
    ]
}

const EQ_HEADER: [&str; 14] = [
    "kind",
    "x",
    "y",
    "eig1_re",
    "eig1_im",
    "eig2_re",
    "eig2_im",
    "class",
    "phi1",
    "phi2",
    "phi3",
    "below_food_root",
    "above_pest_floor",
    "stability_window",
];

fn equilibria(c: &Common, points: usize) -> Result<()> {
    let p = params(c)?;
    let mut out = Output::new(&c.out, "equilibria", base_meta(c, Some(&p))?)?;
    let list = find_all_equilibria(&p)?;
    out.csv(
        "equilibria.csv",
        &EQ_HEADER,
        list.iter().map(|e| eq_row(&e.kind.to_string(), e)),
    )?;
    let n = points.max(2);
    let rows = (1..=n).map(|i| {
        let x = p.gamma * i as f64 / n as f64;
        vec![
            num(x),
            prey_nullcline_y(&p, x).map(num).unwrap_or_default(),
            num(predator_nullcline_y(&p, x)),
        ]
    });
    out.csv("nullclines.csv", &["x", "prey_nullcline_y", "predator_nullcline_y"], rows)?;
    report(&out);
    Ok(())
}

fn trajectory_rows(run: usize, p: &ModelParams, tr: &Trajectory, samples: usize) -> Vec<Vec<String>> {
    let env = default_envelope(p);
    let w0 = lyapunov_w(p, tr.states[0]);
    let pts: Vec<(f64, State)> = if samples > 0 {
        tr.resample(0.0, tr.t_end(), samples)
    } else {
        tr.times.iter().copied().zip(tr.states.iter().copied()).collect()
    };
    pts.into_iter()
        .map(|(t, s)| {
            vec![
                run.to_string(),
                num(t),
                num(s.x),
                num(s.y),
                num(lyapunov_w(p, s)),
                num(env.gronwall(w0, t)),
            ]
        })
        .collect()
}

fn simulate(c: &Common, t_end: f64, initial: &[State], samples: usize) -> Result<()> {
    let p = params(c)?;
    let opts = integrator(c)?;
    let mut meta = base_meta(c, Some(&p))?;
    meta["initial"] = json!(initial);
    meta["t_end"] = json!(t_end);
    let mut out = Output::new(&c.out, "simulate", meta)?;
    let mut rows = Vec::new();
    let mut events = Vec::new();
    let mut failure = None;
    for (i, &s0) in initial.iter().enumerate() {
        match integrate(&p, s0, t_end, &opts) {
            Ok(tr) => {
                rows.extend(trajectory_rows(i, &p, &tr, samples));
                events.push(json!({ "run": i, "events": tr.events }));
            }
            Err(Error::StepUnderflow { t, partial }) | Err(Error::NonFinite { t, partial }) => {
                rows.extend(trajectory_rows(i, &p, &partial, 0));
                out.truncated = true;
                failure = Some(Error::Degenerate(format!("integration of run {i} stopped at t = {t}")));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    out.csv("trajectory.csv", &["run", "t", "x", "y", "w", "envelope"], rows)?;
    out.json("simulate_summary.json", &json!({ "monitor_events": events }))?;
    report(&out);
    failure.map_or(Ok(()), Err)
}

fn event_row(source: &str, e: &BifurcationEvent) -> Vec<String> {
    let d = &e.diagnostics;
    let s = d.sotomayor.as_ref();
    vec![
        source.to_string(),
        e.kind.as_str().to_string(),
        e.param_name.as_str().to_string(),
        num(e.param_value),
        num(e.bracket.0),
        num(e.bracket.1),
        num(e.location.x),
        num(e.location.y),
        num(d.eigenvalues[0].re),
        num(d.eigenvalues[0].im),
        num(d.eigenvalues[1].re),
        num(d.eigenvalues[1].im),
        d.conditions_hold.map(|b| b.to_string()).unwrap_or_default(),
        opt_num(s.map(|s| s.w_h_mu)),
        opt_num(s.map(|s| s.w_dh_mu_v)),
        opt_num(s.map(|s| s.w_d2h_vv)),
    ]
}

fn bifurcate(c: &Common, name: ParamName, range: (f64, f64), axial_points: usize) -> Result<()> {
    let p = params(c)?;
    if !(range.0.is_finite() && range.1.is_finite() && range.0 < range.1) {
        return Err(Error::Config(format!("--from must be below --to, got {} and {}", range.0, range.1)));
    }
    let opts = continuation(c)?;
    let mut meta = base_meta(c, Some(&p))?;
    meta["param"] = json!(name.as_str());
    meta["range"] = json!([range.0, range.1]);
    let mut out = Output::new(&c.out, "bifurcate", meta)?;
    let branches = trace_branches(&p, name, range, &opts)?;
    let mut rows = Vec::new();
    let mut events = Vec::new();
    let mut notes = Vec::new();
    for (id, b) in branches.iter().enumerate() {
        if let Some(reason) = &b.truncated {
            out.truncated = true;
            notes.push(format!("branch {id}: {reason}"));
        }
        for pt in &b.points {
            let e = &pt.equilibrium;
            rows.push(vec![
                id.to_string(),
                num(pt.param_value),
                num(e.location.x),
                num(e.location.y),
                num(e.eigenvalues[0].re),
                num(e.eigenvalues[0].im),
                num(e.eigenvalues[1].re),
                num(e.eigenvalues[1].im),
                e.class.to_string(),
            ]);
        }
        events.extend(b.events.iter().map(|e| event_row("continuation", e)));
    }
    if name == ParamName::Xi {
        for ev in [transcritical_xi_critical(&p), saddlenode_xi_critical(&p)].into_iter().flatten() {
            events.push(event_row("closed_form", &ev));
        }
    }
    out.csv(
        "branches.csv",
        &["branch", "param", "x", "y", "eig1_re", "eig1_im", "eig2_re", "eig2_im", "class"],
        rows,
    )?;
    out.csv(
        "events.csv",
        &[
            "source",
            "kind",
            "param_name",
            "param",
            "bracket_lo",
            "bracket_hi",
            "x",
            "y",
            "eig1_re",
            "eig1_im",
            "eig2_re",
            "eig2_im",
            "conditions_hold",
            "w_h_mu",
            "w_dh_mu_v",
            "w_d2h_vv",
        ],
        events,
    )?;
    // boundary equilibria along the same parameter
    let n = axial_points.max(2);
    let mut axial = Vec::new();
    for i in 0..n {
        let v = range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64;
        let q = p.with(name, v);
        let mut pts = vec![
            (EquilibriumKind::E0, State::ORIGIN),
            (EquilibriumKind::E1, State::new(q.gamma, 0.0)),
        ];
        if let Some(e2) = prey_free_point(&q) {
            pts.push((EquilibriumKind::E2, e2));
        }
        for (kind, at) in pts {
            let mut r = vec![num(v)];
            r.extend(eq_row(&kind.to_string(), &equilibrium_at(&q, at, kind)));
            axial.push(r);
        }
    }
    let mut header = vec!["param"];
    header.extend(EQ_HEADER);
    out.csv("axial.csv", &header, axial)?;
    if !notes.is_empty() {
        out.json("bifurcate_notes.json", &json!({ "truncated_branches": notes }))?;
    }
    report(&out);
    Ok(())
}

fn hysteresis(
    c: &Common,
    eps_min: f64,
    eps_max: f64,
    period: f64,
    cycles: u32,
    initial: Option<State>,
    samples: usize,
) -> Result<()> {
    let p = params(c)?;
    let opts = integrator(c)?;
    let schedule = sine_schedule(eps_min, eps_max, period);
    let start = match initial {
        Some(s) => s,
        None => find_interior_equilibria(&p.with(ParamName::Epsilon, schedule(0.0)))?
            .first()
            .map(|e| e.location)
            .ok_or_else(|| Error::Config("no interior equilibrium at the sweep start; pass --initial".into()))?,
    };
    let mut meta = base_meta(c, Some(&p))?;
    meta["sweep"] = json!({
        "eps_min": eps_min, "eps_max": eps_max, "period": period, "cycles": cycles,
        "initial": start,
    });
    let mut out = Output::new(&c.out, "hysteresis", meta)?;
    let r = hysteresis_sweep(&p, eps_min, eps_max, period, cycles, start, &opts)?;
    let t_end = r.trajectory.t_end();
    let rows = r
        .trajectory
        .resample(0.0, t_end, samples.max(2))
        .into_iter()
        .map(|(t, s)| vec![num(t), num(schedule(t)), num(s.x), num(s.y)]);
    out.csv("sweep.csv", &["t", "eps", "x", "y"], rows)?;
    out.json(
        "hysteresis_summary.json",
        &json!({ "loop_area_proxy": r.loop_area_proxy, "jumps": r.jumps }),
    )?;
    report(&out);
    Ok(())
}

fn atlas_cmd(c: &Common, alpha: (f64, f64), xi: (f64, f64), n: usize) -> Result<()> {
    let mut ch = checks(c);
    ch.allow_zero_food = true;
    let p = load_params(c.params.as_deref(), &c.set, ch)?;
    if n < 2 || !(alpha.0 > 0.0 && alpha.0 < alpha.1 && xi.0 > 0.0 && xi.0 < xi.1) {
        return Err(Error::Config("atlas ranges must be positive and increasing, with n >= 2".into()));
    }
    let mut meta = base_meta(c, Some(&p))?;
    meta["grid"] = json!({ "alpha": [alpha.0, alpha.1], "xi": [xi.0, xi.1], "n": n, "spacing": "log" });
    meta["label_table"] = json!(LABEL_TABLE);
    let mut out = Output::new(&c.out, "atlas", meta)?;
    let at = atlas(&p, &log_grid(alpha.0, alpha.1, n), &log_grid(xi.0, xi.1, n))?;
    let cls = |v: Option<afpp::equilibria::StabilityClass>| v.map(|c| c.to_string()).unwrap_or_default();
    let rows = at.cells.iter().map(|cell| {
        let l = &cell.label;
        let f = &l.flags;
        vec![
            num(cell.alpha),
            num(cell.xi),
            num(cell.phi.0),
            num(cell.phi.1),
            num(cell.phi.2),
            l.base_region.to_string(),
            l.subregion.clone(),
            l.signs.clone(),
            cls(f.e0_class),
            cls(f.e1_class),
            cls(f.e2_class),
            f.interior_count.to_string(),
            f.stable_interior_count.to_string(),
            f.bistable.to_string(),
            opt_num(f.min_stable_interior_x),
            f.error.clone().unwrap_or_default(),
        ]
    });
    out.csv(
        "atlas.csv",
        &[
            "alpha",
            "xi",
            "phi1",
            "phi2",
            "phi3",
            "base_region",
            "subregion",
            "signs",
            "e0_class",
            "e1_class",
            "e2_class",
            "interior_count",
            "stable_interior_count",
            "bistable",
            "min_stable_interior_x",
            "error",
        ],
        rows,
    )?;
    let rep = consequences_report(&at);
    out.json(
        "atlas_summary.json",
        &json!({
            "base_region": at.base_region.to_string(),
            "cells": at.cells.len(),
            "pest_floor": rep.floor,
            "stable_prey_free_cells": rep.stable_prey_free_cells,
            "pest_dominance_cells": rep.dominance_cells,
            "floor_violations": rep.floor_violations,
        }),
    )?;
    report(&out);
    Ok(())
}

fn control_rows(pr: &ControlProblem, sol: &ControlSolution) -> Vec<Vec<String>> {
    (0..sol.states.len())
        .map(|k| {
            // the control of the interval starting at node k; the last node repeats the final one
            let u = sol.controls.get(k).or(sol.controls.last()).copied().unwrap_or(f64::NAN);
            let sigma = sol
                .costates
                .as_ref()
                .map(|c| switching_function(&pr.params, sol.states[k], c[k], pr.control));
            vec![
                num(sol.s_grid[k]),
                num(sol.t_grid[k]),
                num(sol.states[k].x),
                num(sol.states[k].y),
                num(u),
                opt_num(sigma),
            ]
        })
        .collect()
}

fn control(c: &Common, path: &std::path::Path, calibrate_to: Option<f64>, rel_tol: f64) -> Result<()> {
    let fallback = if c.params.is_some() || !c.set.is_empty() {
        Some(params(c)?)
    } else {
        None
    };
    let mut pr = load_problem(path, fallback)?;
    let mut meta = base_meta(c, Some(&pr.params))?;
    meta["problem"] = json!(pr);
    let mut out = Output::new(&c.out, "control", meta)?;
    let mut calibration = Value::Null;
    let result = match calibrate_to {
        Some(target) => {
            let cal = calibrate_bounds(&pr, target, rel_tol)?;
            calibration = json!({
                "target_time": cal.target_time,
                "rel_tol": cal.rel_tol,
                "attempts": cal.attempts,
                "calibrated_bounds": cal.bounds,
            });
            if let Some(b) = cal.bounds {
                pr.bounds = b;
            }
            match cal.solution {
                Some(s) => Ok(s),
                None => solve(&pr),
            }
        }
        None => solve(&pr),
    };
    let (sol, failure) = match result {
        Ok(s) => (s, None),
        Err(Error::Infeasible { best_residual, best }) => {
            out.truncated = true;
            let sol = *best;
            let e = Error::Infeasible {
                best_residual,
                best: Box::new(sol.clone()),
            };
            (sol, Some(e))
        }
        Err(e) => return Err(e),
    };
    out.csv("control.csv", &["s", "t", "x", "y", "u", "sigma"], control_rows(&pr, &sol))?;
    let pmp = if failure.is_none() && sol.costates.is_some() {
        verify_pmp(&sol, &pr).ok()
    } else {
        None
    };
    out.json(
        "control_summary.json",
        &json!({
            "status": if failure.is_some() { "infeasible" } else if sol.nlp_stats.converged { "converged" } else { "not_converged" },
            "control": pr.control,
            "bounds": pr.bounds,
            "S_opt": sol.s_opt,
            "T_opt": sol.t_opt,
            "switching_times": sol.switching_times,
            "switching_s": sol.switching_s,
            "nlp_stats": sol.nlp_stats,
            "calibration": calibration,
            "pmp": pmp.map(|r| json!({
                "source": r.source,
                "fraction": r.fraction,
                "passed": r.passed,
                "checked_intervals": r.checked_intervals,
                "switches_bracketed": r.switches_bracketed,
                "adjoint_discrepancy": r.adjoint_discrepancy,
            })),
        }),
    )?;
    report(&out);
    failure.map_or(Ok(()), Err)
}

fn verify(c: &Common) -> Result<()> {
    let mut out = Output::new(&c.out, "verify", base_meta(c, None)?)?;
    let reports = run_all(c.seed);
    let mut failed = 0;
    for r in &reports {
        let ok = r.passed();
        if !ok {
            failed += 1;
        }
        println!(
            "{} {}: {} checked, {} failures, worst {:e}",
            if ok { "PASS" } else { "FAIL" },
            r.name,
            r.checked,
            r.failures,
            r.worst
        );
    }
    out.json("verify.json", &json!({ "suites": reports }))?;
    report(&out);
    if failed > 0 {
        return Err(Error::Degenerate(format!("{failed} invariant suite(s) failed")));
    }
    Ok(())
}

fn report(out: &Output) {
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
}
