use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ibcurve_core::bounds::{
    bound_trade_off, perturb_joint, random_encoder, refinement_chain, verify_issue3_fano, verify_thm_a1_a2,
    verify_thm_a3, verify_thm_a4, verify_thm_a5,
};
use ibcurve_core::constructs::{dib_envelope, t_alpha_encoder, DEFAULT_MAX_CLASSES};
use ibcurve_core::io::{bounds_to_csv, format_number, joint_to_csv, read_joint, scan_to_csv, scan_to_json, Table};
use ibcurve_core::rng::derive_seed;
use ibcurve_core::solvers::oracle::{MAX_ORACLE_INPUTS, MAX_ORACLE_T};
use ibcurve_core::solvers::{brute_force_front, f_oracle, hard_cluster_front, scan, FrontPoint, ScanResult};
use ibcurve_core::{evaluate, joint_from_function, BoundReport, Error, JointXY, Objective, ProbVector};
use rayon::prelude::*;

use crate::grid::{parse_grid, parse_list, Spacing};
use crate::manifest::{manifest_path_for, RunManifest};
use crate::{AnalyticArgs, CurveArgs, DemoArgs, Outcome, VerifyArgs};

/// Oracle evaluations allowed per front; the simplex grid is coarsened to fit.
const ORACLE_BUDGET: f64 = 2e6;

/// Allowance for the discretization error of the brute-force oracle.
const ORACLE_SLACK: f64 = 0.05;

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<JointXY, Error> {
    read_joint(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidInput(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn require_deterministic(joint: &JointXY) -> Result<(), Error> {
    match joint.first_nondeterministic_row() {
        None => Ok(()),
        Some(r) => Err(Error::Precondition(format!(
            "row {} (x = '{}') puts mass on more than one label; a deterministic joint is required",
            r + 1,
            joint.x_labels()[r]
        ))),
    }
}

fn beta_grid(a: &CurveArgs) -> Result<Vec<f64>, Error> {
    let given = [&a.beta_lin, &a.beta_log, &a.beta_grid].iter().filter(|g| g.is_some()).count();
    if given != 1 {
        return Err(Error::InvalidInput("exactly one of --beta-lin, --beta-log, --beta-grid is required".into()));
    }
    if let Some(s) = &a.beta_lin {
        parse_grid(s, Spacing::Linear)
    } else if let Some(s) = &a.beta_log {
        parse_grid(s, Spacing::Log)
    } else {
        let spacing = if a.objective.is_squared() { Spacing::Log } else { Spacing::Linear };
        parse_grid(a.beta_grid.as_deref().unwrap_or_default(), spacing)
    }
}

pub fn curve(a: &CurveArgs, argv: &[String]) -> Result<Outcome, Error> {
    let joint = load(&a.input)?;
    let grid = beta_grid(a)?;
    let cfg = a.solver.config(a.seed);
    cfg.validate()?;
    let result = scan(&joint, a.objective, &grid, &cfg)?;

    let mut outputs = vec![a.out.clone()];
    write(&a.out, &scan_to_csv(&result)?)?;
    if let Some(j) = &a.json {
        write(j, &(scan_to_json(&result, a.with_encoders)? + "\n"))?;
        outputs.push(j.clone());
    }
    RunManifest::new("curve", argv, Some(&a.input), Some(a.seed), &outputs).write(&manifest_path_for(&a.out))?;

    report_failures(&result);
    Ok(if result.failures() > 0 { Outcome::Partial } else { Outcome::Success })
}

fn report_failures(result: &ScanResult) {
    for p in &result.points {
        match &p.result {
            Err(e) => eprintln!("beta = {}: failed: {e}", format_number(p.beta)),
            Ok(r) if !r.converged => {
                eprintln!("beta = {}: not converged after {} iterations", format_number(p.beta), r.iterations)
            }
            _ => {}
        }
    }
}

fn clustering_label(map: &[usize]) -> String {
    map.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("-")
}

pub fn analytic(a: &AnalyticArgs, argv: &[String]) -> Result<Outcome, Error> {
    let joint = load(&a.input)?;
    require_deterministic(&joint)?;
    let table = if let Some(n) = a.choice.talpha_grid {
        if n < 2 {
            return Err(Error::InvalidInput("--talpha-grid needs at least 2 points".into()));
        }
        let mut t = Table::new(&["alpha", "i_xt", "i_yt", "h_t"]);
        for k in 0..n {
            let alpha = k as f64 / (n - 1) as f64;
            let r = evaluate(&joint, &t_alpha_encoder(alpha, &joint)?)?;
            t.push(vec![format_number(alpha), format_number(r.i_xt), format_number(r.i_yt), format_number(r.h_t)]);
        }
        t
    } else if a.choice.dib_envelope {
        let env = dib_envelope(&joint, DEFAULT_MAX_CLASSES)?;
        let mut t = Table::new(&["h_t", "i_yt"]);
        for p in &env.points {
            t.push(vec![format_number(p.h_t), format_number(p.i_yt)]);
        }
        t
    } else {
        let mut t = Table::new(&["clustering", "clusters", "h_t", "i_xt", "i_yt"]);
        for p in hard_cluster_front(&joint)? {
            t.push(vec![
                clustering_label(p.clustering.map()),
                p.clustering.num_clusters().to_string(),
                format_number(p.h_t),
                format_number(p.i_xt),
                format_number(p.i_yt),
            ]);
        }
        t
    };
    write(&a.out, &table.to_csv()?)?;
    RunManifest::new("analytic", argv, Some(&a.input), None, std::slice::from_ref(&a.out))
        .write(&manifest_path_for(&a.out))?;
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Check {
    A1,
    A2,
    A3,
    A4,
    A5,
    Issue3,
}

fn parse_theorems(spec: &str) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    for t in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        out.push(match t {
            "a1" => Check::A1,
            "a2" => Check::A2,
            "a3" => Check::A3,
            "a4" => Check::A4,
            "a5" => Check::A5,
            "issue3" => Check::Issue3,
            _ => return Err(Error::InvalidInput(format!("unknown theorem '{t}' (expected a1, a2, a3, a4, a5, issue3)"))),
        });
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidInput("--theorems selects nothing".into()));
    }
    Ok(out)
}

/// Number of grid rows of the simplex with `t` symbols and `g` levels.
fn simplex_points(g: usize, t: usize) -> f64 {
    // C(g - 1 + t - 1, t - 1)
    (1..t).fold(1.0, |acc, k| acc * (g - 1 + k) as f64 / k as f64)
}

/// Finest oracle grid whose enumeration fits the budget.
fn oracle_grid(x_card: usize, t: usize) -> usize {
    (2..=21).rev().find(|&g| simplex_points(g, t).powi(x_card as i32) <= ORACLE_BUDGET).unwrap_or(2)
}

fn oracle_front(joint: &JointXY) -> Result<(Vec<FrontPoint>, usize, usize), Error> {
    let t = joint.y_card().clamp(2, MAX_ORACLE_T).min(joint.x_card().max(1));
    let g = oracle_grid(joint.x_card(), t);
    Ok((brute_force_front(joint, t, g)?, t, g))
}

pub fn verify(a: &VerifyArgs, argv: &[String]) -> Result<Outcome, Error> {
    let checks = parse_theorems(&a.theorems)?;
    let eps = parse_list(&a.eps, "--eps")?;
    if eps.is_empty() {
        return Err(Error::InvalidInput("--eps is empty".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(0.0..=0.5).contains(*e)) {
        return Err(Error::InvalidInput(format!("epsilon {e} outside [0, 1/2]")));
    }
    if a.trials == 0 {
        return Err(Error::InvalidInput("--trials must be >= 1".into()));
    }
    let betas = parse_list(&a.beta, "--beta")?;
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(Error::InvalidInput(format!("--beta {b} outside (0, 1)")));
    }
    let fractions = parse_list(&a.r_fractions, "--r-fractions")?;
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0)) {
        return Err(Error::InvalidInput(format!("--r-fractions {f} must be > 0")));
    }
    let joint = load(&a.input)?;
    require_deterministic(&joint)?;
    if joint.y_card() < 2 && eps.iter().any(|e| *e > 0.0) {
        return Err(Error::InvalidInput("perturbations need at least two labels".into()));
    }
    let wants_oracle = checks.iter().any(|c| matches!(c, Check::A3 | Check::A5));
    if wants_oracle && joint.x_card() > MAX_ORACLE_INPUTS {
        return Err(Error::ResourceLimit(format!(
            "a3/a5 need the brute-force oracle, which handles at most {MAX_ORACLE_INPUTS} inputs; got {}",
            joint.x_card()
        )));
    }
    // below |T| = |Y| the oracle front cannot reach compression H(Y)
    if wants_oracle && joint.y_card() > MAX_ORACLE_T {
        return Err(Error::ResourceLimit(format!(
            "a3/a5 need the brute-force oracle, which handles at most {MAX_ORACLE_T} labels; got {}",
            joint.y_card()
        )));
    }
    let cfg = a.solver.config(a.seed);
    cfg.validate()?;

    // (check group, ε index, trial) in output order
    let mut groups: Vec<Check> = Vec::new();
    if checks.iter().any(|c| matches!(c, Check::A1 | Check::A2)) {
        groups.push(Check::A1);
    }
    if wants_oracle {
        groups.push(Check::A3);
    }
    if checks.contains(&Check::A4) {
        groups.push(Check::A4);
    }
    if checks.contains(&Check::Issue3) {
        groups.push(Check::Issue3);
    }
    let jobs: Vec<(Check, usize, usize)> = groups
        .iter()
        .flat_map(|&g| (0..eps.len()).flat_map(move |e| (0..a.trials).map(move |t| (g, e, t))))
        .collect();

    let nx = joint.x_card();
    let h_y = joint.h_y();
    let results: Vec<Result<Vec<BoundReport>, Error>> = jobs
        .par_iter()
        .map(|&(group, e, trial)| {
            let seed = derive_seed(derive_seed(derive_seed(a.seed, group as u64), e as u64), trial as u64);
            let sample = perturb_joint(&joint, eps[e], seed)?;
            let mut rows = Vec::new();
            match group {
                Check::A1 => {
                    let t_card = 1 + (seed as usize % (nx + 1));
                    let enc = random_encoder(nx, t_card, trial % 2 == 0, seed);
                    let (r1, r2) = verify_thm_a1_a2(&sample, &enc)?;
                    if checks.contains(&Check::A1) {
                        rows.push(r1);
                    }
                    if checks.contains(&Check::A2) {
                        rows.push(r2);
                    }
                }
                Check::A3 => {
                    let (front, t, g) = oracle_front(&sample.perturbed)?;
                    for &f in &fractions {
                        let r = f * h_y;
                        if r <= 0.0 {
                            continue;
                        }
                        if checks.contains(&Check::A3) {
                            let mut rep = verify_thm_a3(&sample, r, &front, ORACLE_SLACK)?;
                            rep.notes = format!("{}; oracle t={t} grid={g}", rep.notes);
                            rows.push(rep);
                        }
                        if checks.contains(&Check::A5) {
                            let mut rep = verify_thm_a5(&sample, r, &front)?;
                            rep.notes = format!("{}; oracle t={t} grid={g}", rep.notes);
                            rows.push(rep);
                        }
                    }
                }
                Check::A4 => {
                    for &beta in &betas {
                        let check = verify_thm_a4(&sample, &ibcurve_core::SolverConfig { seed, ..cfg.clone() }, beta)?;
                        rows.extend(check.into_reports());
                    }
                }
                Check::Issue3 => {
                    let chain = refinement_chain(&joint, 1 + trial % 3, seed)?;
                    rows.extend(verify_issue3_fano(&sample, &chain)?.into_reports());
                }
                Check::A2 | Check::A5 => unreachable!("folded into other groups"),
            }
            Ok(rows)
        })
        .collect();
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }

    write(&a.out, &bounds_to_csv(&reports)?)?;
    RunManifest::new("verify", argv, Some(&a.input), Some(a.seed), std::slice::from_ref(&a.out))
        .write(&manifest_path_for(&a.out))?;

    let failures = reports.iter().filter(|r| r.is_failure()).count();
    let inconclusive = reports.iter().filter(|r| r.inconclusive).count();
    eprintln!("{} reports, {failures} violations, {inconclusive} inconclusive", reports.len());
    Ok(if failures > 0 { Outcome::Partial } else { Outcome::Success })
}

/// Values at least `gap` apart, counted greedily from the smallest.
fn distinct_levels(mut xs: Vec<f64>, gap: f64) -> usize {
    xs.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for x in xs {
        if x - last >= gap {
            count += 1;
            last = x;
        }
    }
    count
}

fn span(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub fn demo(a: &DemoArgs, argv: &[String]) -> Result<Outcome, Error> {
    if a.classes < 2 {
        return Err(Error::InvalidInput(format!("--classes must be >= 2, got {}", a.classes)));
    }
    if a.inputs < a.classes {
        return Err(Error::InvalidInput(format!("--inputs ({}) must be >= --classes ({})", a.inputs, a.classes)));
    }
    let f: Vec<usize> = (0..a.inputs).map(|x| x % a.classes).collect();
    let joint = joint_from_function(&f, &ProbVector::uniform(a.inputs)?, a.classes)?;
    let h_y = joint.h_y();
    let cfg = a.solver.config(a.seed);
    cfg.validate()?;

    let lag_grid = parse_grid("0.1:0.9:9", Spacing::Linear)?;
    let sq_grid = parse_grid("0.1:5:15", Spacing::Log)?;
    let lag = scan(&joint, Objective::IbLagrangian, &lag_grid, &cfg)?;
    let sq = scan(&joint, Objective::SquaredIb, &sq_grid, &ibcurve_core::SolverConfig { seed: derive_seed(a.seed, 1), ..cfg.clone() })?;

    let mut plane = Table::new(&["source", "parameter", "i_xt", "i_yt", "h_t", "converged"]);
    for (name, s) in [("ib-lagrangian", &lag), ("squared-ib", &sq)] {
        for p in &s.points {
            let row = match &p.result {
                Ok(r) => vec![
                    format_number(r.report.i_xt),
                    format_number(r.report.i_yt),
                    format_number(r.report.h_t),
                    r.converged.to_string(),
                ],
                Err(_) => vec!["NaN".into(), "NaN".into(), "NaN".into(), "false".into()],
            };
            let mut full = vec![name.to_string(), format_number(p.beta)];
            full.extend(row);
            plane.push(full);
        }
    }
    for k in 0..=10 {
        let alpha = k as f64 / 10.0;
        let r = evaluate(&joint, &t_alpha_encoder(alpha, &joint)?)?;
        plane.push(vec![
            "t-alpha".into(),
            format_number(alpha),
            format_number(r.i_xt),
            format_number(r.i_yt),
            format_number(r.h_t),
            "true".into(),
        ]);
    }
    if a.classes <= DEFAULT_MAX_CLASSES {
        for (i, p) in dib_envelope(&joint, DEFAULT_MAX_CLASSES)?.points.iter().enumerate() {
            // a hard clustering has I(X;T) = H(T)
            plane.push(vec![
                "dib-envelope".into(),
                i.to_string(),
                format_number(p.h_t),
                format_number(p.i_yt),
                format_number(p.h_t),
                "true".into(),
            ]);
        }
    }

    let lag_pts: Vec<_> = lag.solved().map(|(_, r)| r.report).collect();
    let sq_x: Vec<f64> = sq.solved().filter(|(_, r)| r.converged).map(|(_, r)| r.report.i_xt).collect();
    let corner = lag_pts.iter().map(|r| r.plane_distance(h_y, h_y)).fold(0.0, f64::max);
    let lag_span = span(&lag_pts.iter().map(|r| r.i_xt).collect::<Vec<_>>());
    let levels = distinct_levels(sq_x.clone(), 0.01);
    let sq_lo = sq_x.iter().cloned().fold(f64::INFINITY, f64::min);
    let sq_hi = sq_x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut summary = String::new();
    let _ = writeln!(summary, "joint: {} inputs, {} uniform classes, H(Y) = {} nats", a.inputs, a.classes, format_number(h_y));
    let _ = writeln!(summary, "caveat 1 (corner collapse): IB-Lagrangian scan over beta 0.1..0.9");
    let _ = writeln!(summary, "  max distance to <H(Y), H(Y)>: {} nats", format_number(corner));
    let _ = writeln!(summary, "  i_xt span: {} nats", format_number(lag_span));
    let _ = writeln!(summary, "caveat 1 remedy (curve coverage): squared-IB scan over 15 log-spaced beta in 0.1..5");
    let _ = writeln!(summary, "  distinct i_xt levels (>= 0.01 apart): {levels}");
    let _ = writeln!(summary, "  i_xt range: {} .. {} nats", format_number(sq_lo), format_number(sq_hi));
    let _ = writeln!(summary, "caveat 3 (layer trade-off): deterministic joint, so zero-error layers lose no prediction");
    for e in [0.01, 0.1] {
        let _ = writeln!(
            summary,
            "  cap on I(T1;Y) - I(Tk;Y) at eps = {e}: {} nats",
            format_number(bound_trade_off(e, a.classes)?)
        );
    }
    if a.inputs <= MAX_ORACLE_INPUTS {
        let (front, t, g) = oracle_front(&joint)?;
        let gap = sq
            .solved()
            .map(|(_, r)| (r.report.i_yt - f_oracle(&front, r.report.i_xt)).abs())
            .fold(0.0, f64::max);
        let _ = writeln!(summary, "oracle cross-check: |T| = {t}, grid {g}, max gap {} nats", format_number(gap));
        for p in &front {
            plane.push(vec![
                "oracle".into(),
                String::new(),
                format_number(p.i_xt),
                format_number(p.i_yt),
                String::new(),
                "true".into(),
            ]);
        }
    }
    let failures = lag.failures() + sq.failures();
    let _ = writeln!(summary, "failed or unconverged scan points: {failures}");

    fs::create_dir_all(&a.out_dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let outputs: Vec<PathBuf> =
        ["joint.csv", "plane.csv", "summary.txt"].iter().map(|n| a.out_dir.join(n)).collect();
    write(&outputs[0], &joint_to_csv(&joint)?)?;
    write(&outputs[1], &plane.to_csv()?)?;
    write(&outputs[2], &summary)?;
    RunManifest::new("demo", argv, None, Some(a.seed), &outputs).write(&a.out_dir.join("manifest.json"))?;
    print!("{summary}");

    report_failures(&lag);
    report_failures(&sq);
    Ok(if failures > 0 { Outcome::Partial } else { Outcome::Success })
}
