use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use urgl_core::coherence::{bfm_compatible, peierls_compatible, rho_pm_scenario, support_angle, w_compatible};
use urgl_core::quantumness::minimality_experiment_multi;
use urgl_core::random::{random_density, random_povm, seeded_rng};
use urgl_core::reference::{
    born_probability_form, evolve_probs, ltp_classical, measurement_to_cond, phi_matrix, state_to_probs,
};
use urgl_core::sic::{
    find_sic_fiducial, frame_potential, frame_potential_minimum, overlap_residual, sic_from_fiducial, sic_reference,
    verify_sic, Fiducial, FiducialFile, SearchOptions, SearchOutcome, WeylHeisenberg,
};
use urgl_core::wigner::{
    composite_state, observer_query, probe_povm, reversal_check, reversal_with_collapse, two_perspective_report,
    WignerScenario,
};
use urgl_core::{born_operator, DensityOperator, Error, Ket, Povm, ProbVector, ReferenceApparatus, UnitaryMap};

use crate::report::{print_json, write_csv, write_json, Envelope, Outputs, Table};
use crate::{
    BornCheckArgs, Cli, Command, CompatArgs, Criterion, EvolveArgs, GlobalOpts, QuantumnessArgs, ScenarioCommand,
    SicCommand, SicFindArgs, SicVerifyArgs, WignerArgs,
};

/// What a command produced before it is written out.
struct Outcome {
    config: Value,
    result: Value,
    table: Option<Table>,
    passed: bool,
    extra_outputs: Vec<PathBuf>,
}

impl Outcome {
    fn new(config: Value, result: Value, passed: bool) -> Self {
        Self {
            config,
            result,
            table: None,
            passed,
            extra_outputs: Vec::new(),
        }
    }

    fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

/// 2 for mathematical failures reported by the library, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse(_)) | Some(Error::InvalidNorm(_)) | None => 1,
        Some(_) => 2,
    }
}

/// Runs the command and writes its report; `Ok(false)` means the command
/// completed but its check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Sic(SicCommand::Find(a)) => sic_find(g, a)?,
        Command::Sic(SicCommand::Verify(a)) => sic_verify(g, a)?,
        Command::BornCheck(a) => born_check(g, a)?,
        Command::Quantumness(a) => quantumness(g, a)?,
        Command::Evolve(a) => evolve(g, a)?,
        Command::Compat(a) => compat(g, a)?,
        Command::Scenario(ScenarioCommand::RhoPm) => scenario_rho_pm(g)?,
        Command::Wigner(a) => wigner(g, a)?,
    };

    if let Some(path) = &g.csv {
        let table = outcome
            .table
            .as_ref()
            .ok_or_else(|| anyhow!("this command has no flat table for --csv"))?;
        write_csv(path, table)?;
    }
    let outputs = Outputs {
        json: g.json_path().cloned(),
        csv: g.csv.clone(),
        extra: outcome.extra_outputs.clone(),
    };
    let envelope = Envelope::new(outcome.config, outcome.result, outputs);
    match g.json_path() {
        Some(path) => {
            write_json(path, &envelope)?;
            println!(
                "{}: report written to {}",
                if outcome.passed { "ok" } else { "FAILED" },
                path.display()
            );
        }
        None => print_json(&envelope)?,
    }
    Ok(outcome.passed)
}

fn config(command: &str, g: &GlobalOpts, options: Value) -> Value {
    json!({
        "command": command,
        "dim": g.dim,
        "seed": g.seed,
        "tol": g.tol,
        "options": options,
    })
}

fn require_seed(g: &GlobalOpts) -> Result<u64> {
    g.seed.ok_or_else(|| anyhow!("--seed is required for this command"))
}

fn require_dim(g: &GlobalOpts, default: Option<usize>) -> Result<usize> {
    let d = g
        .dim
        .or(default)
        .ok_or_else(|| anyhow!("-d/--dim is required for this command"))?;
    if d < 2 {
        bail!("dimension must be at least 2, got {d}");
    }
    Ok(d)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Accepts a density operator `{"dim", "matrix"}` or a ket `{"re", "im"}`.
fn read_state(path: &Path) -> Result<DensityOperator> {
    let v: Value = read_json(path)?;
    if v.get("matrix").is_some() {
        serde_json::from_value(v).with_context(|| format!("parsing density operator in {}", path.display()))
    } else {
        let ket: Ket = serde_json::from_value(v).with_context(|| format!("parsing ket in {}", path.display()))?;
        Ok(ket.density())
    }
}

fn builtin_reference(d: usize) -> Result<ReferenceApparatus> {
    let f = Fiducial::builtin(d)
        .ok_or_else(|| anyhow!("no built-in SIC for d = {d}; pass --reference"))??;
    Ok(sic_reference(&f)?)
}

fn sic_find(g: &GlobalOpts, a: &SicFindArgs) -> Result<Outcome> {
    let d = require_dim(g, None)?;
    let seed = require_seed(g)?;
    let opts = SearchOptions {
        restarts: a.restarts,
        max_iters: a.max_iters,
        target_residual: a.target,
    };
    let cfg = config("sic find", g, json!({ "search": opts, "out": a.out }));
    let outcome = find_sic_fiducial(d, seed, &opts)?;
    match outcome {
        SearchOutcome::Found(s) => {
            let file = s.fiducial.to_file(s.residual);
            let mut table = Table::new(["index", "re", "im"]);
            for (k, (re, im)) in file.re.iter().zip(&file.im).enumerate() {
                table.push(vec![k.to_string(), re.to_string(), im.to_string()]);
            }
            let mut extra = Vec::new();
            if let Some(out) = &a.out {
                let text = serde_json::to_string_pretty(&file)?;
                fs::write(out, text + "\n").with_context(|| format!("writing {}", out.display()))?;
                extra.push(out.clone());
            }
            let result = json!({
                "found": true,
                "dim": d,
                "residual": s.residual,
                "objective": s.objective,
                "objective_minimum": frame_potential_minimum(d),
                "restart": s.restart,
                "iterations": s.iterations,
                "restarts_tried": s.restarts_tried,
                "provenance": s.fiducial.provenance,
                "verification": s.report,
                "fiducial": file,
            });
            let mut o = Outcome::new(cfg, result, true).with_table(table);
            o.extra_outputs = extra;
            Ok(o)
        }
        SearchOutcome::NotFound(nf) => {
            let mut result = serde_json::to_value(&nf)?;
            result["found"] = json!(false);
            eprintln!(
                "no fiducial reached residual {:e} (best {:e} after {} restarts)",
                a.target, nf.best_residual, nf.restarts_tried
            );
            Ok(Outcome::new(cfg, result, false))
        }
    }
}

fn sic_verify(g: &GlobalOpts, a: &SicVerifyArgs) -> Result<Outcome> {
    let cfg = config(
        "sic verify",
        g,
        json!({ "fiducial": a.fiducial_path(), "povm": a.povm, "builtin": a.builtin }),
    );
    let (povm, fiducial_info) = if let Some(path) = a.fiducial_path() {
        let file: FiducialFile = read_json(path)?;
        let f = Fiducial::from_file(&file)?;
        (sic_from_fiducial(&f), Some(fiducial_summary(&f)))
    } else if let Some(path) = &a.povm {
        let povm: Povm = read_json(path)?;
        (povm, None)
    } else {
        let d = require_dim(g, None)?;
        let f = Fiducial::builtin(d).ok_or_else(|| anyhow!("no built-in fiducial for d = {d} (only 2 and 3)"))??;
        (sic_from_fiducial(&f), Some(fiducial_summary(&f)))
    };
    let report = verify_sic(&povm, g.tol)?;
    let passed = report.passed;
    if !passed {
        eprintln!("not a SIC at tolerance {:e}: max deviation {:e}", g.tol, report.max_deviation());
    }
    let result = json!({
        "passed": passed,
        "max_deviation": report.max_deviation(),
        "verification": report,
        "fiducial": fiducial_info,
    });
    Ok(Outcome::new(cfg, result, passed))
}

fn fiducial_summary(f: &Fiducial) -> Value {
    let wh = WeylHeisenberg::new(f.dim());
    let psi = f.ket.amplitudes();
    json!({
        "dim": f.dim(),
        "overlap_residual": overlap_residual(&wh, psi),
        "frame_potential": frame_potential(&wh, psi),
        "frame_potential_minimum": frame_potential_minimum(f.dim()),
    })
}

fn born_check(g: &GlobalOpts, a: &BornCheckArgs) -> Result<Outcome> {
    let d = require_dim(g, Some(2))?;
    let seed = require_seed(g)?;
    let m = a.outcomes.unwrap_or(d + 1);
    if m == 0 {
        bail!("--outcomes must be positive");
    }
    let cfg = config("born-check", g, json!({ "samples": a.samples, "outcomes": m }));

    let mut table = Table::new(["sample", "equivalence_deviation", "gap"]);
    let mut per_sample = Vec::with_capacity(a.samples);
    let (mut max_dev, mut max_gap, mut gap_sum) = (0.0f64, 0.0f64, 0.0f64);
    let mut min_gap = f64::INFINITY;
    for i in 0..a.samples {
        let mut rng = seeded_rng(seed, i as u64);
        let rho = random_density(d, &mut rng);
        let povm = random_povm(d, m, &mut rng)?;
        let reference = ReferenceApparatus::random(d, &mut rng)?;
        let phi = phi_matrix(&reference)?;
        let p = state_to_probs(&rho, &reference)?;
        let cond = measurement_to_cond(&povm, &reference)?;
        let q_op = born_operator(&rho, &povm)?;
        let q_prob = born_probability_form(&p, &cond, &phi)?;
        let classical = ltp_classical(&p, &cond)?;
        let dev = q_op.max_abs_diff(&q_prob);
        let gaps: Vec<f64> = q_op
            .entries()
            .iter()
            .zip(classical.entries())
            .map(|(q, c)| (q - c).abs())
            .collect();
        let gap = gaps.iter().copied().fold(0.0, f64::max);
        gap_sum += gaps.iter().sum::<f64>() / m as f64;
        max_dev = max_dev.max(dev);
        max_gap = max_gap.max(gap);
        min_gap = min_gap.min(gap);
        table.push(vec![i.to_string(), dev.to_string(), gap.to_string()]);
        per_sample.push(json!({ "sample": i, "equivalence_deviation": dev, "gap": gap }));
    }
    let n = a.samples;
    let passed = max_dev <= g.tol;
    let result = json!({
        "dim": d,
        "samples": n,
        "outcomes": m,
        "max_equivalence_deviation": max_dev,
        "mean_gap": if n > 0 { Some(gap_sum / n as f64) } else { None },
        "max_gap": max_gap,
        "min_gap": if n > 0 { Some(min_gap) } else { None },
        "passed": passed,
        "per_sample": per_sample,
    });
    Ok(Outcome::new(cfg, result, passed).with_table(table))
}

fn quantumness(g: &GlobalOpts, a: &QuantumnessArgs) -> Result<Outcome> {
    let d = require_dim(g, Some(2))?;
    let seed = require_seed(g)?;
    let norms: Vec<String> = a.norm.iter().map(|n| n.to_string()).collect();
    let cfg = config("quantumness", g, json!({ "norms": norms, "samples": a.samples }));
    let reports = minimality_experiment_multi(d, &a.norm, a.samples, seed)?;
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    if violations > 0 {
        eprintln!("{violations} samples fell below the SIC value");
    }
    let mut table = Table::new(std::iter::once("row".to_string()).chain(norms.iter().cloned()));
    let rows = reports.first().map_or(0, |r| r.distances.len());
    for i in 0..rows {
        let mut row = vec![i.to_string()];
        row.extend(reports.iter().map(|r| r.distances[i].to_string()));
        table.push(row);
    }
    let result = json!({ "violations": violations, "reports": reports });
    Ok(Outcome::new(cfg, result, violations == 0).with_table(table))
}

fn evolve(g: &GlobalOpts, a: &EvolveArgs) -> Result<Outcome> {
    let cfg = config(
        "evolve",
        g,
        json!({ "probs": a.probs, "state": a.state, "unitary": a.unitary, "reference": a.reference }),
    );
    let state = a.state.as_deref().map(read_state).transpose()?;
    let probs: Option<ProbVector> = a.probs.as_deref().map(read_json).transpose()?;
    let d = match (&state, &probs) {
        (Some(s), _) => s.dim(),
        (None, Some(p)) => {
            let d = (p.len() as f64).sqrt().round() as usize;
            if d * d != p.len() {
                bail!("{} probabilities is not d² for any d", p.len());
            }
            d
        }
        (None, None) => bail!("pass --probs or --state"),
    };
    let reference = match &a.reference {
        Some(path) => read_json::<ReferenceApparatus>(path)?,
        None => builtin_reference(d)?,
    };
    if reference.dim() != d {
        bail!("reference apparatus has dimension {}, input has {d}", reference.dim());
    }
    let u = match &a.unitary {
        Some(path) => read_json::<UnitaryMap>(path)?,
        None => UnitaryMap::identity(d),
    };
    let p0 = match (state, probs) {
        (Some(s), _) => state_to_probs(&s, &reference)?,
        (None, Some(p)) => p,
        (None, None) => unreachable!(),
    };
    let p1 = evolve_probs(&p0, &u, &reference)?;
    let mut table = Table::new(["outcome", "p_t0", "p_t1"]);
    for (i, (x, y)) in p0.entries().iter().zip(p1.entries()).enumerate() {
        table.push(vec![i.to_string(), x.to_string(), y.to_string()]);
    }
    let result = json!({
        "dim": d,
        "reference": if a.reference.is_some() { "file" } else { "builtin-sic" },
        "p_t0": p0,
        "p_t1": p1,
    });
    Ok(Outcome::new(cfg, result, true).with_table(table))
}

fn compat(g: &GlobalOpts, a: &CompatArgs) -> Result<Outcome> {
    let cfg = config(
        "compat",
        g,
        json!({ "state1": a.state1, "state2": a.state2, "criteria": a.criteria }),
    );
    let r1 = read_state(&a.state1)?;
    let r2 = read_state(&a.state2)?;
    let mut out = serde_json::Map::new();
    let mut table = Table::new(["criterion", "compatible"]);
    for c in &a.criteria {
        let (key, value, ok) = match c {
            Criterion::Peierls => {
                let v = peierls_compatible(&r1, &r2, g.tol)?;
                let ok = v.compatible;
                ("peierls", serde_json::to_value(v)?, ok)
            }
            Criterion::Bfm => {
                let ok = bfm_compatible(&r1, &r2, g.tol)?;
                let angle = support_angle(&r1, &r2, g.tol)?;
                ("bfm", json!({ "compatible": ok, "support_angle": angle }), ok)
            }
            Criterion::W => {
                let ok = w_compatible(&r1, &r2)?;
                ("w", json!({ "compatible": ok, "note": "W/W′: every pair of states is compatible" }), ok)
            }
        };
        table.push(vec![key.to_string(), ok.to_string()]);
        out.insert(key.to_string(), value);
    }
    let result = json!({ "dim": r1.dim(), "criteria": out });
    Ok(Outcome::new(cfg, result, true).with_table(table))
}

fn scenario_rho_pm(g: &GlobalOpts) -> Result<Outcome> {
    let cfg = config("scenario rho-pm", g, json!({}));
    let report = rho_pm_scenario();
    Ok(Outcome::new(cfg, serde_json::to_value(report)?, true))
}

fn wigner(g: &GlobalOpts, a: &WignerArgs) -> Result<Outcome> {
    let cfg = config(
        "wigner",
        g,
        json!({
            "alpha_sq": if a.scenario.is_none() { Some(a.alpha_sq) } else { None },
            "scenario": a.scenario,
            "probe": a.probe,
            "two_perspective": a.two_perspective,
        }),
    );
    let s = match &a.scenario {
        Some(path) => read_json::<WignerScenario>(path)?,
        None => WignerScenario::standard(a.alpha_sq)?,
    };
    let observer = observer_query(&s)?;
    let probe = probe_povm(&s, a.probe)?;
    let reversal = reversal_check(&s, &probe)?;
    let collapse = reversal_with_collapse(&s, &probe)?;
    let perspectives = if a.two_perspective {
        let seed = require_seed(g)?;
        let ref_o = match Fiducial::builtin(s.object_dim()) {
            Some(f) => sic_reference(&f?)?,
            None => ReferenceApparatus::random(s.object_dim(), &mut seeded_rng(seed, 0))?,
        };
        let ref_c = ReferenceApparatus::random(s.composite_dim(), &mut seeded_rng(seed, 1))?;
        Some(two_perspective_report(&s, &ref_o, &ref_c)?)
    } else {
        None
    };
    let mut table = Table::new(["answer", "probability"]);
    table.push(vec!["yes".into(), observer.p_yes.to_string()]);
    table.push(vec!["no".into(), observer.p_no.to_string()]);
    table.push(vec!["neither".into(), observer.p_rest.to_string()]);
    let result = json!({
        "scenario": s,
        "composite_state": composite_state(&s)?,
        "observer": observer,
        "probe": a.probe,
        "reversal": reversal,
        "reversal_with_collapse": collapse,
        "perspectives": perspectives,
    });
    Ok(Outcome::new(cfg, result, true).with_table(table))
}
