//! One function per subcommand. Each writes its files into `out` and
//! returns an error only after writing whatever it could.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use tropifs::examples::{demonstrate_nonuniqueness, lambda_alpha, ShiftExampleSpec};
use tropifs::fuzzy::{fhb_iterate, theta_conjugate, FhbRun, FuzzySet};
use tropifs::invariant::{
    build_invariant, coding_map, constant_weight_density, enumerate_invariants, verify_invariant, VerifyReport,
};
use tropifs::mane::mane_potential_with;
use tropifs::mpifs::validate;
use tropifs::{BoundaryData, Density, MaxPlus, MpIfs, PotentialMatrix, SpaceSpec};

use crate::config::{FuzzyStart, InvariantMode, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_csv, write_json};

type V = MaxPlus<f64>;

#[derive(Serialize)]
struct Point<'a> {
    index: usize,
    label: &'a str,
}

fn points<'a>(sys: &'a MpIfs<f64>, idx: &[usize]) -> Vec<Point<'a>> {
    idx.iter().map(|&i| Point { index: i, label: sys.space().label(i) }).collect()
}

fn potential(config: &RunConfig, sys: &MpIfs<f64>) -> Result<PotentialMatrix<f64>, CliError> {
    Ok(mane_potential_with(sys, config.tol_aubry, config.closure)?)
}

pub fn validate_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let parts = config.source()?.parts()?;
    let report = validate(&parts);
    write_json(out, "validation.json", &report)?;
    match &report.error {
        None if report.valid => Ok(()),
        Some(e) => Err(CliError::Domain(format!("system is invalid: {e}"))),
        None => Err(CliError::Domain("system is invalid".into())),
    }
}

#[derive(Serialize)]
struct AubryFile<'a> {
    tol_aubry: f64,
    closure: tropifs::ClosureMethod,
    aubry: Vec<Point<'a>>,
}

#[derive(Serialize)]
struct PotentialFile<'a> {
    labels: &'a [String],
    /// `s[x][y]`: potential from source y to target x.
    s: Vec<Vec<V>>,
}

pub fn mane_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let sys = config.source()?.build()?;
    let p = potential(config, &sys)?;
    let labels = sys.space().labels();
    let mut header = vec!["target\\source".to_string()];
    header.extend(labels.iter().cloned());
    let rows: Vec<Vec<String>> = p
        .s
        .to_rows()
        .iter()
        .zip(labels)
        .map(|(row, label)| std::iter::once(label.clone()).chain(row.iter().map(|v| v.to_string())).collect())
        .collect();
    write_csv(out, "S.csv", &header, &rows)?;
    write_json(out, "S.json", &PotentialFile { labels, s: p.s.to_rows() })?;
    write_json(
        out,
        "aubry.json",
        &AubryFile { tol_aubry: p.tol_aubry, closure: config.closure, aubry: points(&sys, &p.aubry) },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct DensityEntry {
    anchor: String,
    boundary: BTreeMap<String, V>,
    values: Density<f64>,
}

#[derive(Serialize)]
struct DensityFile<'a> {
    mode: &'static str,
    labels: &'a [String],
    aubry: Vec<Point<'a>>,
    densities: Vec<DensityEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constant: Option<ConstantInfo>,
}

#[derive(Serialize)]
struct ConstantInfo {
    coding_depth: usize,
    zero_weight_maps: Vec<usize>,
    column: String,
    series_deviation: f64,
}

#[derive(Serialize)]
struct VerifyFile {
    tol: f64,
    all_passed: bool,
    reports: Vec<VerifyReport>,
}

fn entry(sys: &MpIfs<f64>, boundary: &BoundaryData<f64>, values: Density<f64>) -> DensityEntry {
    let label = |i: usize| sys.space().label(i).to_string();
    DensityEntry {
        anchor: label(boundary.anchor),
        boundary: boundary.values.iter().map(|(&z, &v)| (label(z), v)).collect(),
        values,
    }
}

fn index_of_label(sys: &MpIfs<f64>, label: &str) -> Result<usize, CliError> {
    sys.space()
        .labels()
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| CliError::Config(format!("unknown point label {label:?}")))
}

pub fn invariant_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let inv = config
        .invariant
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs an `invariant` entry".into()))?;
    let sys = config.source()?.build()?;
    let p = potential(config, &sys)?;
    let mut densities = Vec::new();
    let mut reports = Vec::new();
    let mut constant = None;
    let mode = match inv.mode {
        InvariantMode::Boundary => {
            let b = inv
                .boundary
                .as_ref()
                .ok_or_else(|| CliError::Config("boundary mode needs `invariant.boundary`".into()))?;
            let anchor = index_of_label(&sys, &b.anchor)?;
            let mut boundary = BoundaryData::anchored(anchor);
            for (label, &v) in &b.values {
                boundary.values.insert(index_of_label(&sys, label)?, v);
            }
            let density = build_invariant(&p, &boundary)?;
            reports.push(verify_invariant(&sys, &density, inv.tol)?);
            densities.push(entry(&sys, &boundary, density));
            "boundary"
        }
        InvariantMode::Constant => {
            let cm = coding_map(&sys)?;
            let cw = constant_weight_density(&sys, &p, &cm)?;
            reports.push(verify_invariant(&sys, &cw.density, inv.tol)?);
            let boundary = BoundaryData::anchored(cw.column);
            constant = Some(ConstantInfo {
                coding_depth: cm.depth,
                zero_weight_maps: cm.j0.clone(),
                column: sys.space().label(cw.column).to_string(),
                series_deviation: cw.series_deviation,
            });
            densities.push(entry(&sys, &boundary, cw.density));
            "constant"
        }
        InvariantMode::Enumerate => {
            let levels: Vec<V> = match (&inv.levels, &inv.alphas) {
                (Some(_), Some(_)) => return Err(CliError::Config("give either levels or alphas, not both".into())),
                (Some(l), None) => l.clone(),
                (None, Some(a)) => a
                    .iter()
                    .map(|&x| {
                        if x >= 0.0 && x.is_finite() {
                            Ok(MaxPlus::finite(-x))
                        } else {
                            Err(CliError::Config(format!("alpha {x} must be a nonnegative number")))
                        }
                    })
                    .collect::<Result<_, _>>()?,
                (None, None) => Vec::new(),
            };
            for v in enumerate_invariants(&sys, &p, &levels, inv.tol)? {
                reports.push(v.report);
                densities.push(entry(&sys, &v.boundary, v.density));
            }
            "enumerate"
        }
    };
    let file = DensityFile { mode, labels: sys.space().labels(), aubry: points(&sys, &p.aubry), densities, constant };
    write_json(out, "density.json", &file)?;
    let all_passed = reports.iter().all(|r| r.passed);
    write_json(out, "verify.json", &VerifyFile { tol: inv.tol, all_passed, reports })?;
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Domain("a density failed its invariance check".into()))
    }
}

fn fuzzy_start(start: &FuzzyStart, sys: &MpIfs<f64>) -> Result<FuzzySet<f64>, CliError> {
    match start {
        FuzzyStart::Ones => Ok(FuzzySet::ones(sys.len())),
        FuzzyStart::LambdaAlpha(alpha) => match sys.space().spec() {
            SpaceSpec::Shift { symbols: 2, depth } => Ok(theta_conjugate(&lambda_alpha(*depth, *alpha)?)?),
            _ => Err(CliError::Config("lambda_alpha start needs a binary shift space".into())),
        },
        FuzzyStart::Density(values) => {
            if values.len() != sys.len() {
                return Err(CliError::Config(format!("start density has {} entries for {} points", values.len(), sys.len())));
            }
            Ok(theta_conjugate(&Density::new(values.clone())?)?)
        }
        FuzzyStart::Membership(u) => Ok(FuzzySet::new(u.clone())?),
    }
}

#[derive(Serialize)]
struct FuzzyFile<'a> {
    converged: bool,
    iterations: usize,
    last_step: f64,
    tol: f64,
    gamma_hat: f64,
    max_ratio: Option<f64>,
    labels: &'a [String],
    attractor: &'a FuzzySet<f64>,
}

pub fn fuzzy_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let sys = config.source()?.build()?;
    let u0 = fuzzy_start(&config.fuzzy.start, &sys)?;
    let run: FhbRun<f64> = fhb_iterate(&sys, &u0, config.fuzzy.tol, config.fuzzy.max_iters)?;
    let labels = sys.space().labels();
    let attractor_rows: Vec<Vec<String>> =
        labels.iter().zip(run.attractor.values()).map(|(l, &u)| vec![l.clone(), num(u)]).collect();
    write_csv(out, "attractor.csv", &["label".into(), "membership".into()], &attractor_rows)?;
    let trace_rows: Vec<Vec<String>> = run
        .trace
        .iter()
        .map(|s| vec![s.iteration.to_string(), num(s.d_infty), s.ratio.map(num).unwrap_or_default()])
        .collect();
    write_csv(out, "trace.csv", &["iteration".into(), "d_infty".into(), "ratio".into()], &trace_rows)?;
    let max_ratio = run.trace.iter().filter_map(|s| s.ratio).reduce(f64::max);
    write_json(
        out,
        "fuzzy.json",
        &FuzzyFile {
            converged: run.converged,
            iterations: run.iterations,
            last_step: run.last_step,
            tol: config.fuzzy.tol,
            gamma_hat: sys.gamma_hat(),
            max_ratio,
            labels,
            attractor: &run.attractor,
        },
    )?;
    if run.converged {
        Ok(())
    } else {
        Err(tropifs::Error::NonConvergence { iterations: run.iterations, last_step: run.last_step }.into())
    }
}

pub fn demo31_cmd(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let spec = ShiftExampleSpec::new(config.demo31.depth, config.demo31.alphas.clone())?;
    let report = demonstrate_nonuniqueness(&spec)?;
    write_json(out, "demo31.json", &report)?;
    Ok(())
}
