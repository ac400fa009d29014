//! Place-dependent max-plus iterated function systems.
//!
//! A system is a finite family of point maps φ_j: X → X, stored as index
//! arrays, together with log-scale weights q_j(x) ≤ 0 normalized so that
//! ⊕_j q_j(x) = 0 at every point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxplus::{oplus_all, MaxPlus};
use crate::measures::{exp_sup_distance, Density};
use crate::scalar::Scalar;
use crate::spaces::{FiniteSpace, IndexSpace, SpaceSpec};

/// Largest normalization drift that is silently corrected.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Default stopping tolerance for [`MpIfs::iterate_transfer`].
pub const DEFAULT_TRANSFER_TOL: f64 = 1e-12;

/// Unvalidated ingredients of a system.
#[derive(Clone, Debug)]
pub struct SystemParts<T: Scalar> {
    pub space: FiniteSpace<T>,
    pub index_space: IndexSpace<T>,
    /// `maps[j][x]` is the index of φ_j(x).
    pub maps: Vec<Vec<usize>>,
    /// `weights[j][x]` is q_j(x).
    pub weights: Vec<Vec<MaxPlus<T>>>,
    /// Whether the maps were obtained by snapping a continuous map onto the
    /// space. Snapped maps get a contraction slack of twice the resolution.
    pub snapped: bool,
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub points: usize,
    pub maps: usize,
    pub snapped: bool,
    pub gamma_hat: Option<f64>,
    pub lip_c_hat: Option<f64>,
    pub contraction_slack: f64,
    pub max_normalization_drift: Option<f64>,
    pub renormalized: bool,
    pub error: Option<String>,
}

/// Checks a system without building it.
pub fn validate<T: Scalar>(parts: &SystemParts<T>) -> ValidationReport {
    run_checks(parts).0
}

struct Checked<T: Scalar> {
    weights: Vec<Vec<MaxPlus<T>>>,
    gamma_hat: T,
    lip_c_hat: T,
}

fn run_checks<T: Scalar>(parts: &SystemParts<T>) -> (ValidationReport, Result<Checked<T>>) {
    let slack = if parts.snapped { parts.space.resolution() * T::of(2.0) } else { T::zero() };
    let mut report = ValidationReport {
        valid: false,
        points: parts.space.len(),
        maps: parts.maps.len(),
        snapped: parts.snapped,
        gamma_hat: None,
        lip_c_hat: None,
        contraction_slack: slack.as_f64(),
        max_normalization_drift: None,
        renormalized: false,
        error: None,
    };
    let result = check_into(parts, slack, &mut report);
    match &result {
        Ok(_) => report.valid = true,
        Err(e) => report.error = Some(e.to_string()),
    }
    (report, result)
}

fn check_into<T: Scalar>(parts: &SystemParts<T>, slack: T, report: &mut ValidationReport) -> Result<Checked<T>> {
    check_shapes(parts)?;
    let weights = normalize_weights(&parts.weights, parts.space.len(), report)?;
    let gamma_hat = contraction_constant(parts, slack);
    report.gamma_hat = Some(gamma_hat.as_f64());
    let lip_c_hat = weight_lipschitz(&parts.space, &weights);
    report.lip_c_hat = Some(lip_c_hat.as_f64());
    if gamma_hat >= T::one() {
        return Err(Error::NotContractive { gamma_hat: gamma_hat.as_f64() });
    }
    Ok(Checked { weights, gamma_hat, lip_c_hat })
}

fn check_shapes<T: Scalar>(parts: &SystemParts<T>) -> Result<()> {
    let n = parts.space.len();
    let m = parts.index_space.len();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    if m == 0 {
        return Err(Error::Config("index set is empty".into()));
    }
    if parts.maps.len() != m || parts.weights.len() != m {
        return Err(Error::Dimension(format!(
            "{} maps and {} weight arrays for an index set of size {m}",
            parts.maps.len(),
            parts.weights.len()
        )));
    }
    for (j, (map, q)) in parts.maps.iter().zip(&parts.weights).enumerate() {
        if map.len() != n || q.len() != n {
            return Err(Error::Dimension(format!(
                "map {j} has {} targets and {} weights over {n} points",
                map.len(),
                q.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= n) {
            return Err(Error::Index { index: bad, len: n });
        }
    }
    Ok(())
}

fn normalize_weights<T: Scalar>(
    weights: &[Vec<MaxPlus<T>>],
    n: usize,
    report: &mut ValidationReport,
) -> Result<Vec<Vec<MaxPlus<T>>>> {
    let tol = T::of(NORMALIZATION_TOL);
    let mut out = weights.to_vec();
    let mut drift_max = T::zero();
    for x in 0..n {
        let top = oplus_all(weights.iter().map(|q| q[x]));
        let MaxPlus::Finite(top) = top else {
            report.max_normalization_drift = Some(f64::INFINITY);
            return Err(Error::Normalization { point: x, max: top.to_string() });
        };
        let drift = top.abs();
        drift_max = drift_max.max(drift);
        if drift > tol {
            report.max_normalization_drift = Some(drift_max.as_f64());
            return Err(Error::Normalization { point: x, max: top.to_string() });
        }
        if top != T::zero() {
            report.renormalized = true;
            for q in out.iter_mut() {
                q[x] = q[x].shift(-top);
            }
        }
    }
    report.max_normalization_drift = Some(drift_max.as_f64());
    Ok(out)
}

/// max over (j₁, x₁, j₂, x₂) of (d(φ_{j₁}x₁, φ_{j₂}x₂) − slack)⁺ / (d_J + d_X).
fn contraction_constant<T: Scalar>(parts: &SystemParts<T>, slack: T) -> T {
    let n = parts.space.len();
    let m = parts.index_space.len();
    let space = &parts.space;
    (0..m * n)
        .into_par_iter()
        .map(|a| {
            let (j1, x1) = (a / n, a % n);
            let y1 = parts.maps[j1][x1];
            let mut best = T::zero();
            for j2 in 0..m {
                let dj = parts.index_space.dist(j1, j2);
                for x2 in 0..n {
                    let denom = dj + space.dist(x1, x2);
                    if denom <= T::zero() {
                        continue;
                    }
                    let num = (space.dist(y1, parts.maps[j2][x2]) - slack).max(T::zero());
                    best = best.max(num / denom);
                }
            }
            best
        })
        .reduce(T::zero, T::max)
}

fn weight_lipschitz<T: Scalar>(space: &FiniteSpace<T>, weights: &[Vec<MaxPlus<T>>]) -> T {
    let n = space.len();
    let mut best = T::zero();
    for q in weights {
        for x1 in 0..n {
            let Some(a) = q[x1].value() else { continue };
            for (x2, qb) in q.iter().enumerate().skip(x1 + 1) {
                if let Some(b) = qb.value() {
                    best = best.max((a - b).abs() / space.dist(x1, x2));
                }
            }
        }
    }
    best
}

/// A validated max-plus IFS.
#[derive(Clone, Debug)]
pub struct MpIfs<T: Scalar> {
    space: FiniteSpace<T>,
    index_space: IndexSpace<T>,
    maps: Vec<Vec<usize>>,
    weights: Vec<Vec<MaxPlus<T>>>,
    snapped: bool,
    gamma_hat: T,
    lip_c_hat: T,
    preimages: Vec<Vec<(usize, usize)>>,
    report: ValidationReport,
}

/// Result of [`MpIfs::iterate_transfer`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransferRun<T: Scalar> {
    pub density: Density<T>,
    pub iterations: usize,
    pub converged: bool,
    pub last_step: T,
}

impl<T: Scalar> MpIfs<T> {
    /// Validates and builds a system, re-normalizing weights within tolerance.
    pub fn new(parts: SystemParts<T>) -> Result<Self> {
        let (report, checked) = run_checks(&parts);
        let Checked { weights, gamma_hat, lip_c_hat } = checked?;
        let n = parts.space.len();
        let mut preimages = vec![Vec::new(); n];
        for (j, map) in parts.maps.iter().enumerate() {
            for (y, &x) in map.iter().enumerate() {
                preimages[x].push((j, y));
            }
        }
        Ok(Self {
            space: parts.space,
            index_space: parts.index_space,
            maps: parts.maps,
            weights,
            snapped: parts.snapped,
            gamma_hat,
            lip_c_hat,
            preimages,
            report,
        })
    }

    pub fn space(&self) -> &FiniteSpace<T> {
        &self.space
    }

    pub fn index_space(&self) -> &IndexSpace<T> {
        &self.index_space
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn weights(&self) -> &[Vec<MaxPlus<T>>] {
        &self.weights
    }

    #[inline]
    pub fn map(&self, j: usize, x: usize) -> usize {
        self.maps[j][x]
    }

    #[inline]
    pub fn weight(&self, j: usize, x: usize) -> MaxPlus<T> {
        self.weights[j][x]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.space.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn num_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn is_snapped(&self) -> bool {
        self.snapped
    }

    pub fn gamma_hat(&self) -> T {
        self.gamma_hat
    }

    pub fn lip_c_hat(&self) -> T {
        self.lip_c_hat
    }

    /// Additive slack in the contraction estimate: 2·resolution for snapped maps.
    pub fn contraction_slack(&self) -> T {
        if self.snapped {
            self.space.resolution() * T::of(2.0)
        } else {
            T::zero()
        }
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    /// All (j, y) with φ_j(y) = x.
    pub fn preimages(&self, x: usize) -> &[(usize, usize)] {
        &self.preimages[x]
    }

    /// ℒf(x) = ⊕_j q_j(x) + f(φ_j(x)).
    pub fn dual_transfer(&self, f: &[T]) -> Result<Vec<T>> {
        self.check_len(f.len())?;
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|x| {
                let v = oplus_all(self.maps.iter().zip(&self.weights).map(|(map, q)| q[x].shift(f[map[x]])));
                v.value().ok_or_else(|| Error::Internal(format!("dual transfer is -inf at point {x}")))
            })
            .collect()
    }

    /// L(λ)(x) = ⊕_{φ_j(y) = x} q_j(y) + λ(y); `Bottom` off the image.
    pub fn transfer(&self, lambda: &[MaxPlus<T>]) -> Result<Vec<MaxPlus<T>>> {
        self.check_len(lambda.len())?;
        Ok((0..self.len())
            .into_par_iter()
            .map(|x| oplus_all(self.preimages[x].iter().map(|&(j, y)| self.weights[j][y].odot(lambda[y]))))
            .collect())
    }

    /// The transfer operator on densities.
    pub fn transfer_density(&self, lambda: &Density<T>) -> Result<Density<T>> {
        Density::new(self.transfer(lambda.values())?)
    }

    /// The Markov operator on measures, acting through densities.
    pub fn markov(&self, lambda: &Density<T>) -> Result<Density<T>> {
        self.transfer_density(lambda)
    }

    /// Whether μ_{Lλ}(f) = μ_λ(ℒf) holds exactly.
    pub fn check_duality(&self, lambda: &Density<T>, f: &[T]) -> Result<bool> {
        let lhs = self.transfer_density(lambda)?.mu_eval(f)?;
        let rhs = lambda.mu_eval(&self.dual_transfer(f)?)?;
        Ok(lhs == rhs)
    }

    /// Iterates λ ↦ normalize(L λ) until consecutive iterates are within
    /// `tol` in the exp-scale sup metric.
    pub fn iterate_transfer(&self, lambda0: &Density<T>, max_iters: usize, tol: T) -> Result<TransferRun<T>> {
        let mut current = lambda0.normalize()?;
        let mut last_step = T::infinity();
        for k in 1..=max_iters {
            let next = self.transfer_density(&current)?.normalize()?;
            last_step = exp_sup_distance(next.values(), current.values());
            current = next;
            if last_step <= tol {
                return Ok(TransferRun { density: current, iterations: k, converged: true, last_step });
            }
        }
        Ok(TransferRun { density: current, iterations: max_iters, converged: false, last_step })
    }

    /// [`iterate_transfer`](Self::iterate_transfer) with tol 1e-12 and 10·|X| iterations.
    pub fn iterate_transfer_default(&self, lambda0: &Density<T>) -> Result<TransferRun<T>> {
        self.iterate_transfer(lambda0, 10 * self.len(), T::of(DEFAULT_TRANSFER_TOL))
    }

    /// The per-map constant weights, if every q_j is constant within `tol`.
    pub fn constant_weights(&self, tol: T) -> Result<Vec<MaxPlus<T>>> {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, q)| {
                let first = q[0];
                let spread = q.iter().fold(T::zero(), |acc, &v| match (v, first) {
                    (MaxPlus::Finite(a), MaxPlus::Finite(b)) => acc.max((a - b).abs()),
                    (MaxPlus::Bottom, MaxPlus::Bottom) => acc,
                    _ => T::infinity(),
                });
                if spread <= tol {
                    Ok(first)
                } else {
                    Err(Error::NotConstantWeight { map: j, spread: spread.as_f64() })
                }
            })
            .collect()
    }

    pub fn is_constant_weight(&self, tol: T) -> bool {
        self.constant_weights(tol).is_ok()
    }

    /// Indices of maps whose constant weight is 0.
    pub fn zero_weight_maps(&self, tol: T) -> Result<Vec<usize>> {
        Ok(self
            .constant_weights(tol)?
            .iter()
            .enumerate()
            .filter(|(_, q)| **q == MaxPlus::one())
            .map(|(j, _)| j)
            .collect())
    }

    /// A self-contained serializable description of the system.
    pub fn to_spec(&self) -> SystemSpec<T> {
        SystemSpec {
            space: self.space.spec().clone(),
            index_labels: Some(self.index_space.labels().to_vec()),
            index_dist: self.index_space.table().to_vec(),
            maps: self.maps.clone(),
            weights: self.weights.clone(),
            snapped: self.snapped,
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::Dimension(format!("array of length {len} on a space of {} points", self.len())))
        }
    }
}

/// A system written out in full: space, index metric, map tables and weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
pub struct SystemSpec<T: Scalar> {
    pub space: SpaceSpec<T>,
    #[serde(default)]
    pub index_labels: Option<Vec<String>>,
    pub index_dist: Vec<Vec<T>>,
    pub maps: Vec<Vec<usize>>,
    pub weights: Vec<Vec<MaxPlus<T>>>,
    #[serde(default)]
    pub snapped: bool,
}

impl<T: Scalar> SystemSpec<T> {
    pub fn to_parts(&self) -> Result<SystemParts<T>> {
        let space = self.space.build()?;
        let labels = self
            .index_labels
            .clone()
            .unwrap_or_else(|| (1..=self.index_dist.len()).map(|j| j.to_string()).collect());
        let index_space = IndexSpace::new(labels, self.index_dist.clone())?;
        Ok(SystemParts {
            space,
            index_space,
            maps: self.maps.clone(),
            weights: self.weights.clone(),
            snapped: self.snapped,
        })
    }

    pub fn build(&self) -> Result<MpIfs<T>> {
        MpIfs::new(self.to_parts()?)
    }
}
