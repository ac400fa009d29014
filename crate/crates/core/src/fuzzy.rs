//! Fuzzy sets and the fuzzy Hutchinson–Barnsley operator.
//!
//! The scale map θ(t) = eᵗ turns a probability density into a normal fuzzy
//! set, and conjugates the transfer operator into the FHB operator
//! Z u(x) = max_{φ_j(y) = x} e^{q_j(y)} u(y).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxplus::MaxPlus;
use crate::measures::Density;
use crate::mpifs::MpIfs;
use crate::scalar::Scalar;
use crate::spaces::FiniteSpace;

pub const DEFAULT_FHB_TOL: f64 = 1e-12;
pub const DEFAULT_FHB_MAX_ITERS: usize = 1000;
/// Level slack used when comparing successive FHB iterates, absorbing the
/// rounding of e^q·u.
pub const FHB_LEVEL_SLACK: f64 = 1e-12;

/// Membership values in [0, 1] over the points of a space.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FuzzySet<T: Scalar> {
    u: Vec<T>,
}

impl<T: Scalar> FuzzySet<T> {
    pub fn new(u: Vec<T>) -> Result<Self> {
        if let Some((x, v)) = u.iter().enumerate().find(|(_, &v)| !(v >= T::zero() && v <= T::one())) {
            return Err(Error::Config(format!("membership {v} at point {x} is outside [0, 1]")));
        }
        Ok(Self { u })
    }

    /// The fuzzy set that is 1 everywhere.
    pub fn ones(n: usize) -> Self {
        Self { u: vec![T::one(); n] }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn get(&self, x: usize) -> T {
        self.u[x]
    }

    pub fn values(&self) -> &[T] {
        &self.u
    }

    /// Whether some point has membership exactly 1.
    pub fn is_normal(&self) -> bool {
        self.u.iter().any(|&v| v == T::one())
    }

    /// max_x |u(x) − v(x)|.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.u.iter().zip(&other.u).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for FuzzySet<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        FuzzySet::new(Vec::<T>::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// u = e^λ for a probability density λ.
pub fn theta_conjugate<T: Scalar>(lambda: &Density<T>) -> Result<FuzzySet<T>> {
    if !lambda.is_probability() {
        return Err(Error::Config(format!("density is not normalized (max {})", lambda.total())));
    }
    Ok(FuzzySet { u: lambda.exp_values() })
}

/// λ = ln u, with ln 0 = −∞.
pub fn theta_inverse<T: Scalar>(u: &FuzzySet<T>) -> Result<Density<T>> {
    Density::new(
        u.u.iter()
            .map(|&v| if v > T::zero() { MaxPlus::finite(v.ln()) } else { MaxPlus::Bottom })
            .collect(),
    )
}

/// [u]^α = {x : u(x) ≥ α} for α > 0, and the support for α = 0.
pub fn alpha_cut<T: Scalar>(u: &FuzzySet<T>, alpha: T) -> Result<Vec<usize>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::Config(format!("alpha {alpha} is outside [0, 1]")));
    }
    Ok(cut(&u.u, alpha))
}

fn cut<T: Scalar>(u: &[T], alpha: T) -> Vec<usize> {
    if alpha > T::zero() {
        (0..u.len()).filter(|&x| u[x] >= alpha).collect()
    } else {
        (0..u.len()).filter(|&x| u[x] > T::zero()).collect()
    }
}

/// Directed excess sup_{a∈A} d(a, B), with the empty-set conventions of
/// [`d_infty`]: nothing to cover costs 0, covering with nothing costs diam(X).
fn excess<T: Scalar>(space: &FiniteSpace<T>, a: &[usize], b: &[usize]) -> T {
    if a.is_empty() {
        return T::zero();
    }
    if b.is_empty() {
        return space.diameter();
    }
    a.iter()
        .map(|&x| b.iter().map(|&y| space.dist(x, y)).fold(T::infinity(), T::min))
        .fold(T::zero(), T::max)
}

fn sorted_levels<T: Scalar>(mut levels: Vec<T>) -> Vec<T> {
    levels.retain(|&a| a >= T::zero() && a <= T::one());
    levels.sort_by(|a, b| a.partial_cmp(b).expect("levels are not NaN"));
    levels.dedup();
    levels
}

/// d_∞(u, v) = sup over α ∈ [0, 1] of h([u]^α, [v]^α), evaluated at every
/// attained membership value and at 0. An empty cut against a nonempty one
/// counts as diam(X).
pub fn d_infty<T: Scalar>(space: &FiniteSpace<T>, u: &FuzzySet<T>, v: &FuzzySet<T>) -> Result<T> {
    d_infty_slack(space, u, v, T::zero())
}

/// d_∞ with level slack ε: each α-cut of one set only has to be covered by
/// the (α − ε)-cut of the other. Memberships that differ by at most ε are at
/// distance 0; ε = 0 gives [`d_infty`].
pub fn d_infty_slack<T: Scalar>(space: &FiniteSpace<T>, u: &FuzzySet<T>, v: &FuzzySet<T>, eps: T) -> Result<T> {
    if u.len() != space.len() || v.len() != space.len() {
        return Err(Error::Dimension(format!(
            "fuzzy sets of length {} and {} on {} points",
            u.len(),
            v.len(),
            space.len()
        )));
    }
    if !(eps >= T::zero()) {
        return Err(Error::Config(format!("level slack {eps} is negative")));
    }
    // The cuts only change at attained values, shifted by ε for the covering side.
    let values = u.u.iter().chain(&v.u).copied();
    let levels = sorted_levels(values.clone().chain(values.map(|a| a + eps)).chain([T::zero(), T::one()]).collect());
    let lowered = |alpha: T| (alpha - eps).max(T::zero());
    Ok(levels
        .par_iter()
        .map(|&alpha| {
            let e1 = excess(space, &cut(&u.u, alpha), &cut(&v.u, lowered(alpha)));
            let e2 = excess(space, &cut(&v.u, alpha), &cut(&u.u, lowered(alpha)));
            e1.max(e2)
        })
        .reduce(T::zero, T::max))
}

/// d_θ(λ, η) = sup over β of h({λ ≥ β}, {η ≥ β}), evaluated at every finite
/// value of either density.
pub fn d_theta<T: Scalar>(space: &FiniteSpace<T>, lambda: &Density<T>, eta: &Density<T>) -> Result<T> {
    if lambda.len() != space.len() || eta.len() != space.len() {
        return Err(Error::Dimension(format!(
            "densities of length {} and {} on {} points",
            lambda.len(),
            eta.len(),
            space.len()
        )));
    }
    let super_level = |d: &Density<T>, beta: T| -> Vec<usize> {
        (0..d.len()).filter(|&x| matches!(d.get(x), MaxPlus::Finite(v) if v >= beta)).collect()
    };
    let mut levels: Vec<T> = lambda.values().iter().chain(eta.values()).filter_map(|v| v.value()).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("levels are not NaN"));
    levels.dedup();
    Ok(levels
        .par_iter()
        .map(|&beta| {
            let (a, b) = (super_level(lambda, beta), super_level(eta, beta));
            excess(space, &a, &b).max(excess(space, &b, &a))
        })
        .reduce(T::zero, T::max))
}

/// Z u(x) = max over (j, y) with φ_j(y) = x of e^{q_j(y)}·u(y); 0 off the image.
pub fn fhb_apply<T: Scalar>(system: &MpIfs<T>, u: &FuzzySet<T>) -> Result<FuzzySet<T>> {
    if u.len() != system.len() {
        return Err(Error::Dimension(format!("fuzzy set of length {} on {} points", u.len(), system.len())));
    }
    let out = (0..system.len())
        .into_par_iter()
        .map(|x| {
            system
                .preimages(x)
                .iter()
                .map(|&(j, y)| system.weight(j, y).exp_scale() * u.u[y])
                .fold(T::zero(), T::max)
        })
        .collect();
    Ok(FuzzySet { u: out })
}

/// One iteration of [`fhb_attractor`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FhbStep {
    pub iteration: usize,
    pub d_infty: f64,
    /// d_∞ of this step over d_∞ of the previous one.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FhbRun<T: Scalar> {
    /// Last iterate; the attractor when `converged`.
    pub attractor: FuzzySet<T>,
    /// Number of applications of Z performed.
    pub iterations: usize,
    pub converged: bool,
    pub last_step: f64,
    /// Steps that moved the iterate by more than `tol`.
    pub trace: Vec<FhbStep>,
}

/// Iterates Z from `u0` until successive iterates are within `tol` in d_∞,
/// measured with level slack [`FHB_LEVEL_SLACK`], or `max_iters` is reached.
pub fn fhb_iterate<T: Scalar>(system: &MpIfs<T>, u0: &FuzzySet<T>, tol: T, max_iters: usize) -> Result<FhbRun<T>> {
    let space = system.space();
    let mut current = u0.clone();
    let mut trace: Vec<FhbStep> = Vec::new();
    let mut last = f64::INFINITY;
    for k in 1..=max_iters {
        let next = fhb_apply(system, &current)?;
        let step = d_infty_slack(space, &next, &current, T::of(FHB_LEVEL_SLACK))?;
        last = step.as_f64();
        if step <= tol {
            return Ok(FhbRun { attractor: next, iterations: k, converged: true, last_step: last, trace });
        }
        let ratio = trace.last().filter(|p| p.d_infty > 0.0).map(|p| last / p.d_infty);
        trace.push(FhbStep { iteration: k, d_infty: last, ratio });
        current = next;
    }
    Ok(FhbRun { attractor: current, iterations: max_iters, converged: false, last_step: last, trace })
}

/// [`fhb_iterate`] that fails with [`Error::NonConvergence`] when the budget runs out.
pub fn fhb_attractor<T: Scalar>(
    system: &MpIfs<T>,
    u0: &FuzzySet<T>,
    tol: T,
    max_iters: usize,
) -> Result<FhbRun<T>> {
    let run = fhb_iterate(system, u0, tol, max_iters)?;
    if run.converged {
        Ok(run)
    } else {
        Err(Error::NonConvergence { iterations: max_iters, last_step: run.last_step })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::sys_a;

    type V = MaxPlus<f64>;
    const B: V = MaxPlus::Bottom;

    fn f(x: f64) -> V {
        MaxPlus::finite(x)
    }

    #[test]
    fn theta_examples() {
        let lam = Density::new(vec![f(0.0), f(-1.0)]).unwrap();
        let u = theta_conjugate(&lam).unwrap();
        assert_eq!(u.values(), &[1.0, (-1.0f64).exp()]);
        assert!(u.is_normal());
        let d = Density::<f64>::dirac(3, 1, 0.0).unwrap();
        assert_eq!(theta_conjugate(&d).unwrap().values(), &[0.0, 1.0, 0.0]);
        assert_eq!(theta_inverse(&theta_conjugate(&d).unwrap()).unwrap(), d);
        let off = Density::new(vec![f(-1.0), B]).unwrap();
        assert!(matches!(theta_conjugate(&off), Err(Error::Config(_))));
    }

    #[test]
    fn alpha_cut_examples() {
        let u = FuzzySet::new(vec![1.0, (-1.0f64).exp()]).unwrap();
        assert_eq!(alpha_cut(&u, 0.5).unwrap(), vec![0]);
        assert_eq!(alpha_cut(&u, 1.0).unwrap(), vec![0]);
        let w = FuzzySet::new(vec![1.0, 0.2, 0.0]).unwrap();
        assert_eq!(alpha_cut(&w, 0.0).unwrap(), vec![0, 1]);
        assert!(matches!(alpha_cut(&w, 1.5), Err(Error::Config(_))));
        assert!(matches!(alpha_cut(&w, -0.1), Err(Error::Config(_))));
        assert!(FuzzySet::new(vec![1.2]).is_err());
    }

    #[test]
    fn d_infty_of_diracs() {
        let sys = sys_a();
        let p = FuzzySet::new(vec![1.0, 0.0]).unwrap();
        let q = FuzzySet::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(d_infty(sys.space(), &p, &q).unwrap(), 1.0);
        assert_eq!(d_infty(sys.space(), &p, &p).unwrap(), 0.0);
        let a = Density::dirac(2, 0, 0.0).unwrap();
        let b = Density::dirac(2, 1, 0.0).unwrap();
        assert_eq!(d_theta(sys.space(), &a, &b).unwrap(), 1.0);
    }

    #[test]
    fn sys_a_fhb() {
        let sys = sys_a();
        let fixed = FuzzySet::new(vec![1.0, (-1.0f64).exp()]).unwrap();
        assert_eq!(fhb_apply(&sys, &fixed).unwrap(), fixed);
        assert_eq!(fhb_apply(&sys, &FuzzySet::ones(2)).unwrap(), fixed);
        let run = fhb_attractor(&sys, &FuzzySet::ones(2), 1e-12, 100).unwrap();
        assert_eq!(run.attractor, fixed);
        assert_eq!(run.trace.len(), 1);
        let still = fhb_attractor(&sys, &fixed, 1e-12, 100).unwrap();
        assert!(still.trace.is_empty());
    }

    #[test]
    fn non_convergence_is_reported() {
        let sys = sys_a();
        let err = fhb_attractor(&sys, &FuzzySet::ones(2), -1.0, 3).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 3, .. }));
    }
}
