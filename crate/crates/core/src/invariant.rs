//! Invariant densities.
//!
//! Every invariant density is determined by its values on the Aubry set:
//! λ(x) = ⊕_{z∈Ω} S(x, z) + λ(z). Conversely any boundary function on Ω with
//! an anchor at 0 extends this way to an invariant density. For constant
//! weights the extension does not depend on the boundary, giving a unique
//! invariant density.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mane::PotentialMatrix;
use crate::maxplus::{oplus_all, MaxPlus};
use crate::measures::{exp_sup_distance, Density};
use crate::mpifs::MpIfs;
use crate::scalar::Scalar;

/// Default pass threshold for [`verify_invariant`].
pub const DEFAULT_VERIFY_TOL: f64 = 1e-12;
/// Agreement required between Aubry columns for constant weights.
pub const COLUMN_TOL: f64 = 1e-9;
/// Tolerance for recognizing constant weights.
pub const CONSTANT_WEIGHT_TOL: f64 = 1e-12;
/// Largest number of boundary assignments [`enumerate_invariants`] will try.
pub const MAX_ASSIGNMENTS: usize = 1 << 20;
const MAX_CODING_DEPTH: usize = 4096;

/// A boundary function on the Aubry set. Aubry points missing from `values`
/// are treated as −∞.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundaryData<T: Scalar> {
    pub values: BTreeMap<usize, MaxPlus<T>>,
    pub anchor: usize,
}

impl<T: Scalar> BoundaryData<T> {
    /// The boundary that is 0 at `anchor` and −∞ elsewhere.
    pub fn anchored(anchor: usize) -> Self {
        Self { values: BTreeMap::from([(anchor, MaxPlus::one())]), anchor }
    }

    pub fn with(mut self, point: usize, value: MaxPlus<T>) -> Self {
        self.values.insert(point, value);
        self
    }

    /// Checks the boundary against an Aubry set.
    pub fn check(&self, aubry: &[usize]) -> Result<()> {
        if self.values.get(&self.anchor) != Some(&MaxPlus::one()) {
            return Err(Error::Config(format!("boundary anchor {} must have value 0", self.anchor)));
        }
        for (&z, &v) in &self.values {
            if aubry.binary_search(&z).is_err() {
                return Err(Error::Config(format!("boundary point {z} is not in the Aubry set {aubry:?}")));
            }
            if let MaxPlus::Finite(x) = v {
                if x > T::zero() {
                    return Err(Error::Config(format!("boundary value {x} at point {z} is positive")));
                }
            }
        }
        Ok(())
    }
}

/// λ̄(x) = ⊕_{z∈Ω} S[x][z] + λ₁(z).
pub fn build_invariant<T: Scalar>(s: &PotentialMatrix<T>, boundary: &BoundaryData<T>) -> Result<Density<T>> {
    boundary.check(&s.aubry)?;
    let values = (0..s.len())
        .map(|x| oplus_all(boundary.values.iter().map(|(&z, &v)| s.get(x, z).odot(v))))
        .collect();
    Density::new(values)
}

/// Outcome of [`verify_invariant`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// max_x |e^{Lλ(x)} − e^{λ(x)}|.
    pub deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn verify_invariant<T: Scalar>(system: &MpIfs<T>, lambda: &Density<T>, tol: T) -> Result<VerifyReport> {
    let image = system.transfer(lambda.values())?;
    let deviation = exp_sup_distance(&image, lambda.values());
    Ok(VerifyReport { deviation: deviation.as_f64(), tol: tol.as_f64(), passed: deviation <= tol })
}

/// A density together with its verification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifiedDensity<T: Scalar> {
    pub density: Density<T>,
    pub boundary: BoundaryData<T>,
    pub report: VerifyReport,
}

/// Builds an invariant density for every assignment of `levels` to the
/// non-anchor Aubry points, anchoring at the lowest-index Aubry point, and
/// returns the distinct results in assignment order.
pub fn enumerate_invariants<T: Scalar>(
    system: &MpIfs<T>,
    s: &PotentialMatrix<T>,
    levels: &[MaxPlus<T>],
    tol: T,
) -> Result<Vec<VerifiedDensity<T>>> {
    let Some((&anchor, others)) = s.aubry.split_first() else {
        return Err(Error::EmptyAubry { tol_aubry: s.tol_aubry.as_f64() });
    };
    if levels.is_empty() && !others.is_empty() {
        return Err(Error::Config("no boundary levels given".into()));
    }
    let total = others.iter().try_fold(1usize, |acc, _| acc.checked_mul(levels.len()));
    let total = match total {
        Some(t) if t <= MAX_ASSIGNMENTS => t,
        _ => {
            return Err(Error::Config(format!(
                "{} levels on {} Aubry points exceed {MAX_ASSIGNMENTS} assignments",
                levels.len(),
                others.len()
            )))
        }
    };
    let built = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut boundary = BoundaryData::anchored(anchor);
            for &z in others {
                boundary.values.insert(z, levels[code % levels.len()]);
                code /= levels.len();
            }
            let density = build_invariant(s, &boundary)?;
            let report = verify_invariant(system, &density, tol)?;
            Ok(VerifiedDensity { density, boundary, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<VerifiedDensity<T>> = Vec::new();
    for v in built {
        if !out.iter().any(|o| o.density == v.density) {
            out.push(v);
        }
    }
    Ok(out)
}

/// The coding map ω ↦ x_ω of a constant-weight system, evaluated at a
/// depth where compositions of that length are constant on X.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodingMap {
    pub depth: usize,
    /// Maps whose weight is the zero constant.
    pub j0: Vec<usize>,
    pub reference: usize,
    maps: Vec<Vec<usize>>,
}

impl CodingMap {
    /// π(ω) = φ_{ω₁} ∘ … ∘ φ_{ω_N}(reference), using the first `depth` symbols.
    pub fn pi(&self, word: &[usize]) -> Result<usize> {
        if word.len() < self.depth {
            return Err(Error::Config(format!("word of length {} is shorter than depth {}", word.len(), self.depth)));
        }
        let mut at = self.reference;
        for &j in word[..self.depth].iter().rev() {
            let map = self.maps.get(j).ok_or(Error::Index { index: j, len: self.maps.len() })?;
            at = map[at];
        }
        Ok(at)
    }

    /// {π(ω) : ω ∈ J₀^depth}, sorted.
    pub fn j0_image(&self) -> Vec<usize> {
        let n = self.maps.first().map_or(0, Vec::len);
        let mut current = vec![false; n];
        current[self.reference] = true;
        for _ in 0..self.depth {
            let mut next = vec![false; n];
            for (x, _) in current.iter().enumerate().filter(|(_, &on)| on) {
                for &j in &self.j0 {
                    next[self.maps[j][x]] = true;
                }
            }
            current = next;
        }
        current.iter().enumerate().filter(|(_, &on)| on).map(|(x, _)| x).collect()
    }
}

/// Builds the coding map of a constant-weight system.
///
/// The depth is the least N ≥ 1 with γ^N·diam(X) below the minimum point
/// separation and, for snapped maps, also at most the resolution.
pub fn coding_map<T: Scalar>(system: &MpIfs<T>) -> Result<CodingMap> {
    let j0 = system.zero_weight_maps(T::of(CONSTANT_WEIGHT_TOL))?;
    if j0.is_empty() {
        return Err(Error::Internal("constant-weight system has no zero-weight map".into()));
    }
    let space = system.space();
    let gamma = system.gamma_hat();
    let diam = space.diameter();
    let sep = space.min_separation().unwrap_or(T::infinity());
    let mut depth = 1;
    let mut scale = gamma * diam;
    while !(scale < sep && (!system.is_snapped() || scale <= space.resolution())) {
        depth += 1;
        scale = scale * gamma;
        if depth > MAX_CODING_DEPTH {
            return Err(Error::Internal(format!("coding depth exceeds {MAX_CODING_DEPTH} (gamma_hat {gamma})")));
        }
    }
    Ok(CodingMap { depth, j0, reference: 0, maps: system.maps().to_vec() })
}

/// The unique invariant density of a constant-weight system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantWeightDensity<T: Scalar> {
    pub density: Density<T>,
    /// The Aubry point whose potential column was used.
    pub column: usize,
    /// Exp-scale distance to the depth-truncated coding series.
    pub series_deviation: f64,
}

/// λ(x) = S[x][z] for z in the Aubry set, checked to be independent of z and
/// compared against the series ⊕ over words of length `depth` ending at x.
pub fn constant_weight_density<T: Scalar>(
    system: &MpIfs<T>,
    s: &PotentialMatrix<T>,
    cm: &CodingMap,
) -> Result<ConstantWeightDensity<T>> {
    system.constant_weights(T::of(CONSTANT_WEIGHT_TOL))?;
    let &z = s.aubry.first().ok_or(Error::EmptyAubry { tol_aubry: s.tol_aubry.as_f64() })?;
    let column = s.s.column(z);
    let tol = T::of(COLUMN_TOL);
    for &w in &s.aubry[1..] {
        for (x, &a) in column.iter().enumerate() {
            let b = s.get(x, w);
            let agree = match (a, b) {
                (MaxPlus::Finite(a), MaxPlus::Finite(b)) => (a - b).abs() <= tol,
                (MaxPlus::Bottom, MaxPlus::Bottom) => true,
                _ => false,
            };
            if !agree {
                return Err(Error::Internal(format!(
                    "potential columns of Aubry points {z} and {w} differ at {x}: {a} vs {b}"
                )));
            }
        }
    }
    let density = Density::new(column)?;

    // Start the series from an Aubry point fixed by a zero-weight map when one exists.
    let start = s
        .aubry
        .iter()
        .copied()
        .find(|&a| cm.j0.iter().any(|&j| system.map(j, a) == a))
        .unwrap_or(z);
    let mut series = Density::dirac(system.len(), start, T::zero())?;
    for _ in 0..cm.depth {
        series = system.transfer_density(&series)?;
    }
    let series_deviation = exp_sup_distance(series.values(), density.values()).as_f64();
    Ok(ConstantWeightDensity { density, column: z, series_deviation })
}
