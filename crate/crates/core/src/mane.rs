//! Mañé potential and Aubry set.
//!
//! On a finite space with pre-snapped maps the potential S(x, y) is the best
//! total weight of a nonempty word ω with φ_ω(y) = x, which is the max-plus
//! transitive closure of the one-step transition matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxplus::{ClosureMethod, MaxPlus, MpMatrix};
use crate::mpifs::MpIfs;
use crate::scalar::Scalar;

/// Default zero test for the diagonal of S.
pub const DEFAULT_TOL_AUBRY: f64 = 1e-9;

/// The potential matrix, `s[x][y]` being the potential from source y to target x.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialMatrix<T: Scalar> {
    pub s: MpMatrix<T>,
    pub aubry: Vec<usize>,
    pub tol_aubry: T,
}

impl<T: Scalar> PotentialMatrix<T> {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> MaxPlus<T> {
        self.s.get(x, y)
    }

    pub fn len(&self) -> usize {
        self.s.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.s.rows() == 0
    }

    pub fn in_aubry(&self, x: usize) -> bool {
        self.aubry.binary_search(&x).is_ok()
    }
}

/// A[x][y] = ⊕ over j with φ_j(y) = x of q_j(y).
pub fn transition_matrix<T: Scalar>(system: &MpIfs<T>) -> MpMatrix<T> {
    let n = system.len();
    let mut a = MpMatrix::bottom(n, n);
    for j in 0..system.num_maps() {
        for y in 0..n {
            let x = system.map(j, y);
            a.set(x, y, a.get(x, y).oplus(system.weight(j, y)));
        }
    }
    a
}

pub fn mane_potential<T: Scalar>(system: &MpIfs<T>, tol_aubry: T) -> Result<PotentialMatrix<T>> {
    mane_potential_with(system, tol_aubry, ClosureMethod::default())
}

pub fn mane_potential_with<T: Scalar>(
    system: &MpIfs<T>,
    tol_aubry: T,
    method: ClosureMethod,
) -> Result<PotentialMatrix<T>> {
    if !(tol_aubry >= T::zero()) {
        return Err(Error::Config(format!("tol_aubry must be non-negative, got {tol_aubry}")));
    }
    let s = transition_matrix(system).kleene_plus_with(method)?;
    let aubry = aubry_set(&s, tol_aubry);
    if aubry.is_empty() {
        return Err(Error::EmptyAubry { tol_aubry: tol_aubry.as_f64() });
    }
    Ok(PotentialMatrix { s, aubry, tol_aubry })
}

/// {x : S[x][x] ≥ −tol}.
pub fn aubry_set<T: Scalar>(s: &MpMatrix<T>, tol: T) -> Vec<usize> {
    (0..s.rows())
        .filter(|&x| matches!(s.get(x, x), MaxPlus::Finite(v) if v >= -tol))
        .collect()
}

/// (Sum(ω, x), φ_ω(x)) for a word ω = (j₁, …, jₙ) of 0-based map indices,
/// applying jₙ first.
pub fn sum_along<T: Scalar>(system: &MpIfs<T>, omega: &[usize], x: usize) -> Result<(MaxPlus<T>, usize)> {
    if omega.is_empty() {
        return Err(Error::Config("Sum is undefined for the empty word".into()));
    }
    system.space().check_index(x)?;
    let mut total = MaxPlus::one();
    let mut at = x;
    for &j in omega.iter().rev() {
        if j >= system.num_maps() {
            return Err(Error::Index { index: j, len: system.num_maps() });
        }
        total = total.odot(system.weight(j, at));
        at = system.map(j, at);
    }
    Ok((total, at))
}

/// Whether S[x][z] ≥ S[x][y] + S[y][z] for every triple.
pub fn check_triangle<T: Scalar>(s: &MpMatrix<T>) -> bool {
    check_triangle_tol(s, T::zero())
}

/// Triangle check allowing a violation of at most `tol`.
pub fn check_triangle_tol<T: Scalar>(s: &MpMatrix<T>, tol: T) -> bool {
    let n = s.rows();
    (0..n).into_par_iter().all(|x| {
        for y in 0..n {
            let MaxPlus::Finite(a) = s.get(x, y) else { continue };
            for z in 0..n {
                let MaxPlus::Finite(b) = s.get(y, z) else { continue };
                match s.get(x, z) {
                    MaxPlus::Finite(c) if c + tol >= a + b => {}
                    _ => return false,
                }
            }
        }
        true
    })
}

/// Outcome of [`check_sum_lipschitz`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumLipschitzReport {
    pub trials: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub slack: f64,
    pub within_bound: bool,
}

/// Samples random words and point pairs and records the largest
/// |Sum(ω, y₁) − Sum(ω, y₂)| / d(y₁, y₂) over pairs where both sums are finite.
pub fn check_sum_lipschitz<T: Scalar>(system: &MpIfs<T>, trials: usize, seed: u64) -> Result<SumLipschitzReport> {
    let n = system.len();
    let m = system.num_maps();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = 4 * n;
    let mut max_ratio = 0.0f64;
    if n >= 2 {
        for _ in 0..trials {
            let len = rng.gen_range(1..=max_len);
            let omega: Vec<usize> = (0..len).map(|_| rng.gen_range(0..m)).collect();
            let y1 = rng.gen_range(0..n);
            let y2 = rng.gen_range(0..n);
            if y1 == y2 {
                continue;
            }
            let (s1, _) = sum_along(system, &omega, y1)?;
            let (s2, _) = sum_along(system, &omega, y2)?;
            if let (Some(a), Some(b)) = (s1.value(), s2.value()) {
                let ratio = ((a - b).abs() / system.space().dist(y1, y2)).as_f64();
                max_ratio = max_ratio.max(ratio);
            }
        }
    }
    let gamma = system.gamma_hat().as_f64();
    let c = system.lip_c_hat().as_f64();
    let bound = c / (1.0 - gamma);
    let slack = if system.is_snapped() {
        c * system.space().resolution().as_f64() * 2.0 / (1.0 - gamma)
    } else {
        0.0
    };
    Ok(SumLipschitzReport { trials, max_ratio, bound, slack, within_bound: max_ratio <= bound + slack })
}
