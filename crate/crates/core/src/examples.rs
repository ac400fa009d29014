//! Canonical systems: a two-point system with a unique invariant density,
//! the truncated prepend system with a one-parameter family of invariant
//! densities, and seeded random generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::d_theta;
use crate::invariant::{build_invariant, verify_invariant, BoundaryData};
use crate::mane::{mane_potential, DEFAULT_TOL_AUBRY};
use crate::maxplus::MaxPlus;
use crate::measures::Density;
use crate::mpifs::{MpIfs, SystemParts};
use crate::scalar::Scalar;
use crate::spaces::{build_shift_space, index_of, FiniteSpace, IndexSpace, SpaceSpec};

const GENERATION_ATTEMPTS: usize = 100;

/// Two points at distance 1; φ₁ ≡ p₀ with weight 0, φ₂ ≡ p₁ with weight −1.
pub fn sys_a<T: Scalar>() -> MpIfs<T> {
    let space = FiniteSpace::explicit(
        vec!["p0".into(), "p1".into()],
        vec![vec![T::zero(), T::one()], vec![T::one(), T::zero()]],
        T::zero(),
    )
    .expect("two-point metric");
    let parts = SystemParts {
        space,
        index_space: IndexSpace::discrete(2, T::of(2.0)).expect("discrete index space"),
        maps: vec![vec![0, 0], vec![1, 1]],
        weights: vec![vec![MaxPlus::one(); 2], vec![MaxPlus::finite(-T::one()); 2]],
        snapped: false,
    };
    MpIfs::new(parts).expect("two-point system is valid")
}

/// Binary words of length `depth`; φ_j prepends j and drops the last
/// symbol; q_j(x) = 0 if j equals the first symbol of x, −1 otherwise.
pub fn build_section31<T: Scalar>(depth: usize) -> Result<MpIfs<T>> {
    let space = build_shift_space::<T>(2, depth)?;
    let n = space.len();
    let mut maps = vec![vec![0; n]; 2];
    let mut weights = vec![vec![MaxPlus::Bottom; n]; 2];
    for x in 0..n {
        let w = space.word(x).expect("shift space");
        for j in 1..=2 {
            let mut image = Vec::with_capacity(depth);
            image.push(j);
            image.extend_from_slice(&w[..depth - 1]);
            maps[j - 1][x] = index_of(&image, 2);
            weights[j - 1][x] = if w[0] == j { MaxPlus::one() } else { MaxPlus::finite(-T::one()) };
        }
    }
    MpIfs::new(SystemParts {
        space,
        index_space: IndexSpace::discrete(2, T::one())?,
        maps,
        weights,
        snapped: false,
    })
}

/// λ_α on depth-`depth` binary words, each word read as followed by an
/// infinite tail of its last symbol: minus the number of symbol changes,
/// and a further −α when the tail is 2.
pub fn lambda_alpha<T: Scalar>(depth: usize, alpha: T) -> Result<Density<T>> {
    if !(alpha >= T::zero() && alpha < T::one()) {
        return Err(Error::Config(format!("alpha {alpha} is outside [0, 1)")));
    }
    let space = build_shift_space::<T>(2, depth)?;
    let values = (0..space.len())
        .map(|x| {
            let w = space.word(x).expect("shift space");
            let changes = w.windows(2).filter(|p| p[0] != p[1]).count();
            let mut v = -T::of(changes as f64);
            if w[depth - 1] == 2 {
                v = v - alpha;
            }
            MaxPlus::finite(v)
        })
        .collect();
    Density::new(values)
}

/// Parameters of the non-uniqueness demonstration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ShiftExampleSpec<T: Scalar> {
    pub depth: usize,
    pub alphas: Vec<T>,
}

impl<T: Scalar> ShiftExampleSpec<T> {
    pub fn new(depth: usize, alphas: Vec<T>) -> Result<Self> {
        let spec = Self { depth, alphas };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.depth < 2 {
            return Err(Error::Config(format!("depth must be at least 2, got {}", self.depth)));
        }
        if self.alphas.is_empty() {
            return Err(Error::Config("at least one alpha is required".into()));
        }
        for (i, &a) in self.alphas.iter().enumerate() {
            if !(a >= T::zero() && a < T::one()) {
                return Err(Error::Config(format!("alpha {a} is outside [0, 1)")));
            }
            if self.alphas[..i].contains(&a) {
                return Err(Error::Config(format!("alpha {a} is repeated")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaOutcome<T: Scalar> {
    pub alpha: T,
    pub density: Density<T>,
    pub invariance_deviation: f64,
    pub invariant: bool,
    pub matches_boundary_construction: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub d_theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonuniquenessReport<T: Scalar> {
    pub depth: usize,
    pub labels: Vec<String>,
    pub aubry: Vec<String>,
    pub outcomes: Vec<AlphaOutcome<T>>,
    pub pairwise: Vec<PairDistance>,
    pub all_invariant: bool,
    pub all_distinct: bool,
    pub all_match_boundary: bool,
    pub note: String,
}

/// Checks that each λ_α is an exact fixed point, that they are pairwise at
/// positive d_θ distance, and that each equals the boundary extension of
/// {1ⁿ: 0, 2ⁿ: −α}.
pub fn demonstrate_nonuniqueness<T: Scalar>(spec: &ShiftExampleSpec<T>) -> Result<NonuniquenessReport<T>> {
    spec.check()?;
    let sys = build_section31::<T>(spec.depth)?;
    let s = mane_potential(&sys, T::of(DEFAULT_TOL_AUBRY))?;
    let space = sys.space();
    let ones = index_of(&vec![1; spec.depth], 2);
    let twos = index_of(&vec![2; spec.depth], 2);
    if s.aubry != [ones, twos] {
        return Err(Error::Demonstration(format!("unexpected Aubry set {:?}", s.aubry)));
    }
    let mut outcomes = Vec::with_capacity(spec.alphas.len());
    for &alpha in &spec.alphas {
        let density = lambda_alpha(spec.depth, alpha)?;
        let report = verify_invariant(&sys, &density, T::zero())?;
        let boundary = BoundaryData::anchored(ones).with(twos, MaxPlus::finite(-alpha));
        let built = build_invariant(&s, &boundary)?;
        outcomes.push(AlphaOutcome {
            alpha,
            matches_boundary_construction: built == density,
            invariance_deviation: report.deviation,
            invariant: report.passed,
            density,
        });
    }
    let mut pairwise = Vec::new();
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            let d = d_theta(space, &outcomes[i].density, &outcomes[j].density)?;
            pairwise.push(PairDistance { i, j, d_theta: d.as_f64() });
        }
    }
    let report = NonuniquenessReport {
        depth: spec.depth,
        labels: space.labels().to_vec(),
        aubry: s.aubry.iter().map(|&z| space.label(z).to_string()).collect(),
        all_invariant: outcomes.iter().all(|o| o.invariant),
        all_distinct: pairwise.iter().all(|p| p.d_theta > 0.0),
        all_match_boundary: outcomes.iter().all(|o| o.matches_boundary_construction),
        outcomes,
        pairwise,
        note: "each word stands for itself followed by a constant tail of its last symbol; \
               sequences with infinitely many symbol changes (density -inf) have no representative"
            .into(),
    };
    let mut failures = Vec::new();
    for o in &report.outcomes {
        if !o.invariant {
            failures.push(format!("alpha {} deviates by {}", o.alpha, o.invariance_deviation));
        }
        if !o.matches_boundary_construction {
            failures.push(format!("alpha {} differs from its boundary construction", o.alpha));
        }
    }
    for p in report.pairwise.iter().filter(|p| p.d_theta <= 0.0) {
        failures.push(format!("densities {} and {} coincide", p.i, p.j));
    }
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(Error::Demonstration(failures.join("; ")))
    }
}

/// Options for [`random_system`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSystemOptions {
    pub num_maps: usize,
    pub seed: u64,
    #[serde(default)]
    pub constant_weight: bool,
}

/// A seeded random valid system.
///
/// On interval grids the maps are affine contractions with slope below 1/2
/// in absolute value, each fixing a grid point, snapped to the grid. On
/// shift spaces they prepend a random prefix of length 1 or 2. On explicit
/// spaces they are constant. Weights are dyadic rationals in [−2, 0]; with
/// `constant_weight` map 0 has weight 0 and every other map a negative
/// constant.
pub fn random_system<T: Scalar>(space: &FiniteSpace<T>, opts: RandomSystemOptions) -> Result<MpIfs<T>> {
    if opts.num_maps == 0 {
        return Err(Error::Config("num_maps must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last = String::new();
    for _ in 0..GENERATION_ATTEMPTS {
        let parts = random_parts(space, opts, &mut rng)?;
        match MpIfs::new(parts) {
            Ok(sys) => return Ok(sys),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Generation { attempts: GENERATION_ATTEMPTS, last })
}

fn dyadic<T: Scalar>(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> T {
    T::of(f64::from(rng.gen_range(lo..=hi)) / 64.0)
}

fn random_parts<T: Scalar>(space: &FiniteSpace<T>, opts: RandomSystemOptions, rng: &mut ChaCha8Rng) -> Result<SystemParts<T>> {
    let n = space.len();
    let m = opts.num_maps;
    let (maps, snapped, index_space, key): (Vec<Vec<usize>>, bool, IndexSpace<T>, Vec<usize>) = match space.spec() {
        SpaceSpec::Grid { .. } => {
            let coords = space.coords().expect("grid coordinates");
            let mut maps = Vec::with_capacity(m);
            for _ in 0..m {
                let g = coords[rng.gen_range(0..n)];
                let mut slope = T::of(rng.gen_range(0.05..0.45));
                if rng.gen_bool(0.5) {
                    slope = -slope;
                }
                let map = coords
                    .iter()
                    .map(|&x| space.snap_coordinate(g + slope * (x - g)))
                    .collect::<Result<Vec<_>>>()?;
                maps.push(map);
            }
            let index = IndexSpace::discrete(m, space.diameter() * T::of(2.0))?;
            (maps, true, index, (0..n).collect())
        }
        SpaceSpec::Shift { symbols, depth } => {
            let (symbols, depth) = (*symbols, *depth);
            let mut maps = Vec::with_capacity(m);
            for _ in 0..m {
                let len = rng.gen_range(1..=2usize.min(depth));
                let prefix: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=symbols)).collect();
                let map = (0..n)
                    .map(|x| {
                        let mut image = prefix.clone();
                        image.extend(space.word(x).expect("shift space"));
                        image.truncate(depth);
                        index_of(&image, symbols)
                    })
                    .collect();
                maps.push(map);
            }
            // Place-dependent weights depend on the first symbol only.
            let key = (0..n).map(|x| space.word(x).expect("shift space")[0] - 1).collect();
            (maps, false, IndexSpace::discrete(m, T::one())?, key)
        }
        SpaceSpec::Explicit { .. } => {
            let maps = (0..m).map(|_| vec![rng.gen_range(0..n); n]).collect();
            let index = IndexSpace::discrete(m, space.diameter().max(T::one()) * T::of(2.0))?;
            (maps, false, index, (0..n).collect())
        }
    };

    let weights = if opts.constant_weight {
        (0..m)
            .map(|j| {
                let q = if j == 0 { MaxPlus::one() } else { MaxPlus::finite(dyadic(rng, -128, -1)) };
                vec![q; n]
            })
            .collect()
    } else {
        let classes = key.iter().copied().max().unwrap_or(0) + 1;
        let mut table: Vec<Vec<MaxPlus<T>>> = (0..m)
            .map(|_| {
                (0..classes)
                    .map(|_| if rng.gen_bool(0.1) { MaxPlus::Bottom } else { MaxPlus::finite(dyadic(rng, -128, 0)) })
                    .collect()
            })
            .collect();
        for c in 0..classes {
            let top = table.iter().filter_map(|row| row[c].value()).fold(None, |acc: Option<T>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            });
            match top {
                Some(top) => table.iter_mut().for_each(|row| row[c] = row[c].shift(-top)),
                None => table[rng.gen_range(0..m)][c] = MaxPlus::one(),
            }
        }
        table.iter().map(|row| key.iter().map(|&c| row[c]).collect()).collect()
    };

    Ok(SystemParts { space: space.clone(), index_space, maps, weights, snapped })
}
