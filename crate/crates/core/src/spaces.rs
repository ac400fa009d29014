//! Finite metric spaces standing in for the compact phase space and the
//! compact index space.
//!
//! A [`FiniteSpace`] carries a `resolution`: the covering radius of the
//! discretization. Quantities computed on a grid are resolution-scale
//! approximations of their continuum counterparts; shift-space truncations
//! make the prepend-and-drop dynamics exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Triangle-inequality slack accepted by [`check_metric`].
pub const METRIC_TOL: f64 = 1e-12;

// Largest point count a builder will allocate a distance table for.
const MAX_POINTS: usize = 1 << 13;

/// How a space was built; also its JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceSpec<T> {
    /// `n` equally spaced points on `[a, b]`.
    Grid { a: T, b: T, n: usize },
    /// Words of length `depth` over `{1..symbols}` with the cylinder metric.
    Shift { symbols: usize, depth: usize },
    /// An arbitrary distance table.
    Explicit { labels: Vec<String>, dist: Vec<Vec<T>>, resolution: T },
}

impl<T: Scalar> SpaceSpec<T> {
    pub fn build(&self) -> Result<FiniteSpace<T>> {
        match self {
            SpaceSpec::Grid { a, b, n } => build_grid(*a, *b, *n),
            SpaceSpec::Shift { symbols, depth } => build_shift_space(*symbols, *depth),
            SpaceSpec::Explicit { labels, dist, resolution } => {
                FiniteSpace::explicit(labels.clone(), dist.clone(), *resolution)
            }
        }
    }
}

/// A finite point set with a distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace<T> {
    labels: Vec<String>,
    dist: Vec<T>,
    resolution: T,
    spec: SpaceSpec<T>,
    coords: Option<Vec<T>>,
}

impl<T: Scalar> FiniteSpace<T> {
    /// A space from an explicit distance table; the metric axioms are checked.
    pub fn explicit(labels: Vec<String>, dist: Vec<Vec<T>>, resolution: T) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Config("space must have at least one point".into()));
        }
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("distance table must be {n}x{n}")));
        }
        if !(resolution >= T::zero()) {
            return Err(Error::Config("resolution must be >= 0".into()));
        }
        let flat: Vec<T> = dist.iter().flatten().copied().collect();
        check_metric(n, &flat, T::of(METRIC_TOL))?;
        Ok(Self {
            labels: labels.clone(),
            dist: flat,
            resolution,
            spec: SpaceSpec::Explicit { labels, dist, resolution },
            coords: None,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist[i * self.len() + j]
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn spec(&self) -> &SpaceSpec<T> {
        &self.spec
    }

    /// Point coordinates, for interval grids.
    pub fn coords(&self) -> Option<&[T]> {
        self.coords.as_deref()
    }

    pub fn diameter(&self) -> T {
        self.dist.iter().copied().fold(T::zero(), T::max)
    }

    /// Smallest distance between two distinct points; `None` for a singleton.
    pub fn min_separation(&self) -> Option<T> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .reduce(T::min)
    }

    /// The symbol word of point `i` (symbols are 1-based), for shift spaces.
    pub fn word(&self, i: usize) -> Option<Vec<usize>> {
        match self.spec {
            SpaceSpec::Shift { symbols, depth } => Some(word_of(i, symbols, depth)),
            _ => None,
        }
    }

    pub fn check_metric(&self) -> Result<()> {
        check_metric(self.len(), &self.dist, T::of(METRIC_TOL))
    }

    /// Hausdorff distance between two nonempty index sets.
    pub fn hausdorff(&self, a: &[usize], b: &[usize]) -> Result<T> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySet);
        }
        for &i in a.iter().chain(b) {
            self.check_index(i)?;
        }
        let directed = |from: &[usize], to: &[usize]| {
            from.iter()
                .map(|&p| to.iter().map(|&q| self.dist(p, q)).fold(T::infinity(), T::min))
                .fold(T::zero(), T::max)
        };
        Ok(directed(a, b).max(directed(b, a)))
    }

    /// Nearest grid point to a coordinate; ties go to the lowest index.
    pub fn snap_coordinate(&self, x: T) -> Result<usize> {
        let coords = self
            .coords
            .as_ref()
            .ok_or_else(|| Error::Config("coordinate snapping needs an interval grid".into()))?;
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, &c) in coords.iter().enumerate() {
            let d = (c - x).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }

    /// Nearest truncated word to `word` under the cylinder metric.
    ///
    /// Words longer than the depth snap to their truncation; shorter words
    /// snap to the lowest-index word sharing their whole prefix.
    pub fn snap_word(&self, word: &[usize]) -> Result<usize> {
        let SpaceSpec::Shift { symbols, depth } = self.spec else {
            return Err(Error::Config("word snapping needs a shift space".into()));
        };
        if word.iter().any(|&s| s == 0 || s > symbols) {
            return Err(Error::Config(format!("symbols must lie in 1..={symbols}")));
        }
        let mut padded: Vec<usize> = word.iter().copied().take(depth).collect();
        padded.resize(depth, 1);
        Ok(index_of(&padded, symbols))
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Index { index: i, len: self.len() })
        }
    }
}

/// `n` equally spaced points on `[a, b]`, resolution `(b−a)/(2(n−1))`.
pub fn build_grid<T: Scalar>(a: T, b: T, n: usize) -> Result<FiniteSpace<T>> {
    if n < 2 {
        return Err(Error::Config(format!("grid needs at least 2 points, got {n}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Config(format!("grid needs a < b, got [{a}, {b}]")));
    }
    if n > MAX_POINTS {
        return Err(Error::Config(format!("grid of {n} points exceeds {MAX_POINTS}")));
    }
    let span = b - a;
    let steps = T::of((n - 1) as f64);
    let coords: Vec<T> = (0..n)
        .map(|i| if i + 1 == n { b } else { a + span * T::of(i as f64) / steps })
        .collect();
    let mut dist = Vec::with_capacity(n * n);
    for &x in &coords {
        for &y in &coords {
            dist.push((x - y).abs());
        }
    }
    Ok(FiniteSpace {
        labels: coords.iter().map(|c| c.to_string()).collect(),
        dist,
        resolution: span / (T::of(2.0) * steps),
        spec: SpaceSpec::Grid { a, b, n },
        coords: Some(coords),
    })
}

/// All words of length `depth` over `symbols` letters, lexicographic order,
/// with `d(w, v) = (1/2)^{first mismatch}` (positions counted from 1).
pub fn build_shift_space<T: Scalar>(symbols: usize, depth: usize) -> Result<FiniteSpace<T>> {
    if symbols < 1 || depth < 1 {
        return Err(Error::Config(format!(
            "shift space needs symbols >= 1 and depth >= 1, got {symbols} and {depth}"
        )));
    }
    let n = u32::try_from(depth)
        .ok()
        .and_then(|d| symbols.checked_pow(d))
        .filter(|&n| n <= MAX_POINTS)
        .ok_or_else(|| Error::Config(format!("{symbols}^{depth} points is too many")))?;
    let words: Vec<Vec<usize>> = (0..n).map(|i| word_of(i, symbols, depth)).collect();
    let half = T::of(0.5);
    let mut dist = Vec::with_capacity(n * n);
    for w in &words {
        for v in &words {
            let d = match w.iter().zip(v).position(|(a, b)| a != b) {
                Some(i) => half.powi(i as i32 + 1),
                None => T::zero(),
            };
            dist.push(d);
        }
    }
    let sep = if symbols <= 9 { "" } else { "." };
    let labels = words
        .iter()
        .map(|w| w.iter().map(usize::to_string).collect::<Vec<_>>().join(sep))
        .collect();
    Ok(FiniteSpace {
        labels,
        dist,
        resolution: half.powi(depth as i32),
        spec: SpaceSpec::Shift { symbols, depth },
        coords: None,
    })
}

/// Lexicographic index of a word with 1-based symbols.
pub fn index_of(word: &[usize], symbols: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * symbols + (s - 1))
}

/// The word at a lexicographic index.
pub fn word_of(mut index: usize, symbols: usize, depth: usize) -> Vec<usize> {
    let mut w = vec![1; depth];
    for slot in w.iter_mut().rev() {
        *slot = index % symbols + 1;
        index /= symbols;
    }
    w
}

/// Checks symmetry, zero exactly on the diagonal, positivity off it, and the
/// triangle inequality within `tol`.
pub fn check_metric<T: Scalar>(n: usize, dist: &[T], tol: T) -> Result<()> {
    let d = |i: usize, j: usize| dist[i * n + j];
    for i in 0..n {
        if d(i, i) != T::zero() {
            return Err(Error::Config(format!("d({i},{i}) = {} is not zero", d(i, i))));
        }
        for j in 0..n {
            let v = d(i, j);
            if !v.is_finite() || v < T::zero() {
                return Err(Error::Config(format!("d({i},{j}) = {v} is not a distance")));
            }
            if i != j && v == T::zero() {
                return Err(Error::Config(format!("distinct points {i} and {j} at distance 0")));
            }
            if v != d(j, i) {
                return Err(Error::Config(format!("distance table not symmetric at ({i},{j})")));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d(i, k) > d(i, j) + d(j, k) + tol {
                    return Err(Error::Config(format!(
                        "triangle inequality fails for ({i},{j},{k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The compact index space J with its metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSpace<T> {
    labels: Vec<String>,
    dist: Vec<Vec<T>>,
}

impl<T: Scalar> IndexSpace<T> {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<T>>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::Config("index space must be nonempty".into()));
        }
        if dist.len() != m || dist.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(format!("index distance table must be {m}x{m}")));
        }
        let flat: Vec<T> = dist.iter().flatten().copied().collect();
        check_metric(m, &flat, T::of(METRIC_TOL))?;
        Ok(Self { labels, dist })
    }

    /// `m` indices labelled `1..=m`, pairwise at distance `scale`.
    pub fn discrete(m: usize, scale: T) -> Result<Self> {
        if !(scale > T::zero()) {
            return Err(Error::Config("index distance must be positive".into()));
        }
        let dist = (0..m)
            .map(|i| (0..m).map(|j| if i == j { T::zero() } else { scale }).collect())
            .collect();
        Self::new((1..=m).map(|j| j.to_string()).collect(), dist)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist[i][j]
    }

    pub fn table(&self) -> &[Vec<T>] {
        &self.dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let g = build_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(g.coords().unwrap(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.dist(0, 2), 1.0);
        assert_eq!(build_grid(0.0, 1.0, 2).unwrap().resolution(), 0.5);
        assert!(matches!(build_grid(1.0, 0.0, 3), Err(Error::Config(_))));
        assert!(matches!(build_grid(0.0, 1.0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn shift_examples() {
        let s = build_shift_space::<f64>(2, 2).unwrap();
        assert_eq!(s.len(), 4);
        let idx = |w: &[usize]| index_of(w, 2);
        assert_eq!(s.dist(idx(&[1, 1]), idx(&[2, 1])), 0.5);
        assert_eq!(s.dist(idx(&[1, 1]), idx(&[1, 2])), 0.25);
        assert_eq!(s.labels(), &["11", "12", "21", "22"]);
        assert_eq!(s.resolution(), 0.25);

        let s1 = build_shift_space::<f64>(2, 1).unwrap();
        assert_eq!(s1.len(), 2);
        assert_eq!(s1.dist(0, 1), 0.5);

        assert!(build_shift_space::<f64>(0, 3).is_err());
        assert!(build_shift_space::<f64>(2, 0).is_err());
    }

    #[test]
    fn builders_satisfy_metric_axioms() {
        build_grid(-2.0, 3.0, 17).unwrap().check_metric().unwrap();
        build_shift_space::<f64>(3, 3).unwrap().check_metric().unwrap();
        build_shift_space::<f32>(2, 4).unwrap().check_metric().unwrap();
    }

    #[test]
    fn word_index_round_trip() {
        for i in 0..27 {
            assert_eq!(index_of(&word_of(i, 3, 3), 3), i);
        }
        assert_eq!(word_of(5, 2, 3), vec![2, 1, 2]);
    }

    #[test]
    fn hausdorff_examples() {
        let g = build_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(g.hausdorff(&[0, 2], &[0, 2]).unwrap(), 0.0);
        assert_eq!(g.hausdorff(&[0], &[1]).unwrap(), 0.5);
        // max(max(0, 1), 0) = 1
        assert_eq!(g.hausdorff(&[0, 2], &[0]).unwrap(), 1.0);
        assert_eq!(g.hausdorff(&[], &[0]), Err(Error::EmptySet));
    }

    #[test]
    fn snap_examples() {
        let g = build_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(g.snap_coordinate(0.6).unwrap(), 1);
        assert_eq!(g.snap_coordinate(0.25).unwrap(), 0);
        assert_eq!(g.snap_coordinate(1.0).unwrap(), 2);
        assert_eq!(g.snap_coordinate(-4.0).unwrap(), 0);

        let s = build_shift_space::<f64>(2, 3).unwrap();
        assert_eq!(s.label(s.snap_word(&[2, 1, 2, 2, 1]).unwrap()), "212");
        assert_eq!(s.label(s.snap_word(&[2]).unwrap()), "211");
        assert!(s.snap_word(&[3]).is_err());
        assert!(g.snap_word(&[1]).is_err());
        assert!(s.snap_coordinate(0.1).is_err());
    }

    #[test]
    fn explicit_space_rejects_bad_tables() {
        let labels = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let ok = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(FiniteSpace::explicit(labels.clone(), ok, 0.0).is_ok());
        let bad = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        assert!(FiniteSpace::explicit(labels.clone(), bad, 0.0).is_err());
        let asym = vec![vec![0.0, 1.0, 2.0], vec![1.5, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(FiniteSpace::explicit(labels, asym, 0.0).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec: SpaceSpec<f64> = SpaceSpec::Grid { a: 0.0, b: 2.0, n: 5 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"grid":{"a":0.0,"b":2.0,"n":5}}"#);
        let back: SpaceSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), spec.build().unwrap());
    }
}
