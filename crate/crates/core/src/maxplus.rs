//! Max-plus semiring scalars and dense matrices.
//!
//! `MaxPlus::Bottom` is the additive neutral element (−∞) and is absorbing
//! for ⊙. `MaxPlus::Finite(0)` is the multiplicative unit.
//!
//! Matrices follow the convention used for transition graphs throughout the
//! crate: entry `[i][j]` is the weight of the edge from `j` (source, column)
//! to `i` (target, row), so `(A ⊙ B)[i][k]` composes a `B` step followed by an
//! `A` step.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Token used for −∞ in JSON and CSV.
pub const BOTTOM_TOKEN: &str = "-inf";

/// An element of ℝ ∪ {−∞}.
///
/// The derived ordering puts `Bottom` below every finite value.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub enum MaxPlus<T> {
    #[default]
    Bottom,
    Finite(T),
}

impl<T: Scalar> MaxPlus<T> {
    /// A finite value. Panics on NaN or ±∞.
    #[inline]
    pub fn finite(x: T) -> Self {
        assert!(x.is_finite(), "max-plus finite value must be finite, got {x}");
        MaxPlus::Finite(x)
    }

    /// Maps −∞ to `Bottom` and finite values to `Finite`; NaN and +∞ yield `None`.
    pub fn from_float(x: T) -> Option<Self> {
        if x.is_finite() {
            Some(MaxPlus::Finite(x))
        } else if x == T::neg_infinity() {
            Some(MaxPlus::Bottom)
        } else {
            None
        }
    }

    /// The multiplicative unit 𝟙 = 0.
    #[inline]
    pub fn one() -> Self {
        MaxPlus::Finite(T::zero())
    }

    #[inline]
    pub fn is_bottom(self) -> bool {
        matches!(self, MaxPlus::Bottom)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        !self.is_bottom()
    }

    #[inline]
    pub fn value(self) -> Option<T> {
        match self {
            MaxPlus::Bottom => None,
            MaxPlus::Finite(x) => Some(x),
        }
    }

    /// The value as a float, with `Bottom` mapped to −∞.
    #[inline]
    pub fn to_float(self) -> T {
        self.value().unwrap_or_else(T::neg_infinity)
    }

    /// e^x, with e^{−∞} = 0.
    #[inline]
    pub fn exp_scale(self) -> T {
        match self {
            MaxPlus::Bottom => T::zero(),
            MaxPlus::Finite(x) => x.exp(),
        }
    }

    /// a ⊕ b = max(a, b).
    #[inline]
    pub fn oplus(self, other: Self) -> Self {
        match (self, other) {
            (MaxPlus::Bottom, b) => b,
            (a, MaxPlus::Bottom) => a,
            (MaxPlus::Finite(a), MaxPlus::Finite(b)) => MaxPlus::Finite(if b > a { b } else { a }),
        }
    }

    /// a ⊙ b = a + b.
    #[inline]
    pub fn odot(self, other: Self) -> Self {
        match (self, other) {
            (MaxPlus::Finite(a), MaxPlus::Finite(b)) => MaxPlus::Finite(a + b),
            _ => MaxPlus::Bottom,
        }
    }

    /// Shorthand for `self ⊙ Finite(c)`.
    #[inline]
    pub fn shift(self, c: T) -> Self {
        match self {
            MaxPlus::Bottom => MaxPlus::Bottom,
            MaxPlus::Finite(a) => MaxPlus::Finite(a + c),
        }
    }
}

/// a ⊕ b.
#[inline]
pub fn oplus<T: Scalar>(a: MaxPlus<T>, b: MaxPlus<T>) -> MaxPlus<T> {
    a.oplus(b)
}

/// a ⊙ b.
#[inline]
pub fn odot<T: Scalar>(a: MaxPlus<T>, b: MaxPlus<T>) -> MaxPlus<T> {
    a.odot(b)
}

/// ⊕ over an iterator; `Bottom` when empty.
pub fn oplus_all<T: Scalar, I: IntoIterator<Item = MaxPlus<T>>>(values: I) -> MaxPlus<T> {
    values.into_iter().fold(MaxPlus::Bottom, MaxPlus::oplus)
}


impl<T: Scalar> fmt::Display for MaxPlus<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxPlus::Bottom => f.write_str(BOTTOM_TOKEN),
            MaxPlus::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl<T: Scalar> FromStr for MaxPlus<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == BOTTOM_TOKEN {
            return Ok(MaxPlus::Bottom);
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("not a max-plus value: {s:?}")))?;
        if !x.is_finite() {
            return Err(Error::Config(format!("non-finite max-plus value: {s:?}")));
        }
        Ok(MaxPlus::Finite(T::of(x)))
    }
}

impl<T: Scalar> Serialize for MaxPlus<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MaxPlus::Bottom => serializer.serialize_str(BOTTOM_TOKEN),
            MaxPlus::Finite(x) => serializer.serialize_f64(x.as_f64()),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for MaxPlus<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(x) if x.is_finite() => Ok(MaxPlus::Finite(T::of(x))),
            Repr::Num(x) => Err(serde::de::Error::custom(format!("non-finite number {x}"))),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// How [`MpMatrix::kleene_plus_with`] computes the transitive closure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureMethod {
    /// ⌈log₂ n⌉ squarings of I ⊕ A, then one multiplication by A.
    #[default]
    Squaring,
    /// Max-plus Floyd–Warshall relaxation.
    FloydWarshall,
}

// Below this many multiply-adds a product stays on the calling thread.
const PAR_THRESHOLD: usize = 1 << 15;

/// Dense row-major max-plus matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MpMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<MaxPlus<T>>,
}

impl<T: Scalar> MpMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<MaxPlus<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<MaxPlus<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// The all-`Bottom` matrix.
    pub fn bottom(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![MaxPlus::Bottom; rows * cols] }
    }

    /// 0 on the diagonal, `Bottom` elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::bottom(n, n);
        for i in 0..n {
            m.set(i, i, MaxPlus::one());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> MaxPlus<T> {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: MaxPlus<T>) {
        self.entries[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[MaxPlus<T>] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<MaxPlus<T>> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[MaxPlus<T>] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<MaxPlus<T>>> {
        self.entries.chunks(self.cols.max(1)).map(<[_]>::to_vec).collect()
    }

    /// Entrywise ⊕.
    pub fn oplus(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "{}x{} ⊕ {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.oplus(*b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    /// C[i][k] = ⊕_j A[i][j] ⊙ B[j][k].
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "{}x{} ⊙ {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::bottom(self.rows, rhs.cols);
        if rhs.cols == 0 {
            return Ok(out);
        }
        let fill_row = |(i, out_row): (usize, &mut [MaxPlus<T>])| {
            for (j, &a) in self.row(i).iter().enumerate() {
                let MaxPlus::Finite(a) = a else { continue };
                for (o, &b) in out_row.iter_mut().zip(rhs.row(j)) {
                    if let MaxPlus::Finite(b) = b {
                        let cand = a + b;
                        match *o {
                            MaxPlus::Finite(cur) if cur >= cand => {}
                            _ => *o = MaxPlus::Finite(cand),
                        }
                    }
                }
            }
        };
        if self.rows * self.cols * rhs.cols >= PAR_THRESHOLD {
            out.entries.par_chunks_mut(rhs.cols).enumerate().for_each(fill_row);
        } else {
            out.entries.chunks_mut(rhs.cols).enumerate().for_each(fill_row);
        }
        Ok(out)
    }

    /// A⁺ = A ⊕ A² ⊕ … ⊕ Aⁿ, the best weight over paths of length ≥ 1.
    pub fn kleene_plus(&self) -> Result<Self> {
        self.kleene_plus_with(ClosureMethod::default())
    }

    pub fn kleene_plus_with(&self, method: ClosureMethod) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "closure of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let closure = match method {
            ClosureMethod::Squaring => self.closure_by_squaring()?,
            ClosureMethod::FloydWarshall => self.closure_floyd_warshall(),
        };
        for i in 0..closure.rows {
            if let MaxPlus::Finite(w) = closure.get(i, i) {
                if w > T::zero() {
                    return Err(Error::PositiveCycle { node: i, weight: w.as_f64() });
                }
            }
        }
        Ok(closure)
    }

    fn closure_by_squaring(&self) -> Result<Self> {
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        // q = I ⊕ A ⊕ … ⊕ A^covered
        let mut q = self.oplus(&Self::identity(n))?;
        let mut covered = 1usize;
        while covered + 1 < n {
            q = q.mul(&q)?;
            covered *= 2;
        }
        self.mul(&q)
    }

    fn closure_floyd_warshall(&self) -> Self {
        let n = self.rows;
        let mut d = self.clone();
        for k in 0..n {
            let row_k = d.row(k).to_vec();
            let relax = |row: &mut [MaxPlus<T>]| {
                let MaxPlus::Finite(dik) = row[k] else { return };
                for (cell, &dkj) in row.iter_mut().zip(&row_k) {
                    if let MaxPlus::Finite(dkj) = dkj {
                        let cand = dik + dkj;
                        match *cell {
                            MaxPlus::Finite(cur) if cur >= cand => {}
                            _ => *cell = MaxPlus::Finite(cand),
                        }
                    }
                }
            };
            if n * n >= PAR_THRESHOLD {
                d.entries.par_chunks_mut(n).for_each(relax);
            } else {
                d.entries.chunks_mut(n).for_each(relax);
            }
        }
        d
    }
}
