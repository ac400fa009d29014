//! Idempotent (Maslov) measures through their densities.
//!
//! On a finite space an idempotent measure μ is determined by its density λ
//! via μ(f) = ⊕ₓ λ(x) ⊙ f(x); μ is a probability exactly when ⊕ₓ λ(x) = 0.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::maxplus::{oplus_all, MaxPlus};
use crate::scalar::Scalar;

/// A density with nonempty support.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Density<T: Scalar> {
    values: Vec<MaxPlus<T>>,
}

impl<T: Scalar> Density<T> {
    pub fn new(values: Vec<MaxPlus<T>>) -> Result<Self> {
        if values.iter().all(|v| v.is_bottom()) {
            return Err(Error::EmptySupport);
        }
        Ok(Self { values })
    }

    /// A density from plain floats; −∞ becomes `Bottom`.
    pub fn from_floats(values: &[T]) -> Result<Self> {
        let values = values
            .iter()
            .map(|&x| {
                MaxPlus::from_float(x)
                    .ok_or_else(|| Error::Config(format!("density value {x} is not in [-inf, inf)")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// The Dirac density g^a_x: `a` at `x`, `Bottom` elsewhere.
    pub fn dirac(n: usize, x: usize, a: T) -> Result<Self> {
        if x >= n {
            return Err(Error::Index { index: x, len: n });
        }
        let mut values = vec![MaxPlus::Bottom; n];
        values[x] = MaxPlus::finite(a);
        Ok(Self { values })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize) -> MaxPlus<T> {
        self.values[x]
    }

    pub fn values(&self) -> &[MaxPlus<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<MaxPlus<T>> {
        self.values
    }

    /// ⊕ₓ λ(x).
    pub fn total(&self) -> MaxPlus<T> {
        oplus_all(self.values.iter().copied())
    }

    /// Whether ⊕ₓ λ(x) = 0 exactly.
    pub fn is_probability(&self) -> bool {
        self.total() == MaxPlus::one()
    }

    /// μ(f) = ⊕ₓ λ(x) ⊙ f(x) for a finite real function f.
    pub fn mu_eval(&self, f: &[T]) -> Result<MaxPlus<T>> {
        self.check_len(f.len())?;
        Ok(oplus_all(self.values.iter().zip(f).map(|(l, &fx)| l.shift(fx))))
    }

    /// ⊕ₓ λ(x) ⊙ h(x) for an ℝ_max-valued h.
    pub fn idempotent_integral(&self, h: &[MaxPlus<T>]) -> Result<MaxPlus<T>> {
        self.check_len(h.len())?;
        Ok(oplus_all(self.values.iter().zip(h).map(|(l, hx)| l.odot(*hx))))
    }

    /// m_λ(A) = ⊕_{x∈A} λ(x); `Bottom` for the empty set.
    pub fn set_measure(&self, set: &[usize]) -> MaxPlus<T> {
        oplus_all(set.iter().filter_map(|&x| self.values.get(x).copied()))
    }

    /// Indices where λ is not `Bottom`.
    pub fn support(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(i, _)| i).collect()
    }

    /// Subtracts the maximum so the result is a probability density.
    pub fn normalize(&self) -> Result<Self> {
        let MaxPlus::Finite(top) = self.total() else {
            return Err(Error::EmptySupport);
        };
        Ok(Self { values: self.values.iter().map(|v| v.shift(-top)).collect() })
    }

    /// c ⊙ λ.
    pub fn shifted(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|v| v.shift(c)).collect() }
    }

    /// The upper semicontinuous envelope. Every function on a finite metric
    /// space is continuous, so this is λ itself.
    pub fn usc_envelope(&self) -> Self {
        self.clone()
    }

    /// e^λ pointwise, with e^{−∞} = 0.
    pub fn exp_values(&self) -> Vec<T> {
        self.values.iter().map(|v| v.exp_scale()).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::Dimension(format!("function of length {len} against density of length {}", self.len())))
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Density<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<MaxPlus<T>>::deserialize(deserializer)?;
        Density::new(values).map_err(serde::de::Error::custom)
    }
}

/// The max-plus indicator χ_A: 0 on A, `Bottom` elsewhere.
pub fn max_indicator<T: Scalar>(n: usize, set: &[usize]) -> Vec<MaxPlus<T>> {
    let mut h = vec![MaxPlus::Bottom; n];
    for &x in set {
        if x < n {
            h[x] = MaxPlus::one();
        }
    }
    h
}

/// d_ρ(a, b) = maxₓ |e^{a(x)} − e^{b(x)}|.
pub fn exp_sup_distance<T: Scalar>(a: &[MaxPlus<T>], b: &[MaxPlus<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.exp_scale() - y.exp_scale()).abs())
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = MaxPlus<f64>;
    const B: V = MaxPlus::Bottom;

    fn f(x: f64) -> V {
        MaxPlus::finite(x)
    }

    fn dens(v: &[V]) -> Density<f64> {
        Density::new(v.to_vec()).unwrap()
    }

    #[test]
    fn mu_eval_examples() {
        let f_vals = [3.0, -2.0, 7.5];
        let d = Density::dirac(3, 1, 0.0).unwrap();
        assert_eq!(d.mu_eval(&f_vals).unwrap(), f(-2.0));

        let p = dens(&[f(-1.0), f(0.0), B]);
        assert_eq!(p.mu_eval(&[4.25; 3]).unwrap(), f(4.25));

        // max(0 + 1, −1 + 5) = 4
        let l = dens(&[f(0.0), f(-1.0)]);
        assert_eq!(l.mu_eval(&[1.0, 5.0]).unwrap(), f(4.0));
        assert!(matches!(l.mu_eval(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(dens(&[f(-2.0), f(-5.0)]).normalize().unwrap(), dens(&[f(0.0), f(-3.0)]));
        assert_eq!(dens(&[f(0.0), f(-1.0)]).normalize().unwrap(), dens(&[f(0.0), f(-1.0)]));
        assert_eq!(dens(&[B, f(-7.0)]).normalize().unwrap(), dens(&[B, f(0.0)]));
        assert_eq!(Density::<f64>::new(vec![B, B]), Err(Error::EmptySupport));
    }

    #[test]
    fn set_measure_examples() {
        let p = dens(&[f(-1.0), f(0.0), B, f(-0.5)]);
        assert_eq!(p.set_measure(&[]), B);
        assert_eq!(p.set_measure(&[0, 1, 2, 3]), f(0.0));
        assert_eq!(p.set_measure(&[0, 2]), f(-1.0));
        assert_eq!(p.set_measure(&[2]), B);
    }

    #[test]
    fn idempotent_integral_examples() {
        let p = dens(&[f(-1.0), f(0.0), B, f(-0.5)]);
        let set = [0, 3];
        assert_eq!(p.idempotent_integral(&max_indicator(4, &set)).unwrap(), p.set_measure(&set));
        assert_eq!(p.idempotent_integral(&[f(0.0); 4]).unwrap(), f(0.0));
        assert_eq!(p.idempotent_integral(&[B; 4]).unwrap(), B);
    }

    #[test]
    fn dirac_examples() {
        let d = Density::dirac(4, 2, -1.0).unwrap();
        assert_eq!(d.support(), vec![2]);
        assert_eq!(d.normalize().unwrap(), Density::dirac(4, 2, 0.0).unwrap());
        assert_eq!(Density::<f64>::dirac(4, 4, 0.0), Err(Error::Index { index: 4, len: 4 }));
    }

    #[test]
    fn support_examples() {
        assert_eq!(dens(&[f(0.0), B, f(-3.0)]).support(), vec![0, 2]);
        assert_eq!(dens(&[f(0.0), f(-1.0)]).support(), vec![0, 1]);
    }

    #[test]
    fn envelope_is_identity_on_finite_spaces() {
        let d = dens(&[f(0.0), B, f(-3.0)]);
        assert_eq!(d.usc_envelope(), d);
    }

    #[test]
    fn exp_distance_treats_bottom_as_zero() {
        let a = [f(0.0), B];
        let b = [f(0.0), f(0.0)];
        assert_eq!(exp_sup_distance(&a, &b), 1.0);
        assert_eq!(exp_sup_distance(&a, &a), 0.0);
    }

    #[test]
    fn serializes_as_plain_array() {
        let d = dens(&[f(0.0), B]);
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"[0.0,"-inf"]"#);
    }
}
