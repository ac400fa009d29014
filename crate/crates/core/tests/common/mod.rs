#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropifs::examples::{random_system, RandomSystemOptions};
use tropifs::spaces::{build_grid, build_shift_space};
use tropifs::{Density, FiniteSpace, MaxPlus, MpIfs};

pub type V = MaxPlus<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A multiple of 1/64 in [lo/64, hi/64]; sums of these are exact in f64.
pub fn dyadic(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.gen_range(lo..=hi)) / 64.0
}

/// A random space with at most `max_points` points: a grid or a shift space.
pub fn random_space(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteSpace<f64> {
    let shifts: Vec<(usize, usize)> = [(2usize, 1usize), (2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (2, 5), (3, 3), (2, 6), (4, 3), (3, 4), (2, 7)]
        .into_iter()
        .filter(|&(s, d)| s.pow(d as u32) <= max_points)
        .collect();
    if !shifts.is_empty() && rng.gen_bool(0.5) {
        let (s, d) = shifts[rng.gen_range(0..shifts.len())];
        build_shift_space(s, d).unwrap()
    } else {
        let n = rng.gen_range(2..=max_points.max(2));
        build_grid(0.0, 1.0, n).unwrap()
    }
}

pub fn random_test_system(rng: &mut ChaCha8Rng, max_points: usize, max_maps: usize, constant_weight: bool) -> MpIfs<f64> {
    let space = random_space(rng, max_points);
    let opts = RandomSystemOptions { num_maps: rng.gen_range(1..=max_maps), seed: rng.gen(), constant_weight };
    random_system(&space, opts).unwrap()
}

/// A random dyadic density with maximum exactly 0 and some `Bottom` entries.
pub fn random_probability(rng: &mut ChaCha8Rng, n: usize) -> Density<f64> {
    let mut values: Vec<V> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { MaxPlus::Bottom } else { MaxPlus::finite(dyadic(rng, -256, 0)) })
        .collect();
    let top = rng.gen_range(0..n);
    values[top] = MaxPlus::finite(0.0);
    Density::new(values).unwrap().normalize().unwrap()
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| dyadic(rng, -512, 512)).collect()
}
