//! The JSON run configuration and the system builders it can reference.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use tropifs::examples::{build_section31, random_system, sys_a, RandomSystemOptions};
use tropifs::mane::DEFAULT_TOL_AUBRY;
use tropifs::spaces::{build_grid, build_shift_space};
use tropifs::{ClosureMethod, IndexSpace, MaxPlus, MpIfs, SpaceSpec, SystemParts, SystemSpec};

use crate::error::CliError;

type V = MaxPlus<f64>;

/// One document per run.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: Option<SystemSource>,
    #[serde(default = "default_tol_aubry")]
    pub tol_aubry: f64,
    #[serde(default)]
    pub closure: ClosureMethod,
    #[serde(default)]
    pub invariant: Option<InvariantConfig>,
    #[serde(default)]
    pub fuzzy: FuzzyConfig,
    #[serde(default)]
    pub demo31: Demo31Config,
}

fn default_tol_aubry() -> f64 {
    DEFAULT_TOL_AUBRY
}

/// Where the system comes from. Exactly one key.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSource {
    Inline(SystemSpec<f64>),
    Section31 { depth: usize },
    SysA {},
    Grid(GridBuilder),
    Shift(ShiftBuilder),
    Random { space: SpaceSpec<f64>, num_maps: usize, seed: u64, #[serde(default)] constant_weight: bool },
}

/// A weight given once for every point or point by point.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Constant(V),
    PerPoint(Vec<V>),
}

impl WeightSpec {
    fn expand(&self, n: usize, map: usize) -> Result<Vec<V>, CliError> {
        match self {
            WeightSpec::Constant(w) => Ok(vec![*w; n]),
            WeightSpec::PerPoint(ws) if ws.len() == n => Ok(ws.clone()),
            WeightSpec::PerPoint(ws) => {
                Err(CliError::Config(format!("map {map}: {} weights for {n} points", ws.len())))
            }
        }
    }
}

/// Affine maps x ↦ slope·x + offset snapped onto an interval grid.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBuilder {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub maps: Vec<AffineMap>,
    /// Distance between distinct maps; defaults to twice the interval length.
    #[serde(default)]
    pub index_scale: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMap {
    pub slope: f64,
    pub offset: f64,
    pub weight: WeightSpec,
}

/// Prefix maps ω ↦ prefix·ω truncated to the space depth.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftBuilder {
    pub symbols: usize,
    pub depth: usize,
    pub maps: Vec<PrefixMap>,
    /// Distance between distinct maps; defaults to 1.
    #[serde(default)]
    pub index_scale: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefixMap {
    pub prefix: Vec<usize>,
    pub weight: WeightSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantMode {
    Boundary,
    Constant,
    Enumerate,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantConfig {
    pub mode: InvariantMode,
    /// Boundary values keyed by point label; needed in boundary mode.
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    /// Boundary levels (≤ 0) tried at each non-anchor Aubry point.
    #[serde(default)]
    pub levels: Option<Vec<V>>,
    /// Shorthand for levels −α.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "default_verify_tol")]
    pub tol: f64,
}

fn default_verify_tol() -> f64 {
    tropifs::invariant::DEFAULT_VERIFY_TOL
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub anchor: String,
    #[serde(default)]
    pub values: BTreeMap<String, V>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyConfig {
    #[serde(default = "default_fhb_tol")]
    pub tol: f64,
    #[serde(default = "default_fhb_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub start: FuzzyStart,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        Self { tol: default_fhb_tol(), max_iters: default_fhb_max_iters(), start: FuzzyStart::default() }
    }
}

fn default_fhb_tol() -> f64 {
    tropifs::fuzzy::DEFAULT_FHB_TOL
}

fn default_fhb_max_iters() -> usize {
    tropifs::fuzzy::DEFAULT_FHB_MAX_ITERS
}

/// Starting fuzzy set of the attractor iteration.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzyStart {
    #[default]
    Ones,
    /// Θλ_α on a binary shift space.
    LambdaAlpha(f64),
    /// Θλ for a probability density λ.
    Density(Vec<V>),
    Membership(Vec<f64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demo31Config {
    #[serde(default = "default_demo_depth")]
    pub depth: usize,
    #[serde(default = "default_demo_alphas")]
    pub alphas: Vec<f64>,
}

impl Default for Demo31Config {
    fn default() -> Self {
        Self { depth: default_demo_depth(), alphas: default_demo_alphas() }
    }
}

fn default_demo_depth() -> usize {
    6
}

fn default_demo_alphas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5]
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be a positive number, got {x}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), CliError> {
        positive("tol_aubry", self.tol_aubry)?;
        positive("fuzzy.tol", self.fuzzy.tol)?;
        if self.fuzzy.max_iters == 0 {
            return Err(CliError::Config("fuzzy.max_iters must be positive".into()));
        }
        if let Some(inv) = &self.invariant {
            positive("invariant.tol", inv.tol)?;
        }
        Ok(())
    }

    /// Replaces the seed of a random system source.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(SystemSource::Random { seed: s, .. }) = &mut self.system {
            *s = seed;
        }
    }

    pub fn source(&self) -> Result<&SystemSource, CliError> {
        self.system.as_ref().ok_or_else(|| CliError::Config("this command needs a `system` entry".into()))
    }
}

impl SystemSource {
    /// Unvalidated parts, so that `validate` can report on broken systems.
    pub fn parts(&self) -> Result<SystemParts<f64>, CliError> {
        match self {
            SystemSource::Inline(spec) => Ok(spec.to_parts()?),
            SystemSource::Grid(g) => g.parts(),
            SystemSource::Shift(s) => s.parts(),
            other => Ok(other.build()?.to_spec().to_parts()?),
        }
    }

    pub fn build(&self) -> Result<MpIfs<f64>, CliError> {
        match self {
            SystemSource::Section31 { depth } => Ok(build_section31(*depth)?),
            SystemSource::SysA {} => Ok(sys_a()),
            SystemSource::Random { space, num_maps, seed, constant_weight } => {
                let space = space.build()?;
                let opts = RandomSystemOptions { num_maps: *num_maps, seed: *seed, constant_weight: *constant_weight };
                Ok(random_system(&space, opts)?)
            }
            _ => Ok(MpIfs::new(self.parts()?)?),
        }
    }
}

impl GridBuilder {
    fn parts(&self) -> Result<SystemParts<f64>, CliError> {
        if self.maps.is_empty() {
            return Err(CliError::Config("grid needs at least one map".into()));
        }
        let space = build_grid(self.a, self.b, self.n)?;
        let coords = space.coords().expect("grid has coordinates").to_vec();
        let (lo, hi) = (self.a.min(self.b), self.a.max(self.b));
        let slack = space.resolution();
        let mut maps = Vec::with_capacity(self.maps.len());
        let mut weights = Vec::with_capacity(self.maps.len());
        for (j, m) in self.maps.iter().enumerate() {
            let mut row = Vec::with_capacity(coords.len());
            for &x in &coords {
                let y = m.slope * x + m.offset;
                if !(y >= lo - slack && y <= hi + slack) {
                    return Err(CliError::Config(format!("map {j} sends {x} to {y}, outside [{lo}, {hi}]")));
                }
                row.push(space.snap_coordinate(y)?);
            }
            maps.push(row);
            weights.push(m.weight.expand(coords.len(), j)?);
        }
        let scale = self.index_scale.unwrap_or(2.0 * (hi - lo));
        Ok(SystemParts {
            index_space: IndexSpace::discrete(self.maps.len(), scale)?,
            space,
            maps,
            weights,
            snapped: true,
        })
    }
}

impl ShiftBuilder {
    fn parts(&self) -> Result<SystemParts<f64>, CliError> {
        if self.maps.is_empty() {
            return Err(CliError::Config("shift needs at least one map".into()));
        }
        let space = build_shift_space(self.symbols, self.depth)?;
        let n = space.len();
        let mut maps = Vec::with_capacity(self.maps.len());
        let mut weights = Vec::with_capacity(self.maps.len());
        for (j, m) in self.maps.iter().enumerate() {
            if m.prefix.is_empty() {
                return Err(CliError::Config(format!("map {j} has an empty prefix")));
            }
            let row = (0..n)
                .map(|x| {
                    let mut w = m.prefix.clone();
                    w.extend(space.word(x).expect("shift space"));
                    space.snap_word(&w)
                })
                .collect::<tropifs::Result<Vec<_>>>()?;
            maps.push(row);
            weights.push(m.weight.expand(n, j)?);
        }
        Ok(SystemParts {
            index_space: IndexSpace::discrete(self.maps.len(), self.index_scale.unwrap_or(1.0))?,
            space,
            maps,
            weights,
            snapped: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> RunConfig {
        let c: RunConfig = serde_json::from_str(s).unwrap();
        c.check().unwrap();
        c
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(r#"{"system": {"sys_a": {}}}"#);
        assert_eq!(c.tol_aubry, DEFAULT_TOL_AUBRY);
        assert_eq!(c.demo31.depth, 6);
        assert!(matches!(c.fuzzy.start, FuzzyStart::Ones));
    }

    #[test]
    fn two_sources_rejected() {
        let r: Result<RunConfig, _> = serde_json::from_str(r#"{"system": {"sys_a": {}, "section31": {"depth": 3}}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let c: RunConfig = serde_json::from_str(r#"{"tol_aubry": 0}"#).unwrap();
        assert!(c.check().is_err());
    }

    #[test]
    fn shift_builder_matches_binary_example_maps() {
        let c = parse(
            r#"{"system": {"shift": {"symbols": 2, "depth": 3, "maps": [
                {"prefix": [1], "weight": 0}, {"prefix": [2], "weight": 0}]}}}"#,
        );
        let built = c.source().unwrap().parts().unwrap();
        let reference = build_section31::<f64>(3).unwrap();
        assert_eq!(built.maps, reference.maps());
    }

    #[test]
    fn grid_builder_snaps() {
        let c = parse(
            r#"{"system": {"grid": {"a": 0, "b": 1, "n": 5, "maps": [
                {"slope": 0.5, "offset": 0, "weight": 0},
                {"slope": 0.5, "offset": 0.5, "weight": [-1, -1, -1, -1, "-inf"]}]}}}"#,
        );
        let p = c.source().unwrap().parts().unwrap();
        assert_eq!(p.maps, vec![vec![0, 0, 1, 1, 2], vec![2, 2, 3, 3, 4]]);
        assert_eq!(p.weights[1][4], MaxPlus::Bottom);
    }

    #[test]
    fn grid_map_leaving_interval_rejected() {
        let c = parse(r#"{"system": {"grid": {"a": 0, "b": 1, "n": 5, "maps": [{"slope": 0.5, "offset": 0.9, "weight": 0}]}}}"#);
        assert!(matches!(c.source().unwrap().parts(), Err(CliError::Config(_))));
    }
}
