//! Scenario configuration: TOML with sections, every key optional.
//!
//! Unknown keys are rejected. The resolved configuration (defaults filled
//! in, command-line overrides applied) is what gets hashed into output headers.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::StudyKind;
use crate::discretization::Grid;
use crate::geometry::{pt, Shape};
use crate::parabolic::{default_lambda_hat, truncation_box, Scenario, TimeScheme};
use crate::{Error, Result};

/// A complete run configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub shape: ShapeSpec,
    pub physics: Physics,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub tolerances: Tolerances,
    pub analysis: AnalysisSpec,
    pub output: OutputSpec,
}

/// Shape of the inclusion; `kind` selects the variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
    },
    Superellipse {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
        exponent: f64,
    },
    Egg {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
        amplitude: f64,
        #[serde(default = "one_u32")]
        frequency: u32,
    },
    /// Disjoint union; nested unions are flattened.
    Union { components: Vec<ShapeSpec> },
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec::Ball { center: [0.0, 0.0], radius: 1.0 }
    }
}

impl ShapeSpec {
    pub fn build(&self) -> Result<Shape> {
        match self {
            ShapeSpec::Ball { center, radius } => Shape::ball(pt(center[0], center[1]), *radius),
            ShapeSpec::Ellipse { center, a, b } => Shape::ellipse(pt(center[0], center[1]), *a, *b),
            ShapeSpec::Superellipse { center, a, b, exponent } => {
                Shape::superellipse(pt(center[0], center[1]), *a, *b, *exponent)
            }
            ShapeSpec::Egg { center, a, b, amplitude, frequency } => {
                Shape::egg(pt(center[0], center[1]), *a, *b, *amplitude, *frequency)
            }
            ShapeSpec::Union { components } => {
                if components.is_empty() {
                    return Err(Error::Config("a union needs at least one component".into()));
                }
                let parts = components.iter().map(ShapeSpec::build).collect::<Result<Vec<_>>>()?;
                Shape::union(&parts)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self { sigma_plus: 2.0, sigma_minus: 1.0 }
    }
}

/// Box half-width: a number or the string `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HalfWidth {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Cells per axis.
    pub n: usize,
    pub half_width: HalfWidth,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 128, half_width: HalfWidth::Value(6.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    pub horizon: f64,
    /// Nominal step; `h` when absent.
    pub dt: Option<f64>,
    pub scheme: TimeScheme,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { horizon: 1.0, dt: None, scheme: TimeScheme::BackwardEuler }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative residual target of the linear solves.
    pub linear: f64,
    /// Bisection bracket of the plane scans.
    pub scan: f64,
    /// Distance within which all critical planes must meet for a ball-like verdict.
    pub center: f64,
    /// Heat allowed outside the box for `half_width = "auto"`.
    pub truncation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { linear: 1e-12, scan: 1e-4, center: 1e-3, truncation: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    /// Interface samples per component for traces and residuals.
    pub samples: usize,
    /// Equispaced plane directions.
    pub directions: usize,
    /// Interface samples per component for the plane scans.
    pub scan_samples: usize,
    /// Additional randomly oriented plane directions (drawn from `seed`).
    pub random_directions: usize,
    pub seed: u64,
    /// Run the value/Hopf/corner checks at `n` and `2n` in `moving-planes`.
    pub chain: bool,
    /// Resolutions of `converge` (at least three).
    pub resolutions: Vec<usize>,
    /// Problem families of `converge`.
    pub studies: Vec<StudyKind>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            samples: 256,
            directions: 16,
            scan_samples: 2048,
            random_directions: 0,
            seed: 0,
            chain: true,
            resolutions: vec![64, 128, 256],
            studies: StudyKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let shape = self.shape.build().map_err(|e| Error::Config(e.to_string()))?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.physics.sigma_plus) || !positive(self.physics.sigma_minus) {
            return bad(format!(
                "conductivities must be positive, got sigma_plus = {}, sigma_minus = {}",
                self.physics.sigma_plus, self.physics.sigma_minus
            ));
        }
        if self.grid.n < 8 {
            return bad(format!("grid.n must be at least 8, got {}", self.grid.n));
        }
        if let HalfWidth::Value(l) = self.grid.half_width {
            if !positive(l) {
                return bad(format!("grid.half_width must be positive, got {l}"));
            }
            if l <= shape.bounding_radius() {
                return bad(format!(
                    "grid.half_width = {l} does not contain the shape (bounding radius {:.6})",
                    shape.bounding_radius()
                ));
            }
        }
        if !positive(self.time.horizon) {
            return bad(format!("time.horizon must be positive, got {}", self.time.horizon));
        }
        if let Some(dt) = self.time.dt {
            if !positive(dt) {
                return bad(format!("time.dt must be positive, got {dt}"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [("linear", t.linear), ("scan", t.scan), ("center", t.center), ("truncation", t.truncation)] {
            if !positive(v) {
                return bad(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        let a = &self.analysis;
        if a.samples < 4 || a.scan_samples < 4 {
            return bad("analysis.samples and analysis.scan_samples must be at least 4".into());
        }
        if a.directions < 2 {
            return bad(format!("analysis.directions must be at least 2, got {}", a.directions));
        }
        if a.resolutions.len() < 3 || a.resolutions.iter().any(|&n| n < 8) {
            return bad("analysis.resolutions needs at least three entries, each at least 8".into());
        }
        if a.studies.is_empty() {
            return bad("analysis.studies must not be empty".into());
        }
        Ok(())
    }

    /// Applies the `--resolution` and `--out` overrides and re-validates.
    pub fn with_overrides(mut self, resolution: Option<usize>, out: Option<PathBuf>) -> Result<Self> {
        if let Some(n) = resolution {
            self.grid.n = n;
        }
        if let Some(dir) = out {
            self.output.dir = dir;
        }
        self.validate()?;
        Ok(self)
    }

    /// SHA-256 of the resolved configuration without the output section, so
    /// the same run written to different directories has the same hash.
    pub fn hash(&self) -> String {
        let hashed = Config { output: OutputSpec::default(), ..self.clone() };
        let text = serde_json::to_string(&hashed).expect("configuration serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The box half-width, resolving `"auto"` with the truncation bound.
    pub fn half_width(&self, shape: &Shape) -> f64 {
        match self.grid.half_width {
            HalfWidth::Value(l) => l,
            HalfWidth::Keyword(AutoKeyword::Auto) => {
                let lambda_hat = default_lambda_hat(self.physics.sigma_plus, self.physics.sigma_minus);
                truncation_box(shape, self.time.horizon, lambda_hat, self.tolerances.truncation)
            }
        }
    }

    /// The scenario described by this configuration.
    pub fn scenario(&self) -> Result<Scenario> {
        let shape = self.shape.build()?;
        let grid = Grid::new(self.grid.n, self.half_width(&shape))?;
        let mut scenario = Scenario::new(
            shape,
            self.physics.sigma_plus,
            self.physics.sigma_minus,
            grid,
            self.time.horizon,
            self.time.dt,
        )?
        .with_scheme(self.time.scheme)
        .with_samples(self.analysis.samples);
        scenario.linear_tol = self.tolerances.linear;
        Ok(scenario)
    }

    /// Warnings about legal but degenerate settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.physics.sigma_plus == self.physics.sigma_minus {
            warnings.push(format!(
                "sigma_plus = sigma_minus = {}: the medium is homogeneous (one-phase problem)",
                self.physics.sigma_plus
            ));
        }
        warnings
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_documented_default() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.shape, ShapeSpec::Ball { center: [0.0, 0.0], radius: 1.0 });
        assert_eq!(c.grid.n, 128);
        assert_eq!(c.grid.half_width, HalfWidth::Value(6.0));
        assert_eq!(c.physics, Physics { sigma_plus: 2.0, sigma_minus: 1.0 });
        assert_eq!(c.analysis.resolutions, vec![64, 128, 256]);
    }

    #[test]
    fn all_shape_kinds_parse() {
        let text = r#"
            [shape]
            kind = "union"
            [[shape.components]]
            kind = "ball"
            center = [-1.5, 0.0]
            [[shape.components]]
            kind = "egg"
            center = [1.5, 0.0]
            a = 0.8
            b = 0.5
            amplitude = 0.2
            [[shape.components]]
            kind = "superellipse"
            center = [0.0, 2.5]
            a = 0.6
            b = 0.4
            exponent = 4.0
        "#;
        let c = Config::from_toml(text).unwrap();
        assert_eq!(c.shape.build().unwrap().component_count(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in
            ["bogus = 1", "[physics]\nsigma = 2.0", "[shape]\nkind = \"ball\"\nradiu = 2.0", "[shape]\nkind = \"cube\""]
        {
            assert!(matches!(Config::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in [
            "[physics]\nsigma_plus = -1.0",
            "[grid]\nn = 4",
            "[grid]\nhalf_width = 0.5",
            "[grid]\nhalf_width = \"big\"",
            "[time]\nhorizon = 0.0",
            "[shape]\nkind = \"ellipse\"\na = 1.0\nb = -1.0",
            "[analysis]\nresolutions = [32, 64]",
        ] {
            assert!(matches!(Config::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn auto_half_width_uses_the_truncation_bound() {
        let c = Config::from_toml("[grid]\nhalf_width = \"auto\"\n[time]\nhorizon = 2.0").unwrap();
        let shape = c.shape.build().unwrap();
        let expected = truncation_box(&shape, 2.0, 8.0, 1e-6);
        assert_eq!(c.half_width(&shape), expected);
        assert!(c.scenario().unwrap().truncation_check(1e-6).adequate);
    }

    #[test]
    fn hash_ignores_output_dir_but_not_physics() {
        let a = Config::default();
        let b = a.clone().with_overrides(None, Some("elsewhere".into())).unwrap();
        let c = a.clone().with_overrides(Some(64), None).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn equal_conductivities_warn() {
        let c = Config::from_toml("[physics]\nsigma_plus = 1.5\nsigma_minus = 1.5").unwrap();
        assert_eq!(c.warnings().len(), 1);
        assert!(Config::default().warnings().is_empty());
    }
}
