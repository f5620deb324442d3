//! Experiment files: TOML with one section per concern.
//!
//! Only the sections a subcommand reads need to be present; everything else falls back
//! to the defaults below.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rotacover::constructions::ScheduleTerm;
use rotacover::coverage::AngleSet;
use rotacover::fourier::{build_restriction_measure, CircleMeasure, RestrictionMeasure};
use rotacover::{CircleArc, Lattice, PolarBox};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<AngleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holes: Option<HolesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<GoodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub very_good: Option<VeryGoodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad: Option<BadConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perfect: Option<PerfectConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<FourierConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantor: Option<CantorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilate: Option<DilateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderConfig>,
}

fn default_epsilon() -> f64 {
    0.3
}

/// Lattice basis given column by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub columns: [[f64; 2]; 2],
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            columns: [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngleConfig {
    Finite { angles: Vec<f64> },
    Arc { start: f64, length: f64 },
    ArcUnion { arcs: Vec<[f64; 2]> },
    FullCircle,
}

impl AngleConfig {
    pub fn to_angle_set(&self) -> Result<AngleSet, CliError> {
        Ok(match self {
            AngleConfig::Finite { angles } => AngleSet::finite(angles)?,
            AngleConfig::Arc { start, length } => AngleSet::arc(*start, *length)?,
            AngleConfig::ArcUnion { arcs } => AngleSet::arc_union(
                arcs.iter()
                    .map(|a| CircleArc::new(a[0], a[1]))
                    .collect::<rotacover::Result<_>>()?,
            )?,
            AngleConfig::FullCircle => AngleSet::arc(0.0, TAU)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub r_lo: f64,
    pub r_hi: f64,
    #[serde(default)]
    pub phi_lo: f64,
    #[serde(default = "full_turn")]
    pub phi_hi: f64,
}

fn full_turn() -> f64 {
    TAU
}

impl RegionConfig {
    pub fn to_box(&self) -> Result<PolarBox, CliError> {
        Ok(PolarBox::new(self.r_lo, self.r_hi, self.phi_lo, self.phi_hi)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Lattice points per enumeration call; `ROTACOVER_BUDGET` overrides it.
    pub enumeration_cap: usize,
    /// Subdivision depth of every region verification.
    pub max_depth: u32,
    /// Annuli scanned per hole search before giving up.
    pub search_rounds: u32,
    /// Radii (and directions, where sampled) per Fourier annulus.
    pub grid: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enumeration_cap: rotacover::DEFAULT_ENUMERATION_CAP,
            max_depth: 30,
            search_rounds: 8,
            grid: 64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolesConfig {
    pub r_min: f64,
    pub rho: f64,
    pub min_clearance: f64,
    /// Draw this many finite angle sets from the seed instead of using `[angles]`.
    pub random_sets: usize,
    pub max_size: usize,
}

impl Default for HolesConfig {
    fn default() -> Self {
        HolesConfig {
            r_min: 50.0,
            rho: 0.05,
            min_clearance: 0.02,
            random_sets: 0,
            max_size: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoodConfig {
    pub arc_start: f64,
    pub arc_length: f64,
    pub r_start: f64,
    pub shells: usize,
}

impl Default for GoodConfig {
    fn default() -> Self {
        GoodConfig {
            arc_start: 0.0,
            arc_length: 1.0,
            r_start: 10.0,
            shells: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VeryGoodConfig {
    /// Explicit `(a_n, ε_n)` terms; empty means `a_n = 2^{-n}`, `ε_n = 1/n` for `terms` terms.
    pub schedule: Vec<ScheduleTerm>,
    pub terms: usize,
    pub r_start: f64,
    pub shells_per_term: usize,
}

impl Default for VeryGoodConfig {
    fn default() -> Self {
        VeryGoodConfig {
            schedule: Vec::new(),
            terms: 3,
            r_start: 10.0,
            shells_per_term: 1,
        }
    }
}

impl VeryGoodConfig {
    pub fn schedule(&self) -> Vec<ScheduleTerm> {
        if self.schedule.is_empty() {
            ScheduleTerm::default_schedule(self.terms)
        } else {
            self.schedule.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BadConfig {
    pub n: usize,
    pub rho: f64,
    pub min_clearance: f64,
}

impl Default for BadConfig {
    fn default() -> Self {
        BadConfig {
            n: 10,
            rho: 0.05,
            min_clearance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerfectConfig {
    pub depth: usize,
    pub rho: f64,
    pub min_clearance: f64,
    pub root_start: f64,
    pub root_length: f64,
}

impl Default for PerfectConfig {
    fn default() -> Self {
        PerfectConfig {
            depth: 4,
            rho: 0.05,
            min_clearance: 0.02,
            root_start: 0.0,
            root_length: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    UniformArc { start: f64, length: f64 },
    Bump { start: f64, length: f64 },
    Atomic { atoms: Vec<[f64; 2]> },
    /// Normalised restriction of arc length to the `[angles]` arc family.
    Restriction { delta_target: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    pub measure: MeasureConfig,
    /// Probe annuli `[r_lo, r_hi]`; empty means `[2^k, 2^{k+1}]` for `k = 0..10`.
    #[serde(default)]
    pub annuli: Vec<[f64; 2]>,
    #[serde(default)]
    pub strict_epsilon: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CantorConfig {
    pub arc_start: f64,
    pub arc_length: f64,
    pub stages: usize,
    pub grid: usize,
}

impl Default for CantorConfig {
    fn default() -> Self {
        CantorConfig {
            arc_start: 0.0,
            arc_length: 1.0,
            stages: 6,
            grid: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilateConfig {
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    /// A `cover-check` report.
    pub input: PathBuf,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_height")]
    pub height: usize,
}

fn default_width() -> usize {
    720
}

fn default_height() -> usize {
    240
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let b = &self.budgets;
        if b.enumeration_cap == 0 || b.max_depth == 0 || b.search_rounds == 0 || b.grid == 0 {
            return Err(CliError::Config("all budgets must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        self.lattice()?;
        Ok(())
    }

    /// The lattice with the configured enumeration cap, or the `ROTACOVER_BUDGET` override.
    pub fn lattice(&self) -> Result<Lattice, CliError> {
        let [a, b] = self.lattice.columns;
        let cap = match std::env::var("ROTACOVER_BUDGET") {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| CliError::Config(format!("ROTACOVER_BUDGET must be a positive integer, got {v:?}")))?,
            Err(_) => self.budgets.enumeration_cap,
        };
        Ok(Lattice::from_columns(a, b)?.with_enumeration_cap(cap))
    }

    pub fn angle_set(&self) -> Result<AngleSet, CliError> {
        self.angles
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [angles] section".into()))?
            .to_angle_set()
    }

    pub fn region(&self) -> Result<PolarBox, CliError> {
        self.region
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [region] section".into()))?
            .to_box()
    }
}

impl MeasureConfig {
    /// The measure, together with the restriction construction when it was built from
    /// `[angles]`.
    pub fn to_measure(&self, angles: Option<&AngleSet>) -> Result<(CircleMeasure, Option<RestrictionMeasure>), CliError> {
        Ok(match self {
            MeasureConfig::UniformArc { start, length } => {
                (CircleMeasure::uniform_arc(CircleArc::new(*start, *length)?), None)
            }
            MeasureConfig::Bump { start, length } => (CircleMeasure::bump(CircleArc::new(*start, *length)?), None),
            MeasureConfig::Atomic { atoms } => {
                let pairs: Vec<(f64, f64)> = atoms.iter().map(|a| (a[0], a[1])).collect();
                (CircleMeasure::atomic(&pairs)?, None)
            }
            MeasureConfig::Restriction { delta_target } => {
                let arcs = match angles {
                    Some(AngleSet::Arc { arc }) => vec![*arc],
                    Some(AngleSet::ArcUnion { arcs }) => arcs.clone(),
                    _ => {
                        return Err(CliError::Config(
                            "restriction measure needs an arc-type [angles] section".into(),
                        ))
                    }
                };
                let r = build_restriction_measure(&arcs, *delta_target)?;
                (r.measure.clone(), Some(r))
            }
        })
    }
}
