//! JSON scan configuration and up-front validation.
//!
//! Lengths on the wire are in units of `d_U` and momenta in units of `q_0`
//! (`k0`) or `1/d_U` (`k`). A `units` block switches every length except the
//! confinement's own parameters to the confinement's length unit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wirescatter::confinement::build_modes;
use wirescatter::{ConfinementModel, HardWallVariant, ModeSet, RadialPotential};

use crate::CliError;

pub const DEFAULT_MODES: usize = 8;
pub const MAX_L: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConfinementSpec {
    Parabolic {
        a_perp: f64,
    },
    HardWall {
        radius: f64,
        #[serde(default)]
        variant: WallVariant,
    },
    Tabulated {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallVariant {
    #[default]
    Cosine,
    ExactRoots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `depth < 0` is attractive.
    SquareWell { depth: f64, radius: f64 },
    HardSphere { radius: f64 },
    Sech2 { depth: f64, width: f64 },
    Tabulated { path: PathBuf },
}

/// Direct low-energy coefficients `A_0 = a`, `A_1 = V_p`, `A_2`, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowEnergySpec {
    pub a: f64,
    #[serde(default)]
    pub v_p: f64,
    #[serde(default)]
    pub higher: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Ground-channel momentum in units of `q_0`.
    K0,
    /// Relative momentum in units of `1/d_U`.
    K,
    /// Scattering length in units of `d_U`.
    #[serde(alias = "s")]
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values {
        values: Vec<f64>,
    },
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Values { values } => values.clone(),
            GridSpec::Range { start, stop, count, spacing } => {
                let n = *count;
                if n == 1 {
                    return vec![*start];
                }
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            return *start;
                        }
                        if i == n - 1 {
                            return *stop;
                        }
                        let t = i as f64 / (n - 1) as f64;
                        match spacing {
                            Spacing::Linear => start + t * (stop - start),
                            Spacing::Log => (start.ln() + t * (stop.ln() - start.ln())).exp(),
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    #[serde(flatten)]
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorSpec {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub sector: SectorSpec,
    /// `[Re, Im]` of the starting `k0`, in units of `q_0`.
    #[serde(default)]
    pub seed: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSpec {
    pub length_unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub confinement: ConfinementSpec,
    /// Highest transverse mode index kept.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub low_energy: Option<LowEnergySpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub l_max: Option<usize>,
    /// Fixed `k0/q_0` for scattering-length sweeps of `amplitudes`.
    #[serde(default)]
    pub k0: Option<f64>,
    #[serde(default)]
    pub pole: Option<PoleSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub units: Option<UnitSpec>,
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

/// A configuration whose physics has been checked, with every length
/// converted to units of `d_U` and the confinement rescaled to `d_U = 1`.
#[derive(Debug, Clone)]
pub struct Validated {
    pub config: ScanConfig,
    pub modes: ModeSet,
    /// `d_U` in the confinement's own length unit.
    pub d_u_native: f64,
    pub potential: Option<RadialPotential>,
    /// `[A_0, A_1, ...]` in units of `d_U^{2l+1}`.
    pub low_energy: Option<Vec<f64>>,
    /// Sweep values in wire units.
    pub grid: Vec<f64>,
    pub warnings: Vec<String>,
    /// Grid values that sit on a transverse threshold.
    pub skipped: Vec<f64>,
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn positive(errors: &mut Vec<String>, what: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errors.push(format!("{what} must be positive and finite, got {v}"));
    }
}

fn build_confinement(spec: &ConfinementSpec, base: Option<&Path>) -> wirescatter::Result<ConfinementModel<f64>> {
    match spec {
        ConfinementSpec::Parabolic { a_perp } => ConfinementModel::parabolic(*a_perp),
        ConfinementSpec::HardWall { radius, variant } => {
            let v = match variant {
                WallVariant::Cosine => HardWallVariant::Cosine,
                WallVariant::ExactRoots => HardWallVariant::ExactRoots,
            };
            ConfinementModel::hard_wall(*radius, v)
        }
        ConfinementSpec::Tabulated { path } => ConfinementModel::tabulated_from_csv(&resolve(base, path)),
    }
}

/// `scale` converts a wire length to units of `d_U`.
fn build_potential(spec: &PotentialSpec, scale: f64, base: Option<&Path>) -> wirescatter::Result<RadialPotential> {
    let s2 = scale * scale;
    match spec {
        PotentialSpec::SquareWell { depth, radius } => RadialPotential::square_well(depth / s2, radius * scale),
        PotentialSpec::HardSphere { radius } => RadialPotential::hard_sphere(radius * scale),
        PotentialSpec::Sech2 { depth, width } => RadialPotential::sech2(depth / s2, width * scale),
        PotentialSpec::Tabulated { path } => {
            let raw = RadialPotential::tabulated_from_csv(&resolve(base, path))?;
            match raw {
                RadialPotential::Tabulated { profile } => {
                    let (r, v) = profile.samples();
                    RadialPotential::tabulated(r.iter().map(|x| x * scale).collect(), v.iter().map(|x| x / s2).collect())
                }
                other => Ok(other),
            }
        }
    }
}

/// Parses and checks a configuration. Relative table paths resolve against
/// `base`. All problems are collected before returning.
pub fn validate(text: &str, base: Option<&Path>) -> Result<Validated, CliError> {
    let config: ScanConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("cannot parse configuration: {e}")]))?;
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    match &config.confinement {
        ConfinementSpec::Parabolic { a_perp } => positive(&mut errors, "a_perp", *a_perp),
        ConfinementSpec::HardWall { radius, .. } => positive(&mut errors, "wall radius", *radius),
        ConfinementSpec::Tabulated { .. } => {}
    }
    if config.modes < 2 {
        errors.push(format!("modes must be at least 2, got {}", config.modes));
    }
    if let Some(l) = config.l_max {
        if l > MAX_L {
            errors.push(format!("l_max = {l} exceeds the supported maximum {MAX_L}"));
        }
    }
    let grid = config.sweep.as_ref().map(|s| s.grid.points()).unwrap_or_default();
    if let Some(sweep) = &config.sweep {
        if let GridSpec::Range { start, stop, spacing: Spacing::Log, .. } = &sweep.grid {
            if !(*start > 0.0 && *stop > 0.0) {
                errors.push("log-spaced grids need positive endpoints".into());
            }
        }
        if grid.is_empty() {
            errors.push("sweep grid is empty".into());
        } else if grid.iter().any(|v| !v.is_finite()) {
            errors.push("sweep grid has non-finite values".into());
        } else if grid.len() > 1 {
            let up = grid[1] > grid[0];
            if grid.windows(2).any(|w| if up { !(w[1] > w[0]) } else { !(w[1] < w[0]) }) {
                errors.push("sweep grid must be strictly monotone".into());
            }
        }
        match sweep.variable {
            SweepVariable::K0 | SweepVariable::K if grid.iter().any(|&v| v <= 0.0) => {
                errors.push("momentum grids must be positive".into());
            }
            SweepVariable::A if grid.contains(&0.0) => {
                errors.push("scattering-length grid must not contain 0".into());
            }
            _ => {}
        }
    }
    if let Some(k0) = config.k0 {
        positive(&mut errors, "k0", k0);
    }
    if let Some(PoleSpec { seed: Some([_, im]), .. }) = &config.pole {
        if !(*im > 0.0) {
            errors.push("pole seed must lie in the upper half plane".into());
        }
    }

    let native = match build_confinement(&config.confinement, base) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(format!("confinement: {e}"));
            None
        }
    };
    let mut modes = None;
    let mut d_u_native = f64::NAN;
    if let (Some(model), true) = (&native, config.modes >= 2) {
        match build_modes(model, config.modes)
            .and_then(|m| {
                d_u_native = m.d_u;
                model.rescaled(1.0 / m.d_u)
            })
            .and_then(|scaled| build_modes(&scaled, config.modes))
        {
            Ok(m) => modes = Some(m),
            Err(e) => errors.push(format!("transverse modes: {e}")),
        }
    }
    let scale = if config.units.is_some() { 1.0 / d_u_native } else { 1.0 };

    let potential = match &config.potential {
        Some(spec) => match build_potential(spec, scale, base) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(format!("potential: {e}"));
                None
            }
        },
        None => None,
    };
    let low_energy = config.low_energy.as_ref().map(|le| {
        let mut c = vec![le.a * scale, le.v_p * scale.powi(3)];
        c.extend(le.higher.iter().enumerate().map(|(i, v)| v * scale.powi(2 * (i as i32 + 2) + 1)));
        c
    });
    let grid: Vec<f64> = match config.sweep.as_ref().map(|s| s.variable) {
        Some(SweepVariable::A) => grid.iter().map(|v| v * scale).collect(),
        Some(SweepVariable::K) => grid.iter().map(|v| v / scale).collect(),
        _ => grid,
    };

    let mut skipped = Vec::new();
    if let Some(m) = &modes {
        if let Some(p) = &potential {
            if p.range() > m.r_u / 10.0 {
                warnings.push(format!(
                    "short-range assumption violated: R_V = {:.4} d_U exceeds R_U/10 = {:.4} d_U",
                    p.range(),
                    m.r_u / 10.0
                ));
            }
        }
        if let Some(SweepVariable::K0) = config.sweep.as_ref().map(|s| s.variable) {
            let q0 = m.q0();
            for &v in &grid {
                let k0 = v * q0;
                let k = (m.eps[0] + k0 * k0).sqrt();
                if m.q.iter().skip(1).any(|&qn| (k - qn).abs() <= 1e-9 * q0) {
                    skipped.push(v);
                }
            }
        }
        if let Some(SweepVariable::K0) = config.sweep.as_ref().map(|s| s.variable) {
            let top = m.q[m.q.len() - 1];
            if let Some(&v) = grid.iter().find(|&&v| (m.eps[0] + (v * m.q0()).powi(2)).sqrt() >= top) {
                errors.push(format!("k0/q0 = {v} opens every kept mode; raise `modes`"));
            }
        }
    }
    if !skipped.is_empty() {
        warnings.push(format!("{} grid point(s) sit on a transverse threshold and are skipped", skipped.len()));
    }

    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    Ok(Validated {
        config,
        modes: modes.expect("modes built when no errors"),
        d_u_native,
        potential,
        low_energy,
        grid,
        warnings,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "confinement": {"kind": "parabolic", "a_perp": 1.0},
            "low_energy": {"a": 0.2},
            "sweep": {"variable": "k0", "start": 0.01, "stop": 0.5, "count": 5}
        })
    }

    #[test]
    fn accepts_minimal_config() {
        let v = validate(&base().to_string(), None).unwrap();
        assert_eq!(v.grid.len(), 5);
        assert!(v.warnings.is_empty());
        assert_eq!(v.low_energy.unwrap()[0], 0.2);
    }

    #[test]
    fn collects_several_errors() {
        let mut c = base();
        c["sweep"] = serde_json::json!({"variable": "k0", "values": [0.3, 0.2, 0.2]});
        c["l_max"] = serde_json::json!(100);
        c["modes"] = serde_json::json!(1);
        let CliError::Config(errs) = validate(&c.to_string(), None).unwrap_err() else { panic!() };
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn empty_grid_is_an_error() {
        let mut c = base();
        c["sweep"] = serde_json::json!({"variable": "a", "values": []});
        let CliError::Config(errs) = validate(&c.to_string(), None).unwrap_err() else { panic!() };
        assert!(errs.iter().any(|e| e.contains("empty")));
    }

    #[test]
    fn wide_potential_warns() {
        let mut c = base();
        c["potential"] = serde_json::json!({"kind": "square_well", "depth": -10.0, "radius": 0.5});
        let v = validate(&c.to_string(), None).unwrap();
        assert!(v.warnings.iter().any(|w| w.contains("short-range assumption violated")));
    }

    #[test]
    fn threshold_points_are_listed() {
        let mut c = base();
        // k = q_1 exactly: k0² = q_1² − q_0² = 4 for a_perp = 1, so k0/q0 = √2
        c["sweep"] = serde_json::json!({"variable": "k0", "values": [0.5, std::f64::consts::SQRT_2, 1.6]});
        let v = validate(&c.to_string(), None).unwrap();
        assert_eq!(v.skipped, vec![std::f64::consts::SQRT_2]);
    }

    #[test]
    fn unit_block_converts_lengths() {
        let mut c = base();
        c["confinement"] = serde_json::json!({"kind": "parabolic", "a_perp": 100.0});
        c["units"] = serde_json::json!({"length_unit": "nm"});
        c["low_energy"] = serde_json::json!({"a": 20.0});
        let v = validate(&c.to_string(), None).unwrap();
        assert!((v.low_energy.unwrap()[0] - 0.2).abs() < 1e-12);
        assert!((v.modes.d_u - 1.0).abs() < 1e-12);
        assert_eq!(v.d_u_native, 100.0);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = GridSpec::Range { start: 0.1, stop: 100.0, count: 4, spacing: Spacing::Log }.points();
        assert_eq!(g[0], 0.1);
        assert_eq!(g[3], 100.0);
        assert!((g[1] - 1.0).abs() < 1e-12);
    }
}
