//! Run configuration: a sectioned TOML file, every key optional.

// `!(x >= a)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::Command;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ENTLAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "entlab-out";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub profile: ProfileSection,
    pub quadrature: QuadratureSection,
    pub solver: SolverSection,
    pub growth: GrowthSection,
    pub barycenter: BarycenterSection,
    pub bcg: BcgSection,
    pub natural_map: NaturalMapSection,
    pub shortcut: ShortcutSection,
    pub ghnet: GhnetSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Must match the command line when present.
    pub subcommand: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub dims: Vec<usize>,
    /// Defaults to the real hyperbolic entropies `n_i - 1`.
    pub entropies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Deterministic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub scheme: Scheme,
    pub count: usize,
    /// Monte Carlo seed; defaults to the run seed. Factor `i` uses `seed + i`.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthSection {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub step: f64,
    /// Allowed distance of a fitted slope from its target (plus `3 slope_err`
    /// for Monte Carlo estimates).
    pub slope_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarycenterSection {
    pub configurations: usize,
    pub max_atoms: usize,
    pub radius: f64,
    pub fixed_point_tol: f64,
    pub midpoint_tol: f64,
    pub trace_tol: f64,
    pub k_identity_tol: f64,
    pub saturation_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcgSection {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub equality_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaturalMapSection {
    pub draws: usize,
    /// `c = c_factor * h_min`.
    pub c_factor: f64,
    pub radius: f64,
    pub max_atoms: usize,
    /// Relative slack allowed over `c^2 / 4`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShortcutSection {
    /// Factor dimension `n` of `H^n x H^n`.
    pub n: usize,
    pub etas: Vec<f64>,
    pub spacing: f64,
    /// `R_max`, the side of the reduced grid.
    pub extent: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub rc_c: f64,
    pub rc_samples: usize,
    /// Parameters at which `r_c` is verified; defaults to the entries of
    /// `etas` in `[0.95, 1]`.
    pub rc_etas: Option<Vec<f64>>,
    /// Side of the `(eta, alpha)` witness grid.
    pub witness_grid: usize,
    pub witness_band: f64,
    /// Allowed `slope(1) - slope(0.99)`.
    pub near_one_tol: f64,
    pub spot_checks: usize,
    pub branching_eta: f64,
    pub branching_p: [f64; 2],
    pub branching_q: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Circle,
    Torus,
    Tree,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhnetSection {
    pub space: SpaceKind,
    /// Points on the circle, grid side of the torus, vertices of the tree.
    /// Defaults to 1000, 24 and 200.
    pub samples: Option<usize>,
    pub path: Option<PathBuf>,
    pub eps: f64,
    /// Defaults to `0.9` times the admissible bound.
    pub delta: Option<f64>,
    pub n_count: usize,
    /// Separation of the greedy net; defaults to `eps / 4`.
    pub net_radius: Option<f64>,
    /// Random planar spaces per size pair for the exhaustive GH comparison.
    pub brute_force_reps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub csv: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { subcommand: None, seed: 42 }
    }
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self { dims: vec![3, 3], entropies: None }
    }
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { scheme: Scheme::Deterministic, count: 1000, seed: None }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 100 }
    }
}

impl Default for GrowthSection {
    fn default() -> Self {
        Self { rho_lo: 8.0, rho_hi: 16.0, step: 0.05, slope_tol: 0.06 }
    }
}

impl Default for BarycenterSection {
    fn default() -> Self {
        Self {
            configurations: 50,
            max_atoms: 4,
            radius: 2.0,
            fixed_point_tol: 1e-5,
            midpoint_tol: 2e-4,
            trace_tol: 2e-3,
            k_identity_tol: 5e-3,
            saturation_tol: 0.02,
        }
    }
}

impl Default for BcgSection {
    fn default() -> Self {
        Self { dims: vec![3, 4, 5], trials: 10_000, equality_tol: 1e-9 }
    }
}

impl Default for NaturalMapSection {
    fn default() -> Self {
        Self { draws: 100, c_factor: 1.1, radius: 3.0, max_atoms: 6, slack: 0.05 }
    }
}

impl Default for ShortcutSection {
    fn default() -> Self {
        Self {
            n: 3,
            etas: vec![0.5, 0.8, 0.99, 1.0],
            spacing: 0.05,
            extent: 18.0,
            rho_lo: 6.0,
            rho_hi: 12.0,
            rc_c: 0.05,
            rc_samples: 400,
            rc_etas: None,
            witness_grid: 50,
            witness_band: 1e-3,
            near_one_tol: 0.10,
            spot_checks: 20,
            branching_eta: 0.5,
            branching_p: [4.0, 1.5],
            branching_q: [12.0, 1.5],
        }
    }
}

impl Default for GhnetSection {
    fn default() -> Self {
        Self {
            space: SpaceKind::Circle,
            samples: None,
            path: None,
            eps: 0.3,
            delta: None,
            n_count: 8,
            net_radius: None,
            brute_force_reps: 4,
        }
    }
}

/// A configuration problem, located by line when the source text is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self { field: Some(field.to_string()), line: None, message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self { field: None, line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: &str =
    "[run], [profile], [quadrature], [solver], [growth], [barycenter], [bcg], [natural_map], [shortcut], [ghnet], [output]";

impl RunConfig {
    /// Parses config text. An empty file is rejected so that a truncated or
    /// misnamed file is not silently replaced by the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let meaningful = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).any(|l| !l.is_empty());
        if !meaningful {
            return Err(ConfigError::general(format!(
                "config file is empty; expected TOML with one or more of the sections {SECTIONS}"
            )));
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            ConfigError { field: None, line, message: e.message().trim().to_string() }
        })?;
        cfg.validate().map_err(|mut err| {
            if let Some(field) = &err.field {
                err.line = locate(text, field);
            }
            err
        })?;
        Ok(cfg)
    }

    /// Checks every numeric field against the preconditions of the
    /// operations it feeds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |f: &str, m: String| Err(ConfigError::field(f, m));
        let p = &self.profile;
        if p.dims.is_empty() {
            return bad("profile.dims", "needs at least one factor".into());
        }
        if let Some(d) = p.dims.iter().find(|&&d| d < 2) {
            return bad("profile.dims", format!("factor dimension {d} is below 2"));
        }
        if let Some(h) = &p.entropies {
            if h.len() != p.dims.len() {
                return bad("profile.entropies", format!("{} entropies for {} factors", h.len(), p.dims.len()));
            }
            if let Some(x) = h.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return bad("profile.entropies", format!("entropy {x} is not positive"));
            }
        }
        if self.quadrature.count < 200 {
            return bad("quadrature.count", format!("{} nodes; at least 200 are needed", self.quadrature.count));
        }
        if !(self.solver.tol >= 1e-10 && self.solver.tol < 1.0) {
            return bad("solver.tol", format!("{} is outside [1e-10, 1)", self.solver.tol));
        }
        if self.solver.max_iter == 0 {
            return bad("solver.max_iter", "must be positive".into());
        }
        let g = &self.growth;
        if !(g.rho_lo >= 5.0) {
            return bad("growth.rho_lo", format!("{} is below 5", g.rho_lo));
        }
        if !(g.rho_hi > g.rho_lo && g.rho_hi.is_finite()) {
            return bad("growth.rho_hi", format!("{} must exceed rho_lo = {}", g.rho_hi, g.rho_lo));
        }
        if !(g.step > 0.0 && g.step <= 0.05) {
            return bad("growth.step", format!("{} is outside (0, 0.05]", g.step));
        }
        nonneg("growth.slope_tol", g.slope_tol)?;
        let b = &self.barycenter;
        if b.configurations == 0 || b.max_atoms == 0 {
            return bad("barycenter.configurations", "configurations and max_atoms must be positive".into());
        }
        positive("barycenter.radius", b.radius)?;
        for (f, v) in [
            ("barycenter.fixed_point_tol", b.fixed_point_tol),
            ("barycenter.midpoint_tol", b.midpoint_tol),
            ("barycenter.trace_tol", b.trace_tol),
            ("barycenter.k_identity_tol", b.k_identity_tol),
            ("barycenter.saturation_tol", b.saturation_tol),
        ] {
            nonneg(f, v)?;
        }
        if let Some(n) = self.bcg.dims.iter().find(|&&n| n < 2) {
            return bad("bcg.dims", format!("dimension {n} is below 2"));
        }
        nonneg("bcg.equality_tol", self.bcg.equality_tol)?;
        let nm = &self.natural_map;
        if nm.max_atoms < 2 {
            return bad("natural_map.max_atoms", "the natural map needs at least two points".into());
        }
        positive("natural_map.c_factor", nm.c_factor)?;
        positive("natural_map.radius", nm.radius)?;
        nonneg("natural_map.slack", nm.slack)?;
        self.validate_shortcut()?;
        self.validate_ghnet()
    }

    fn validate_shortcut(&self) -> Result<(), ConfigError> {
        let s = &self.shortcut;
        let bad = |f: &str, m: String| Err(ConfigError::field(f, m));
        if s.n < 2 {
            return bad("shortcut.n", format!("{} is below 2", s.n));
        }
        if s.etas.is_empty() {
            return bad("shortcut.etas", "needs at least one value".into());
        }
        for (k, e) in s.etas.iter().enumerate() {
            if !(*e > 0.0 && *e <= 1.0) {
                return bad("shortcut.etas", format!("entry {k} = {e} is outside (0, 1]"));
            }
        }
        if let Some(rc) = &s.rc_etas {
            if let Some(e) = rc.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
                return bad("shortcut.rc_etas", format!("{e} is outside (0, 1]"));
            }
        }
        positive("shortcut.spacing", s.spacing)?;
        if !(s.extent >= 4.0 * s.spacing) {
            return bad("shortcut.extent", format!("{} is too small for spacing {}", s.extent, s.spacing));
        }
        if !(s.rho_lo > 0.0) {
            return bad("shortcut.rho_lo", format!("{} must be positive", s.rho_lo));
        }
        if !(s.rho_hi > s.rho_lo && s.rho_hi < s.extent) {
            return bad(
                "shortcut.rho_hi",
                format!("{} must lie in (rho_lo, extent) = ({}, {})", s.rho_hi, s.rho_lo, s.extent),
            );
        }
        nonneg("shortcut.rc_c", s.rc_c)?;
        if s.rc_c > std::f64::consts::FRAC_PI_4 {
            return bad("shortcut.rc_c", format!("{} exceeds pi/4", s.rc_c));
        }
        if s.witness_grid < 2 {
            return bad("shortcut.witness_grid", "needs at least 2 points per side".into());
        }
        nonneg("shortcut.witness_band", s.witness_band)?;
        nonneg("shortcut.near_one_tol", s.near_one_tol)?;
        if !(s.branching_eta > 0.0 && s.branching_eta <= 1.0) {
            return bad("shortcut.branching_eta", format!("{} is outside (0, 1]", s.branching_eta));
        }
        for (f, pt) in [("shortcut.branching_p", s.branching_p), ("shortcut.branching_q", s.branching_q)] {
            if pt.iter().any(|c| !(*c >= 0.0 && *c <= s.extent)) {
                return bad(f, format!("{pt:?} lies outside [0, {}]^2", s.extent));
            }
        }
        Ok(())
    }

    fn validate_ghnet(&self) -> Result<(), ConfigError> {
        let g = &self.ghnet;
        positive("ghnet.eps", g.eps)?;
        if let Some(d) = g.delta {
            positive("ghnet.delta", d)?;
        }
        if let Some(r) = g.net_radius {
            positive("ghnet.net_radius", r)?;
        }
        if g.n_count == 0 {
            return Err(ConfigError::field("ghnet.n_count", "must be positive"));
        }
        match g.space {
            SpaceKind::Csv if g.path.is_none() => Err(ConfigError::field("ghnet.path", "space = \"csv\" needs a path")),
            SpaceKind::Csv => Ok(()),
            _ if g.samples.is_some_and(|n| n < 2) => {
                Err(ConfigError::field("ghnet.samples", "needs at least 2 points"))
            }
            _ => Ok(()),
        }
    }

    /// Checks the optional `[run] subcommand` against the command line and
    /// records the command that actually runs.
    pub fn resolve_subcommand(&mut self, cmd: Command) -> Result<(), ConfigError> {
        match &self.run.subcommand {
            Some(s) if s != cmd.name() => Err(ConfigError::field(
                "run.subcommand",
                format!("config is for `{s}` but the command line asks for `{}`", cmd.name()),
            )),
            _ => {
                self.run.subcommand = Some(cmd.name().to_string());
                Ok(())
            }
        }
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.profile.entropies.clone().unwrap_or_else(|| self.profile.dims.iter().map(|&n| n as f64 - 1.0).collect())
    }

    pub fn quadrature_seed(&self) -> u64 {
        self.quadrature.seed.unwrap_or(self.run.seed)
    }

    pub fn ghnet_samples(&self) -> usize {
        self.ghnet.samples.unwrap_or(match self.ghnet.space {
            SpaceKind::Circle | SpaceKind::Csv => 1000,
            SpaceKind::Torus => 24,
            SpaceKind::Tree => 200,
        })
    }

    pub fn rc_etas(&self) -> Vec<f64> {
        self.shortcut
            .rc_etas
            .clone()
            .unwrap_or_else(|| self.shortcut.etas.iter().copied().filter(|e| *e >= 0.95).collect())
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("{v} must be positive")))
    }
}

fn nonneg(field: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("{v} must be nonnegative")))
    }
}

/// Line of `key` inside `[section]`, if the file sets it explicitly.
fn locate(text: &str, field: &str) -> Option<usize> {
    let (section, key) = field.split_once('.')?;
    let mut current = "";
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
        } else if current == section {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == key {
                    return Some(k + 1);
                }
            }
        }
    }
    None
}
