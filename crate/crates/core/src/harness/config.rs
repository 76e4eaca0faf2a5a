//! Run configuration: one TOML file plus command-line overrides.
//!
//! Every table is optional; omitted values take the defaults below.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//!
//! [units]            # hbar, mass, omega
//! [flux]             # either flux_quanta = 2.3, or l0 = 2 and mu = 0.3
//! [tolerance]        # lattice = 1e-12, plus optional per-criterion overrides
//! [spectrum]         # m_max, l_min, l_max
//! [classical]        # r, rc, psi0, alpha_c, pz, z0, samples, periods
//! [coherent]         # j, z1 = [re, im], z2 = [re, im]
//! [evolve]           # samples, periods, pz, t_spread, grid_r, grid_phi, r_max
//! [sweep]            # j, abs_z1, abs_z2, mu, arg_z1, arg_z2 (lists)
//! ```

use crate::classical::{ClassicalOrbit, FluxConfig, Units};
use crate::coherent::CoherentParams;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Spectrum,
    Classical,
    Coherent,
    Evolve,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    #[serde(default)]
    pub flux_quanta: Option<f64>,
    #[serde(default)]
    pub l0: Option<i64>,
    #[serde(default)]
    pub mu: Option<f64>,
}

impl Default for FluxSpec {
    fn default() -> Self {
        FluxSpec {
            flux_quanta: Some(0.5),
            l0: None,
            mu: None,
        }
    }
}

impl FluxSpec {
    pub fn resolve(&self) -> Result<FluxConfig> {
        match (self.flux_quanta, self.l0, self.mu) {
            (Some(f), None, None) => FluxConfig::from_flux(f),
            (None, l0, Some(mu)) => FluxConfig::new(l0.unwrap_or(0), mu),
            (None, Some(_), None) => Err(Error::Config("[flux] l0 given without mu".into())),
            (None, None, None) => FluxConfig::from_flux(0.5),
            _ => Err(Error::Config(
                "[flux] takes either flux_quanta or l0/mu, not both".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    /// Relative tail-mass tolerance of coefficient lattices.
    pub lattice: f64,
    /// Per-criterion tolerance overrides for `verify`, keyed by criterion number.
    pub criteria: BTreeMap<String, f64>,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            lattice: 1e-12,
            criteria: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    pub m_max: u32,
    pub l_min: i64,
    pub l_max: i64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            m_max: 4,
            l_min: -4,
            l_max: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalParams {
    pub r: f64,
    pub rc: f64,
    pub psi0: f64,
    pub alpha_c: f64,
    pub pz: f64,
    pub z0: f64,
    pub samples: usize,
    pub periods: f64,
}

impl Default for ClassicalParams {
    fn default() -> Self {
        ClassicalParams {
            r: 2.0,
            rc: 1.0,
            psi0: 0.0,
            alpha_c: 0.0,
            pz: 0.0,
            z0: 0.0,
            samples: 128,
            periods: 1.0,
        }
    }
}

impl ClassicalParams {
    pub fn orbit(&self) -> Result<ClassicalOrbit> {
        let mut o = ClassicalOrbit::new(self.r, self.rc, self.psi0, self.alpha_c)?;
        o.pz = self.pz;
        o.z0 = self.z0;
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherentSpec {
    pub j: i64,
    pub z1: [f64; 2],
    pub z2: [f64; 2],
}

impl Default for CoherentSpec {
    fn default() -> Self {
        CoherentSpec {
            j: 1,
            z1: [3.0, 0.0],
            z2: [1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveParams {
    pub samples: usize,
    pub periods: f64,
    pub pz: f64,
    /// Time at which |Ψ|² is sampled for `spread.csv`.
    pub t_spread: f64,
    pub grid_r: usize,
    pub grid_phi: usize,
    /// Outer radius of the density grid; 0 picks one from the orbit.
    pub r_max: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        EvolveParams {
            samples: 64,
            periods: 1.0,
            pz: 0.0,
            t_spread: 0.0,
            grid_r: 60,
            grid_phi: 72,
            r_max: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub j: Vec<i64>,
    pub abs_z1: Vec<f64>,
    pub abs_z2: Vec<f64>,
    pub mu: Vec<f64>,
    pub arg_z1: f64,
    pub arg_z2: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            j: vec![0, 1],
            abs_z1: vec![1.0, 2.0, 3.0],
            abs_z2: vec![1.0, 2.0, 3.0],
            mu: vec![0.0, 0.3, 0.7],
            arg_z1: 0.0,
            arg_z2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub units: Units,
    pub flux: FluxSpec,
    pub tolerance: Tolerance,
    pub spectrum: SpectrumParams,
    pub classical: ClassicalParams,
    pub coherent: CoherentSpec,
    pub evolve: EvolveParams,
    pub sweep: SweepParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            output_dir: PathBuf::from("out"),
            units: Units::natural(),
            flux: FluxSpec::default(),
            tolerance: Tolerance::default(),
            spectrum: SpectrumParams::default(),
            classical: ClassicalParams::default(),
            coherent: CoherentSpec::default(),
            evolve: EvolveParams::default(),
            sweep: SweepParams::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(tol) = o.tol {
            self.tolerance.lattice = tol;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.units.validate()?;
        self.flux.resolve()?;
        let t = self.tolerance.lattice;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Config(format!(
                "tolerance.lattice = {t} must lie in (0, 1)"
            )));
        }
        for (k, v) in &self.tolerance.criteria {
            let ok = k
                .parse::<u32>()
                .map(|n| (1..=12).contains(&n))
                .unwrap_or(false);
            if !ok || !(*v > 0.0) {
                return Err(Error::Config(format!(
                    "tolerance.criteria.{k} = {v} is not valid"
                )));
            }
        }
        if self.spectrum.l_min > self.spectrum.l_max + 1 {
            return Err(Error::Config("spectrum.l_min exceeds l_max".into()));
        }
        self.classical.orbit()?;
        if self.classical.samples == 0 || !(self.classical.periods > 0.0) {
            return Err(Error::Config(
                "classical.samples and periods must be positive".into(),
            ));
        }
        self.coherent_params()?;
        let e = &self.evolve;
        if e.samples < 2
            || !(e.periods > 0.0)
            || e.grid_r == 0
            || e.grid_phi == 0
            || !(e.r_max >= 0.0)
        {
            return Err(Error::Config(
                "evolve needs samples >= 2, periods > 0, non-empty grid".into(),
            ));
        }
        let s = &self.sweep;
        if s.j.iter().any(|&j| j != 0 && j != 1) {
            return Err(Error::Config("sweep.j entries must be 0 or 1".into()));
        }
        if s.mu.iter().any(|m| !(0.0..1.0).contains(m)) {
            return Err(Error::Config("sweep.mu entries must lie in [0, 1)".into()));
        }
        if s.abs_z1
            .iter()
            .chain(&s.abs_z2)
            .any(|z| !(*z >= 0.0) || !z.is_finite())
        {
            return Err(Error::Config("sweep moduli must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn flux_config(&self) -> Result<FluxConfig> {
        self.flux.resolve()
    }

    pub fn coherent_params(&self) -> Result<CoherentParams> {
        let f = self.flux.resolve()?;
        let c = &self.coherent;
        CoherentParams::new(
            c.j,
            Complex64::new(c.z1[0], c.z1[1]),
            Complex64::new(c.z2[0], c.z2[1]),
            f.mu,
            f.l0,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, without the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
