use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use jamsim::adversaries::{
    gen_below2, gen_div43, gen_mid24, gen_twosizes, lb2_strategy, lbphi_strategy, GeneratedScenario, Lb2Params,
    LbPhiParams, Lb2Strategy, LbPhiStrategy,
};
use jamsim::model::read_instance;
use jamsim::offline::OfflineSchedule;
use jamsim::{FaultSequence, GoldenNumber, Instance};

use crate::parse_g;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Below2,
    Mid24,
    Div43,
    Twosizes,
    Lb2,
    Lbphi,
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Scenario parameters; unset ones take the scenario's default.
#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioParams {
    /// below2 1/100, twosizes 1/2, lb2 1/100, lbphi 1/10.
    #[arg(long, value_parser = parse_g)]
    pub eps: Option<GoldenNumber>,
    /// Phase count: 50, or 100 for twosizes.
    #[arg(long)]
    pub n: Option<usize>,
    /// mid24 block length, default 1000.
    #[arg(long, value_parser = parse_g)]
    pub y: Option<GoldenNumber>,
    /// div43 100, twosizes 10, lb2 5.
    #[arg(long, value_parser = parse_g)]
    pub l: Option<GoldenNumber>,
    /// Additive constant of the adaptive adversaries: lb2 3, lbphi 1.
    #[arg(long, value_parser = parse_g)]
    pub a: Option<GoldenNumber>,
    /// lbphi size count; smallest valid one when unset.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    #[arg(long, value_enum, conflicts_with = "instance", required_unless_present = "instance")]
    pub scenario: Option<ScenarioName>,
    /// Instance file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub params: ScenarioParams,
}

fn or(x: &Option<GoldenNumber>, default: &str) -> GoldenNumber {
    x.clone().unwrap_or_else(|| parse_g(default).expect("default literal"))
}

impl ScenarioParams {
    pub fn generate(&self, name: ScenarioName, s: &GoldenNumber) -> Result<GeneratedScenario> {
        let sc = match name {
            ScenarioName::Below2 => gen_below2(s, &or(&self.eps, "1/100"), self.n.unwrap_or(50)),
            ScenarioName::Mid24 => gen_mid24(s, &or(&self.y, "1000"), self.n.unwrap_or(50)),
            ScenarioName::Div43 => gen_div43(s, &or(&self.l, "100"), self.n.unwrap_or(50)),
            ScenarioName::Twosizes => {
                gen_twosizes(s, &or(&self.eps, "1/2"), &or(&self.l, "10"), self.n.unwrap_or(100))
            }
            ScenarioName::Lb2 | ScenarioName::Lbphi => {
                bail!("{name} is an adaptive adversary; its faults depend on the policy and are not serializable; use `lowerbound`")
            }
        };
        sc.with_context(|| format!("building {name} at speed {s}"))
    }

    pub fn lb2(&self, s: &GoldenNumber) -> Result<Lb2Strategy> {
        let mut p = Lb2Params::new(or(&self.l, "5"), or(&self.a, "3"), s.clone());
        if let Some(e) = &self.eps {
            p.eps = e.clone();
        }
        lb2_strategy(p).context("building lb2")
    }

    pub fn lbphi(&self, s: &GoldenNumber) -> Result<LbPhiStrategy> {
        let p = LbPhiParams { s: s.clone(), eps: or(&self.eps, "1/10"), k: self.k, a: or(&self.a, "1") };
        lbphi_strategy(p).context("building lbphi")
    }
}

/// A fixed instance with its faults, and the adversary's schedule when the
/// source declares one.
pub struct Loaded {
    pub name: String,
    pub instance: Instance,
    pub faults: FaultSequence,
    pub declared: Option<OfflineSchedule>,
}

impl ScenarioArgs {
    pub fn load(&self, s: &GoldenNumber) -> Result<Loaded> {
        if let Some(path) = &self.instance {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let (instance, faults) =
                read_instance(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
            return Ok(Loaded { name: path.display().to_string(), instance, faults, declared: None });
        }
        let name = self.scenario.expect("clap requires a scenario or an instance");
        let sc = self.params.generate(name, s)?;
        Ok(Loaded {
            name: sc.name.to_string(),
            instance: sc.instance,
            faults: sc.faults,
            declared: Some(sc.declared_adv_schedule),
        })
    }
}
