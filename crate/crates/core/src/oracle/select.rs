use std::str::FromStr;
use std::time::Duration;

use super::{
    Delay, ExhaustiveOracle, ExternalConfig, ExternalOracle, LatencyOracle, LinearOracle, Oracle, OracleAnswer,
    OracleQuery,
};
use crate::error::{Error, OracleError, Result};
use crate::models::Model;
use crate::problem::ExplanationProblem;

/// How to pick an oracle: `auto`, `exhaustive`, `linear` or
/// `external:<command>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleSpec {
    Auto,
    Exhaustive,
    Linear,
    External(String),
}

impl FromStr for OracleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(OracleSpec::Auto),
            "exhaustive" => Ok(OracleSpec::Exhaustive),
            "linear" => Ok(OracleSpec::Linear),
            _ => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(OracleSpec::External(cmd.to_owned())),
                _ => Err(Error::Usage(format!(
                    "unknown oracle {s:?}; expected auto, exhaustive, linear or external:<command>"
                ))),
            },
        }
    }
}

/// One of the built-in oracles, chosen at run time.
#[derive(Clone)]
pub enum Backend {
    Exhaustive(ExhaustiveOracle),
    Linear(LinearOracle),
    External(ExternalOracle),
    Delayed(Box<LatencyOracle<Backend>>),
}

impl Backend {
    pub fn open(spec: &OracleSpec, problem: &ExplanationProblem, timeout: Option<Duration>) -> Result<Self> {
        let p = problem.clone();
        Ok(match spec {
            OracleSpec::Exhaustive => Backend::Exhaustive(ExhaustiveOracle::new(p)),
            OracleSpec::Linear => Backend::Linear(LinearOracle::new(p)?),
            OracleSpec::External(cmd) => {
                let mut config = ExternalConfig::from_command_line(cmd)?;
                config.timeout = timeout;
                Backend::External(ExternalOracle::spawn(&config, p)?)
            }
            OracleSpec::Auto => match problem.model() {
                Model::Linear(_) => Backend::Linear(LinearOracle::new(p)?),
                _ if problem.space().all_finite() => Backend::Exhaustive(ExhaustiveOracle::new(p)),
                other => {
                    return Err(Error::Usage(format!(
                        "no built-in oracle for a {} model over continuous domains; pass --oracle external:<command>",
                        other.kind()
                    )))
                }
            },
        })
    }

    pub fn delayed(self, delay: Duration) -> Self {
        if delay.is_zero() {
            return self;
        }
        Backend::Delayed(Box::new(LatencyOracle::new(self, Delay::Fixed(delay))))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exhaustive(_) => "exhaustive",
            Backend::Linear(_) => "linear",
            Backend::External(_) => "external",
            Backend::Delayed(inner) => inner.inner().name(),
        }
    }
}

impl Oracle for Backend {
    fn problem(&self) -> &ExplanationProblem {
        match self {
            Backend::Exhaustive(o) => o.problem(),
            Backend::Linear(o) => o.problem(),
            Backend::External(o) => o.problem(),
            Backend::Delayed(o) => o.problem(),
        }
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        match self {
            Backend::Exhaustive(o) => o.find_adv_ex(query),
            Backend::Linear(o) => o.find_adv_ex(query),
            Backend::External(o) => o.find_adv_ex(query),
            Backend::Delayed(o) => o.find_adv_ex(query),
        }
    }
}
