//! Policy interface, scripted drills, the hierarchical team policy and the
//! string-keyed registry.

pub mod control;
pub mod drills;
pub mod external;
pub mod hierarchical;
pub mod scripted;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use drills::{skill_controller, DrillFamily, DrillInput, ParamSpec, PolicyParams, Side, Skill};
pub use hierarchical::{high_level_assign, Assignment, HierarchicalParams, HierarchicalPolicy, TeamLayout};
pub use scripted::{DuelPolicy, HoverPolicy, RandomPolicy, ScriptedDrill};

use crate::ball::{ContactEvent, Team};
use crate::dynamics::DroneParams;
use crate::error::{Error, Result};
use crate::tasks::{observation_dim, Action, TaskId, TaskSpec, World};

/// Everything a policy may look at on one step.
#[derive(Clone, Copy)]
pub struct PolicyContext<'a> {
    pub spec: &'a TaskSpec,
    pub drone: &'a DroneParams,
    pub world: &'a World,
    /// Observation of every drone in the task.
    pub obs: &'a [Vec<f64>],
    /// Contacts of the step that produced `world`.
    pub events: &'a [ContactEvent],
    /// Drones this policy commands, in action order.
    pub controlled: &'a [usize],
}

impl PolicyContext<'_> {
    pub fn team(&self) -> Option<Team> {
        self.controlled.first().map(|&d| self.spec.drones[d].team)
    }
}

pub trait Policy: Send {
    /// Called once per episode before the first `act`.
    fn reset(&mut self, ctx: &PolicyContext<'_>, rng: &mut dyn RngCore);
    /// One action per controlled drone.
    fn act(&mut self, ctx: &PolicyContext<'_>, rng: &mut dyn RngCore) -> Vec<Action>;
    fn name(&self) -> String;
}

/// Serializable policy identity; `build` turns it into a runnable policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum PolicySpec {
    Hover,
    Random,
    /// Per-task drill, or the competitive default for team tasks.
    Scripted,
    Hierarchical,
    Duel { params: Vec<f64> },
    External { path: PathBuf },
}

impl PolicySpec {
    pub fn duel(params: &PolicyParams) -> Self {
        PolicySpec::Duel { params: params.values.clone() }
    }

    pub fn build(&self, spec: &TaskSpec) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySpec::Hover => Box::new(HoverPolicy::default()),
            PolicySpec::Random => Box::new(RandomPolicy::default()),
            PolicySpec::Scripted => match spec.id {
                TaskId::OneVsOne => Box::new(DuelPolicy::new(PolicyParams::defaults(DrillFamily::Duel))),
                TaskId::ThreeVsThree | TaskId::SixVsSix => {
                    Box::new(HierarchicalPolicy::new(HierarchicalParams::default()))
                }
                _ => Box::new(ScriptedDrill::default()),
            },
            PolicySpec::Hierarchical => {
                TeamLayout::from_spec(spec, Team::Red)?;
                Box::new(HierarchicalPolicy::new(HierarchicalParams::default()))
            }
            PolicySpec::Duel { params } => {
                if !spec.id.is_competitive() {
                    return Err(Error::config(format!("the duel policy needs a competitive task, not {}", spec.id)));
                }
                Box::new(DuelPolicy::new(PolicyParams::new(DrillFamily::Duel, params.clone())?))
            }
            PolicySpec::External { path } => {
                let net = external::FeedForward::load(path)?;
                let want = observation_dim(spec);
                if net.input_width() != want {
                    return Err(Error::config(format!(
                        "{} expects {} inputs but {} observations have {want}",
                        path.display(),
                        net.input_width(),
                        spec.id
                    )));
                }
                Box::new(external::ExternalPolicy::new(net, self.to_string()))
            }
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Hover => f.write_str("hover"),
            PolicySpec::Random => f.write_str("random"),
            PolicySpec::Scripted => f.write_str("scripted"),
            PolicySpec::Hierarchical => f.write_str("hierarchical"),
            PolicySpec::Duel { params } => {
                let v: Vec<String> = params.iter().map(|x| format!("{x}")).collect();
                write!(f, "duel:{}", v.join(","))
            }
            PolicySpec::External { path } => write!(f, "ff:{}", path.display()),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    /// Ids: `hover`, `random`, `scripted`, `hierarchical`, `duel`,
    /// `duel:<v1>,<v2>,...` and `ff:<weights path>`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        Ok(match (head, arg) {
            ("hover", None) => PolicySpec::Hover,
            ("random", None) => PolicySpec::Random,
            ("scripted", None) => PolicySpec::Scripted,
            ("hierarchical", None) => PolicySpec::Hierarchical,
            ("duel", None) => PolicySpec::duel(&PolicyParams::defaults(DrillFamily::Duel)),
            ("duel", Some(a)) => {
                let params = a
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::config(format!("duel parameters `{a}`: {e}")))?;
                PolicyParams::new(DrillFamily::Duel, params.clone())?;
                PolicySpec::Duel { params }
            }
            ("ff", Some(p)) if !p.is_empty() => PolicySpec::External { path: PathBuf::from(p) },
            _ => return Err(Error::UnknownPolicy(s.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ["hover", "random", "scripted", "hierarchical", "ff:w.vbff"] {
            assert_eq!(id.parse::<PolicySpec>().unwrap().to_string(), id);
        }
        let duel: PolicySpec = "duel".parse().unwrap();
        assert_eq!(duel.to_string().parse::<PolicySpec>().unwrap(), duel);
    }

    #[test]
    fn unknown_ids_are_registry_errors() {
        for id in ["ppo", "hover:3", "ff:", ""] {
            assert!(matches!(id.parse::<PolicySpec>(), Err(Error::UnknownPolicy(_))), "{id}");
        }
        assert!("duel:1,2".parse::<PolicySpec>().unwrap_err().is_config());
    }

    #[test]
    fn incompatible_tasks_are_rejected() {
        let bump = TaskSpec::preset(TaskId::SoloBump);
        assert!(PolicySpec::Hierarchical.build(&bump).is_err());
        assert!(PolicySpec::duel(&PolicyParams::defaults(DrillFamily::Duel)).build(&bump).is_err());
        assert!(PolicySpec::Scripted.build(&bump).is_ok());
    }
}
