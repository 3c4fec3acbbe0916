//! Module-set roles, the rayon search front end and ranked-result output.

use std::sync::Arc;

use modforge_core::module_model::{ModuleSet, BASE_KIND, EEF_KIND};
use modforge_core::search::{evaluate_candidate, search_with, EnumerationSpec, RankKey, RankedResult, SearchOptions};
use modforge_core::Task;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoleError {
    #[error("no module with a \"{0}\" connector")]
    Missing(&'static str),
    #[error("several modules with a \"{kind}\" connector ({candidates}); choose one explicitly")]
    Ambiguous { kind: &'static str, candidates: String },
    #[error("module '{0}' is not in the set")]
    Unknown(String),
}

/// How the modules of a set take part in serial chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roles {
    pub base: String,
    pub eef: String,
    /// Modules with at least one movable joint.
    pub joints: Vec<String>,
    /// Static modules other than the base and end effector.
    pub links: Vec<String>,
}

fn pick(set: &ModuleSet, kind: &'static str, explicit: Option<&str>) -> Result<String, RoleError> {
    if let Some(id) = explicit {
        return set.get(id).map(|m| m.id.clone()).ok_or_else(|| RoleError::Unknown(id.into()));
    }
    let found: Vec<&str> = set.modules().filter(|m| m.has_connector_kind(kind)).map(|m| m.id.as_str()).collect();
    match found.as_slice() {
        [] => Err(RoleError::Missing(kind)),
        [one] => Ok((*one).to_string()),
        many => Err(RoleError::Ambiguous { kind, candidates: many.join(", ") }),
    }
}

impl Roles {
    /// Base and end effector are the unique modules carrying a base or eef
    /// connector unless named; the remaining modules split by dof.
    pub fn classify(set: &ModuleSet, base: Option<&str>, eef: Option<&str>) -> Result<Roles, RoleError> {
        let base = pick(set, BASE_KIND, base)?;
        let eef = pick(set, EEF_KIND, eef)?;
        let (joints, links): (Vec<_>, Vec<_>) = set.modules().filter(|m| m.id != base && m.id != eef).partition(|m| m.dof() > 0);
        Ok(Roles {
            base,
            eef,
            joints: joints.into_iter().map(|m| m.id.clone()).collect(),
            links: links.into_iter().map(|m| m.id.clone()).collect(),
        })
    }

    pub fn spec(&self, set: Arc<ModuleSet>, max_dof: usize, include_single_joint: bool) -> Result<EnumerationSpec, modforge_core::search::SearchError> {
        EnumerationSpec::new(set, self.joints.clone(), self.links.clone(), self.base.clone(), self.eef.clone(), max_dof, include_single_joint)
    }
}

/// Same results and order as the serial search; candidates of one module
/// count are evaluated on `jobs` threads (all cores when `None`).
pub fn parallel_search(
    spec: &EnumerationSpec,
    task: &Task,
    opts: &SearchOptions,
    jobs: Option<usize>,
) -> Result<Vec<RankedResult>, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    Ok(search_with(spec, opts, |keys: &[RankKey]| {
        pool.install(|| keys.par_iter().map(|&k| evaluate_candidate(spec, task, &opts.eval, k)).collect())
    }))
}

/// One line of `search` output.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultLine<'a> {
    /// 1-based position in the ranking.
    pub rank: usize,
    pub modules: &'a [String],
    pub module_count: usize,
    pub joint_count: usize,
    pub feasible: bool,
}

impl<'a> ResultLine<'a> {
    pub fn new(position: usize, r: &'a RankedResult) -> Self {
        ResultLine {
            rank: position + 1,
            modules: &r.modules,
            module_count: r.key.module_count,
            joint_count: r.key.joint_count,
            feasible: r.outcome.feasible,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}
