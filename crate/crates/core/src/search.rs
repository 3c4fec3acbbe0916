//! Serial assembly enumeration, the closed-form count and brute-force search.
//!
//! Chains follow `base J ((L | ε) J)* eef`. Candidates are grouped into
//! strata by joint-module count `k`; inside a stratum the choices
//! `j1, l1, j2, …, jk` form a mixed-radix number with `j1` most significant
//! and `ε` ordered before every link. The raw enumeration index is the
//! stratum offset plus that number.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use thiserror::Error;

use crate::assembly::{Assembly, AssemblyError};
use crate::module_model::ModuleSet;
use crate::task::{evaluate_assembly, EvalOptions, EvaluationOutcome, Task};

/// `Σ_{n=1}^{dof-1} nJ · ((nL + 1) · nJ)^n`, exactly.
pub fn count_assemblies(n_joints: u64, n_links: u64, dof: u64) -> BigUint {
    let j = BigUint::from(n_joints);
    let step = BigUint::from(n_links + 1) * &j;
    let mut power = step.clone();
    let mut total = BigUint::from(0u32);
    for _ in 1..dof {
        total += &j * &power;
        power *= &step;
    }
    total
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("unknown module '{0}'")]
    UnknownModule(String),
    #[error("no joint modules given")]
    NoJoints,
    #[error("module '{0}' is listed more than once")]
    Overlap(String),
    #[error("joint module '{0}' has no degree of freedom")]
    StaticJoint(String),
    #[error("link module '{0}' has movable joints")]
    MovableLink(String),
    #[error("max dof must be at least 1")]
    ZeroDof,
    #[error("enumeration index space exceeds 2^64")]
    TooLarge,
    #[error("count formula assumes single-dof joint modules; '{0}' has {1}")]
    MultiDofJoint(String, usize),
}

#[derive(Debug, Clone)]
pub struct EnumerationSpec {
    set: Arc<ModuleSet>,
    joints: Vec<String>,
    links: Vec<String>,
    base: String,
    eef: String,
    max_dof: usize,
    include_single_joint: bool,
    /// Per joint module, its dof.
    joint_dof: Vec<usize>,
    /// Joint-module counts `k` with their raw index offset and size.
    strata: Vec<(usize, u64, u64)>,
}

impl EnumerationSpec {
    /// `joints` and `links` are sorted; link choices are `[ε, links…]`.
    pub fn new(
        set: Arc<ModuleSet>,
        joints: impl IntoIterator<Item = String>,
        links: impl IntoIterator<Item = String>,
        base: impl Into<String>,
        eef: impl Into<String>,
        max_dof: usize,
        include_single_joint: bool,
    ) -> Result<Self, SearchError> {
        let joints: Vec<String> = joints.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let links: Vec<String> = links.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let (base, eef) = (base.into(), eef.into());
        if joints.is_empty() {
            return Err(SearchError::NoJoints);
        }
        if max_dof == 0 {
            return Err(SearchError::ZeroDof);
        }
        let mut seen = BTreeSet::new();
        for id in joints.iter().chain(&links).chain([&base, &eef]) {
            if set.get(id).is_none() {
                return Err(SearchError::UnknownModule(id.clone()));
            }
            if !seen.insert(id.as_str()) {
                return Err(SearchError::Overlap(id.clone()));
            }
        }
        let joint_dof: Vec<usize> = joints.iter().map(|j| set.get(j).expect("checked").dof()).collect();
        if let Some(i) = joint_dof.iter().position(|&d| d == 0) {
            return Err(SearchError::StaticJoint(joints[i].clone()));
        }
        if let Some(l) = links.iter().find(|l| set.get(l).expect("checked").dof() > 0) {
            return Err(SearchError::MovableLink(l.clone()));
        }
        let min_k = if include_single_joint { 1 } else { 2 };
        let (nj, nl) = (joints.len() as u64, links.len() as u64 + 1);
        let mut strata = Vec::new();
        let mut offset = 0u64;
        for k in min_k..=max_dof {
            let mut size = 1u64;
            for _ in 0..k {
                size = size.checked_mul(nj).ok_or(SearchError::TooLarge)?;
            }
            for _ in 1..k {
                size = size.checked_mul(nl).ok_or(SearchError::TooLarge)?;
            }
            strata.push((k, offset, size));
            offset = offset.checked_add(size).ok_or(SearchError::TooLarge)?;
        }
        Ok(EnumerationSpec { set, joints, links, base, eef, max_dof, include_single_joint, joint_dof, strata })
    }

    pub fn set(&self) -> &Arc<ModuleSet> {
        &self.set
    }

    pub fn joints(&self) -> &[String] {
        &self.joints
    }

    pub fn links(&self) -> &[String] {
        &self.links
    }

    pub fn max_dof(&self) -> usize {
        self.max_dof
    }

    pub fn include_single_joint(&self) -> bool {
        self.include_single_joint
    }

    /// Number of raw indices; equals the stream length when every joint module has one dof.
    pub fn index_space(&self) -> u64 {
        self.strata.last().map_or(0, |&(_, o, s)| o + s)
    }

    /// Closed-form count for this spec.
    pub fn count(&self) -> Result<BigUint, SearchError> {
        if let Some(i) = self.joint_dof.iter().position(|&d| d != 1) {
            return Err(SearchError::MultiDofJoint(self.joints[i].clone(), self.joint_dof[i]));
        }
        let single = if self.include_single_joint { BigUint::from(self.joints.len()) } else { BigUint::from(0u32) };
        Ok(count_assemblies(self.joints.len() as u64, self.links.len() as u64, self.max_dof as u64) + single)
    }

    /// Joint and link choices at a raw index as positions into `joints` and
    /// `[ε, links…]`, or `None` past the end or above the dof cap.
    fn digits(&self, index: u64) -> Option<(Vec<usize>, Vec<usize>)> {
        let &(k, offset, _) = self.strata.iter().find(|&&(_, o, s)| index >= o && index - o < s)?;
        let (nj, nl) = (self.joints.len() as u64, self.links.len() as u64 + 1);
        let mut rest = index - offset;
        let mut js = vec![0; k];
        let mut ls = vec![0; k - 1];
        // Least significant digit is the last joint.
        for pos in (0..k).rev() {
            js[pos] = (rest % nj) as usize;
            rest /= nj;
            if pos > 0 {
                ls[pos - 1] = (rest % nl) as usize;
                rest /= nl;
            }
        }
        let dof: usize = js.iter().map(|&j| self.joint_dof[j]).sum();
        (dof <= self.max_dof).then_some((js, ls))
    }

    /// Module ids of the chain at a raw index.
    pub fn decode(&self, index: u64) -> Option<Vec<String>> {
        let (js, ls) = self.digits(index)?;
        let mut ids = Vec::with_capacity(2 * js.len() + 1);
        ids.push(self.base.clone());
        for (pos, &j) in js.iter().enumerate() {
            if pos > 0 && ls[pos - 1] > 0 {
                ids.push(self.links[ls[pos - 1] - 1].clone());
            }
            ids.push(self.joints[j].clone());
        }
        ids.push(self.eef.clone());
        Some(ids)
    }

    /// Rank key without building the chain.
    pub fn rank_key(&self, index: u64) -> Option<RankKey> {
        let (js, ls) = self.digits(index)?;
        let links = ls.iter().filter(|&&l| l > 0).count();
        let joint_count = js.iter().map(|&j| self.joint_dof[j]).sum();
        Some(RankKey { module_count: 2 + js.len() + links, joint_count, index })
    }

    pub fn assembly(&self, modules: &[String]) -> Result<Assembly, AssemblyError> {
        Assembly::from_serial_modules(Arc::clone(&self.set), modules)
    }

    /// Module-id chains in index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Vec<String>)> + '_ {
        (0..self.index_space()).filter_map(move |i| self.decode(i).map(|ids| (i, ids)))
    }

    /// All rank keys in ascending order.
    pub fn rank_keys(&self) -> Vec<RankKey> {
        let mut keys: Vec<RankKey> = (0..self.index_space()).filter_map(|i| self.rank_key(i)).collect();
        keys.sort_unstable();
        keys
    }
}

/// Lazily built assemblies in enumeration order.
pub fn enumerate_assemblies(spec: &EnumerationSpec) -> impl Iterator<Item = (u64, Result<Assembly, AssemblyError>)> + '_ {
    spec.iter().map(move |(i, ids)| (i, spec.assembly(&ids)))
}

/// Ascending ranking: fewer modules, then fewer joints, then enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankKey {
    pub module_count: usize,
    pub joint_count: usize,
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    pub key: RankKey,
    pub modules: Vec<String>,
    pub outcome: EvaluationOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchOptions {
    pub eval: EvalOptions,
    /// Stop at the first feasible result of the smallest feasible module count.
    pub early_stop: bool,
}

/// Builds and evaluates the chain behind `key`.
pub fn evaluate_candidate(spec: &EnumerationSpec, task: &Task, eval: &EvalOptions, key: RankKey) -> RankedResult {
    let modules = spec.decode(key.index).expect("key from this spec");
    let outcome = match spec.assembly(&modules) {
        Ok(a) => evaluate_assembly(&a, task, eval),
        Err(_) => EvaluationOutcome {
            feasible: false,
            failure: Some(crate::task::Infeasibility::Model),
            solutions: vec![],
            trajectory: None,
            module_count: key.module_count,
            joint_count: key.joint_count,
        },
    };
    RankedResult { key, modules, outcome }
}

/// Search driver shared by serial and parallel front ends. `batch` must
/// return one result per key, in key order.
pub fn search_with<F>(spec: &EnumerationSpec, opts: &SearchOptions, mut batch: F) -> Vec<RankedResult>
where
    F: FnMut(&[RankKey]) -> Vec<RankedResult>,
{
    let keys = spec.rank_keys();
    let mut out = Vec::new();
    let mut start = 0;
    while start < keys.len() {
        let mc = keys[start].module_count;
        let end = start + keys[start..].iter().take_while(|k| k.module_count == mc).count();
        let results = batch(&keys[start..end]);
        debug_assert_eq!(results.len(), end - start);
        out.extend(results.into_iter().filter(|r| r.outcome.feasible));
        if opts.early_stop && !out.is_empty() {
            out.truncate(1);
            break;
        }
        start = end;
    }
    out
}

/// Evaluates every enumerated chain and returns the feasible ones by rank.
pub fn brute_force_search(spec: &EnumerationSpec, task: &Task, opts: &SearchOptions) -> Vec<RankedResult> {
    search_with(spec, opts, |keys| keys.iter().map(|&k| evaluate_candidate(spec, task, &opts.eval, k)).collect())
}
