//! Service chains, VNF groups and overload/underload detection.

use std::collections::BTreeMap;

use thiserror::Error;

/// Resource-indexed values (`cpu`, `mem`, ...). Ordered so iteration is
/// deterministic.
pub type ResourceVec = BTreeMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("thresholds for {resource} must satisfy 0 < cold < warm < hot <= 1")]
    BadThresholds { resource: String },
    #[error("VM {vm} has no utilization sample for {resource}")]
    MissingUtilization { vm: u32, resource: String },
    #[error("VM {vm} reports utilization {value} for {resource}, outside [0, 1]")]
    UtilizationOutOfRange { vm: u32, resource: String, value: f64 },
    #[error("group has no online VM")]
    EmptyGroup,
    #[error("chain has no group")]
    EmptyChain,
    #[error("zero or missing capacity for resource {0}")]
    ZeroCapacity(String),
    #[error("traffic must be positive, got {0}")]
    NonPositiveTraffic(f64),
    #[error("monitoring window must be positive")]
    BadWindow,
}

/// Hot, warm and cold utilization cutoffs for one resource type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub hot: f64,
    pub warm: f64,
    pub cold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { hot: 0.9, warm: 0.8, cold: 0.3 }
    }
}

impl Thresholds {
    pub fn new(hot: f64, warm: f64, cold: f64) -> Result<Self, StateError> {
        let t = Thresholds { hot, warm, cold };
        t.validate("?")?;
        Ok(t)
    }

    fn validate(&self, resource: &str) -> Result<(), StateError> {
        let ok = self.cold > 0.0 && self.cold < self.warm && self.warm < self.hot && self.hot <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(StateError::BadThresholds { resource: resource.to_string() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Host {
    /// Dense PM index (PM `i` prints as `P{i+1}`).
    Pm(usize),
    Offline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmInstance {
    pub id: u32,
    pub vnf_type: u32,
    pub chain: u32,
    pub host: Host,
    /// Configured resources per type.
    pub capacity: ResourceVec,
    /// Measured utilization fractions; only meaningful while online.
    pub utilization: Option<ResourceVec>,
}

impl VmInstance {
    pub fn online(id: u32, pm: usize, capacity: ResourceVec, utilization: ResourceVec) -> Self {
        VmInstance { id, vnf_type: 0, chain: 0, host: Host::Pm(pm), capacity, utilization: Some(utilization) }
    }

    pub fn offline(id: u32, capacity: ResourceVec) -> Self {
        VmInstance { id, vnf_type: 0, chain: 0, host: Host::Offline, capacity, utilization: None }
    }

    pub fn host_pm(&self) -> Option<usize> {
        match self.host {
            Host::Pm(p) => Some(p),
            Host::Offline => None,
        }
    }
}

/// The set of VMs serving one VNF type of one chain, plus everything the
/// scaling models need to know about it.
#[derive(Debug, Clone, PartialEq)]
pub struct VnfGroup {
    pub chain: u32,
    pub vnf_type: u32,
    pub online: Vec<VmInstance>,
    pub offline_pool: Vec<VmInstance>,
    pub ingress_pms: Vec<usize>,
    pub egress_pms: Vec<usize>,
    pub thresholds: BTreeMap<String, Thresholds>,
    /// Traffic changing factor: output rate over input rate.
    pub gamma: f64,
    /// Maximum share of the total traffic one instance may take.
    pub phi: f64,
    /// Service impact factor per resource.
    pub omega: ResourceVec,
    /// PMs with room for at least one more instance.
    pub candidate_pms: Vec<usize>,
}

impl VnfGroup {
    /// PMs hosting online VMs, deduplicated, ascending.
    pub fn host_set(&self) -> Vec<usize> {
        let mut hosts: Vec<usize> = self.online.iter().filter_map(VmInstance::host_pm).collect();
        hosts.sort_unstable();
        hosts.dedup();
        hosts
    }

    /// Smallest configured capacity of `resource` across all group VMs.
    pub fn vm_capacity(&self, resource: &str) -> Option<f64> {
        self.online
            .iter()
            .chain(self.offline_pool.iter())
            .filter_map(|vm| vm.capacity.get(resource).copied())
            .reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainState {
    Overload,
    Underload,
    Normal,
}

impl std::fmt::Display for ChainState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChainState::Overload => "overload",
            ChainState::Underload => "underload",
            ChainState::Normal => "normal",
        })
    }
}

/// Sampling cadence of the synthetic monitor, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    pub tau: f64,
}

impl MonitorConfig {
    pub fn new(tau: f64) -> Result<Self, StateError> {
        if tau > 0.0 {
            Ok(MonitorConfig { tau })
        } else {
            Err(StateError::BadWindow)
        }
    }
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig { tau: 5.0 }
    }
}

/// Classifies one group from its online VMs' utilization samples.
///
/// Any sample at or above `hot` overloads the group. Otherwise a resource
/// whose mean is at most `cold` and whose maximum is at most `warm`
/// underloads it, but only when at least two VMs are online.
pub fn classify_group(group: &VnfGroup) -> Result<ChainState, StateError> {
    if group.online.is_empty() {
        return Err(StateError::EmptyGroup);
    }
    for (resource, t) in &group.thresholds {
        t.validate(resource)?;
    }

    let mut samples: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for vm in &group.online {
        for resource in group.thresholds.keys() {
            let value = vm
                .utilization
                .as_ref()
                .and_then(|u| u.get(resource))
                .copied()
                .ok_or_else(|| StateError::MissingUtilization { vm: vm.id, resource: resource.clone() })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(StateError::UtilizationOutOfRange { vm: vm.id, resource: resource.clone(), value });
            }
            samples.entry(resource.as_str()).or_default().push(value);
        }
    }

    let overloaded = group
        .thresholds
        .iter()
        .any(|(r, t)| samples[r.as_str()].iter().any(|&u| u >= t.hot));
    if overloaded {
        return Ok(ChainState::Overload);
    }
    if group.online.len() >= 2 {
        let underloaded = group.thresholds.iter().any(|(r, t)| {
            let values = &samples[r.as_str()];
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            mean <= t.cold && max <= t.warm
        });
        if underloaded {
            return Ok(ChainState::Underload);
        }
    }
    Ok(ChainState::Normal)
}

/// Classifies a chain. Overload wins over underload; the returned index is
/// the first group (in chain order) in the winning state.
pub fn classify_chain(groups: &[VnfGroup]) -> Result<(ChainState, Option<usize>), StateError> {
    if groups.is_empty() {
        return Err(StateError::EmptyChain);
    }
    let states = groups.iter().map(classify_group).collect::<Result<Vec<_>, _>>()?;
    for wanted in [ChainState::Overload, ChainState::Underload] {
        if let Some(i) = states.iter().position(|&s| s == wanted) {
            return Ok((wanted, Some(i)));
        }
    }
    Ok((ChainState::Normal, None))
}

/// Instances needed to absorb `traffic`: the largest `ceil(T * omega_r / u_r)`
/// over resources, never below one.
pub fn required_instances(group: &VnfGroup, traffic: f64) -> Result<usize, StateError> {
    if !(traffic > 0.0) {
        return Err(StateError::NonPositiveTraffic(traffic));
    }
    let mut needed = 1usize;
    for (resource, &omega) in &group.omega {
        let capacity = group
            .vm_capacity(resource)
            .filter(|&u| u > 0.0)
            .ok_or_else(|| StateError::ZeroCapacity(resource.clone()))?;
        // Shave floating noise so that e.g. 100 * 0.02 / 1.0 stays 2.
        let ratio = traffic * omega / capacity;
        let count = (ratio - 1e-9 * ratio.abs().max(1.0)).ceil().max(1.0) as usize;
        needed = needed.max(count);
    }
    Ok(needed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(pairs: &[(&str, f64)]) -> ResourceVec {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn group_with_cpu(utils: &[f64]) -> VnfGroup {
        let online = utils
            .iter()
            .enumerate()
            .map(|(i, &u)| VmInstance::online(i as u32 + 1, i, res(&[("cpu", 1.0)]), res(&[("cpu", u)])))
            .collect();
        VnfGroup {
            chain: 0,
            vnf_type: 2,
            online,
            offline_pool: vec![],
            ingress_pms: vec![0],
            egress_pms: vec![1],
            thresholds: [("cpu".to_string(), Thresholds::default())].into_iter().collect(),
            gamma: 1.0,
            phi: 1.0,
            omega: res(&[("cpu", 0.02)]),
            candidate_pms: vec![],
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(classify_group(&group_with_cpu(&[0.95, 0.75])).unwrap(), ChainState::Overload);
        assert_eq!(classify_group(&group_with_cpu(&[0.40, 0.15])).unwrap(), ChainState::Underload);
        assert_eq!(classify_group(&group_with_cpu(&[0.10])).unwrap(), ChainState::Normal);
        assert_eq!(classify_group(&group_with_cpu(&[0.50, 0.65])).unwrap(), ChainState::Normal);
    }

    #[test]
    fn underload_needs_max_below_warm() {
        // Mean 0.275 is cold but one VM sits at 0.85 > warm.
        assert_eq!(classify_group(&group_with_cpu(&[0.85, 0.0, 0.0, 0.25])).unwrap(), ChainState::Normal);
    }

    #[test]
    fn overload_beats_underload_across_resources() {
        let mut g = group_with_cpu(&[0.1, 0.1]);
        g.thresholds.insert("mem".into(), Thresholds::default());
        for vm in &mut g.online {
            vm.utilization.as_mut().unwrap().insert("mem".into(), 0.95);
        }
        assert_eq!(classify_group(&g).unwrap(), ChainState::Overload);
    }

    #[test]
    fn missing_sample_is_an_error() {
        let mut g = group_with_cpu(&[0.5, 0.5]);
        g.online[1].utilization = None;
        assert_eq!(
            classify_group(&g).unwrap_err(),
            StateError::MissingUtilization { vm: 2, resource: "cpu".into() }
        );
    }

    #[test]
    fn threshold_order_enforced() {
        assert!(Thresholds::new(0.9, 0.8, 0.3).is_ok());
        assert!(Thresholds::new(0.8, 0.9, 0.3).is_err());
        assert!(Thresholds::new(0.9, 0.3, 0.3).is_err());
    }

    #[test]
    fn chain_precedence() {
        let normal = group_with_cpu(&[0.5, 0.5]);
        let over = group_with_cpu(&[0.95, 0.5]);
        let under = group_with_cpu(&[0.2, 0.1]);
        assert_eq!(
            classify_chain(&[normal.clone(), over.clone(), normal.clone()]).unwrap(),
            (ChainState::Overload, Some(1))
        );
        assert_eq!(classify_chain(&[normal.clone(), normal.clone()]).unwrap(), (ChainState::Normal, None));
        assert_eq!(classify_chain(&[under, over]).unwrap(), (ChainState::Overload, Some(1)));
        assert_eq!(classify_chain(&[]).unwrap_err(), StateError::EmptyChain);
    }

    #[test]
    fn instance_counts() {
        let g = group_with_cpu(&[0.5]);
        assert_eq!(required_instances(&g, 100.0).unwrap(), 2);
        assert_eq!(required_instances(&g, 1.0).unwrap(), 1);

        let mut g = group_with_cpu(&[0.5]);
        g.omega = res(&[("cpu", 0.025), ("mem", 0.01)]);
        g.online[0].capacity = res(&[("cpu", 1.0), ("mem", 0.5)]);
        assert_eq!(required_instances(&g, 120.0).unwrap(), 3);

        g.online[0].capacity.insert("mem".into(), 0.0);
        assert_eq!(required_instances(&g, 120.0).unwrap_err(), StateError::ZeroCapacity("mem".into()));
        assert!(required_instances(&g, 0.0).is_err());
    }

    #[test]
    fn monitor_window() {
        assert!(MonitorConfig::new(5.0).is_ok());
        assert_eq!(MonitorConfig::new(0.0).unwrap_err(), StateError::BadWindow);
    }
}
