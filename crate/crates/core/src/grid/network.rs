//! Network topology.

use std::collections::VecDeque;

use super::cable::{build_pi_chain, default_sections, CableSpec, PiSection};
use super::{GridError, PerUnitBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub name: String,
    pub zone: String,
    pub kind: BusKind,
    /// Extra shunt susceptance at base frequency (filter capacitors), pu.
    pub shunt_b: f64,
}

/// Two-winding transformer: series impedance on the `to` side and an ideal
/// ratio `ratio : 1` on the `from` side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transformer {
    pub from_bus: usize,
    pub to_bus: usize,
    pub ratio: f64,
    pub r: f64,
    pub x: f64,
}

/// A physical cable, i.e. a group of π-sections tripped together.
#[derive(Debug, Clone, PartialEq)]
pub struct CableInfo {
    pub name: String,
    pub from_bus: usize,
    pub to_bus: usize,
    pub length_km: f64,
    pub sections: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceKind {
    Converter,
    WindFarm,
    Condenser,
}

/// Where a dynamic device connects to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub name: String,
    pub kind: DeviceKind,
    pub bus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base: PerUnitBase,
    pub buses: Vec<Bus>,
    pub branches: Vec<PiSection>,
    pub transformers: Vec<Transformer>,
    pub cables: Vec<CableInfo>,
    pub attachments: Vec<Attachment>,
}

/// Parameters of the hub-and-spoke layout: wind farms around one AC hub.
#[derive(Debug, Clone, PartialEq)]
pub struct HubLayout {
    pub cable: CableSpec,
    /// One export-cable length per wind farm, km.
    pub farm_distances_km: Vec<f64>,
    pub cables_per_farm: usize,
    pub km_per_section: f64,
    pub converters: usize,
    pub condensers: usize,
    /// Shunt susceptance added at the hub per converter (filter capacitor), system pu.
    pub hub_filter_b: f64,
}

impl Default for HubLayout {
    fn default() -> Self {
        Self {
            cable: CableSpec { r_series_mohm_per_km: Some(crate::techno::ConductorModel::copper_630().ac_resistance(50.0)), ..CableSpec::hv_220kv() },
            farm_distances_km: vec![10.0, 15.0, 15.0, 20.0, 25.0],
            cables_per_farm: 2,
            km_per_section: 10.0,
            converters: 5,
            condensers: 0,
            hub_filter_b: 0.0,
        }
    }
}

pub const HUB_BUS: usize = 0;
pub const ZONE: &str = "offshore";

impl Network {
    pub fn new(base: PerUnitBase) -> Self {
        Self {
            base,
            buses: Vec::new(),
            branches: Vec::new(),
            transformers: Vec::new(),
            cables: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn add_bus(&mut self, name: impl Into<String>, zone: &str, kind: BusKind) -> usize {
        self.buses.push(Bus { name: name.into(), zone: zone.into(), kind, shunt_b: 0.0 });
        self.buses.len() - 1
    }

    /// Adds a cable between two existing buses, creating internal nodes for the
    /// π-chain. Returns the cable index.
    pub fn add_cable(
        &mut self,
        name: impl Into<String>,
        from: usize,
        to: usize,
        spec: &CableSpec,
        length_km: f64,
        n_sections: usize,
    ) -> Result<usize, GridError> {
        let name = name.into();
        for b in [from, to] {
            if b >= self.buses.len() {
                return Err(GridError::UnknownBus(b));
            }
        }
        let zone = self.buses[from].zone.clone();
        let chain = build_pi_chain(spec, length_km, n_sections, &self.base, &zone)?;
        let mut nodes = vec![from];
        for k in 1..n_sections {
            nodes.push(self.add_bus(format!("{name}.n{k}"), &zone, BusKind::Pq));
        }
        nodes.push(to);
        let mut sections = Vec::with_capacity(n_sections);
        for (k, sec) in chain.into_iter().enumerate() {
            self.branches.push(PiSection { from_bus: nodes[k], to_bus: nodes[k + 1], ..sec });
            sections.push(self.branches.len() - 1);
        }
        self.cables.push(CableInfo { name, from_bus: from, to_bus: to, length_km, sections });
        Ok(self.cables.len() - 1)
    }

    pub fn attach(&mut self, name: impl Into<String>, kind: DeviceKind, bus: usize) {
        self.attachments.push(Attachment { name: name.into(), kind, bus });
    }

    /// The hub-and-spoke topology: hub bus 0 (slack) with converters and
    /// condensers, one PQ bus per wind farm tied to the hub by parallel cables.
    pub fn hub_and_spoke(base: PerUnitBase, layout: &HubLayout) -> Result<Self, GridError> {
        let mut net = Network::new(base);
        let hub = net.add_bus("hub", ZONE, BusKind::Slack);
        net.buses[hub].shunt_b = layout.hub_filter_b * layout.converters as f64;
        let farms: Vec<usize> = (0..layout.farm_distances_km.len())
            .map(|k| net.add_bus(format!("wf{}", k + 1), ZONE, BusKind::Pq))
            .collect();
        for (k, (&bus, &dist)) in farms.iter().zip(&layout.farm_distances_km).enumerate() {
            let n = default_sections(dist, layout.km_per_section);
            for c in 0..layout.cables_per_farm {
                net.add_cable(format!("wf{}.c{}", k + 1, c + 1), bus, hub, &layout.cable, dist, n)?;
            }
            net.attach(format!("wf{}", k + 1), DeviceKind::WindFarm, bus);
        }
        for k in 0..layout.converters {
            net.attach(format!("conv{}", k + 1), DeviceKind::Converter, hub);
        }
        for k in 0..layout.condensers {
            net.attach(format!("sc{}", k + 1), DeviceKind::Condenser, hub);
        }
        net.validate()?;
        Ok(net)
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn cable_index(&self, name: &str) -> Option<usize> {
        self.cables.iter().position(|c| c.name == name)
    }

    pub fn attachment(&self, name: &str) -> Option<&Attachment> {
        self.attachments.iter().find(|a| a.name == name)
    }

    /// Cables that terminate at the given bus.
    pub fn cables_at(&self, bus: usize) -> Vec<usize> {
        (0..self.cables.len())
            .filter(|&c| self.cables[c].from_bus == bus || self.cables[c].to_bus == bus)
            .collect()
    }

    /// Island label per bus considering only the enabled branches / transformers.
    pub fn islands(&self, branch_on: &[bool], trafo_on: &[bool]) -> Vec<usize> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for (k, b) in self.branches.iter().enumerate() {
            if branch_on.get(k).copied().unwrap_or(true) {
                adj[b.from_bus].push(b.to_bus);
                adj[b.to_bus].push(b.from_bus);
            }
        }
        for (k, t) in self.transformers.iter().enumerate() {
            if trafo_on.get(k).copied().unwrap_or(true) {
                adj[t.from_bus].push(t.to_bus);
                adj[t.to_bus].push(t.from_bus);
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut queue = VecDeque::from([start]);
            label[start] = next;
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let n = self.buses.len();
        if n == 0 {
            return Err(GridError::InvalidTopology("no buses".into()));
        }
        for b in &self.branches {
            for e in [b.from_bus, b.to_bus] {
                if e >= n {
                    return Err(GridError::UnknownBus(e));
                }
            }
            if b.r < 0.0 || b.b_half < 0.0 {
                return Err(GridError::InvalidTopology("negative r or b_half".into()));
            }
        }
        for t in &self.transformers {
            for e in [t.from_bus, t.to_bus] {
                if e >= n {
                    return Err(GridError::UnknownBus(e));
                }
            }
            if !(t.ratio > 0.0) {
                return Err(GridError::InvalidTopology("transformer ratio must be > 0".into()));
            }
        }
        for a in &self.attachments {
            if a.bus >= n {
                return Err(GridError::UnknownBus(a.bus));
            }
        }
        let labels = self.islands(&[], &[]);
        let islands = labels.iter().max().map_or(0, |m| m + 1);
        if islands != 1 {
            return Err(GridError::InvalidTopology(format!("network has {islands} islands")));
        }
        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 {
            return Err(GridError::InvalidTopology(format!("expected exactly one slack bus, found {slacks}")));
        }
        Ok(())
    }
}
