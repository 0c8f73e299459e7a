//! Declarative network profiles: the layer DAG, its latencies, the sub-exits
//! attached to it and the table of usable exits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::layer_set::LayerSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayerId(pub u32);

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubExitId(pub u32);

impl fmt::Display for SubExitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One block of the network. `deps` is the block's route: the layers whose
/// outputs it consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerProfile {
    pub id: LayerId,
    pub name: String,
    /// Average execution time in milliseconds.
    pub latency: f64,
    pub deps: Vec<LayerId>,
}

/// A detection head for one scale, reading the output of `attach_layer`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubExitProfile {
    pub id: SubExitId,
    pub attach_layer: LayerId,
    pub scale: String,
    pub head_latency: f64,
}

/// A full exit: one sub-exit per declared scale and the measured quality of
/// the combined prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitSpec {
    pub sub_exits: BTreeMap<String, SubExitId>,
    pub quality: f64,
    /// Trained together, as opposed to matched freely at inference time.
    pub trained: bool,
}

/// Unvalidated profile contents, as read from a document.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDraft {
    pub name: String,
    pub scales: Vec<String>,
    pub layers: Vec<LayerProfile>,
    pub sub_exits: Vec<SubExitProfile>,
    pub exits: Vec<ExitSpec>,
    pub default_quality: f64,
    pub final_quality: f64,
}

impl ProfileDraft {
    pub fn validate(self) -> Result<NetworkProfile> {
        NetworkProfile::new(self)
    }
}

#[derive(Debug, Clone)]
struct ExitInfo {
    /// Sub-exit indices in scale order.
    sub_exits: Vec<usize>,
    /// Transitive closure of the attach layers.
    features: LayerSet,
    required: LayerSet,
    inline_head: f64,
    grace_head: f64,
}

/// An exit together with the layers that must run before it can be used.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachableExit<'a> {
    pub index: usize,
    pub spec: &'a ExitSpec,
    pub required: BTreeSet<LayerId>,
}

/// A validated, immutable network profile.
///
/// Layers and sub-exits are held sorted by id; dense layer indices used
/// throughout the crate follow that order.
///
/// The *final* exit is the unique exit whose attach closure covers every
/// layer any exit depends on. Layers outside that closure (typically the
/// network's own detection block) are the final exit's head: the final exit
/// requires every layer, and its sub-exit head latencies are not charged a
/// second time.
#[derive(Debug, Clone)]
pub struct NetworkProfile {
    name: String,
    scales: Vec<String>,
    layers: Vec<LayerProfile>,
    sub_exits: Vec<SubExitProfile>,
    exits: Vec<ExitSpec>,
    default_quality: f64,
    final_quality: f64,

    layer_index: BTreeMap<LayerId, usize>,
    deps: Vec<Vec<usize>>,
    ancestors: Vec<LayerSet>,
    topo: Vec<usize>,
    sub_exit_index: BTreeMap<SubExitId, usize>,
    exit_info: Vec<ExitInfo>,
    final_exit: usize,
    output_layers: LayerSet,
}

impl NetworkProfile {
    pub fn new(draft: ProfileDraft) -> Result<Self> {
        let ProfileDraft {
            name,
            scales,
            mut layers,
            mut sub_exits,
            exits,
            default_quality,
            final_quality,
        } = draft;

        if !default_quality.is_finite() {
            return Err(Error::NonFinite("default_quality"));
        }
        if !final_quality.is_finite() {
            return Err(Error::NonFinite("final_quality"));
        }
        if scales.is_empty() {
            return Err(Error::NoScales);
        }
        let mut seen_scales = BTreeSet::new();
        for s in &scales {
            if !seen_scales.insert(s.as_str()) {
                return Err(Error::DuplicateScale(s.clone()));
            }
        }

        layers.sort_by_key(|l| l.id);
        let mut layer_index = BTreeMap::new();
        for (i, layer) in layers.iter_mut().enumerate() {
            if layer_index.insert(layer.id, i).is_some() {
                return Err(Error::DuplicateLayer(layer.id));
            }
            if !(layer.latency.is_finite() && layer.latency >= 0.0) {
                return Err(Error::InvalidLatency {
                    layer: layer.id,
                    value: layer.latency,
                });
            }
            layer.deps.sort();
            layer.deps.dedup();
        }
        let n = layers.len();
        let mut deps = Vec::with_capacity(n);
        for layer in &layers {
            let mut ds = Vec::with_capacity(layer.deps.len());
            for d in &layer.deps {
                match layer_index.get(d) {
                    Some(&j) => ds.push(j),
                    None => {
                        return Err(Error::DanglingDependency {
                            layer: layer.id,
                            missing: *d,
                        })
                    }
                }
            }
            deps.push(ds);
        }
        if let Some(cycle) = find_cycle(&deps) {
            return Err(Error::Cycle(cycle.into_iter().map(|i| layers[i].id).collect()));
        }
        let topo = smallest_topological_order(&deps);
        let mut ancestors = vec![LayerSet::empty(n); n];
        for &i in &topo {
            let mut set = LayerSet::empty(n);
            set.insert(i);
            for &d in &deps[i] {
                set.union_with(&ancestors[d]);
            }
            ancestors[i] = set;
        }

        sub_exits.sort_by_key(|s| s.id);
        let mut sub_exit_index = BTreeMap::new();
        for (i, s) in sub_exits.iter().enumerate() {
            if sub_exit_index.insert(s.id, i).is_some() {
                return Err(Error::DuplicateSubExit(s.id));
            }
            if !layer_index.contains_key(&s.attach_layer) {
                return Err(Error::DanglingAttach {
                    sub_exit: s.id,
                    layer: s.attach_layer,
                });
            }
            if !seen_scales.contains(s.scale.as_str()) {
                return Err(Error::UnknownScale {
                    sub_exit: s.id,
                    scale: s.scale.clone(),
                });
            }
            if !(s.head_latency.is_finite() && s.head_latency >= 0.0) {
                return Err(Error::InvalidHeadLatency {
                    sub_exit: s.id,
                    value: s.head_latency,
                });
            }
        }

        if exits.is_empty() {
            return Err(Error::NoExits);
        }
        let mut exit_info = Vec::with_capacity(exits.len());
        for (e, exit) in exits.iter().enumerate() {
            if !exit.quality.is_finite() {
                return Err(Error::InvalidExit {
                    exit: e,
                    reason: "quality must be finite".into(),
                });
            }
            for key in exit.sub_exits.keys() {
                if !seen_scales.contains(key.as_str()) {
                    return Err(Error::InvalidExit {
                        exit: e,
                        reason: format!("undeclared scale {key:?}"),
                    });
                }
            }
            let mut subs = Vec::with_capacity(scales.len());
            let mut features = LayerSet::empty(n);
            let mut head = 0.0;
            for scale in &scales {
                let Some(sid) = exit.sub_exits.get(scale) else {
                    return Err(Error::InvalidExit {
                        exit: e,
                        reason: format!("no sub-exit for scale {scale:?}"),
                    });
                };
                let Some(&si) = sub_exit_index.get(sid) else {
                    return Err(Error::DanglingSubExit {
                        exit: e,
                        sub_exit: *sid,
                    });
                };
                let sub = &sub_exits[si];
                if &sub.scale != scale {
                    return Err(Error::InvalidExit {
                        exit: e,
                        reason: format!(
                            "sub-exit {} has scale {:?}, listed under {scale:?}",
                            sub.id, sub.scale
                        ),
                    });
                }
                features.union_with(&ancestors[layer_index[&sub.attach_layer]]);
                head += sub.head_latency;
                subs.push(si);
            }
            exit_info.push(ExitInfo {
                sub_exits: subs,
                required: features.clone(),
                features,
                inline_head: head,
                grace_head: head,
            });
        }

        let mut relevant = LayerSet::empty(n);
        for info in &exit_info {
            relevant.union_with(&info.features);
        }
        let mut candidates: Vec<usize> = Vec::new();
        for (e, info) in exit_info.iter().enumerate() {
            if info.features == relevant
                && !candidates
                    .iter()
                    .any(|&c| exit_info[c].sub_exits == info.sub_exits)
            {
                candidates.push(e);
            }
        }
        let final_exit = match candidates.as_slice() {
            [] => return Err(Error::NoFinalExit),
            [only] => *only,
            many => return Err(Error::AmbiguousFinalExit(many.to_vec())),
        };
        if exits[final_exit].quality != final_quality {
            return Err(Error::FinalQualityMismatch {
                exit_quality: exits[final_exit].quality,
                final_quality,
            });
        }
        let output_layers = LayerSet::full(n).difference(&relevant);
        if !output_layers.is_empty() {
            let out_latency = output_layers.iter().fold(0.0, |t, i| t + layers[i].latency);
            // Duplicate listings of the final tuple share its semantics.
            for (e, info) in exit_info.iter_mut().enumerate() {
                if e == final_exit || info.features == relevant {
                    info.required = LayerSet::full(n);
                    info.inline_head = 0.0;
                    info.grace_head = out_latency;
                }
            }
        }

        Ok(Self {
            name,
            scales,
            layers,
            sub_exits,
            exits,
            default_quality,
            final_quality,
            layer_index,
            deps,
            ancestors,
            topo,
            sub_exit_index,
            exit_info,
            final_exit,
            output_layers,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scales(&self) -> &[String] {
        &self.scales
    }

    /// Layers sorted by id; position is the dense layer index.
    pub fn layers(&self) -> &[LayerProfile] {
        &self.layers
    }

    pub fn sub_exits(&self) -> &[SubExitProfile] {
        &self.sub_exits
    }

    pub fn exits(&self) -> &[ExitSpec] {
        &self.exits
    }

    pub fn default_quality(&self) -> f64 {
        self.default_quality
    }

    pub fn final_quality(&self) -> f64 {
        self.final_quality
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_index(&self, id: LayerId) -> Option<usize> {
        self.layer_index.get(&id).copied()
    }

    pub fn layer_id(&self, index: usize) -> LayerId {
        self.layers[index].id
    }

    pub fn latency(&self, index: usize) -> f64 {
        self.layers[index].latency
    }

    pub fn deps(&self, index: usize) -> &[usize] {
        &self.deps[index]
    }

    /// The layer itself plus everything it transitively depends on.
    pub fn ancestors(&self, index: usize) -> &LayerSet {
        &self.ancestors[index]
    }

    /// Lexicographically smallest topological order, as dense indices.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn sub_exit_index(&self, id: SubExitId) -> Option<usize> {
        self.sub_exit_index.get(&id).copied()
    }

    pub fn final_exit(&self) -> usize {
        self.final_exit
    }

    /// Layers no exit's sub-exits depend on; they act as the final exit's head.
    pub fn output_layers(&self) -> &LayerSet {
        &self.output_layers
    }

    pub fn full_set(&self) -> LayerSet {
        LayerSet::full(self.layers.len())
    }

    pub fn latency_sum(&self, set: &LayerSet) -> f64 {
        set.iter().fold(0.0, |t, i| t + self.layers[i].latency)
    }

    /// Closure of the exit's attach layers: what must have run for all of
    /// its sub-exit features to exist.
    pub fn exit_features(&self, exit: usize) -> &LayerSet {
        &self.exit_info[exit].features
    }

    pub fn exit_required(&self, exit: usize) -> &LayerSet {
        &self.exit_info[exit].required
    }

    /// Head cost executed inline when the exit is computed eagerly.
    pub fn inline_head(&self, exit: usize) -> f64 {
        self.exit_info[exit].inline_head
    }

    /// Head cost paid after an interrupt when the exit is finalized lazily.
    pub fn grace_head(&self, exit: usize) -> f64 {
        self.exit_info[exit].grace_head
    }

    /// Sub-exit indices of the exit in scale order.
    pub fn exit_sub_exits(&self, exit: usize) -> &[usize] {
        &self.exit_info[exit].sub_exits
    }

    /// Layer ids that must be executed before `exit` can produce a result.
    pub fn required_layers(&self, exit: usize) -> BTreeSet<LayerId> {
        self.exit_info[exit]
            .required
            .iter()
            .map(|i| self.layers[i].id)
            .collect()
    }

    /// Every listed exit once (first listing wins), with its required layers.
    pub fn enumerate_reachable_exits(&self) -> Vec<ReachableExit<'_>> {
        self.distinct_exits()
            .into_iter()
            .map(|e| ReachableExit {
                index: e,
                spec: &self.exits[e],
                required: self.required_layers(e),
            })
            .collect()
    }

    /// Exit indices with duplicate sub-exit mappings removed.
    pub fn distinct_exits(&self) -> Vec<usize> {
        let mut seen: BTreeSet<&[usize]> = BTreeSet::new();
        (0..self.exits.len())
            .filter(|&e| seen.insert(&self.exit_info[e].sub_exits))
            .collect()
    }

    /// `(a,b,c)` with sub-exit ids in scale order.
    pub fn exit_label(&self, exit: usize) -> String {
        let mut out = String::from("(");
        for (i, &s) in self.exit_info[exit].sub_exits.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", self.sub_exits[s].id));
        }
        out.push(')');
        out
    }

    /// Looks an exit up by its sub-exit ids in scale order.
    pub fn find_exit(&self, ids: &[SubExitId]) -> Option<usize> {
        if ids.len() != self.scales.len() {
            return None;
        }
        (0..self.exits.len()).find(|&e| {
            self.exit_info[e]
                .sub_exits
                .iter()
                .zip(ids)
                .all(|(&s, id)| self.sub_exits[s].id == *id)
        })
    }

    /// Canonical draft: layers and sub-exits sorted by id, deps sorted.
    pub fn to_draft(&self) -> ProfileDraft {
        ProfileDraft {
            name: self.name.clone(),
            scales: self.scales.clone(),
            layers: self.layers.clone(),
            sub_exits: self.sub_exits.clone(),
            exits: self.exits.clone(),
            default_quality: self.default_quality,
            final_quality: self.final_quality,
        }
    }

    /// Checks that `order` is a permutation of the layers respecting deps and
    /// returns it as dense indices.
    pub fn resolve_order(&self, order: &[LayerId]) -> Result<Vec<usize>> {
        let n = self.layers.len();
        if order.len() != n {
            return Err(Error::InvalidOrder(format!(
                "expected {n} layers, got {}",
                order.len()
            )));
        }
        let mut done = LayerSet::empty(n);
        let mut out = Vec::with_capacity(n);
        for id in order {
            let Some(i) = self.layer_index(*id) else {
                return Err(Error::InvalidOrder(format!("unknown layer {id}")));
            };
            if done.contains(i) {
                return Err(Error::InvalidOrder(format!("layer {id} appears twice")));
            }
            if let Some(&d) = self.deps[i].iter().find(|&&d| !done.contains(d)) {
                return Err(Error::InvalidOrder(format!(
                    "layer {id} runs before its dependency {}",
                    self.layers[d].id
                )));
            }
            done.insert(i);
            out.push(i);
        }
        Ok(out)
    }
}

fn find_cycle(deps: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }

    fn visit(v: usize, deps: &[Vec<usize>], mark: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        mark[v] = Mark::Active;
        stack.push(v);
        for &d in &deps[v] {
            match mark[d] {
                Mark::Active => {
                    let start = stack.iter().rposition(|&x| x == d).unwrap_or(0);
                    let mut cycle: Vec<usize> = stack[start..].to_vec();
                    cycle.push(d);
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(d, deps, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[v] = Mark::Done;
        None
    }

    let mut mark = vec![Mark::New; deps.len()];
    let mut stack = Vec::new();
    for v in 0..deps.len() {
        if mark[v] == Mark::New {
            if let Some(c) = visit(v, deps, &mut mark, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

fn smallest_topological_order(deps: &[Vec<usize>]) -> Vec<usize> {
    let n = deps.len();
    let mut indegree: Vec<usize> = deps.iter().map(Vec::len).collect();
    let mut dependents = vec![Vec::new(); n];
    for (v, ds) in deps.iter().enumerate() {
        for &d in ds {
            dependents[d].push(v);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &dependents[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.insert(w);
            }
        }
    }
    order
}
