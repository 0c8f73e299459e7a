//! Seeded random profiles for property tests: parallel layer chains, one
//! output scale per chain, optionally joined by a merge layer.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::profile::{ExitSpec, LayerId, LayerProfile, NetworkProfile, ProfileDraft, SubExitId, SubExitProfile};

#[derive(Debug, Clone, Copy)]
pub struct ChainParams {
    pub max_layers: usize,
    pub max_chains: usize,
    /// Exits including the final one.
    pub max_exits: usize,
    /// Maximum head latency per sub-exit; zero disables heads.
    pub max_head: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            max_layers: 10,
            max_chains: 3,
            max_exits: 6,
            max_head: 0.5,
        }
    }
}

/// A valid random profile; identical seeds give identical profiles.
pub fn chain_profile(seed: u64, params: ChainParams) -> NetworkProfile {
    assert!(params.max_chains >= 1 && params.max_layers >= params.max_chains && params.max_exits >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chains = rng.gen_range(1..=params.max_chains);
    let merge = params.max_layers > chains && rng.gen_bool(0.3);
    let budget = params.max_layers - usize::from(merge);
    let total = rng.gen_range(chains..=budget);

    let mut lengths = alloc::vec![1usize; chains];
    for _ in chains..total {
        let c = rng.gen_range(0..chains);
        lengths[c] += 1;
    }

    let mut layers = Vec::new();
    let mut chain_layers: Vec<Vec<u32>> = Vec::new();
    let mut id = 0u32;
    for &len in &lengths {
        let mut members = Vec::new();
        for k in 0..len {
            let deps = if k == 0 { Vec::new() } else { alloc::vec![LayerId(id - 1)] };
            layers.push(LayerProfile {
                id: LayerId(id),
                name: format!("L{id}"),
                latency: round3(rng.gen_range(0.05..2.0)),
                deps,
            });
            members.push(id);
            id += 1;
        }
        chain_layers.push(members);
    }
    if merge {
        layers.push(LayerProfile {
            id: LayerId(id),
            name: String::from("merge"),
            latency: round3(rng.gen_range(0.05..2.0)),
            deps: chain_layers.iter().map(|m| LayerId(*m.last().expect("non-empty"))).collect(),
        });
    }

    let scales: Vec<String> = (0..chains).map(|c| format!("s{c}")).collect();
    let mut sub_exits = Vec::new();
    // Per chain, the sub-exit ids by attach position; the last layer always
    // carries one.
    let mut chain_subs: Vec<Vec<SubExitId>> = Vec::new();
    let mut sid = 0u32;
    for (c, members) in chain_layers.iter().enumerate() {
        let mut subs = Vec::new();
        for (k, &layer) in members.iter().enumerate() {
            if k + 1 == members.len() || rng.gen_bool(0.6) {
                sub_exits.push(SubExitProfile {
                    id: SubExitId(sid),
                    attach_layer: LayerId(layer),
                    scale: scales[c].clone(),
                    head_latency: if params.max_head > 0.0 {
                        round3(rng.gen_range(0.0..params.max_head))
                    } else {
                        0.0
                    },
                });
                subs.push(SubExitId(sid));
                sid += 1;
            }
        }
        chain_subs.push(subs);
    }

    let tuple = |choice: &[SubExitId]| -> BTreeMap<String, SubExitId> {
        scales.iter().cloned().zip(choice.iter().copied()).collect()
    };
    let final_choice: Vec<SubExitId> = chain_subs.iter().map(|s| *s.last().expect("non-empty")).collect();
    let mut choices: Vec<Vec<SubExitId>> = Vec::new();
    let combos: usize = chain_subs.iter().map(Vec::len).product();
    let target = rng.gen_range(1..=params.max_exits.min(combos));
    let mut attempts = 0;
    while choices.len() + 1 < target && attempts < 100 {
        attempts += 1;
        let c: Vec<SubExitId> = chain_subs.iter().map(|s| *s.choose(&mut rng).expect("non-empty")).collect();
        if c != final_choice && !choices.contains(&c) {
            choices.push(c);
        }
    }

    let mut exits: Vec<ExitSpec> = choices
        .iter()
        .map(|c| ExitSpec {
            sub_exits: tuple(c),
            quality: round3(rng.gen_range(1.0..100.0)),
            trained: false,
        })
        .collect();
    let final_quality = round3(rng.gen_range(1.0..100.0));
    exits.push(ExitSpec {
        sub_exits: tuple(&final_choice),
        quality: final_quality,
        trained: true,
    });
    exits.shuffle(&mut rng);

    ProfileDraft {
        name: format!("random-{seed}"),
        scales,
        layers,
        sub_exits,
        exits,
        default_quality: 0.0,
        final_quality,
    }
    .validate()
    .expect("generated profiles are valid")
}

fn round3(x: f64) -> f64 {
    libm::round(x * 1000.0) / 1000.0
}
