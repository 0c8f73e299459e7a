//! JSON profile documents.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use anytime_core::{ExitSpec, LayerId, LayerProfile, NetworkProfile, ProfileDraft, SubExitId, SubExitProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub id: u32,
    pub name: String,
    pub latency_ms: f64,
    pub deps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubExitDoc {
    pub id: u32,
    pub attach_layer: u32,
    pub scale: String,
    pub head_latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitDoc {
    pub sub_exits: BTreeMap<String, u32>,
    pub quality: f64,
    pub trained: bool,
    /// Free-text origin of `quality`, e.g. `"synthetic"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub name: String,
    pub scales: Vec<String>,
    pub layers: Vec<LayerDoc>,
    pub sub_exits: Vec<SubExitDoc>,
    pub exits: Vec<ExitDoc>,
    #[serde(default)]
    pub default_quality: f64,
    pub final_quality: f64,
}

impl ProfileDoc {
    pub fn to_draft(&self) -> ProfileDraft {
        ProfileDraft {
            name: self.name.clone(),
            scales: self.scales.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerProfile {
                    id: LayerId(l.id),
                    name: l.name.clone(),
                    latency: l.latency_ms,
                    deps: l.deps.iter().map(|&d| LayerId(d)).collect(),
                })
                .collect(),
            sub_exits: self
                .sub_exits
                .iter()
                .map(|s| SubExitProfile {
                    id: SubExitId(s.id),
                    attach_layer: LayerId(s.attach_layer),
                    scale: s.scale.clone(),
                    head_latency: s.head_latency_ms,
                })
                .collect(),
            exits: self
                .exits
                .iter()
                .map(|e| ExitSpec {
                    sub_exits: e.sub_exits.iter().map(|(k, &v)| (k.clone(), SubExitId(v))).collect(),
                    quality: e.quality,
                    trained: e.trained,
                })
                .collect(),
            default_quality: self.default_quality,
            final_quality: self.final_quality,
        }
    }

    /// Canonical document of a validated profile (sorted layers and
    /// sub-exits, no provenance notes).
    pub fn from_profile(profile: &NetworkProfile) -> Self {
        let draft = profile.to_draft();
        Self {
            name: draft.name,
            scales: draft.scales,
            layers: draft
                .layers
                .into_iter()
                .map(|l| LayerDoc {
                    id: l.id.0,
                    name: l.name,
                    latency_ms: l.latency,
                    deps: l.deps.into_iter().map(|d| d.0).collect(),
                })
                .collect(),
            sub_exits: draft
                .sub_exits
                .into_iter()
                .map(|s| SubExitDoc {
                    id: s.id.0,
                    attach_layer: s.attach_layer.0,
                    scale: s.scale,
                    head_latency_ms: s.head_latency,
                })
                .collect(),
            exits: draft
                .exits
                .into_iter()
                .map(|e| ExitDoc {
                    sub_exits: e.sub_exits.into_iter().map(|(k, v)| (k, v.0)).collect(),
                    quality: e.quality,
                    trained: e.trained,
                    provenance: None,
                })
                .collect(),
            default_quality: draft.default_quality,
            final_quality: draft.final_quality,
        }
    }
}

pub fn parse_profile(text: &str) -> Result<NetworkProfile> {
    let doc: ProfileDoc = serde_json::from_str(text).context("malformed profile document")?;
    Ok(doc.to_draft().validate()?)
}

pub fn load_profile(path: &Path) -> Result<NetworkProfile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_profile(&text).with_context(|| format!("loading profile {}", path.display()))
}

/// Canonical pretty JSON with a trailing newline.
pub fn save_profile(profile: &NetworkProfile) -> String {
    let mut out = serde_json::to_string_pretty(&ProfileDoc::from_profile(profile)).expect("profile documents serialize");
    out.push('\n');
    out
}
