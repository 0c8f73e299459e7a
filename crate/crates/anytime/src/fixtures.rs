//! Profiles bundled with the crate.

use anyhow::{anyhow, Result};
use anytime_core::NetworkProfile;

use crate::document::parse_profile;

pub const NAMES: [&str; 5] = [
    "gelan-t",
    "gelan-t-transposed",
    "gelan-m",
    "gelan-m-transposed",
    "greedy-trap",
];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "gelan-t" => include_str!("../fixtures/gelan-t.json"),
        "gelan-t-transposed" => include_str!("../fixtures/gelan-t-transposed.json"),
        "gelan-m" => include_str!("../fixtures/gelan-m.json"),
        "gelan-m-transposed" => include_str!("../fixtures/gelan-m-transposed.json"),
        "greedy-trap" => include_str!("../fixtures/greedy-trap.json"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<NetworkProfile> {
    let text = source(name).ok_or_else(|| anyhow!("no bundled fixture named {name:?}; known: {}", NAMES.join(", ")))?;
    parse_profile(text)
}
