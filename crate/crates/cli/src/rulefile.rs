//! Routing-rule persistence: a versioned, human-readable JSON file mapping
//! each modality to its rule.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use edgeroute_core::features::Feature;
use edgeroute_core::router::{Direction, Rule, RoutingRule};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RULE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct RuleFile {
    schema_version: u32,
    kind: String,
    /// Decision for modalities absent from `rules`.
    fallback: String,
    rules: BTreeMap<String, RuleEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
enum RuleEntry {
    AlwaysRaw,
    AlwaysEdge,
    Threshold {
        feature: String,
        cutoff: f64,
        direction: String,
    },
}

impl RuleEntry {
    fn from_rule(rule: &Rule) -> Self {
        match rule {
            Rule::AlwaysRaw => RuleEntry::AlwaysRaw,
            Rule::AlwaysEdge => RuleEntry::AlwaysEdge,
            Rule::Threshold {
                feature,
                cutoff,
                direction,
            } => RuleEntry::Threshold {
                feature: feature.name().to_string(),
                cutoff: *cutoff,
                direction: match direction {
                    Direction::GeEdge => "ge-edge".to_string(),
                    Direction::GeRaw => "ge-raw".to_string(),
                },
            },
        }
    }

    fn to_rule(&self, path: &Path) -> Result<Rule> {
        Ok(match self {
            RuleEntry::AlwaysRaw => Rule::AlwaysRaw,
            RuleEntry::AlwaysEdge => Rule::AlwaysEdge,
            RuleEntry::Threshold {
                feature,
                cutoff,
                direction,
            } => {
                let feature = match feature.as_str() {
                    "sigma" => Feature::Sigma,
                    "entropy" => Feature::Entropy,
                    other => {
                        return Err(Error::format(path, format!("unknown feature {other:?}")))
                    }
                };
                let direction = match direction.as_str() {
                    "ge-edge" => Direction::GeEdge,
                    "ge-raw" => Direction::GeRaw,
                    other => {
                        return Err(Error::format(path, format!("unknown direction {other:?}")))
                    }
                };
                Rule::Threshold {
                    feature,
                    cutoff: *cutoff,
                    direction,
                }
            }
        })
    }
}

/// Writes a trained router as JSON.
pub fn save_rule(path: &Path, rule: &RoutingRule) -> Result<()> {
    let file = RuleFile {
        schema_version: RULE_SCHEMA_VERSION,
        kind: "routing-rule".to_string(),
        fallback: "raw".to_string(),
        rules: rule
            .rules()
            .iter()
            .map(|(m, r)| (m.clone(), RuleEntry::from_rule(r)))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Internal(format!("rule serialization: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a rule file back, validating the format tag.
pub fn load_rule(path: &Path) -> Result<RoutingRule> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: RuleFile =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if file.kind != "routing-rule" {
        return Err(Error::format(path, format!("not a rule file: kind {:?}", file.kind)));
    }
    if file.schema_version != RULE_SCHEMA_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported rule schema version {}", file.schema_version),
        ));
    }
    let mut rules = BTreeMap::new();
    for (modality, entry) in &file.rules {
        rules.insert(modality.clone(), entry.to_rule(path)?);
    }
    Ok(RoutingRule::new(rules))
}
