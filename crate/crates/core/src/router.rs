//! The routing meta-classifier: per-modality rules over the two meta-features
//! choose between the raw-input predictor and the edge-input predictor.
//!
//! Training is an exhaustive discrete search per modality over constant rules
//! and single-feature decision stumps, maximizing the mean realized
//! performance on that modality's records. The candidate set contains both
//! constant rules, so the trained rule can never score below either of them
//! on its own training records.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::features::{extract_features, Feature, FeatureVector};
use crate::grid::{Image, Mask};
use crate::metrics::LossValue;
use crate::predict::{PredictError, Predictor};

/// One evaluated image: both pipeline performances plus the meta-features and
/// loss values, the unit of every downstream analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub image_id: String,
    pub modality: String,
    pub features: FeatureVector,
    /// Performance of the raw-input pipeline, 0-100.
    pub perf_raw: f64,
    /// Performance of the edge-input pipeline, 0-100.
    pub perf_edge: f64,
    /// `perf_edge - perf_raw`, kept explicit for reporting.
    pub delta: f64,
    pub loss_raw: LossValue,
    pub loss_edge: LossValue,
}

impl EvalRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        image_id: String,
        modality: String,
        features: FeatureVector,
        perf_raw: f64,
        perf_edge: f64,
        loss_raw: LossValue,
        loss_edge: LossValue,
    ) -> Self {
        EvalRecord {
            image_id,
            modality,
            features,
            delta: perf_edge - perf_raw,
            perf_raw,
            perf_edge,
            loss_raw,
            loss_edge,
        }
    }

    /// The edge-superiority label: true iff the edge pipeline scored strictly
    /// higher (ties count as raw).
    pub fn label(&self) -> bool {
        self.delta > 0.0
    }
}

/// Which predictor a routing decision selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Raw,
    Edge,
}

/// What a stump does when the feature is at or above its cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `feature >= cutoff` selects the edge pipeline.
    GeEdge,
    /// `feature >= cutoff` selects the raw pipeline.
    GeRaw,
}

/// A single modality's routing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    AlwaysRaw,
    AlwaysEdge,
    Threshold {
        feature: Feature,
        cutoff: f64,
        direction: Direction,
    },
}

impl Rule {
    pub fn select(&self, features: &FeatureVector) -> Selection {
        match *self {
            Rule::AlwaysRaw => Selection::Raw,
            Rule::AlwaysEdge => Selection::Edge,
            Rule::Threshold {
                feature,
                cutoff,
                direction,
            } => {
                let at_or_above = feature.value(features) >= cutoff;
                match (at_or_above, direction) {
                    (true, Direction::GeEdge) | (false, Direction::GeRaw) => Selection::Edge,
                    (true, Direction::GeRaw) | (false, Direction::GeEdge) => Selection::Raw,
                }
            }
        }
    }
}

/// Trained router: one rule per modality seen in training. Unknown
/// modalities fall back to the raw pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutingRule {
    rules: BTreeMap<String, Rule>,
}

impl RoutingRule {
    pub fn new(rules: BTreeMap<String, Rule>) -> Self {
        RoutingRule { rules }
    }

    pub fn rules(&self) -> &BTreeMap<String, Rule> {
        &self.rules
    }

    pub fn rule_for(&self, modality: &str) -> Option<&Rule> {
        self.rules.get(modality)
    }

    /// The inference-time case rule: evaluate this modality's rule on the
    /// features. Modalities without a trained rule select raw.
    pub fn route(&self, modality: &str, features: &FeatureVector) -> Selection {
        match self.rules.get(modality) {
            Some(rule) => rule.select(features),
            None => Selection::Raw,
        }
    }
}

/// Errors from router training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrainError {
    NoRecords,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::NoRecords => write!(f, "cannot train a router on zero records"),
        }
    }
}

/// Mean performance a rule realizes on a record set: per record, the score
/// of whichever pipeline the rule selects.
pub fn mean_realized_perf<'a, I>(rule: &Rule, records: I) -> f64
where
    I: IntoIterator<Item = &'a EvalRecord>,
{
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in records {
        sum += match rule.select(&r.features) {
            Selection::Raw => r.perf_raw,
            Selection::Edge => r.perf_edge,
        };
        n += 1;
    }
    sum / n as f64
}

/// Midpoints between consecutive distinct sorted values.
fn midpoints(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("feature values are finite"));
    values.dedup();
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn candidate_rules(records: &[&EvalRecord]) -> Vec<Rule> {
    // The order defines the tie-break: constants first (raw before edge),
    // then stumps by feature, ascending cutoff, edge-direction first.
    let mut out = Vec::new();
    out.push(Rule::AlwaysRaw);
    out.push(Rule::AlwaysEdge);
    for feature in Feature::ALL {
        let values: Vec<f64> = records
            .iter()
            .map(|r| feature.value(&r.features))
            .collect();
        for cutoff in midpoints(values) {
            for direction in [Direction::GeEdge, Direction::GeRaw] {
                out.push(Rule::Threshold {
                    feature,
                    cutoff,
                    direction,
                });
            }
        }
    }
    out
}

/// Exhaustive per-modality search over the candidate rule set, maximizing
/// mean realized performance. Deterministic: on ties the earlier candidate
/// wins.
pub fn train_router(records: &[EvalRecord]) -> Result<RoutingRule, TrainError> {
    if records.is_empty() {
        return Err(TrainError::NoRecords);
    }
    let mut by_modality: BTreeMap<&str, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        by_modality.entry(&r.modality).or_default().push(r);
    }

    let mut rules = BTreeMap::new();
    for (modality, group) in by_modality {
        let mut best_rule = Rule::AlwaysRaw;
        let mut best_score = f64::NEG_INFINITY;
        for rule in candidate_rules(&group) {
            let score = mean_realized_perf(&rule, group.iter().copied());
            if score > best_score {
                best_score = score;
                best_rule = rule;
            }
        }
        rules.insert(String::from(modality), best_rule);
    }
    Ok(RoutingRule { rules })
}

/// Routes one image and invokes exactly the selected predictor. Features are
/// always extracted from the raw image.
pub fn meta_predict(
    rule: &RoutingRule,
    raw_pred: &dyn Predictor,
    edge_pred: &dyn Predictor,
    image: &Image,
    image_id: &str,
    modality: &str,
) -> Result<Mask, PredictError> {
    let features = extract_features(image);
    match rule.route(modality, &features) {
        Selection::Raw => raw_pred.predict(image, image_id),
        Selection::Edge => edge_pred.predict(image, image_id),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_loss() -> LossValue {
        LossValue {
            bce: 0.0,
            dice: 0.0,
            iou: 0.0,
            total: 0.0,
        }
    }

    fn record(modality: &str, sigma: f64, entropy: f64, perf_raw: f64, perf_edge: f64) -> EvalRecord {
        EvalRecord::new(
            format!("{modality}-{sigma}-{entropy}"),
            modality.to_string(),
            FeatureVector { sigma, entropy },
            perf_raw,
            perf_edge,
            zero_loss(),
            zero_loss(),
        )
    }

    #[test]
    fn delta_and_label_arithmetic() {
        // Per-record arithmetic on two published per-modality mean pairs.
        let derm = record("Dermoscopy", 1.0, 1.0, 53.03, 32.38);
        assert_relative_eq!(derm.delta, -20.65, max_relative = 1e-12);
        assert!(!derm.label());

        let oct = record("OCT", 1.0, 1.0, 1.29, 25.87);
        assert_relative_eq!(oct.delta, 24.58, max_relative = 1e-12);
        assert!(oct.label());

        let tie = record("US", 1.0, 1.0, 40.0, 40.0);
        assert_eq!(tie.delta, 0.0);
        assert!(!tie.label(), "ties are labeled raw");
    }

    #[test]
    fn dominance_yields_constant_rules() {
        let records = vec![
            record("up", 1.0, 2.0, 10.0, 20.0),
            record("up", 2.0, 3.0, 30.0, 35.0),
            record("down", 1.0, 2.0, 50.0, 5.0),
            record("down", 2.0, 3.0, 60.0, 55.0),
        ];
        let trained = train_router(&records).unwrap();
        assert_eq!(trained.rule_for("up"), Some(&Rule::AlwaysEdge));
        assert_eq!(trained.rule_for("down"), Some(&Rule::AlwaysRaw));
    }

    #[test]
    fn entropy_separable_fixture_trains_the_expected_stump() {
        // Four records, entropy 2/3/6/7, deltas -5/-5/+5/+5: the stump at
        // 4.5 realizes 12.5, strictly above both constants (both 10).
        let records = vec![
            record("m", 1.0, 2.0, 10.0, 5.0),
            record("m", 1.0, 3.0, 10.0, 5.0),
            record("m", 1.0, 6.0, 10.0, 15.0),
            record("m", 1.0, 7.0, 10.0, 15.0),
        ];
        let trained = train_router(&records).unwrap();
        let rule = trained.rule_for("m").unwrap();
        assert_eq!(
            rule,
            &Rule::Threshold {
                feature: Feature::Entropy,
                cutoff: 4.5,
                direction: Direction::GeEdge,
            }
        );
        let realized = mean_realized_perf(rule, &records);
        assert_eq!(realized, 12.5);
        assert!(realized > mean_realized_perf(&Rule::AlwaysRaw, &records));
        assert!(realized > mean_realized_perf(&Rule::AlwaysEdge, &records));
    }

    #[test]
    fn route_follows_rule_and_falls_back_to_raw() {
        let mut rules = BTreeMap::new();
        rules.insert("const".to_string(), Rule::AlwaysRaw);
        rules.insert(
            "stump".to_string(),
            Rule::Threshold {
                feature: Feature::Entropy,
                cutoff: 4.5,
                direction: Direction::GeEdge,
            },
        );
        let router = RoutingRule::new(rules);
        let low = FeatureVector {
            sigma: 9.0,
            entropy: 1.0,
        };
        let high = FeatureVector {
            sigma: 9.0,
            entropy: 6.0,
        };
        assert_eq!(router.route("const", &high), Selection::Raw);
        assert_eq!(router.route("stump", &high), Selection::Edge);
        assert_eq!(router.route("stump", &low), Selection::Raw);
        // Cutoff is inclusive.
        let exact = FeatureVector {
            sigma: 0.0,
            entropy: 4.5,
        };
        assert_eq!(router.route("stump", &exact), Selection::Edge);
        // Unknown modality: documented raw fallback.
        assert_eq!(router.route("never-seen", &high), Selection::Raw);
    }

    #[test]
    fn training_optimality_and_oracle_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..30 {
            let mut records = Vec::new();
            for modality in ["a", "b", "c"] {
                for _ in 0..12 {
                    records.push(record(
                        modality,
                        rng.gen_range(0.0..128.0),
                        rng.gen_range(0.0..8.0),
                        rng.gen_range(0.0..100.0),
                        rng.gen_range(0.0..100.0),
                    ));
                }
            }
            let trained = train_router(&records).unwrap();
            for modality in ["a", "b", "c"] {
                let group: Vec<&EvalRecord> = records
                    .iter()
                    .filter(|r| r.modality == modality)
                    .collect();
                let rule = trained.rule_for(modality).unwrap();
                let realized = mean_realized_perf(rule, group.iter().copied());
                let raw = mean_realized_perf(&Rule::AlwaysRaw, group.iter().copied());
                let edge = mean_realized_perf(&Rule::AlwaysEdge, group.iter().copied());
                assert!(realized >= raw && realized >= edge);
                let oracle =
                    group.iter().map(|r| r.perf_raw.max(r.perf_edge)).sum::<f64>() / group.len() as f64;
                assert!(realized <= oracle + 1e-12);
            }
        }
    }

    #[test]
    fn retraining_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let records: Vec<EvalRecord> = (0..40)
            .map(|i| {
                record(
                    if i % 2 == 0 { "x" } else { "y" },
                    rng.gen_range(0.0..128.0),
                    rng.gen_range(0.0..8.0),
                    rng.gen_range(0.0..100.0),
                    rng.gen_range(0.0..100.0),
                )
            })
            .collect();
        let a = train_router(&records).unwrap();
        let b = train_router(&records).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tie_break_prefers_raw_then_edge() {
        // Identical performances everywhere: every candidate realizes the
        // same mean, so AlwaysRaw must win.
        let records = vec![
            record("m", 1.0, 2.0, 10.0, 10.0),
            record("m", 2.0, 4.0, 10.0, 10.0),
        ];
        let trained = train_router(&records).unwrap();
        assert_eq!(trained.rule_for("m"), Some(&Rule::AlwaysRaw));

        // Edge dominates: AlwaysEdge beats every stump that realizes the
        // same mean because it comes first.
        let records = vec![
            record("m", 1.0, 2.0, 5.0, 10.0),
            record("m", 2.0, 4.0, 5.0, 10.0),
        ];
        let trained = train_router(&records).unwrap();
        assert_eq!(trained.rule_for("m"), Some(&Rule::AlwaysEdge));
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert_eq!(train_router(&[]), Err(TrainError::NoRecords));
    }

    #[test]
    fn meta_predict_returns_exactly_one_predictors_mask() {
        use crate::predict::{EdgeAssistedPredictor, OtsuPredictor};

        // Low-entropy image (two levels) vs high-entropy image (many levels).
        let low = Image::from_fn(16, 16, |x, _| if x < 8 { 20 } else { 220 });
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let high = Image::from_fn(16, 16, |_, _| rng.gen::<u8>());
        assert!(crate::features::entropy(&low) < 2.0);
        assert!(crate::features::entropy(&high) > 5.0);

        let raw = OtsuPredictor;
        let edge = EdgeAssistedPredictor::default();

        let mut rules = BTreeMap::new();
        rules.insert(
            "m".to_string(),
            Rule::Threshold {
                feature: Feature::Entropy,
                cutoff: 3.0,
                direction: Direction::GeEdge,
            },
        );
        let router = RoutingRule::new(rules);

        let out_low = meta_predict(&router, &raw, &edge, &low, "low", "m").unwrap();
        assert_eq!(out_low, raw.predict(&low, "low").unwrap());

        let out_high = meta_predict(&router, &raw, &edge, &high, "high", "m").unwrap();
        assert_eq!(out_high, edge.predict(&high, "high").unwrap());

        // Constant rules pass through verbatim.
        let mut rules = BTreeMap::new();
        rules.insert("m".to_string(), Rule::AlwaysEdge);
        let router = RoutingRule::new(rules);
        assert_eq!(
            meta_predict(&router, &raw, &edge, &low, "low", "m").unwrap(),
            edge.predict(&low, "low").unwrap()
        );
    }
}
