//! Scoring of externally produced object detections against ground
//! truth: IoU, greedy confidence-ordered matching, per-class average
//! precision, mAP, and confusion counts.
//!
//! Matching follows the PASCAL-style protocol: within each (image,
//! class) pair, predictions are taken in descending confidence order
//! (ties keep input order) and each greedily claims the unmatched
//! ground-truth box of highest IoU at or above the threshold. AP is the
//! all-point interpolation: the area under the precision envelope made
//! non-increasing from the right. mAP averages AP over the classes that
//! actually appear in the ground truth; classes predicted but never
//! annotated contribute false positives only.
//!
//! Detection files are plain text, one record per line:
//! `image_id class_id confidence x_min y_min x_max y_max` for
//! predictions and the same without the confidence column for ground
//! truth.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

/// Axis-aligned box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum BoxError {
    #[error("bounding box must satisfy x_min < x_max and y_min < y_max")]
    Degenerate,
    #[error("bounding box coordinates must be finite")]
    NonFinite,
    #[error("confidence must be within [0, 1], got {0}")]
    BadConfidence(f64),
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, BoxError> {
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(BoxError::NonFinite);
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(BoxError::Degenerate);
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// Intersection area over union area; 0 for disjoint boxes, exactly 1
/// for identical ones.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let iy = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    inter / union
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub image_id: String,
    pub class_id: i64,
    pub confidence: f64,
    pub box_: BoundingBox,
}

impl Prediction {
    pub fn new(
        image_id: impl Into<String>,
        class_id: i64,
        confidence: f64,
        box_: BoundingBox,
    ) -> Result<Self, BoxError> {
        if !(confidence.is_finite() && (0.0..=1.0).contains(&confidence)) {
            return Err(BoxError::BadConfidence(confidence));
        }
        Ok(Self {
            image_id: image_id.into(),
            class_id,
            confidence,
            box_,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub class_id: i64,
    pub box_: BoundingBox,
}

/// One matched prediction/truth pair, by input indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub pred: usize,
    pub truth: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub matches: Vec<MatchPair>,
    /// Aligned with the prediction input order.
    pub pred_is_tp: Vec<bool>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Greedy confidence-ordered matching. Predictions are visited in
/// descending confidence (ties in input order); each claims the
/// unmatched same-image same-class truth of highest IoU at or above
/// `iou_threshold`, lower truth index winning exact IoU ties.
pub fn match_detections(
    preds: &[Prediction],
    truths: &[GroundTruth],
    iou_threshold: f64,
) -> MatchOutcome {
    let mut by_group: HashMap<(&str, i64), Vec<usize>> = HashMap::new();
    for (t, truth) in truths.iter().enumerate() {
        by_group
            .entry((truth.image_id.as_str(), truth.class_id))
            .or_default()
            .push(t);
    }

    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b]
            .confidence
            .partial_cmp(&preds[a].confidence)
            .expect("confidences are validated finite")
    });

    let mut truth_taken = vec![false; truths.len()];
    let mut pred_is_tp = vec![false; preds.len()];
    let mut matches = Vec::new();

    for &p in &order {
        let pred = &preds[p];
        let Some(group) = by_group.get(&(pred.image_id.as_str(), pred.class_id)) else {
            continue;
        };
        let mut best: Option<(usize, f64)> = None;
        for &t in group {
            if truth_taken[t] {
                continue;
            }
            let overlap = iou(&pred.box_, &truths[t].box_);
            if overlap < iou_threshold {
                continue;
            }
            if best.map_or(true, |(_, b)| overlap > b) {
                best = Some((t, overlap));
            }
        }
        if let Some((t, overlap)) = best {
            truth_taken[t] = true;
            pred_is_tp[p] = true;
            matches.push(MatchPair {
                pred: p,
                truth: t,
                iou: overlap,
            });
        }
    }

    let true_positives = matches.len();
    MatchOutcome {
        matches,
        pred_is_tp,
        true_positives,
        false_positives: preds.len() - true_positives,
        false_negatives: truths.len() - true_positives,
    }
}

/// All-point interpolated average precision for one class.
///
/// `scored` pairs each prediction's confidence with its TP flag (order
/// does not matter; the function sorts). `truth_count` is the number of
/// ground-truth boxes of the class. Zero truths pin AP to 0.
pub fn average_precision(scored: &[(f64, bool)], truth_count: usize) -> f64 {
    if truth_count == 0 {
        return 0.0;
    }
    let mut ranked: Vec<(f64, bool)> = scored.to_vec();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("confidences are finite"));

    let mut precisions = Vec::with_capacity(ranked.len());
    let mut recalls = Vec::with_capacity(ranked.len());
    let mut tp = 0usize;
    for (i, &(_, is_tp)) in ranked.iter().enumerate() {
        if is_tp {
            tp += 1;
        }
        precisions.push(tp as f64 / (i + 1) as f64);
        recalls.push(tp as f64 / truth_count as f64);
    }

    // Monotone envelope from the right, then sum the recall steps.
    let mut envelope = precisions.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..envelope.len() {
        ap += (recalls[i] - prev_recall) * envelope[i];
        prev_recall = recalls[i];
    }
    ap
}

/// Full evaluation report. `map` averages per-class AP over the classes
/// present in ground truth; `mean_iou_tp` averages the IoU of matched
/// pairs (0 when nothing matched).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub per_class_ap: BTreeMap<i64, f64>,
    pub map: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub mean_iou_tp: f64,
    pub warnings: Vec<String>,
}

pub fn evaluate(preds: &[Prediction], truths: &[GroundTruth], iou_threshold: f64) -> EvalReport {
    let outcome = match_detections(preds, truths, iou_threshold);

    let gt_classes: BTreeSet<i64> = truths.iter().map(|t| t.class_id).collect();
    let mut truth_counts: BTreeMap<i64, usize> = BTreeMap::new();
    for t in truths {
        *truth_counts.entry(t.class_id).or_insert(0) += 1;
    }

    let mut warnings = Vec::new();
    let mut per_class_ap = BTreeMap::new();
    for &class in &gt_classes {
        let scored: Vec<(f64, bool)> = preds
            .iter()
            .zip(&outcome.pred_is_tp)
            .filter(|(p, _)| p.class_id == class)
            .map(|(p, &is_tp)| (p.confidence, is_tp))
            .collect();
        let matched_any = scored.iter().any(|&(_, is_tp)| is_tp);
        let ap = average_precision(&scored, truth_counts[&class]);
        if !matched_any {
            warnings.push(format!(
                "class {class}: {} ground truths but no matched predictions; AP defined as 0",
                truth_counts[&class]
            ));
        }
        per_class_ap.insert(class, ap);
    }

    let map = if per_class_ap.is_empty() {
        warnings.push("no ground truth provided; mAP defined as 0".to_string());
        0.0
    } else {
        per_class_ap.values().sum::<f64>() / per_class_ap.len() as f64
    };

    let mean_iou_tp = if outcome.matches.is_empty() {
        0.0
    } else {
        outcome.matches.iter().map(|m| m.iou).sum::<f64>() / outcome.matches.len() as f64
    };

    EvalReport {
        iou_threshold,
        per_class_ap,
        map,
        true_positives: outcome.true_positives,
        false_positives: outcome.false_positives,
        false_negatives: outcome.false_negatives,
        mean_iou_tp,
        warnings,
    }
}

impl EvalReport {
    /// Human-readable report: confusion matrix and metrics tables, then
    /// per-class AP and any warnings.
    pub fn human_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "object detection evaluation (greedy matching, IoU threshold {:.2}, all-point interpolated AP)",
            self.iou_threshold
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(out, "confusion matrix").unwrap();
        writeln!(out, "{:>10}  {:>8}  {:>8}", "", "Positive", "Negative").unwrap();
        writeln!(
            out,
            "{:>10}  {:>8}  {:>8}",
            "Positive", self.true_positives, self.false_positives
        )
        .unwrap();
        writeln!(
            out,
            "{:>10}  {:>8}  {:>8}",
            "Negative", self.false_negatives, 0
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(out, "{:<8}  {:>8}", "Metrics", "Value").unwrap();
        writeln!(out, "{:<8}  {:>7.2}%", "IoU", self.mean_iou_tp * 100.0).unwrap();
        writeln!(out, "{:<8}  {:>7.2}%", "mAP", self.map * 100.0).unwrap();
        if !self.per_class_ap.is_empty() {
            writeln!(out).unwrap();
            writeln!(out, "per-class AP").unwrap();
            for (class, ap) in &self.per_class_ap {
                writeln!(out, "  class {class}: {ap:.4}").unwrap();
            }
        }
        for w in &self.warnings {
            writeln!(out, "warning: {w}").unwrap();
        }
        out
    }

    /// Machine-readable key=value block.
    pub fn machine_block(&self) -> String {
        let mut out = String::new();
        writeln!(out, "iou_threshold={}", self.iou_threshold).unwrap();
        writeln!(out, "tp={}", self.true_positives).unwrap();
        writeln!(out, "fp={}", self.false_positives).unwrap();
        writeln!(out, "fn={}", self.false_negatives).unwrap();
        writeln!(out, "mean_iou_tp={:.6}", self.mean_iou_tp).unwrap();
        writeln!(out, "map={:.6}", self.map).unwrap();
        for (class, ap) in &self.per_class_ap {
            writeln!(out, "ap.{class}={ap:.6}").unwrap();
        }
        out
    }
}

// ---------------------------------------------------------------------------
// file formats
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
pub enum DetectFileError {
    #[error("line {line}: expected {expected} whitespace-separated fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse {field} from {value:?}")]
    NumericParse {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: {source}")]
    BadRecord { line: usize, source: BoxError },
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    line: usize,
    field: &'static str,
) -> Result<T, DetectFileError> {
    raw.parse().map_err(|_| DetectFileError::NumericParse {
        line,
        field,
        value: raw.to_string(),
    })
}

/// Parse a prediction file: `image_id class_id confidence x_min y_min
/// x_max y_max`, one per line, blank lines skipped.
pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, DetectFileError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(DetectFileError::FieldCount {
                line,
                expected: 7,
                found: fields.len(),
            });
        }
        let class_id = parse_field(fields[1], line, "class_id")?;
        let confidence = parse_field(fields[2], line, "confidence")?;
        let coords: [f64; 4] = [
            parse_field(fields[3], line, "x_min")?,
            parse_field(fields[4], line, "y_min")?,
            parse_field(fields[5], line, "x_max")?,
            parse_field(fields[6], line, "y_max")?,
        ];
        let box_ = BoundingBox::new(coords[0], coords[1], coords[2], coords[3])
            .map_err(|source| DetectFileError::BadRecord { line, source })?;
        let pred = Prediction::new(fields[0], class_id, confidence, box_)
            .map_err(|source| DetectFileError::BadRecord { line, source })?;
        out.push(pred);
    }
    Ok(out)
}

/// Parse a ground-truth file: `image_id class_id x_min y_min x_max
/// y_max`, one per line, blank lines skipped.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruth>, DetectFileError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(DetectFileError::FieldCount {
                line,
                expected: 6,
                found: fields.len(),
            });
        }
        let class_id = parse_field(fields[1], line, "class_id")?;
        let coords: [f64; 4] = [
            parse_field(fields[2], line, "x_min")?,
            parse_field(fields[3], line, "y_min")?,
            parse_field(fields[4], line, "x_max")?,
            parse_field(fields[5], line, "y_max")?,
        ];
        let box_ = BoundingBox::new(coords[0], coords[1], coords[2], coords[3])
            .map_err(|source| DetectFileError::BadRecord { line, source })?;
        out.push(GroundTruth {
            image_id: fields[0].to_string(),
            class_id,
            box_,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn pred(img: &str, class: i64, conf: f64, b: BoundingBox) -> Prediction {
        Prediction::new(img, class, conf, b).unwrap()
    }

    fn truth(img: &str, class: i64, b: BoundingBox) -> GroundTruth {
        GroundTruth {
            image_id: img.to_string(),
            class_id: class,
            box_: b,
        }
    }

    #[test]
    fn iou_hand_cases() {
        let a = bb(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bb(5.0, 5.0, 6.0, 6.0)), 0.0);
        // Unit overlap, union 4 + 4 - 1 = 7.
        assert_eq!(iou(&a, &bb(1.0, 1.0, 3.0, 3.0)), 1.0 / 7.0);
        // Unit box inside a 4x4: union is the outer area.
        assert_eq!(iou(&bb(0.0, 0.0, 4.0, 4.0), &bb(1.0, 1.0, 2.0, 2.0)), 1.0 / 16.0);
        // Edge contact has zero-area intersection.
        assert_eq!(iou(&a, &bb(2.0, 0.0, 4.0, 2.0)), 0.0);
    }

    #[test]
    fn boxes_are_validated() {
        assert_eq!(
            BoundingBox::new(1.0, 0.0, 1.0, 2.0),
            Err(BoxError::Degenerate)
        );
        assert_eq!(
            BoundingBox::new(0.0, 3.0, 1.0, 2.0),
            Err(BoxError::Degenerate)
        );
        assert_eq!(
            BoundingBox::new(f64::NAN, 0.0, 1.0, 2.0),
            Err(BoxError::NonFinite)
        );
        assert_eq!(
            Prediction::new("a", 0, 1.5, bb(0.0, 0.0, 1.0, 1.0)),
            Err(BoxError::BadConfidence(1.5))
        );
    }

    #[test]
    fn two_predictions_on_one_truth_split_tp_fp() {
        let t = vec![truth("img", 0, bb(0.0, 0.0, 10.0, 10.0))];
        let p = vec![
            pred("img", 0, 0.6, bb(0.2, 0.0, 10.0, 10.0)),
            pred("img", 0, 0.9, bb(0.0, 0.0, 9.8, 10.0)),
        ];
        let out = match_detections(&p, &t, 0.5);
        assert_eq!(out.true_positives, 1);
        assert_eq!(out.false_positives, 1);
        assert_eq!(out.false_negatives, 0);
        // The higher-confidence prediction (input index 1) wins.
        assert_eq!(out.matches[0].pred, 1);
        assert!(out.pred_is_tp[1] && !out.pred_is_tp[0]);
    }

    #[test]
    fn greedy_takes_the_highest_iou_truth() {
        let t = vec![
            truth("img", 0, bb(0.0, 0.0, 10.0, 10.0)),
            truth("img", 0, bb(0.0, 0.0, 9.0, 10.0)),
        ];
        let p = vec![pred("img", 0, 0.9, bb(0.0, 0.0, 9.0, 10.0))];
        let out = match_detections(&p, &t, 0.5);
        assert_eq!(out.matches[0].truth, 1);
        assert_eq!(out.matches[0].iou, 1.0);
        assert_eq!(out.false_negatives, 1);
    }

    #[test]
    fn confidence_ties_keep_input_order() {
        let t = vec![truth("img", 0, bb(0.0, 0.0, 10.0, 10.0))];
        let p = vec![
            pred("img", 0, 0.7, bb(0.0, 0.0, 10.0, 9.0)),
            pred("img", 0, 0.7, bb(0.0, 0.0, 10.0, 10.0)),
        ];
        let out = match_detections(&p, &t, 0.5);
        assert!(out.pred_is_tp[0], "first of equal confidences matches first");
        assert!(!out.pred_is_tp[1]);
    }

    #[test]
    fn matching_respects_image_and_class_boundaries() {
        let b = bb(0.0, 0.0, 5.0, 5.0);
        let t = vec![truth("a", 0, b), truth("b", 1, b)];
        let p = vec![pred("a", 1, 0.9, b), pred("b", 0, 0.9, b)];
        let out = match_detections(&p, &t, 0.5);
        assert_eq!(out.true_positives, 0);
        assert_eq!(out.false_positives, 2);
        assert_eq!(out.false_negatives, 2);
    }

    #[test]
    fn ap_fixture_three_preds_two_truths() {
        // Ranked TP, FP, TP over 2 truths: AP = 0.5 * 1 + 0.5 * (2/3).
        let scored = [(0.9, true), (0.8, false), (0.7, true)];
        let ap = average_precision(&scored, 2);
        assert!((ap - 5.0 / 6.0).abs() < 1e-12, "ap = {ap}");
    }

    #[test]
    fn ap_edges() {
        assert_eq!(average_precision(&[(0.9, true)], 1), 1.0);
        assert_eq!(average_precision(&[], 3), 0.0);
        assert_eq!(average_precision(&[(0.5, false)], 0), 0.0);
    }

    #[test]
    fn evaluate_two_classes_averages_ap() {
        let b = bb(0.0, 0.0, 10.0, 10.0);
        let truths = vec![
            truth("img", 0, b),
            truth("img", 1, b),
            truth("img", 1, bb(20.0, 20.0, 30.0, 30.0)),
        ];
        // Class 0 perfectly detected; class 1 gets one of two.
        let preds = vec![
            pred("img", 0, 0.9, b),
            pred("img", 1, 0.8, b),
        ];
        let report = evaluate(&preds, &truths, 0.5);
        assert_eq!(report.per_class_ap[&0], 1.0);
        assert_eq!(report.per_class_ap[&1], 0.5);
        assert_eq!(report.map, 0.75);
        assert_eq!(report.true_positives, 2);
        assert_eq!(report.false_negatives, 1);
        assert_eq!(report.mean_iou_tp, 1.0);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn unannotated_classes_are_fp_only() {
        let b = bb(0.0, 0.0, 10.0, 10.0);
        let truths = vec![truth("img", 0, b)];
        let preds = vec![pred("img", 0, 0.9, b), pred("img", 7, 0.8, b)];
        let report = evaluate(&preds, &truths, 0.5);
        assert!(!report.per_class_ap.contains_key(&7));
        assert_eq!(report.map, 1.0);
        assert_eq!(report.false_positives, 1);
    }

    #[test]
    fn unmatched_truth_classes_warn() {
        let truths = vec![truth("img", 3, bb(0.0, 0.0, 10.0, 10.0))];
        let report = evaluate(&[], &truths, 0.5);
        assert_eq!(report.per_class_ap[&3], 0.0);
        assert_eq!(report.map, 0.0);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("class 3"));
        assert_eq!(report.mean_iou_tp, 0.0);
    }

    #[test]
    fn report_tables_use_the_confusion_layout() {
        // 34 matched truths plus 46 stray predictions.
        let mut truths = Vec::new();
        let mut preds = Vec::new();
        for i in 0..34 {
            let x = 20.0 * i as f64;
            let b = bb(x, 0.0, x + 10.0, 10.0);
            truths.push(truth("img", 0, b));
            preds.push(pred("img", 0, 0.9, b));
        }
        for i in 0..46 {
            let x = 20.0 * i as f64;
            preds.push(pred("img", 0, 0.3, bb(x, 100.0, x + 10.0, 110.0)));
        }
        let report = evaluate(&preds, &truths, 0.5);
        assert_eq!(report.true_positives, 34);
        assert_eq!(report.false_positives, 46);
        assert_eq!(report.false_negatives, 0);

        let table = report.human_table();
        assert!(table.contains("Positive  Negative"));
        assert!(table.contains("Positive        34        46"));
        assert!(table.contains("Negative         0         0"));
        assert!(table.contains("Metrics"));
        assert!(table.contains("100.00%"));

        let machine = report.machine_block();
        assert!(machine.contains("tp=34\n"));
        assert!(machine.contains("fp=46\n"));
        assert!(machine.contains("fn=0\n"));
        assert!(machine.contains("ap.0="));
    }

    #[test]
    fn prediction_file_round_trip_and_errors() {
        let text = "img1 0 0.9 10 20 30 40\n\nimg2 3 0.5 0.5 0.5 1.5 2.5\n";
        let preds = parse_predictions(text).unwrap();
        assert_eq!(preds.len(), 2);
        assert_eq!(preds[0].image_id, "img1");
        assert_eq!(preds[1].class_id, 3);
        assert_eq!(preds[1].box_, bb(0.5, 0.5, 1.5, 2.5));

        assert_eq!(
            parse_predictions("img 0 0.9 1 2 3\n"),
            Err(DetectFileError::FieldCount {
                line: 1,
                expected: 7,
                found: 6
            })
        );
        assert_eq!(
            parse_predictions("ok 0 0.9 0 0 1 1\nimg x 0.9 1 2 3 4\n"),
            Err(DetectFileError::NumericParse {
                line: 2,
                field: "class_id",
                value: "x".to_string()
            })
        );
        assert!(matches!(
            parse_predictions("img 0 0.9 5 2 3 4\n"),
            Err(DetectFileError::BadRecord {
                line: 1,
                source: BoxError::Degenerate
            })
        ));
        assert!(matches!(
            parse_predictions("img 0 1.2 0 0 1 1\n"),
            Err(DetectFileError::BadRecord {
                line: 1,
                source: BoxError::BadConfidence(_)
            })
        ));
    }

    #[test]
    fn truth_file_round_trip_and_errors() {
        let text = "img1 0 10 20 30 40\nimg1 2 -5 -5 5 5\n";
        let truths = parse_ground_truth(text).unwrap();
        assert_eq!(truths.len(), 2);
        assert_eq!(truths[1].box_, bb(-5.0, -5.0, 5.0, 5.0));

        assert_eq!(
            parse_ground_truth("img 0 1 2 3 4 5\n"),
            Err(DetectFileError::FieldCount {
                line: 1,
                expected: 6,
                found: 7
            })
        );
        assert_eq!(
            parse_ground_truth("img 0 a 2 3 4\n"),
            Err(DetectFileError::NumericParse {
                line: 1,
                field: "x_min",
                value: "a".to_string()
            })
        );
    }

    // -- invariants ----------------------------------------------------------

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0.0f64..100.0, 0.0f64..100.0, 1.0f64..50.0, 1.0f64..50.0)
            .prop_map(|(x, y, w, h)| bb(x, y, x + w, y + h))
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<Prediction>, Vec<GroundTruth>)> {
        let preds = proptest::collection::vec(
            (0..3u8, 0..3i64, 0.0f64..1.0, arb_box()),
            0..40,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .map(|(img, class, conf, b)| pred(&format!("img{img}"), class, conf, b))
                .collect::<Vec<_>>()
        });
        let truths = proptest::collection::vec((0..3u8, 0..3i64, arb_box()), 0..25).prop_map(
            |rows| {
                rows.into_iter()
                    .map(|(img, class, b)| truth(&format!("img{img}"), class, b))
                    .collect::<Vec<_>>()
            },
        );
        (preds, truths)
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(iou(&a, &a), 1.0);
        }

        #[test]
        fn tp_plus_fn_counts_every_truth((preds, truths) in arb_instance(), thr in 0.1f64..0.9) {
            let out = match_detections(&preds, &truths, thr);
            prop_assert_eq!(out.true_positives + out.false_negatives, truths.len());
            prop_assert_eq!(out.true_positives + out.false_positives, preds.len());
        }

        #[test]
        fn confidence_rescaling_changes_nothing((preds, truths) in arb_instance(), thr in 0.1f64..0.9) {
            // Strictly increasing map into [0.25, 0.75].
            let rescaled: Vec<Prediction> = preds
                .iter()
                .map(|p| pred(&p.image_id, p.class_id, p.confidence / 2.0 + 0.25, p.box_))
                .collect();
            let a = evaluate(&preds, &truths, thr);
            let b = evaluate(&rescaled, &truths, thr);
            prop_assert_eq!(a.true_positives, b.true_positives);
            prop_assert_eq!(a.false_positives, b.false_positives);
            prop_assert_eq!(a.false_negatives, b.false_negatives);
            prop_assert_eq!(a.per_class_ap, b.per_class_ap);
            prop_assert_eq!(a.map, b.map);
        }

        #[test]
        fn ap_is_bounded_and_trailing_fp_never_helps(
            flags in proptest::collection::vec((0.2f64..1.0, any::<bool>()), 0..30),
            spare_truths in 0usize..10,
        ) {
            // A matcher never produces more TPs than ground truths.
            let tp_count = flags.iter().filter(|f| f.1).count();
            let truth_count = (tp_count + spare_truths).max(1);
            let ap = average_precision(&flags, truth_count);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ap));

            let mut extended = flags.clone();
            extended.push((0.1, false));
            let ap_after = average_precision(&extended, truth_count);
            prop_assert!(ap_after <= ap);
        }
    }
}
