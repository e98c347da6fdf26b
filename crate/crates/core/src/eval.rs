//! Scoring reports against planted truth, per-class tables, and run-to-run
//! overlap.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{class_report, ClassReport};
use crate::error::{Error, Result};
use crate::pipeline::DetectionReport;
use crate::synthgen::PlantedTruth;

/// Size and overlap of two sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetOverlap {
    pub set_a_size: usize,
    pub set_b_size: usize,
    pub intersection: usize,
    pub jaccard: f64,
    /// |A∩B| / min(|A|, |B|)
    pub overlap_coefficient: f64,
}

pub type StabilityResult = SetOverlap;

/// Two empty sets count as identical; one empty set against a non-empty one scores 0.
pub fn set_overlap<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> SetOverlap {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    let smaller = a.len().min(b.len());
    let (jaccard, overlap_coefficient) = if union == 0 {
        (1.0, 1.0)
    } else if smaller == 0 {
        (0.0, 0.0)
    } else {
        (inter as f64 / union as f64, inter as f64 / smaller as f64)
    };
    SetOverlap {
        set_a_size: a.len(),
        set_b_size: b.len(),
        intersection: inter,
        jaccard,
        overlap_coefficient,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalScore {
    pub flagged: usize,
    pub planted: usize,
    pub true_positives: usize,
    pub precision: f64,
    pub recall: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

fn check_universe(report: &DetectionReport, truth: &PlantedTruth) -> Result<()> {
    match report.nodes.iter().find(|n| truth.get(&n.node_id).is_none()) {
        Some(n) => Err(Error::Consistency(format!("node {} has no truth row", n.node_id))),
        None => Ok(()),
    }
}

/// Precision and recall of the flagged set against planted globals among the
/// report's scored nodes.
pub fn score_against_truth(report: &DetectionReport, truth: &PlantedTruth) -> Result<GlobalScore> {
    check_universe(report, truth)?;
    let (mut flagged, mut planted, mut tp) = (0, 0, 0);
    for n in &report.nodes {
        let is_planted = truth.get(&n.node_id).is_some_and(|r| r.planted_global);
        flagged += usize::from(n.is_global);
        planted += usize::from(is_planted);
        tp += usize::from(n.is_global && is_planted);
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(GlobalScore {
        flagged,
        planted,
        true_positives: tp,
        precision: ratio(tp, flagged),
        recall: ratio(tp, planted),
        precision_undefined: flagged == 0,
        recall_undefined: planted == 0,
    })
}

/// Per-category precision and recall over the report's classifier
/// categories. A planted global's true category is the catch-all class;
/// every other node's is its region.
pub fn score_classes_against_truth(report: &DetectionReport, truth: &PlantedTruth) -> Result<ClassReport> {
    check_universe(report, truth)?;
    let mut classes = report.classes.clone();
    classes.push(report.other_label.clone());
    let index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Consistency(format!("category {name} is not part of the report")))
    };
    let mut t = Vec::with_capacity(report.nodes.len());
    let mut p = Vec::with_capacity(report.nodes.len());
    for n in &report.nodes {
        let row = truth.get(&n.node_id).expect("checked above");
        let true_class = if row.planted_global { report.other_label.as_str() } else { row.region.as_str() };
        t.push(lookup(true_class)?);
        p.push(lookup(&n.predicted)?);
    }
    class_report(&classes, &t, &p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentageRow {
    pub class: String,
    pub labeled: usize,
    pub global: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentageTable {
    /// Sorted by percentage, highest first; ties by class name.
    pub rows: Vec<PercentageRow>,
    /// Unweighted mean over classes.
    pub mean: f64,
}

pub fn global_percentage(report: &DetectionReport) -> PercentageTable {
    let mut rows: Vec<PercentageRow> = report
        .per_class
        .iter()
        .map(|c| PercentageRow {
            class: c.class.clone(),
            labeled: c.labeled,
            global: c.global,
            percentage: if c.labeled == 0 { 0.0 } else { 100.0 * c.global as f64 / c.labeled as f64 },
        })
        .collect();
    rows.sort_by(|a, b| b.percentage.total_cmp(&a.percentage).then_with(|| a.class.cmp(&b.class)));
    let mean = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.percentage).sum::<f64>() / rows.len() as f64
    };
    PercentageTable { rows, mean }
}

impl PercentageTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush().map_err(|e| Error::io("<percentage csv>", e))?;
        Ok(())
    }
}

/// Population density per class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub density: BTreeMap<String, f64>,
}

impl DensityTable {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut density = BTreeMap::new();
        for (class, d) in entries {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Input(format!("density for {class} must be positive, got {d}")));
            }
            if density.insert(class.clone(), d).is_some() {
                return Err(Error::Input(format!("duplicate density row for {class}")));
            }
        }
        Ok(DensityTable { density })
    }

    /// Reads CSV with header `class,density`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            class: String,
            density: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<Row>, _>>()?;
        Self::new(rows.into_iter().map(|r| (r.class, r.density)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub class: String,
    pub global: usize,
    pub density: f64,
    pub ratio: f64,
}

/// Global count divided by population density, highest first; ties by class name.
pub fn density_ratio(report: &DetectionReport, density: &DensityTable) -> Result<Vec<DensityRow>> {
    let mut rows = report
        .per_class
        .iter()
        .map(|c| {
            let d = *density
                .density
                .get(&c.class)
                .ok_or_else(|| Error::Input(format!("no density given for class {}", c.class)))?;
            Ok(DensityRow {
                class: c.class.clone(),
                global: c.global,
                density: d,
                ratio: c.global as f64 / d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then_with(|| a.class.cmp(&b.class)));
    Ok(rows)
}

pub fn write_density_csv<W: Write>(rows: &[DensityRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| Error::io("<density csv>", e))?;
    Ok(())
}

/// Overlap of the flagged sets of two runs over the same scored nodes.
pub fn stability_overlap(a: &DetectionReport, b: &DetectionReport) -> Result<StabilityResult> {
    if a.universe() != b.universe() {
        return Err(Error::Consistency("runs scored different node sets".into()));
    }
    Ok(set_overlap(&a.global_ids(), &b.global_ids()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ModelKind;
    use crate::pipeline::{ClassSummary, NodeResult, RunMetadata, REPORT_SCHEMA_VERSION};
    use crate::synthgen::TruthRow;

    /// Report over nodes n0..n{len}; `flags` marks the flagged ones.
    fn report(class: &str, flags: &[bool]) -> DetectionReport {
        let nodes: Vec<NodeResult> = flags
            .iter()
            .enumerate()
            .map(|(i, &g)| NodeResult {
                node_id: format!("n{i}"),
                label: class.into(),
                predicted: if g { "OT".into() } else { class.into() },
                mhop: 1,
                is_global: g,
            })
            .collect();
        let global = flags.iter().filter(|&&f| f).count();
        DetectionReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scope: class.into(),
            other_label: "OT".into(),
            classes: vec![class.into()],
            per_class: vec![ClassSummary {
                class: class.into(),
                labeled: flags.len(),
                global,
                percentage: 100.0 * global as f64 / flags.len() as f64,
            }],
            total_labeled: flags.len(),
            total_global: global,
            nodes,
            training: Vec::new(),
            metadata: RunMetadata {
                config_hash: String::new(),
                seed: 0,
                classifier: ModelKind::RandomForest,
                one_vs_rest: false,
            },
            timings: Default::default(),
        }
    }

    fn truth(planted: &[bool]) -> PlantedTruth {
        PlantedTruth::new(
            planted
                .iter()
                .enumerate()
                .map(|(i, &p)| TruthRow {
                    node_id: format!("n{i}"),
                    region: "A".into(),
                    planted_global: p,
                    is_anchor: false,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn truth_scoring_cases() {
        let planted = [true, true, true, false, false, false, false, false, false, false];
        let flags = [true, true, false, true, true, false, false, false, false, false];
        let s = score_against_truth(&report("A", &flags), &truth(&planted)).unwrap();
        assert_eq!((s.flagged, s.planted, s.true_positives), (4, 3, 2));
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 2.0 / 3.0);

        let same = score_against_truth(&report("A", &planted), &truth(&planted)).unwrap();
        assert_eq!((same.precision, same.recall), (1.0, 1.0));

        let inverse: Vec<bool> = planted.iter().map(|p| !p).collect();
        let none = score_against_truth(&report("A", &inverse), &truth(&planted)).unwrap();
        assert_eq!((none.precision, none.recall), (0.0, 0.0));

        let short = truth(&planted[..5]);
        assert!(matches!(score_against_truth(&report("A", &flags), &short), Err(Error::Consistency(_))));
    }

    #[test]
    fn class_scoring_uses_catch_all_for_planted() {
        let planted = [true, false, false, false];
        let flags = [true, true, false, false];
        let r = score_classes_against_truth(&report("A", &flags), &truth(&planted)).unwrap();
        let ot = r.get("OT").unwrap();
        assert_eq!((ot.precision, ot.recall), (0.5, 1.0));
        let a = r.get("A").unwrap();
        assert_eq!((a.precision, a.recall), (1.0, 2.0 / 3.0));
    }

    #[test]
    fn percentages() {
        let mut flags = vec![false; 100];
        flags[..5].iter_mut().for_each(|f| *f = true);
        let t = global_percentage(&report("A", &flags));
        assert_eq!(t.rows[0].percentage, 5.0);
        let zero = global_percentage(&report("A", &[false; 10]));
        assert_eq!((zero.rows[0].percentage, zero.mean), (0.0, 0.0));
    }

    #[test]
    fn percentage_mean_is_unweighted() {
        let mut r = report("A", &[false]);
        r.per_class = [("A", 10, 1), ("B", 40, 10), ("C", 5, 0)]
            .iter()
            .map(|&(c, l, g)| ClassSummary { class: c.into(), labeled: l, global: g, percentage: 0.0 })
            .collect();
        let t = global_percentage(&r);
        assert_eq!(t.mean, (10.0 + 25.0 + 0.0) / 3.0);
        assert_eq!(t.rows.iter().map(|r| r.class.as_str()).collect::<Vec<_>>(), ["B", "A", "C"]);
    }

    fn counts_report(counts: &[(&str, usize)]) -> DetectionReport {
        let mut r = report("A", &[false]);
        r.per_class = counts
            .iter()
            .map(|&(c, g)| ClassSummary { class: c.into(), labeled: 100, global: g, percentage: g as f64 })
            .collect();
        r
    }

    #[test]
    fn density_ranking_and_ties() {
        let r = counts_report(&[("A", 10), ("B", 10)]);
        let d = DensityTable::new([("A".into(), 2.0), ("B".into(), 5.0)]).unwrap();
        let rows = density_ratio(&r, &d).unwrap();
        assert_eq!((rows[0].class.as_str(), rows[0].ratio), ("A", 5.0));
        let tie = DensityTable::new([("A".into(), 2.0), ("B".into(), 2.0)]).unwrap();
        assert_eq!(density_ratio(&counts_report(&[("B", 4), ("A", 4)]), &tie).unwrap()[0].class, "A");
        let missing = DensityTable::new([("A".into(), 2.0)]).unwrap();
        assert!(matches!(density_ratio(&r, &missing), Err(Error::Input(_))));
        assert!(DensityTable::new([("A".into(), 0.0)]).is_err());
    }

    #[test]
    fn density_five_class_recomputation() {
        let counts = [("AK", 3usize), ("CA", 120), ("NY", 95), ("TX", 80), ("WY", 2)];
        let csv = "class,density\nAK,1.3\nCA,251.3\nNY,420.0\nTX,108.4\nWY,5.8\n";
        let d = DensityTable::read_csv(csv.as_bytes()).unwrap();
        let rows = density_ratio(&counts_report(&counts), &d).unwrap();
        // Hand table: 3/1.3=2.308, 120/251.3=0.4775, 95/420=0.2262, 80/108.4=0.7380, 2/5.8=0.3448
        let order: Vec<&str> = rows.iter().map(|r| r.class.as_str()).collect();
        assert_eq!(order, ["AK", "TX", "CA", "WY", "NY"]);
        assert!((rows[1].ratio - 80.0 / 108.4).abs() < 1e-12);
    }

    #[test]
    fn overlap_arithmetic() {
        let a: BTreeSet<u32> = (0..5).collect();
        let b: BTreeSet<u32> = (0..10).collect();
        let s = set_overlap(&a, &b);
        assert_eq!((s.overlap_coefficient, s.jaccard), (1.0, 0.5));
        assert_eq!(set_overlap(&b, &b).jaccard, 1.0);
        let e: BTreeSet<u32> = BTreeSet::new();
        assert_eq!(set_overlap(&e, &e).overlap_coefficient, 1.0);
        assert_eq!(set_overlap(&e, &a).overlap_coefficient, 0.0);
    }

    #[test]
    fn stability_is_symmetric_and_checks_universe() {
        let a = report("A", &[true, false, true, true]);
        let b = report("A", &[true, true, false, false]);
        assert_eq!(stability_overlap(&a, &b).unwrap().jaccard, stability_overlap(&b, &a).unwrap().jaccard);
        let c = report("A", &[true]);
        assert!(matches!(stability_overlap(&a, &c), Err(Error::Consistency(_))));
    }
}
