//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use globalness::classifiers::{train, ClassifierModel, Dataset, ModelKind, TrainConfig};
use globalness::eval::{score_against_truth, score_classes_against_truth, stability_overlap};
use globalness::features::{compute_sdv, compute_snp, AnchorSet, FeatureConfig, RegionSet};
use globalness::graph::{DirectedGraph, NodeId};
use globalness::labels::{ClassId, LabelTable};
use globalness::pipeline::{definition_oracle, run_detection, run_one_vs_rest, DefinitionParams, DistanceRule, Hypothesis};
use globalness::sampler::{SamplingConfig, SamplingPolicy};
use globalness::synthgen::{generate, SynthConfig, SynthOutput};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: u32 = u32::MAX;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: u32, m: usize) -> DirectedGraph {
    let ids = (0..n).map(|i| format!("v{i:02}")).collect();
    let edges: Vec<(u32, u32)> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    DirectedGraph::from_index_edges(ids, edges)
}

/// dist[i][j] = fewest edges on a directed path i -> j.
fn all_pairs(g: &DirectedGraph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (a, b) in g.edges() {
        d[a.index()][b.index()] = d[a.index()][b.index()].min(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != INF && d[k][j] != INF {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
    }
    d
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    for round in 0..50 {
        let n = rng.gen_range(2..=60);
        let m = rng.gen_range(0..=3 * n as usize);
        let g = random_graph(&mut rng, n, m);
        let k = rng.gen_range(1..=4.min(n as usize));
        let picks = rand::seq::index::sample(&mut rng, n as usize, k);
        let anchors = AnchorSet::new(&g, picks.iter().map(|i| (NodeId(i as u32), ClassId(0))));
        let cap = if round % 5 == 0 { 3 } else { 15 };
        let surrogate = cap + 1;
        let table = compute_sdv(&g, &anchors, cap, surrogate).unwrap();
        let d = all_pairs(&g);
        let expect = |x: u32| if x <= cap { x } else { surrogate };
        for v in g.nodes() {
            let row = table.row(v);
            let mut raw_min = surrogate;
            for (j, a) in anchors.anchors().iter().enumerate() {
                let inward = d[v.index()][a.node.index()];
                let outward = d[a.node.index()][v.index()];
                if row.ihop[j] != expect(inward) || row.ohop[j] != expect(outward) {
                    return outcome(false, format!("graph {round}: node {v} anchor {} mismatch", a.id));
                }
                raw_min = raw_min.min(expect(inward)).min(expect(outward));
                checked += 2;
            }
            if row.mhop != raw_min {
                return outcome(false, format!("graph {round}: mhop of {v} is {} not {raw_min}", row.mhop));
            }
        }
    }
    outcome(true, format!("{checked} entries over 50 graphs match"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut seen = 0usize;
    let mut zero_cases = 0usize;
    while seen < 1000 {
        let n = 100;
        let m = rng.gen_range(50..400);
        let g = random_graph(&mut rng, n, m);
        let names: Vec<Option<String>> = (0..n)
            .map(|_| {
                let k = rng.gen_range(0..5);
                (k < 4).then(|| format!("c{k}"))
            })
            .collect();
        let labels = LabelTable::from_names(&names).unwrap();
        let present: Vec<ClassId> = (0..labels.class_count() as u32).map(ClassId).collect();
        let regions = RegionSet {
            classes: present.iter().copied().take(2).collect(),
            other: Some("OT".into()),
        };
        let snp = compute_snp(&g, &labels, &regions).unwrap();
        for v in g.nodes().filter(|&v| labels.class_of(v).is_some()) {
            if seen == 1000 {
                break;
            }
            seen += 1;
            let row = snp.row(v);
            let labeled_in = g.predecessors(v).iter().filter(|&&u| labels.class_of(NodeId(u)).is_some()).count();
            let labeled_out = g.successors(v).iter().filter(|&&u| labels.class_of(NodeId(u)).is_some()).count();
            for (vec, degree) in [(&row.inp, labeled_in), (&row.onp, labeled_out)] {
                let sum: f64 = vec.iter().sum();
                let all_zero = vec.iter().all(|&x| x == 0.0);
                if all_zero != (degree == 0) {
                    return outcome(false, format!("node {v}: zero vector vs labeled degree {degree}"));
                }
                if !all_zero && (sum - 1.0).abs() > 1e-9 {
                    return outcome(false, format!("node {v}: sum {sum}"));
                }
                zero_cases += usize::from(all_zero);
            }
        }
    }
    outcome(true, format!("1000 nodes, {zero_cases} all-zero vectors, all at zero labeled degree"))
}

/// Independent reading of the definition: every Δ is summed over the other classes directly.
#[allow(clippy::too_many_arguments)]
fn literal_definition(
    g: &DirectedGraph,
    labels: &LabelTable,
    anchors: &AnchorSet,
    classes: &[ClassId],
    weights: &[f64],
    epsilon: f64,
    k_balance: usize,
    rule: DistanceRule,
    cap: u32,
) -> BTreeSet<NodeId> {
    let dist = all_pairs(g);
    let clip = |x: u32| if x <= cap { x } else { cap + 1 };
    let mut out = BTreeSet::new();
    for p in g.nodes() {
        let Some(own) = labels.class_of(p) else { continue };
        if !classes.contains(&own) {
            continue;
        }
        let d: Vec<f64> = classes
            .iter()
            .map(|&c| {
                let mut best = cap + 1;
                for a in anchors.anchors().iter().filter(|a| a.class == c) {
                    let inward = clip(dist[p.index()][a.node.index()]);
                    let outward = clip(dist[a.node.index()][p.index()]);
                    let h = match rule {
                        DistanceRule::MinHop => inward.min(outward),
                        DistanceRule::InwardHop => inward,
                        DistanceRule::OutwardHop => outward,
                    };
                    best = best.min(h);
                }
                f64::from(best)
            })
            .collect();
        let mut delta = Vec::new();
        for k in 0..classes.len() {
            let mut s = 0.0;
            for c in 0..classes.len() {
                if c != k {
                    s += weights[c] * d[c];
                }
            }
            delta.push(s);
        }
        let min = delta.iter().copied().fold(f64::INFINITY, f64::min);
        let count = delta.iter().filter(|&&x| x <= min + epsilon).count();
        if count >= k_balance {
            out.insert(p);
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let names = ["A", "B", "C"];
    let mut flagged = 0;
    for round in 0..20 {
        let n = 30u32;
        let m = rng.gen_range(30..90);
        let g = random_graph(&mut rng, n, m);
        let mut assign: Vec<Option<&str>> = (0..n).map(|_| Some(names[rng.gen_range(0..3)])).collect();
        for slot in assign.iter_mut().take(3) {
            *slot = None;
        }
        // Nodes 3..9 are anchors, two per class.
        for (i, slot) in assign.iter_mut().enumerate().skip(3).take(6) {
            *slot = Some(names[(i - 3) / 2]);
        }
        let labels = LabelTable::from_names(&assign).unwrap();
        let anchors = AnchorSet::new(&g, (3..9).map(|i| (NodeId(i), ClassId((i - 3) / 2))));
        let weight_choices = [0.5, 1.0, 1.5, 2.0];
        let weights: Vec<f64> = (0..3).map(|_| *weight_choices.choose(&mut rng).unwrap()).collect();
        let epsilon = [0.0, 0.5, 1.0, 2.0][round % 4];
        let k_balance = if round % 2 == 0 { 2 } else { 3 };
        let rule = [DistanceRule::MinHop, DistanceRule::InwardHop, DistanceRule::OutwardHop][round % 3];
        let cap = if round % 5 == 4 { 2 } else { 15 };
        let params = DefinitionParams {
            weights: names.iter().zip(&weights).map(|(n, &w)| ((*n).to_owned(), w)).collect(),
            epsilon,
            k_balance: Some(k_balance),
            distance: rule,
            classes: Some(names.iter().map(|s| (*s).to_owned()).collect()),
            cap,
        };
        let got = definition_oracle(&g, &labels, &anchors, &params).unwrap();
        let classes = [ClassId(0), ClassId(1), ClassId(2)];
        let want = literal_definition(&g, &labels, &anchors, &classes, &weights, epsilon, k_balance, rule, cap);
        if got != want {
            return outcome(false, format!("graph {round}: {} vs {} flagged", got.len(), want.len()));
        }
        flagged += got.len();
    }
    outcome(true, format!("20 graphs equal, {flagged} global nodes in total"))
}

fn state_config(seed: u64) -> SynthConfig {
    SynthConfig {
        regions: 3,
        nodes_per_region: 200,
        p_in: 0.05,
        p_out: 0.002,
        global_fraction: 0.05,
        global_spread: 0.02,
        planted_per_region: None,
        anchor_degree: 20,
        anchor_families: 1,
        region_names: None,
        rng_seed: seed,
    }
}

fn criterion_4() -> Outcome {
    let cfg = state_config(42);
    let out = generate(&cfg).unwrap();
    if out.truth.planted_globals().count() != 30 {
        return outcome(false, "generator did not plant 10 globals per region");
    }
    let targets = out.anchors().classes();
    let hyp = Hypothesis::new(
        "midwest",
        targets,
        "OT",
        out.anchors().clone(),
        SamplingConfig {
            local_threshold: 1,
            global_threshold: 3,
            max_per_class: None,
        },
        TrainConfig::with_kind(ModelKind::RandomForest),
        FeatureConfig::default(),
        42,
    );
    let report = run_one_vs_rest(&out.graph, &out.labels, &hyp).unwrap().report;
    let s = score_against_truth(&report, &out.truth).unwrap();
    outcome(
        s.precision >= 0.90 && s.recall >= 0.85,
        format!("precision {:.3} (>= 0.90) recall {:.3} (>= 0.85)", s.precision, s.recall),
    )
}

fn country_data(seed: u64) -> SynthOutput {
    generate(&SynthConfig {
        regions: 10,
        nodes_per_region: 150,
        p_in: 0.05,
        p_out: 0.0001,
        global_fraction: 0.05,
        global_spread: 0.005,
        planted_per_region: None,
        anchor_degree: 5,
        anchor_families: 2,
        region_names: None,
        rng_seed: seed,
    })
    .unwrap()
}

fn country_hypothesis(out: &SynthOutput, family: usize, seed: u64) -> Hypothesis {
    let targets: BTreeSet<ClassId> = ["R00", "R01"].iter().map(|n| out.labels.class_id(n).unwrap()).collect();
    let anchors = out.anchor_families[family].restrict(&targets);
    Hypothesis::new(
        "country",
        targets,
        "OT",
        anchors,
        SamplingConfig {
            local_threshold: 2,
            global_threshold: 5,
            max_per_class: None,
        },
        TrainConfig::with_kind(ModelKind::RandomForest),
        FeatureConfig::default(),
        seed,
    )
}

fn criterion_5() -> Outcome {
    let seeds = [42, 43, 44];
    let (mut p, mut r) = (0.0, 0.0);
    for seed in seeds {
        let out = country_data(seed);
        let report = run_detection(&out.graph, &out.labels, &country_hypothesis(&out, 0, seed)).unwrap();
        let c = score_classes_against_truth(&report, &out.truth).unwrap();
        p += c.macro_precision / seeds.len() as f64;
        r += c.macro_recall / seeds.len() as f64;
    }
    outcome(
        p >= 0.85 && r >= 0.80,
        format!("mean macro precision {p:.3} (>= 0.85) recall {r:.3} (>= 0.80) over seeds 42-44"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = BTreeMap::from([("sampler", 0), ("epsilon", 0), ("k_balance", 0), ("mhop", 0)]);
    for _ in 0..100 {
        let n = rng.gen_range(10..50u32);
        let m = rng.gen_range(n as usize..3 * n as usize);
        let g = random_graph(&mut rng, n, m);
        let assign: Vec<Option<String>> = (0..n).map(|i| Some(format!("c{}", i % 3))).collect();
        let labels = LabelTable::from_names(&assign).unwrap();
        let anchors = AnchorSet::new(&g, (0..3).map(|i| (NodeId(i), ClassId(i))));
        let table = compute_sdv(&g, &anchors, 15, 16).unwrap();

        let local_thr = rng.gen_range(0..4);
        let global_thr = local_thr + rng.gen_range(2..5);
        let policy = |l, h| {
            SamplingPolicy::new(
                [ClassId(0), ClassId(1)],
                SamplingConfig {
                    local_threshold: l,
                    global_threshold: h,
                    max_per_class: None,
                },
                0,
            )
        };
        let base = policy(local_thr, global_thr);
        let looser_local = policy(local_thr + 1, global_thr);
        let stricter_global = policy(local_thr, global_thr + 1);
        for v in g.nodes() {
            let (c, m) = (labels.class_of(v).unwrap(), table.mhop(v));
            if base.admits_local(c, m) && !looser_local.admits_local(c, m) {
                *violations.get_mut("sampler").unwrap() += 1;
            }
            if stricter_global.admits_global(c, m) && !base.admits_global(c, m) {
                *violations.get_mut("sampler").unwrap() += 1;
            }
        }

        let eps = f64::from(rng.gen_range(0..4u8));
        let params = |epsilon, k| DefinitionParams {
            epsilon,
            k_balance: Some(k),
            ..DefinitionParams::default()
        };
        let at = definition_oracle(&g, &labels, &anchors, &params(eps, 2)).unwrap();
        let wider = definition_oracle(&g, &labels, &anchors, &params(eps + 1.0, 2)).unwrap();
        if !at.is_subset(&wider) {
            *violations.get_mut("epsilon").unwrap() += 1;
        }
        let stricter = definition_oracle(&g, &labels, &anchors, &params(eps, 3)).unwrap();
        if !stricter.is_subset(&at) {
            *violations.get_mut("k_balance").unwrap() += 1;
        }

        let (a, b) = (NodeId(rng.gen_range(0..n)), NodeId(rng.gen_range(0..n)));
        let added = compute_sdv(&g.with_edge(a, b), &anchors, 15, 16).unwrap();
        if g.nodes().any(|v| added.mhop(v) > table.mhop(v)) {
            *violations.get_mut("mhop").unwrap() += 1;
        }
    }
    let total: usize = violations.values().sum();
    outcome(total == 0, format!("100 perturbations each, violations {violations:?}"))
}

fn criterion_7() -> Outcome {
    let out = country_data(42);
    let a = run_detection(&out.graph, &out.labels, &country_hypothesis(&out, 0, 42)).unwrap();
    let b = run_detection(&out.graph, &out.labels, &country_hypothesis(&out, 1, 42)).unwrap();
    let s = stability_overlap(&a, &b).unwrap();
    outcome(
        s.overlap_coefficient >= 0.5,
        format!(
            "overlap coefficient {:.3} (>= 0.5), jaccard {:.3}, flagged {} vs {}",
            s.overlap_coefficient, s.jaccard, s.set_a_size, s.set_b_size
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_globalness"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&status.stderr).into_owned())
    }
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let config = r#"{
        "seed": 42,
        "paths": {"output_dir": "run"},
        "synth": {"regions": 3, "nodes_per_region": 200, "anchor_degree": 20},
        "hypothesis": {"scope_name": "midwest", "target_classes": ["R00", "R01", "R02"], "one_vs_rest": true}
    }"#;
    fs::write(dir.join("config.json"), config).unwrap();
    if let Err(e) = run_cli(dir, &["--config", "config.json", "gen"]) {
        return outcome(false, format!("gen failed: {e}"));
    }
    let mut outputs = Vec::new();
    for threads in ["1", "4", "1", "4"] {
        if let Err(e) = run_cli(dir, &["--config", "config.json", "--threads", threads, "detect"]) {
            return outcome(false, format!("detect failed: {e}"));
        }
        outputs.push(fs::read(dir.join("run/nodes.csv")).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(same, format!("4 detect runs (threads 1, 4, 1, 4), {} byte CSVs identical: {same}", outputs[0].len()))
}

fn blobs(rng: &mut ChaCha8Rng, per_class: usize, width: usize) -> Dataset {
    let classes = ["a", "b", "c"];
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for c in 0..classes.len() {
        for _ in 0..per_class {
            for j in 0..width {
                let centre = if j % classes.len() == c { 3.0 } else { 0.0 };
                x.push(centre + rng.gen_range(-1.5..1.5));
            }
            y.push(c);
        }
    }
    Dataset::new(width, x, y, classes.iter().map(|s| (*s).to_owned()).collect()).unwrap()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let width = 6;
    let train_set = blobs(&mut rng, 60, width);
    let fixture = blobs(&mut rng, 167, width);
    let fixture_rows: Vec<&[f64]> = (0..500).map(|i| fixture.row(i)).collect();
    let mut notes = Vec::new();
    for kind in [ModelKind::NaiveBayes, ModelKind::RandomForest, ModelKind::Adaboost] {
        let cfg = TrainConfig {
            rng_seed: 9,
            ..TrainConfig::with_kind(kind)
        };
        let model = train(&train_set, &cfg).unwrap();
        for _ in 0..10_000 {
            let row: Vec<f64> = (0..width).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let p = model.predict_proba(&row).unwrap();
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return outcome(false, format!("{kind}: probabilities {p:?}"));
            }
        }
        let restored = ClassifierModel::from_json(&model.to_json().unwrap()).unwrap();
        for row in &fixture_rows {
            let (a, b) = (model.predict_proba(row).unwrap(), restored.predict_proba(row).unwrap());
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            if bits(&a) != bits(&b) {
                return outcome(false, format!("{kind}: round trip changed a prediction"));
            }
        }
        notes.push(kind.to_string());
    }
    outcome(true, format!("{}: 10000 inputs normalized, 500 fixture rows survive round trip", notes.join(", ")))
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, Duration); 9] = [
        (1, "sdv matches all-pairs shortest paths", criterion_1, Duration::from_secs(5)),
        (2, "snp vectors normalized", criterion_2, Duration::MAX),
        (3, "definition oracle matches literal formula", criterion_3, Duration::MAX),
        (4, "state-wise planted globals recovered", criterion_4, Duration::from_secs(60)),
        (5, "country-wise macro precision and recall", criterion_5, Duration::from_secs(180)),
        (6, "monotonicity suite", criterion_6, Duration::MAX),
        (7, "anchor family stability", criterion_7, Duration::MAX),
        (8, "detect output independent of threads", criterion_8, Duration::MAX),
        (9, "classifier probabilities and round trip", criterion_9, Duration::MAX),
    ];
    let mut failed = 0;
    for (n, name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let in_time = took < limit;
        let pass = result.pass && in_time;
        failed += usize::from(!pass);
        let limit_note = if limit == Duration::MAX { String::new() } else { format!(", limit {limit:?}") };
        println!(
            "criterion {n}: {} {name}: {} [{took:.2?}{limit_note}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
