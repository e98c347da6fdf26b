// Three regions, one target-vs-rest classifier per region, scored against planted truth.

use globalness::classifiers::TrainConfig;
use globalness::eval::{global_percentage, score_against_truth};
use globalness::features::FeatureConfig;
use globalness::pipeline::{run_one_vs_rest, Hypothesis};
use globalness::sampler::SamplingConfig;
use globalness::synthgen::{generate, SynthConfig};

pub fn run_example() -> globalness::Result<()> {
    let cfg = SynthConfig {
        region_names: Some(vec!["IL".into(), "MI".into(), "WI".into()]),
        ..SynthConfig::default()
    };
    let out = generate(&cfg)?;
    let hyp = Hypothesis::new(
        "midwest",
        out.anchors().classes(),
        "OT",
        out.anchors().clone(),
        SamplingConfig {
            local_threshold: 1,
            global_threshold: 3,
            max_per_class: None,
        },
        TrainConfig::default(),
        FeatureConfig::default(),
        cfg.rng_seed,
    );
    let outcome = run_one_vs_rest(&out.graph, &out.labels, &hyp)?;
    let report = &outcome.report;
    for t in &report.training {
        println!("{}: trained on {:?} rows of {:?}", t.scope, t.rows_per_class, t.classes);
    }
    let score = score_against_truth(report, &out.truth)?;
    println!(
        "flagged {} of {} planted: precision {:.3} recall {:.3}",
        score.flagged, score.planted, score.precision, score.recall
    );
    let table = global_percentage(report);
    for row in &table.rows {
        println!("{}\t{:.2}% global", row.class, row.percentage);
    }
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
