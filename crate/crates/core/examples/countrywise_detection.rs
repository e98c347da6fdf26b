// Two in-scope regions against eight others folded into one catch-all class.

use std::collections::BTreeSet;

use globalness::classifiers::TrainConfig;
use globalness::eval::{score_against_truth, score_classes_against_truth};
use globalness::features::FeatureConfig;
use globalness::pipeline::{run_detection, Hypothesis};
use globalness::sampler::SamplingConfig;
use globalness::synthgen::{generate, SynthConfig};

pub fn run_example() -> globalness::Result<()> {
    let cfg = SynthConfig {
        regions: 10,
        nodes_per_region: 150,
        p_in: 0.05,
        p_out: 0.0001,
        global_fraction: 0.05,
        global_spread: 0.005,
        anchor_degree: 5,
        ..SynthConfig::default()
    };
    let out = generate(&cfg)?;
    let targets: BTreeSet<_> = ["R00", "R01"].iter().map(|n| out.labels.require_class(n)).collect::<Result<_, _>>()?;
    let hyp = Hypothesis::new(
        "country",
        targets.clone(),
        "OT",
        out.anchors().restrict(&targets),
        SamplingConfig {
            local_threshold: 2,
            global_threshold: 5,
            max_per_class: None,
        },
        TrainConfig::default(),
        FeatureConfig::default(),
        cfg.rng_seed,
    );
    let report = run_detection(&out.graph, &out.labels, &hyp)?;
    let per_class = score_classes_against_truth(&report, &out.truth)?;
    for c in &per_class.classes {
        println!(
            "{:>4}: support {:>3} predicted {:>3} precision {:.3} recall {:.3}",
            c.class, c.support, c.predicted, c.precision, c.recall
        );
    }
    println!("macro precision {:.3} recall {:.3}", per_class.macro_precision, per_class.macro_recall);
    let g = score_against_truth(&report, &out.truth)?;
    println!("flagged globals: precision {:.3} recall {:.3}", g.precision, g.recall);
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
