// Same graph, two independently drawn anchor families: how much do the flagged sets agree?

use std::collections::BTreeSet;

use globalness::classifiers::TrainConfig;
use globalness::eval::stability_overlap;
use globalness::features::FeatureConfig;
use globalness::pipeline::{run_detection, Hypothesis};
use globalness::sampler::SamplingConfig;
use globalness::synthgen::{generate, SynthConfig};

pub fn run_example() -> globalness::Result<()> {
    let out = generate(&SynthConfig {
        regions: 10,
        nodes_per_region: 150,
        p_out: 0.0001,
        global_spread: 0.005,
        anchor_degree: 5,
        anchor_families: 2,
        ..SynthConfig::default()
    })?;
    let targets: BTreeSet<_> = ["R00", "R01"].iter().map(|n| out.labels.require_class(n)).collect::<Result<_, _>>()?;
    let sampling = SamplingConfig {
        local_threshold: 2,
        global_threshold: 5,
        max_per_class: None,
    };
    let mut reports = Vec::new();
    for (f, family) in out.anchor_families.iter().enumerate() {
        let anchors = family.restrict(&targets);
        let ids: Vec<&str> = anchors.anchors().iter().map(|a| a.id.as_str()).collect();
        let hyp = Hypothesis::new(
            "country",
            targets.clone(),
            "OT",
            anchors.clone(),
            sampling,
            TrainConfig::default(),
            FeatureConfig::default(),
            42,
        );
        let report = run_detection(&out.graph, &out.labels, &hyp)?;
        println!("family {f} {ids:?}: {} flagged", report.total_global);
        reports.push(report);
    }
    let s = stability_overlap(&reports[0], &reports[1])?;
    println!(
        "shared {} of {} / {}: jaccard {:.3}, overlap coefficient {:.3}",
        s.intersection, s.set_a_size, s.set_b_size, s.jaccard, s.overlap_coefficient
    );
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
