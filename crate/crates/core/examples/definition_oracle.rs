// The formal definition evaluated directly, across tolerance and balance settings,
// and compared with the classifier's flags.

use std::collections::BTreeSet;

use globalness::classifiers::TrainConfig;
use globalness::features::FeatureConfig;
use globalness::pipeline::{compare_detectors, definition_oracle, run_detection, DefinitionParams, Hypothesis};
use globalness::sampler::SamplingConfig;
use globalness::synthgen::{generate, SynthConfig};

pub fn run_example() -> globalness::Result<()> {
    let out = generate(&SynthConfig {
        regions: 4,
        nodes_per_region: 150,
        anchor_degree: 15,
        ..SynthConfig::default()
    })?;
    let scope = ["R00", "R01", "R02"];
    let targets: BTreeSet<_> = scope.iter().map(|n| out.labels.require_class(n)).collect::<Result<_, _>>()?;
    let planted: BTreeSet<&str> = out
        .truth
        .planted_globals()
        .filter(|r| scope.contains(&r.region.as_str()))
        .map(|r| r.node_id.as_str())
        .collect();

    println!("epsilon k  flagged  planted-hit");
    for epsilon in [0.0, 1.0, 2.0] {
        for k in [2, 3] {
            let params = DefinitionParams {
                epsilon,
                k_balance: Some(k),
                classes: Some(scope.iter().map(|s| (*s).to_owned()).collect()),
                ..DefinitionParams::default()
            };
            let set = definition_oracle(&out.graph, &out.labels, out.anchors(), &params)?;
            let hit = set.iter().filter(|&&v| planted.contains(out.graph.id(v))).count();
            println!("{epsilon:>7} {k}  {:>7}  {hit:>4}/{}", set.len(), planted.len());
        }
    }

    let hyp = Hypothesis::new(
        "three",
        targets.clone(),
        "OT",
        out.anchors().restrict(&targets),
        SamplingConfig::default(),
        TrainConfig::default(),
        FeatureConfig::default(),
        42,
    );
    let report = run_detection(&out.graph, &out.labels, &hyp)?;
    let params = DefinitionParams {
        epsilon: 1.0,
        k_balance: Some(2),
        classes: Some(scope.iter().map(|s| (*s).to_owned()).collect()),
        ..DefinitionParams::default()
    };
    let oracle = definition_oracle(&out.graph, &out.labels, out.anchors(), &params)?;
    let agreement = compare_detectors(&report, &oracle, &out.graph)?;
    println!(
        "classifier vs definition (epsilon 1, k 2): jaccard {:.3}, overlap {:.3}",
        agreement.jaccard, agreement.overlap_coefficient
    );
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
