// Polarized training sets under the tight and the loose threshold pairs.

use globalness::features::{extract_features, FeatureConfig, RegionSet};
use globalness::sampler::{select_biased, Provenance, SamplingConfig, SamplingPolicy};
use globalness::synthgen::{generate, SynthConfig};

pub fn run_example() -> globalness::Result<()> {
    let out = generate(&SynthConfig {
        regions: 6,
        nodes_per_region: 100,
        p_out: 0.0005,
        anchor_degree: 8,
        ..SynthConfig::default()
    })?;
    let targets: Vec<_> = ["R00", "R01"].iter().map(|n| out.labels.require_class(n)).collect::<Result<_, _>>()?;
    let anchors = out.anchors().restrict(&targets.iter().copied().collect());
    let regions = RegionSet {
        classes: targets.clone(),
        other: Some("OT".into()),
    };
    let features = extract_features(&out.graph, &out.labels, &anchors, &regions, &FeatureConfig::default())?;

    for (local, global) in [(1, 3), (2, 5)] {
        let cfg = SamplingConfig {
            local_threshold: local,
            global_threshold: global,
            max_per_class: None,
        };
        let policy = SamplingPolicy::new(targets.iter().copied(), cfg, 42);
        let set = select_biased(&features, &out.labels, &policy, "OT")?;
        println!(
            "thresholds ({local}, {global}): {} local rows, {} catch-all rows, per class {:?} {:?}",
            set.count(Provenance::Local),
            set.count(Provenance::Global),
            set.data.classes,
            set.class_counts()
        );
    }

    let capped = SamplingPolicy::new(
        targets.iter().copied(),
        SamplingConfig {
            max_per_class: Some(20),
            ..SamplingConfig::default()
        },
        42,
    );
    let set = select_biased(&features, &out.labels, &capped, "OT")?;
    println!("capped at 20 per class: {:?}", set.class_counts());
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
