// Hop-distance and neighbor-mix features on a small synthetic graph.

use globalness::features::{extract_features, FeatureConfig, RegionSet};
use globalness::synthgen::{generate, SynthConfig};

pub fn run_example() -> globalness::Result<()> {
    let out = generate(&SynthConfig {
        nodes_per_region: 40,
        anchor_degree: 6,
        ..SynthConfig::default()
    })?;
    let regions = RegionSet {
        classes: out.anchors().classes().into_iter().collect(),
        other: Some("OT".into()),
    };
    let m = extract_features(&out.graph, &out.labels, out.anchors(), &regions, &FeatureConfig::default())?;
    println!("{} rows x {} columns", m.len(), m.width());

    let mut csv = Vec::new();
    m.write_csv(&mut csv)?;
    for line in String::from_utf8_lossy(&csv).lines().take(4) {
        println!("{line}");
    }

    let mut by_mhop = std::collections::BTreeMap::<u32, usize>::new();
    for row in 0..m.len() {
        *by_mhop.entry(m.mhop(row)).or_default() += 1;
    }
    println!("mhop histogram: {by_mhop:?}");
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
