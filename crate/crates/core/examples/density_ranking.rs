// Rank classes by flagged count per unit of population density.

use globalness::classifiers::TrainConfig;
use globalness::eval::{density_ratio, global_percentage, DensityTable};
use globalness::features::FeatureConfig;
use globalness::pipeline::{run_one_vs_rest, Hypothesis};
use globalness::sampler::SamplingConfig;
use globalness::synthgen::{generate, SynthConfig};

const DENSITY: &str = "\
class,density
AK,1.3
NY,420.0
TX,108.4
WY,5.8
";

pub fn run_example() -> globalness::Result<()> {
    let out = generate(&SynthConfig {
        regions: 4,
        planted_per_region: Some(vec![6, 20, 12, 4]),
        region_names: Some(vec!["AK".into(), "NY".into(), "TX".into(), "WY".into()]),
        ..SynthConfig::default()
    })?;
    let hyp = Hypothesis::new(
        "states",
        out.anchors().classes(),
        "OT",
        out.anchors().clone(),
        SamplingConfig::default(),
        TrainConfig::default(),
        FeatureConfig::default(),
        42,
    );
    let report = run_one_vs_rest(&out.graph, &out.labels, &hyp)?.report;
    let table = global_percentage(&report);
    println!("by percentage:");
    for r in &table.rows {
        println!("  {}\t{}\t{:.2}%", r.class, r.global, r.percentage);
    }
    println!("by global count / density:");
    for r in density_ratio(&report, &DensityTable::read_csv(DENSITY.as_bytes())?)? {
        println!("  {}\t{}\t{:>6}\t{:.4}", r.class, r.global, r.density, r.ratio);
    }
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
