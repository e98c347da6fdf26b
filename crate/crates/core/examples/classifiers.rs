// Train the three model kinds on one training set and score them on another seed's.

use globalness::classifiers::{evaluate, train, ClassifierModel, ModelKind, TrainConfig};
use globalness::features::FeatureConfig;
use globalness::pipeline::{build_training_set, Hypothesis};
use globalness::sampler::SamplingConfig;
use globalness::synthgen::{generate, SynthConfig};

fn training_rows(seed: u64) -> globalness::Result<globalness::classifiers::Dataset> {
    let out = generate(&SynthConfig {
        regions: 4,
        nodes_per_region: 120,
        anchor_degree: 12,
        rng_seed: seed,
        ..SynthConfig::default()
    })?;
    let targets: Vec<_> = ["R00", "R01"].iter().map(|n| out.labels.require_class(n)).collect::<Result<_, _>>()?;
    let anchors = out.anchors().restrict(&targets.iter().copied().collect());
    let hyp = Hypothesis::new(
        "pair",
        targets,
        "OT",
        anchors,
        SamplingConfig::default(),
        TrainConfig::default(),
        FeatureConfig::default(),
        seed,
    );
    Ok(build_training_set(&out.graph, &out.labels, &hyp)?.data)
}

pub fn run_example() -> globalness::Result<()> {
    let fit_on = training_rows(1)?;
    let score_on = training_rows(2)?;
    println!("{} training rows, {} held-out rows, classes {:?}", fit_on.len(), score_on.len(), fit_on.classes);
    for kind in [ModelKind::NaiveBayes, ModelKind::RandomForest, ModelKind::Adaboost] {
        let cfg = TrainConfig {
            trees: 50,
            rounds: 40,
            rng_seed: 7,
            ..TrainConfig::with_kind(kind)
        };
        let model = train(&fit_on, &cfg)?;
        let report = evaluate(&model, &score_on)?;
        let restored = ClassifierModel::from_json(&model.to_json()?)?;
        let same = (0..score_on.len()).all(|i| {
            model.predict_proba(score_on.row(i)).ok() == restored.predict_proba(score_on.row(i)).ok()
        });
        println!(
            "{kind:>13}: accuracy {:.3}, macro precision {:.3}, macro recall {:.3}, json round trip exact: {same}",
            report.accuracy, report.macro_precision, report.macro_recall
        );
    }
    Ok(())
}

fn main() -> globalness::Result<()> {
    run_example()
}
