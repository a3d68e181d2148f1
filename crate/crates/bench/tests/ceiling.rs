use apartlearn::learner::Variant;
use apartlearn::oracle::{EqOracleConfig, OracleKind};
use apartlearn_bench::{run_experiment, ExperimentSpec, GeneratorParams, ModelSource, PolicyKind};

// run_experiment fails with CeilingExceeded when a successful strategic run
// spends more resets than reset_ceiling allows
#[test]
fn reset_ceiling_holds() {
    let models: Vec<ModelSource> = (0..12)
        .map(|i| {
            ModelSource::Random(GeneratorParams {
                n: [3, 8, 16, 30][i % 4],
                k: [2, 3, 5][i % 3],
                p: 2 + i % 2,
            })
        })
        .collect();
    for variant in [Variant::Plain, Variant::Ads] {
        for kind in [OracleKind::Exact, OracleKind::RandomWalk] {
            let spec = ExperimentSpec {
                models: models.clone(),
                variant,
                policy: PolicyKind::Strategic,
                oracle: EqOracleConfig {
                    kind,
                    ..Default::default()
                },
                max_output_queries: None,
                repeats: 2,
                seed: 11,
                record_events: false,
                timing: false,
            };
            let out = run_experiment(&spec).unwrap();
            assert!(out.iter().all(|o| o.row.success), "{variant:?} {kind:?}");
        }
    }
}
