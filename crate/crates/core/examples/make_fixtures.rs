//! Regenerates the archived counterexample fixtures under tests/fixtures/.
//!
//! The fixtures pin down violating instances found by the randomized
//! searches, shrunk toward small witnesses; the test suite re-verifies their
//! margins from the serialized matrices alone.
//!
//! Usage: cargo run -p rgl-core --example make_fixtures

use rgl_core::lab::{
    divergence_monotonicity_experiment, metric_monotonicity_experiment, operator_monotone_test,
    DivergenceKind, LabOptions, MonotoneFunction,
};

fn save(name: &str, ce: &impl serde::Serialize) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    std::fs::create_dir_all(dir).expect("create fixtures dir");
    let path = format!("{dir}/{name}.json");
    let json = serde_json::to_string_pretty(ce).expect("serialize");
    std::fs::write(&path, json).expect("write fixture");
    println!("wrote {path}");
}

fn main() {
    let opts = LabOptions {
        stop_early: true,
        ..LabOptions::default()
    };

    for beta in [-1.2, 2.2] {
        let report = operator_monotone_test(
            &MonotoneFunction::Kernel { beta },
            &[2],
            100_000,
            20_250_806,
            &opts,
        )
        .expect("kernel search");
        let ce = report.cells[0]
            .counterexample
            .clone()
            .expect("violation expected outside the monotone range");
        save(&format!("kernel_beta_{beta}"), &ce);
    }

    for alpha in [0.3, -0.5] {
        let report = metric_monotonicity_experiment(&[alpha], 2, 10_000, 20_250_806, &opts)
            .expect("metric search");
        let ce = report.cells[0]
            .counterexample
            .clone()
            .expect("violation expected outside the monotone region");
        save(&format!("metric_alpha_{alpha}"), &ce);
    }

    for (kind, tag) in [
        (DivergenceKind::Rescaled, "rescaled"),
        (DivergenceKind::Sandwiched, "sandwiched"),
    ] {
        for alpha in [0.3, -0.5] {
            let report =
                divergence_monotonicity_experiment(&[alpha], 2, 10_000, 20_250_806, kind, &opts)
                    .expect("divergence search");
            let ce = report.cells[0]
                .counterexample
                .clone()
                .expect("violation expected for this variant and alpha");
            save(&format!("divergence_{tag}_alpha_{alpha}"), &ce);
        }
    }
}
