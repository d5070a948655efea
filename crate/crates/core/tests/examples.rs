//! Every runnable example runs to completion; shipped scenario files are current.

#[allow(dead_code)]
mod eprb_correlations {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/eprb_correlations.rs"));
}

#[allow(dead_code)]
mod chsh {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/chsh.rs"));
}

#[allow(dead_code)]
mod frame_flip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/frame_flip.rs"));
}

#[allow(dead_code)]
mod order_invariance_sweep {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/order_invariance_sweep.rs"
    ));
}

#[allow(dead_code)]
mod no_signaling {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/no_signaling.rs"));
}

#[allow(dead_code)]
mod teleportation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/teleportation.rs"));
}

#[allow(dead_code)]
mod noncommuting_counterexample {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/noncommuting_counterexample.rs"
    ));
}

#[allow(dead_code)]
mod scenario_files {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_files.rs"));
}

#[test]
fn eprb_correlations_example_runs() {
    eprb_correlations::run_example().expect("eprb_correlations example should run");
}

#[test]
fn chsh_example_runs() {
    chsh::run_example().expect("chsh example should run");
}

#[test]
fn frame_flip_example_runs() {
    frame_flip::run_example().expect("frame_flip example should run");
}

#[test]
fn order_invariance_sweep_example_runs() {
    order_invariance_sweep::run_example().expect("order_invariance_sweep example should run");
}

#[test]
fn no_signaling_example_runs() {
    no_signaling::run_example().expect("no_signaling example should run");
}

#[test]
fn teleportation_example_runs() {
    teleportation::run_example().expect("teleportation example should run");
}

#[test]
fn noncommuting_counterexample_example_runs() {
    noncommuting_counterexample::run_example().expect("noncommuting_counterexample example should run");
}

#[test]
fn scenario_files_example_runs() {
    scenario_files::run_example().expect("scenario_files example should run");
}

#[test]
fn shipped_scenario_files_match_built_ins() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    for (file, text) in scenario_files::render() {
        let on_disk = std::fs::read_to_string(dir.join(file)).unwrap();
        assert!(
            on_disk == text,
            "{file} is stale; run `cargo run --example scenario_files -- --write`"
        );
    }
}
