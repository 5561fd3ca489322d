#[allow(dead_code)]
#[path = "../examples/train_network.rs"]
mod train_network;
#[allow(dead_code)]
#[path = "../examples/gradient_importance.rs"]
mod gradient_importance;
#[allow(dead_code)]
#[path = "../examples/surrogates.rs"]
mod surrogates;
#[allow(dead_code)]
#[path = "../examples/fdr_schedule.rs"]
mod fdr_schedule;
#[allow(dead_code)]
#[path = "../examples/csv_dataset.rs"]
mod csv_dataset;
#[allow(dead_code)]
#[path = "../examples/mnist_idx.rs"]
mod mnist_idx;
#[allow(dead_code)]
#[path = "../examples/elimination_rate.rs"]
mod elimination_rate;

#[test]
fn train_network_runs() {
    train_network::main().unwrap();
}

#[test]
fn gradient_importance_runs() {
    gradient_importance::main().unwrap();
}

#[test]
fn surrogates_runs() {
    surrogates::main().unwrap();
}

#[test]
fn fdr_schedule_runs() {
    fdr_schedule::main().unwrap();
}

#[test]
fn csv_dataset_runs() {
    csv_dataset::main().unwrap();
}

#[test]
fn mnist_idx_runs() {
    mnist_idx::main().unwrap();
}

#[test]
fn elimination_rate_runs() {
    elimination_rate::main().unwrap();
}
