//! Shared fixtures for integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

pub fn two_bus_case() -> &'static str {
    "BASE_MVA 100.0\n\
     BUS\n1 345.0 slack\n2 345.0 pq\nEND\n\
     BRANCH\n1 1 2 0.0 0.1 0.0 1.0 250.0 line\nEND\n\
     GEN\n1 1 200.0 -100.0 100.0 1.0 5.0 0.0 0.2 300.0 0.05 0.5 50.0 0.5 3.0\nEND\n\
     LOAD\n1 2 100.0 0.0 0.5\nEND\n"
}

pub fn three_bus_chain_case() -> &'static str {
    "BASE_MVA 100.0\n\
     BUS\n1 138.0 slack\n2 138.0 pq\n3 138.0 pq\nEND\n\
     BRANCH\n1 1 2 0.01 0.1 0.0 1.0 200.0 line\n2 2 3 0.01 0.1 0.0 1.0 200.0 line\nEND\n\
     GEN\n1 1 50.0 -50.0 50.0 1.0 4.0 1.0 0.25 80.0 0.05 0.5 50.0 0.5 3.0\nEND\n\
     LOAD\n1 2 20.0 5.0 0.5\n2 3 25.0 5.0 0.5\nEND\n"
}

pub fn five_bus_star_case() -> &'static str {
    "BASE_MVA 100.0\n\
     BUS\n1 138.0 pq\n2 138.0 slack\n3 138.0 pv\n4 138.0 pq\n5 138.0 pq\nEND\n\
     BRANCH\n\
     1 1 2 0.01 0.1 0.0 1.0 200.0 line\n\
     2 1 3 0.01 0.1 0.0 1.0 200.0 line\n\
     3 1 4 0.01 0.1 0.0 1.0 200.0 line\n\
     4 1 5 0.01 0.1 0.0 1.0 200.0 line\nEND\n\
     GEN\n\
     1 2 40.0 -50.0 50.0 1.0 5.0 1.0 0.25 80.0 0.05 0.5 50.0 0.5 3.0\n\
     2 3 30.0 -50.0 50.0 1.0 4.0 1.0 0.25 60.0 0.05 0.5 50.0 0.5 3.0\nEND\n\
     LOAD\n1 4 30.0 6.0 0.5\n2 5 8.0 1.5 0.5\n3 1 30.0 6.0 0.5\nEND\n"
}

pub fn ieee39_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases/ieee39.case")
}

pub fn ieee39_solution_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/ieee39_solution.csv")
}

/// Frozen (bus, vm pu, va deg) rows of the 39-bus reference solution.
pub fn ieee39_solution() -> Vec<(usize, f64, f64)> {
    let text = std::fs::read_to_string(ieee39_solution_path()).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("bus"))
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect()
}
