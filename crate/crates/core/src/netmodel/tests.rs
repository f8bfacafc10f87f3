use super::*;

pub(crate) fn two_bus_case() -> &'static str {
    "BASE_MVA 100.0\n\
     BUS\n1 345.0 slack\n2 345.0 pq\nEND\n\
     BRANCH\n1 1 2 0.0 0.1 0.0 1.0 250.0 line\nEND\n\
     GEN\n1 1 200.0 -100.0 100.0 1.0 5.0 0.0 0.2 300.0 0.05 0.5 50.0 0.5 3.0\nEND\n\
     LOAD\n1 2 100.0 0.0 0.5\nEND\n"
}

pub(crate) fn three_bus_chain_case() -> &'static str {
    "BASE_MVA 100.0\n\
     BUS\n1 138.0 slack\n2 138.0 pq\n3 138.0 pq\nEND\n\
     BRANCH\n1 1 2 0.01 0.1 0.0 1.0 200.0 line\n2 2 3 0.01 0.1 0.0 1.0 200.0 line\nEND\n\
     GEN\n1 1 50.0 -50.0 50.0 1.0 4.0 1.0 0.25 80.0 0.05 0.5 50.0 0.5 3.0\nEND\n\
     LOAD\n1 2 20.0 5.0 0.5\n2 3 25.0 5.0 0.5\nEND\n"
}

pub(crate) fn five_bus_star_case() -> &'static str {
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

pub(crate) fn ieee39_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases/ieee39.case")
}

#[test]
fn minimal_two_bus_case_parses() {
    let net = load_case_str(two_bus_case()).unwrap();
    assert_eq!(net.buses.len(), 2);
    assert_eq!(net.branches.len(), 1);
    assert_eq!(net.bus(1).unwrap().bus_type, BusType::Slack);
    assert_eq!(net.branch(1).unwrap().x, 0.1);
    // MW columns are converted to per-unit on load
    assert_eq!(net.loads[0].p, 1.0);
    assert_eq!(net.generators[0].p_set, 2.0);
}

#[test]
fn dangling_bus_reference_rejected() {
    let text = two_bus_case().replace("1 1 2 0.0", "1 1 99 0.0");
    let err = load_case_str(&text).unwrap_err();
    assert!(err.to_string().contains("99"), "got: {err}");
}

#[test]
fn malformed_field_reports_line_number() {
    let text = two_bus_case().replace("2 345.0 pq", "2 oops pq");
    let err = load_case_str(&text).unwrap_err();
    assert!(err.to_string().contains("line 4"), "got: {err}");
}

#[test]
fn ieee39_counts_match_published_case() {
    let net = load_case(ieee39_path()).unwrap();
    assert_eq!(net.buses.len(), 39);
    assert_eq!(net.branches.len(), 46);
    assert_eq!(net.generators.len(), 10);
    let transformers = net
        .branches
        .iter()
        .filter(|b| b.kind == BranchKind::Transformer)
        .count();
    assert_eq!(transformers, 12);
}

#[test]
fn islands_of_connected_39_bus() {
    let net = load_case(ieee39_path()).unwrap();
    let islands = net.energized_islands();
    assert_eq!(islands.len(), 1);
    assert_eq!(islands[0].len(), 39);
}

#[test]
fn all_branches_tripped_gives_singletons() {
    let mut net = load_case_str(five_bus_star_case()).unwrap();
    let ids: Vec<_> = net.branches.iter().map(|b| b.id).collect();
    net.remove_elements(&ids, &[]).unwrap();
    let islands = net.energized_islands();
    assert_eq!(islands.len(), 5);
    assert!(islands.iter().all(|i| i.len() == 1));
}

#[test]
fn chain_splits_on_middle_branch_trip() {
    let mut net = load_case_str(three_bus_chain_case()).unwrap();
    net.remove_elements(&[2], &[]).unwrap();
    let islands = net.energized_islands();
    assert_eq!(islands, vec![vec![1, 2], vec![3]]);
}

#[test]
fn isolated_nodes_empty_when_connected() {
    let net = load_case(ieee39_path()).unwrap();
    assert!(net.isolated_nodes().is_empty());
}

#[test]
fn star_isolation_cases() {
    // Hub bus tripped: the four leaves lose their only branch.
    let mut net = load_case_str(five_bus_star_case()).unwrap();
    net.remove_elements(&[], &[1]).unwrap();
    assert_eq!(net.isolated_nodes(), vec![2, 3, 4, 5]);
    // All hub branches tripped instead: every in-service bus has degree 0.
    let mut net = load_case_str(five_bus_star_case()).unwrap();
    net.remove_elements(&[1, 2, 3, 4], &[]).unwrap();
    assert_eq!(net.isolated_nodes(), vec![1, 2, 3, 4, 5]);
}

#[test]
fn single_bus_network_is_isolated() {
    let text = "BASE_MVA 100.0\nBUS\n7 138.0 slack\nEND\n\
                GEN\n1 7 0.0 -50.0 50.0 1.0 4.0 1.0 0.25 50.0 0.05 0.5 50.0 0.5 3.0\nEND\n";
    let net = load_case_str(text).unwrap();
    assert_eq!(net.isolated_nodes(), vec![7]);
}

#[test]
fn remove_elements_behaviour() {
    let mut net = load_case_str(three_bus_chain_case()).unwrap();
    let before = net.clone();

    net.remove_elements(&[], &[]).unwrap();
    assert_eq!(net, before);

    net.remove_elements(&[2], &[]).unwrap();
    assert_eq!(net.branch(2).unwrap().status, ElementStatus::Tripped);
    assert_eq!(net.branch(1).unwrap().status, ElementStatus::InService);

    // Tripping a bus takes its load out of service with it.
    net.remove_elements(&[], &[3]).unwrap();
    assert_eq!(net.loads[1].status, ElementStatus::Tripped);
    assert_eq!(net.loads[0].status, ElementStatus::InService);

    // Idempotent for already-tripped ids.
    let snapshot = net.clone();
    net.remove_elements(&[2], &[3]).unwrap();
    assert_eq!(net, snapshot);

    assert!(net.remove_elements(&[99], &[]).is_err());
    assert!(net.remove_elements(&[], &[99]).is_err());
}

#[test]
fn islands_partition_in_service_buses() {
    let mut net = load_case(ieee39_path()).unwrap();
    net.remove_elements(&[25, 26, 27, 28, 29], &[16]).unwrap();
    let islands = net.energized_islands();
    let mut all: Vec<BusId> = islands.concat();
    all.sort_unstable();
    let mut expect: Vec<BusId> = net.in_service_buses().map(|b| b.id).collect();
    expect.sort_unstable();
    assert_eq!(all, expect, "islands must cover every in-service bus exactly once");
    // Isolated nodes are exactly the singleton islands.
    let singles: Vec<BusId> =
        islands.iter().filter(|i| i.len() == 1).map(|i| i[0]).collect();
    assert_eq!(net.isolated_nodes(), singles);
}

#[test]
fn case_round_trip_is_identity() {
    for text in [two_bus_case().to_string(), three_bus_chain_case().to_string()] {
        let net = load_case_str(&text).unwrap();
        let net2 = load_case_str(&write_case_string(&net)).unwrap();
        assert_eq!(net, net2);
    }
    let net = load_case(ieee39_path()).unwrap();
    let net2 = load_case_str(&write_case_string(&net)).unwrap();
    assert_eq!(net, net2);
}

#[test]
fn dyn_entries_round_trip() {
    let text = format!(
        "{}DYN\nSET uv_threshold_pu 0.65\nRELAY mho branch:1:from zone2_delay_s 0.4\nEND\n",
        two_bus_case()
    );
    let net = load_case_str(&text).unwrap();
    assert_eq!(net.dyn_entries.len(), 2);
    assert_eq!(net.dyn_entries[0].key, "uv_threshold_pu");
    assert_eq!(
        net.dyn_entries[1].selector,
        Some(("mho".to_string(), "branch:1:from".to_string()))
    );
    let net2 = load_case_str(&write_case_string(&net)).unwrap();
    assert_eq!(net, net2);
}
