//! Connectivity queries over the in-service part of the grid.

use super::{BusId, Network};

impl Network {
    /// Partitions the in-service buses into connected components over the
    /// effective branches. Islands are sorted by their smallest bus id and
    /// bus ids inside each island are ascending, so the output is a
    /// deterministic function of the topology.
    pub fn energized_islands(&self) -> Vec<Vec<BusId>> {
        let bus_ids: Vec<BusId> = self.in_service_buses().map(|b| b.id).collect();
        let pos: std::collections::HashMap<BusId, usize> =
            bus_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut parent: Vec<usize> = (0..bus_ids.len()).collect();

        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }

        for br in self.effective_branches() {
            let (a, b) = (pos[&br.from_bus], pos[&br.to_bus]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }

        let mut groups: std::collections::BTreeMap<usize, Vec<BusId>> = Default::default();
        for (i, &id) in bus_ids.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(id);
        }
        let mut islands: Vec<Vec<BusId>> = groups.into_values().collect();
        for isl in &mut islands {
            isl.sort_unstable();
        }
        islands.sort_by_key(|isl| isl[0]);
        islands
    }

    /// In-service buses with zero degree over the effective branches.
    pub fn isolated_nodes(&self) -> Vec<BusId> {
        let mut degree: std::collections::HashMap<BusId, usize> = self
            .in_service_buses()
            .map(|b| (b.id, 0usize))
            .collect();
        for br in self.effective_branches() {
            *degree.get_mut(&br.from_bus).unwrap() += 1;
            *degree.get_mut(&br.to_bus).unwrap() += 1;
        }
        let mut out: Vec<BusId> = degree
            .into_iter()
            .filter_map(|(id, d)| (d == 0).then_some(id))
            .collect();
        out.sort_unstable();
        out
    }

    /// The island (sorted bus ids) containing `bus`, if the bus is in service.
    pub fn island_of(&self, bus: BusId) -> Option<Vec<BusId>> {
        self.energized_islands().into_iter().find(|isl| isl.contains(&bus))
    }
}
