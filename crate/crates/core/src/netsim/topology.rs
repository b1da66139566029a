//! Undirected host graphs. Neighbour lists are sorted ascending and never
//! contain the host itself.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::HostId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    /// G(n, p) with `p = mean_degree / (hosts - 1)`.
    ErdosRenyi {
        hosts: u32,
        mean_degree: f64,
    },
    /// Each host linked to its `k` nearest hosts on either side.
    Ring {
        hosts: u32,
        k: u32,
    },
    Complete {
        hosts: u32,
    },
    EdgeList {
        hosts: u32,
        edges: Vec<[u32; 2]>,
    },
}

impl TopologySpec {
    pub fn host_count(&self) -> usize {
        match *self {
            TopologySpec::ErdosRenyi { hosts, .. }
            | TopologySpec::Ring { hosts, .. }
            | TopologySpec::Complete { hosts }
            | TopologySpec::EdgeList { hosts, .. } => hosts as usize,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let n = self.host_count();
        if n == 0 {
            return Err(Error::config(format!("{path}.hosts"), "must be at least 1"));
        }
        match self {
            TopologySpec::ErdosRenyi { mean_degree, .. } => {
                let max = (n - 1) as f64;
                if !(mean_degree.is_finite() && *mean_degree >= 0.0 && *mean_degree <= max) {
                    return Err(Error::config(
                        format!("{path}.mean_degree"),
                        format!("{mean_degree} must lie in [0, {max}]"),
                    ));
                }
            }
            TopologySpec::Ring { k, .. } => {
                if *k == 0 || 2 * (*k as usize) >= n {
                    return Err(Error::config(
                        format!("{path}.k"),
                        format!("need 1 <= k and 2k < hosts ({n})"),
                    ));
                }
            }
            TopologySpec::Complete { .. } => {}
            TopologySpec::EdgeList { edges, .. } => {
                for (i, &[a, b]) in edges.iter().enumerate() {
                    if a as usize >= n || b as usize >= n {
                        return Err(Error::config(
                            format!("{path}.edges[{i}]"),
                            format!("host out of range 0..{n}"),
                        ));
                    }
                    if a == b {
                        return Err(Error::config(format!("{path}.edges[{i}]"), "self-loop"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    adjacency: Vec<Vec<HostId>>,
}

impl Topology {
    /// Builds the graph. Only Erdős–Rényi consumes randomness.
    pub fn generate<R: Rng + ?Sized>(spec: &TopologySpec, rng: &mut R) -> Self {
        let n = spec.host_count();
        let mut sets = vec![BTreeSet::new(); n];
        let mut link = |a: usize, b: usize| {
            if a != b {
                sets[a].insert(HostId(b as u32));
                sets[b].insert(HostId(a as u32));
            }
        };
        match spec {
            TopologySpec::ErdosRenyi { mean_degree, .. } => {
                if n > 1 {
                    let p = mean_degree / (n - 1) as f64;
                    for a in 0..n {
                        for b in a + 1..n {
                            if rng.gen::<f64>() < p {
                                link(a, b);
                            }
                        }
                    }
                }
            }
            TopologySpec::Ring { k, .. } => {
                for a in 0..n {
                    for d in 1..=*k as usize {
                        link(a, (a + d) % n);
                    }
                }
            }
            TopologySpec::Complete { .. } => {
                for a in 0..n {
                    for b in a + 1..n {
                        link(a, b);
                    }
                }
            }
            TopologySpec::EdgeList { edges, .. } => {
                for &[a, b] in edges {
                    link(a as usize, b as usize);
                }
            }
        }
        Topology {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn host_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, host: HostId) -> &[HostId] {
        &self.adjacency[host.index()]
    }

    pub fn degree(&self, host: HostId) -> usize {
        self.adjacency[host.index()].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn isolated_hosts(&self) -> Vec<HostId> {
        (0..self.host_count() as u32)
            .map(HostId)
            .filter(|&h| self.degree(h) == 0)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.host_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(h) = queue.pop_front() {
            for nb in &self.adjacency[h] {
                if !seen[nb.index()] {
                    seen[nb.index()] = true;
                    count += 1;
                    queue.push_back(nb.index());
                }
            }
        }
        count == n
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn build(spec: TopologySpec) -> Topology {
        Topology::generate(&spec, &mut ChaCha8Rng::seed_from_u64(0))
    }

    fn check_invariants(t: &Topology) {
        for h in 0..t.host_count() as u32 {
            let nb = t.neighbors(HostId(h));
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "sorted, unique");
            assert!(!nb.contains(&HostId(h)), "no self-loop");
            for &m in nb {
                assert!(t.neighbors(m).contains(&HostId(h)), "symmetric");
            }
        }
    }

    #[test]
    fn complete_graph_degrees() {
        let t = build(TopologySpec::Complete { hosts: 5 });
        check_invariants(&t);
        assert!((0..5).all(|h| t.degree(HostId(h)) == 4));
    }

    #[test]
    fn ring_degrees() {
        let t = build(TopologySpec::Ring { hosts: 10, k: 2 });
        check_invariants(&t);
        assert!((0..10).all(|h| t.degree(HostId(h)) == 4));
        assert_eq!(
            t.neighbors(HostId(0)),
            &[HostId(1), HostId(2), HostId(8), HostId(9)]
        );
        assert!(t.is_connected());
    }

    #[test]
    fn erdos_renyi_mean_degree() {
        let t = build(TopologySpec::ErdosRenyi {
            hosts: 400,
            mean_degree: 8.0,
        });
        check_invariants(&t);
        let mean = 2.0 * t.edge_count() as f64 / 400.0;
        // Edge count ~ Binomial(79800, 8/399): sd of the mean degree ~ 0.14.
        assert!((mean - 8.0).abs() < 0.6, "mean degree {mean}");
    }

    #[test]
    fn erdos_renyi_is_seeded() {
        let spec = TopologySpec::ErdosRenyi {
            hosts: 50,
            mean_degree: 4.0,
        };
        let a = Topology::generate(&spec, &mut ChaCha8Rng::seed_from_u64(9));
        let b = Topology::generate(&spec, &mut ChaCha8Rng::seed_from_u64(9));
        let c = Topology::generate(&spec, &mut ChaCha8Rng::seed_from_u64(10));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn edge_list_dedupes() {
        let t = build(TopologySpec::EdgeList {
            hosts: 4,
            edges: vec![[0, 1], [1, 0], [2, 3]],
        });
        check_invariants(&t);
        assert_eq!(t.edge_count(), 2);
        assert!(!t.is_connected());
    }

    #[test]
    fn isolated_hosts_reported() {
        let t = build(TopologySpec::ErdosRenyi {
            hosts: 6,
            mean_degree: 0.0,
        });
        assert_eq!(t.isolated_hosts().len(), 6);
    }

    #[test]
    fn validation() {
        assert!(TopologySpec::Ring { hosts: 4, k: 2 }.validate("t").is_err());
        assert!(TopologySpec::Ring { hosts: 5, k: 2 }.validate("t").is_ok());
        assert!(TopologySpec::EdgeList {
            hosts: 3,
            edges: vec![[1, 1]]
        }
        .validate("t")
        .is_err());
        assert!(TopologySpec::ErdosRenyi {
            hosts: 3,
            mean_degree: 5.0
        }
        .validate("t")
        .is_err());
        assert!(TopologySpec::Complete { hosts: 0 }.validate("t").is_err());
    }
}
