use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::simnet::scenario::{Dist, LinkModel, ScenarioError, Topology};
use crate::size::WireSize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u16);

impl NodeId {
    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

/// An undirected link. Both directions share latency and bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub endpoints: (NodeId, NodeId),
    pub latency_secs: f64,
    pub bandwidth_bytes_per_sec: f64,
}

impl Link {
    pub fn delay_for_bytes(&self, bytes: u64) -> f64 {
        self.latency_secs + bytes as f64 / self.bandwidth_bytes_per_sec
    }
}

/// Latency plus serialization time over the link.
pub fn transmission_delay<M: WireSize + ?Sized>(message: &M, link: &Link) -> f64 {
    link.delay_for_bytes(message.wire_size())
}

#[derive(Debug, Clone)]
pub struct Network {
    links: Vec<Link>,
    /// Per node: (neighbor, link index), sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn link(&self, index: usize) -> &Link {
        &self.links[index]
    }

    pub fn link_between(&self, a: usize, b: usize) -> Option<&Link> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|(_, l)| &self.links[*l])
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Builds the graph, then samples each link's parameters in edge order.
    pub fn build<R: Rng + ?Sized>(
        node_count: usize,
        topology: &Topology,
        links: &LinkModel,
        topo_rng: &mut R,
        link_rng: &mut R,
    ) -> Result<Network, ScenarioError> {
        let edges = edges_for(node_count, topology, topo_rng)?;
        let mut adjacency = vec![Vec::new(); node_count];
        let mut out = Vec::with_capacity(edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            out.push(Link {
                endpoints: (NodeId(a as u16), NodeId(b as u16)),
                latency_secs: sample(&links.latency_secs, link_rng),
                bandwidth_bytes_per_sec: sample(&links.bandwidth_bytes_per_sec, link_rng),
            });
            adjacency[a].push((b, i));
            adjacency[b].push((a, i));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let net = Network { links: out, adjacency };
        if !net.is_connected() {
            return Err(ScenarioError::Disconnected);
        }
        Ok(net)
    }
}

fn sample<R: Rng + ?Sized>(dist: &Dist, rng: &mut R) -> f64 {
    match *dist {
        Dist::Fixed(v) => v,
        Dist::Uniform([lo, hi]) if lo == hi => lo,
        Dist::Uniform([lo, hi]) => rng.random_range(lo..hi),
    }
}

fn edges_for<R: Rng + ?Sized>(
    n: usize,
    topology: &Topology,
    rng: &mut R,
) -> Result<BTreeSet<(usize, usize)>, ScenarioError> {
    let complete = || (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    match topology {
        Topology::Complete => Ok(complete()),
        Topology::Ring => Ok((0..n).filter(|_| n > 1).map(|i| ordered(i, (i + 1) % n)).collect()),
        Topology::Explicit { edges } => {
            let mut set = BTreeSet::new();
            for &(a, b) in edges {
                if a >= n || b >= n {
                    return Err(ScenarioError::invalid(
                        "topology.edges",
                        format!("edge ({a}, {b}) names a missing node"),
                    ));
                }
                if a == b {
                    return Err(ScenarioError::invalid("topology.edges", format!("self-link on node {a}")));
                }
                if !set.insert(ordered(a, b)) {
                    return Err(ScenarioError::invalid(
                        "topology.edges",
                        format!("duplicate link ({a}, {b})"),
                    ));
                }
            }
            Ok(set)
        }
        Topology::RandomRegular { degree } => {
            let d = (*degree).min(n.saturating_sub(1));
            if d == n.saturating_sub(1) {
                return Ok(complete());
            }
            if (n * d) % 2 == 1 {
                return Err(ScenarioError::invalid(
                    "topology.degree",
                    format!("node_count * degree must be even ({n} * {d})"),
                ));
            }
            random_regular(n, d, rng)
        }
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Configuration model with rejection: shuffle the stub list, pair it up, and
/// retry until the result is simple and connected.
fn random_regular<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<BTreeSet<(usize, usize)>, ScenarioError> {
    const ATTEMPTS: usize = 10_000;
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..ATTEMPTS {
        stubs.shuffle(rng);
        let mut edges = BTreeSet::new();
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || !edges.insert(ordered(a, b)) {
                continue 'attempt;
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push((b, 0));
            adjacency[b].push((a, 0));
        }
        if (Network { links: Vec::new(), adjacency }).is_connected() {
            return Ok(edges);
        }
    }
    Err(ScenarioError::invalid("topology.degree", "could not sample a connected simple regular graph"))
}
