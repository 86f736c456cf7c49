use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use super::GuidanceError;
use crate::statespace::StateGraph;

const EPS: f64 = 1e-9;

/// A directed graph with positive edge costs.
pub trait Network {
    fn node_count(&self) -> usize;
    /// Outgoing `(to, cost_weeks, input_label)` of `node`.
    fn links(&self, node: usize) -> Vec<(usize, f64, &str)>;
}

impl Network for StateGraph {
    fn node_count(&self) -> usize {
        StateGraph::node_count(self)
    }

    fn links(&self, node: usize) -> Vec<(usize, f64, &str)> {
        self.out_edges(node)
            .map(|e| (e.to, e.cost_weeks, e.input_label.as_str()))
            .collect()
    }
}

/// Plain adjacency-list network.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyGraph {
    pub adj: Vec<Vec<(usize, f64, String)>>,
}

impl AdjacencyGraph {
    pub fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes] }
    }

    /// Panics on an out-of-range node or a non-positive cost.
    pub fn add_edge(&mut self, from: usize, to: usize, cost: f64, label: &str) {
        assert!(from < self.adj.len() && to < self.adj.len(), "node out of range");
        assert!(cost > 0.0, "edge costs must be positive");
        self.adj[from].push((to, cost, label.to_string()));
    }

    pub fn add_undirected(&mut self, a: usize, b: usize, cost: f64, label: &str) {
        self.add_edge(a, b, cost, label);
        self.add_edge(b, a, cost, label);
    }

    /// `rows × cols` lattice with 8-neighbour unit-cost edges.
    pub fn lattice(rows: usize, cols: usize) -> Self {
        let mut g = Self::new(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                for (dr, dc) in [(-1i64, -1i64), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if (0..rows as i64).contains(&nr) && (0..cols as i64).contains(&nc) {
                        g.add_edge(r * cols + c, nr as usize * cols + nc as usize, 1.0, "step");
                    }
                }
            }
        }
        g
    }
}

impl Network for AdjacencyGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn links(&self, node: usize) -> Vec<(usize, f64, &str)> {
        self.adj[node].iter().map(|(t, c, l)| (*t, *c, l.as_str())).collect()
    }
}

/// A goal region: the nodes of one ROI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub roi_label: String,
    pub targets: BTreeSet<usize>,
}

impl Goal {
    pub fn new(
        roi_label: &str,
        targets: impl IntoIterator<Item = usize>,
        node_count: usize,
    ) -> Result<Self, GuidanceError> {
        let targets: BTreeSet<usize> = targets.into_iter().collect();
        if targets.is_empty() {
            return Err(GuidanceError::InvalidGoal(format!("{roi_label} has no nodes")));
        }
        if let Some(&n) = targets.iter().find(|&&n| n >= node_count) {
            return Err(GuidanceError::UnknownNode(n));
        }
        Ok(Self { roi_label: roi_label.into(), targets })
    }

    pub fn roi(graph: &StateGraph, label: &str) -> Result<Self, GuidanceError> {
        let nodes = graph
            .roi_nodes(label)
            .map_err(|e| GuidanceError::InvalidGoal(e.to_string()))?;
        Self::new(label, nodes, graph.node_count())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub total_cost_weeks: f64,
    /// One label per edge.
    pub input_labels: Vec<String>,
}

impl Route {
    fn from_nodes<N: Network + ?Sized>(net: &N, nodes: Vec<usize>) -> Self {
        let mut cost = 0.0;
        let mut labels = Vec::new();
        for w in nodes.windows(2) {
            let (_, c, l) = net
                .links(w[0])
                .into_iter()
                .filter(|(t, _, _)| *t == w[1])
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("consecutive route nodes are linked");
            cost += c;
            labels.push(l.to_string());
        }
        Self { nodes, total_cost_weeks: cost, input_labels: labels }
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search {
    fwd: Vec<Vec<(usize, f64)>>,
    rev: Vec<Vec<(usize, f64)>>,
    goal: Vec<bool>,
}

impl Search {
    fn new<N: Network + ?Sized>(net: &N, goal: &Goal) -> Self {
        let n = net.node_count();
        let mut fwd = vec![Vec::new(); n];
        let mut rev = vec![Vec::new(); n];
        for (u, out) in fwd.iter_mut().enumerate() {
            for (v, c, _) in net.links(u) {
                out.push((v, c));
                rev[v].push((u, c));
            }
        }
        for out in &mut fwd {
            out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        let mut g = vec![false; n];
        for &t in &goal.targets {
            g[t] = true;
        }
        Self { fwd, rev, goal: g }
    }

    /// Min-cost path from `src` to the goal avoiding banned nodes and
    /// edges; among equal-cost paths the lexicographically smallest node
    /// sequence.
    fn shortest(
        &self,
        src: usize,
        banned_nodes: &[bool],
        banned_edges: &HashSet<(usize, usize)>,
    ) -> Option<(Vec<usize>, f64)> {
        let n = self.fwd.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for v in (0..n).filter(|&v| self.goal[v] && !banned_nodes[v]) {
            dist[v] = 0.0;
            heap.push(Item(0.0, v));
        }
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, c) in &self.rev[v] {
                if banned_nodes[u] || banned_edges.contains(&(u, v)) || self.goal[u] {
                    continue;
                }
                if d + c < dist[u] {
                    dist[u] = d + c;
                    heap.push(Item(d + c, u));
                }
            }
        }
        if banned_nodes[src] || !dist[src].is_finite() {
            return None;
        }
        let mut path = vec![src];
        let mut cost = 0.0;
        let mut cur = src;
        while !self.goal[cur] {
            let tol = EPS * dist[cur].max(1.0);
            let &(next, c) = self.fwd[cur]
                .iter()
                .find(|&&(v, c)| {
                    !banned_nodes[v]
                        && !banned_edges.contains(&(cur, v))
                        && c + dist[v] <= dist[cur] + tol
                })
                .expect("a finite distance has a tight edge");
            path.push(next);
            cost += c;
            cur = next;
        }
        Some((path, cost))
    }
}

fn route_order(a: &(Vec<usize>, f64), b: &(Vec<usize>, f64)) -> Ordering {
    if (a.1 - b.1).abs() > EPS * a.1.abs().max(b.1.abs()).max(1.0) {
        a.1.total_cmp(&b.1)
    } else {
        a.0.cmp(&b.0)
    }
}

/// Up to `k` loop-free routes from `current` into `goal`, cheapest first,
/// equal costs ordered by node sequence. A route stops at the first goal
/// node it reaches.
pub fn plan_routes<N: Network + ?Sized>(
    net: &N,
    current: usize,
    goal: &Goal,
    k: usize,
) -> Result<Vec<Route>, GuidanceError> {
    let n = net.node_count();
    if current >= n {
        return Err(GuidanceError::UnknownNode(current));
    }
    if let Some(&t) = goal.targets.iter().find(|&&t| t >= n) {
        return Err(GuidanceError::UnknownNode(t));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if goal.targets.contains(&current) {
        return Ok(vec![Route::from_nodes(net, vec![current])]);
    }
    let search = Search::new(net, goal);
    let no_route = || GuidanceError::NoRoute { from: current, goal: goal.roi_label.clone() };
    let first = search
        .shortest(current, &vec![false; n], &HashSet::new())
        .ok_or_else(no_route)?;

    let mut found = vec![first];
    let mut candidates: Vec<(Vec<usize>, f64)> = Vec::new();
    while found.len() < k {
        let prev = found.last().unwrap().0.clone();
        for i in 0..prev.len() - 1 {
            let spur = prev[i];
            let root = &prev[..=i];
            let mut banned_edges = HashSet::new();
            for (p, _) in &found {
                if p.len() > i + 1 && &p[..=i] == root {
                    banned_edges.insert((p[i], p[i + 1]));
                }
            }
            let mut banned_nodes = vec![false; n];
            for &v in &root[..i] {
                banned_nodes[v] = true;
            }
            if let Some((tail, _)) = search.shortest(spur, &banned_nodes, &banned_edges) {
                let mut nodes = root[..i].to_vec();
                nodes.extend(tail);
                if found.iter().chain(&candidates).any(|(p, _)| *p == nodes) {
                    continue;
                }
                let cost = Route::from_nodes(net, nodes.clone()).total_cost_weeks;
                candidates.push((nodes, cost));
            }
        }
        let Some(best) = (0..candidates.len()).min_by(|&a, &b| route_order(&candidates[a], &candidates[b])) else {
            break;
        };
        found.push(candidates.swap_remove(best));
    }
    Ok(found.into_iter().map(|(p, _)| Route::from_nodes(net, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// All loop-free paths from `src` whose only goal node is the last.
    fn brute_force(g: &AdjacencyGraph, src: usize, goal: &Goal) -> Vec<(Vec<usize>, f64)> {
        fn walk(g: &AdjacencyGraph, goal: &Goal, path: &mut Vec<usize>, cost: f64, out: &mut Vec<(Vec<usize>, f64)>) {
            let cur = *path.last().unwrap();
            if goal.targets.contains(&cur) {
                out.push((path.clone(), cost));
                return;
            }
            for (v, c, _) in g.links(cur) {
                if !path.contains(&v) {
                    path.push(v);
                    walk(g, goal, path, cost + c, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(g, goal, &mut vec![src], 0.0, &mut out);
        out.sort_by(route_order);
        out
    }

    fn is_valid(g: &AdjacencyGraph, r: &Route, src: usize, goal: &Goal) -> bool {
        let uniq: BTreeSet<_> = r.nodes.iter().collect();
        r.nodes[0] == src
            && goal.targets.contains(r.nodes.last().unwrap())
            && uniq.len() == r.nodes.len()
            && r.nodes.windows(2).all(|w| g.links(w[0]).iter().any(|l| l.0 == w[1]))
            && r.input_labels.len() == r.edge_count()
    }

    #[test]
    fn current_in_goal_is_empty_route() {
        let g = AdjacencyGraph::lattice(3, 3);
        let goal = Goal::new("g", [4], 9).unwrap();
        let r = plan_routes(&g, 4, &goal, 3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].nodes.clone(), r[0].total_cost_weeks), (vec![4], 0.0));
        assert!(r[0].input_labels.is_empty());
    }

    #[test]
    fn corner_to_corner_uses_diagonal() {
        let g = AdjacencyGraph::lattice(3, 3);
        let goal = Goal::new("g", [8], 9).unwrap();
        let r = plan_routes(&g, 0, &goal, 1).unwrap();
        assert_eq!(r[0].total_cost_weeks, 2.0);
        assert_eq!(r[0].nodes, vec![0, 4, 8]);
        assert_eq!(brute_force(&g, 0, &goal)[0].1, 2.0);
    }

    #[test]
    fn ties_break_on_node_index() {
        // 0 → 1 → 3 and 0 → 2 → 3 both cost 2.
        let mut g = AdjacencyGraph::new(4);
        g.add_edge(0, 2, 1.0, "a");
        g.add_edge(0, 1, 1.0, "a");
        g.add_edge(2, 3, 1.0, "a");
        g.add_edge(1, 3, 1.0, "a");
        let goal = Goal::new("g", [3], 4).unwrap();
        let r = plan_routes(&g, 0, &goal, 5).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].nodes, vec![0, 1, 3]);
        assert_eq!(r[1].nodes, vec![0, 2, 3]);
    }

    #[test]
    fn isolated_goal_is_an_error() {
        let mut g = AdjacencyGraph::lattice(2, 2);
        g.adj.push(Vec::new());
        let goal = Goal::new("g", [4], 5).unwrap();
        assert!(matches!(plan_routes(&g, 0, &goal, 2), Err(GuidanceError::NoRoute { .. })));
    }

    #[test]
    fn bad_goals() {
        assert!(Goal::new("g", [], 4).is_err());
        assert_eq!(Goal::new("g", [9], 4), Err(GuidanceError::UnknownNode(9)));
        let g = AdjacencyGraph::lattice(2, 2);
        let goal = Goal::new("g", [3], 4).unwrap();
        assert_eq!(plan_routes(&g, 7, &goal, 1), Err(GuidanceError::UnknownNode(7)));
    }

    #[test]
    fn k_routes_on_lattice_are_ranked() {
        let g = AdjacencyGraph::lattice(3, 3);
        let goal = Goal::new("g", [8], 9).unwrap();
        let routes = plan_routes(&g, 0, &goal, 6).unwrap();
        let brute = brute_force(&g, 0, &goal);
        assert_eq!(routes.len(), 6);
        for (r, b) in routes.iter().zip(&brute) {
            assert_eq!(r.total_cost_weeks, b.1);
        }
        assert!(routes.iter().all(|r| is_valid(&g, r, 0, &goal)));
    }

    fn random_graph(seed: u64, n: usize) -> AdjacencyGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = AdjacencyGraph::new(n);
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.random_bool(0.3) {
                    g.add_edge(a, b, rng.random_range(1..=4) as f64 * 0.5, "x");
                }
            }
        }
        g
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_brute_force(seed in any::<u64>(), n in 2usize..=9, k in 1usize..5) {
            let g = random_graph(seed, n);
            let goal = Goal::new("g", [n - 1], n).unwrap();
            let brute = brute_force(&g, 0, &goal);
            match plan_routes(&g, 0, &goal, k) {
                Err(GuidanceError::NoRoute { .. }) => prop_assert!(brute.is_empty()),
                Err(e) => prop_assert!(false, "{e}"),
                Ok(routes) => {
                    prop_assert_eq!(routes.len(), k.min(brute.len()));
                    prop_assert_eq!(&routes[0].nodes, &brute[0].0);
                    for (r, b) in routes.iter().zip(&brute) {
                        prop_assert!((r.total_cost_weeks - b.1).abs() < 1e-9);
                        prop_assert!(is_valid(&g, r, 0, &goal));
                    }
                }
            }
        }
    }
}
