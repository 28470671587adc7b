//! Reference implementations used by the test suites.
//!
//! Everything here trades speed for obviousness and stays independent of the
//! deque-based search code in the rest of the crate: textbook binary-heap
//! Dijkstra for distances, and an exhaustive path enumeration (over the
//! zero-cluster contraction, where all weights are positive) for the union
//! of minimizing paths.

use crate::config::EdgeWeights;
use crate::lattice::{Edge, Vertex};
use crate::region::Region;
use crate::table::VertexTable;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub const UNREACHED: u32 = u32::MAX;

/// Single-source distances by binary-heap Dijkstra over the weight source's
/// bounding box, optionally restricted to a vertex set.
pub fn dijkstra<W: EdgeWeights>(
    w: &W,
    source: Vertex,
    member: Option<&dyn Fn(&Vertex) -> bool>,
) -> VertexTable<u32> {
    let bbox = *w.bbox();
    let d = w.dim();
    let mut dist = VertexTable::new(bbox, UNREACHED);
    let mut heap: BinaryHeap<Reverse<(u32, Vertex)>> = BinaryHeap::new();
    dist.set(&source, 0);
    heap.push(Reverse((0, source)));
    while let Some(Reverse((du, u))) = heap.pop() {
        if du > dist.get(&u) {
            continue;
        }
        for (v, e) in u.neighbors(d) {
            if !bbox.contains(&v) {
                continue;
            }
            if let Some(m) = member {
                if !m(&v) {
                    continue;
                }
            }
            let nd = du + w.weight(&e) as u32;
            if nd < dist.get(&v) {
                dist.set(&v, nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

pub fn dijkstra_between<W: EdgeWeights>(w: &W, u: Vertex, v: Vertex) -> u32 {
    dijkstra(w, u, None).get(&v)
}

/// Distance from the origin to the region's targets, confined to the region.
pub fn dijkstra_restricted<W: EdgeWeights>(w: &W, region: &Region) -> u32 {
    let member = |v: &Vertex| region.contains(v);
    let dist = dijkstra(w, Vertex::ORIGIN, Some(&member));
    region.targets().iter().map(|t| dist.get(t)).min().unwrap_or(UNREACHED)
}

/// Number of lattice points with L1 norm at most `r`, by direct enumeration.
pub fn diamond_vertex_count(d: usize, r: i32) -> u64 {
    fn rec(d: usize, budget: i32) -> u64 {
        if d == 0 {
            return 1;
        }
        let mut total = 0;
        for c in -budget..=budget {
            total += rec(d - 1, budget - c.abs());
        }
        total
    }
    rec(d, r)
}

/// Union of all minimizing paths from the origin to the region targets,
/// together with the minimal passage time.
///
/// Method: contract the zero-weight clusters of the region (union-find over
/// zero edges), leaving a multigraph in which every edge costs one. Minimal
/// paths there are exactly the cluster sequences of minimizing lattice paths,
/// and since all contracted weights are positive they can be enumerated
/// exhaustively by a depth-first search with an exact cost bound. A lattice
/// edge is on some minimizing path iff it is a unit edge realizing a used
/// cluster transition, or a zero edge of a visited cluster.
pub fn enumerate_route_union<W: EdgeWeights>(w: &W, region: &Region) -> (u32, Vec<Edge>) {
    let d = w.dim();
    let trace = region.trace();

    // union-find over zero edges
    let mut index = rustc_hash::FxHashMap::default();
    for (i, v) in trace.iter().enumerate() {
        index.insert(*v, i);
    }
    let mut parent: Vec<usize> = (0..trace.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut zero_edges: Vec<(usize, usize, Edge)> = Vec::new();
    let mut unit_edges: Vec<(usize, usize, Edge)> = Vec::new();
    for (i, u) in trace.iter().enumerate() {
        for axis in 0..d {
            let v = u.step(axis, 1);
            if let Some(&j) = index.get(&v) {
                let e = Edge { base: *u, axis: axis as u8 };
                if w.weight(&e) == 0 {
                    zero_edges.push((i, j, e));
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                } else {
                    unit_edges.push((i, j, e));
                }
            }
        }
    }

    // relabel clusters densely
    let mut cluster_of = vec![usize::MAX; trace.len()];
    let mut n_clusters = 0;
    for i in 0..trace.len() {
        let r = find(&mut parent, i);
        if cluster_of[r] == usize::MAX {
            cluster_of[r] = n_clusters;
            n_clusters += 1;
        }
        cluster_of[i] = cluster_of[r];
    }

    // transitions between distinct clusters, with their parallel lattice edges
    let mut transition_ids = rustc_hash::FxHashMap::default();
    let mut transitions: Vec<(usize, usize, Vec<Edge>)> = Vec::new();
    for &(i, j, e) in &unit_edges {
        let (a, b) = (cluster_of[i], cluster_of[j]);
        if a == b {
            continue; // a unit edge inside a cluster is never on a minimal path
        }
        let key = (a.min(b), a.max(b));
        let tid = *transition_ids.entry(key).or_insert_with(|| {
            transitions.push((key.0, key.1, Vec::new()));
            transitions.len() - 1
        });
        transitions[tid].2.push(e);
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_clusters];
    for (tid, &(a, b, _)) in transitions.iter().enumerate() {
        adj[a].push((b, tid));
        adj[b].push((a, tid));
    }

    let source = cluster_of[index[&Vertex::ORIGIN]];
    let mut is_target_cluster = vec![false; n_clusters];
    for t in region.targets() {
        is_target_cluster[cluster_of[index[t]]] = true;
    }

    // plain unit-weight BFS distances on the contracted graph
    let bfs = |starts: &[usize]| -> Vec<u32> {
        let mut dist = vec![UNREACHED; n_clusters];
        let mut q = std::collections::VecDeque::new();
        for &s in starts {
            if dist[s] != 0 {
                dist[s] = 0;
                q.push_back(s);
            }
        }
        while let Some(x) = q.pop_front() {
            for &(y, _) in &adj[x] {
                if dist[y] == UNREACHED {
                    dist[y] = dist[x] + 1;
                    q.push_back(y);
                }
            }
        }
        dist
    };
    let fwd = bfs(&[source]);
    let target_clusters: Vec<usize> =
        (0..n_clusters).filter(|&c| is_target_cluster[c]).collect();
    let bwd = bfs(&target_clusters);
    let total = target_clusters.iter().map(|&c| fwd[c]).min().expect("region has targets");

    // exhaustive DFS over all simple paths of cost exactly `total`
    struct Dfs<'a> {
        adj: &'a [Vec<(usize, usize)>],
        bwd: &'a [u32],
        is_target: &'a [bool],
        total: u32,
        source: usize,
        visited: Vec<bool>,
        stack: Vec<(usize, usize)>, // (transition id, cluster entered)
        used_transition: Vec<bool>,
        visited_cluster: Vec<bool>,
    }
    impl Dfs<'_> {
        fn run(&mut self, x: usize, cost: u32) {
            if self.is_target[x] && cost == self.total {
                self.visited_cluster[self.source] = true;
                self.visited_cluster[x] = true;
                for &(tid, c) in &self.stack {
                    self.used_transition[tid] = true;
                    self.visited_cluster[c] = true;
                }
                return;
            }
            for k in 0..self.adj[x].len() {
                let (y, tid) = self.adj[x][k];
                if !self.visited[y] && cost + 1 + self.bwd[y] <= self.total {
                    self.visited[y] = true;
                    self.stack.push((tid, y));
                    self.run(y, cost + 1);
                    self.stack.pop();
                    self.visited[y] = false;
                }
            }
        }
    }
    let mut dfs = Dfs {
        adj: &adj,
        bwd: &bwd,
        is_target: &is_target_cluster,
        total,
        source,
        visited: vec![false; n_clusters],
        stack: Vec::new(),
        used_transition: vec![false; transitions.len()],
        visited_cluster: vec![false; n_clusters],
    };
    dfs.visited[source] = true;
    dfs.run(source, 0);

    let mut edges: Vec<Edge> = Vec::new();
    for (tid, (_, _, parallel)) in transitions.iter().enumerate() {
        if dfs.used_transition[tid] {
            edges.extend_from_slice(parallel);
        }
    }
    for &(i, j, e) in &zero_edges {
        let c = cluster_of[i];
        debug_assert_eq!(c, cluster_of[j]);
        if dfs.visited_cluster[c] {
            edges.push(e);
        }
    }
    edges.sort();
    edges.dedup();
    (total, edges)
}
