//! Region-restricted passage times and the union of all minimizing paths.
//!
//! The union is certified in linear time instead of by path enumeration: with
//! `f` the forward distance field from the origin and `b` the multi-source
//! backward field from the targets (both restricted to the region), an edge
//! `{u, v}` of weight `w` lies on a minimizing path exactly when
//! `min(f(u) + w + b(v), f(v) + w + b(u))` equals the optimal total. Paths
//! here are walks in the sense that zero-weight detours are free; every unit
//! edge passing the certificate also lies on a strictly simple minimizing
//! path.

use crate::config::EdgeWeights;
use crate::error::{Error, Result};
use crate::lattice::{Edge, Vertex};
use crate::region::Region;
use crate::table::VertexTable;
use rustc_hash::{FxHashMap, FxHashSet};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

pub const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RouteEdge {
    pub edge: Edge,
    pub weight: u8,
    /// On the specific minimal-hop route extracted for export.
    pub on_min_route: bool,
}

/// Forward/backward fields inside a region plus everything derived from
/// them: the route union, pivotal-edge count, and route-length extremes.
pub struct GeodesicField {
    pub total: u32,
    pub forward: VertexTable<u32>,
    pub backward: VertexTable<u32>,
    /// Route edges sorted by edge identity.
    pub route_edges: Vec<RouteEdge>,
    /// Vertex support of the route edges, plus the origin; sorted.
    pub route_vertices: Vec<Vertex>,
    /// Number of unit-weight route edges (each is Russo-pivotal).
    pub pivotal_count: usize,
    /// Fewest edges over all routes.
    pub n_min: u32,
    /// Most edges over all routes; exact unless `n_max_exact` is false, in
    /// which case it is a lower bound (a huge non-tree zero cluster made the
    /// internal longest-path search give up).
    pub n_max: u32,
    pub n_max_exact: bool,
}

/// 0-1 BFS inside the region from the given sources (distance 0 each).
fn bfs_restricted<W: EdgeWeights>(
    w: &W,
    region: &Region,
    sources: &[Vertex],
) -> VertexTable<u32> {
    let d = w.dim();
    let mut dist = VertexTable::new(region.bbox, UNREACHED);
    let mut deque: VecDeque<(Vertex, u32)> = VecDeque::new();
    for s in sources {
        dist.set(s, 0);
        deque.push_back((*s, 0));
    }
    while let Some((v, dv)) = deque.pop_front() {
        if dv > dist.get(&v) {
            continue;
        }
        for (n, e) in v.neighbors(d) {
            if !region.contains(&n) {
                continue;
            }
            let we = w.weight(&e);
            let nd = dv + we as u32;
            if nd < dist.get(&n) {
                dist.set(&n, nd);
                if we == 0 {
                    deque.push_front((n, nd));
                } else {
                    deque.push_back((n, nd));
                }
            }
        }
    }
    dist
}

fn validate<W: EdgeWeights>(w: &W, region: &Region) -> Result<()> {
    if !region.contains(&Vertex::ORIGIN) {
        return Err(Error::InvalidRegion("region must contain the origin".into()));
    }
    if region.targets().is_empty() {
        return Err(Error::EmptyBoundary);
    }
    if !w.bbox().contains_box(&region.bbox) {
        return Err(Error::BoxExhausted {
            at: region.bbox.hi,
            detail: "region extends beyond the weight bounding box".into(),
        });
    }
    Ok(())
}

/// Minimal passage time from the origin to the region targets over paths
/// confined to the region.
pub fn restricted_passage_time<W: EdgeWeights>(w: &W, region: &Region) -> Result<u32> {
    validate(w, region)?;
    let forward = bfs_restricted(w, region, &[Vertex::ORIGIN]);
    let total = region.targets().iter().map(|t| forward.get(t)).min().unwrap();
    debug_assert_ne!(total, UNREACHED, "region is connected, targets must be reachable");
    Ok(total)
}

/// Number of unit-weight route edges (the Russo-pivotal edges), without the
/// route-length extras of the full field computation.
pub fn pivotal_count<W: EdgeWeights>(w: &W, region: &Region) -> Result<usize> {
    let (total, forward, backward) = fields(w, region)?;
    let mut count = 0usize;
    scan_route_edges(w, region, total, &forward, &backward, |_, weight| {
        if weight == 1 {
            count += 1;
        }
    });
    Ok(count)
}

fn fields<W: EdgeWeights>(
    w: &W,
    region: &Region,
) -> Result<(u32, VertexTable<u32>, VertexTable<u32>)> {
    validate(w, region)?;
    let forward = bfs_restricted(w, region, &[Vertex::ORIGIN]);
    let backward = bfs_restricted(w, region, region.targets());
    let total = region.targets().iter().map(|t| forward.get(t)).min().unwrap();
    Ok((total, forward, backward))
}

fn scan_route_edges<W: EdgeWeights>(
    w: &W,
    region: &Region,
    total: u32,
    forward: &VertexTable<u32>,
    backward: &VertexTable<u32>,
    mut f: impl FnMut(Edge, u8),
) {
    let d = w.dim();
    for u in region.trace() {
        let fu = forward.get(u);
        let bu = backward.get(u);
        for axis in 0..d {
            let v = u.step(axis, 1);
            if !region.contains(&v) {
                continue;
            }
            let e = Edge { base: *u, axis: axis as u8 };
            let weight = w.weight(&e);
            let fv = forward.get(&v);
            let bv = backward.get(&v);
            let through = (fu as u64 + weight as u64 + bv as u64)
                .min(fv as u64 + weight as u64 + bu as u64);
            if through == total as u64 {
                f(e, weight);
            }
        }
    }
}

/// Full field computation: route union, pivotal count, and the route-length
/// extremes.
pub fn geodesic_field<W: EdgeWeights>(w: &W, region: &Region) -> Result<GeodesicField> {
    let (total, forward, backward) = fields(w, region)?;

    let mut route_edges: Vec<RouteEdge> = Vec::new();
    let mut on_route = VertexTable::new(region.bbox, false);
    scan_route_edges(w, region, total, &forward, &backward, |edge, weight| {
        let (u, v) = edge.endpoints();
        on_route.set(&u, true);
        on_route.set(&v, true);
        route_edges.push(RouteEdge { edge, weight, on_min_route: false });
    });
    on_route.set(&Vertex::ORIGIN, true);
    let mut route_vertices: Vec<Vertex> =
        region.trace().iter().copied().filter(|v| on_route.get(v)).collect();
    route_vertices.sort();
    let pivotal_count = route_edges.iter().filter(|re| re.weight == 1).count();

    let (n_min, min_route) = min_hop_route(w, region, total)?;
    let min_set: FxHashSet<Edge> = min_route.into_iter().collect();
    for re in &mut route_edges {
        re.on_min_route = min_set.contains(&re.edge);
    }

    let (n_max, n_max_exact) =
        longest_route(&forward, &backward, &route_edges, region, n_min);

    Ok(GeodesicField {
        total,
        forward,
        backward,
        route_edges,
        route_vertices,
        pivotal_count,
        n_min,
        n_max,
        n_max_exact,
    })
}

/// Lexicographic (time, hops) Dijkstra: among minimal-time paths, the fewest
/// edges. Returns the hop count and one witnessing route.
fn min_hop_route<W: EdgeWeights>(
    w: &W,
    region: &Region,
    total: u32,
) -> Result<(u32, Vec<Edge>)> {
    let d = w.dim();
    let mut time = VertexTable::new(region.bbox, UNREACHED);
    let mut hops = VertexTable::new(region.bbox, UNREACHED);
    let mut parent: FxHashMap<Vertex, Edge> = FxHashMap::default();
    let mut heap: BinaryHeap<Reverse<(u32, u32, Vertex)>> = BinaryHeap::new();
    time.set(&Vertex::ORIGIN, 0);
    hops.set(&Vertex::ORIGIN, 0);
    heap.push(Reverse((0, 0, Vertex::ORIGIN)));
    while let Some(Reverse((tv, hv, v))) = heap.pop() {
        if (tv, hv) > (time.get(&v), hops.get(&v)) {
            continue;
        }
        for (n, e) in v.neighbors(d) {
            if !region.contains(&n) {
                continue;
            }
            let nt = tv + w.weight(&e) as u32;
            let nh = hv + 1;
            if (nt, nh) < (time.get(&n), hops.get(&n)) {
                time.set(&n, nt);
                hops.set(&n, nh);
                parent.insert(n, e);
                heap.push(Reverse((nt, nh, n)));
            }
        }
    }
    let mut best: Option<(u32, Vertex)> = None;
    for t in region.targets() {
        if time.get(t) == total {
            let h = hops.get(t);
            if best.map(|(bh, bv)| (h, *t) < (bh, bv)).unwrap_or(true) {
                best = Some((h, *t));
            }
        }
    }
    let (n_min, mut at) =
        best.ok_or_else(|| Error::InvalidRegion("no target attains the passage time".into()))?;
    let mut route = Vec::with_capacity(n_min as usize);
    while at != Vertex::ORIGIN {
        let e = parent[&at];
        let (a, b) = e.endpoints();
        route.push(e);
        at = if a == at { b } else { a };
    }
    route.reverse();
    Ok((n_min, route))
}

/// Longest route by dynamic programming over the zero-cluster contraction.
///
/// Unit route edges step from forward level k to k + 1, so the contracted
/// route graph is a DAG layered by forward time. Inside one zero cluster a
/// simple route may wander; the exact entry-to-exit longest simple path is
/// used when the cluster is a tree or small, otherwise the shortest path
/// stands in as a lower bound and the result is flagged inexact.
fn longest_route(
    forward: &VertexTable<u32>,
    backward: &VertexTable<u32>,
    route_edges: &[RouteEdge],
    region: &Region,
    n_min: u32,
) -> (u32, bool) {
    // index route vertices
    let mut index: FxHashMap<Vertex, usize> = FxHashMap::default();
    let mut verts: Vec<Vertex> = Vec::new();
    let mut add = |v: Vertex, index: &mut FxHashMap<Vertex, usize>, verts: &mut Vec<Vertex>| {
        *index.entry(v).or_insert_with(|| {
            verts.push(v);
            verts.len() - 1
        })
    };
    for re in route_edges {
        let (u, v) = re.edge.endpoints();
        add(u, &mut index, &mut verts);
        add(v, &mut index, &mut verts);
    }
    let origin = add(Vertex::ORIGIN, &mut index, &mut verts);
    let n = verts.len();

    // zero-cluster union-find over route zero edges
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut zero_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for re in route_edges {
        if re.weight == 0 {
            let (u, v) = re.edge.endpoints();
            let (iu, iv) = (index[&u], index[&v]);
            zero_adj[iu].push(iv);
            zero_adj[iv].push(iu);
            let (ru, rv) = (find(&mut parent, iu), find(&mut parent, iv));
            if ru != rv {
                parent[ru] = rv;
            }
        }
    }
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if cluster_of[r] == usize::MAX {
            cluster_of[r] = clusters.len();
            clusters.push(Vec::new());
        }
        cluster_of[i] = cluster_of[r];
        clusters[cluster_of[i]].push(i);
    }

    // directed unit route edges (tail -> head by forward level) and, per
    // cluster, its outgoing directed edges
    let mut unit_pairs: Vec<(usize, usize)> = Vec::new();
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    for re in route_edges {
        if re.weight == 1 {
            let (u, v) = re.edge.endpoints();
            let (fu, fv) = (forward.get(&u), forward.get(&v));
            let (tail, head) = if fu < fv { (u, v) } else { (v, u) };
            debug_assert_eq!(forward.get(&head), forward.get(&tail) + 1);
            let (it, ih) = (index[&tail], index[&head]);
            debug_assert_ne!(cluster_of[it], cluster_of[ih]);
            outgoing[cluster_of[it]].push(unit_pairs.len());
            unit_pairs.push((it, ih));
        }
    }

    // vertices where a route may terminate: targets at backward distance 0
    let target_set: FxHashSet<Vertex> = region.targets().iter().copied().collect();
    let is_end =
        |v: usize, verts: &[Vertex]| target_set.contains(&verts[v]) && backward.get(&verts[v]) == 0;

    // internal longest simple paths within one cluster from an entry vertex
    const EXACT_SEARCH_LIMIT: usize = 20;
    const SEARCH_STEP_BUDGET: usize = 200_000;
    let exact_flag = std::cell::Cell::new(true);
    let cluster_paths = |cluster: &[usize], entry: usize| -> FxHashMap<usize, u32> {
        let members: FxHashSet<usize> = cluster.iter().copied().collect();
        let edge_count: usize =
            cluster.iter().map(|&v| zero_adj[v].iter().filter(|u| members.contains(u)).count()).sum::<usize>() / 2;
        let is_tree = edge_count == cluster.len() - 1;
        if is_tree {
            // unique simple paths: BFS depths are exact
            let mut depth = FxHashMap::default();
            depth.insert(entry, 0u32);
            let mut q = VecDeque::new();
            q.push_back(entry);
            while let Some(x) = q.pop_front() {
                let dx = depth[&x];
                for &y in &zero_adj[x] {
                    if members.contains(&y) && !depth.contains_key(&y) {
                        depth.insert(y, dx + 1);
                        q.push_back(y);
                    }
                }
            }
            depth
        } else if cluster.len() <= EXACT_SEARCH_LIMIT {
            // exhaustive longest simple path from the entry, with a budget
            let mut best: FxHashMap<usize, u32> = FxHashMap::default();
            let mut visited: FxHashSet<usize> = FxHashSet::default();
            let mut steps = 0usize;
            fn dfs(
                x: usize,
                len: u32,
                zero_adj: &[Vec<usize>],
                members: &FxHashSet<usize>,
                visited: &mut FxHashSet<usize>,
                best: &mut FxHashMap<usize, u32>,
                steps: &mut usize,
                budget: usize,
            ) -> bool {
                *steps += 1;
                if *steps > budget {
                    return false;
                }
                let entry = best.entry(x).or_insert(0);
                *entry = (*entry).max(len);
                visited.insert(x);
                for &y in &zero_adj[x] {
                    if members.contains(&y) && !visited.contains(&y) {
                        if !dfs(y, len + 1, zero_adj, members, visited, best, steps, budget) {
                            visited.remove(&x);
                            return false;
                        }
                    }
                }
                visited.remove(&x);
                true
            }
            if dfs(
                entry,
                0,
                &zero_adj,
                &members,
                &mut visited,
                &mut best,
                &mut steps,
                SEARCH_STEP_BUDGET,
            ) {
                best
            } else {
                exact_flag.set(false);
                shortest_depths(entry, &zero_adj, &members)
            }
        } else {
            exact_flag.set(false);
            shortest_depths(entry, &zero_adj, &members)
        }
    };

    fn shortest_depths(
        entry: usize,
        zero_adj: &[Vec<usize>],
        members: &FxHashSet<usize>,
    ) -> FxHashMap<usize, u32> {
        let mut depth = FxHashMap::default();
        depth.insert(entry, 0u32);
        let mut q = VecDeque::new();
        q.push_back(entry);
        while let Some(x) = q.pop_front() {
            let dx = depth[&x];
            for &y in &zero_adj[x] {
                if members.contains(&y) && !depth.contains_key(&y) {
                    depth.insert(y, dx + 1);
                    q.push_back(y);
                }
            }
        }
        depth
    }

    // best continuation from an entry vertex: longest remaining edge count of
    // a route suffix starting there; memoized, recursion descends levels
    let mut memo: FxHashMap<usize, Option<u32>> = FxHashMap::default();

    fn best_from(
        entry: usize,
        cluster_of: &[usize],
        clusters: &[Vec<usize>],
        outgoing: &[Vec<usize>],
        unit_edges: &[(usize, usize)],
        cluster_paths: &dyn Fn(&[usize], usize) -> FxHashMap<usize, u32>,
        is_end: &dyn Fn(usize) -> bool,
        memo: &mut FxHashMap<usize, Option<u32>>,
    ) -> Option<u32> {
        if let Some(v) = memo.get(&entry) {
            return *v;
        }
        let c = cluster_of[entry];
        let paths = cluster_paths(&clusters[c], entry);
        let mut best: Option<u32> = None;
        for (&x, &len) in &paths {
            if is_end(x) {
                best = Some(best.map_or(len, |b: u32| b.max(len)));
            }
            for &ei in &outgoing[c] {
                let (tail, head) = unit_edges[ei];
                if tail == x {
                    if let Some(cont) = best_from(
                        head,
                        cluster_of,
                        clusters,
                        outgoing,
                        unit_edges,
                        cluster_paths,
                        is_end,
                        memo,
                    ) {
                        let candidate = len + 1 + cont;
                        best = Some(best.map_or(candidate, |b| b.max(candidate)));
                    }
                }
            }
        }
        memo.insert(entry, best);
        best
    }

    let is_end_closure = |v: usize| is_end(v, &verts);
    let cluster_paths_closure =
        |cluster: &[usize], entry: usize| cluster_paths(cluster, entry);
    let answer = best_from(
        origin,
        &cluster_of,
        &clusters,
        &outgoing,
        &unit_pairs,
        &cluster_paths_closure,
        &is_end_closure,
        &mut memo,
    );

    let exact = exact_flag.get();
    let n_max = match answer {
        Some(x) => {
            if exact {
                debug_assert!(x >= n_min);
            }
            x.max(n_min)
        }
        None => n_min,
    };
    (n_max, exact)
}

/// Renormalization diagnostic: cover the route union with k-cubes, fatten
/// each cube by its Moore neighborhood, and count covered cubes whose
/// fattened block contains no unit-weight route edge.
pub fn bad_cube_count(field: &GeodesicField, d: usize, k: i32) -> usize {
    assert!(k >= 1, "cube side must be >= 1");
    let cube = |v: &Vertex| {
        let mut c = [0i32; crate::lattice::MAX_DIM];
        for a in 0..d {
            c[a] = v.0[a].div_euclid(k);
        }
        Vertex(c)
    };
    let occupied: FxHashSet<Vertex> = field.route_vertices.iter().map(&cube).collect();

    // cubes whose fattened neighborhood holds a unit route edge: a unit edge
    // with endpoint cubes (ca, cb) serves exactly the cubes whose Moore
    // neighborhood contains both
    let mut served: FxHashSet<Vertex> = FxHashSet::default();
    for re in &field.route_edges {
        if re.weight != 1 {
            continue;
        }
        let (u, v) = re.edge.endpoints();
        let (ca, cb) = (cube(&u), cube(&v));
        let mut ranges = [(0i32, 0i32); crate::lattice::MAX_DIM];
        for (a, range) in ranges.iter_mut().enumerate() {
            *range = ((ca.0[a].max(cb.0[a])) - 1, (ca.0[a].min(cb.0[a])) + 1);
        }
        let mut stack = vec![(0usize, Vertex::ORIGIN)];
        // product of per-axis ranges, depth-first
        while let Some((a, mut cur)) = stack.pop() {
            if a == d {
                served.insert(cur);
                continue;
            }
            for x in ranges[a].0..=ranges[a].1 {
                cur.0[a] = x;
                stack.push((a + 1, cur));
            }
        }
    }
    occupied.iter().filter(|c| !served.contains(c)).count()
}

/// Point-to-point route union: union of minimizing paths from the origin to
/// `target` inside a padded box.
pub fn point_to_point_routes<W: EdgeWeights>(
    w: &W,
    target: Vertex,
    margin: i32,
) -> Result<GeodesicField> {
    let region = Region::two_point(w.dim(), target, margin)?;
    geodesic_field(w, &region)
}
