//! Exact min-cost flow used for Wasserstein-1 between small discrete
//! distributions. All masses and costs are integers; results are exact.

/// Solve the transportation problem between `supply` and `demand` masses with
/// `cost[s][d]` the unit cost of moving from supply s to demand d.
///
/// Total supply must equal total demand. Returns the exact minimum total
/// cost. Uses successive shortest augmenting paths with Bellman-Ford (the
/// instances here are tiny: a handful of support points per side).
pub fn min_cost_transport(supply: &[i128], demand: &[i128], cost: &[Vec<i128>]) -> i128 {
    let s = supply.len();
    let d = demand.len();
    debug_assert_eq!(
        supply.iter().sum::<i128>(),
        demand.iter().sum::<i128>(),
        "unbalanced transport problem"
    );

    // node ids: 0 = source, 1..=s supplies, s+1..=s+d demands, s+d+1 sink
    let n = s + d + 2;
    let source = 0;
    let sink = s + d + 1;

    struct Edge {
        to: usize,
        cap: i128,
        cost: i128,
    }
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let add_edge = |edges: &mut Vec<Edge>, adj: &mut Vec<Vec<usize>>, u: usize, v: usize, cap: i128, cost: i128| {
        adj[u].push(edges.len());
        edges.push(Edge { to: v, cap, cost });
        adj[v].push(edges.len());
        edges.push(Edge { to: u, cap: 0, cost: -cost });
    };

    for (i, &m) in supply.iter().enumerate() {
        add_edge(&mut edges, &mut adj, source, 1 + i, m, 0);
    }
    for (j, &m) in demand.iter().enumerate() {
        add_edge(&mut edges, &mut adj, s + 1 + j, sink, m, 0);
    }
    let cap_inf: i128 = supply.iter().sum::<i128>() + 1;
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            add_edge(&mut edges, &mut adj, 1 + i, s + 1 + j, cap_inf, c);
        }
    }

    const INF: i128 = i128::MAX / 4;
    let mut total_cost: i128 = 0;
    loop {
        // Bellman-Ford shortest path from source by residual cost
        let mut dist = vec![INF; n];
        let mut prev_edge = vec![usize::MAX; n];
        dist[source] = 0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u] == INF {
                    continue;
                }
                for &ei in &adj[u] {
                    let e = &edges[ei];
                    if e.cap > 0 && dist[u] + e.cost < dist[e.to] {
                        dist[e.to] = dist[u] + e.cost;
                        prev_edge[e.to] = ei;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == INF {
            break; // all demand satisfied (or infeasible, guarded by caller)
        }
        // bottleneck along the path
        let mut push = INF;
        let mut v = sink;
        while v != source {
            let ei = prev_edge[v];
            push = push.min(edges[ei].cap);
            v = edges[ei ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let ei = prev_edge[v];
            edges[ei].cap -= push;
            edges[ei ^ 1].cap += push;
            v = edges[ei ^ 1].to;
        }
        total_cost += push * dist[sink];
    }
    total_cost
}
