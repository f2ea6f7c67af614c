//! Bridges of a small undirected graph given as an edge list on local
//! indices `0..n`, via iterative low-link DFS.

/// Returns `is_bridge[e]` for every edge of the list.
pub(crate) fn find_bridges(n: usize, edges: &[(u32, u32)]) -> Vec<bool> {
    let adj = Csr::new(n, edges);
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut is_bridge = vec![false; edges.len()];
    let mut time = 0u32;
    // (vertex, edge used to enter it, next adjacency cursor)
    let mut stack: Vec<(u32, u32, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != u32::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root as u32, u32::MAX, adj.start(root)));
        while let Some(top) = stack.last_mut() {
            let (v, via, cursor) = *top;
            let v = v as usize;
            if cursor < adj.end(v) {
                top.2 += 1;
                let (w, e) = adj.entry(cursor);
                if e == via {
                    continue;
                }
                let wu = w as usize;
                if disc[wu] == u32::MAX {
                    disc[wu] = time;
                    low[wu] = time;
                    time += 1;
                    stack.push((w, e, adj.start(wu)));
                } else {
                    low[v] = low[v].min(disc[wu]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    let parent = parent as usize;
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[via as usize] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Vertices reachable from `source` without crossing a bridge.
pub(crate) fn two_edge_component(
    n: usize,
    edges: &[(u32, u32)],
    is_bridge: &[bool],
    source: u32,
) -> Vec<u32> {
    let adj = Csr::new(n, edges);
    let mut seen = vec![false; n];
    let mut out = vec![source];
    seen[source as usize] = true;
    let mut head = 0;
    while head < out.len() {
        let v = out[head] as usize;
        head += 1;
        for c in adj.start(v)..adj.end(v) {
            let (w, e) = adj.entry(c);
            if !is_bridge[e as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                out.push(w);
            }
        }
    }
    out
}

struct Csr {
    offsets: Vec<usize>,
    targets: Vec<(u32, u32)>,
}

impl Csr {
    fn new(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(a, b) in edges {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![(0u32, 0u32); 2 * edges.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            targets[fill[a as usize]] = (b, e as u32);
            fill[a as usize] += 1;
            targets[fill[b as usize]] = (a, e as u32);
            fill[b as usize] += 1;
        }
        Self { offsets, targets }
    }

    fn start(&self, v: usize) -> usize {
        self.offsets[v]
    }

    fn end(&self, v: usize) -> usize {
        self.offsets[v + 1]
    }

    fn entry(&self, c: usize) -> (u32, u32) {
        self.targets[c]
    }
}
