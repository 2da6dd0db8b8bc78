//! Minimal feedback vertex sets of small directed graphs.
//!
//! Graphs are adjacency lists over `0..adj.len()`.

use std::cell::RefCell;
use std::collections::HashSet;

/// Strongly connected components that carry a cycle (a self-loop counts),
/// each sorted, in order of their smallest vertex.
pub(crate) fn cyclic_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    // iterative Kosaraju: finish order on the graph, then sweep the reverse
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((u, i)) = stack.pop() {
            if let Some(&w) = adj[u].get(i) {
                stack.push((u, i + 1));
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(u);
            }
        }
    }
    let mut radj = vec![Vec::new(); n];
    for (u, succ) in adj.iter().enumerate() {
        for &w in succ {
            radj[w].push(u);
        }
    }
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for &s in order.iter().rev() {
        if assigned[s] {
            continue;
        }
        assigned[s] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in &radj[u] {
                if !assigned[w] {
                    assigned[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        if comp.len() > 1 || adj[s].contains(&s) {
            out.push(comp);
        }
    }
    out.sort_unstable_by_key(|c| c[0]);
    out
}

/// Why [`minimal_feedback_sets`] gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Exhausted {
    /// More than the shared step budget.
    Steps,
    /// Some feedback set under construction would exceed the size cap.
    Size,
}

/// Every inclusion-minimal `F ⊆ verts` such that the subgraph induced on
/// `verts \ F` is acyclic, each sorted, listed by size and then
/// lexicographically.
///
/// Gives up when the search needs more than `*budget` steps (shared across
/// calls), finds more than `*budget` sets, or when a set with more than `max_size` vertices would have to be
/// examined; vertex-disjoint cycles bound the latter from below up front.
pub(crate) fn minimal_feedback_sets(
    adj: &[Vec<usize>],
    verts: &[usize],
    budget: &mut u64,
    max_size: usize,
) -> Result<Vec<Vec<usize>>, Exhausted> {
    let mut local = vec![usize::MAX; adj.len()];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let ladj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .map(|&w| local[w])
                .filter(|&w| w != usize::MAX)
                .collect()
        })
        .collect();
    let words = verts.len().div_ceil(64).max(1);
    let mut search = Search {
        radj: reverse(&ladj),
        adj: ladj,
        bfs: RefCell::new(Bfs {
            stamp: 0,
            mark: vec![0; verts.len()],
            parent: vec![0; verts.len()],
            queue: Vec::with_capacity(verts.len()),
        }),
        seen: HashSet::new(),
        found: Vec::new(),
        found_cap: *budget,
        budget,
        max_size,
    };
    if search.disjoint_cycles(&vec![0; words], max_size + 1) > max_size {
        return Err(Exhausted::Size);
    }
    search.visit(&mut vec![0; words], 0)?;
    // every leaf passed the private-cycle test, so each is minimal
    let mut kept: Vec<Vec<usize>> = search.found.iter().map(|b| members(b)).collect();
    for f in &mut kept {
        for v in f.iter_mut() {
            *v = verts[*v];
        }
        f.sort_unstable();
    }
    kept.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(kept)
}

type Bits = Vec<u64>;

fn has(bits: &[u64], v: usize) -> bool {
    bits[v / 64] >> (v % 64) & 1 == 1
}

fn members(bits: &[u64]) -> Vec<usize> {
    (0..bits.len() * 64).filter(|&v| has(bits, v)).collect()
}

fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut radj = vec![Vec::new(); adj.len()];
    for (u, succ) in adj.iter().enumerate() {
        for &w in succ {
            radj[w].push(u);
        }
    }
    radj
}

struct Search<'b> {
    adj: Vec<Vec<usize>>,
    radj: Vec<Vec<usize>>,
    bfs: RefCell<Bfs>,
    seen: HashSet<Bits>,
    found: Vec<Bits>,
    found_cap: u64,
    budget: &'b mut u64,
    max_size: usize,
}

impl Search<'_> {
    fn visit(&mut self, removed: &mut Bits, size: usize) -> Result<(), Exhausted> {
        if !self.seen.insert(removed.clone()) {
            return Ok(());
        }
        *self.budget = self.budget.checked_sub(1).ok_or(Exhausted::Steps)?;
        if !self.all_private(removed) {
            return Ok(());
        }
        let Some(cycle) = self.short_cycle(removed) else {
            if self.found.len() as u64 >= self.found_cap {
                return Err(Exhausted::Steps);
            }
            self.found.push(removed.clone());
            return Ok(());
        };
        if size >= self.max_size {
            return Err(Exhausted::Size);
        }
        for v in cycle {
            removed[v / 64] |= 1 << (v % 64);
            let r = self.visit(removed, size + 1);
            removed[v / 64] &= !(1 << (v % 64));
            r?;
        }
        Ok(())
    }

    /// Whether every removed vertex still lies on a cycle avoiding the other
    /// removed vertices. Without one it is redundant in every superset.
    fn all_private(&self, removed: &[u64]) -> bool {
        let mut alive: Vec<bool> = (0..self.adj.len()).map(|v| !has(removed, v)).collect();
        members(removed).into_iter().all(|v| {
            alive[v] = true;
            let private = self.cycle_through(v, &alive).is_some();
            alive[v] = false;
            private
        })
    }

    /// Size of a greedy packing of vertex-disjoint cycles avoiding `removed`,
    /// counted up to `stop`.
    fn disjoint_cycles(&self, removed: &[u64], stop: usize) -> usize {
        let mut used = removed.to_vec();
        let mut count = 0;
        while count < stop {
            let Some(c) = self.short_cycle(&used) else {
                break;
            };
            for v in c {
                used[v / 64] |= 1 << (v % 64);
            }
            count += 1;
        }
        count
    }

    /// A short cycle avoiding `removed`, or `None` if there is none.
    fn short_cycle(&self, removed: &[u64]) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut alive: Vec<bool> = (0..n).map(|v| !has(removed, v)).collect();
        // peel vertices without a live successor; what stays can reach a cycle
        let mut out_deg: Vec<usize> = (0..n)
            .map(|u| self.adj[u].iter().filter(|&&w| alive[w]).count())
            .collect();
        let mut queue: Vec<usize> = (0..n).filter(|&u| alive[u] && out_deg[u] == 0).collect();
        while let Some(u) = queue.pop() {
            alive[u] = false;
            for &p in &self.radj[u] {
                if alive[p] {
                    out_deg[p] -= 1;
                    if out_deg[p] == 0 {
                        queue.push(p);
                    }
                }
            }
        }
        let core: Vec<usize> = (0..n).filter(|&u| alive[u]).collect();
        if core.is_empty() {
            return None;
        }
        if let Some(&v) = core.iter().find(|&&v| self.adj[v].contains(&v)) {
            return Some(vec![v]);
        }
        let mut best: Option<Vec<usize>> = None;
        for &s in core.iter().take(8) {
            if let Some(c) = self.cycle_through(s, &alive) {
                if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                    best = Some(c);
                }
            }
        }
        if best.is_some() {
            return best;
        }
        // walk inside the core until a vertex repeats
        let mut pos = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut u = core[0];
        while pos[u] == usize::MAX {
            pos[u] = walk.len();
            walk.push(u);
            u = *self.adj[u]
                .iter()
                .find(|&&w| alive[w])
                .expect("core vertices keep a successor");
        }
        let mut c = walk.split_off(pos[u]);
        c.sort_unstable();
        Some(c)
    }

    /// Shortest cycle through `s` among `alive` vertices.
    fn cycle_through(&self, s: usize, alive: &[bool]) -> Option<Vec<usize>> {
        let mut bfs = self.bfs.borrow_mut();
        let Bfs {
            stamp,
            mark,
            parent,
            queue,
        } = &mut *bfs;
        *stamp = stamp.wrapping_add(1);
        if *stamp == 0 {
            mark.fill(0);
            *stamp = 1;
        }
        queue.clear();
        queue.push(s);
        mark[s] = *stamp;
        let mut head = 0;
        while let Some(&u) = queue.get(head) {
            head += 1;
            for &w in &self.adj[u] {
                if !alive[w] {
                    continue;
                }
                if w == s {
                    let mut c = vec![u];
                    let mut at = u;
                    while at != s {
                        at = parent[at];
                        c.push(at);
                    }
                    c.sort_unstable();
                    return Some(c);
                }
                if mark[w] != *stamp {
                    mark[w] = *stamp;
                    parent[w] = u;
                    queue.push(w);
                }
            }
        }
        None
    }
}

/// Reusable breadth-first search buffers; `mark[v] == stamp` means visited.
struct Bfs {
    stamp: u32,
    mark: Vec<u32>,
    parent: Vec<usize>,
    queue: Vec<usize>,
}
