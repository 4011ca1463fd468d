//! Ordered colour refinement. Cells split in place and sub-cells are ordered by
//! their neighbour-cell signature, so the resulting cell sequence depends only
//! on the graph structure and the initial cell sequence, never on node labels.

pub(crate) type Cells = Vec<Vec<u32>>;

/// Groups nodes by `key`, cells ordered by ascending key.
pub(crate) fn initial_cells<K: Ord + Clone>(n: usize, key: impl Fn(u32) -> K) -> Cells {
    let mut nodes: Vec<u32> = (0..n as u32).collect();
    nodes.sort_by_key(|&v| (key(v), v));
    let mut cells: Cells = Vec::new();
    let mut last: Option<K> = None;
    for v in nodes {
        let k = key(v);
        if last.as_ref() != Some(&k) {
            cells.push(Vec::new());
            last = Some(k);
        }
        cells.last_mut().unwrap().push(v);
    }
    cells
}

/// Refines until equitable: two nodes share a cell only if they have the same
/// number of neighbours in every cell.
pub(crate) fn refine(adj: &[Vec<u32>], mut cells: Cells) -> Cells {
    let mut cell_of = vec![0u32; adj.len()];
    loop {
        for (i, cell) in cells.iter().enumerate() {
            for &v in cell {
                cell_of[v as usize] = i as u32;
            }
        }
        let mut next: Cells = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, u32)> = cell
                .iter()
                .map(|&v| {
                    let mut sig: Vec<u32> = adj[v as usize].iter().map(|&w| cell_of[w as usize]).collect();
                    sig.sort_unstable();
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|(_, v)| *v).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

pub(crate) fn is_discrete(cells: &Cells) -> bool {
    cells.iter().all(|c| c.len() == 1)
}

/// Splits `v` out of cell `idx`, placing it first.
pub(crate) fn individualize(cells: &Cells, idx: usize, v: u32) -> Cells {
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.extend_from_slice(&cells[..idx]);
    out.push(vec![v]);
    out.push(cells[idx].iter().copied().filter(|&w| w != v).collect());
    out.extend_from_slice(&cells[idx + 1..]);
    out
}
