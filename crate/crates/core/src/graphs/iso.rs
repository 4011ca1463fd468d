use super::ball::{multi_source_bfs, MarkedBall};
use super::refine::{initial_cells, refine};

/// Marked-edge isomorphism: a graph isomorphism sending `X` to `X'` in either
/// orientation. Both graphs are refined together (as a disjoint union) from
/// (distance to each endpoint, degree) seeds; the backtracking search then
/// only pairs nodes in the same refined cell.
pub fn is_isomorphic(b1: &MarkedBall, b2: &MarkedBall) -> bool {
    if b1.node_count() != b2.node_count() || b1.edges().len() != b2.edges().len() {
        return false;
    }
    let mut d1 = b1.degrees();
    let mut d2 = b2.degrees();
    d1.sort_unstable();
    d2.sort_unstable();
    if d1 != d2 {
        return false;
    }
    let (x, y) = b2.marked_edge();
    oriented(b1, b2, (x, y)) || oriented(b1, b2, (y, x))
}

fn oriented(b1: &MarkedBall, b2: &MarkedBall, target: (u32, u32)) -> bool {
    let n = b1.node_count();
    let adj1 = b1.adjacency();
    let adj2 = b2.adjacency();
    let (a1, c1) = b1.marked_edge();
    let (a2, c2) = target;

    let mut union: Vec<Vec<u32>> = adj1.clone();
    union.extend(adj2.iter().map(|l| l.iter().map(|&w| w + n as u32).collect::<Vec<_>>()));
    let da1 = multi_source_bfs(&adj1, &[a1]);
    let dc1 = multi_source_bfs(&adj1, &[c1]);
    let da2 = multi_source_bfs(&adj2, &[a2]);
    let dc2 = multi_source_bfs(&adj2, &[c2]);
    let key = |v: u32| {
        let v = v as usize;
        if v < n {
            (da1[v], dc1[v], adj1[v].len())
        } else {
            (da2[v - n], dc2[v - n], adj2[v - n].len())
        }
    };
    let cells = refine(&union, initial_cells(2 * n, key));
    let mut cell_of = vec![0usize; 2 * n];
    for (i, cell) in cells.iter().enumerate() {
        let left = cell.iter().filter(|&&v| (v as usize) < n).count();
        if 2 * left != cell.len() {
            return false;
        }
        for &v in cell {
            cell_of[v as usize] = i;
        }
    }

    let mut matrix2 = vec![false; n * n];
    for &(u, v) in b2.edges() {
        matrix2[u as usize * n + v as usize] = true;
        matrix2[v as usize * n + u as usize] = true;
    }
    // BFS order from the marked edge keeps each new node adjacent to a mapped one
    let dist1 = multi_source_bfs(&adj1, &[a1, c1]);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| (dist1[v as usize], v != a1, v != c1, v));

    let mut state = Matcher {
        n,
        adj1: &adj1,
        matrix2: &matrix2,
        cell_of: &cell_of,
        order: &order,
        map: vec![u32::MAX; n],
        used: vec![false; n],
    };
    state.map[a1 as usize] = a2;
    state.map[c1 as usize] = c2;
    state.used[a2 as usize] = true;
    state.used[c2 as usize] = true;
    if cell_of[a1 as usize] != cell_of[a2 as usize + n] || cell_of[c1 as usize] != cell_of[c2 as usize + n] {
        return false;
    }
    state.extend(2)
}

struct Matcher<'a> {
    n: usize,
    adj1: &'a [Vec<u32>],
    matrix2: &'a [bool],
    cell_of: &'a [usize],
    order: &'a [u32],
    map: Vec<u32>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn consistent(&self, v: u32, w: u32) -> bool {
        // mapped neighbours of v must be neighbours of w, and the neighbour
        // counts into the mapped set must agree
        let mut mapped_nbrs = 0;
        for &u in &self.adj1[v as usize] {
            let mu = self.map[u as usize];
            if mu != u32::MAX {
                mapped_nbrs += 1;
                if !self.matrix2[w as usize * self.n + mu as usize] {
                    return false;
                }
            }
        }
        let mut image_nbrs = 0;
        for (u, &mu) in self.map.iter().enumerate() {
            if mu != u32::MAX && u as u32 != v && self.matrix2[w as usize * self.n + mu as usize] {
                image_nbrs += 1;
            }
        }
        mapped_nbrs == image_nbrs
    }

    fn extend(&mut self, pos: usize) -> bool {
        if pos == self.order.len() {
            return true;
        }
        let v = self.order[pos];
        let cell = self.cell_of[v as usize];
        for w in 0..self.n as u32 {
            if self.used[w as usize] || self.cell_of[w as usize + self.n] != cell {
                continue;
            }
            if !self.consistent(v, w) {
                continue;
            }
            self.map[v as usize] = w;
            self.used[w as usize] = true;
            if self.extend(pos + 1) {
                return true;
            }
            self.map[v as usize] = u32::MAX;
            self.used[w as usize] = false;
        }
        false
    }
}
