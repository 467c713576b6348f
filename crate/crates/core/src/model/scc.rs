use super::InteractionMatrix;

/// Strongly connected components of the support digraph together with the
/// condensation DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Components in a topological order of the condensation (every edge goes
    /// from an earlier component to a later one). Members are sorted.
    pub components: Vec<Vec<usize>>,
    /// `component_of[i]` is the index into `components` holding process `i`.
    pub component_of: Vec<usize>,
    /// Condensation edges `(from, to)`, sorted and deduplicated, no self loops.
    pub edges: Vec<(usize, usize)>,
}

impl Condensation {
    /// Components with an edge into `component`.
    pub fn predecessors(&self, component: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .filter(move |&&(_, to)| to == component)
            .map(|&(from, _)| from)
    }
}

/// Tarjan's algorithm on the digraph with an edge `j → h` whenever
/// `γ_{j,h} > 0`. Iterative, so deep chains do not exhaust the stack.
pub fn strongly_connected_components(matrix: &InteractionMatrix) -> Condensation {
    let n = matrix.n();
    let successors: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&h| matrix.get(j, h) > 0.0).collect())
        .collect();

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    // Tarjan emits components sinks-first.
    let mut emitted: Vec<Vec<usize>> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, position of the next successor to examine)
        let mut call_stack: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(node, pos)) = call_stack.last() {
            if let Some(&succ) = successors[node].get(pos) {
                if let Some(top) = call_stack.last_mut() {
                    top.1 += 1;
                }
                if index[succ] == UNVISITED {
                    index[succ] = next_index;
                    lowlink[succ] = next_index;
                    next_index += 1;
                    stack.push(succ);
                    on_stack[succ] = true;
                    call_stack.push((succ, 0));
                } else if on_stack[succ] {
                    lowlink[node] = lowlink[node].min(index[succ]);
                }
                continue;
            }
            call_stack.pop();
            if let Some(&(parent, _)) = call_stack.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[node]);
            }
            if lowlink[node] == index[node] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == node {
                        break;
                    }
                }
                component.sort_unstable();
                emitted.push(component);
            }
        }
    }

    emitted.reverse();
    let mut component_of = vec![0usize; n];
    for (c, members) in emitted.iter().enumerate() {
        for &m in members {
            component_of[m] = c;
        }
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (j, succ) in successors.iter().enumerate() {
        for &h in succ {
            let (a, b) = (component_of[j], component_of[h]);
            if a != b {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Condensation {
        components: emitted,
        component_of,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scc(rows: &[Vec<f64>]) -> Condensation {
        strongly_connected_components(&InteractionMatrix::validate(rows).unwrap())
    }

    #[test]
    fn upper_triangular_support() {
        let c = scc(&[vec![0.5, 0.3], vec![0.0, 0.5]]);
        assert_eq!(c.components, vec![vec![0], vec![1]]);
        assert_eq!(c.edges, vec![(0, 1)]);
    }

    #[test]
    fn lower_triangular_support_is_ordered_topologically() {
        let c = scc(&[vec![0.5, 0.0], vec![0.3, 0.5]]);
        assert_eq!(c.components, vec![vec![1], vec![0]]);
        assert_eq!(c.edges, vec![(0, 1)]);
    }

    #[test]
    fn irreducible_example_single_component() {
        let c = scc(&[vec![0.5, 0.2], vec![0.45, 0.2]]);
        assert_eq!(c.components, vec![vec![0, 1]]);
        assert!(c.edges.is_empty());
    }

    #[test]
    fn single_process() {
        let c = scc(&[vec![0.9]]);
        assert_eq!(c.components, vec![vec![0]]);
    }

    #[test]
    fn mixed_chain() {
        // {0,1} cycle feeds 2; 3 feeds 2; 2 isolated otherwise.
        let rows = vec![
            vec![0.0, 0.5, 0.2, 0.0],
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.3, 0.0],
            vec![0.0, 0.0, 0.1, 0.4],
        ];
        let c = scc(&rows);
        assert_eq!(c.components.len(), 3);
        let a = c.component_of[0];
        assert_eq!(c.component_of[1], a);
        let b = c.component_of[2];
        let d = c.component_of[3];
        assert!(a < b && d < b);
        assert!(c.edges.contains(&(a, b)) && c.edges.contains(&(d, b)));
        assert_eq!(c.edges.len(), 2);
    }

    #[test]
    fn long_chain_does_not_overflow() {
        let n = 5000;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|h| if h == j + 1 { 0.5 } else { 0.0 }).collect())
            .collect();
        let c = scc(&rows);
        assert_eq!(c.components.len(), n);
        for (i, comp) in c.components.iter().enumerate() {
            assert_eq!(comp, &vec![i]);
        }
    }
}
