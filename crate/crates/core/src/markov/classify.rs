use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::kernel::StochasticKernel;

/// Communication structure of a finite chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainClassification {
    pub irreducible: bool,
    /// Period of the recurrent class containing the reference state
    /// (the first recurrent class for reducible chains).
    pub period: usize,
    /// Closed communicating classes, each sorted, ordered by smallest member.
    pub recurrent_classes: Vec<Vec<usize>>,
}

impl ChainClassification {
    pub fn is_aperiodic(&self) -> bool {
        self.period == 1
    }
}

pub fn classify(kernel: &StochasticKernel) -> ChainClassification {
    let n = kernel.len();
    let mut graph = DiGraph::<usize, ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|i| graph.add_node(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if kernel.get(i, j) > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let components = tarjan_scc(&graph);
    let mut component_of = vec![0usize; n];
    for (c, comp) in components.iter().enumerate() {
        for node in comp {
            component_of[graph[*node]] = c;
        }
    }

    let mut recurrent_classes: Vec<Vec<usize>> = components
        .iter()
        .enumerate()
        .filter(|(c, comp)| {
            comp.iter().all(|node| {
                let i = graph[*node];
                (0..n).all(|j| kernel.get(i, j) == 0.0 || component_of[j] == *c)
            })
        })
        .map(|(_, comp)| {
            let mut states: Vec<usize> = comp.iter().map(|node| graph[*node]).collect();
            states.sort_unstable();
            states
        })
        .collect();
    recurrent_classes.sort_by_key(|c| c[0]);

    let irreducible = components.len() == 1;
    let period = class_period(kernel, &recurrent_classes[0]);
    ChainClassification {
        irreducible,
        period,
        recurrent_classes,
    }
}

/// gcd of `level(u) + 1 - level(v)` over edges inside a closed class, with BFS levels
/// from the class's smallest state.
fn class_period(kernel: &StochasticKernel, class: &[usize]) -> usize {
    let n = kernel.len();
    let mut in_class = vec![false; n];
    for &i in class {
        in_class[i] = true;
    }
    let mut level: Vec<Option<i64>> = vec![None; n];
    let root = class[0];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    let mut g: i64 = 0;
    while let Some(u) = queue.pop_front() {
        let lu = level[u].unwrap_or(0);
        for v in 0..n {
            if !in_class[v] || kernel.get(u, v) == 0.0 {
                continue;
            }
            match level[v] {
                None => {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
                Some(lv) => g = gcd(g, (lu + 1 - lv).abs()),
            }
        }
    }
    g.max(1) as usize
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_is_irreducible_with_period_two() {
        let k = StochasticKernel::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = classify(&k);
        assert!(c.irreducible);
        assert_eq!(c.period, 2);
        assert_eq!(c.recurrent_classes, vec![vec![0, 1]]);
    }

    #[test]
    fn identity_has_two_recurrent_classes() {
        let k = StochasticKernel::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c = classify(&k);
        assert!(!c.irreducible);
        assert_eq!(c.recurrent_classes, vec![vec![0], vec![1]]);
        assert_eq!(c.period, 1);
    }

    #[test]
    fn positive_kernel_is_aperiodic() {
        let k = StochasticKernel::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let c = classify(&k);
        assert!(c.irreducible);
        assert!(c.is_aperiodic());
    }

    #[test]
    fn transient_state_is_not_recurrent() {
        let k = StochasticKernel::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let c = classify(&k);
        assert!(!c.irreducible);
        assert_eq!(c.recurrent_classes, vec![vec![1, 2]]);
        assert_eq!(c.period, 2);
    }

    #[test]
    fn mixed_cycle_lengths_give_gcd() {
        // 0->1->0 has length 2, 0->2->3->1->0 has length 4
        let k = StochasticKernel::from_rows(&[
            vec![0.0, 0.5, 0.5, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        let c = classify(&k);
        assert!(c.irreducible);
        assert_eq!(c.period, 2);

        // adding a self-loop makes it aperiodic
        let k = StochasticKernel::from_rows(&[
            vec![0.1, 0.4, 0.5, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(classify(&k).period, 1);
    }
}
