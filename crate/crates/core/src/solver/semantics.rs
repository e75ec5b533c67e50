//! Dung semantics over a defeat relation given as attacker lists.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::SolveError;

/// Least fixpoint of the characteristic function.
pub fn grounded(attackers: &[Vec<usize>]) -> BTreeSet<usize> {
    let n = attackers.len();
    let mut accepted: BTreeSet<usize> = BTreeSet::new();
    loop {
        let mut defeated = alloc::vec![false; n];
        for (x, atts) in attackers.iter().enumerate() {
            if atts.iter().any(|a| accepted.contains(a)) {
                defeated[x] = true;
            }
        }
        let next: BTreeSet<usize> = (0..n)
            .filter(|x| attackers[*x].iter().all(|y| defeated[*y]))
            .collect();
        if next == accepted {
            return accepted;
        }
        accepted = next;
    }
}

/// All maximal admissible sets, each sorted, in lexicographic order.
pub fn preferred(attackers: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<usize>>, SolveError> {
    let n = attackers.len();
    if n > cap || n > 64 {
        return Err(SolveError::GraphTooLarge { nodes: n, cap });
    }
    let mut att = alloc::vec![0u64; n];
    let mut out = alloc::vec![0u64; n];
    for (x, atts) in attackers.iter().enumerate() {
        for &y in atts {
            att[x] |= 1 << y;
            out[y] |= 1 << x;
        }
    }
    let mut admissible: Vec<u64> = Vec::new();
    search(0, 0, n, &att, &out, &mut admissible);

    admissible.sort_by_key(|s| core::cmp::Reverse(s.count_ones()));
    let mut maximal: Vec<u64> = Vec::new();
    for s in admissible {
        if !maximal.iter().any(|m| s & m == s) {
            maximal.push(s);
        }
    }
    let mut exts: Vec<Vec<usize>> = maximal
        .into_iter()
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    exts.sort();
    Ok(exts)
}

fn search(i: usize, set: u64, n: usize, att: &[u64], out: &[u64], acc: &mut Vec<u64>) {
    if i == n {
        let counter = (0..n)
            .filter(|j| set & (1 << j) != 0)
            .fold(0u64, |m, j| m | out[j]);
        let defended = (0..n)
            .filter(|j| set & (1 << j) != 0)
            .all(|j| att[j] & !counter == 0);
        if defended {
            acc.push(set);
        }
        return;
    }
    search(i + 1, set, n, att, out, acc);
    let with = set | (1 << i);
    if att[i] & with == 0 && out[i] & set == 0 {
        search(i + 1, with, n, att, out, acc);
    }
}

/// Every node that can reach one of `seeds` along defeat edges, seeds
/// included. This set is closed under attackers.
pub fn ancestors(attackers: &[Vec<usize>], seeds: &[usize]) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = seeds.iter().copied().collect();
    let mut stack: Vec<usize> = seeds.to_vec();
    while let Some(x) = stack.pop() {
        for &y in &attackers[x] {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

/// The sub-framework on `nodes`, renumbered; returns the local attacker
/// lists and the local-to-global map.
pub fn restrict(attackers: &[Vec<usize>], nodes: &BTreeSet<usize>) -> (Vec<Vec<usize>>, Vec<usize>) {
    let map: Vec<usize> = nodes.iter().copied().collect();
    let local = |g: usize| map.binary_search(&g).ok();
    let sub = map
        .iter()
        .map(|g| attackers[*g].iter().filter_map(|a| local(*a)).collect())
        .collect();
    (sub, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn no_edges_accepts_everything() {
        let atts = vec![vec![]; 4];
        assert_eq!(grounded(&atts).len(), 4);
        assert_eq!(preferred(&atts, 20).unwrap(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn even_cycle() {
        let atts = vec![vec![1], vec![0]];
        assert!(grounded(&atts).is_empty());
        assert_eq!(preferred(&atts, 20).unwrap(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn reinstatement_chain() {
        // 2 -> 1 -> 0
        let atts = vec![vec![1], vec![2], vec![]];
        assert_eq!(grounded(&atts), [0, 2].into());
        assert_eq!(preferred(&atts, 20).unwrap(), vec![vec![0, 2]]);
    }

    #[test]
    fn self_attack_and_odd_cycle() {
        let atts = vec![vec![0]];
        assert!(grounded(&atts).is_empty());
        assert_eq!(preferred(&atts, 20).unwrap(), vec![Vec::<usize>::new()]);
        let odd = vec![vec![2], vec![0], vec![1]];
        assert_eq!(preferred(&odd, 20).unwrap(), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn cap_is_enforced() {
        let atts = vec![vec![]; 21];
        assert_eq!(
            preferred(&atts, 20),
            Err(SolveError::GraphTooLarge { nodes: 21, cap: 20 })
        );
    }

    #[test]
    fn ancestors_follow_attackers() {
        let atts = vec![vec![1], vec![2], vec![], vec![0]];
        assert_eq!(ancestors(&atts, &[0]), [0, 1, 2].into());
        let (sub, map) = restrict(&atts, &[0, 1, 2].into());
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(sub, vec![vec![1], vec![2], vec![]]);
    }
}
