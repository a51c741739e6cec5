/// Find `size` pairwise adjacent vertices among `candidates`.
///
/// Plain branch-and-bound; `size` is a structure parameter (the Henson clique
/// bound), so the depth stays small even when the graph is large.
pub(crate) fn find_clique(
    candidates: &[usize],
    size: usize,
    adjacent: &dyn Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let mut current = Vec::with_capacity(size);
    if extend(&mut current, candidates, size, adjacent) {
        Some(current)
    } else {
        None
    }
}

fn extend(
    current: &mut Vec<usize>,
    candidates: &[usize],
    size: usize,
    adjacent: &dyn Fn(usize, usize) -> bool,
) -> bool {
    if current.len() == size {
        return true;
    }
    for (idx, &v) in candidates.iter().enumerate() {
        if current.len() + (candidates.len() - idx) < size {
            return false;
        }
        let next: Vec<usize> = candidates[idx + 1..]
            .iter()
            .copied()
            .filter(|&w| adjacent(v, w))
            .collect();
        current.push(v);
        if extend(current, &next, size, adjacent) {
            return true;
        }
        current.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_triangle_only_when_present() {
        let edges = [(0, 1), (1, 2), (0, 2), (2, 3)];
        let adj = |a: usize, b: usize| edges.contains(&(a.min(b), a.max(b)));
        assert_eq!(find_clique(&[0, 1, 2, 3], 3, &adj), Some(vec![0, 1, 2]));
        assert_eq!(find_clique(&[1, 2, 3], 3, &adj), None);
        assert_eq!(find_clique(&[], 0, &adj), Some(vec![]));
    }
}
