//! Dominance relations for minimize-all objective vectors.

/// `a` dominates `b`: no worse everywhere and better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        better |= x < y;
    }
    better
}

/// Non-dominated sorting: rank 0 is the Pareto front, rank 1 the front of
/// the rest, and so on.
pub fn non_dominated_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![usize::MAX; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = r;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        current = next;
        r += 1;
    }
    rank
}

/// Indices of the non-dominated points, in input order.
pub fn pareto_front(points: &[Vec<f64>]) -> Vec<usize> {
    non_dominated_ranks(points)
        .into_iter()
        .enumerate()
        .filter(|(_, r)| *r == 0)
        .map(|(i, _)| i)
        .collect()
}

/// Crowding distance of each member of `members` along objective `k`:
/// infinite at the extremes, otherwise the normalized gap between neighbours.
fn crowding_along(points: &[Vec<f64>], members: &[usize], k: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| points[members[a]][k].total_cmp(&points[members[b]][k]).then(a.cmp(&b)));
    let mut out = vec![0.0; members.len()];
    let (Some(&first), Some(&last)) = (order.first(), order.last()) else {
        return out;
    };
    let span = points[members[last]][k] - points[members[first]][k];
    out[first] = f64::INFINITY;
    out[last] = f64::INFINITY;
    if span > 0.0 {
        for w in order.windows(3) {
            out[w[1]] = (points[members[w[2]]][k] - points[members[w[0]]][k]) / span;
        }
    }
    out
}

/// Sort by non-dominated rank, breaking ties within a rank by crowding
/// distance along the first objective (larger first) and then by index; the
/// first `ceil(gamma * n)` are good.
pub fn split_by_dominance(points: &[Vec<f64>], gamma: f64) -> (Vec<usize>, Vec<usize>) {
    let n = points.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let ranks = non_dominated_ranks(points);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut crowd = vec![0.0; n];
    for r in 0..=max_rank {
        let members: Vec<usize> = (0..n).filter(|&i| ranks[i] == r).collect();
        for (m, c) in members.iter().zip(crowding_along(points, &members, 0)) {
            crowd[*m] = c;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ranks[a]
            .cmp(&ranks[b])
            .then(crowd[b].total_cmp(&crowd[a]))
            .then(a.cmp(&b))
    });
    let n_good = ((gamma * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let bad = order.split_off(n_good);
    (order, bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_basics() {
        assert!(dominates(&[0.0, 1.0], &[1.0, 1.0]));
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(!dominates(&[0.0, 2.0], &[1.0, 1.0]));
    }

    #[test]
    fn ranks_peel_fronts() {
        let pts = vec![vec![0.0, 3.0], vec![1.0, 1.0], vec![3.0, 0.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(non_dominated_ranks(&pts), vec![0, 0, 0, 1, 2]);
        assert_eq!(pareto_front(&pts), vec![0, 1, 2]);
    }

    #[test]
    fn single_objective_is_a_quantile_split() {
        let pts: Vec<Vec<f64>> = [5.0, 1.0, 4.0, 2.0, 3.0, 0.0, 9.0, 8.0].iter().map(|v| vec![*v]).collect();
        let (good, bad) = split_by_dominance(&pts, 0.25);
        assert_eq!(good, vec![5, 1]);
        assert_eq!(bad.len(), 6);
    }

    #[test]
    fn gamma_quarter_of_hundred_is_twenty_five() {
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![(i * 37 % 100) as f64, (i * 11 % 100) as f64]).collect();
        let (good, bad) = split_by_dominance(&pts, 0.25);
        assert_eq!((good.len(), bad.len()), (25, 75));
    }

    #[test]
    fn dominating_point_is_always_good() {
        let mut pts: Vec<Vec<f64>> = (0..40).map(|i| vec![1.0 + i as f64, 50.0 - i as f64]).collect();
        pts.push(vec![0.0, 0.0]);
        let (good, _) = split_by_dominance(&pts, 0.01);
        assert_eq!(good, vec![40]);
    }
}
