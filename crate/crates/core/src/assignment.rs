//! Exact rectangular linear assignment (Hungarian method with potentials).

/// Minimum-cost assignment of every row to a distinct column.
///
/// `costs` is row-major with `rows <= cols`. Returns the column of each row
/// and the total cost. Runs in `O(rows^2 * cols)`.
pub fn solve(costs: &[f64], rows: usize, cols: usize) -> (Vec<usize>, f64) {
    assert!(rows <= cols, "assignment needs rows <= cols");
    assert_eq!(costs.len(), rows * cols);
    if rows == 0 {
        return (Vec::new(), 0.0);
    }
    let cost = |i: usize, j: usize| costs[(i - 1) * cols + (j - 1)];

    // 1-based potentials; column 0 is a virtual start.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0, j) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    // Sum the original costs rather than trusting the potentials.
    let total = assignment.iter().enumerate().map(|(i, &j)| costs[i * cols + j]).sum();
    (assignment, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_example() {
        let c = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (a, total) = solve(&c, 3, 3);
        assert_eq!(total, 5.0);
        let mut cols = a.clone();
        cols.sort_unstable();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn rectangular_picks_cheapest_columns() {
        let c = [9.0, 1.0, 7.0, 8.0, 8.0, 2.0, 9.0, 0.5];
        let (a, total) = solve(&c, 2, 4);
        assert_eq!(a, vec![1, 3]);
        assert_eq!(total, 1.5);
    }

    #[test]
    fn empty_problem() {
        assert_eq!(solve(&[], 0, 3), (vec![], 0.0));
    }
}
