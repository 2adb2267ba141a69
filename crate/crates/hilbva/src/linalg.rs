//! Exact rational linear algebra: Gaussian elimination over ℚ, shared by the
//! coboundary-witness search and the quasimodular fitting.

use num_traits::Zero;

use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// A solution exists and is unique.
    Unique(Vec<Rational>),
    /// A solution exists but free variables remain (a particular solution
    /// with free variables set to zero is returned).
    Underdetermined(Vec<Rational>),
    Inconsistent,
}

/// Solve Σ_i c_i·cols[i] = rhs exactly. All columns must have the same
/// length as rhs.
pub fn solve_exact(cols: &[Vec<Rational>], rhs: &[Rational]) -> SolveOutcome {
    let k = cols.len();
    let m = rhs.len();
    debug_assert!(cols.iter().all(|c| c.len() == m));
    // Augmented row-major matrix [cols | rhs].
    let mut a: Vec<Vec<Rational>> = (0..m)
        .map(|r| {
            let mut row: Vec<Rational> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; k];
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = {
            let pv = &a[row][col];
            Rational::new(pv.denom().clone(), pv.numer().clone())
        };
        for x in a[row][col..].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=k {
                    let v = &a[row][c] * &factor;
                    a[r][c] -= v;
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == m {
            break;
        }
    }
    // Inconsistency: a zero row with nonzero rhs.
    for r in 0..m {
        if a[r][..k].iter().all(|x| x.is_zero()) && !a[r][k].is_zero() {
            return SolveOutcome::Inconsistent;
        }
    }
    let mut sol = vec![Rational::zero(); k];
    let mut unique = true;
    for col in 0..k {
        match pivot_of_col[col] {
            Some(r) => sol[col] = a[r][k].clone(),
            None => unique = false,
        }
    }
    if unique {
        SolveOutcome::Unique(sol)
    } else {
        SolveOutcome::Underdetermined(sol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn unique_solution() {
        let cols = vec![
            vec![rat_int(1), rat_int(0), rat_int(2)],
            vec![rat_int(1), rat_int(1), rat_int(0)],
        ];
        let rhs = vec![rat_int(3), rat_int(1), rat_int(4)];
        match solve_exact(&cols, &rhs) {
            SolveOutcome::Unique(c) => {
                assert_eq!(c, vec![rat_int(2), rat_int(1)]);
            }
            o => panic!("unexpected: {:?}", o),
        }
    }

    #[test]
    fn inconsistent() {
        let cols = vec![vec![rat_int(1), rat_int(1)]];
        let rhs = vec![rat_int(1), rat_int(2)];
        assert_eq!(solve_exact(&cols, &rhs), SolveOutcome::Inconsistent);
    }

    #[test]
    fn underdetermined_particular() {
        let cols = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
        ];
        let rhs = vec![rat_int(2), rat_int(0)];
        match solve_exact(&cols, &rhs) {
            SolveOutcome::Underdetermined(c) => {
                assert_eq!(c[0], rat_int(2));
                assert_eq!(c[1], rat_int(0));
            }
            o => panic!("unexpected: {:?}", o),
        }
    }
}
