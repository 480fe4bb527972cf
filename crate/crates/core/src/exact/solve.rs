//! Exact dense linear solver: fraction-free (Bareiss) elimination over the
//! integers after clearing denominators, with a full residual verification.

use super::{ExactError, Rat, RatMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Solves `A * x = b` exactly. Accepts square or over-determined consistent
/// systems; the unique solution is verified against every input row before
/// it is returned.
///
/// Returns `NoUniqueSolution` when the coefficient rank is below the number
/// of unknowns or the system is inconsistent, `DimensionMismatch` when the
/// right-hand side does not match.
pub fn solve_linear(a: &RatMatrix, b: &[Rat]) -> Result<Vec<Rat>, ExactError> {
    let m = a.rows();
    let n = a.cols();
    if b.len() != m {
        return Err(ExactError::DimensionMismatch(format!(
            "matrix has {m} rows but rhs has {} entries",
            b.len()
        )));
    }
    if m < n {
        return Err(ExactError::NoUniqueSolution);
    }

    // Clear denominators row by row to get an integer augmented matrix.
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut lcm = BigInt::one();
        for v in a.row(i).iter().chain(std::iter::once(&b[i])) {
            lcm = lcm.lcm(v.denom());
        }
        let mut row: Vec<BigInt> = Vec::with_capacity(n + 1);
        for v in a.row(i) {
            row.push(v.numer() * (&lcm / v.denom()));
        }
        row.push(b[i].numer() * (&lcm / b[i].denom()));
        rows.push(row);
    }

    // Bareiss forward elimination: stays in integers, divides exactly by
    // the previous pivot, keeps intermediate entries at minor size.
    let mut prev_pivot = BigInt::one();
    for col in 0..n {
        let pivot_row = (col..m).find(|&r| !rows[r][col].is_zero());
        let Some(pr) = pivot_row else {
            return Err(ExactError::NoUniqueSolution);
        };
        rows.swap(col, pr);
        let pivot = rows[col][col].clone();
        for r in col + 1..m {
            let factor = std::mem::take(&mut rows[r][col]);
            if factor.is_zero() {
                // still rescale so the whole row carries minor-sized entries
                for c in col + 1..=n {
                    let updated = &rows[r][c] * &pivot;
                    let (q, rem) = updated.div_rem(&prev_pivot);
                    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                    rows[r][c] = q;
                }
                continue;
            }
            for c in col + 1..=n {
                let updated = &rows[r][c] * &pivot - &factor * &rows[col][c];
                let (q, rem) = updated.div_rem(&prev_pivot);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                rows[r][c] = q;
            }
        }
        prev_pivot = pivot;
    }

    // Extra rows must have vanished entirely (consistency).
    for row in rows.iter().take(m).skip(n) {
        if row.iter().any(|v| !v.is_zero()) {
            return Err(ExactError::NoUniqueSolution);
        }
    }

    // Back-substitution on the upper-triangular integer system.
    let mut solution = vec![Rat::zero(); n];
    for i in (0..n).rev() {
        let d = &rows[i][i];
        if d.is_zero() {
            return Err(ExactError::NoUniqueSolution);
        }
        let mut acc = Rat::from_inner(BigRational::from_integer(rows[i][n].clone()));
        for j in i + 1..n {
            let term = Rat::from_inner(BigRational::from_integer(rows[i][j].clone()));
            acc = &acc - &(&term * &solution[j]);
        }
        solution[i] = &acc / &Rat::from_inner(BigRational::from_integer(d.clone()));
    }

    // Back-substitution check: the residual must be exactly zero.
    for i in 0..m {
        let mut acc = Rat::zero();
        for j in 0..n {
            acc = &acc + &(a.get(i, j) * &solution[j]);
        }
        if acc != b[i] {
            return Err(ExactError::NoUniqueSolution);
        }
    }
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn mat(rows: usize, cols: usize, vals: &[(i64, i64)]) -> RatMatrix {
        RatMatrix::new(
            rows,
            cols,
            vals.iter().map(|&(n, d)| Rat::of(n, d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_system() {
        let a = RatMatrix::identity(2);
        let b = vec![Rat::of(1, 3), Rat::of(2, 3)];
        assert_eq!(solve_linear(&a, &b).unwrap(), b);
    }

    #[test]
    fn symmetric_two_by_two() {
        let a = mat(2, 2, &[(1, 1), (-1, 1), (1, 1), (1, 1)]);
        let b = vec![Rat::zero(), Rat::one()];
        assert_eq!(
            solve_linear(&a, &b).unwrap(),
            vec![Rat::of(1, 2), Rat::of(1, 2)]
        );
    }

    #[test]
    fn random_systems_have_zero_residual() {
        // oracle: construct x, compute b = A*x, solve, compare exactly
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 3;
            let a = RatMatrix::new(
                n,
                n,
                (0..n * n)
                    .map(|_| Rat::of(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
                    .collect(),
            )
            .unwrap();
            let x: Vec<Rat> = (0..n)
                .map(|_| Rat::of(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
                .collect();
            let b: Vec<Rat> = (0..n)
                .map(|i| (0..n).fold(Rat::zero(), |acc, j| &acc + &(a.get(i, j) * &x[j])))
                .collect();
            match solve_linear(&a, &b) {
                Ok(sol) => assert_eq!(sol, x),
                // singular draws are legitimate; the solver must say so
                Err(ExactError::NoUniqueSolution) => {}
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = mat(2, 2, &[(1, 1), (2, 1), (2, 1), (4, 1)]);
        let b = vec![Rat::one(), Rat::of(2, 1)];
        assert_eq!(solve_linear(&a, &b), Err(ExactError::NoUniqueSolution));
    }

    #[test]
    fn overdetermined_consistent_and_inconsistent() {
        let a = mat(3, 2, &[(1, 1), (0, 1), (0, 1), (1, 1), (1, 1), (1, 1)]);
        let b = vec![Rat::of(1, 2), Rat::of(1, 3), Rat::of(5, 6)];
        assert_eq!(
            solve_linear(&a, &b).unwrap(),
            vec![Rat::of(1, 2), Rat::of(1, 3)]
        );
        let bad = vec![Rat::of(1, 2), Rat::of(1, 3), Rat::one()];
        assert_eq!(solve_linear(&a, &bad), Err(ExactError::NoUniqueSolution));
    }

    #[test]
    fn dimension_mismatch() {
        let a = RatMatrix::identity(2);
        assert!(matches!(
            solve_linear(&a, &[Rat::one()]),
            Err(ExactError::DimensionMismatch(_))
        ));
    }
}
