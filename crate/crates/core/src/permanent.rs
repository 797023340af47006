//! Matrix permanents via Ryser's formula, visiting column subsets in Gray-code
//! order so each step updates the row sums with a single column.

use crate::circuit::CMatrix;
use crate::fock::C64;

/// Permanent of a square matrix. O(2ⁿ·n).
///
/// # Panics
/// If the matrix is not square or has more than 63 columns.
pub fn permanent(a: &CMatrix) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent of a non-square matrix");
    assert!(n < 64, "permanent too large");
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut row_sums = vec![C64::default(); n];
    let mut total = C64::default();
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let next = k ^ (k >> 1);
        let adding = next & (1 << col) != 0;
        for (r, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += a[(r, col)];
            } else {
                *s -= a[(r, col)];
            }
        }
        let prod: C64 = row_sums.iter().product();
        if next.count_ones() % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sum over all permutations, used as the reference.
    fn brute_force(a: &CMatrix) -> C64 {
        fn rec(a: &CMatrix, row: usize, used: &mut Vec<bool>, acc: C64, out: &mut C64) {
            let n = a.nrows();
            if row == n {
                *out += acc;
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    rec(a, row + 1, used, acc * a[(row, c)], out);
                    used[c] = false;
                }
            }
        }
        let mut out = C64::default();
        rec(a, 0, &mut vec![false; a.nrows()], C64::new(1.0, 0.0), &mut out);
        out
    }

    #[test]
    fn small_known_values() {
        let a = CMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0].map(|x| C64::new(x, 0.0)));
        assert_eq!(permanent(&a), C64::new(10.0, 0.0));
        let ones = CMatrix::from_element(4, 4, C64::new(1.0, 0.0));
        assert!((permanent(&ones) - C64::new(24.0, 0.0)).norm() < 1e-12);
        assert_eq!(permanent(&CMatrix::zeros(0, 0)), C64::new(1.0, 0.0));
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=7 {
            for _ in 0..5 {
                let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                assert!((permanent(&a) - brute_force(&a)).norm() < 1e-10, "n={n}");
            }
        }
    }
}
