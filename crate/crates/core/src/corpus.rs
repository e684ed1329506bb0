//! Instance generators: small random LPs and ill-conditioned families.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::rational::{Rational, RationalLp, SparseRationalMatrix};

/// Shape and coefficient range of [`random_lp`].
#[derive(Clone, Copy, Debug)]
pub struct RandomLpParams {
    pub max_rows: usize,
    pub max_cols: usize,
    /// Bound on numerators and denominators.
    pub max_entry: i64,
    /// Probability that a matrix entry is zero.
    pub zero_prob: f64,
}

impl Default for RandomLpParams {
    fn default() -> Self {
        RandomLpParams { max_rows: 6, max_cols: 10, max_entry: 99, zero_prob: 0.3 }
    }
}

fn random_rational<R: Rng>(rng: &mut R, max: i64) -> Rational {
    let num = rng.gen_range(-max..=max);
    let den = rng.gen_range(1..=max);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A random LP with `1 <= m <= max_rows`, `m <= n <= max_cols`. About half
/// the instances get `b = A x0` for some `x0 >= l`, so every verdict shows
/// up in a large sample.
pub fn random_lp<R: Rng>(rng: &mut R, params: &RandomLpParams) -> RationalLp {
    let m = rng.gen_range(1..=params.max_rows);
    let n = rng.gen_range(m..=params.max_cols.max(m));
    let max = params.max_entry;
    let dense: Vec<Vec<Rational>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(params.zero_prob) { Rational::zero() } else { random_rational(rng, max) })
                .collect()
        })
        .collect();
    let lower: Vec<Rational> = (0..n)
        .map(|_| if rng.gen_bool(0.7) { Rational::zero() } else { random_rational(rng, max) })
        .collect();
    let c: Vec<Rational> = (0..n).map(|_| random_rational(rng, max)).collect();
    let a = SparseRationalMatrix::from_dense(&dense);
    let b = if rng.gen_bool(0.5) {
        let x0: Vec<Rational> = lower
            .iter()
            .map(|l| l + Rational::from_integer(BigInt::from(rng.gen_range(0..=3))))
            .collect();
        a.mul_vec(&x0)
    } else {
        (0..m).map(|_| random_rational(rng, max)).collect()
    };
    RationalLp::new(a, b, c, lower).expect("generated dimensions agree")
}

fn pow10(k: i32) -> Rational {
    let p = Rational::from_integer(BigInt::from(10).pow(k.unsigned_abs()));
    if k >= 0 {
        p
    } else {
        p.recip()
    }
}

/// `min -1^T D H E x  s.t.  D H E x + s = D H E 1,  x, s >= 0` where `H` is
/// the `n x n` Hilbert matrix and `D`, `E` are diagonal powers of ten
/// cycling through `10^{-k}, 1, 10^{k}`. The optimal basis is the
/// ill-conditioned block itself, with `x = 1` and objective `-1^T D H E 1`.
pub fn hilbert_lp(n: usize, k: i32) -> RationalLp {
    let scale = |i: usize| pow10(k * (i % 3) as i32 - k);
    let block: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| scale(i) * Rational::new(BigInt::one(), BigInt::from(i + j + 1)) * scale(n - 1 - j))
                .collect()
        })
        .collect();
    let dense: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = block[i].clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let b: Vec<Rational> = block.iter().map(|row| row.iter().sum()).collect();
    let mut c: Vec<Rational> = (0..n).map(|j| -block.iter().map(|row| &row[j]).sum::<Rational>()).collect();
    c.extend(std::iter::repeat_n(Rational::zero(), n));
    RationalLp::new(SparseRationalMatrix::from_dense(&dense), b, c, vec![Rational::zero(); 2 * n])
        .expect("generated dimensions agree")
}

/// Exact optimum of [`hilbert_lp`].
pub fn hilbert_optimum(n: usize, k: i32) -> Rational {
    -hilbert_lp(n, k).b.iter().sum::<Rational>()
}

/// The construction of [`hilbert_lp`] for a chain of sizes and scalings.
pub fn ill_conditioned_corpus() -> Vec<(String, RationalLp)> {
    ILL_CONDITIONED
        .iter()
        .map(|&(n, k)| (format!("hilbert{n}_s{k}"), hilbert_lp(n, k)))
        .collect()
}

/// `(n, k)` pairs of the shipped ill-conditioned corpus.
pub const ILL_CONDITIONED: [(usize, i32); 10] =
    [(8, 2), (8, 3), (9, 1), (9, 2), (10, 0), (10, 1), (11, 0), (12, 0), (13, 0), (14, 0)];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_lps_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = RandomLpParams::default();
        for _ in 0..50 {
            let lp = random_lp(&mut rng, &params);
            assert!(lp.nrows() <= 6 && lp.ncols() <= 10 && lp.nrows() <= lp.ncols());
            for col in lp.a.columns() {
                for (_, v) in col {
                    assert!(v.numer().magnitude() <= &99u32.into() && v.denom() <= &99.into());
                }
            }
        }
    }

    #[test]
    fn hilbert_entries() {
        let lp = hilbert_lp(3, 0);
        assert_eq!(lp.a.get(1, 2), rat(1, 4));
        assert_eq!(lp.a.get(1, 4), rat(1, 1));
        assert_eq!(lp.b[0], rat(11, 6));
        assert_eq!(hilbert_optimum(3, 0), -(rat(11, 6) + rat(13, 12) + rat(47, 60)));
    }
}
