//! Reference implementations that share no code with the crate under test.
#![allow(dead_code)]

use nullspace_core::convnull::Padding;
use nullspace_core::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn to_rows(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Row echelon form by Gaussian elimination with partial pivoting; counts pivots above `tol`.
pub fn gauss_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let (best, val) = (rank..m)
            .map(|r| (r, a[r][col].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap(rank, best);
        for r in rank + 1..m {
            let f = a[r][col] / a[rank][col];
            let (top, bottom) = a.split_at_mut(r);
            for (x, &p) in bottom[0][col..n].iter_mut().zip(&top[rank][col..n]) {
                *x -= f * p;
            }
        }
        rank += 1;
    }
    rank
}

/// Modified Gram–Schmidt over the rows, then `Σ q qᵀ`.
pub fn gram_schmidt_projector(rows: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut qs: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for q in &qs {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol {
            qs.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let mut p = vec![vec![0.0; n]; n];
    for q in &qs {
        for i in 0..n {
            for j in 0..n {
                p[i][j] += q[i] * q[j];
            }
        }
    }
    p
}

/// Solves `A y = b` for square nonsingular `A` by Gauss–Jordan elimination.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .unwrap();
        aug.swap(col, piv);
        let p = aug[col][col];
        for x in &mut aug[col][col..=n] {
            *x /= p;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != col {
                let f = row[col];
                for (x, &q) in row[col..=n].iter_mut().zip(&pivot_row[col..=n]) {
                    *x -= f * q;
                }
            }
        }
    }
    aug.iter().map(|r| r[n]).collect()
}

/// Projection of `x` onto the row space of full-row-rank `W` via `Wᵀ (W Wᵀ)⁻¹ W x`.
pub fn normal_equations_projection(w: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let gram: Vec<Vec<f64>> = w
        .iter()
        .map(|a| w.iter().map(|b| a.iter().zip(b).map(|(p, q)| p * q).sum()).collect())
        .collect();
    let wx: Vec<f64> = w.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect();
    let y = solve(&gram, &wx);
    let n = x.len();
    (0..n)
        .map(|j| w.iter().zip(&y).map(|(r, yi)| r[j] * yi).sum())
        .collect()
}

/// Sliding-window cross-correlation over an explicitly zero-padded copy of the image.
pub fn conv_oracle(kernel: &[Vec<i64>], image: &[Vec<i64>], padding: Padding) -> Vec<Vec<i64>> {
    let (k1, k2) = (kernel.len(), kernel[0].len());
    let (n1, n2) = (image.len(), image[0].len());
    let (pt, pl, pb, pr) = match padding {
        Padding::Valid => (0, 0, 0, 0),
        Padding::Same => ((k1 - 1) / 2, (k2 - 1) / 2, k1 / 2, k2 / 2),
    };
    let h = n1 + pt + pb;
    let w = n2 + pl + pr;
    let mut padded = vec![vec![0i64; w]; h];
    for i in 0..n1 {
        for j in 0..n2 {
            padded[i + pt][j + pl] = image[i][j];
        }
    }
    let mut out = vec![vec![0i64; w - k2 + 1]; h - k1 + 1];
    for (i, out_row) in out.iter_mut().enumerate() {
        for (j, cell) in out_row.iter_mut().enumerate() {
            let mut s = 0;
            for p in 0..k1 {
                for q in 0..k2 {
                    s += kernel[p][q] * padded[i + p][j + q];
                }
            }
            *cell = s;
        }
    }
    out
}

/// Two square blobs around (−0.5, −0.5) and (0.5, 0.5) with labels 0 and 1.
pub fn blobs(n_per_class: usize, seed: u64) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut r = rng(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..2 * n_per_class {
        let label = i % 2;
        let c = if label == 0 { -0.5 } else { 0.5 };
        xs.push([c + r.random_range(-0.3..0.3), c + r.random_range(-0.3..0.3)]);
        ys.push(label);
    }
    (xs, ys)
}

/// Batch gradient-descent logistic regression; returns training accuracy.
pub fn logistic_regression_accuracy(xs: &[[f64; 2]], ys: &[usize]) -> f64 {
    let (mut w0, mut w1, mut b) = (0.0, 0.0, 0.0);
    let n = xs.len() as f64;
    for _ in 0..2000 {
        let (mut g0, mut g1, mut gb) = (0.0, 0.0, 0.0);
        for (x, &y) in xs.iter().zip(ys) {
            let p = 1.0 / (1.0 + (-(w0 * x[0] + w1 * x[1] + b)).exp());
            let e = p - y as f64;
            g0 += e * x[0];
            g1 += e * x[1];
            gb += e;
        }
        w0 -= g0 / n;
        w1 -= g1 / n;
        b -= gb / n;
    }
    let correct = xs
        .iter()
        .zip(ys)
        .filter(|(x, &y)| ((w0 * x[0] + w1 * x[1] + b > 0.0) as usize) == y)
        .count();
    correct as f64 / n
}

const PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// `(mantissa, exponent)` with `|x| = mantissa · 2^exponent`.
fn dyadic(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let frac = bits & ((1 << 52) - 1);
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), biased - 1075)
    }
}

/// Exact rank of a matrix of finite doubles, computed over GF(2^61 − 1).
///
/// Every finite double is `m · 2^e`, so scaling all entries by `2^(−min e)`
/// gives an integer matrix with the same rank. Its rank mod p never exceeds
/// the rank over ℚ, so a full rank mod p certifies full rank exactly.
pub fn exact_rank(m: &Matrix<f64>) -> usize {
    let nonzero = m.as_slice().iter().filter(|x| **x != 0.0);
    let Some(e_min) = nonzero.map(|&x| dyadic(x).1).min() else {
        return 0;
    };
    let mut a: Vec<Vec<u64>> = (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|&x| {
                    if x == 0.0 {
                        return 0;
                    }
                    let (mant, e) = dyadic(x);
                    let v = mul_mod(mant % PRIME, pow_mod(2, (e - e_min) as u64));
                    if x < 0.0 {
                        (PRIME - v) % PRIME
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][col], PRIME - 2);
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if row[col] == 0 {
                continue;
            }
            let f = mul_mod(row[col], inv);
            for c in col..cols {
                row[c] = (row[c] + PRIME - mul_mod(f, pivot_row[c])) % PRIME;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
