//! Orthonormal type-II 2-D DCT on square blocks.
//!
//! Forward: `X = C · B · Cᵀ`, inverse: `B = Cᵀ · X · C`, where
//! `C[p][x] = α(p) · cos(π (2x + 1) p / 2N)` with `α(0) = √(1/N)` and
//! `α(p) = √(2/N)` otherwise. The DC coefficient of a constant block `v`
//! is therefore `N · v`.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct BlockDct {
    n: usize,
    // row-major N×N basis, basis[p * n + x]
    basis: Vec<f64>,
}

impl BlockDct {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "DCT block size must be at least 2");
        let mut basis = vec![0.0; n * n];
        let nf = n as f64;
        for p in 0..n {
            let alpha = if p == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for x in 0..n {
                basis[p * n + x] = alpha * (PI * (2 * x + 1) as f64 * p as f64 / (2.0 * nf)).cos();
            }
        }
        Self { n, basis }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `block` and the returned coefficients are row-major `N×N`, indexed `[row * N + col]`.
    pub fn forward(&self, block: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(block.len(), n * n, "block must be {n}x{n}");
        // tmp = C · B
        let mut tmp = vec![0.0; n * n];
        for p in 0..n {
            for col in 0..n {
                let mut acc = 0.0;
                for row in 0..n {
                    acc += self.basis[p * n + row] * block[row * n + col];
                }
                tmp[p * n + col] = acc;
            }
        }
        // out = tmp · Cᵀ
        let mut out = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let mut acc = 0.0;
                for col in 0..n {
                    acc += tmp[p * n + col] * self.basis[q * n + col];
                }
                out[p * n + q] = acc;
            }
        }
        out
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(coeffs.len(), n * n, "coefficients must be {n}x{n}");
        // tmp = Cᵀ · X
        let mut tmp = vec![0.0; n * n];
        for row in 0..n {
            for q in 0..n {
                let mut acc = 0.0;
                for p in 0..n {
                    acc += self.basis[p * n + row] * coeffs[p * n + q];
                }
                tmp[row * n + q] = acc;
            }
        }
        // out = tmp · C
        let mut out = vec![0.0; n * n];
        for row in 0..n {
            for col in 0..n {
                let mut acc = 0.0;
                for q in 0..n {
                    acc += tmp[row * n + q] * self.basis[q * n + col];
                }
                out[row * n + col] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(N⁴) definitional double sum.
    fn naive_forward(block: &[f64], n: usize) -> Vec<f64> {
        let a = |k: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        let mut out = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let mut s = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        s += block[x * n + y]
                            * (PI * (2 * x + 1) as f64 * p as f64 / (2 * n) as f64).cos()
                            * (PI * (2 * y + 1) as f64 * q as f64 / (2 * n) as f64).cos();
                    }
                }
                out[p * n + q] = a(p) * a(q) * s;
            }
        }
        out
    }

    #[test]
    fn constant_block_has_only_dc() {
        let dct = BlockDct::new(8);
        let coeffs = dct.forward(&[3.5; 64]);
        assert!((coeffs[0] - 28.0).abs() < 1e-12);
        assert!(coeffs[1..].iter().all(|c| c.abs() < 1e-12));
        assert!(dct.forward(&[0.0; 64]).iter().all(|&c| c == 0.0));
    }

    #[test]
    fn matches_naive_definition_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 4, 8] {
            let dct = BlockDct::new(n);
            for _ in 0..50 {
                let block: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..255.0)).collect();
                let fast = dct.forward(&block);
                let slow = naive_forward(&block, n);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-9);
                }
                let back = dct.inverse(&fast);
                for (a, b) in back.iter().zip(&block) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
