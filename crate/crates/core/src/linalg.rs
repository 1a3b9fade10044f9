//! Dense complex linear algebra for the small (n ≤ ~16) KVL systems.
//!
//! LU factorization with partial pivoting, a 1-norm condition number computed
//! from the explicit inverse (cheap at these sizes), and one round of
//! iterative refinement.

use num_complex::Complex64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.n + j] = value;
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.n + j] += value;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

pub fn norm_2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum LuError {
    /// An exactly zero pivot column was met at the given elimination step.
    ZeroPivot(usize),
}

/// `PA = LU` with unit-diagonal `L` stored below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self, LuError> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|i| (i, lu.get(i, k).norm()))
                .fold((k, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
            if pivot_mag == 0.0 {
                return Err(LuError::ZeroPivot(k));
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu.get(k, k);
            for i in (k + 1)..n {
                let factor = lu.get(i, k) / pivot;
                lu.set(i, k, factor);
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let v = lu.get(k, j);
                    lu.add_to(i, j, -factor * v);
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
        }
        x
    }

    /// `||A||_1 · ||A^-1||_1`, with the inverse formed column by column.
    pub fn condition_1(&self, a: &ComplexMatrix) -> f64 {
        let n = a.dim();
        let mut inv_norm: f64 = 0.0;
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            inv_norm = inv_norm.max(col.iter().map(|z| z.norm()).sum());
        }
        a.norm_1() * inv_norm
    }
}
