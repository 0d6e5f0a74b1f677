/// LU factorization with partial pivoting, `P A = L U`, computed densely and
/// stored as sparse rows.
#[derive(Debug, Clone)]
pub(crate) struct DenseLu {
    n: usize,
    /// Strictly lower part of unit-lower `L`, by row.
    l_start: Vec<usize>,
    l_idx: Vec<u32>,
    l_val: Vec<f64>,
    /// Strictly upper part of `U`, by row, with the diagonal kept apart.
    u_start: Vec<usize>,
    u_idx: Vec<u32>,
    u_val: Vec<f64>,
    diag: Vec<f64>,
    perm: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular {
    pub column: usize,
}

const PIVOT_TOL: f64 = 1e-10;
const DROP_TOL: f64 = 1e-14;

impl DenseLu {
    pub fn factor(n: usize, mut a: Vec<f64>) -> Result<Self, Singular> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let mut best = c;
            let mut best_abs = a[c * n + c].abs();
            for r in c + 1..n {
                let v = a[r * n + c].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs < PIVOT_TOL {
                return Err(Singular { column: c });
            }
            if best != c {
                for k in 0..n {
                    a.swap(c * n + k, best * n + k);
                }
                perm.swap(c, best);
            }
            let pivot = a[c * n + c];
            let (upper, lower) = a.split_at_mut((c + 1) * n);
            let pivot_row = &upper[c * n..c * n + n];
            let nz: Vec<usize> = (c + 1..n).filter(|&k| pivot_row[k] != 0.0).collect();
            for r in 0..n - c - 1 {
                let row = &mut lower[r * n..r * n + n];
                if row[c] == 0.0 {
                    continue;
                }
                let l = row[c] / pivot;
                row[c] = l;
                for &k in &nz {
                    row[k] -= l * pivot_row[k];
                }
            }
        }
        let mut lu = Self {
            n,
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            diag: Vec::with_capacity(n),
            perm,
        };
        for i in 0..n {
            let row = &a[i * n..i * n + n];
            for (j, &v) in row[..i].iter().enumerate() {
                if v.abs() > DROP_TOL {
                    lu.l_idx.push(j as u32);
                    lu.l_val.push(v);
                }
            }
            lu.l_start.push(lu.l_idx.len());
            lu.diag.push(row[i]);
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v.abs() > DROP_TOL {
                    lu.u_idx.push(j as u32);
                    lu.u_val.push(v);
                }
            }
            lu.u_start.push(lu.u_idx.len());
        }
        Ok(lu)
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let (s, e) = (self.l_start[i], self.l_start[i + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.l_val[k] * z[self.l_idx[k] as usize];
            }
            z[i] -= acc;
        }
        for i in (0..n).rev() {
            let (s, e) = (self.u_start[i], self.u_start[i + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.u_val[k] * z[self.u_idx[k] as usize];
            }
            z[i] = (z[i] - acc) / self.diag[i];
        }
        b[..n].copy_from_slice(&z);
    }

    /// Solves `A^T y = c` in place.
    pub fn solve_transpose(&self, c: &mut [f64]) {
        let n = self.n;
        let mut w = c[..n].to_vec();
        for i in 0..n {
            w[i] /= self.diag[i];
            let wi = w[i];
            if wi != 0.0 {
                for k in self.u_start[i]..self.u_start[i + 1] {
                    w[self.u_idx[k] as usize] -= self.u_val[k] * wi;
                }
            }
        }
        for i in (0..n).rev() {
            let vi = w[i];
            if vi != 0.0 {
                for k in self.l_start[i]..self.l_start[i + 1] {
                    w[self.l_idx[k] as usize] -= self.l_val[k] * vi;
                }
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            c[p] = w[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn matvec(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
    }

    #[test]
    fn solves_random_systems() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 17] {
            let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lu = DenseLu::factor(n, a.clone()).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut b = matvec(n, &a, &x);
            lu.solve(&mut b);
            for (u, v) in b.iter().zip(&x) {
                assert!((u - v).abs() < 1e-8);
            }
            let mut at = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    at[j * n + i] = a[i * n + j];
                }
            }
            let mut c = matvec(n, &at, &x);
            lu.solve_transpose(&mut c);
            for (u, v) in c.iter().zip(&x) {
                assert!((u - v).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn detects_singularity() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(DenseLu::factor(2, a).is_err());
    }
}
