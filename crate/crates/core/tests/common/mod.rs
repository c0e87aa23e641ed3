//! Independent reference implementations used as test oracles. Nothing
//! here calls into the solver's numerics.

#![allow(dead_code)]

use crossdiff::MobilityRule;

/// Cell averages of `height * 1_(-r, r)` on `n` cells centred at `l / n`,
/// from interval overlap lengths (periodic images included).
pub fn indicator_weights(n: usize, radius: f64, height: f64) -> Vec<f64> {
    let dx = 1.0 / n as f64;
    (0..n)
        .map(|m| {
            let s = if 2 * m <= n {
                m as f64
            } else {
                m as f64 - n as f64
            };
            let (a, b) = ((s - 0.5) * dx, (s + 0.5) * dx);
            let mut len = 0.0;
            for k in -1..=1 {
                let (lo, hi) = (a + k as f64, b + k as f64);
                len += (hi.min(radius) - lo.max(-radius)).max(0.0);
            }
            height * len / dx
        })
        .collect()
}

/// Problem data in plain arrays.
pub struct Problem {
    pub n: usize,
    pub cells: usize,
    pub a: Vec<Vec<f64>>,
    pub sigma: f64,
    /// `weights[i][j]` are cell averages of `B^{ij}`, `None` for the Dirac mass.
    pub weights: Vec<Vec<Option<Vec<f64>>>>,
    pub rule: MobilityRule,
}

impl Problem {
    pub fn dx(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// `(B * v)_l = sum_{l'} dx B_{l-l'} v_{l'}` by the double loop.
    pub fn convolve(&self, w: &Option<Vec<f64>>, v: &[f64]) -> Vec<f64> {
        let n = self.cells;
        match w {
            None => v.to_vec(),
            Some(w) => (0..n)
                .map(|l| {
                    (0..n)
                        .map(|lp| self.dx() * w[(l + n - lp) % n] * v[lp])
                        .sum()
                })
                .collect(),
        }
    }

    pub fn potentials(&self, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let mut p: Vec<f64> = u[i].iter().map(|x| self.a[i][i] * x).collect();
                for j in 0..self.n {
                    if j != i {
                        let c = self.convolve(&self.weights[i][j], &u[j]);
                        for (pl, cl) in p.iter_mut().zip(c) {
                            *pl += self.a[i][j] * cl;
                        }
                    }
                }
                p
            })
            .collect()
    }

    pub fn mobility(&self, ul: f64, ur: f64, dp: f64) -> f64 {
        match self.rule {
            MobilityRule::Upwind => {
                if dp >= 0.0 {
                    ur
                } else {
                    ul
                }
            }
            MobilityRule::Logmean => {
                if ul <= 0.0 || ur <= 0.0 {
                    0.0
                } else if ul == ur {
                    ul
                } else {
                    (ur - ul) / (ur.ln() - ul.ln())
                }
            }
        }
    }

    pub fn residual(&self, u: &[Vec<f64>], prev: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
        let n = self.cells;
        let dx = self.dx();
        let p = self.potentials(u);
        (0..self.n)
            .map(|i| {
                let flux: Vec<f64> = (0..n)
                    .map(|l| {
                        let r = (l + 1) % n;
                        let dp = p[i][r] - p[i][l];
                        let mob = self.mobility(u[i][l], u[i][r], dp);
                        -self.sigma / dx * (u[i][r] - u[i][l]) - mob / dx * dp
                    })
                    .collect();
                (0..n)
                    .map(|l| dx / dt * (u[i][l] - prev[i][l]) + flux[l] - flux[(l + n - 1) % n])
                    .collect()
            })
            .collect()
    }

    /// One implicit step by damped Picard iteration: the mobilities are
    /// frozen at the current iterate and the resulting linear system is
    /// solved by Gaussian elimination.
    pub fn picard_step(
        &self,
        prev: &[Vec<f64>],
        dt: f64,
        damping: f64,
        tol: f64,
        max_iter: usize,
    ) -> Vec<Vec<f64>> {
        let n = self.cells;
        let size = self.n * n;
        let dx = self.dx();
        let mut u = prev.to_vec();
        for _ in 0..max_iter {
            let p = self.potentials(&u);
            // mobility of face l + 1/2 for each species
            let mob: Vec<Vec<f64>> = (0..self.n)
                .map(|i| {
                    (0..n)
                        .map(|l| {
                            let r = (l + 1) % n;
                            self.mobility(u[i][l], u[i][r], p[i][r] - p[i][l])
                        })
                        .collect()
                })
                .collect();
            // linear operator: columns from unit vectors
            let mut mat = vec![vec![0.0; size]; size];
            let mut rhs = vec![0.0; size];
            for i in 0..self.n {
                for l in 0..n {
                    rhs[i * n + l] = dx / dt * prev[i][l];
                }
            }
            for col in 0..size {
                let mut e: Vec<Vec<f64>> = vec![vec![0.0; n]; self.n];
                e[col / n][col % n] = 1.0;
                let pe = self.potentials(&e);
                for i in 0..self.n {
                    let flux: Vec<f64> = (0..n)
                        .map(|l| {
                            let r = (l + 1) % n;
                            -self.sigma / dx * (e[i][r] - e[i][l])
                                - mob[i][l] / dx * (pe[i][r] - pe[i][l])
                        })
                        .collect();
                    for l in 0..n {
                        mat[i * n + l][col] = dx / dt * e[i][l] + flux[l] - flux[(l + n - 1) % n];
                    }
                }
            }
            let sol = gauss_solve(mat, rhs);
            let mut change = 0.0f64;
            for i in 0..self.n {
                for l in 0..n {
                    let new = (1.0 - damping) * u[i][l] + damping * sol[i * n + l];
                    change = change.max((new - u[i][l]).abs());
                    u[i][l] = new;
                }
            }
            if change < tol {
                return u;
            }
        }
        panic!("Picard oracle did not converge");
    }
}

/// Dense Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))
            .unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            if f != 0.0 {
                for c in k..n {
                    a[r][c] -= f * a[k][c];
                }
                b[r] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` from the Golub-Welsch
/// free closed forms for small orders.
pub fn gauss_legendre_5() -> ([f64; 5], [f64; 5]) {
    let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
    ([-b, -a, 0.0, a, b], [wb, wa, 128.0 / 225.0, wa, wb])
}

/// Composite 5-point Gauss-Legendre rule with `pieces` panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, pieces: usize) -> f64 {
    let (x, w) = gauss_legendre_5();
    let h = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|p| {
            let mid = lo + (p as f64 + 0.5) * h;
            0.5 * h
                * x.iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * f(mid + 0.5 * h * xi))
                    .sum::<f64>()
        })
        .sum()
}
