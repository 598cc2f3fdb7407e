//! Central finite differences on symmetric integer stencils.

/// Weights for the `order`-th derivative at 0 on the nodes `-reach..=reach`.
pub fn fd_weights(order: usize, reach: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (-(reach as i64)..=reach as i64).map(|i| i as f64).collect();
    fd_weights_on(order, &nodes)
}

/// Weights for the `order`-th derivative at 0 on arbitrary distinct nodes (Fornberg's recursion).
pub fn fd_weights_on(order: usize, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert!(order < n, "stencil too small for derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Step for a stencil of the given reach so that every node stays within
/// three quarters of the boundary distance `dist`.
///
/// In one dimension with reach 3 (derivatives up to order 3) this is `min(h0, dist / 4)`.
pub fn fd_step(h0: f64, dist: f64, reach: usize, dim: usize) -> f64 {
    let limit = 0.75 * dist / (reach as f64 * (dim as f64).sqrt());
    h0.min(limit)
}

/// Precomputed weights for all derivative orders up to `max_order` on one shared stencil.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub reach: usize,
    pub max_order: usize,
    weights: Vec<Vec<f64>>,
}

impl Stencil {
    /// Stencil with fourth-order (or better) accuracy for every order up to `max_order`.
    pub fn new(max_order: usize) -> Self {
        let reach = (max_order + 1) / 2 + 1;
        let weights = (0..=max_order).map(|k| fd_weights(k, reach)).collect();
        Stencil { reach, max_order, weights }
    }

    pub fn weights(&self, order: usize) -> &[f64] {
        &self.weights[order]
    }

    /// All derivatives `f^{(k)}(x)`, `k = 0..=max_order`, from `2 reach + 1` samples.
    pub fn derivatives_1d<F: Fn(f64) -> f64>(&self, f: F, x: f64, h: f64) -> Vec<f64> {
        let r = self.reach as i64;
        let samples: Vec<f64> = (-r..=r).map(|i| f(x + i as f64 * h)).collect();
        (0..=self.max_order)
            .map(|k| {
                let w = &self.weights[k];
                w.iter().zip(&samples).map(|(a, b)| a * b).sum::<f64>() / h.powi(k as i32)
            })
            .collect()
    }

    /// Mixed partials `d^{i+j} f / dx^i dy^j` for `i + j <= max_order`, indexed `[i][j]`,
    /// from one tensor grid of `(2 reach + 1)^2` samples.
    pub fn derivatives_2d<F: Fn(f64, f64) -> f64>(&self, f: F, x: f64, y: f64, h: f64) -> Vec<Vec<f64>> {
        let r = self.reach as i64;
        let width = (2 * r + 1) as usize;
        let mut grid = vec![0.0; width * width];
        for (a, i) in (-r..=r).enumerate() {
            for (b, j) in (-r..=r).enumerate() {
                grid[a * width + b] = f(x + i as f64 * h, y + j as f64 * h);
            }
        }
        let mut out = vec![vec![0.0; self.max_order + 1]; self.max_order + 1];
        for i in 0..=self.max_order {
            for j in 0..=(self.max_order - i) {
                let (wx, wy) = (&self.weights[i], &self.weights[j]);
                let mut acc = 0.0;
                for a in 0..width {
                    if wx[a] == 0.0 {
                        continue;
                    }
                    let row = &grid[a * width..(a + 1) * width];
                    let inner: f64 = wy.iter().zip(row).map(|(w, v)| w * v).sum();
                    acc += wx[a] * inner;
                }
                out[i][j] = acc / h.powi((i + j) as i32);
            }
        }
        out
    }
}

/// Derivatives of `f o g` at a point from `f^{(j)}(g(x))` and `g^{(j)}(x)`,
/// `j = 0..=order` (Faà di Bruno via partial Bell polynomials).
pub fn chain_rule_1d(f: &[f64], g: &[f64]) -> Vec<f64> {
    let order = f.len().min(g.len()) - 1;
    // bell[n][k] = B_{n,k}(g', g'', ...)
    let mut bell = vec![vec![0.0; order + 1]; order + 1];
    bell[0][0] = 1.0;
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = 0.0;
            for i in 1..=(n - k + 1) {
                acc += super::binomial(n - 1, i - 1) * g[i] * bell[n - i][k - 1];
            }
            bell[n][k] = acc;
        }
    }
    let mut out = vec![f[0]; order + 1];
    for n in 1..=order {
        out[n] = (1..=n).map(|k| f[k] * bell[n][k]).sum();
    }
    out
}
