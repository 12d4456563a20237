//! Recurrent cell forward and backward passes.
//!
//! GRU, with gate blocks stacked `[z; r; n]` in both `W` (input) and `U`
//! (recurrent):
//!
//! ```text
//! z  = σ(W_z x + U_z h + b_z)
//! r  = σ(W_r x + U_r h + b_r)
//! n  = tanh(W_n x + b_n + r ⊙ (U_n h))
//! h' = (1 - z) ⊙ n + z ⊙ h
//! ```

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};

use super::CellKind;

#[derive(Debug, Clone)]
pub struct CellCache {
    pub x: Array1<f64>,
    pub h_prev: Array1<f64>,
    // GRU only; empty for the linear cell.
    z: Array1<f64>,
    r: Array1<f64>,
    un: Array1<f64>,
    n: Array1<f64>,
}

pub struct CellWeights<'a> {
    pub kind: CellKind,
    pub w: ArrayView2<'a, f64>,
    pub u: ArrayView2<'a, f64>,
    pub b: ArrayView1<'a, f64>,
}

pub struct CellGrads<'a> {
    pub w: ArrayViewMut2<'a, f64>,
    pub u: ArrayViewMut2<'a, f64>,
    pub b: ArrayViewMut1<'a, f64>,
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `m += col ⊗ row`.
pub fn add_outer(mut m: ArrayViewMut2<f64>, col: ArrayView1<f64>, row: ArrayView1<f64>) {
    for (mut r, &a) in m.rows_mut().into_iter().zip(col.iter()) {
        if a != 0.0 {
            r.scaled_add(a, &row);
        }
    }
}

impl CellWeights<'_> {
    pub fn forward(&self, x: Array1<f64>, h: &Array1<f64>) -> (Array1<f64>, CellCache) {
        let ax = self.w.dot(&x) + self.b;
        let ah = self.u.dot(h);
        match self.kind {
            CellKind::Linear => {
                let h_new = ax + ah;
                let empty = Array1::zeros(0);
                let cache = CellCache {
                    x,
                    h_prev: h.clone(),
                    z: empty.clone(),
                    r: empty.clone(),
                    un: empty.clone(),
                    n: empty,
                };
                (h_new, cache)
            }
            CellKind::Gru => {
                let d = h.len();
                let z = (&ax.slice(s![..d]) + &ah.slice(s![..d])).mapv(sigmoid);
                let r = (&ax.slice(s![d..2 * d]) + &ah.slice(s![d..2 * d])).mapv(sigmoid);
                let un = ah.slice(s![2 * d..]).to_owned();
                let n = (&ax.slice(s![2 * d..]) + &(&r * &un)).mapv(f64::tanh);
                let h_new = (1.0 - &z) * &n + &z * h;
                let cache = CellCache {
                    x,
                    h_prev: h.clone(),
                    z,
                    r,
                    un,
                    n,
                };
                (h_new, cache)
            }
        }
    }

    /// Accumulates parameter gradients into `grads`; returns `(dx, dh_prev)`.
    pub fn backward(
        &self,
        cache: &CellCache,
        dh_new: &Array1<f64>,
        grads: &mut CellGrads,
    ) -> (Array1<f64>, Array1<f64>) {
        match self.kind {
            CellKind::Linear => {
                add_outer(grads.w.view_mut(), dh_new.view(), cache.x.view());
                add_outer(grads.u.view_mut(), dh_new.view(), cache.h_prev.view());
                grads.b += dh_new;
                (self.w.t().dot(dh_new), self.u.t().dot(dh_new))
            }
            CellKind::Gru => {
                let d = dh_new.len();
                let CellCache {
                    x,
                    h_prev,
                    z,
                    r,
                    un,
                    n,
                } = cache;
                let dn = dh_new * &(1.0 - z);
                let dz = dh_new * &(h_prev - n);
                let dan = dn * &n.mapv(|v| 1.0 - v * v);
                let dr = &dan * un;
                let daz = dz * &z.mapv(|v| v * (1.0 - v));
                let dar = dr * &r.mapv(|v| v * (1.0 - v));

                let mut dax = Array2::zeros((3, d));
                dax.row_mut(0).assign(&daz);
                dax.row_mut(1).assign(&dar);
                dax.row_mut(2).assign(&dan);
                let dax = dax.into_shape_with_order(3 * d).expect("contiguous");
                let mut dah = dax.clone();
                dah.slice_mut(s![2 * d..]).assign(&(&dan * r));

                add_outer(grads.w.view_mut(), dax.view(), x.view());
                grads.b += &dax;
                add_outer(grads.u.view_mut(), dah.view(), h_prev.view());

                let dx = self.w.t().dot(&dax);
                let dh_prev = dh_new * z + self.u.t().dot(&dah);
                (dx, dh_prev)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_weights_fix_zero() {
        let (w, u, b) = (Array2::zeros((6, 3)), Array2::zeros((6, 2)), Array1::zeros(6));
        let cell = CellWeights {
            kind: CellKind::Gru,
            w: w.view(),
            u: u.view(),
            b: b.view(),
        };
        let (h, _) = cell.forward(array![0.3, -0.2, 0.9], &Array1::zeros(2));
        assert_eq!(h, array![0.0, 0.0]);
    }

    #[test]
    fn linear_cell_adds() {
        let (w, u, b) = (array![[1.0]], array![[1.0]], array![0.0]);
        let cell = CellWeights {
            kind: CellKind::Linear,
            w: w.view(),
            u: u.view(),
            b: b.view(),
        };
        let (h1, _) = cell.forward(array![1.0], &array![0.0]);
        let (h2, _) = cell.forward(array![2.0], &h1);
        assert_eq!(h2, array![3.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0) < 1e-300);
        assert_eq!(sigmoid(800.0), 1.0);
    }
}
