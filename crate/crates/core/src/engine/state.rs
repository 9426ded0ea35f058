//! Dense joint states over system (x) ancilla slots.
//!
//! Layout: index `= sys * d^S + digits`, slot 0 being the most significant
//! ancilla digit. A pure state is a `D x 1` buffer, a density matrix a
//! row-major `D x D` buffer.

use num_traits::Zero;

use crate::linalg::CMat;
use crate::scalar::{Real, C};

/// Which factor a local operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Target {
    System,
    /// System (x) the ancilla in the given slot, system index major.
    SystemSlot(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Layout {
    pub dim: usize,
    pub levels: usize,
    pub slots: usize,
    /// `d^S`.
    pub ancilla_dim: usize,
}

impl Layout {
    pub fn new(dim: usize, levels: usize, slots: usize) -> Self {
        // Saturates for registers far beyond any feasible size; such layouts
        // are only used for bookkeeping and are rejected before allocation.
        let ancilla_dim = levels.checked_pow(slots as u32).unwrap_or(usize::MAX);
        Self {
            dim,
            levels,
            slots,
            ancilla_dim,
        }
    }

    #[inline]
    pub fn total(&self) -> usize {
        self.dim.saturating_mul(self.ancilla_dim)
    }

    #[inline]
    pub fn stride(&self, slot: usize) -> usize {
        self.levels.pow((self.slots - 1 - slot) as u32)
    }

    #[inline]
    pub fn digit(&self, index: usize, slot: usize) -> usize {
        (index % self.ancilla_dim / self.stride(slot)) % self.levels
    }

    /// Base positions and in-group offsets for a local operator.
    pub fn groups(&self, target: Target) -> (Vec<usize>, Vec<usize>) {
        match target {
            Target::System => {
                let offsets = (0..self.dim).map(|s| s * self.ancilla_dim).collect();
                ((0..self.ancilla_dim).collect(), offsets)
            }
            Target::SystemSlot(slot) => {
                let st = self.stride(slot);
                let mut offsets = Vec::with_capacity(self.dim * self.levels);
                for s in 0..self.dim {
                    for j in 0..self.levels {
                        offsets.push(s * self.ancilla_dim + j * st);
                    }
                }
                let bases = (0..self.ancilla_dim)
                    .filter(|&a| (a / st) % self.levels == 0)
                    .collect();
                (bases, offsets)
            }
        }
    }
}

/// Row-major `rows x cols` complex buffer.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Buffer<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C<T>>,
}

impl<T: Real> Buffer<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    /// `self <- G self` with `G` acting on the row index through `target`.
    pub fn left_apply(&mut self, layout: &Layout, gate: &CMat<T>, target: Target) {
        let (bases, offsets) = layout.groups(target);
        let n = offsets.len();
        let cols = self.cols;
        let mut tmp = vec![C::zero(); n * cols];
        for &b in &bases {
            for (i, &o) in offsets.iter().enumerate() {
                let row = (b + o) * cols;
                tmp[i * cols..(i + 1) * cols].copy_from_slice(&self.data[row..row + cols]);
            }
            for (i, &o) in offsets.iter().enumerate() {
                let row = (b + o) * cols;
                let dst = &mut self.data[row..row + cols];
                dst.iter_mut().for_each(|z| *z = C::zero());
                for j in 0..n {
                    let g = gate[(i, j)];
                    if g.is_zero() {
                        continue;
                    }
                    let src = &tmp[j * cols..(j + 1) * cols];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = *d + g * s;
                    }
                }
            }
        }
    }

    /// `self <- self G^dagger` with `G` acting on the column index.
    pub fn right_apply_adjoint(&mut self, layout: &Layout, gate: &CMat<T>, target: Target) {
        let (bases, offsets) = layout.groups(target);
        let n = offsets.len();
        let gc = gate.conj();
        let mut tmp = vec![C::zero(); n];
        for r in 0..self.rows {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for &b in &bases {
                for (i, &o) in offsets.iter().enumerate() {
                    tmp[i] = row[b + o];
                }
                for (i, &o) in offsets.iter().enumerate() {
                    let mut acc = C::zero();
                    for (j, &t) in tmp.iter().enumerate() {
                        acc = acc + gc[(i, j)] * t;
                    }
                    row[b + o] = acc;
                }
            }
        }
    }

    /// `out += M self` with `M` acting on the row index through `target`.
    pub fn left_add_into(&self, out: &mut Self, layout: &Layout, m: &CMat<T>, target: Target) {
        let (bases, offsets) = layout.groups(target);
        let cols = self.cols;
        for &b in &bases {
            for (i, &oi) in offsets.iter().enumerate() {
                let dst_row = (b + oi) * cols;
                for (j, &oj) in offsets.iter().enumerate() {
                    let g = m[(i, j)];
                    if g.is_zero() {
                        continue;
                    }
                    let src_row = (b + oj) * cols;
                    for c in 0..cols {
                        out.data[dst_row + c] = out.data[dst_row + c] + g * self.data[src_row + c];
                    }
                }
            }
        }
    }

    /// `self <- exp(-i sum_k M_k) self` by a Taylor series split into pieces
    /// of norm at most one half. `bound` must bound `||sum_k M_k||`.
    pub fn left_apply_exp(&mut self, layout: &Layout, terms: &[(Target, CMat<T>)], bound: T) {
        if terms.is_empty() || bound == T::zero() {
            return;
        }
        let pieces = (bound / T::lit(0.5)).ceil().max(T::one()).to_usize().unwrap_or(1);
        let minus_i = C::new(T::zero(), -T::one());
        for _ in 0..pieces {
            let mut acc = self.clone();
            let mut term = self.clone();
            for j in 1..=60 {
                let mut next = Self::zeros(self.rows, self.cols);
                for (target, m) in terms {
                    term.left_add_into(&mut next, layout, m, *target);
                }
                let f = minus_i / T::from_count(pieces * j);
                next.data.iter_mut().for_each(|z| *z = *z * f);
                for (a, &x) in acc.data.iter_mut().zip(&next.data) {
                    *a = *a + x;
                }
                term = next;
                if term.max_abs() <= T::epsilon() * T::lit(0.01) * acc.max_abs() {
                    break;
                }
            }
            *self = acc;
        }
    }
}

/// Pure state helpers.
pub(crate) mod pure {
    use super::*;

    pub fn product<T: Real>(layout: &Layout, system: &[C<T>]) -> Buffer<T> {
        let mut b = Buffer::zeros(layout.total(), 1);
        for (s, &a) in system.iter().enumerate() {
            b.data[s * layout.ancilla_dim] = a;
        }
        b
    }

    pub fn marginal<T: Real>(layout: &Layout, psi: &Buffer<T>, slot: usize) -> Vec<T> {
        let mut p = vec![T::zero(); layout.levels];
        for (i, z) in psi.data.iter().enumerate() {
            p[layout.digit(i, slot)] = p[layout.digit(i, slot)] + z.norm_sqr();
        }
        p
    }

    /// Projects `slot` on `outcome`, renormalizes and resets the slot to `|0>`.
    pub fn collapse_and_reset<T: Real>(layout: &Layout, psi: &mut Buffer<T>, slot: usize, outcome: usize, prob: T) {
        let st = layout.stride(slot);
        let scale = T::one() / prob.sqrt();
        let n = psi.data.len();
        let mut out = vec![C::zero(); n];
        for i in 0..n {
            if layout.digit(i, slot) == outcome {
                out[i - outcome * st] = psi.data[i] * scale;
            }
        }
        psi.data = out;
    }

    pub fn reduced<T: Real>(layout: &Layout, psi: &Buffer<T>) -> CMat<T> {
        let a = layout.ancilla_dim;
        CMat::from_fn(layout.dim, layout.dim, |i, j| {
            (0..a).fold(C::zero(), |acc, k| acc + psi.data[i * a + k] * psi.data[j * a + k].conj())
        })
    }

    pub fn norm_sqr<T: Real>(psi: &Buffer<T>) -> T {
        psi.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Density-matrix helpers.
pub(crate) mod density {
    use super::*;

    pub fn product<T: Real>(layout: &Layout, rho: &CMat<T>) -> Buffer<T> {
        let d = layout.total();
        let a = layout.ancilla_dim;
        let mut b = Buffer::zeros(d, d);
        for i in 0..layout.dim {
            for j in 0..layout.dim {
                b.data[(i * a) * d + j * a] = rho[(i, j)];
            }
        }
        b
    }

    /// `rho <- G rho G^dagger`.
    pub fn conjugate<T: Real>(layout: &Layout, rho: &mut Buffer<T>, gate: &CMat<T>, target: Target) {
        rho.left_apply(layout, gate, target);
        rho.right_apply_adjoint(layout, gate, target);
    }

    /// `rho <- E rho E^dagger` with `E = exp(-i sum M_k)`.
    pub fn conjugate_exp<T: Real>(layout: &Layout, rho: &mut Buffer<T>, terms: &[(Target, CMat<T>)], bound: T) {
        rho.left_apply_exp(layout, terms, bound);
        let mut x = rho.adjoint();
        x.left_apply_exp(layout, terms, bound);
        *rho = x.adjoint();
    }

    /// Traces out `slot` and puts a fresh `|0><0|` in its place.
    pub fn trace_and_reset<T: Real>(layout: &Layout, rho: &mut Buffer<T>, slot: usize) {
        let d = layout.total();
        let st = layout.stride(slot);
        let keep: Vec<usize> = (0..d).filter(|&i| layout.digit(i, slot) == 0).collect();
        let mut out = vec![C::zero(); d * d];
        for &x in &keep {
            for &y in &keep {
                let mut acc = C::zero();
                for j in 0..layout.levels {
                    acc = acc + rho.data[(x + j * st) * d + y + j * st];
                }
                out[x * d + y] = acc;
            }
        }
        rho.data = out;
    }

    pub fn reduced<T: Real>(layout: &Layout, rho: &Buffer<T>) -> CMat<T> {
        let a = layout.ancilla_dim;
        let d = layout.total();
        CMat::from_fn(layout.dim, layout.dim, |i, j| {
            (0..a).fold(C::zero(), |acc, k| acc + rho.data[(i * a + k) * d + j * a + k])
        })
    }

    pub fn trace<T: Real>(rho: &Buffer<T>) -> T {
        (0..rho.rows).map(|i| rho.data[i * rho.cols + i].re).sum()
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, pauli};

    fn bell_density() -> (Layout, Buffer<f64>) {
        // System qubit entangled with the single ancilla: (|00> + |11>)/sqrt2.
        let layout = Layout::new(2, 2, 1);
        let mut psi = Buffer::zeros(4, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        psi.data[0] = C::new(s, 0.0);
        psi.data[3] = C::new(s, 0.0);
        let rho = Buffer {
            rows: 4,
            cols: 4,
            data: (0..16)
                .map(|k| psi.data[k / 4] * psi.data[k % 4].conj())
                .collect(),
        };
        (layout, rho)
    }

    #[test]
    fn trace_out_bell_pair_gives_mixed_system() {
        let (layout, mut rho) = bell_density();
        density::trace_and_reset(&layout, &mut rho, 0);
        let red = density::reduced(&layout, &rho);
        assert!((&red - &CMat::identity(2).scale_real(0.5)).max_abs() < 1e-15);
        assert!((density::trace(&rho) - 1.0).abs() < 1e-15);
        // The ancilla is back in |0>.
        for i in 0..4 {
            for j in 0..4 {
                if layout.digit(i, 0) == 1 || layout.digit(j, 0) == 1 {
                    assert_eq!(rho.data[i * 4 + j], C::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn left_and_right_application_match_dense_products() {
        let layout = Layout::new(2, 2, 2);
        let d = layout.total();
        let h = &pauli::x::<f64>().kron(&pauli::y()) + &pauli::z::<f64>().kron(&pauli::z());
        let g = expm_hermitian(&h, 0.37);
        // Embed G on (system, slot 1) into the full space.
        let full = CMat::from_fn(d, d, |r, c| {
            let (sr, a1r, a2r) = (r / 4, (r / 2) % 2, r % 2);
            let (sc, a1c, a2c) = (c / 4, (c / 2) % 2, c % 2);
            if a1r != a1c {
                return C::new(0.0, 0.0);
            }
            g[(sr * 2 + a2r, sc * 2 + a2c)]
        });
        let mut rho = Buffer::zeros(d, d);
        for (k, z) in rho.data.iter_mut().enumerate() {
            *z = C::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos());
        }
        let dense = CMat::from_vec(d, d, rho.data.clone());
        let expect = full.matmul(&dense).matmul(&full.adjoint());
        density::conjugate(&layout, &mut rho, &g, Target::SystemSlot(1));
        let got = CMat::from_vec(d, d, rho.data.clone());
        assert!((&got - &expect).max_abs() < 1e-13);
    }

    #[test]
    fn taylor_exponential_matches_eigen_exponential() {
        let layout = Layout::new(2, 2, 1);
        let h = pauli::x::<f64>().kron(&pauli::y()).scale_real(1.7);
        let mut psi = Buffer::zeros(4, 1);
        psi.data[0] = C::new(1.0, 0.0);
        let expect = expm_hermitian(&h, 1.0).matvec(&psi.data);
        psi.left_apply_exp(&layout, &[(Target::SystemSlot(0), h.clone())], h.norm_fro());
        for (a, b) in psi.data.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn collapse_moves_outcome_to_ground() {
        let layout = Layout::new(1, 3, 2);
        let mut psi: Buffer<f64> = Buffer::zeros(9, 1);
        psi.data[2 * 3 + 1] = C::new(0.6, 0.0); // slot0 = 2, slot1 = 1
        psi.data[1] = C::new(0.8, 0.0); // slot0 = 0, slot1 = 1
        let p = pure::marginal(&layout, &psi, 0);
        assert!((p[2] - 0.36).abs() < 1e-15 && (p[0] - 0.64).abs() < 1e-15);
        pure::collapse_and_reset(&layout, &mut psi, 0, 2, p[2]);
        assert!((psi.data[1].re - 1.0).abs() < 1e-15);
        assert!((pure::norm_sqr(&psi) - 1.0).abs() < 1e-15);
    }
}
