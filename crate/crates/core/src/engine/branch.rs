//! Branch representation for models where `H_S` and every `S_alpha` share an
//! eigenbasis (pure dephasing and its relatives).
//!
//! In the common eigenbasis every gate is block diagonal in the system index
//! `k`, so the joint state stays of the form
//! `sum_k c_k |k> (x) prod_slots |phi_{k,slot}>` (and the matching form for a
//! density matrix). Storage is linear in the number of ancillas instead of
//! exponential, which makes long coupling windows affordable.

use num_traits::{One, Zero};
use rand::Rng;

use crate::linalg::{CMat, HermitianEigen};
use crate::planner::SystemSpec;
use crate::scalar::{Real, C};

/// Common eigenbasis: `P^dagger M P` is diagonal for `H_S` at every step and
/// for every coupling.
#[derive(Clone, Debug)]
pub(crate) struct BranchBasis<T> {
    /// Columns are the common eigenvectors.
    pub p: CMat<T>,
    /// `s[alpha][k]`: eigenvalue of `S_alpha` on basis vector `k`.
    pub s: Vec<Vec<C<T>>>,
    /// Eigenvalues of `H_S`, one list per distinct Hamiltonian.
    pub h: Vec<Vec<T>>,
}

impl<T: Real> BranchBasis<T> {
    pub fn find(spec: &SystemSpec<T>) -> Option<Self> {
        let mut mats: Vec<&CMat<T>> = spec.hamiltonian.matrices();
        let n_h = mats.len();
        mats.extend(spec.couplings.iter());
        let tol = |m: &CMat<T>| T::lit(1e-9) * T::one().max(m.max_abs());
        let p = if mats.iter().all(|m| m.is_diagonal(tol(m))) {
            CMat::identity(spec.dim)
        } else {
            // A generic real combination separates every joint eigenspace the
            // matrices can resolve; the check below rejects unlucky cases.
            let mut a = CMat::zeros(spec.dim, spec.dim);
            for (i, m) in mats.iter().enumerate() {
                let w = T::lit(1.0 / (std::f64::consts::SQRT_2 + i as f64 * std::f64::consts::PI));
                let scale = T::one() / T::one().max(m.max_abs());
                a = &a + &m.hermitize().scale_real(w * scale);
            }
            HermitianEigen::new(&a).vectors
        };
        let pd = p.adjoint();
        let mut diags = Vec::with_capacity(mats.len());
        for m in &mats {
            let t = pd.matmul(m).matmul(&p);
            if !t.is_diagonal(tol(m)) {
                return None;
            }
            diags.push(t.diagonal());
        }
        let h = diags[..n_h]
            .iter()
            .map(|d| d.iter().map(|z| z.re).collect())
            .collect();
        Some(Self {
            p,
            s: diags[n_h..].to_vec(),
            h,
        })
    }

    /// Couplings restricted to branch `k`, as `1 x 1` matrices.
    pub fn branch_couplings(&self, k: usize) -> Vec<CMat<T>> {
        self.s
            .iter()
            .map(|s| CMat::from_vec(1, 1, vec![s[k]]))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Coefficients<T> {
    Pure(Vec<C<T>>),
    Density(CMat<T>),
}

/// Branch-form joint state. `phi[(k * slots + slot) * levels + j]`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct BranchState<T> {
    pub coeff: Coefficients<T>,
    pub phi: Vec<C<T>>,
    pub dim: usize,
    pub slots: usize,
    pub levels: usize,
}

impl<T: Real> BranchState<T> {
    pub fn new(coeff: Coefficients<T>, dim: usize, slots: usize, levels: usize) -> Self {
        let mut phi = vec![C::zero(); dim * slots * levels];
        for k in 0..dim * slots {
            phi[k * levels] = C::one();
        }
        Self {
            coeff,
            phi,
            dim,
            slots,
            levels,
        }
    }

    fn local(&self, k: usize, slot: usize) -> &[C<T>] {
        let o = (k * self.slots + slot) * self.levels;
        &self.phi[o..o + self.levels]
    }

    fn local_mut(&mut self, k: usize, slot: usize) -> &mut [C<T>] {
        let o = (k * self.slots + slot) * self.levels;
        &mut self.phi[o..o + self.levels]
    }

    fn reset(&mut self, slot: usize) {
        for k in 0..self.dim {
            let v = self.local_mut(k, slot);
            v.iter_mut().for_each(|z| *z = C::zero());
            v[0] = C::one();
        }
    }

    /// `<phi_{l,slot} | phi_{k,slot}>`.
    fn overlap(&self, k: usize, l: usize, slot: usize) -> C<T> {
        self.local(l, slot)
            .iter()
            .zip(self.local(k, slot))
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// Multiplies branch `k` by the phase `u[k]` (a diagonal system unitary).
    pub fn apply_diagonal(&mut self, u: &[C<T>]) {
        match &mut self.coeff {
            Coefficients::Pure(c) => c.iter_mut().zip(u).for_each(|(a, b)| *a = *a * *b),
            Coefficients::Density(r) => {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        r[(i, j)] = r[(i, j)] * u[i] * u[j].conj();
                    }
                }
            }
        }
    }

    /// Applies `gates[k]` (`levels x levels`) to the slot in branch `k`.
    pub fn apply_gate(&mut self, slot: usize, gates: &[CMat<T>]) {
        for (k, g) in gates.iter().enumerate() {
            let v = g.matvec(self.local(k, slot));
            self.local_mut(k, slot).copy_from_slice(&v);
        }
    }

    /// Partial trace of the slot followed by a reset to `|0>`.
    pub fn trace_and_reset(&mut self, slot: usize) {
        if let Coefficients::Density(r) = &self.coeff {
            let mut r = r.clone();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    r[(i, j)] = r[(i, j)] * self.overlap(i, j, slot);
                }
            }
            self.coeff = Coefficients::Density(r);
        }
        self.reset(slot);
    }

    /// Computational-basis measurement of the slot followed by a reset.
    /// Pure states only; returns the outcome.
    pub fn measure_and_reset<R: Rng>(&mut self, slot: usize, rng: &mut R) -> usize {
        let Coefficients::Pure(c) = &self.coeff else {
            panic!("measurement needs a pure branch state");
        };
        let mut p = vec![T::zero(); self.levels];
        for (k, ck) in c.iter().enumerate() {
            let w = ck.norm_sqr();
            for (pj, z) in p.iter_mut().zip(self.local(k, slot)) {
                *pj = *pj + w * z.norm_sqr();
            }
        }
        let outcome = sample(&p, rng);
        let scale = T::one() / p[outcome].sqrt();
        let c: Vec<C<T>> = c
            .iter()
            .enumerate()
            .map(|(k, ck)| *ck * self.local(k, slot)[outcome] * scale)
            .collect();
        self.coeff = Coefficients::Pure(c);
        self.reset(slot);
        outcome
    }

    /// Reduced system state in the branch basis.
    pub fn reduced(&self) -> CMat<T> {
        let base = match &self.coeff {
            Coefficients::Pure(c) => CMat::from_fn(self.dim, self.dim, |i, j| c[i] * c[j].conj()),
            Coefficients::Density(r) => r.clone(),
        };
        CMat::from_fn(self.dim, self.dim, |i, j| {
            (0..self.slots).fold(base[(i, j)], |acc, s| acc * self.overlap(i, j, s))
        })
    }
}

/// Draws an index with probabilities proportional to `p`.
pub(crate) fn sample<T: Real, R: Rng>(p: &[T], rng: &mut R) -> usize {
    let total: f64 = p.iter().map(|x| x.as_f64()).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (j, x) in p.iter().enumerate() {
        let x = x.as_f64();
        if x <= 0.0 {
            continue;
        }
        acc += x;
        last = j;
        if u < acc {
            return j;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::planner::{Hamiltonian, InitialState};
    use crate::rng::stream_rng;

    fn spec(h: CMat<f64>, s: CMat<f64>) -> SystemSpec<f64> {
        SystemSpec {
            dim: 2,
            hamiltonian: Hamiltonian::Constant(h),
            couplings: vec![s],
            gamma: 0.1,
            initial_state: InitialState::Pure(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]),
            observables: vec![],
        }
    }

    #[test]
    fn basis_detection() {
        assert!(BranchBasis::find(&spec(pauli::z(), pauli::z())).is_some());
        assert!(BranchBasis::find(&spec(pauli::z(), pauli::x())).is_none());
        let b = BranchBasis::find(&spec(pauli::x(), pauli::x())).unwrap();
        let sx: Vec<f64> = b.s[0].iter().map(|z| z.re).collect();
        assert!((sx[0].abs() - 1.0).abs() < 1e-12 && (sx[0] + sx[1]).abs() < 1e-12);
    }

    #[test]
    fn bell_like_branch_trace_and_measurement() {
        // c = (1, 1)/sqrt2, branch 1 flips its ancilla: (|0,0> + |1,1>)/sqrt2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let flip = pauli::x::<f64>();
        let id = CMat::identity(2);
        let mut st = BranchState::new(
            Coefficients::Density(CMat::from_fn(2, 2, |_, _| C::new(0.5, 0.0))),
            2,
            1,
            2,
        );
        st.apply_gate(0, &[id.clone(), flip.clone()]);
        st.trace_and_reset(0);
        assert!((&st.reduced() - &CMat::identity(2).scale_real(0.5)).max_abs() < 1e-15);

        let mut ones = 0;
        let shots = 10_000;
        let mut rng = stream_rng(1, 0);
        for _ in 0..shots {
            let mut p = BranchState::new(Coefficients::Pure(vec![C::new(s, 0.0); 2]), 2, 1, 2);
            p.apply_gate(0, &[id.clone(), flip.clone()]);
            let o = p.measure_and_reset(0, &mut rng);
            ones += o;
            let red = p.reduced();
            assert!((red[(o, o)].re - 1.0).abs() < 1e-12);
        }
        let f = ones as f64 / shots as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / shots as f64).sqrt(), "{f}");
    }
}
