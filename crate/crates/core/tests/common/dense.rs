//! Brute-force Fock-space construction: explicit truncated ladder matrices,
//! single-mode gates by dense matrix exponential, two-mode gates by a
//! substepped Taylor series of their generator acting on the state tensor.

use nalgebra::DMatrix;
use qawg::C64;

pub struct Dense {
    pub dim: usize,
    pub modes: usize,
    pub psi: Vec<C64>,
}

fn annihilation(d: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

impl Dense {
    pub fn vacuum(modes: usize, dim: usize) -> Self {
        let mut psi = vec![C64::new(0.0, 0.0); dim.pow(modes as u32)];
        psi[0] = C64::new(1.0, 0.0);
        Self { dim, modes, psi }
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim.pow((self.modes - 1 - mode) as u32)
    }

    /// `(1 ⊗ … ⊗ op ⊗ … ⊗ 1) v`.
    fn apply_on(&self, v: &[C64], mode: usize, op: &DMatrix<C64>) -> Vec<C64> {
        let d = self.dim;
        let st = self.stride(mode);
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for base in 0..v.len() {
            if !(base / st).is_multiple_of(d) {
                continue;
            }
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    let o = op[(i, j)];
                    if o != C64::new(0.0, 0.0) {
                        acc += o * v[base + j * st];
                    }
                }
                out[base + i * st] = acc;
            }
        }
        out
    }

    /// `exp(G)` on one mode with `G` a D×D generator.
    pub fn single(&mut self, mode: usize, generator: DMatrix<C64>) {
        let u = generator.exp();
        self.psi = self.apply_on(&self.psi, mode, &u);
    }

    /// `exp(Σ c·A⊗B)` on modes `(i, j)` applied to the state.
    fn two(&mut self, i: usize, j: usize, terms: &[(C64, DMatrix<C64>, DMatrix<C64>)]) {
        let g = |v: &[C64]| -> Vec<C64> {
            let mut out = vec![C64::new(0.0, 0.0); v.len()];
            for (c, a, b) in terms {
                let w = self.apply_on(&self.apply_on(v, j, b), i, a);
                for (o, x) in out.iter_mut().zip(w) {
                    *o += c * x;
                }
            }
            out
        };
        let scale: f64 = terms.iter().map(|(c, _, _)| c.norm()).sum::<f64>() * self.dim as f64;
        let steps = (2.0 * scale).ceil().max(1.0) as usize;
        let h = C64::new(1.0 / steps as f64, 0.0);
        let mut v = self.psi.clone();
        for _ in 0..steps {
            let mut term = v.clone();
            let mut sum = v.clone();
            for k in 1..60 {
                term = g(&term).into_iter().map(|x| x * h / k as f64).collect();
                let norm: f64 = term.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                for (s, t) in sum.iter_mut().zip(&term) {
                    *s += t;
                }
                if norm < 1e-18 {
                    break;
                }
            }
            v = sum;
        }
        self.psi = v;
    }

    /// `exp(r/2 (a² − a†²))`: `r > 0` squeezes x.
    pub fn squeeze(&mut self, mode: usize, r: f64) {
        let a = annihilation(self.dim);
        let ad = a.adjoint();
        let g = (&a * &a - &ad * &ad) * C64::new(r / 2.0, 0.0);
        self.single(mode, g);
    }

    /// `exp(α a† − α* a)`.
    pub fn displace(&mut self, mode: usize, alpha: C64) {
        let a = annihilation(self.dim);
        let g = a.adjoint() * alpha - &a * alpha.conj();
        self.single(mode, g);
    }

    /// `exp(iφ a†a)`.
    pub fn phase(&mut self, mode: usize, phi: f64) {
        let d = self.dim;
        let g = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(0.0, phi * i as f64)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        self.single(mode, g);
    }

    /// `exp(r(a†b† − ab))`.
    pub fn epr(&mut self, i: usize, j: usize, r: f64) {
        let a = annihilation(self.dim);
        let ad = a.adjoint();
        self.two(
            i,
            j,
            &[(C64::new(r, 0.0), ad.clone(), ad), (C64::new(-r, 0.0), a.clone(), a)],
        );
    }

    /// Mixer whose Heisenberg action is `(a, b) → P(ν/2) R(κ/2) P(μ/2) (a, b)`
    /// with `P(φ) = diag(e^(iφ), e^(−iφ))` and `R(s) = [[cos s, sin s], [−sin s, cos s]]`.
    pub fn beam_splitter(&mut self, i: usize, j: usize, kappa: f64, nu: f64, mu: f64) {
        let a = annihilation(self.dim);
        let ad = a.adjoint();
        let s = kappa / 2.0;
        self.phase(i, mu / 2.0);
        self.phase(j, -mu / 2.0);
        self.two(
            i,
            j,
            &[(C64::new(s, 0.0), ad.clone(), a.clone()), (C64::new(-s, 0.0), a, ad)],
        );
        self.phase(i, nu / 2.0);
        self.phase(j, -nu / 2.0);
    }

    /// Unnormalized signal amplitudes `⟨n, pattern|ψ⟩` for `n ≤ cutoff`;
    /// mode 0 is the signal.
    pub fn herald(&self, pattern: &[usize], cutoff: usize) -> Vec<C64> {
        (0..=cutoff)
            .map(|n| {
                let idx = std::iter::once(n)
                    .chain(pattern.iter().copied())
                    .fold(0, |acc, k| acc * self.dim + k);
                self.psi[idx]
            })
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|x| x.norm_sqr()).sum()
    }
}

/// `vv†/‖v‖²` and `‖v‖²`.
pub fn projector(v: &[C64]) -> (DMatrix<C64>, f64) {
    let p: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let d = v.len();
    (DMatrix::from_fn(d, d, |m, n| v[m] * v[n].conj() / p), p)
}
