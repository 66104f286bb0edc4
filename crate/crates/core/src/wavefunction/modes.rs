use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{OscillatorParams, WaveFunction1D};
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// A complete set of oscillator modes on a symmetric grid.
///
/// A single grid cell is far too sharp to be expanded in a few dozen Hermite
/// functions, so position kets are propagated here instead. The modes are the
/// eigenvectors of the sinc-DVR oscillator Hamiltonian, diagonalized
/// separately in the even and odd parity sectors. Mode `m` carries the exact
/// energy `ħω(m + 1/2)`, which makes the propagator exactly unitary on the
/// grid with `U(T/2) = -i·parity` and `U(T) = -1`. The low modes coincide with
/// the Hermite functions to rounding on any grid that resolves them.
#[derive(Debug, Clone)]
pub struct OscillatorModes {
    params: OscillatorParams,
    grid: Grid1D,
    // column m is mode m in ket components
    vectors: DMatrix<f64>,
    energies: Vec<f64>,
    dvr_energies: Vec<f64>,
}

type SectorVector = Vec<(usize, f64)>;

fn parity_sectors(n: usize) -> (Vec<SectorVector>, Vec<SectorVector>) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let half = n / 2;
    let mut even: Vec<SectorVector> = (0..half).map(|i| vec![(i, r), (n - 1 - i, r)]).collect();
    let odd: Vec<SectorVector> = (0..half).map(|i| vec![(i, -r), (n - 1 - i, r)]).collect();
    if n % 2 == 1 {
        even.push(vec![(half, 1.0)]);
    }
    (even, odd)
}

impl OscillatorModes {
    pub fn new(params: OscillatorParams, grid: Grid1D) -> Result<Self> {
        if !grid.is_symmetric() {
            return Err(Error::InvalidGrid(format!(
                "oscillator modes need a grid symmetric about 0, got [{}, {}]",
                grid.min(),
                grid.max()
            )));
        }
        let n = grid.len();
        let h = grid.spacing();
        let kin = params.hbar().powi(2) / (2.0 * params.mass() * h * h);
        let spring = 0.5 * params.mass() * params.omega().powi(2);
        let xs = grid.points();
        let hamiltonian = |p: usize, q: usize| -> f64 {
            if p == q {
                kin * PI * PI / 3.0 + spring * xs[p] * xs[p]
            } else {
                let d = p as f64 - q as f64;
                let sign = if (p + q).is_multiple_of(2) { 1.0 } else { -1.0 };
                kin * 2.0 * sign / (d * d)
            }
        };

        let (even, odd) = parity_sectors(n);
        let solve = |sector: &[SectorVector]| -> (Vec<f64>, Vec<Vec<f64>>) {
            let dim = sector.len();
            let hs: DMatrix<f64> = DMatrix::from_fn(dim, dim, |a, b| {
                sector[a]
                    .iter()
                    .flat_map(|&(p, wp)| sector[b].iter().map(move |&(q, wq)| (p, wp, q, wq)))
                    .map(|(p, wp, q, wq)| wp * wq * hamiltonian(p, q))
                    .sum()
            });
            let eig = SymmetricEigen::new(hs);
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let vectors = order
                .iter()
                .map(|&k| {
                    let mut full = vec![0.0f64; n];
                    for (a, basis_vec) in sector.iter().enumerate() {
                        let c = eig.eigenvectors[(a, k)];
                        for &(p, w) in basis_vec {
                            full[p] += c * w;
                        }
                    }
                    // sign convention: positive on the far right, like the Hermite functions
                    let peak = full.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if let Some(&lead) = full.iter().rev().find(|v| v.abs() > 1e-3 * peak) {
                        if lead < 0.0 {
                            full.iter_mut().for_each(|v| *v = -*v);
                        }
                    }
                    full
                })
                .collect();
            (values, vectors)
        };
        let (even_vals, even_vecs) = solve(&even);
        let (odd_vals, odd_vecs) = solve(&odd);

        let mut vectors = DMatrix::zeros(n, n);
        let mut dvr_energies = Vec::with_capacity(n);
        for m in 0..n {
            let (vals, vecs) = if m % 2 == 0 { (&even_vals, &even_vecs) } else { (&odd_vals, &odd_vecs) };
            dvr_energies.push(vals[m / 2]);
            for (i, v) in vecs[m / 2].iter().enumerate() {
                vectors[(i, m)] = *v;
            }
        }
        let energies = (0..n).map(|m| params.energy(m)).collect();
        Ok(Self { params, grid, vectors, energies, dvr_energies })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Mode `m` as a function-convention wave function.
    pub fn mode(&self, m: usize) -> WaveFunction1D {
        let s = 1.0 / self.grid.spacing().sqrt();
        let amps = self.vectors.column(m).iter().map(|&v| Complex64::new(v * s, 0.0)).collect();
        WaveFunction1D::new(self.grid, amps, 0.0).expect("finite modes")
    }

    /// Largest `|E_dvr(m) - ħω(m+1/2)|` over the first `count` modes.
    pub fn low_mode_energy_error(&self, count: usize) -> f64 {
        self.dvr_energies
            .iter()
            .zip(&self.energies)
            .take(count)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Position-ket propagator `K[j][i] = ⟨x_j|U(τ)|x_i⟩`.
    pub fn kernel(&self, tau: f64) -> DMatrix<Complex64> {
        let hbar = self.params.hbar();
        let n = self.len();
        let mut scaled_cos = self.vectors.clone();
        let mut scaled_sin = self.vectors.clone();
        for m in 0..n {
            let phase = self.energies[m] * tau / hbar;
            let (s, c) = phase.sin_cos();
            scaled_cos.column_mut(m).scale_mut(c);
            scaled_sin.column_mut(m).scale_mut(-s);
        }
        let re = &scaled_cos * self.vectors.transpose();
        let im = &scaled_sin * self.vectors.transpose();
        DMatrix::from_fn(n, n, |j, i| Complex64::new(re[(j, i)], im[(j, i)]))
    }

    /// `U(τ)` applied to ket components.
    pub fn propagate_kets(&self, kets: &[Complex64], tau: f64) -> Result<Vec<Complex64>> {
        let n = self.len();
        if kets.len() != n {
            return Err(Error::GridMismatch);
        }
        let hbar = self.params.hbar();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..n {
            let col = self.vectors.column(m);
            let proj: Complex64 = col.iter().zip(kets).map(|(v, k)| k * *v).sum();
            let c = proj * Complex64::from_polar(1.0, -self.energies[m] * tau / hbar);
            for (o, v) in out.iter_mut().zip(col.iter()) {
                *o += c * *v;
            }
        }
        Ok(out)
    }

    pub fn propagate(&self, psi: &WaveFunction1D, tau: f64) -> Result<WaveFunction1D> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let kets = self.propagate_kets(&psi.kets(), tau)?;
        WaveFunction1D::from_kets(self.grid, &kets, psi.time() + tau)
    }
}
