//! Random resistor network on an `L × L` square lattice.
//!
//! Row 0 is a bus bar held at 1 V, row `L − 1` one held at 0 V, and the
//! lattice is periodic in the horizontal direction. Interior nodes relax by
//! synchronous Kirchhoff sweeps: each node takes the conductance-weighted
//! mean of its four neighbours' previous potentials, which zeroes the net
//! current into it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observer::{ordered_mean, RelaxationSeries, SeriesSource};
use crate::rng::RngStream;

/// Conductances are drawn from `(max(g_min, G_FLOOR), g_max]`.
pub const G_FLOOR: f64 = 1e-9;

pub const TOP_POTENTIAL: f64 = 1.0;
pub const BOTTOM_POTENTIAL: f64 = 0.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialInit {
    /// Every interior node starts at the same potential.
    Uniform(f64),
    /// The homogeneous-medium solution `V = 1 − row/(L − 1)`.
    Ramp,
}

impl Default for PotentialInit {
    fn default() -> Self {
        PotentialInit::Uniform(0.5)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResistorLattice {
    side: usize,
    /// Row-major node potentials.
    potential: Vec<f64>,
    /// `conductance_h[r·L + c]` joins `(r, c)` and `(r, c + 1 mod L)`.
    conductance_h: Vec<f64>,
    /// `conductance_v[r·L + c]` joins `(r, c)` and `(r + 1, c)`; `L − 1` rows.
    conductance_v: Vec<f64>,
    g_window: (f64, f64),
    /// `1 / Σ g` over the four bonds of each node (unused on the bus bars).
    inv_total_g: Vec<f64>,
    scratch: Vec<f64>,
}

fn validate_window(g_window: (f64, f64)) -> Result<()> {
    let (lo, hi) = g_window;
    if !(lo >= 0.0 && hi > lo && hi.is_finite() && hi > G_FLOOR) {
        return Err(Error::InvalidParameter(format!(
            "conductance window ({lo}, {hi}) must satisfy 0 <= g_min < g_max"
        )));
    }
    Ok(())
}

impl ResistorLattice {
    pub fn build<R: Rng + ?Sized>(
        side: usize,
        g_window: (f64, f64),
        init: PotentialInit,
        rng: &mut R,
    ) -> Result<Self> {
        if side < 3 {
            return Err(Error::InvalidParameter(format!(
                "lattice side {side} leaves no interior nodes (need >= 3)"
            )));
        }
        validate_window(g_window)?;
        let lo = g_window.0.max(G_FLOOR);
        let hi = g_window.1;
        // 1 − u ∈ (0, 1] maps onto (lo, hi]
        let mut draw = || lo + (hi - lo) * (1.0 - rng.random::<f64>());
        let conductance_h: Vec<f64> = (0..side * side).map(|_| draw()).collect();
        let conductance_v: Vec<f64> = (0..side * (side - 1)).map(|_| draw()).collect();
        Self::from_conductances(side, conductance_h, conductance_v, g_window, init)
    }

    /// Lattice with explicitly given bonds (same layout as the fields).
    pub fn from_conductances(
        side: usize,
        conductance_h: Vec<f64>,
        conductance_v: Vec<f64>,
        g_window: (f64, f64),
        init: PotentialInit,
    ) -> Result<Self> {
        if side < 3 {
            return Err(Error::InvalidParameter(format!(
                "lattice side {side} leaves no interior nodes (need >= 3)"
            )));
        }
        if conductance_h.len() != side * side {
            return Err(Error::ShapeError {
                expected: side * side,
                actual: conductance_h.len(),
            });
        }
        if conductance_v.len() != side * (side - 1) {
            return Err(Error::ShapeError {
                expected: side * (side - 1),
                actual: conductance_v.len(),
            });
        }
        if let Some(g) = conductance_h.iter().chain(&conductance_v).find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!("conductance {g} must be positive")));
        }

        let mut potential = vec![0.0; side * side];
        for r in 0..side {
            let v = if r == 0 {
                TOP_POTENTIAL
            } else if r == side - 1 {
                BOTTOM_POTENTIAL
            } else {
                match init {
                    PotentialInit::Uniform(v) => v,
                    PotentialInit::Ramp => 1.0 - r as f64 / (side - 1) as f64,
                }
            };
            potential[r * side..(r + 1) * side].fill(v);
        }

        let mut lat = Self {
            side,
            scratch: potential.clone(),
            potential,
            conductance_h,
            conductance_v,
            g_window,
            inv_total_g: vec![0.0; side * side],
        };
        for r in 1..side - 1 {
            for c in 0..side {
                let [left, right, up, down] = lat.bonds(r, c);
                lat.inv_total_g[r * side + c] = 1.0 / (left + right + up + down);
            }
        }
        Ok(lat)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn g_window(&self) -> (f64, f64) {
        self.g_window
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn potential_at(&self, r: usize, c: usize) -> f64 {
        self.potential[r * self.side + c]
    }

    pub fn conductances(&self) -> (&[f64], &[f64]) {
        (&self.conductance_h, &self.conductance_v)
    }

    pub fn n_interior(&self) -> usize {
        (self.side - 2) * self.side
    }

    /// Interior potentials, row-major from row 1.
    pub fn interior(&self) -> &[f64] {
        &self.potential[self.side..self.side * (self.side - 1)]
    }

    /// Conductances of the `[left, right, up, down]` bonds of `(r, c)`.
    #[inline]
    fn bonds(&self, r: usize, c: usize) -> [f64; 4] {
        let l = self.side;
        let cl = (c + l - 1) % l;
        [
            self.conductance_h[r * l + cl],
            self.conductance_h[r * l + c],
            self.conductance_v[(r - 1) * l + c],
            self.conductance_v[r * l + c],
        ]
    }

    /// Net current `Σ g_k (V_k − V_o)` flowing into interior node `(r, c)`.
    pub fn node_residual(&self, r: usize, c: usize) -> f64 {
        let l = self.side;
        let v = &self.potential;
        let [gl, gr, gu, gd] = self.bonds(r, c);
        let vo = v[r * l + c];
        gl * (v[r * l + (c + l - 1) % l] - vo)
            + gr * (v[r * l + (c + 1) % l] - vo)
            + gu * (v[(r - 1) * l + c] - vo)
            + gd * (v[(r + 1) * l + c] - vo)
    }

    pub fn max_residual(&self) -> f64 {
        (1..self.side - 1)
            .flat_map(|r| (0..self.side).map(move |c| (r, c)))
            .map(|(r, c)| self.node_residual(r, c).abs())
            .fold(0.0, f64::max)
    }

    /// One synchronous sweep. Returns `X = (1/N_int) Σ |ΔV|` over interior nodes.
    pub fn relax_sweep(&mut self) -> f64 {
        self.sweep().0
    }

    /// One sweep returning `(X, max |ΔV|)`.
    fn sweep(&mut self) -> (f64, f64) {
        let l = self.side;
        let v = &self.potential;
        let (mut sum, mut max) = (0.0f64, 0.0f64);
        for r in 1..l - 1 {
            let row = r * l..(r + 1) * l;
            let up = &v[row.start - l..row.start];
            let mid = &v[row.clone()];
            let down = &v[row.end..row.end + l];
            let gh = &self.conductance_h[row.clone()];
            let gu = &self.conductance_v[row.start - l..row.start];
            let gd = &self.conductance_v[row.clone()];
            let inv = &self.inv_total_g[row.clone()];
            let out = &mut self.scratch[row];
            for c in 0..l {
                let cl = if c == 0 { l - 1 } else { c - 1 };
                let cr = if c == l - 1 { 0 } else { c + 1 };
                let new = (gh[cl] * mid[cl] + gh[c] * mid[cr] + gu[c] * up[c] + gd[c] * down[c]) * inv[c];
                let d = (new - mid[c]).abs();
                sum += d;
                if d > max {
                    max = d;
                }
                out[c] = new;
            }
        }
        std::mem::swap(&mut self.potential, &mut self.scratch);
        (sum / self.n_interior() as f64, max)
    }

    /// Sweeps until the largest single-node change drops below `tol`.
    /// Returns the number of sweeps performed, or `None` if `max_sweeps` ran out.
    pub fn relax_to_convergence(&mut self, tol: f64, max_sweeps: usize) -> Option<usize> {
        (1..=max_sweeps).find(|_| self.sweep().1 < tol)
    }

    /// Interior potentials of the exact Kirchhoff solution, from a dense LU
    /// solve of the node equations. Meant for small lattices.
    pub fn dense_solution(&self) -> Result<Vec<f64>> {
        let l = self.side;
        let n = self.n_interior();
        let index = |r: usize, c: usize| (r - 1) * l + c;
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for r in 1..l - 1 {
            for c in 0..l {
                let row = index(r, c);
                let [gl, gr, gu, gd] = self.bonds(r, c);
                a[(row, row)] = gl + gr + gu + gd;
                a[(row, index(r, (c + l - 1) % l))] -= gl;
                a[(row, index(r, (c + 1) % l))] -= gr;
                for (g, nr) in [(gu, r - 1), (gd, r + 1)] {
                    if nr == 0 {
                        b[row] += g * TOP_POTENTIAL;
                    } else if nr == l - 1 {
                        b[row] += g * BOTTOM_POTENTIAL;
                    } else {
                        a[(row, index(nr, c))] -= g;
                    }
                }
            }
        }
        a.lu()
            .solve(&b)
            .map(|x| x.iter().copied().collect())
            .ok_or_else(|| Error::InvalidParameter("singular Kirchhoff system".into()))
    }
}

/// `X(1..=t_max)` for one conductance realization.
pub fn rrn_trajectory(
    side: usize,
    g_window: (f64, f64),
    init: PotentialInit,
    t_max: usize,
    stream: RngStream,
) -> Result<Vec<f64>> {
    let mut lat = ResistorLattice::build(side, g_window, init, &mut stream.rng())?;
    Ok((0..t_max).map(|_| lat.relax_sweep()).collect())
}

/// Realization-averaged `X(t)`; one time step is one full sweep.
/// Realization `c` draws its bonds from stream `c` of `master_seed`.
pub fn run_rrn_relaxation(
    side: usize,
    g_window: (f64, f64),
    init: PotentialInit,
    t_max: usize,
    n_configs: usize,
    master_seed: u64,
) -> Result<RelaxationSeries> {
    validate_window(g_window)?;
    if t_max < 2 {
        return Err(Error::InvalidParameter(format!("t_max = {t_max} must be at least 2")));
    }
    if n_configs == 0 {
        return Err(Error::InvalidParameter("n_configs must be positive".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n_configs as u64)
        .into_par_iter()
        .map(|c| rrn_trajectory(side, g_window, init, t_max, RngStream::new(master_seed, c)))
        .collect::<Result<_>>()?;
    Ok(RelaxationSeries {
        t: (1..=t_max as u64).collect(),
        x_mean: ordered_mean(&rows, t_max),
        n_configs,
        master_seed,
        source: SeriesSource::Resistor { side, g_window },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn homogeneous(side: usize, init: PotentialInit) -> ResistorLattice {
        ResistorLattice::build(side, (1.0, 1.0 + 1e-12), init, &mut RngStream::new(0, 0).rng()).unwrap()
    }

    #[test]
    fn rejects_degenerate_input() {
        let mut rng = RngStream::new(0, 0).rng();
        assert!(matches!(
            ResistorLattice::build(2, (0.0, 1.0), PotentialInit::default(), &mut rng),
            Err(Error::InvalidParameter(_))
        ));
        assert!(ResistorLattice::build(5, (0.5, 0.5), PotentialInit::default(), &mut rng).is_err());
        assert!(ResistorLattice::build(5, (-0.1, 1.0), PotentialInit::default(), &mut rng).is_err());
    }

    #[test]
    fn conductances_inside_window() {
        let lat = ResistorLattice::build(20, (0.2, 1.0), PotentialInit::default(), &mut RngStream::new(1, 0).rng())
            .unwrap();
        let (h, v) = lat.conductances();
        assert!(h.iter().chain(v).all(|&g| g > 0.2 && g <= 1.0));
    }

    #[test]
    fn conductance_mean_is_half() {
        let lat = ResistorLattice::build(100, (0.0, 1.0), PotentialInit::default(), &mut RngStream::new(2, 0).rng())
            .unwrap();
        let (h, v) = lat.conductances();
        let all: Vec<f64> = h.iter().chain(v).copied().collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // sd of the mean of ~2e4 U(0,1) draws is 0.002
        assert!((mean - 0.5).abs() < 0.01, "mean = {mean}");
        assert!(all.iter().all(|&g| g > 0.0));
        let mut counts = [0usize; 10];
        for g in &all {
            counts[((g * 10.0) as usize).min(9)] += 1;
        }
        let expect = all.len() as f64 / 10.0;
        assert!(counts.iter().all(|&c| (c as f64 - expect).abs() < 5.0 * expect.sqrt()), "{counts:?}");
    }

    #[test]
    fn two_resistor_divider() {
        // L = 3: one interior row, each node tied to 1 V above and 0 V below
        // by unit bonds; the in-row bonds are negligible
        let mut h = vec![1.0; 9];
        h[3..6].fill(1e-30);
        let mut lat = ResistorLattice::from_conductances(
            3,
            h,
            vec![1.0; 6],
            (0.0, 1.0),
            PotentialInit::Uniform(0.2),
        )
        .unwrap();
        let x = lat.relax_sweep();
        for c in 0..3 {
            assert_relative_eq!(lat.potential_at(1, c), 0.5, epsilon = 1e-15);
        }
        assert_relative_eq!(x, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn homogeneous_relaxes_to_ramp() {
        let mut lat = homogeneous(3, PotentialInit::Uniform(0.9));
        lat.relax_to_convergence(1e-14, 10_000).unwrap();
        for c in 0..3 {
            assert_relative_eq!(lat.potential_at(1, c), 0.5, epsilon = 1e-12);
        }
        let mut lat = homogeneous(8, PotentialInit::Uniform(0.5));
        lat.relax_to_convergence(1e-14, 100_000).unwrap();
        for r in 0..8 {
            assert_relative_eq!(lat.potential_at(r, 3), 1.0 - r as f64 / 7.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ramp_is_a_fixed_point() {
        let mut lat = homogeneous(12, PotentialInit::Ramp);
        for _ in 0..5 {
            assert!(lat.relax_sweep() < 1e-12);
        }
    }

    #[test]
    fn updated_node_balances_old_neighbours() {
        let mut lat = ResistorLattice::build(9, (0.0, 1.0), PotentialInit::default(), &mut RngStream::new(4, 0).rng())
            .unwrap();
        lat.relax_sweep();
        let before = lat.clone();
        lat.relax_sweep();
        // with the new value at (r, c) and all other nodes at their previous
        // values, the net current into (r, c) vanishes
        for r in 1..8 {
            for c in 0..9 {
                let mut probe = before.clone();
                probe.potential[r * 9 + c] = lat.potential_at(r, c);
                assert!(probe.node_residual(r, c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn maximum_principle() {
        let mut lat = ResistorLattice::build(15, (0.0, 1.0), PotentialInit::Uniform(0.5), &mut RngStream::new(6, 0).rng())
            .unwrap();
        for _ in 0..300 {
            lat.relax_sweep();
            assert!(lat.interior().iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert_eq!(lat.potential()[..15], [1.0; 15]);
            assert_eq!(lat.potential()[14 * 15..], [0.0; 15]);
        }
    }

    #[test]
    fn converged_potentials_match_dense_solve() {
        for seed in 0..4 {
            for side in [4, 7, 12] {
                let mut lat =
                    ResistorLattice::build(side, (0.0, 1.0), PotentialInit::default(), &mut RngStream::new(seed, 0).rng())
                        .unwrap();
                let exact = lat.dense_solution().unwrap();
                lat.relax_to_convergence(1e-14, 2_000_000).expect("converges");
                let err = exact
                    .iter()
                    .zip(lat.interior())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-8, "side {side} seed {seed}: err {err}");
                assert!(lat.max_residual() < 1e-9);
            }
        }
    }

    #[test]
    fn x_envelope_goes_to_zero() {
        let mut lat = ResistorLattice::build(10, (0.0, 1.0), PotentialInit::default(), &mut RngStream::new(3, 0).rng())
            .unwrap();
        let xs: Vec<f64> = (0..3000).map(|_| lat.relax_sweep()).collect();
        let early = xs[..100].iter().copied().fold(0.0, f64::max);
        let late = xs[2900..].iter().copied().fold(0.0, f64::max);
        assert!(late < 1e-6 * early, "early {early}, late {late}");
    }

    #[test]
    fn series_is_deterministic_and_zero_for_ramp() {
        let a = run_rrn_relaxation(8, (0.0, 1.0), PotentialInit::default(), 30, 3, 5).unwrap();
        let b = run_rrn_relaxation(8, (0.0, 1.0), PotentialInit::default(), 30, 3, 5).unwrap();
        assert_eq!(a, b);
        let z = run_rrn_relaxation(8, (1.0, 1.0 + 1e-12), PotentialInit::Ramp, 30, 2, 5).unwrap();
        assert!(z.x_mean.iter().all(|&x| x < 1e-12));
    }
}
