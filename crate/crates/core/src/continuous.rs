//! Spinless particle on a periodic 1-D grid.
//!
//! The phase-space amplitude is `Z(x,p) = Ψ(x) ξ(p) e^{i(x0 p − x p0)/ħ}`
//! for a chosen anchor `(x0, p0)`. Summing over `p` returns
//! `√(2πħ) Ψ(x0) e^{−i x p0/ħ} Ψ(x)` and summing over `x` returns
//! `√(2πħ) ξ(p0) e^{i x0 p/ħ} ξ(p)`: the usual wave functions up to a
//! constant and a basis phase.
//!
//! Grids are centered: `x_j = (j − N/2) dx`, `p_k = (k − N/2) dp` with
//! `dp = 2πħ/L`. The discrete transform uses weights `dx/√(2πħ)` (forward)
//! and `dp/√(2πħ)` (inverse), which makes Parseval exact on the grid.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

/// Probability allowed outside the central half of the grid.
pub const CLIP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    n: usize,
    length: f64,
    hbar: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64, hbar: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count {n} must be a power of two and at least 16"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("extent {length} must be positive")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidGrid(format!("hbar {hbar} must be positive")));
        }
        Ok(Grid1D { n, length, hbar })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.length
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx()
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub representation: Representation,
}

impl GridWavefunction {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, representation: Representation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("wave function has non-finite samples".into()));
        }
        Ok(GridWavefunction {
            grid,
            values,
            representation,
        })
    }

    /// Sample spacing of the current representation.
    pub fn spacing(&self) -> f64 {
        match self.representation {
            Representation::Position => self.grid.dx(),
            Representation::Momentum => self.grid.dp(),
        }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        match self.representation {
            Representation::Position => self.grid.x(i),
            Representation::Momentum => self.grid.p(i),
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.coordinate(i)).collect()
    }

    /// `Σ |ψ|² · spacing`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spacing()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq().sqrt();
        if n == 0.0 {
            return Err(Error::NullEnsemble);
        }
        Ok(GridWavefunction {
            values: self.values.iter().map(|z| z / n).collect(),
            ..self.clone()
        })
    }

    pub fn mean(&self) -> f64 {
        let w = self.norm_sq();
        self.values
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm_sqr() * self.coordinate(i))
            .sum::<f64>()
            * self.spacing()
            / w
    }

    pub fn std_dev(&self) -> f64 {
        let w = self.norm_sq();
        let m = self.mean();
        let var = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm_sqr() * (self.coordinate(i) - m).powi(2))
            .sum::<f64>()
            * self.spacing()
            / w;
        var.sqrt()
    }

    /// Fraction of `|ψ|²` outside the central half of the grid.
    pub fn outside_central_half(&self) -> f64 {
        let n = self.grid.len();
        let total: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        let outside: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < n / 4 || *i >= 3 * n / 4)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        outside / total
    }

    pub fn check_unclipped(&self) -> Result<()> {
        let f = self.outside_central_half();
        if f > CLIP_TOLERANCE {
            return Err(Error::Clipped(f));
        }
        Ok(())
    }

    /// CSV `x,re,im` (or `p,re,im`) preceded by a `#` metadata line.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &RunMeta) -> Result<()> {
        writeln!(w, "{}", meta.header_line()).map_err(io_err)?;
        let col = match self.representation {
            Representation::Position => "x",
            Representation::Momentum => "p",
        };
        writeln!(w, "{col},re,im").map_err(io_err)?;
        for (i, z) in self.values.iter().enumerate() {
            writeln!(w, "{},{},{}", self.coordinate(i), z.re, z.im).map_err(io_err)?;
        }
        Ok(())
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("write failed: {e}"))
}

/// Units and anchor echoed at the top of CSV dumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMeta {
    pub n: usize,
    pub length: f64,
    pub hbar: f64,
    pub mass: f64,
    pub x0: f64,
    pub p0: f64,
}

impl RunMeta {
    pub fn header_line(&self) -> String {
        format!(
            "# N={},L={},hbar={},m={},x0={},p0={}",
            self.n, self.length, self.hbar, self.mass, self.x0, self.p0
        )
    }
}

/// Normalized Gaussian `(πσ²)^{−1/4} e^{−(x−xc)²/(2σ²)} e^{i pc x/ħ}`.
pub fn gaussian_wavepacket(grid: Grid1D, xc: f64, pc: f64, sigma: f64) -> Result<GridWavefunction> {
    let (min, max) = (4.0 * grid.dx(), grid.length() / 8.0);
    if !(sigma >= min && sigma <= max) {
        return Err(Error::WidthOutOfRange { sigma, min, max });
    }
    let pref = (PI * sigma * sigma).powf(-0.25);
    let values = grid
        .xs()
        .into_iter()
        .map(|x| {
            let env = pref * (-(x - xc).powi(2) / (2.0 * sigma * sigma)).exp();
            Complex64::from_polar(env, pc * x / grid.hbar())
        })
        .collect();
    let psi = GridWavefunction::new(grid, values, Representation::Position)?;
    psi.check_unclipped()?;
    psi.normalized()
}

struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn transforms(n: usize) -> Transforms {
    let mut planner = FftPlanner::new();
    Transforms {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }
}

fn alternate(values: &mut [Complex64]) {
    for v in values.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

/// `ξ(p) = (2πħ)^{−1/2} Σ_j ψ(x_j) e^{−i p x_j/ħ} dx`.
pub fn momentum_representation(psi: &GridWavefunction) -> Result<GridWavefunction> {
    if psi.representation != Representation::Position {
        return Err(Error::WrongRepresentation("position"));
    }
    let g = psi.grid;
    // With centered grids p_k x_j/ħ = 2π(k−N/2)(j−N/2)/N, which factors into
    // (−1)^j and (−1)^k around a plain DFT (N/2 is even for N ≥ 16).
    let mut buf = psi.values.clone();
    alternate(&mut buf);
    transforms(g.len()).forward.process(&mut buf);
    alternate(&mut buf);
    let w = g.dx() / (2.0 * PI * g.hbar()).sqrt();
    buf.iter_mut().for_each(|z| *z *= w);
    GridWavefunction::new(g, buf, Representation::Momentum)
}

/// Inverse of [`momentum_representation`].
pub fn position_representation(xi: &GridWavefunction) -> Result<GridWavefunction> {
    if xi.representation != Representation::Momentum {
        return Err(Error::WrongRepresentation("momentum"));
    }
    let g = xi.grid;
    let mut buf = xi.values.clone();
    alternate(&mut buf);
    transforms(g.len()).inverse.process(&mut buf);
    alternate(&mut buf);
    let w = g.dp() / (2.0 * PI * g.hbar()).sqrt();
    buf.iter_mut().for_each(|z| *z *= w);
    GridWavefunction::new(g, buf, Representation::Position)
}

/// `Z(x,p)` sampled on the `N × N` lattice, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceAmplitude {
    pub grid: Grid1D,
    pub psi: GridWavefunction,
    pub xi: GridWavefunction,
    pub x0: f64,
    pub p0: f64,
    values: Vec<Complex64>,
}

impl PhaseSpaceAmplitude {
    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid.len() + k]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// CSV `x,p,re,im` preceded by a `#` metadata line.
    pub fn write_csv<W: Write>(&self, mut w: W, mass: f64) -> Result<()> {
        let meta = RunMeta {
            n: self.grid.len(),
            length: self.grid.length(),
            hbar: self.grid.hbar(),
            mass,
            x0: self.x0,
            p0: self.p0,
        };
        writeln!(w, "{}", meta.header_line()).map_err(io_err)?;
        writeln!(w, "x,p,re,im").map_err(io_err)?;
        let n = self.grid.len();
        for j in 0..n {
            let x = self.grid.x(j);
            for k in 0..n {
                let z = self.values[j * n + k];
                writeln!(w, "{},{},{},{}", x, self.grid.p(k), z.re, z.im).map_err(io_err)?;
            }
        }
        Ok(())
    }
}

pub fn phase_space_amplitude(
    psi: &GridWavefunction,
    xi: &GridWavefunction,
    x0: f64,
    p0: f64,
) -> Result<PhaseSpaceAmplitude> {
    if psi.representation != Representation::Position {
        return Err(Error::WrongRepresentation("position"));
    }
    if xi.representation != Representation::Momentum {
        return Err(Error::WrongRepresentation("momentum"));
    }
    if psi.grid != xi.grid {
        return Err(Error::InvalidGrid("position and momentum grids differ".into()));
    }
    if !(x0.is_finite() && p0.is_finite()) {
        return Err(Error::InvalidParameter("anchor must be finite".into()));
    }
    let g = psi.grid;
    let n = g.len();
    let hbar = g.hbar();
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let x = g.x(j);
            let pj = psi.values[j];
            (0..n).map(move |k| {
                let p = g.p(k);
                pj * xi.values[k] * Complex64::from_polar(1.0, (x0 * p - x * p0) / hbar)
            })
        })
        .collect();
    Ok(PhaseSpaceAmplitude {
        grid: g,
        psi: psi.clone(),
        xi: xi.clone(),
        x0,
        p0,
        values,
    })
}

/// Builds `ξ` from `ψ` and then `Z`.
pub fn phase_space_from_position(psi: &GridWavefunction, x0: f64, p0: f64) -> Result<PhaseSpaceAmplitude> {
    let xi = momentum_representation(psi)?;
    phase_space_amplitude(psi, &xi, x0, p0)
}

/// Relative threshold below which the anchor counts as a node.
const NODE_THRESHOLD: f64 = 1e-10;

fn anchor_check(constant: Complex64, reference: &GridWavefunction) -> Result<()> {
    let peak = reference.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = (2.0 * PI * reference.grid.hbar()).sqrt() * peak;
    if constant.norm() <= NODE_THRESHOLD * scale {
        return Err(Error::AnchorAtNode);
    }
    Ok(())
}

/// The anchor constant `Σ_k ξ(p_k) e^{i x0 p_k/ħ} dp = √(2πħ) Ψ(x0)`
/// (trigonometric interpolation when `x0` is off-grid).
pub fn anchor_constant_x(z: &PhaseSpaceAmplitude) -> Complex64 {
    let g = z.grid;
    (0..g.len())
        .map(|k| z.xi.values[k] * Complex64::from_polar(1.0, z.x0 * g.p(k) / g.hbar()))
        .sum::<Complex64>()
        * g.dp()
}

/// `Σ_j ψ(x_j) e^{−i x_j p0/ħ} dx = √(2πħ) ξ(p0)`.
pub fn anchor_constant_p(z: &PhaseSpaceAmplitude) -> Complex64 {
    let g = z.grid;
    (0..g.len())
        .map(|j| z.psi.values[j] * Complex64::from_polar(1.0, -g.x(j) * z.p0 / g.hbar()))
        .sum::<Complex64>()
        * g.dx()
}

/// `Z(x) = Σ_p Z(x,p) dp`.
pub fn marginal_x(z: &PhaseSpaceAmplitude) -> Result<GridWavefunction> {
    anchor_check(anchor_constant_x(z), &z.xi)?;
    let n = z.grid.len();
    let dp = z.grid.dp();
    let values = (0..n)
        .into_par_iter()
        .map(|j| z.values[j * n..(j + 1) * n].iter().sum::<Complex64>() * dp)
        .collect();
    GridWavefunction::new(z.grid, values, Representation::Position)
}

/// `Z(p) = Σ_x Z(x,p) dx`.
pub fn marginal_p(z: &PhaseSpaceAmplitude) -> Result<GridWavefunction> {
    anchor_check(anchor_constant_p(z), &z.psi)?;
    let n = z.grid.len();
    let dx = z.grid.dx();
    let values = (0..n)
        .into_par_iter()
        .map(|k| (0..n).map(|j| z.values[j * n + k]).sum::<Complex64>() * dx)
        .collect();
    GridWavefunction::new(z.grid, values, Representation::Momentum)
}

/// Free-particle propagator over one time step, applied in momentum space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Propagator {
    pub mass: f64,
    pub dt: f64,
    pub hbar: f64,
}

impl Propagator {
    pub fn new(mass: f64, dt: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass {mass} must be positive")));
        }
        if !dt.is_finite() {
            return Err(Error::InvalidParameter("time step must be finite".into()));
        }
        Ok(Propagator { mass, dt, hbar })
    }

    /// `ξ(p) ↦ e^{−i p² Δt/(2mħ)} ξ(p)`.
    pub fn phase(&self, p: f64) -> Complex64 {
        Complex64::from_polar(1.0, -p * p * self.dt / (2.0 * self.mass * self.hbar))
    }

    pub fn apply(&self, psi: &GridWavefunction) -> Result<GridWavefunction> {
        if self.dt == 0.0 {
            return Ok(psi.clone());
        }
        let mut xi = momentum_representation(psi)?;
        for (k, v) in xi.values.iter_mut().enumerate() {
            *v *= self.phase(xi.grid.p(k));
        }
        let out = position_representation(&xi)?;
        out.check_unclipped()?;
        Ok(out)
    }
}

pub fn evolve_free(psi: &GridWavefunction, mass: f64, dt: f64) -> Result<GridWavefunction> {
    Propagator::new(mass, dt, psi.grid.hbar())?.apply(psi)
}

/// Evolves `Z` by evolving `Ψ`, recomputing `ξ`, and moving the anchor
/// along the free classical path `x0 ↦ x0 + p0 Δt/m`.
pub fn evolve_phase_space(z: &PhaseSpaceAmplitude, mass: f64, dt: f64) -> Result<PhaseSpaceAmplitude> {
    if dt == 0.0 {
        Propagator::new(mass, dt, z.grid.hbar())?;
        return Ok(z.clone());
    }
    let psi = evolve_free(&z.psi, mass, dt)?;
    let xi = momentum_representation(&psi)?;
    phase_space_amplitude(&psi, &xi, z.x0 + z.p0 * dt / mass, z.p0)
}

/// How closely a marginal matches `C · e^{iφ(q)} · reference(q)` with a
/// constant `C` and a linear basis phase `φ(q) = slope · q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalStructure {
    /// `max |r − r̄| / r̄` for `r = |Z/ref|` over significant samples.
    pub modulus_spread: f64,
    /// Max deviation of `arg(Z/ref) − slope·q` from its value at the
    /// reference's peak, wrapped to `(−π, π]`.
    pub phase_residual: f64,
    pub constant: Complex64,
    pub samples: usize,
}

/// Compares a marginal with its reference wave function over the samples
/// where `|reference| > floor`.
pub fn marginal_structure(
    marginal: &GridWavefunction,
    reference: &GridWavefunction,
    slope: f64,
    floor: f64,
) -> Result<MarginalStructure> {
    if marginal.grid != reference.grid || marginal.representation != reference.representation {
        return Err(Error::InvalidGrid(
            "marginal and reference live on different grids".into(),
        ));
    }
    let idx: Vec<usize> = (0..reference.values.len())
        .filter(|&i| reference.values[i].norm() > floor)
        .collect();
    if idx.is_empty() {
        return Err(Error::NullEnsemble);
    }
    let ratio: Vec<Complex64> = idx.iter().map(|&i| marginal.values[i] / reference.values[i]).collect();
    let mean_mod = ratio.iter().map(|r| r.norm()).sum::<f64>() / ratio.len() as f64;
    let modulus_spread = ratio
        .iter()
        .map(|r| (r.norm() - mean_mod).abs() / mean_mod)
        .fold(0.0, f64::max);
    let peak = idx
        .iter()
        .copied()
        .max_by(|&a, &b| reference.values[a].norm().total_cmp(&reference.values[b].norm()))
        .expect("non-empty");
    let corrected = |i: usize| {
        marginal.values[i] / reference.values[i] * Complex64::from_polar(1.0, -slope * marginal.coordinate(i))
    };
    let base = corrected(peak);
    let phase_residual = idx
        .iter()
        .map(|&i| (corrected(i) / base).arg().abs())
        .fold(0.0, f64::max);
    Ok(MarginalStructure {
        modulus_spread,
        phase_residual,
        constant: base,
        samples: idx.len(),
    })
}
