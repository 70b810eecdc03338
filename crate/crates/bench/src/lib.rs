//! Fixtures shared by the benchmarks.

pub use amplispace::*;

/// `n` planar directions spread over a half turn, so no two coincide or oppose.
pub fn fan(n: usize) -> DirectionSet {
    let dirs = (0..n)
        .map(|k| UnitVector3::planar_degrees(7.0 + 170.0 * k as f64 / n as f64))
        .collect();
    DirectionSet::new(dirs).expect("fan directions are distinct")
}

/// Ensemble over `fan(n)` with the first direction fixed up.
pub fn constrained_fan(n: usize) -> SpinEnsemble {
    SpinEnsemble::new(fan(n))
        .with_constraint(0, Sign::Plus)
        .expect("index 0 exists")
}

/// Width-2 packet on an `n`-point grid of extent 40.
pub fn packet(n: usize) -> GridWavefunction {
    let grid = Grid1D::new(n, 40.0, 1.0).expect("power of two");
    continuous::gaussian_wavepacket(grid, 0.5, 1.0, 2.0).expect("width fits the grid")
}
