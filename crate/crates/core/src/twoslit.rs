//! Two-slit experiment with a slit variable `S ∈ {L, R}`.
//!
//! Slit-resolved amplitudes use the Fraunhofer closed form
//! `Z_{L/R}(x) = A · sinc(π w x/(λD)) · e^{±iπ d x/(λD)}`. The screen
//! amplitude is the marginal `Z_L + Z_R`; a phase shift `θ` on the right
//! component displaces the fringes, and averaging over a uniform `θ`
//! removes the cross term, leaving `|Z_L|² + |Z_R|²`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuous::Grid1D;
use crate::error::{Error, Result};

/// Largest Fresnel number `d²/(λD)` accepted for the far-field model.
pub const FRESNEL_LIMIT: f64 = 0.1;

/// Default number of quadrature nodes for the phase average.
pub const DEFAULT_PHASE_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlitGeometry {
    pub separation: f64,
    pub width: f64,
    pub wavelength: f64,
    pub screen_distance: f64,
    #[serde(skip)]
    pub screen: Grid1D,
}

impl SlitGeometry {
    /// `screen_extent` defaults to `λD/w`, the inner half of the central
    /// diffraction lobe, where both envelopes stay strictly positive.
    pub fn new(
        separation: f64,
        width: f64,
        wavelength: f64,
        screen_distance: f64,
        points: usize,
        screen_extent: Option<f64>,
    ) -> Result<Self> {
        for (name, v) in [
            ("separation", separation),
            ("width", width),
            ("wavelength", wavelength),
            ("screen distance", screen_distance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let fresnel = separation * separation / (wavelength * screen_distance);
        if fresnel > FRESNEL_LIMIT {
            return Err(Error::NearField {
                fresnel,
                limit: FRESNEL_LIMIT,
            });
        }
        let extent = screen_extent.unwrap_or(wavelength * screen_distance / width);
        let screen = Grid1D::new(points, extent, 1.0)?;
        Ok(SlitGeometry {
            separation,
            width,
            wavelength,
            screen_distance,
            screen,
        })
    }

    pub fn fresnel_number(&self) -> f64 {
        self.separation * self.separation / (self.wavelength * self.screen_distance)
    }

    /// `λD/d`.
    pub fn fringe_spacing(&self) -> f64 {
        self.wavelength * self.screen_distance / self.separation
    }

    /// Screen displacement produced by a phase shift `θ`: `λDθ/(2πd)`.
    pub fn displacement(&self, theta: f64) -> f64 {
        self.fringe_spacing() * theta / (2.0 * PI)
    }

    pub fn header_line(&self) -> String {
        format!(
            "# d={},w={},lambda={},D={},N={},extent={}",
            self.separation,
            self.width,
            self.wavelength,
            self.screen_distance,
            self.screen.len(),
            self.screen.length()
        )
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Slit-resolved screen amplitudes, normalized so that
/// `Σ (|Z_L|² + |Z_R|²) dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitAmplitudes {
    pub geometry: SlitGeometry,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
    amplitude: f64,
}

impl SlitAmplitudes {
    /// Closed-form `Z_L(x)` at any screen position, same normalization.
    pub fn left_at(&self, x: f64) -> Complex64 {
        self.component(x, 1.0)
    }

    pub fn right_at(&self, x: f64) -> Complex64 {
        self.component(x, -1.0)
    }

    fn component(&self, x: f64, side: f64) -> Complex64 {
        let g = &self.geometry;
        let scale = PI * x / (g.wavelength * g.screen_distance);
        Complex64::from_polar(self.amplitude * sinc(g.width * scale), side * g.separation * scale)
    }

    pub fn xs(&self) -> Vec<f64> {
        self.geometry.screen.xs()
    }

    pub fn dx(&self) -> f64 {
        self.geometry.screen.dx()
    }

    /// Marginal over the slit variable: `Z_L + Z_R`.
    pub fn screen_amplitude(&self) -> Vec<Complex64> {
        self.left.iter().zip(&self.right).map(|(l, r)| l + r).collect()
    }
}

pub fn slit_amplitudes(geom: &SlitGeometry) -> SlitAmplitudes {
    let mut sa = SlitAmplitudes {
        geometry: *geom,
        left: Vec::new(),
        right: Vec::new(),
        amplitude: 1.0,
    };
    let xs = geom.screen.xs();
    let weight: f64 = xs
        .iter()
        .map(|&x| sa.left_at(x).norm_sqr() + sa.right_at(x).norm_sqr())
        .sum::<f64>()
        * geom.screen.dx();
    sa.amplitude = 1.0 / weight.sqrt();
    sa.left = xs.iter().map(|&x| sa.left_at(x)).collect();
    sa.right = xs.iter().map(|&x| sa.right_at(x)).collect();
    sa
}

/// Unnormalized intensity `|Z_L(x) + e^{iθ} Z_R(x)|²`.
pub fn raw_pattern(sa: &SlitAmplitudes, theta: f64) -> Vec<f64> {
    let phase = Complex64::from_polar(1.0, theta);
    sa.left
        .iter()
        .zip(&sa.right)
        .map(|(l, r)| (l + phase * r).norm_sqr())
        .collect()
}

/// `P(x, θ)` normalized so that `Σ P dx = 1`.
pub fn screen_pattern(sa: &SlitAmplitudes, theta: f64) -> Vec<f64> {
    let raw = raw_pattern(sa, theta);
    let total: f64 = raw.iter().sum::<f64>() * sa.dx();
    if total == 0.0 {
        return raw;
    }
    raw.into_iter().map(|p| p / total).collect()
}

/// `|Z_L|² + |Z_R|²`, the pattern without interference.
pub fn mixture(sa: &SlitAmplitudes) -> Vec<f64> {
    sa.left
        .iter()
        .zip(&sa.right)
        .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PhaseShiftModel {
    /// Known shift; no averaging.
    Fixed { theta: f64 },
    /// Trapezoid rule on `samples` equally spaced phases.
    Quadrature { samples: usize },
    /// `samples` equally spaced phases with a seeded uniform random offset.
    /// Each phase is marginally uniform on `[0, 2π)`.
    Random { samples: usize, seed: u64 },
}

impl PhaseShiftModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseShiftModel::Fixed { theta } if !(0.0..2.0 * PI).contains(&theta) => {
                Err(Error::InvalidParameter(format!("phase {theta} must lie in [0, 2π)")))
            }
            PhaseShiftModel::Quadrature { samples } | PhaseShiftModel::Random { samples, .. } if samples == 0 => {
                Err(Error::InvalidParameter("phase sample count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn phases(&self) -> Vec<f64> {
        match *self {
            PhaseShiftModel::Fixed { theta } => vec![theta],
            PhaseShiftModel::Quadrature { samples } => {
                (0..samples).map(|k| 2.0 * PI * k as f64 / samples as f64).collect()
            }
            PhaseShiftModel::Random { samples, seed } => {
                let offset: f64 = ChaCha8Rng::seed_from_u64(seed).gen();
                (0..samples)
                    .map(|k| 2.0 * PI * (k as f64 + offset) / samples as f64)
                    .collect()
            }
        }
    }
}

/// `(1/2π) ∫ dθ |Z_L + e^{iθ} Z_R|²` evaluated with the model's phases.
/// Any rule with two or more equally spaced nodes integrates the
/// `e^{±iθ}` harmonics of the integrand exactly.
pub fn decohere_average(sa: &SlitAmplitudes, model: PhaseShiftModel) -> Result<Vec<f64>> {
    model.validate()?;
    let phases = model.phases();
    let mut acc = vec![0.0; sa.left.len()];
    for theta in &phases {
        for (a, p) in acc.iter_mut().zip(raw_pattern(sa, *theta)) {
            *a += p;
        }
    }
    let k = phases.len() as f64;
    Ok(acc.into_iter().map(|a| a / k).collect())
}

/// Largest local residual visibility `|avg − mix| / mix` over points where
/// the mixture is positive.
pub fn fringe_contrast(averaged: &[f64], mixture: &[f64]) -> f64 {
    averaged
        .iter()
        .zip(mixture)
        .filter(|(_, &m)| m > 0.0)
        .map(|(a, m)| (a - m).abs() / m)
        .fold(0.0, f64::max)
}

/// `(P(L|x,θ), P(R|x,θ))` at grid index `j`. The shift leaves `|Z_R|`
/// unchanged, so `θ` only enters through validation.
pub fn conditional_slit_probabilities(sa: &SlitAmplitudes, j: usize, theta: f64) -> Result<(f64, f64)> {
    slit_pair(sa, j, theta)?;
    let (wl, wr) = (sa.left[j].norm_sqr(), sa.right[j].norm_sqr());
    let denom = wl + wr;
    if denom <= 0.0 {
        return Err(Error::NullEnsemble);
    }
    Ok((wl / denom, wr / denom))
}

fn slit_pair(sa: &SlitAmplitudes, j: usize, theta: f64) -> Result<(Complex64, Complex64)> {
    let n = sa.left.len();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    Ok((sa.left[j], Complex64::from_polar(1.0, theta) * sa.right[j]))
}

/// `(P(x,L,θ), P(x,R,θ)) = P(x,θ) · (P(L|x,θ), P(R|x,θ))` with the
/// unnormalized `P(x,θ)`.
pub fn slit_joint_probabilities(sa: &SlitAmplitudes, j: usize, theta: f64) -> Result<(f64, f64)> {
    let (l, r) = slit_pair(sa, j, theta)?;
    let total = (l + r).norm_sqr();
    let (pl, pr) = conditional_slit_probabilities(sa, j, theta)?;
    Ok((total * pl, total * pr))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub hidden_axis_size: usize,
    /// `min_x [Σ_λ P(x,L,λ) + Σ_λ' P(x,R,λ')]`
    pub mixture_min: f64,
    /// `min_x max(Σ_λ P(x,L,λ), Σ_λ' P(x,R,λ'))`
    pub max_bound_min: f64,
    /// `min_x |Z_L(x)|²`
    pub left_min: f64,
    /// The sum ≥ max > 0 chain held at every grid point.
    pub inequality_holds: bool,
    /// `min_x |Z_L − Z_R|²` on the grid (zero at the symmetric point).
    pub interference_min: f64,
    pub interference_min_x: f64,
    /// Largest `|Z_L + Z_R|²` at the analytic fringe minima inside the screen.
    pub fringe_minima_max: f64,
    pub fringe_minima_count: usize,
    /// A positive mixture cannot produce the interference zeros.
    pub mixture_reproduces_pattern: bool,
}

/// Compares the zeros of the interference pattern with what any strictly
/// positive slit-resolved distribution over a hidden axis can produce.
/// The hidden allocation is random (seeded) and strictly positive.
pub fn positivity_check(sa: &SlitAmplitudes, hidden_axis_size: usize, seed: u64) -> Result<PositivityReport> {
    if hidden_axis_size == 0 {
        return Err(Error::InvalidParameter("hidden axis needs at least one value".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = |total: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let w: Vec<f64> = (0..hidden_axis_size).map(|_| 1.0 + rng.gen::<f64>()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| total * v / s).collect()
    };
    let mut mixture_min = f64::INFINITY;
    let mut max_bound_min = f64::INFINITY;
    let mut left_min = f64::INFINITY;
    let mut inequality_holds = true;
    for (l, r) in sa.left.iter().zip(&sa.right) {
        let pl = weights(l.norm_sqr(), &mut rng);
        let pr = weights(r.norm_sqr(), &mut rng);
        let sl: f64 = pl.iter().sum();
        let sr: f64 = pr.iter().sum();
        let bound = sl.max(sr);
        inequality_holds &= sl + sr >= bound && bound > 0.0 && pl.iter().chain(&pr).all(|&p| p > 0.0);
        mixture_min = mixture_min.min(sl + sr);
        max_bound_min = max_bound_min.min(bound);
        left_min = left_min.min(l.norm_sqr());
    }

    let destructive = raw_pattern(sa, PI);
    let (imin, interference_min) = destructive
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");

    let g = &sa.geometry;
    let half = g.screen.length() / 2.0;
    let spacing = g.fringe_spacing();
    let mut fringe_minima_max: f64 = 0.0;
    let mut fringe_minima_count = 0;
    let mut m = 0i64;
    loop {
        let x = (m as f64 + 0.5) * spacing;
        if x >= half {
            break;
        }
        for x in [x, -x] {
            fringe_minima_max = fringe_minima_max.max((sa.left_at(x) + sa.right_at(x)).norm_sqr());
            fringe_minima_count += 1;
        }
        m += 1;
    }

    Ok(PositivityReport {
        hidden_axis_size,
        mixture_min,
        max_bound_min,
        left_min,
        inequality_holds,
        interference_min,
        interference_min_x: g.screen.x(imin),
        fringe_minima_max,
        fringe_minima_count,
        mixture_reproduces_pattern: mixture_min <= interference_min,
    })
}

/// One screen sample; CSV columns follow field order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternRow {
    pub x: f64,
    #[serde(rename = "P_interference")]
    pub interference: f64,
    #[serde(rename = "P_mixture")]
    pub mixture: f64,
    #[serde(rename = "P_L_component")]
    pub left: f64,
    #[serde(rename = "P_R_component")]
    pub right: f64,
}

/// Rows pairing a pattern (fixed-phase or averaged) with the mixture and
/// the slit components.
pub fn pattern_rows(sa: &SlitAmplitudes, pattern: &[f64]) -> Vec<PatternRow> {
    sa.xs()
        .into_iter()
        .enumerate()
        .map(|(j, x)| PatternRow {
            x,
            interference: pattern[j],
            mixture: sa.left[j].norm_sqr() + sa.right[j].norm_sqr(),
            left: sa.left[j].norm_sqr(),
            right: sa.right[j].norm_sqr(),
        })
        .collect()
}

pub fn write_pattern_csv<W: Write>(mut w: W, geom: &SlitGeometry, rows: &[PatternRow]) -> Result<()> {
    writeln!(w, "{}", geom.header_line()).map_err(|e| Error::Parse(e.to_string()))?;
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> SlitGeometry {
        SlitGeometry::new(1e-4, 2e-5, 5e-7, 1.0, 4096, None).unwrap()
    }

    #[test]
    fn near_field_rejected() {
        let e = SlitGeometry::new(1e-3, 2e-5, 5e-7, 1.0, 1024, None).unwrap_err();
        assert!(matches!(e, Error::NearField { .. }));
        assert!(SlitGeometry::new(-1e-4, 2e-5, 5e-7, 1.0, 1024, None).is_err());
        assert!(SlitGeometry::new(1e-4, 2e-5, 5e-7, 1.0, 1000, None).is_err());
    }

    #[test]
    fn symmetric_moduli_and_normalization() {
        let sa = slit_amplitudes(&geometry());
        for (l, r) in sa.left.iter().zip(&sa.right) {
            assert!((l.norm() - r.norm()).abs() < 1e-15 * l.norm().max(1.0));
        }
        let total: f64 = mixture(&sa).iter().sum::<f64>() * sa.dx();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constructive_and_destructive_at_symmetric_point() {
        let sa = slit_amplitudes(&geometry());
        let j = sa.left.len() / 2;
        let z = sa.left[j];
        assert_eq!(sa.left[j], sa.right[j]);
        assert!((raw_pattern(&sa, 0.0)[j] - 4.0 * z.norm_sqr()).abs() < 1e-12 * z.norm_sqr());
        assert!(raw_pattern(&sa, PI)[j] < 1e-12);
    }

    #[test]
    fn pattern_normalized_for_all_phases() {
        let sa = slit_amplitudes(&geometry());
        for k in 0..8 {
            let p = screen_pattern(&sa, k as f64 * PI / 4.0);
            assert!((p.iter().sum::<f64>() * sa.dx() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn narrow_slit_envelope_is_flat() {
        let g = SlitGeometry::new(1e-4, 1e-12, 5e-7, 1.0, 1024, Some(0.02)).unwrap();
        let sa = slit_amplitudes(&g);
        let (lo, hi) = sa.left.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| {
            (lo.min(z.norm()), hi.max(z.norm()))
        });
        assert!((hi - lo) / hi < 1e-9);
    }

    #[test]
    fn phase_models() {
        assert!(PhaseShiftModel::Quadrature { samples: 0 }.validate().is_err());
        assert!(PhaseShiftModel::Fixed { theta: 7.0 }.validate().is_err());
        assert!(PhaseShiftModel::Fixed { theta: 1.0 }.validate().is_ok());
        let a = PhaseShiftModel::Random { samples: 8, seed: 1 }.phases();
        let b = PhaseShiftModel::Random { samples: 8, seed: 1 }.phases();
        assert_eq!(a, b);
        assert!(a.iter().all(|t| (0.0..2.0 * PI).contains(t)));
        assert_ne!(a, PhaseShiftModel::Random { samples: 8, seed: 2 }.phases());
    }

    #[test]
    fn single_point_average() {
        // Z_L = Z_R = 1 at a point: (1/2π)∫|1 + e^{iθ}|² dθ = 2.
        let avg: f64 = PhaseShiftModel::Quadrature { samples: 4 }
            .phases()
            .iter()
            .map(|t| (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, *t)).norm_sqr())
            .sum::<f64>()
            / 4.0;
        assert!((avg - 2.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_probabilities() {
        let sa = slit_amplitudes(&geometry());
        let (l, r) = conditional_slit_probabilities(&sa, 100, 0.7).unwrap();
        assert!((l - 0.5).abs() < 1e-15 && (r - 0.5).abs() < 1e-15);
        assert!(conditional_slit_probabilities(&sa, 1 << 20, 0.0).is_err());
        let mut lopsided = sa.clone();
        lopsided.right[5] = Complex64::new(0.0, 0.0);
        assert_eq!(conditional_slit_probabilities(&lopsided, 5, 1.0).unwrap(), (1.0, 0.0));
        lopsided.left[5] = Complex64::new(0.0, 0.0);
        assert_eq!(
            conditional_slit_probabilities(&lopsided, 5, 1.0).unwrap_err(),
            Error::NullEnsemble
        );
    }

    #[test]
    fn hidden_axis_of_one_is_plain_sum() {
        let sa = slit_amplitudes(&geometry());
        let rep = positivity_check(&sa, 1, 0).unwrap();
        let mix = mixture(&sa);
        let min = mix.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((rep.mixture_min - min).abs() <= 1e-12 * min);
        assert!(rep.inequality_holds);
        assert!(positivity_check(&sa, 0, 0).is_err());
    }

    #[test]
    fn csv_header_and_columns() {
        let g = SlitGeometry::new(1e-4, 2e-5, 5e-7, 1.0, 16, None).unwrap();
        let sa = slit_amplitudes(&g);
        let rows = pattern_rows(&sa, &screen_pattern(&sa, 0.0));
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &g, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# d=0.0001,w=0.00002,"));
        assert_eq!(lines[1], "x,P_interference,P_mixture,P_L_component,P_R_component");
        assert_eq!(lines.len(), 18);
    }
}
