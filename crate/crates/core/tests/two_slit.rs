use std::f64::consts::PI;

use amplispace::continuous::momentum_representation;
use amplispace::twoslit::{
    conditional_slit_probabilities, decohere_average, fringe_contrast, mixture, positivity_check, raw_pattern,
    screen_pattern, slit_amplitudes, slit_joint_probabilities,
};
use amplispace::{Complex64, Grid1D, GridWavefunction, PhaseShiftModel, Representation, SlitGeometry};

fn standard() -> SlitGeometry {
    SlitGeometry::new(1e-4, 2e-5, 5e-7, 1.0, 4096, None).unwrap()
}

fn local_extrema(p: &[f64], maxima: bool) -> Vec<usize> {
    (1..p.len() - 1)
        .filter(|&i| {
            if maxima {
                p[i] > p[i - 1] && p[i] >= p[i + 1]
            } else {
                p[i] < p[i - 1] && p[i] <= p[i + 1]
            }
        })
        .collect()
}

#[test]
fn marginal_over_slits_is_the_sum() {
    let sa = slit_amplitudes(&standard());
    let z = sa.screen_amplitude();
    let p = raw_pattern(&sa, 0.0);
    for j in 0..z.len() {
        assert_eq!(z[j], sa.left[j] + sa.right[j]);
        assert_eq!(z[j].norm_sqr(), p[j]);
    }
}

#[test]
fn fringe_zeros_are_spaced_by_lambda_d_over_d() {
    let g = standard();
    let sa = slit_amplitudes(&g);
    let xs = sa.xs();
    let minima = local_extrema(&screen_pattern(&sa, 0.0), false);
    assert!(minima.len() >= 4);
    for w in minima.windows(2) {
        assert!((xs[w[1]] - xs[w[0]] - g.fringe_spacing()).abs() <= 1.5 * sa.dx());
    }
    for &m in &minima {
        let order = (xs[m] / g.fringe_spacing() - 0.5).round();
        assert!((xs[m] - (order + 0.5) * g.fringe_spacing()).abs() <= sa.dx());
    }
}

#[test]
fn fringe_maxima_are_spaced_by_lambda_d_over_d() {
    // Narrow slits keep the envelope from pulling the maxima off the grid cell.
    let g = SlitGeometry::new(1e-4, 2e-6, 5e-7, 1.0, 4096, Some(0.025)).unwrap();
    let sa = slit_amplitudes(&g);
    let xs = sa.xs();
    let maxima = local_extrema(&screen_pattern(&sa, 0.0), true);
    assert!(maxima.len() >= 4);
    for w in maxima.windows(2) {
        assert!((xs[w[1]] - xs[w[0]] - g.fringe_spacing()).abs() <= sa.dx());
    }
    assert!(maxima.iter().any(|&m| xs[m] == 0.0));
}

#[test]
fn phase_shift_displaces_the_pattern() {
    let g = SlitGeometry::new(1e-4, 2e-6, 5e-7, 1.0, 4096, Some(0.025)).unwrap();
    let sa = slit_amplitudes(&g);
    let xs = sa.xs();
    for theta in [PI / 4.0, PI / 2.0, PI, 1.5 * PI] {
        let shift = g.displacement(theta);
        let p = screen_pattern(&sa, theta);
        let near = |target: f64, maxima: bool| {
            local_extrema(&p, maxima)
                .into_iter()
                .min_by(|&a, &b| (xs[a] - target).abs().total_cmp(&(xs[b] - target).abs()))
                .unwrap()
        };
        assert!((xs[near(shift, true)] - shift).abs() <= sa.dx(), "theta={theta}");
        let zero = shift + g.fringe_spacing() / 2.0;
        assert!((xs[near(zero, false)] - zero).abs() <= sa.dx(), "theta={theta}");
    }

    // Zeros move exactly with the shift even under the full-width envelope.
    let g = standard();
    let sa = slit_amplitudes(&g);
    let theta = PI / 3.0;
    let x = g.displacement(theta) + g.fringe_spacing() / 2.0;
    let z = sa.left_at(x) + Complex64::from_polar(1.0, theta) * sa.right_at(x);
    assert!(z.norm_sqr() < 1e-24 * sa.left_at(0.0).norm_sqr().max(1.0));
}

#[test]
fn averaging_over_phase_removes_fringes() {
    let sa = slit_amplitudes(&standard());
    let mix = mixture(&sa);
    for model in [
        PhaseShiftModel::Quadrature { samples: 256 },
        PhaseShiftModel::Quadrature { samples: 4 },
        PhaseShiftModel::Quadrature { samples: 2 },
        PhaseShiftModel::Random { samples: 256, seed: 7 },
    ] {
        let avg = decohere_average(&sa, model).unwrap();
        for (a, m) in avg.iter().zip(&mix) {
            assert!((a - m).abs() < 1e-9, "{model:?}");
        }
        assert!(fringe_contrast(&avg, &mix) < 1e-9);
    }
    let single = decohere_average(&sa, PhaseShiftModel::Quadrature { samples: 1 }).unwrap();
    assert!(fringe_contrast(&single, &mix) > 0.5);
}

#[test]
fn averaged_slit_joint_probability_is_the_component() {
    let sa = slit_amplitudes(&standard());
    let phases = PhaseShiftModel::Quadrature { samples: 256 }.phases();
    for j in (0..sa.left.len()).step_by(97) {
        let mut left = 0.0;
        let mut right = 0.0;
        for &t in &phases {
            let (l, r) = slit_joint_probabilities(&sa, j, t).unwrap();
            left += l;
            right += r;
        }
        left /= phases.len() as f64;
        right /= phases.len() as f64;
        assert!((left - sa.left[j].norm_sqr()).abs() < 1e-9);
        assert!((right - sa.right[j].norm_sqr()).abs() < 1e-9);
    }
}

#[test]
fn conditional_probabilities_ignore_the_phase() {
    let sa = slit_amplitudes(&standard());
    for j in [0, 100, 2048, 4095] {
        let base = conditional_slit_probabilities(&sa, j, 0.0).unwrap();
        for t in [0.3, 1.0, PI, 5.0] {
            assert_eq!(conditional_slit_probabilities(&sa, j, t).unwrap(), base);
        }
    }
}

#[test]
fn positivity_report() {
    let sa = slit_amplitudes(&standard());
    for (size, seed) in [(1, 0), (3, 1), (16, 2), (64, 3)] {
        let rep = positivity_check(&sa, size, seed).unwrap();
        assert!(rep.inequality_holds);
        assert!(rep.mixture_min > 0.0);
        assert!(rep.mixture_min >= rep.left_min);
        assert!(rep.max_bound_min > 0.0);
        assert!(rep.interference_min < 1e-12);
        assert_eq!(rep.interference_min_x, 0.0);
        assert!(rep.fringe_minima_count >= 4);
        assert!(rep.fringe_minima_max < 1e-12);
        assert!(!rep.mixture_reproduces_pattern);
    }
}

#[test]
fn far_field_of_a_grid_aperture_matches_the_closed_form() {
    // Two top-hat slits on a position grid; the long-time limit of free
    // evolution is the momentum distribution, mapped to the screen by
    // x = p λD/(2πħ).
    let g = Grid1D::new(8192, 400.0, 1.0).unwrap();
    let dx = g.dx();
    let (half_width, center) = (20usize, 102usize);
    let mid = g.len() / 2;
    let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
    for c in [mid - center, mid + center] {
        for v in &mut values[c - half_width..=c + half_width] {
            *v = Complex64::new(1.0, 0.0);
        }
    }
    let aperture = GridWavefunction::new(g, values, Representation::Position).unwrap();
    let xi = momentum_representation(&aperture).unwrap();

    let (wavelength, distance) = (1.0, 2000.0);
    let geom = SlitGeometry::new(
        2.0 * center as f64 * dx,
        (2 * half_width + 1) as f64 * dx,
        wavelength,
        distance,
        1024,
        None,
    )
    .unwrap();
    let sa = slit_amplitudes(&geom);
    let screen = |p: f64| {
        let x = p * wavelength * distance / (2.0 * PI);
        (sa.left_at(x) + sa.right_at(x)).norm_sqr()
    };
    let (far0, screen0) = (xi.values[mid].norm_sqr(), screen(0.0));
    for k in mid - 150..=mid + 150 {
        let far = xi.values[k].norm_sqr() / far0;
        let closed = screen(g.p(k)) / screen0;
        assert!((far - closed).abs() < 5e-3, "p={}: {far} vs {closed}", g.p(k));
    }
}
