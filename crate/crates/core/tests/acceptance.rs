//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use amplispace::continuous::{
    evolve_free, gaussian_wavepacket, marginal_p, marginal_structure, marginal_x, phase_space_from_position,
};
use amplispace::entangled::{
    bell_report, pair_probabilities, pair_probabilities_vectors, triple_global_factor, triple_interference,
    triple_marginal, triple_marginal_bruteforce,
};
use amplispace::spin::{ensemble_marginal_bruteforce, ensemble_marginal_closed, up_probability};
use amplispace::twoslit::{decohere_average, mixture, positivity_check, slit_amplitudes};
use amplispace::{
    DirectionSet, Grid1D, HiddenSampler, PhaseShiftModel, Quaternion, Sign, SlitGeometry, SpinEnsemble, UnitVector3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const IDENTITY_TOL: f64 = 1e-12;
const IDENTITY_PAIRS: usize = 1000;
const IDENTITY_BUDGET: Duration = Duration::from_secs(1);

const MARGINAL_SETS: usize = 100;
const MARGINAL_MAX_N: usize = 16;
const MARGINAL_BUDGET: Duration = Duration::from_secs(30);

const LAW_TOL: f64 = 1e-12;
const LAW_POINTS: usize = 199;

const SINGLET_TOL: f64 = 1e-12;
const SINGLET_PAIRS: usize = 1000;

const BELL_TOL: f64 = 1e-12;
const BELL_BUDGET: Duration = Duration::from_secs(1);

const TRIPLE_TOL: f64 = 1e-12;
/// Smallest normalized gap that counts as `Σ_{s3} P ≠ P`.
const TRIPLE_MIN_GAP: f64 = 1e-6;

const MARGINAL_STRUCTURE_TOL: f64 = 1e-8;
const MARGINAL_FLOOR: f64 = 1e-6;
const PHASE_SPACE_BUDGET: Duration = Duration::from_secs(5);

const WIDTH_TOL: f64 = 1e-6;
const UNITARITY_TOL: f64 = 1e-9;

const AVERAGE_TOL: f64 = 1e-9;
const MINIMUM_TOL: f64 = 1e-12;

const SAMPLER_POINTS: usize = 20;
const SAMPLER_DRAWS: usize = 100_000;
const SAMPLER_SIGMAS: f64 = 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> UnitVector3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    UnitVector3::normalized(r * phi.cos(), r * phi.sin(), z).unwrap()
}

fn random_directions(rng: &mut ChaCha8Rng, n: usize) -> DirectionSet {
    let mut dirs: Vec<UnitVector3> = Vec::with_capacity(n);
    while dirs.len() < n {
        let d = random_unit(rng);
        if dirs.iter().all(|e| e.dot(&d).abs() < 0.999) {
            dirs.push(d);
        }
    }
    DirectionSet::new(dirs).unwrap()
}

fn quaternion_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_product, mut worst_norm) = (0.0f64, 0.0f64);
    for _ in 0..IDENTITY_PAIRS {
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        let c = a.dot(&b);
        let x = a.cross(&b);
        let product = a.quaternion().conj() * b.quaternion();
        worst_product = worst_product.max(product.max_abs_diff(Quaternion::new(c, -x[0], -x[1], -x[2])));
        worst_norm = worst_norm
            .max(((a.quaternion() + b.quaternion()).norm_sq() - 2.0 * (1.0 + c)).abs())
            .max(((a.quaternion() - b.quaternion()).norm_sq() - 2.0 * (1.0 - c)).abs());
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst_product <= IDENTITY_TOL && worst_norm <= IDENTITY_TOL && elapsed < IDENTITY_BUDGET,
        format!("{IDENTITY_PAIRS} pairs, max |conj(N1)N2 - (c, -n1xn2)| = {worst_product:.2e}, max norm error = {worst_norm:.2e}, {elapsed:.2?}"),
    )
}

fn spin_marginals() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    let mut checked = 0;
    for n in 2..=MARGINAL_MAX_N {
        for _ in 0..MARGINAL_SETS {
            let dirs = random_directions(&mut rng, n);
            let constrained = rng.gen_range(0..n);
            let target = (constrained + rng.gen_range(1..n)) % n;
            let sign = if rng.gen::<bool>() { Sign::Plus } else { Sign::Minus };
            let ens = SpinEnsemble::new(dirs).with_constraint(constrained, sign).unwrap();
            let brute = ensemble_marginal_bruteforce(&ens, target).unwrap();
            let closed = ensemble_marginal_closed(&ens, target).unwrap();
            let bitwise = |p: Quaternion, q: Quaternion| {
                p.components()
                    .iter()
                    .zip(q.components())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
            };
            if !(bitwise(brute.0, closed.0) && bitwise(brute.1, closed.1)) {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        mismatches == 0 && elapsed < MARGINAL_BUDGET,
        format!("{checked} ensembles (n = 2..={MARGINAL_MAX_N}), {mismatches} bitwise mismatches, {elapsed:.2?}"),
    )
}

fn single_particle_law() -> Outcome {
    let ens = SpinEnsemble::polarized(UnitVector3::Z, Sign::Plus);
    let mut worst = 0.0f64;
    for k in 0..LAW_POINTS {
        let c = -0.99 + 0.01 * k as f64;
        let m = UnitVector3::normalized((1.0 - c * c).sqrt(), 0.0, c).unwrap();
        let up = up_probability(&ens, m).unwrap();
        let half_angle = (c.acos() / 2.0).cos().powi(2);
        worst = worst.max((up - (1.0 + c) / 2.0).abs()).max((up - half_angle).abs());
    }
    Outcome::new(
        worst <= LAW_TOL,
        format!("{LAW_POINTS} points in [-0.99, 0.99], max deviation from (1+c)/2 and cos^2(theta/2) = {worst:.2e}"),
    )
}

fn singlet_probabilities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut same_direction_pp = 0.0f64;
    for _ in 0..SINGLET_PAIRS {
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        let t = pair_probabilities_vectors(a, b).unwrap();
        let c = a.dot(&b);
        for (s1, s2) in [
            (Sign::Plus, Sign::Plus),
            (Sign::Plus, Sign::Minus),
            (Sign::Minus, Sign::Plus),
            (Sign::Minus, Sign::Minus),
        ] {
            worst = worst.max((t.get(s1, s2) - (1.0 - s1.value() * s2.value() * c) / 4.0).abs());
        }
        let same = pair_probabilities_vectors(a, a).unwrap();
        let indexed = pair_probabilities(&DirectionSet::new(vec![a]).unwrap(), 0, 0).unwrap();
        same_direction_pp = same_direction_pp
            .max(same.pp)
            .max(same.mm)
            .max(indexed.pp)
            .max(indexed.mm);
    }
    Outcome::new(
        worst <= SINGLET_TOL && same_direction_pp == 0.0,
        format!("{SINGLET_PAIRS} pairs, max |P - (1 - s1 s2 a.b)/4| = {worst:.2e}, same-direction P(+,+) max = {same_direction_pp}"),
    )
}

fn bell_gap() -> Outcome {
    let start = Instant::now();
    let d = UnitVector3::planar_degrees;
    let report = bell_report(d(0.0), d(90.0), d(45.0), d(135.0)).unwrap();
    let elapsed = start.elapsed();
    let error = (report.quantum.abs_s - 2.0 * SQRT_2).abs();
    Outcome::new(
        error <= BELL_TOL
            && report.classical_bound == 2.0
            && report.gap > 0.0
            && report.violates
            && elapsed < BELL_BUDGET,
        format!(
            "|S| = {:.10}, classical bound = {}, gap = {:.10}, |S| - 2 sqrt 2 = {error:.2e}, {elapsed:.2?}",
            report.quantum.abs_s, report.classical_bound, report.gap
        ),
    )
}

/// `2 Re⟨T+, T−⟩` from raw components, independent of the library's bracket.
fn cross_oracle(p: Quaternion, m: Quaternion) -> f64 {
    2.0 * p
        .components()
        .iter()
        .zip(m.components())
        .map(|(x, y)| x * y)
        .sum::<f64>()
}

fn interference_non_additivity() -> Outcome {
    let a = UnitVector3::Z;
    let b = UnitVector3::normalized(0.0, (1.0f64 - 0.09).sqrt(), 0.3).unwrap();
    let c = UnitVector3::normalized(3f64.sqrt() / 2.0, 0.0, 0.5).unwrap();
    let dirs = DirectionSet::new(vec![a, b, c]).unwrap();
    let mut worst_identity = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut smallest_gap = f64::INFINITY;
    let mut brute_exact = true;
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            let rep = triple_interference(&dirs, 0, 1, 2, s1, s2).unwrap();
            let discrepancy = rep.pair_norm_sq - rep.component_norms.iter().sum::<f64>();
            worst_identity = worst_identity.max((discrepancy - rep.interference.cross).abs());
            let tp = triple_marginal(&dirs, 0, s1, 1, s2, 2, Sign::Plus).unwrap();
            let tm = triple_marginal(&dirs, 0, s1, 1, s2, 2, Sign::Minus).unwrap();
            worst_oracle = worst_oracle.max((rep.interference.cross - cross_oracle(tp, tm)).abs());
            smallest_gap = smallest_gap.min((rep.summed_triple_probability - rep.pair_probability).abs());
            for (s3, t) in [(Sign::Plus, tp), (Sign::Minus, tm)] {
                let brute = triple_marginal_bruteforce(&dirs, 0, s1, 1, s2, 2, s3).unwrap();
                brute_exact &= brute == t * triple_global_factor(dirs.len());
            }
        }
    }
    Outcome::new(
        worst_identity <= TRIPLE_TOL && worst_oracle <= TRIPLE_TOL && smallest_gap > TRIPLE_MIN_GAP && brute_exact,
        format!(
            "a.c = 0.5, a.b = 0.3: min |sum_s3 P - P| = {smallest_gap:.4}, |discrepancy - cross| = {worst_identity:.2e}, |cross - oracle| = {worst_oracle:.2e}, enumeration exact = {brute_exact}"
        ),
    )
}

fn phase_space_marginals() -> Outcome {
    let start = Instant::now();
    let psi = gaussian_wavepacket(Grid1D::new(1024, 40.0, 1.0).unwrap(), 0.0, 0.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for x0 in [0.0, 0.5, 1.0] {
        for p0 in [0.0, 0.5, 1.0] {
            let z = phase_space_from_position(&psi, x0, p0).unwrap();
            let mx = marginal_structure(&marginal_x(&z).unwrap(), &z.psi, -p0, MARGINAL_FLOOR).unwrap();
            let mp = marginal_structure(&marginal_p(&z).unwrap(), &z.xi, x0, MARGINAL_FLOOR).unwrap();
            worst = worst
                .max(mx.modulus_spread)
                .max(mx.phase_residual)
                .max(mp.modulus_spread)
                .max(mp.phase_residual);
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= MARGINAL_STRUCTURE_TOL && elapsed < PHASE_SPACE_BUDGET,
        format!("9 anchors, worst modulus spread / phase residual = {worst:.2e}, {elapsed:.2?}"),
    )
}

fn free_evolution() -> Outcome {
    let sigma = 1.0;
    let psi = gaussian_wavepacket(Grid1D::new(1024, 40.0, 1.0).unwrap(), 0.0, 0.0, sigma).unwrap();
    let w0 = psi.std_dev();
    let mut worst_width = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        let expected = (1.0 + (t / (sigma * sigma)).powi(2)).sqrt();
        let got = evolve_free(&psi, 1.0, t).unwrap().std_dev() / w0;
        worst_width = worst_width.max((got - expected).abs() / expected);
    }
    let mut step = psi.clone();
    for _ in 0..100 {
        step = evolve_free(&step, 1.0, 0.02).unwrap();
    }
    let drift = (step.norm_sq() - psi.norm_sq()).abs();
    Outcome::new(
        worst_width <= WIDTH_TOL && drift < UNITARITY_TOL,
        format!("max relative width error = {worst_width:.2e}, norm drift over 100 steps = {drift:.2e}"),
    )
}

fn two_slit_decoherence() -> Outcome {
    let geom = SlitGeometry::new(1e-4, 2e-5, 5e-7, 1.0, 4096, None).unwrap();
    let sa = slit_amplitudes(&geom);
    let avg = decohere_average(&sa, PhaseShiftModel::Quadrature { samples: 256 }).unwrap();
    let mix = mixture(&sa);
    let worst = avg.iter().zip(&mix).map(|(a, m)| (a - m).abs()).fold(0.0, f64::max);
    let rep = positivity_check(&sa, 16, 9).unwrap();
    let minima = rep.interference_min.max(rep.fringe_minima_max);
    Outcome::new(
        worst <= AVERAGE_TOL && minima < MINIMUM_TOL && rep.mixture_min > 0.0 && rep.inequality_holds,
        format!(
            "max |avg - mixture| = {worst:.2e}, interference minima <= {minima:.2e}, mixture minimum = {:.4e}",
            rep.mixture_min
        ),
    )
}

fn sampler_statistics() -> Outcome {
    let mut inside = 0;
    let mut worst_z = 0.0f64;
    for k in 0..SAMPLER_POINTS {
        let c = -0.95 + 1.9 * k as f64 / (SAMPLER_POINTS - 1) as f64;
        let t = UnitVector3::normalized((1.0 - c * c).sqrt(), 0.0, c).unwrap();
        let ens = SpinEnsemble::new(DirectionSet::new(vec![UnitVector3::Z, t]).unwrap())
            .with_constraint(0, Sign::Plus)
            .unwrap();
        let sampler = HiddenSampler::new(&ens, &[1]).unwrap();
        let p = (1.0 + c) / 2.0;
        let hits = sampler
            .sample_many(SAMPLER_DRAWS, 100 + k as u64)
            .iter()
            .filter(|s| s.signs[0] == Sign::Plus)
            .count();
        let f = hits as f64 / SAMPLER_DRAWS as f64;
        let z = (f - p).abs() / (p * (1.0 - p) / SAMPLER_DRAWS as f64).sqrt();
        worst_z = worst_z.max(z);
        if z <= SAMPLER_SIGMAS {
            inside += 1;
        }
    }
    Outcome::new(
        inside == SAMPLER_POINTS,
        format!("{inside}/{SAMPLER_POINTS} points inside the {SAMPLER_SIGMAS} sigma band ({SAMPLER_DRAWS} draws each), worst z = {worst_z:.2}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("quaternion identities", quaternion_identities),
        ("spin marginals, enumeration vs closed form", spin_marginals),
        ("single-particle law", single_particle_law),
        ("singlet pair probabilities", singlet_probabilities),
        ("Bell gap", bell_gap),
        ("interference non-additivity", interference_non_additivity),
        ("phase-space marginals", phase_space_marginals),
        ("free evolution", free_evolution),
        ("two-slit decoherence", two_slit_decoherence),
        ("sampler statistics", sampler_statistics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {name}: {}", i + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
