use std::f64::consts::PI;

use photonsynth::fock::{
    beamsplitter_apply, displacement_operator, fidelity, loss_channel, partial_trace, phase_rotation,
    squeeze_operator, uhlmann_fidelity, DensityOperator, FockVector, MultiModeState,
};
use photonsynth::herald::{detector_povm, herald, perturbative_output, HeraldConfig};
use photonsynth::tomo::{mle_reconstruct, quadrature_pdf, sample_quadratures, PhaseSchedule, TomoSettings};
use photonsynth::wigner::{count_negative_intervals, wigner_point, CutSpec};
use photonsynth::C64;
use proptest::prelude::*;

fn complex_in(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn pure_state(dim: usize) -> impl Strategy<Value = FockVector> {
    prop::collection::vec(complex_in(1.0), dim)
        .prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|v| FockVector::new(v).unwrap().normalized().unwrap())
}

/// Mixture of two random pure states.
fn mixed_state(dim: usize) -> impl Strategy<Value = DensityOperator> {
    (pure_state(dim), pure_state(dim), 0.0f64..1.0).prop_map(|(a, b, w)| {
        let m = a.to_density().matrix() * C64::new(w, 0.0) + b.to_density().matrix() * C64::new(1.0 - w, 0.0);
        DensityOperator::from_matrix(m).unwrap()
    })
}

fn max_abs(m: &nalgebra::DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn displacement_unitary_on_populated_levels(beta in complex_in(0.4)) {
        let d = displacement_operator(beta, 16).unwrap();
        prop_assert!(d.unitarity_defect_on(4) <= 1e-8);
    }

    #[test]
    fn squeeze_unitary_on_populated_levels(r in 0.0f64..0.3, phi in 0.0..PI) {
        let dim = 24;
        let s = squeeze_operator(r, phi, dim).unwrap();
        // Populated levels: columns whose weight beyond the cutoff is below 1e-10.
        let wide = squeeze_operator(r, phi, dim + 20).unwrap();
        let leak = |j: usize| (dim..dim + 20).map(|i| wide.element(i, j).norm_sqr()).sum::<f64>();
        let k = (0..dim).take_while(|&j| leak(j) < 1e-10).count();
        prop_assert!(k >= 2);
        prop_assert!(s.unitarity_defect_on(k) <= 1e-8, "k = {k}");
    }

    #[test]
    fn displacement_composition(a in complex_in(0.15), b in complex_in(0.15)) {
        let dim = 12;
        let lhs = displacement_operator(a, dim).unwrap().compose(&displacement_operator(b, dim).unwrap()).unwrap();
        let phase = ((a * b.conj() - a.conj() * b) / 2.0).exp();
        let rhs = displacement_operator(a + b, dim).unwrap().matrix() * phase;
        let diff = (lhs.matrix() - rhs).view((0, 0), (3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-8, "diff {diff}");
    }

    #[test]
    fn loss_preserves_trace_and_positivity(rho in mixed_state(6), eta in 0.0f64..=1.0) {
        let out = loss_channel(&rho, eta).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
        prop_assert!(out.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn loss_semigroup(rho in mixed_state(5), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let two = loss_channel(&loss_channel(&rho, a).unwrap(), b).unwrap();
        let one = loss_channel(&rho, a * b).unwrap();
        prop_assert!(max_abs(&(two.matrix() - one.matrix())) <= 1e-10);
    }

    #[test]
    fn beamsplitter_conserves_pair_photon_number(
        a in pure_state(4), b in pure_state(4), t in 0.0f64..=1.0,
    ) {
        // Pair photon number ≤ 6 < dim, so nothing is truncated.
        let dim = 7;
        let input = MultiModeState::product(&[a.resized(dim).unwrap(), b.resized(dim).unwrap()]).unwrap();
        let out = beamsplitter_apply(&input, 0, 1, t).unwrap();
        let dist = |s: &MultiModeState| {
            let mut p = vec![0.0; 2 * dim];
            for i in 0..dim {
                for j in 0..dim {
                    p[i + j] += s.amp(&[i, j]).norm_sqr();
                }
            }
            p
        };
        for (x, y) in dist(&input).iter().zip(dist(&out)) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product(a in pure_state(3), b in pure_state(4), c in pure_state(2)) {
        let state = MultiModeState::product(&[a.clone(), b.clone(), c.clone()]).unwrap();
        for (keep, factor) in [(0usize, &a), (1, &b), (2, &c)] {
            let reduced = partial_trace(&state, &[keep]).unwrap();
            prop_assert!(max_abs(&(reduced.matrix() - factor.to_density().matrix())) <= 1e-12);
        }
    }

    #[test]
    fn povm_completeness(eta in 0.0f64..=1.0, dark in 0.0f64..0.99, dim in 2usize..12) {
        let povm = detector_povm(eta, dark, dim).unwrap();
        prop_assert!(povm.completeness_defect() <= 1e-12);
        for n in 0..dim {
            let p = povm.click_probability(n);
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&p));
        }
    }

    #[test]
    fn wigner_bounded_by_inverse_pi(rho in mixed_state(5), x in -4.0f64..4.0, p in -4.0f64..4.0) {
        prop_assert!(wigner_point(&rho, x, p).abs() <= 1.0 / PI + 1e-12);
    }

    #[test]
    fn wigner_rotation_covariance(rho in mixed_state(5), theta in 0.0..(2.0 * PI), r in -3.0f64..3.0) {
        // R(θ) = e^{−iθn̂} turns phase space by θ.
        let rotated = rho.conjugate_by(&phase_rotation(theta, 5).unwrap()).unwrap();
        let (x, p) = (r, 0.0);
        let (xr, pr) = (x * theta.cos() - p * theta.sin(), x * theta.sin() + p * theta.cos());
        prop_assert!((wigner_point(&rotated, xr, pr) - wigner_point(&rho, x, p)).abs() <= 1e-10);
    }

    #[test]
    fn fock_negative_intervals(n in 0usize..4, angle in 0.0..(2.0 * PI)) {
        let rho = DensityOperator::fock(n, 6).unwrap();
        prop_assert_eq!(count_negative_intervals(&rho, &CutSpec::along(angle)).unwrap(), n);
    }

    #[test]
    fn tomographic_identity(rho in mixed_state(5), theta in 0.0..PI, x in -4.0f64..4.0) {
        let rotated = rho.conjugate_by(&phase_rotation(-theta, 5).unwrap()).unwrap();
        prop_assert!((quadrature_pdf(&rho, theta, x) - quadrature_pdf(&rotated, 0.0, x)).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadrature_pdf_normalized(rho in mixed_state(6)) {
        for k in 0..8 {
            let theta = k as f64 * PI / 8.0;
            let total = simpson(|x| quadrature_pdf(&rho, theta, x), -10.0, 10.0, 2000);
            prop_assert!((total - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn herald_permutation_symmetry(b1 in complex_in(0.15), b2 in complex_in(0.15), b3 in complex_in(0.15)) {
        let base = herald(&HeraldConfig::ideal(0.05, [b1, b2, b3])).unwrap();
        for perm in [[b2, b1, b3], [b3, b2, b1], [b2, b3, b1]] {
            let other = herald(&HeraldConfig::ideal(0.05, perm)).unwrap();
            prop_assert!((other.probability / base.probability - 1.0).abs() <= 1e-9);
            prop_assert!(max_abs(&(other.rho.matrix() - base.rho.matrix())) <= 1e-9);
        }
    }

    #[test]
    fn herald_probability_monotone_in_efficiency(
        b1 in complex_in(0.1), b2 in complex_in(0.1), b3 in complex_in(0.1), lo in 0.05f64..1.0, hi in 0.05f64..1.0,
    ) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let mut cfg = HeraldConfig::ideal(0.05, [b1, b2, b3]);
        cfg.eta_detector = lo;
        let p_lo = herald(&cfg).unwrap().probability;
        cfg.eta_detector = hi;
        let p_hi = herald(&cfg).unwrap().probability;
        prop_assert!(p_lo <= p_hi * (1.0 + 1e-12));
    }

    #[test]
    fn perturbative_limit(b1 in complex_in(3.0), b2 in complex_in(3.0), b3 in complex_in(3.0)) {
        // Amplitudes given in units of q, capped at |β| ≤ 3q.
        let clamp = |b: C64| if b.norm() > 3.0 { b * (3.0 / b.norm()) } else { b };
        let q = 0.02;
        let betas = [clamp(b1) * q, clamp(b2) * q, clamp(b3) * q];
        let rho = herald(&HeraldConfig::ideal(q, betas)).unwrap().rho;
        let psi = perturbative_output(q, &betas).normalized().unwrap().resized(rho.dim()).unwrap();
        prop_assert!(fidelity(&rho, &psi).unwrap() >= 0.999);
    }

    #[test]
    fn qutrit_recipe_symmetry(q in 0.01f64..=0.1, phase in 0.0..(2.0 * PI / 3.0)) {
        let s = 0.86 * q;
        let betas = [0.0, 2.0, 4.0].map(|k| C64::from_polar(s, phase + k * PI / 3.0));
        let rho = herald(&HeraldConfig::ideal(q, betas)).unwrap().rho;
        let rotated = rho.conjugate_by(&phase_rotation(2.0 * PI / 3.0, rho.dim()).unwrap()).unwrap();
        prop_assert!(uhlmann_fidelity(&rho, &rotated).unwrap() >= 1.0 - 1e-6);
    }
}

#[test]
fn reconstruction_is_a_fixed_point() {
    let truth = FockVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.5), C64::new(-0.3, 0.2), C64::new(0.4, 0.0)])
        .unwrap()
        .normalized()
        .unwrap();
    let settings = TomoSettings {
        dim: 4,
        max_iters: 400,
        ..TomoSettings::default()
    };
    let first = sample_quadratures(&truth.to_density(), 20_000, &PhaseSchedule::default(), 21).unwrap();
    let rho_hat = mle_reconstruct(&first, &settings).unwrap().rho;
    rho_hat.validate().unwrap();

    let second = sample_quadratures(&rho_hat, 100_000, &PhaseSchedule::default(), 22).unwrap();
    let again = mle_reconstruct(&second, &settings).unwrap();
    again.rho.validate().unwrap();
    let f = uhlmann_fidelity(&again.rho, &rho_hat).unwrap();
    assert!(f >= 0.995, "fidelity {f}");
    let hist = &again.diagnostics.log_likelihood_history;
    assert!(hist.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}
