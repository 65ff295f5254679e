use std::f64::consts::{E, PI};

use bcw_core::bounds::{bound_curve, linear_grid, ChannelParams, Method};
use bcw_core::channels::{
    apply_attenuator_to, apply_classical_noise, output_moments, ChannelSpec, NoiseDensity, QuadratureSpec, StateSpec,
};
use bcw_core::exec::Execution;
use bcw_core::fock::{attenuate, beamsplitter_unitary, random_density_matrix, DensityMatrix};
use bcw_core::gauss::{extract_moments, g, g_inverse, gaussified_entropy};
use bcw_core::verify::random_noise;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(dim: usize, cap: f64, seed: u64) -> DensityMatrix {
    random_density_matrix(dim, cap, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn beamsplitter_conserves_photons_and_entropy(
        d1 in 2usize..7, d2 in 2usize..7, lambda in 0.0f64..=1.0, s1: u64, s2: u64,
    ) {
        let joint = state(d1, 1.5, s1).tensor(&state(d2, 1.5, s2)).unwrap();
        let u = beamsplitter_unitary(lambda, joint.dim()).unwrap();
        let out = joint.conjugated(&u).unwrap();
        prop_assert!((out.mean_photon_number() - joint.mean_photon_number()).abs() < 1e-9);
        let ds = out.von_neumann_entropy().unwrap() - joint.von_neumann_entropy().unwrap();
        prop_assert!(ds.abs() < 1e-9);
    }

    #[test]
    fn attenuator_moments_propagate(
        d1 in 1usize..12, d2 in 1usize..12, lambda in 0.0f64..=1.0, s1: u64, s2: u64,
    ) {
        let (rho, sigma) = (state(d1, 2.0, s1), state(d2, 2.0, s2));
        let out = attenuate(&rho, lambda, &sigma, Execution::Sequential).unwrap();
        let (m1, m2) = (extract_moments(&rho).unwrap().mean, extract_moments(&sigma).unwrap().mean);
        let cross = (lambda * (1.0 - lambda)).sqrt() * (m1[0] * m2[0] + m1[1] * m2[1]);
        let expect = lambda * rho.mean_photon_number() + (1.0 - lambda) * sigma.mean_photon_number() + cross;
        prop_assert!((out.mean_photon_number() - expect).abs() < 1e-9);

        let spec = ChannelSpec::Attenuator { lambda, env: StateSpec::Explicit { state: sigma.clone() } };
        let ana = output_moments(&spec, &extract_moments(&rho).unwrap()).unwrap();
        let sim = extract_moments(&out).unwrap();
        for i in 0..2 {
            prop_assert!((ana.mean[i] - sim.mean[i]).abs() < 1e-9);
            for j in 0..2 {
                prop_assert!((ana.cov[i][j] - sim.cov[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn attenuator_is_symmetric_under_exchange(
        d1 in 1usize..10, d2 in 1usize..10, lambda in 0.0f64..=1.0, s1: u64, s2: u64,
    ) {
        let (rho, sigma) = (state(d1, 2.0, s1), state(d2, 2.0, s2));
        let a = attenuate(&rho, lambda, &sigma, Execution::Sequential).unwrap();
        let b = attenuate(&sigma, 1.0 - lambda, &rho, Execution::Sequential).unwrap();
        prop_assert!(a.trace_distance(&b).unwrap() < 1e-9);
    }

    #[test]
    fn exact_kernel_matches_dense_two_mode_route(
        d in 2usize..6, lambda in 0.0f64..=1.0, s1: u64, s2: u64,
    ) {
        let (rho, sigma) = (state(d, 1.0, s1), state(d, 1.0, s2));
        let exact = attenuate(&rho, lambda, &sigma, Execution::Sequential).unwrap();
        // the dense route cuts each mode at 2d−1 so every populated sector is complete
        let wide = 2 * d - 1;
        let dense = bcw_core::fock::attenuate_dense(&rho.padded(wide), lambda, &sigma.padded(wide)).unwrap();
        prop_assert!(exact.trace_distance(&dense).unwrap() < 1e-10);
    }

    #[test]
    fn maximum_entropy_principle(dim in 1usize..24, cap in 0.0f64..4.0, seed: u64) {
        let rho = state(dim, cap, seed);
        let s = rho.von_neumann_entropy().unwrap();
        let gauss = gaussified_entropy(&extract_moments(&rho).unwrap()).unwrap();
        prop_assert!(gauss - s >= -1e-8);
        prop_assert!(s <= g(rho.mean_photon_number()).unwrap() + 1e-8);
        prop_assert!(g_inverse(s).unwrap() <= rho.mean_photon_number() + 1e-8);
    }

    #[test]
    fn g_inverse_round_trips(s in 0.0f64..60.0) {
        let n = g_inverse(s).unwrap();
        prop_assert!((g(n).unwrap() - s).abs() <= 1e-10 * s.max(1.0));
    }

    #[test]
    fn json_round_trip_is_exact(dim in 1usize..10, seed: u64) {
        let rho = state(dim, 2.0, seed);
        let back: DensityMatrix = serde_json::from_str(&serde_json::to_string(&rho).unwrap()).unwrap();
        prop_assert_eq!(rho.matrix(), back.matrix());
    }

    #[test]
    fn attenuator_gaps_are_bounded_and_shrink(
        lambda in 0.01f64..0.99, n_e in 0.0f64..8.0, frac in 0.0f64..=1.0,
    ) {
        let s_e = frac * g(n_e).unwrap();
        let params = ChannelParams::attenuator(lambda, n_e, s_e);
        check_gap_property(&params)?;
    }

    #[test]
    fn classical_noise_gaps_are_bounded_and_shrink(
        t in 0.01f64..5.0, energy in 0.1f64..10.0, deficit in 0.0f64..3.0,
    ) {
        let h = (PI * E * energy).ln() - deficit;
        let params = ChannelParams::classical_noise(t, energy, h);
        check_gap_property(&params)?;
    }

    #[test]
    fn epni_upper_dominates_when_its_condition_holds(
        lambda in 0.01f64..0.99, n_e in 0.0f64..8.0, frac in 0.0f64..=1.0, n in 0.0f64..50.0,
    ) {
        let s_e = frac * g(n_e).unwrap();
        let n_ep = g_inverse(s_e).unwrap();
        let condition = g((1.0 - lambda) * n_ep).unwrap() >= (lambda + (1.0 - lambda) * s_e.exp()).ln();
        let params = ChannelParams::attenuator(lambda, n_e, s_e);
        let epi = params.bounds(n, Method::Epi).unwrap();
        let epni = params.bounds(n, Method::Epni).unwrap();
        prop_assert_eq!(epi.lower, epni.lower);
        if condition {
            prop_assert!(epni.upper <= epi.upper + 1e-12);
        }
    }
}

fn check_gap_property(params: &ChannelParams) -> Result<(), TestCaseError> {
    let mut grid = linear_grid(0.0, 10.0, 0.05).unwrap();
    grid.extend(linear_grid(11.0, 1000.0, 1.0).unwrap());
    for method in [Method::Epi, Method::Epni] {
        let curve = bound_curve(params, &grid, method, Execution::Sequential).unwrap();
        let mut prev = f64::INFINITY;
        for r in &curve {
            prop_assert!(r.upper >= r.lower - 1e-12, "{r:?}");
            prop_assert!(r.gap() <= r.gap_bound + 1e-9, "{r:?}");
            prop_assert!(r.gap() <= prev + 1e-9, "{r:?}");
            prev = r.gap();
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn classical_noise_adds_pi_t_energy_photons(
        dim in 1usize..6, t in 0.05f64..0.5, kind in 0usize..4, seed: u64,
    ) {
        let rho = state(dim, 1.0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_noise(&mut rng, kind);
        // pruned tails bias second moments by about coverage times ξ²
        let quad = QuadratureSpec { coverage: 1e-9, ..Default::default() };
        let out = apply_classical_noise(&rho, t, &f, &quad, Execution::Sequential).unwrap();
        let mu = f.mean();
        let mean_in = extract_moments(&rho).unwrap().mean;
        // ⟨a⟩ shifts by √(πt)μ, which adds the cross term √(2πt)(m·μ) to the photon number
        let cross = (2.0 * PI * t).sqrt() * (mean_in[0] * mu[0] + mean_in[1] * mu[1]);
        let expect = rho.mean_photon_number() + PI * t * f.energy() + cross;
        prop_assert!((out.mean_photon_number() - expect).abs() < 1e-3, "{} vs {}", out.mean_photon_number(), expect);

        let spec = ChannelSpec::ClassicalNoise { t, noise: f };
        let ana = output_moments(&spec, &extract_moments(&rho).unwrap()).unwrap();
        let sim = extract_moments(&out).unwrap();
        for i in 0..2 {
            prop_assert!((ana.mean[i] - sim.mean[i]).abs() < 1e-5);
            for j in 0..2 {
                prop_assert!((ana.cov[i][j] - sim.cov[i][j]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn gaussian_inputs_stay_gaussian(
        n in 0.0f64..2.0, n_e in 0.0f64..2.0, lambda in 0.0f64..=1.0,
    ) {
        let env = StateSpec::Thermal { mean_photon: n_e };
        let input = StateSpec::Thermal { mean_photon: n };
        let rho = input.materialize(input.natural_dim(1e-12)).unwrap();
        let sigma = env.materialize(env.natural_dim(1e-12)).unwrap();
        let out = apply_attenuator_to(&rho, lambda, &sigma, Execution::Sequential).unwrap();
        let spec = ChannelSpec::Attenuator { lambda, env };
        let ana = output_moments(&spec, &input.moments().unwrap()).unwrap();
        let sim = extract_moments(&out).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((ana.cov[i][j] - sim.cov[i][j]).abs() < 1e-5);
            }
        }
        // the output is thermal, so its entropy equals the Gaussian one
        let s = out.von_neumann_entropy().unwrap();
        prop_assert!((s - gaussified_entropy(&ana).unwrap()).abs() < 1e-5);
    }
}

#[test]
fn holevo_rate_is_sandwiched_by_the_bounds() {
    use bcw_core::channels::holevo_coherent_rate;
    use num_complex::Complex64;

    let quad = QuadratureSpec::default();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let specs = vec![
        ChannelSpec::Attenuator {
            lambda: 0.75,
            env: StateSpec::Number { n: 2 },
        },
        ChannelSpec::Attenuator {
            lambda: 0.4,
            env: StateSpec::Number { n: 1 },
        },
        ChannelSpec::Attenuator {
            lambda: 0.6,
            env: StateSpec::Superposition {
                coefficients: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.7)],
            },
        },
        ChannelSpec::Attenuator {
            lambda: 0.5,
            env: StateSpec::Thermal { mean_photon: 1.0 },
        },
        ChannelSpec::ClassicalNoise {
            t: 0.3,
            noise: NoiseDensity::UniformDisc { radius: 1.5 },
        },
        ChannelSpec::ClassicalNoise {
            t: 0.2,
            noise: NoiseDensity::GaussianMixture {
                components: vec![
                    bcw_core::channels::MixtureComponent {
                        weight: 0.5,
                        mean: [1.0, 0.0],
                        cov: [[0.3, 0.0], [0.0, 0.3]],
                    },
                    bcw_core::channels::MixtureComponent {
                        weight: 0.5,
                        mean: [-1.0, 0.0],
                        cov: [[0.3, 0.0], [0.0, 0.3]],
                    },
                ],
            },
        },
    ];
    for spec in &specs {
        let params = spec.bound_params().unwrap();
        for n in [0.0, 0.5, 2.0] {
            let chi = holevo_coherent_rate(spec, n, 30, &quad, Execution::default())
                .unwrap()
                .rate;
            let epi = params.bounds(n, Method::Epi).unwrap();
            assert!(
                chi >= epi.lower - 5e-3,
                "{} N={n}: chi={chi} lower={}",
                spec.describe(),
                epi.lower
            );
            assert!(
                chi <= epi.upper + 5e-3,
                "{} N={n}: chi={chi} upper={}",
                spec.describe(),
                epi.upper
            );
        }
    }
}

#[test]
fn parallel_and_sequential_curves_agree() {
    let params = ChannelParams::classical_noise(1.0, 2.0, 15.1f64.ln());
    let grid = linear_grid(0.0, 20.0, 0.1).unwrap();
    for method in [Method::Epi, Method::Epni] {
        assert_eq!(
            bound_curve(&params, &grid, method, Execution::Parallel).unwrap(),
            bound_curve(&params, &grid, method, Execution::Sequential).unwrap()
        );
    }
}
