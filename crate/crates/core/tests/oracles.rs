//! Cross-checks against independent references: nalgebra's Hermitian
//! eigensolver and matrix exponential of the vectorized generator, plus
//! property tests on random states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use faulty_oracle_core::dynamics::{evolve_lindblad, IntegratorConfig, LindbladGenerator};
use faulty_oracle_core::eigen::hermitian_eigenvalues;
use faulty_oracle_core::progress::{
    growth_rate_closed_form, growth_rate_direct, measure_runtime, optimal_coherence, progress_all_winners, simulate_pair, BoundStatus,
    Criterion, Engine, PairedEvolution,
};
use faulty_oracle_core::quantum::{fidelity_upper_bound, frobenius_norm_sq_diff, trace_distance, two_dim_decompose};
use faulty_oracle_core::search::{build_oracle_generator, build_reduced_model};
use faulty_oracle_core::{CMatrix, DensityMatrix, PureState, SearchModel, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

type NMat = DMatrix<C64>;

fn to_nalgebra(m: &CMatrix) -> NMat {
    let n = m.dim();
    NMat::from_fn(n, n, |i, j| m[(i, j)])
}

fn dense_h(gen: &LindbladGenerator) -> NMat {
    to_nalgebra(gen.hamiltonian().dense_at(0.0).matrix())
}

/// Column-stacking superoperator: vec(AXB) = (Bᵀ ⊗ A) vec(X).
fn liouvillian(h: &NMat, jumps: &[NMat]) -> NMat {
    let n = h.nrows();
    let id = NMat::identity(n, n);
    let i = C64::new(0.0, 1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-i);
    for j in jumps {
        let jdj = j.adjoint() * j;
        l += j.conjugate().kronecker(j);
        l -= id.kronecker(&jdj) * C64::new(0.5, 0.0);
        l -= jdj.transpose().kronecker(&id) * C64::new(0.5, 0.0);
    }
    l
}

fn exact_evolution(model: &SearchModel, rho0: &NMat, t: f64) -> NMat {
    let gen = build_oracle_generator(model).unwrap();
    let jumps: Vec<NMat> = gen.jumps().iter().map(|j| to_nalgebra(&j.to_dense())).collect();
    let l = liouvillian(&dense_h(&gen), &jumps) * C64::new(t, 0.0);
    let n = rho0.nrows();
    let v = l.exp() * NMat::from_column_slice(n * n, 1, rho0.as_slice());
    NMat::from_column_slice(n, n, v.as_slice())
}

fn random_density(n: usize, raw: &[f64]) -> DensityMatrix {
    let a = CMatrix::from_fn(n, |i, j| C64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1]));
    let m = a.matmul(&a.adjoint()).unwrap();
    let tr = m.trace().re;
    let m = m.scaled(C64::new(1.0 / tr, 0.0));
    // Re-symmetrize to remove rounding asymmetry before validation.
    let h = m.add(&m.adjoint()).unwrap().scaled(C64::new(0.5, 0.0));
    DensityMatrix::new(h).unwrap()
}

fn random_pure(raw: &[f64]) -> PureState {
    PureState::normalized(raw.chunks(2).map(|c| C64::new(c[0], c[1])).collect()).unwrap()
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut seed = 0x2545f4914f6cdd1du64;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for n in [1usize, 2, 3, 5, 8, 17, 40] {
        let a = CMatrix::from_fn(n, |_, _| C64::new(next(), next()));
        let h = a.add(&a.adjoint()).unwrap();
        let ours = hermitian_eigenvalues(&h).unwrap();
        let mut theirs: Vec<f64> = to_nalgebra(&h).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn eigenvalues_of_low_rank_difference_match_nalgebra() {
    // Rank-2 differences of projectors: the clustered-zero case.
    for n in [16usize, 64, 100] {
        let m = SearchModel::new(n, 1.0, 1.0).unwrap();
        let mut pair = PairedEvolution::new(&m, Engine::Full).unwrap();
        for _ in 0..200 {
            pair.step(0.01);
        }
        let d = pair.rho().matrix().sub(pair.phi().projector().matrix()).unwrap();
        let ours = hermitian_eigenvalues(&d).unwrap();
        let mut theirs: Vec<f64> = to_nalgebra(&d).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn lindblad_matches_liouvillian_exponential() {
    for &(n, e, g) in &[(2usize, 1.0, 0.5), (4, 1.0, 1.0), (6, 0.5, 4.0), (8, 2.0, 0.1)] {
        let m = SearchModel::new(n, e, g).unwrap().with_winner(n / 2).unwrap();
        let gen = build_oracle_generator(&m).unwrap();
        let rho0 = m.initial_state().projector();
        let t = 5.0;
        let traj = evolve_lindblad(&gen, &rho0, t, &IntegratorConfig::for_scales(e, g)).unwrap();
        let ours = to_nalgebra(traj.final_density().matrix());
        let exact = exact_evolution(&m, &to_nalgebra(rho0.matrix()), t);
        let err = (ours - exact).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "n={n} e={e} g={g}: {err:e}");
    }
}

#[test]
fn adaptive_integrator_matches_liouvillian_exponential() {
    let m = SearchModel::new(4, 1.0, 1.0).unwrap();
    let gen = build_oracle_generator(&m).unwrap();
    let rho0 = m.initial_state().projector();
    let traj = evolve_lindblad(&gen, &rho0, 6.0, &IntegratorConfig::default().with_step(0.2).adaptive(1e-11)).unwrap();
    let exact = exact_evolution(&m, &to_nalgebra(rho0.matrix()), 6.0);
    let err = (to_nalgebra(traj.final_density().matrix()) - exact).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn pure_dephasing_coherence_decays_at_half_gamma() {
    use faulty_oracle_core::dynamics::{Hamiltonian, Operator};
    let gen = LindbladGenerator::new(Hamiltonian::zero(2), vec![Operator::basis_projector(2, 0, 1.0).unwrap()]).unwrap();
    let plus = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    let traj = evolve_lindblad(&gen, &plus.projector(), 4.0, &IntegratorConfig::default().with_sample_every(50)).unwrap();
    for (k, t) in traj.times.iter().enumerate() {
        let rho = traj.states.density(k);
        assert!((rho.get(0, 1).re - 0.5 * (-t / 2.0).exp()).abs() < 1e-10);
        assert!(rho.get(0, 1).im.abs() < 1e-12);
    }
}

#[test]
fn noiseless_n4_reaches_winner_at_pi() {
    let m = SearchModel::new(4, 1.0, 0.0).unwrap();
    let gen = build_oracle_generator(&m).unwrap();
    let traj = evolve_lindblad(&gen, &m.initial_state().projector(), PI, &IntegratorConfig::default()).unwrap();
    assert!((traj.final_density().get(0, 0).re - 1.0).abs() < 1e-8);
}

#[test]
fn reduced_model_reproduces_full_space_n8() {
    let m = SearchModel::new(8, 1.0, 1.0).unwrap().with_winner(3).unwrap();
    let r = build_reduced_model(&m).unwrap();
    let cfg = IntegratorConfig::default().with_sample_every(100);
    let full = evolve_lindblad(&build_oracle_generator(&m).unwrap(), &m.initial_state().projector(), 50.0, &cfg).unwrap();
    let red = evolve_lindblad(&r.oracle_generator().unwrap(), &r.initial_state().projector(), 50.0, &cfg).unwrap();
    assert_eq!(full.times, red.times);
    for k in 0..full.times.len() {
        let projected = r.project(&m, full.states.density(k).matrix()).unwrap();
        let err = projected.max_abs_diff(red.states.density(k).matrix());
        assert!(err < 1e-8, "t={}: {err:e}", full.times[k]);
    }
}

#[test]
fn halving_step_changes_observables_below_1e_6() {
    for engine in [Engine::Full, Engine::Reduced] {
        let m = SearchModel::new(16, 1.0, 1.0).unwrap();
        let coarse = IntegratorConfig::for_scales(1.0, 1.0).with_sample_every(100);
        let fine = coarse.with_step(coarse.step_size / 2.0).with_sample_every(200);
        let a = simulate_pair(&m, engine, 20.0, &coarse).unwrap();
        let b = simulate_pair(&m, engine, 20.0, &fine).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.t - y.t).abs() < 1e-12);
            for (u, v) in [(x.success_prob, y.success_prob), (x.f_w, y.f_w), (x.rate_direct, y.rate_direct), (x.purity_w, y.purity_w)] {
                assert!((u - v).abs() < 1e-6, "{engine:?} t={}: {u} vs {v}", x.t);
            }
        }
    }
}

#[test]
fn winner_symmetry_matches_brute_force_sum() {
    for n in [2usize, 4, 8] {
        let m = SearchModel::new(n, 1.0, 0.7).unwrap();
        let cfg = IntegratorConfig::default().with_sample_every(50);
        let brute = progress_all_winners(&m, 6.0, &cfg).unwrap();
        let sym = simulate_pair(&m, Engine::Full, 6.0, &cfg).unwrap();
        for ((t, total), s) in brute.iter().zip(&sym) {
            assert!((t - s.t).abs() < 1e-12);
            assert!((total - s.f_total).abs() < 1e-10, "n={n} t={t}");
        }
    }
}

#[test]
fn bound_example_n8_is_satisfied() {
    let m = SearchModel::new(8, 1.0, 1.0).unwrap();
    let cfg = IntegratorConfig::for_scales(1.0, 1.0);
    for engine in [Engine::Full, Engine::Reduced] {
        let r = measure_runtime(&m, 0.75, Criterion::TraceDistance, 40.0, &cfg, engine).unwrap();
        assert!(r.satisfied(), "{r:?}");
    }
}

#[test]
fn derivation_chain_holds_at_crossing() {
    let p = 0.72;
    let mut checked = 0;
    for n in [4usize, 8, 16] {
        let m = SearchModel::new(n, 1.0, 0.1).unwrap();
        let r = measure_runtime(&m, p, Criterion::TraceDistance, 20.0, &IntegratorConfig::for_scales(1.0, 0.1), Engine::Full).unwrap();
        if let Some(s) = r.crossing_sample {
            assert!(r.status == BoundStatus::Satisfied);
            let middle = 1.0 - 2.0 * s.reference_fidelity;
            assert!(s.f_w >= middle - 1e-12, "n={n}: F={} middle={middle}", s.f_w);
            assert!(middle >= 2.0 * p * p - 1.0 - 1e-12, "n={n}: middle={middle}");
            checked += 1;
        }
    }
    assert!(checked > 0, "no run crossed the threshold");
}

#[test]
fn direct_rate_agrees_with_closed_form_along_trajectory() {
    let m = SearchModel::new(32, 1.0, 0.5).unwrap();
    let samples = simulate_pair(&m, Engine::Full, 10.0, &IntegratorConfig::default().with_sample_every(10)).unwrap();
    for s in &samples {
        assert!((s.rate_direct - s.rate_closed_form).abs() < 1e-8, "t={}", s.t);
    }
}

fn unit_disk() -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..(2.0 * PI)).prop_map(|(r, a)| C64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_bounded_metric(
        n in 2usize..5,
        raw in prop::collection::vec(-1.0..1.0f64, 3 * 2 * 16),
    ) {
        let k = 2 * n * n;
        let a = random_density(n, &raw[..k]);
        let b = random_density(n, &raw[k..2 * k]);
        let c = random_density(n, &raw[2 * k..3 * k]);
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
        let ac = trace_distance(&a, &c).unwrap();
        let cb = trace_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn trace_distance_to_pure_state_is_below_fidelity_bound(
        n in 2usize..6,
        raw in prop::collection::vec(-1.0..1.0f64, 2 * 36 + 12),
    ) {
        let rho = random_density(n, &raw[..2 * n * n]);
        let phi = random_pure(&raw[2 * n * n..2 * n * n + 2 * n]);
        let td = trace_distance(&rho, &phi.projector()).unwrap();
        prop_assert!(td <= fidelity_upper_bound(&rho, &phi).unwrap() + 1e-12);
    }

    #[test]
    fn frobenius_distance_expands(
        n in 2usize..5,
        raw in prop::collection::vec(-1.0..1.0f64, 2 * 2 * 16),
    ) {
        let k = 2 * n * n;
        let a = random_density(n, &raw[..k]);
        let b = random_density(n, &raw[k..2 * k]);
        let lhs = frobenius_norm_sq_diff(&a, &b).unwrap();
        let cross = a.matrix().trace_of_product(b.matrix()).unwrap().re;
        prop_assert!((lhs - (a.purity() + b.purity() - 2.0 * cross)).abs() < 1e-12);
        prop_assert!(lhs >= 0.0);
    }

    #[test]
    fn decomposition_round_trips(
        n in 2usize..8,
        w in 0usize..8,
        raw in prop::collection::vec(-1.0..1.0f64, 16),
    ) {
        let w = w % n;
        let phi = random_pure(&raw[..2 * n]);
        let d = two_dim_decompose(&phi, w).unwrap();
        let s = (1.0 - d.overlap.norm_sqr()).sqrt();
        for k in 0..n {
            let basis = if k == w { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            let rebuilt = d.overlap * basis + d.w_perp.amplitude(k) * s;
            prop_assert!((rebuilt - phi.amplitude(k)).norm() < 1e-12);
        }
        prop_assert!(d.w_perp.amplitude(w).norm() < 1e-12);
        prop_assert!((d.f - d.overlap * s).norm() < 1e-15);
    }

    #[test]
    fn optimal_coherence_maximizes_closed_form(
        f in unit_disk(),
        e in 0.01..5.0f64,
        g in 0.01..5.0f64,
        xs in prop::collection::vec(unit_disk(), 64),
    ) {
        let f = f * 0.5;
        let best = growth_rate_closed_form(optimal_coherence(f, e, g).unwrap(), f, e, g);
        for x in xs {
            let x = x * 3.0;
            prop_assert!(growth_rate_closed_form(x, f, e, g) <= best + 1e-12 * best.abs().max(1.0));
        }
    }

    #[test]
    fn direct_rate_matches_closed_form_on_two_dim_states(
        n in 2usize..7,
        raw in prop::collection::vec(-1.0..1.0f64, 2 * 4 + 2 * 7),
        e in 0.1..3.0f64,
        g in 0.0..3.0f64,
    ) {
        // ρ supported on span{|w⟩, |w⊥⟩} with |w⊥⟩ taken from φ.
        let w = 0;
        let phi = random_pure(&raw[8..8 + 2 * n]);
        let d = two_dim_decompose(&phi, w).unwrap();
        let r2 = random_density(2, &raw[..8]);
        let basis = |k: usize| -> Vec<C64> {
            if k == 0 {
                let mut v = vec![C64::new(0.0, 0.0); n];
                v[w] = C64::new(1.0, 0.0);
                v
            } else {
                d.w_perp.amplitudes().to_vec()
            }
        };
        let mut m = CMatrix::zeros(n);
        for i in 0..2 {
            for j in 0..2 {
                let o = CMatrix::outer(&basis(i), &basis(j)).scaled(r2.get(i, j));
                m = m.add(&o).unwrap();
            }
        }
        let rho = DensityMatrix::new(m).unwrap();
        let x = rho.matrix().sandwich(&basis(0), &basis(1));
        let direct = growth_rate_direct(&rho, &phi.projector(), w, e, g).unwrap();
        prop_assert!((direct - growth_rate_closed_form(x, d.f, e, g)).abs() < 1e-10);
    }
}

#[test]
fn bound_threshold_edge() {
    let r = faulty_oracle_core::progress::runtime_lower_bound(100, 1.0, 1.0, FRAC_1_SQRT_2).unwrap();
    assert!(r.abs() < 1e-12);
}
