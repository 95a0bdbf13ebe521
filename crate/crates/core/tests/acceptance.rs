//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `--nocapture`). Expected values come from independent
//! oracles computed here — dense matrix exponentials at high truncation,
//! brute-force distributions, series evaluation — never from the code path
//! under test.

use herald_core::fock::{basis_state, expm_i, fidelity, make_layout, Operator, StateVector};
use herald_core::gates::{
    parity_op, squeeze_gen_mat, two_mode_seed_generator, CodingSpec, QuadraticForm,
};
use herald_core::linalg::{cr, C64};
use herald_core::measurement::{
    count_distribution, no_click_probability, project_counts, sample_counts, squeezed_vacuum_pmf,
};
use herald_core::protocol::{code_words, decode_pipeline, run_protocol, LossEvent};
use herald_core::synthesis::{
    conjugation_identity_check_windowed, cubic_dress_certificate, gaussian_reduction_solve,
    AffineSymplectic, ReductionOptions,
};

fn conclude(id: &str, desc: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {desc}: {detail}");
    assert!(pass, "{id} {desc}: {detail}");
}

fn random_unit(rng_state: &mut u64) -> f64 {
    // splitmix64 stream, enough for parameter draws
    *rng_state = rng_state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *rng_state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    ((z ^ (z >> 31)) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[test]
fn criterion_01_round_trip_identity() {
    let mut draw = 811u64;
    let mut worst_fid = 1.0f64;
    let mut worst_vac = 1.0f64;
    for case in 0..50u64 {
        let (info_dims, gamma_rows): (Vec<usize>, usize) = if case % 2 == 0 {
            (vec![3], 1)
        } else {
            (vec![2, 2], 2)
        };
        let info = make_layout(&info_dims, &[]).unwrap();
        let input = StateVector::random(info, 9_000 + case);
        let strength = 0.05 + 0.45 * random_unit(&mut draw);
        for coding in [
            CodingSpec::ecs(vec![vec![strength]; gamma_rows]),
            CodingSpec::pcs(vec![vec![1.0]; gamma_rows], strength),
        ] {
            let report = run_protocol(&input, &[100], &coding, &LossEvent::None, case).unwrap();
            worst_fid = worst_fid.min(report.fidelity);
            worst_vac = worst_vac.min(report.ancilla_vacuum_probability);
        }
    }
    conclude(
        "criterion-01",
        "round-trip identity (no loss, both codings)",
        worst_fid >= 1.0 - 1e-10 && worst_vac >= 1.0 - 1e-10,
        format!("worst fidelity {worst_fid:.3e}, worst vacuum probability {worst_vac:.3e}"),
    );
}

#[test]
fn criterion_02_pcs_full_space_recovery() {
    let mut draw = 223u64;
    let mut worst = 1.0f64;
    for case in 0..50u64 {
        let strength = 0.1 + 0.4 * random_unit(&mut draw);
        let (input, coding) = if case % 5 == 4 {
            let info = make_layout(&[2, 2], &[]).unwrap();
            (
                StateVector::random(info, 700 + case),
                CodingSpec::pcs(vec![vec![1.0], vec![1.0]], strength),
            )
        } else {
            // the full truncated information space, not a code subspace
            let info = make_layout(&[6], &[]).unwrap();
            (
                StateVector::random(info, 700 + case),
                CodingSpec::pcs(vec![vec![1.0]], strength),
            )
        };
        let report =
            run_protocol(&input, &[60], &coding, &LossEvent::uniform_ancilla(1), case).unwrap();
        assert!(report.recovery_applied, "recovery should trigger");
        worst = worst.min(report.fidelity);
    }
    conclude(
        "criterion-02",
        "parity-coding ancilla-loss recovery over the full space",
        worst >= 1.0 - 1e-10,
        format!("worst post-recovery fidelity {worst:.3e}"),
    );
}

#[test]
fn criterion_03_ecs_code_preservation() {
    let gamma = 0.3;
    let coding = CodingSpec::ecs(vec![vec![gamma]; 3]);
    let words = code_words(3).unwrap();
    let mut inputs: Vec<StateVector> = words.clone();
    let mut draw = 3331u64;
    for _ in 0..20 {
        let mut sup = StateVector::zero(words[0].layout().clone());
        for word in &words {
            let c = C64::new(
                2.0 * random_unit(&mut draw) - 1.0,
                2.0 * random_unit(&mut draw) - 1.0,
            );
            sup = sup.add(&word.scaled(c)).unwrap();
        }
        inputs.push(sup.normalized().unwrap().0);
    }
    let mut worst = 1.0f64;
    for input in &inputs {
        let run = decode_pipeline(input, &[80], &coding, &LossEvent::uniform_ancilla(1)).unwrap();
        let (projected, _) = project_counts(&run.state, &[1]).unwrap();
        let normalized_input = input.normalized().unwrap().0;
        worst = worst.min(fidelity(&projected, &normalized_input).unwrap());
    }
    conclude(
        "criterion-03",
        "symmetric-coupling code preservation under ancilla loss (K=3)",
        worst >= 1.0 - 1e-10,
        format!(
            "worst info fidelity {worst:.3e} over {} inputs",
            inputs.len()
        ),
    );
}

#[test]
fn criterion_04_loss_localization() {
    let coding = CodingSpec::ecs(vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
    let info = make_layout(&[2, 2], &[]).unwrap();
    let mut inputs = vec![basis_state(&info, &[1, 1]).unwrap()];
    for seed in 0..3 {
        inputs.push(StateVector::random(info.clone(), 40 + seed));
    }
    let mut worst = 1.0f64;
    for lost_mode in 0..2usize {
        for input in &inputs {
            let event = LossEvent::info_mode(2, lost_mode);
            let run = match decode_pipeline(input, &[60, 60], &coding, &event) {
                Ok(run) => run,
                // a random state can in principle have no photon in the mode
                Err(herald_core::Error::ImpossibleEvent) => continue,
                Err(e) => panic!("pipeline failed: {e}"),
            };
            let dist = count_distribution(&run.state).unwrap();
            let mut p_zero = 0.0f64;
            let mut p_good = 0.0f64;
            let mut p_any = 0.0f64;
            let mut p_even_hit = 0.0f64;
            let mut p_other_vacuum = 0.0f64;
            for record in &dist {
                if record.counts[lost_mode] % 2 == 0 {
                    p_even_hit += record.probability;
                }
                if record.counts[1 - lost_mode] == 0 {
                    p_other_vacuum += record.probability;
                }
                if record.counts.iter().all(|&c| c == 0) {
                    p_zero += record.probability;
                    continue;
                }
                p_any += record.probability;
                let hit = record.counts[lost_mode];
                let other = record.counts[1 - lost_mode];
                if other == 0 && hit >= 2 && hit % 2 == 0 {
                    p_good += record.probability;
                }
            }
            assert!(p_zero < 1.0, "loss must be detectable");
            // the squeezed ancilla stays even-count and the uncoupled
            // ancilla stays in vacuum
            assert!(p_even_hit >= 1.0 - 1e-8, "even mass {p_even_hit}");
            assert!(
                p_other_vacuum >= 1.0 - 1e-10,
                "other-mode vacuum {p_other_vacuum}"
            );
            worst = worst.min(p_good / p_any);
        }
    }
    conclude(
        "criterion-04",
        "one-to-one coupling localizes the lost information mode",
        worst >= 1.0 - 1e-8,
        format!(
            "worst conditional localization probability 1-{:.3e}",
            1.0 - worst
        ),
    );
}

#[test]
fn criterion_05_detection_failure_decay() {
    let info = make_layout(&[2], &[]).unwrap();
    let one = basis_state(&info, &[1]).unwrap();
    let oracle_dim = 300;
    let mut previous = f64::INFINITY;
    let mut worst_mismatch = 0.0f64;
    let mut lines = Vec::new();
    for &gamma in &[0.1, 0.2, 0.3, 0.4, 0.5] {
        let coding = CodingSpec::ecs(vec![vec![gamma]]);
        let p = no_click_probability(&one, &[120], &coding, &[cr(1.0)]).unwrap();

        // oracle 1: dense exponential of the single-mode squeeze generator
        // at truncation 300; after an information-photon loss the decoded
        // ancilla is exp(−i γ (b†²+b²))|0⟩
        let dense = expm_i(&squeeze_gen_mat(oracle_dim), -gamma);
        let oracle = dense[(0, 0)].norm_sqr();
        worst_mismatch = worst_mismatch.max((p.exact - oracle).abs());

        // oracle 2: the whole pipeline again, but with the coding unitary
        // exponentiated as one two-mode Kronecker generator — no
        // sector-factored machinery anywhere in this route
        let layout = make_layout(&[2], &[oracle_dim]).unwrap();
        let n_mat = {
            let mut m = herald_core::linalg::CMat::zeros(2, 2);
            m[(1, 1)] = cr(1.0);
            m
        };
        let encode = Operator::pair_kron(&layout, (0, 1), n_mat, squeeze_gen_mat(oracle_dim))
            .unwrap()
            .expm_i(-gamma)
            .unwrap();
        let psi0 = basis_state(&layout, &[1, 0]).unwrap();
        let loss = herald_core::protocol::collective_loss_op(&layout, &LossEvent::uniform_info(1))
            .unwrap();
        let lost = loss.apply(&encode.apply(&psi0).unwrap()).unwrap();
        let decoded = encode
            .dagger()
            .apply(&lost.normalized().unwrap().0)
            .unwrap();
        let kron_route: f64 = (0..2)
            .map(|s| decoded.amps()[s * oracle_dim].norm_sqr())
            .sum();
        worst_mismatch = worst_mismatch.max((p.exact - kron_route).abs());

        assert!(p.exact < previous, "P0 must strictly decrease");
        previous = p.exact;
        lines.push(format!(
            "gamma={gamma}: exact {:.12}, paper closed form {:.12} (diff {:.2e}, reported not asserted)",
            p.exact,
            p.paper_closed_form,
            p.discrepancy()
        ));
    }
    for line in &lines {
        println!("  {line}");
    }
    conclude(
        "criterion-05",
        "no-click probability decays and matches two independent dense oracles",
        worst_mismatch <= 1e-9,
        format!("worst |exact − oracle| = {worst_mismatch:.3e}"),
    );
}

#[test]
fn criterion_06_squeezed_vacuum_statistics() {
    let oracle_dim = 300;
    let mut worst = 0.0f64;
    let mut worst_sign = 0.0f64;
    let mut odd_mass = 0.0f64;
    for &g in &[0.1, 0.3, 0.5] {
        let plus = expm_i(&squeeze_gen_mat(oracle_dim), -g);
        let minus = expm_i(&squeeze_gen_mat(oracle_dim), g);
        for m in 0..=40usize {
            let oracle = plus[(m, 0)].norm_sqr();
            let analytic = squeezed_vacuum_pmf(2.0 * g, m).unwrap();
            worst = worst.max((oracle - analytic).abs());
            worst_sign = worst_sign.max((plus[(m, 0)].norm_sqr() - minus[(m, 0)].norm_sqr()).abs());
            if m % 2 == 1 {
                odd_mass += analytic + oracle;
            }
        }
    }
    conclude(
        "criterion-06",
        "squeezed-vacuum pmf matches the dense oracle under the r=2g convention",
        worst <= 1e-9 && odd_mass <= 1e-10 && worst_sign <= 1e-12,
        format!(
            "worst pmf deviation {worst:.3e}, odd mass {odd_mass:.3e}, sign asymmetry {worst_sign:.3e}"
        ),
    );
}

#[test]
fn criterion_07_sampling_consistency() {
    let shots = 100_000usize;
    let mut worst_tv = 0.0f64;

    let scenarios: Vec<(&str, StateVector)> = vec![
        ("no-loss", {
            let info = make_layout(&[4], &[]).unwrap();
            let input = StateVector::random(info, 1);
            decode_pipeline(
                &input,
                &[40],
                &CodingSpec::pcs(vec![vec![1.0]], 0.4),
                &LossEvent::None,
            )
            .unwrap()
            .state
        }),
        ("ancilla-loss", {
            let info = make_layout(&[3], &[]).unwrap();
            let mut input = StateVector::zero(info);
            let s = cr(1.0 / 2.0f64.sqrt());
            input.amps_mut()[1] = s;
            input.amps_mut()[2] = s;
            decode_pipeline(
                &input,
                &[60],
                &CodingSpec::ecs(vec![vec![0.3]]),
                &LossEvent::uniform_ancilla(1),
            )
            .unwrap()
            .state
        }),
        ("info-loss", {
            let info = make_layout(&[2], &[]).unwrap();
            let input = basis_state(&info, &[1]).unwrap();
            decode_pipeline(
                &input,
                &[100],
                &CodingSpec::pcs(vec![vec![1.0]], 0.3),
                &LossEvent::uniform_info(1),
            )
            .unwrap()
            .state
        }),
    ];

    for (name, state) in &scenarios {
        let exact = count_distribution(state).unwrap();
        let shots_drawn = sample_counts(state, 2026, shots).unwrap();
        let layout = state.layout();
        let mut empirical = vec![0usize; exact.len()];
        for shot in &shots_drawn {
            empirical[layout.anc_flatten(shot).unwrap()] += 1;
        }
        let tv: f64 = exact
            .iter()
            .enumerate()
            .map(|(i, r)| (empirical[i] as f64 / shots as f64 - r.probability).abs())
            .sum::<f64>()
            / 2.0;
        println!("  {name}: total-variation distance {tv:.5}");
        worst_tv = worst_tv.max(tv);
    }
    conclude(
        "criterion-07",
        "seeded sampling tracks the exact distribution (1e5 shots)",
        worst_tv <= 0.01,
        format!("worst TV distance {worst_tv:.5}"),
    );
}

#[test]
fn criterion_08_mediated_pcs_synthesis() {
    use herald_core::synthesis::{mediated_pcs, MediatedProtocolSpec};
    let info = make_layout(&[6], &[]).unwrap();
    let mut worst_purity = 1.0f64;
    let mut worst_fid = 1.0f64;
    for &strength in &[0.2, 0.4] {
        for seed in 0..10u64 {
            let input = StateVector::random(info.clone(), 5_000 + seed);
            let spec = MediatedProtocolSpec {
                strength,
                mu: 1.7,
                kappa: 0.8,
                qubit_init: 1,
                anc_dim: 60,
            };
            let out = mediated_pcs(&spec, &input).unwrap();
            worst_purity = worst_purity.min(out.qubit_purity);
            worst_fid = worst_fid.min(out.field_fidelity);
        }
    }
    // encode then decode through the σx = −1 mediator returns the input
    let mut worst_round = 1.0f64;
    for seed in 0..3u64 {
        let input = StateVector::random(info.clone(), 6_000 + seed);
        let spec = MediatedProtocolSpec {
            strength: 0.4,
            mu: 1.7,
            kappa: 0.8,
            qubit_init: 1,
            anc_dim: 60,
        };
        let enc = mediated_pcs(&spec, &input).unwrap();
        let dec = mediated_pcs(
            &MediatedProtocolSpec {
                qubit_init: -1,
                ..spec
            },
            &enc.field_state,
        )
        .unwrap();
        let expect = input
            .normalized()
            .unwrap()
            .0
            .with_vacuum_ancilla(&[60])
            .unwrap();
        worst_round = worst_round.min(fidelity(&dec.field_state, &expect).unwrap());
    }
    conclude(
        "criterion-08",
        "mediated parity gate: disentangled mediator, field matches the direct unitary",
        worst_purity >= 1.0 - 1e-9 && worst_fid >= 1.0 - 1e-9 && worst_round >= 1.0 - 1e-9,
        format!(
            "worst purity 1-{:.2e}, worst field fidelity 1-{:.2e}, worst encode-decode 1-{:.2e}",
            1.0 - worst_purity,
            1.0 - worst_fid,
            1.0 - worst_round
        ),
    );
}

#[test]
fn criterion_09_conjugation_machinery() {
    // (a) dressed seed: conjugation route vs direct generator exponential at
    // truncation 80. The interior window must keep the gate's spreading
    // inside the truncation: at λ₁ = μ₁ = 0.02 a 15% window certifies below
    // 1e-6; the 60% window is reported alongside for transparency.
    let layout = make_layout(&[80], &[80]).unwrap();
    let cert = cubic_dress_certificate(&layout, 0.02, 0.02, 0.15).unwrap();
    println!(
        "  dressing certificate: residual {:.3e} at window {:?} / truncation {:?}",
        cert.residual, cert.window, cert.truncation
    );
    let wide = cubic_dress_certificate(&layout, 0.02, 0.02, 0.6).unwrap();
    println!(
        "  (reported, not asserted) 60%-window residual {:.3e} — the seed gate spreads interior states past the truncation there",
        wide.residual
    );

    // (b) conjugation-identity residuals for the chain's gate pairs
    let gen = two_mode_seed_generator(&layout).unwrap();
    let ca = herald_core::gates::cubic_phase_gate(&layout, 0, 0.02).unwrap();
    let cb = herald_core::gates::cubic_phase_gate(&layout, 1, 0.02).unwrap();
    let both = Operator::product(vec![ca.clone(), cb.clone()]).unwrap();
    let mut worst_pair = 0.0f64;
    for (tag, v) in [("cubic_a", &ca), ("cubic_b", &cb), ("cubic_both", &both)] {
        let r = conjugation_identity_check_windowed(&gen, v, 0.3).unwrap();
        println!("  identity check {tag}: residual {r:.3e}");
        worst_pair = worst_pair.max(r);
    }

    // (c) rank-invariance harness: 100 random forms and affine-symplectic
    // maps, exact coefficient arithmetic
    let mut draw = 99u64;
    let mut rank_ok = true;
    for _ in 0..100 {
        let mut form = QuadraticForm {
            qq: 2.0 * random_unit(&mut draw) - 1.0,
            pp: 2.0 * random_unit(&mut draw) - 1.0,
            qp: 2.0 * random_unit(&mut draw) - 1.0,
            q: 2.0 * random_unit(&mut draw) - 1.0,
            p: 2.0 * random_unit(&mut draw) - 1.0,
            c: 2.0 * random_unit(&mut draw) - 1.0,
        };
        if random_unit(&mut draw) < 0.4 {
            form.pp = 0.0;
            form.qp = 0.0;
        }
        let map = AffineSymplectic::from_q2(2.0 * random_unit(&mut draw) - 1.0)
            .compose(&AffineSymplectic::from_p2(
                2.0 * random_unit(&mut draw) - 1.0,
            ))
            .compose(&AffineSymplectic::from_linear(
                2.0 * random_unit(&mut draw) - 1.0,
                2.0 * random_unit(&mut draw) - 1.0,
            ));
        rank_ok &= form.quadratic_rank(1e-9) == map.apply_to_form(&form).quadratic_rank(1e-9);
    }

    // (d) the Gaussian-reduction solver emits a reproducible certificate;
    // the residual is recorded, not thresholded (the rank obstruction makes
    // an exact solution impossible)
    let target_a = QuadraticForm::quadratic(-0.15, -0.15, 0.0);
    let target_b = QuadraticForm::quadratic(1.0, -1.0, 0.0);
    let dressed = QuadraticForm {
        qq: -0.06,
        q: 1.0,
        p: 1.0,
        ..QuadraticForm::ZERO
    };
    let opts = ReductionOptions::default();
    let first = gaussian_reduction_solve((&target_a, &target_b), (&dressed, &dressed), &opts);
    let second = gaussian_reduction_solve((&target_a, &target_b), (&dressed, &dressed), &opts);
    let reproducible = first.certificate.parameters == second.certificate.parameters
        && first.certificate.residual == second.certificate.residual;
    println!(
        "  gaussian-reduction certificate: residual {:.6e} (recorded; rank-1 dressed vs rank-2 target)",
        first.certificate.residual
    );

    conclude(
        "criterion-09",
        "conjugation machinery, rank harness, reproducible reduction certificate",
        cert.residual <= 1e-6 && worst_pair <= 1e-8 && rank_ok && reproducible,
        format!(
            "dressing residual {:.3e}, worst identity residual {:.3e}, rank harness {}, solver reproducible {}",
            cert.residual, worst_pair, rank_ok, reproducible
        ),
    );
}

#[test]
fn criterion_10_parity_identities() {
    // Π² = I exactly
    let layout = make_layout(&[3, 4], &[2]).unwrap();
    let pi = parity_op(&layout, &[1.0, 1.0]).unwrap();
    let squared = Operator::product(vec![pi.clone(), pi.clone()])
        .unwrap()
        .to_dense()
        .unwrap();
    let n = layout.total_dim();
    let mut exact = true;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { cr(1.0) } else { cr(0.0) };
            exact &= squared[(i, j)] == expect;
        }
    }

    // sinh(2ΓΠ̂)|Ψ⟩ = sinh(2Γ)·Π̂|Ψ⟩, series route vs direct
    let strength = 0.41f64;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let psi = StateVector::random(layout.clone(), 12_000 + seed);
        let pi_psi = pi.apply(&psi).unwrap();
        let mut series = StateVector::zero(layout.clone());
        let mut term = pi_psi.clone().scaled(cr(2.0 * strength));
        let mut k = 1usize;
        loop {
            series = series.add(&term).unwrap();
            if term.norm() < 1e-18 || k > 80 {
                break;
            }
            let factor = (2.0 * strength).powi(2) / ((k + 1) as f64 * (k + 2) as f64);
            term = term.scaled(cr(factor));
            k += 2;
        }
        let direct = pi_psi.scaled(cr((2.0 * strength).sinh()));
        let diff: f64 = series
            .amps()
            .iter()
            .zip(direct.amps().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    conclude(
        "criterion-10",
        "parity involution and the sinh-parity reduction",
        exact && worst <= 1e-12,
        format!("parity squared exact: {exact}, worst sinh deviation {worst:.3e}"),
    );
}
