//! Acceptance suite: every reference number the project promises to
//! reproduce, one pass/fail line per criterion.
//!
//! Criteria 1-2 and 9-10 are instant; 3-6 run the finite-time convergence
//! ladders up to 1024 mesh points; 7 runs dense eigensolves up to a
//! 1536 x 1536 one-step matrix; 8 drives the stationary ladders (the
//! U = 0.0005 ladder includes the multi-million-step 512-point run).
//! The whole suite is sized for an ordinary `cargo test --workspace`.

use d1q3_core::equiv_pde::{abcd_recursion, closed_form_alpha, closed_form_beta, OperatorParams};
use d1q3_core::harness::{fit_convergence_order, run_study, table_preset, StudyConfig};
use d1q3_core::lbm::{lbm_step, EquilibriumSpec};
use d1q3_core::modes::{build_iteration_matrix, leading_nontrivial_eigen};
use d1q3_core::params::relaxation_rate;
use d1q3_core::spectral::{
    assemble_a_infinity, solve_stationary, step_taylor5, Basis, BasisKind, OperatorMatrix, Space,
    SpectralState,
};
use d1q3_core::{
    cubic_sigma_prime, pde_coefficients, InitOrder, ParticleField, ProfileSpec, SchemeParams,
    VelocityProfile,
};
use rand::{Rng, SeedableRng};

fn pass(criterion: &str, detail: String) {
    println!("PASS {criterion}: {detail}");
}

fn check(criterion: &str, ok: bool, detail: String) {
    if ok {
        pass(criterion, detail);
    } else {
        println!("FAIL {criterion}: {detail}");
        panic!("{criterion}: {detail}");
    }
}

fn fitted(report: &d1q3_core::harness::ConvergenceReport) -> Vec<f64> {
    report.fitted.iter().map(|f| f.expect("fit must exist")).collect()
}

#[test]
fn criterion_01_cubic_parameter() {
    let sigma_prime = cubic_sigma_prime(0.05, -1.0, 0.01).unwrap();
    let s_prime = relaxation_rate(sigma_prime);
    check(
        "criterion 1 (cubic parameter)",
        (sigma_prime - 0.072425).abs() <= 1e-6 && (s_prime - 1.7469537493994847).abs() <= 1e-12,
        format!("sigma'_c = {sigma_prime:.6}, s' = {s_prime:.16}"),
    );
}

#[test]
fn criterion_02_operator_recursion_oracle() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = OperatorParams {
            lambda: rng.gen_range(0.5..2.0),
            u_amp: rng.gen_range(-0.5..0.5),
            alpha: rng.gen_range(-2.0..0.9),
            sigma: rng.gen_range(0.01..1.0),
            sigma_prime: rng.gen_range(0.01..1.0),
        };
        let table = abcd_recursion(&p);
        for order in 1..=4 {
            let hard = closed_form_alpha(order, &p);
            worst = worst.max(table.alpha[order - 1].max_abs_diff(&hard) / hard.max_coeff());
        }
        for j in 1..=3 {
            let hard = closed_form_beta(j, &p);
            let got = &table.beta[j - 1];
            let scale = hard.j.max_coeff().max(hard.e.max_coeff());
            worst = worst.max(got.j.max_abs_diff(&hard.j) / scale);
            worst = worst.max(got.e.max_abs_diff(&hard.e) / scale);
        }
    }
    check(
        "criterion 2 (recursion oracle)",
        worst <= 1e-12,
        format!("max relative coefficient deviation {worst:.3e} over 20 tuples"),
    );
}

#[test]
fn criterion_03_constant_field_second_order_init_ladder() {
    let report = run_study(&table_preset(3).unwrap());
    let orders = fitted(&report);
    let want = [1.00, 2.02, 3.18, 3.99];
    let orders_ok = orders.iter().zip(&want).all(|(o, w)| (o - w).abs() <= 0.05);
    let last = *report.cells[4][3].as_ref().unwrap();
    let cell_ok = (last - 9.798e-12).abs() / 9.798e-12 <= 0.10;
    check(
        "criterion 3 (second-order-init ladder)",
        orders_ok && cell_ok,
        format!(
            "fitted orders {:?} (want {want:?} +/- 0.05), N=1024 order-4 error {last:.4e} (want 9.798e-12 +/- 10%)",
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_04_equilibrium_init_order_ceiling() {
    let report = run_study(&table_preset(1).unwrap());
    let orders = fitted(&report);
    let ok = orders[1..].iter().all(|o| (o - 1.99).abs() <= 0.05);
    check(
        "criterion 4 (equilibrium-init order ceiling)",
        ok,
        format!(
            "orders 2-4 columns fitted {:?}, want 1.99 +/- 0.05 each",
            orders[1..].iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_05_cubic_relaxation_third_order_jump() {
    let report = run_study(&table_preset(6).unwrap());
    let orders = fitted(&report);
    // Order-2 and order-3 columns coincide cell for cell: 1e-12 relative,
    // floored at 1e-15 absolute where the cells themselves sit below what
    // f64 density fields resolve (the rounded cubic root leaves a ~1e-17
    // residual in the annihilated coefficient).
    let mut max_gap = 0.0f64;
    let mut ok = true;
    for row in &report.cells {
        let a = row[1].as_ref().unwrap();
        let b = row[2].as_ref().unwrap();
        let gap = (a - b).abs();
        max_gap = max_gap.max(gap);
        ok &= gap <= (1e-12 * a.abs()).max(1e-15);
    }
    ok &= (orders[1] - 3.11).abs() <= 0.1 && (orders[2] - 3.11).abs() <= 0.1;
    check(
        "criterion 5 (cubic third-order jump)",
        ok,
        format!(
            "order-2 column fits {:.2}, order-3 fits {:.2} (want 3.11 +/- 0.1), max absolute column gap {max_gap:.3e}",
            orders[1], orders[2]
        ),
    );
}

#[test]
fn criterion_06_cosine_field_ladder() {
    let report = run_study(&table_preset(9).unwrap());
    let orders = fitted(&report);
    let want = [1.00, 2.19, 3.08, 4.03];
    let ok = orders.iter().zip(&want).all(|(o, w)| (o - w).abs() <= 0.1);
    check(
        "criterion 6 (cosine-field ladder)",
        ok,
        format!(
            "fitted orders {:?}, want {want:?} +/- 0.1",
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_07_eigenmode_scaling() {
    let eq = EquilibriumSpec { profile: VelocityProfile::Cosine, alpha: -1.0 };
    let gamma = |u_amp: f64, n: usize| -> f64 {
        let p = SchemeParams::new(1.0, u_amp, -1.0, 1.5, 1.2, n, 1.0, 1.0).unwrap();
        let a = build_iteration_matrix(&p, &eq, None).unwrap();
        leading_nontrivial_eigen(&a, &p, &eq).unwrap().gamma_scaled
    };
    let g0 = gamma(0.0, 64);
    let mut detail = format!("Gamma(U=0, N=64) = {g0:.8} (want 1.00053560 +/- 1e-4)");
    let mut ok = (g0 - 1.00053560).abs() <= 1e-4;
    let want = [(64usize, 8.62260312), (128, 17.81972445), (256, 36.16622885), (512, 72.84095421)];
    for (n, w) in want {
        let g = gamma(0.05, n);
        detail.push_str(&format!("; Gamma(U=0.05, N={n}) = {g:.8} (want {w} +/- 0.1%)"));
        ok &= (g - w).abs() / w <= 1e-3;
    }
    check("criterion 7 (eigenmode scaling)", ok, detail);
}

#[test]
fn criterion_08_stationary_fourth_order_column() {
    // full ladder at U = 0.0005, including the slow 512-point run
    let report = run_study(&table_preset(11).unwrap());
    let want = [6.935e-8, 1.113e-8, 2.067e-9, 4.836e-10];
    let mut detail = String::new();
    let mut ok = true;
    let mut points = Vec::new();
    for (i, &w) in want.iter().enumerate() {
        let got = *report.cells[i][3].as_ref().unwrap();
        points.push((report.config.n_list[i], got));
        detail.push_str(&format!("err[N={}] = {got:.3e} (want {w:.3e} +/- 15%); ", report.config.n_list[i]));
        ok &= (got - w).abs() / w <= 0.15;
    }
    let order = fit_convergence_order(&points).unwrap();
    detail.push_str(&format!("fitted order {order:.2} (want 2.39 +/- 0.15)"));
    ok &= (order - 2.39).abs() <= 0.15;

    // default N <= 256 subsets at the two faster velocities
    for (preset, want_order, tol) in [(12usize, 1.58, 0.2), (13, 1.46, 0.2)] {
        let report = run_study(&table_preset(preset).unwrap());
        let order = report.fitted[3].expect("fit");
        detail.push_str(&format!("; U={} order-4 column fits {order:.2} (want {want_order} +/- {tol})",
            report.config.u_amp));
        ok &= (order - want_order).abs() <= tol;
    }
    check("criterion 8 (stationary fourth-order column)", ok, detail);
}

#[test]
fn criterion_09_analytic_stationary_profile() {
    let p = SchemeParams::new(1.0, 0.005, -1.0, 1.5, 1.2, 64, 1.0, 1.0).unwrap();
    let c = pde_coefficients(&p);
    let a_inf = assemble_a_infinity(1, &c, 30, VelocityProfile::Cosine, &p);
    let state = solve_stationary(&a_inf, p.length).unwrap();
    let amp = p.lambda * p.u_amp / (p.k * c.mu);
    let nq = 200_000;
    let mean: f64 = (0..nq)
        .map(|i| (amp * (p.k * (i as f64 + 0.5) / nq as f64 * p.length).sin()).exp())
        .sum::<f64>()
        / nq as f64;
    let norm = 1.0 / (p.length * mean);
    let mut worst = 0.0f64;
    for i in 0..2000 {
        let x = i as f64 / 2000.0 * p.length;
        let want = norm * (amp * (p.k * x).sin()).exp();
        worst = worst.max((state.eval(x) - want).abs());
    }
    check(
        "criterion 9 (analytic stationary profile)",
        worst <= 1e-8,
        format!("max deviation from the exponential profile {worst:.3e} (want <= 1e-8) at 30 modes"),
    );
}

#[test]
fn criterion_10a_mass_conservation_long_run() {
    let p = SchemeParams::new(1.0, 0.05, -1.0, 1.960784313725, 1.2, 64, 1.0, 1.0).unwrap();
    let eq = EquilibriumSpec { profile: VelocityProfile::Cosine, alpha: -1.0 };
    let f = d1q3_core::lbm::initialize(&ProfileSpec::Sine { amplitude: 1.0 }, InitOrder::Order0, &eq, &p);
    // offset so total mass is nonzero and relative drift is meaningful
    let f = ParticleField {
        f_plus: f.f_plus.iter().map(|v| v + 1.0).collect(),
        f_zero: f.f_zero.iter().map(|v| v + 1.0).collect(),
        f_minus: f.f_minus.iter().map(|v| v + 1.0).collect(),
    };
    let m0 = f.total_mass();
    let mut engine = d1q3_core::lbm::Engine::new(f, eq, p);
    for _ in 0..1_000_000 {
        engine.step();
    }
    let drift = (engine.state().total_mass() - m0).abs() / m0.abs();
    check(
        "criterion 10a (mass conservation, 1e6 steps)",
        drift <= 1e-12,
        format!("relative mass drift {drift:.3e} (want <= 1e-12)"),
    );
}

#[test]
fn criterion_10b_characteristic_round_trip() {
    use d1q3_core::characteristics::{characteristic_position, foot_of_characteristic};
    let p = SchemeParams::new(1.0, 0.005, -1.0, 1.5, 1.2, 128, 1.0, 1.0).unwrap();
    let t_char = p.length / (p.lambda * p.u_amp);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4096);
    let mut worst_scaled = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(0.0..p.length);
        if (p.k * x).cos().abs() < 1e-10 {
            continue;
        }
        let t: f64 = rng.gen_range(0.0..2.0 * t_char);
        let x0 = foot_of_characteristic(x, t, &p);
        let back = characteristic_position(x0, t, &p);
        let d = (back - x).abs().min(p.length - (back - x).abs());
        let stretch = ((p.k * x).cos() / (p.k * x0).cos()).abs();
        let allowed = (1e-12 * p.length).max(1e-15 * stretch * p.length);
        assert!(d < allowed, "round trip {x} -> {x0} -> {back}");
        worst_scaled = worst_scaled.max(d / allowed);
    }
    check(
        "criterion 10b (characteristic round trip)",
        true,
        format!("1000 random points within 1e-12 L (condition-scaled near stagnation); worst ratio {worst_scaled:.2}"),
    );
}

#[test]
fn criterion_10c_taylor5_against_squaring_oracle() {
    fn expm_neg(a: &ndarray::Array2<f64>, dt: f64) -> ndarray::Array2<f64> {
        let n = a.nrows();
        let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * dt * n as f64;
        let s = norm.log2().ceil().max(0.0) as u32 + 8;
        let scaled = a * (-dt / 2f64.powi(s as i32));
        let mut term = ndarray::Array2::<f64>::eye(n);
        let mut acc = ndarray::Array2::<f64>::eye(n);
        for j in 1..=12 {
            term = term.dot(&scaled) / j as f64;
            acc += &term;
        }
        for _ in 0..s {
            acc = acc.dot(&acc);
        }
        acc
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let basis = Basis { kind: BasisKind::Interlaced, modes: 7, k: 1.0 };
    let dt = 1e-2;
    let mut worst_ratio = 0.0f64;
    for _ in 0..10 {
        let mat = ndarray::Array2::from_shape_fn((8, 8), |_| rng.gen_range(-4.0..4.0));
        let a = OperatorMatrix {
            mat: mat.clone(),
            basis,
            domain: Space::Primal,
            codomain: Space::Primal,
            label: "rand".into(),
        };
        let mut state = SpectralState::zeros(basis);
        for c in state.coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let got = step_taylor5(&a, dt, &state);
        let exact = expm_neg(&mat, dt).dot(&ndarray::Array1::from(state.coeffs.clone()));
        let norm1 = (0..8)
            .map(|j| (0..8).map(|i| (mat[[i, j]] * dt).abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let bound = norm1.powi(6) / 720.0 / (1.0 - norm1 / 7.0)
            * state.coeffs.iter().map(|c| c.abs()).sum::<f64>()
            + 1e-14;
        for i in 0..8 {
            let err = (got.coeffs[i] - exact[i]).abs();
            assert!(err <= bound, "taylor5 deviation {err:.3e} above remainder bound {bound:.3e}");
            worst_ratio = worst_ratio.max(err / bound);
        }
    }
    check(
        "criterion 10c (degree-5 stepping vs squaring oracle)",
        true,
        format!("10 random operators within the |A dt|^6/720 remainder bound; worst ratio {worst_ratio:.2}"),
    );
}

#[test]
fn criterion_10d_commutator_identity() {
    // matrix commutator [dx, du] equals multiplication-then-derivative of
    // the velocity gradient on all but the top two truncation modes
    let modes = 30;
    let k = 2.0 * std::f64::consts::PI;
    let u = 0.05;
    let basis = Basis { kind: BasisKind::Interlaced, modes, k };
    let du = d1q3_core::spectral::word_matrix(
        &[d1q3_core::spectral::Factor::Dx, d1q3_core::spectral::Factor::MulU],
        basis,
        u,
    );
    // dx as maps between the two interlaced spaces
    let dx_p = {
        let mut a = ndarray::Array2::zeros((modes + 1, modes + 1));
        for m in 1..=modes {
            a[[m, m]] = if m % 2 == 1 { m as f64 * k } else { -(m as f64) * k };
        }
        a
    };
    // multiplication by U cos(kx) acting on the dual space
    let mu_dual = {
        let mut a = ndarray::Array2::<f64>::zeros((modes + 1, modes + 1));
        a[[0, 1]] = u / 2.0;
        for m in 1..=modes {
            if m >= 2 {
                a[[m - 1, m]] += u / 2.0;
            }
            if m + 1 <= modes {
                a[[m + 1, m]] += u / 2.0;
            }
        }
        a
    };
    // multiplication by U sin(kx) on the primal space
    let msin = {
        let mut a = ndarray::Array2::<f64>::zeros((modes + 1, modes + 1));
        a[[1, 0]] = u;
        for m in 1..=modes {
            if m % 2 == 1 {
                if m == 1 {
                    a[[0, 1]] += u / 2.0;
                } else {
                    a[[m - 1, m]] += u / 2.0;
                }
                if m + 1 <= modes {
                    a[[m + 1, m]] -= u / 2.0;
                }
            } else {
                if m + 1 <= modes {
                    a[[m + 1, m]] += u / 2.0;
                }
                a[[m - 1, m]] -= u / 2.0;
            }
        }
        a
    };
    let dx_du = dx_p.dot(&du.mat);
    let du_dx = dx_p.dot(&mu_dual.dot(&dx_p));
    let rhs = dx_p.dot(&msin) * (-k);
    let comm = &dx_du - &du_dx;
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for col in 0..=modes - 2 {
        for row in 0..=modes {
            worst = worst.max((comm[[row, col]] - rhs[[row, col]]).abs());
        }
    }
    check(
        "criterion 10d (commutator identity)",
        worst <= 1e-12 * scale,
        format!("max deviation {worst:.3e} on resolved modes (scale {scale:.3e})"),
    );
}

#[test]
fn criterion_10e_iteration_matrix_faithfulness() {
    let p = SchemeParams::new(1.0, 0.05, -1.0, 1.5, 1.2, 32, 1.0, 1.0).unwrap();
    let eq = EquilibriumSpec { profile: VelocityProfile::Cosine, alpha: -1.0 };
    let a = build_iteration_matrix(&p, &eq, None).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = ParticleField {
            f_plus: (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            f_zero: (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            f_minus: (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let scale = f
            .f_plus
            .iter()
            .chain(&f.f_zero)
            .chain(&f.f_minus)
            .map(|v| v.abs())
            .fold(0.0f64, f64::max);
        let via = a.apply(&f);
        let direct = lbm_step(&f, &eq, &p);
        for i in 0..32 {
            worst = worst.max((via.f_plus[i] - direct.f_plus[i]).abs() / scale);
            worst = worst.max((via.f_zero[i] - direct.f_zero[i]).abs() / scale);
            worst = worst.max((via.f_minus[i] - direct.f_minus[i]).abs() / scale);
        }
    }
    check(
        "criterion 10e (iteration-matrix faithfulness)",
        worst <= 1e-13,
        format!("max relative deviation {worst:.3e} (want <= 1e-13)"),
    );
}

// ---------------------------------------------------------------------------
// Supplementary ladder properties tied to the same studies.
// ---------------------------------------------------------------------------

#[test]
fn init_order_monotonicity_across_ladders() {
    // per cell, higher initialisation order never hurts (orders >= 2)
    let reports: Vec<_> = [1, 2, 3].iter().map(|&i| run_study(&table_preset(i).unwrap())).collect();
    for row in 0..reports[0].config.n_list.len() {
        for col in 1..4 {
            let e0 = reports[0].cells[row][col].as_ref().unwrap();
            let e1 = reports[1].cells[row][col].as_ref().unwrap();
            let e2 = reports[2].cells[row][col].as_ref().unwrap();
            assert!(e1 <= e0, "init 1 not better at row {row} col {col}: {e1} vs {e0}");
            assert!(e2 <= e1, "init 2 not better at row {row} col {col}: {e2} vs {e1}");
        }
    }
    pass("init-order monotonicity", "errors decrease with initialisation order on every cell".into());
}

#[test]
fn truncation_doubling_is_negligible_at_moderate_mesh() {
    // doubling 30 -> 60 modes changes the finite-time solution at N = 128
    // below 1e-12
    let mut cfg30: StudyConfig = table_preset(9).unwrap();
    cfg30.n_list = vec![128];
    let mut cfg60 = cfg30.clone();
    cfg30.modes = Some(30);
    cfg60.modes = Some(60);
    let r30 = run_study(&cfg30);
    let r60 = run_study(&cfg60);
    for col in 0..4 {
        let a = r30.cells[0][col].as_ref().unwrap();
        let b = r60.cells[0][col].as_ref().unwrap();
        assert!(
            (a - b).abs() <= 1e-12,
            "column {col}: error moved by {:.3e} when doubling modes",
            (a - b).abs()
        );
    }
    pass("truncation adequacy", "30 vs 60 modes agree to 1e-12 at N=128, U=0.05".into());
}
