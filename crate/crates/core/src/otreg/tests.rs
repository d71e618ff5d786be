use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::gradcheck::{central_difference, random_instance, relative_error, run_gradcheck, GradcheckConfig};
use super::*;

fn sm(rows: &[&[f64]]) -> SentenceMatrix {
    let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    SentenceMatrix::from_rows(&v, rows[0].len()).unwrap()
}

fn dense(m: DMatrix<f64>) -> SentenceMatrix {
    SentenceMatrix::new(m).unwrap()
}

// ---- oracles -------------------------------------------------------------

/// Singular values by cyclic one-sided Jacobi rotations, descending.
fn jacobi_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect();
    let n = a.len();
    for _ in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-300 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt().max(1e-300));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a[p].len() {
                    let (x, y) = (a[p][i], a[q][i]);
                    a[p][i] = c * x - s * y;
                    a[q][i] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = a.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Exact OT with uniform marginals: the optimum sits on a permutation matrix.
fn exact_lp(c: &DMatrix<f64>) -> f64 {
    fn rec(c: &DMatrix<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        let n = c.nrows();
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                rec(c, row + 1, used, acc + c[(row, j)], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(c, 0, &mut vec![false; c.nrows()], 0.0, &mut best);
    best / c.nrows() as f64
}

fn seeded_matrix(seed: u64, r: usize, c: usize) -> DMatrix<f64> {
    random_instance(seed, r, c).0.into_inner()
}

fn orthogonal(seed: u64, d: usize) -> DMatrix<f64> {
    seeded_matrix(seed, d, d).qr().q()
}

// ---- cost ----------------------------------------------------------------

#[test]
fn cost_three_four_five() {
    let c = cost_matrix(&sm(&[&[0.0, 0.0]]), &sm(&[&[3.0, 4.0]])).unwrap();
    assert_eq!(c.entries()[(0, 0)], 5.0);
}

#[test]
fn cost_identical_has_zero_diagonal() {
    let m = dense(seeded_matrix(3, 5, 7));
    let c = cost_matrix(&m, &m).unwrap();
    for i in 0..5 {
        assert_eq!(c.entries()[(i, i)], 0.0);
    }
}

#[test]
fn cost_matches_double_loop() {
    let (o, a) = random_instance(11, 4, 8);
    let c = cost_matrix(&o, &a).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..8 {
                let d = o.as_matrix()[(i, k)] - a.as_matrix()[(j, k)];
                s += d * d;
            }
            assert!((c.entries()[(i, j)] - s.sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn cost_rejects_shape_mismatch() {
    let e = cost_matrix(&sm(&[&[0.0, 0.0]]), &sm(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap_err();
    assert!(matches!(e, OtError::Shape(_)));
    let e = cost_matrix(&sm(&[&[0.0, 0.0]]), &sm(&[&[1.0, 0.0, 2.0]])).unwrap_err();
    assert!(matches!(e, OtError::Shape(_)));
}

#[test]
fn ground_cost_rejects_small_exponent() {
    let m = sm(&[&[1.0]]);
    assert!(matches!(ground_cost(&m, &m, 0.5), Err(OtError::InvalidParameter(_))));
}

// ---- sinkhorn ------------------------------------------------------------

#[test]
fn sinkhorn_single_token() {
    let c = CostMatrix::from_entries(DMatrix::from_element(1, 1, 0.0)).unwrap();
    let one = DVector::from_element(1, 1.0);
    let plan = sinkhorn(&c, &one, &one, 0.1, 100, 1e-12).unwrap();
    assert!((plan.plan[(0, 0)] - 1.0).abs() < 1e-15);
    let m = sm(&[&[0.3, 0.4]]);
    let cost = cost_matrix(&m, &m).unwrap();
    let plan = sinkhorn(&cost, &one, &one, 0.1, 100, 1e-12).unwrap();
    assert_eq!(ot_loss(&plan, &cost, &m, &m).unwrap().0, 0.0);
}

/// Symmetric 2x2 fixed point solved by bisection on `p`: the plan must be a
/// scaling of `K`, so `p² / (0.5 − p)² = exp(2/ε)`.
fn two_by_two_oracle(eps: f64) -> f64 {
    let target = 2.0 / eps;
    let (mut lo, mut hi) = (0.25f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = 2.0 * (mid.ln() - (0.5 - mid).ln());
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn sinkhorn_two_by_two_closed_form() {
    for eps in [0.1, 0.5, 1.0] {
        let c = CostMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let h = uniform_marginal(2);
        let plan = sinkhorn(&c, &h, &h, eps, 1000, 1e-14).unwrap();
        let p = two_by_two_oracle(eps);
        let closed = 0.5 * (1.0 / eps).exp() / (1.0 + (1.0 / eps).exp());
        assert!((p - closed).abs() < 1e-14);
        assert!((plan.plan[(0, 0)] - p).abs() < 1e-8, "eps={eps}");
        assert!((plan.plan[(1, 1)] - p).abs() < 1e-8);
        assert!((plan.plan[(0, 1)] - (0.5 - p)).abs() < 1e-8);
        assert!((plan.plan[(1, 0)] - (0.5 - p)).abs() < 1e-8);
        let o = sm(&[&[0.0], &[1.0]]);
        let loss: f64 = plan.plan.iter().zip(c.entries().iter()).map(|(a, b)| a * b).sum();
        assert!((loss - 2.0 * (0.5 - p)).abs() < 1e-8);
        // same problem through real sentences: tokens 0 and 1 on a line
        let cost = cost_matrix(&o, &o).unwrap();
        let plan = sinkhorn(&cost, &h, &h, eps, 1000, 1e-14).unwrap();
        let (l, _) = ot_loss(&plan, &cost, &o, &o).unwrap();
        assert!((l - 2.0 * (0.5 - p)).abs() < 1e-8);
    }
}

#[test]
fn sinkhorn_plan_is_scaled_kernel() {
    let (o, a) = random_instance(5, 6, 3);
    let cost = cost_matrix(&o, &a).unwrap();
    let h = uniform_marginal(6);
    let plan = sinkhorn(&cost, &h, &h, 0.1, 1000, 1e-9).unwrap();
    let (u, v) = (plan.u(), plan.v());
    for i in 0..6 {
        for j in 0..6 {
            assert!((plan.plan[(i, j)] - u[i] * plan.kernel[(i, j)] * v[j]).abs() <= 1e-10);
            assert!((0.0..=1.0).contains(&plan.plan[(i, j)]));
        }
    }
}

#[test]
fn sinkhorn_switches_to_log_domain() {
    let (o, a) = random_instance(8, 4, 5);
    let cost = cost_matrix(&o, &a).unwrap();
    let h = uniform_marginal(4);
    let plan = sinkhorn(&cost, &h, &h, 0.001, 20_000, 1e-9).unwrap();
    assert!(plan.log_domain);
    // small ε converges sublinearly; the error still shrinks with the budget
    let short = sinkhorn(&cost, &h, &h, 0.001, 2_000, 1e-9).unwrap();
    assert!(plan.marginal_error < short.marginal_error);
    assert!(plan.marginal_error <= 1e-5);
    assert!(plan.plan.iter().all(|p| p.is_finite() && *p >= 0.0));
}

#[test]
fn sinkhorn_reports_non_convergence() {
    let (o, a) = random_instance(9, 5, 5);
    let cost = cost_matrix(&o, &a).unwrap();
    let h = uniform_marginal(5);
    let plan = sinkhorn(&cost, &h, &h, 0.01, 1, 1e-15).unwrap();
    assert_eq!(plan.iterations_used, 1);
    assert!(!plan.converged);
    assert!((plan.marginal_error - marginal_error(&plan.plan, &h, &h)).abs() == 0.0);
}

#[test]
fn sinkhorn_rejects_bad_inputs() {
    let c = CostMatrix::from_entries(DMatrix::from_element(2, 2, 1.0)).unwrap();
    let h = uniform_marginal(2);
    let zero = DVector::from_element(2, 0.0);
    assert!(matches!(sinkhorn(&c, &zero, &h, 0.1, 10, 1e-9), Err(OtError::ZeroMass(_))));
    assert!(sinkhorn(&c, &h, &h, 0.0, 10, 1e-9).is_err());
    assert!(sinkhorn(&c, &DVector::from_element(3, 1.0 / 3.0), &h, 0.1, 10, 1e-9).is_err());
    assert!(sinkhorn(&c, &DVector::from_vec(vec![0.7, 0.7]), &h, 0.1, 10, 1e-9).is_err());
}

#[test]
fn sinkhorn_handles_sparse_marginal() {
    let c = CostMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let a = DVector::from_vec(vec![1.0, 0.0]);
    let b = uniform_marginal(2);
    let plan = sinkhorn(&c, &a, &b, 0.1, 1000, 1e-12).unwrap();
    assert!(plan.converged);
    assert!((plan.plan[(0, 0)] - 0.5).abs() < 1e-12);
    assert_eq!(plan.plan[(1, 0)], 0.0);
}

#[test]
fn ot_loss_is_monotone_in_epsilon_and_bounded_by_lp() {
    for seed in 0..10u64 {
        for n in 2..=5 {
            let (o, a) = random_instance(1000 + seed * 10 + n as u64, n, 3);
            let cost = cost_matrix(&o, &a).unwrap();
            let h = uniform_marginal(n);
            let lp = exact_lp(cost.entries());
            let max_c = cost.entries().amax();
            let (mut prev, mut prev_slack) = (f64::NEG_INFINITY, 0.0);
            for eps in [0.001, 0.01, 0.1, 1.0] {
                let plan = sinkhorn(&cost, &h, &h, eps, 100_000, 1e-10).unwrap();
                assert!(plan.marginal_error <= 1e-5, "seed {seed} n {n} eps {eps}");
                let (l, _) = ot_loss(&plan, &cost, &o, &a).unwrap();
                // an unconverged plan can sit outside the polytope by its marginal error
                let slack = n as f64 * plan.marginal_error * max_c + 1e-12;
                assert!(l >= lp - slack);
                assert!(l >= prev - slack - prev_slack, "seed {seed} n {n} eps {eps}: {l} < {prev}");
                if eps == 0.001 {
                    assert!((l - lp).abs() <= 0.01 * lp, "seed {seed} n {n}: {l} vs {lp}");
                }
                prev = l;
                prev_slack = slack;
            }
        }
    }
}

#[test]
fn ot_gradient_matches_finite_differences() {
    for seed in 0..10u64 {
        let (o, a) = random_instance(seed, 3, 4);
        let cost = cost_matrix(&o, &a).unwrap();
        let h = uniform_marginal(3);
        let plan = sinkhorn(&cost, &h, &h, 0.1, 1000, 1e-12).unwrap();
        let (_, g) = ot_loss(&plan, &cost, &o, &a).unwrap();
        let f = |m: &DMatrix<f64>| {
            let c = cost_matrix(&o, &dense(m.clone())).unwrap();
            plan.plan.iter().zip(c.entries().iter()).map(|(p, c)| p * c).sum::<f64>()
        };
        let fd = central_difference(f, a.as_matrix(), 1e-5);
        assert!(relative_error(&g, &fd) <= 1e-5, "seed {seed}");
    }
}

#[test]
fn ot_gradient_general_exponent() {
    let (o, a) = random_instance(77, 4, 3);
    let cost = ground_cost(&o, &a, 2.0).unwrap();
    let h = uniform_marginal(4);
    let plan = sinkhorn(&cost, &h, &h, 0.5, 1000, 1e-12).unwrap();
    let (_, g) = ot_loss(&plan, &cost, &o, &a).unwrap();
    let f = |m: &DMatrix<f64>| {
        let c = ground_cost(&o, &dense(m.clone()), 2.0).unwrap();
        plan.plan.iter().zip(c.entries().iter()).map(|(p, c)| p * c).sum::<f64>()
    };
    let fd = central_difference(f, a.as_matrix(), 1e-5);
    assert!(relative_error(&g, &fd) <= 1e-6);
}

// ---- procrustes ----------------------------------------------------------

#[test]
fn procrustes_identity_when_equal() {
    let o = dense(seeded_matrix(21, 8, 4));
    let p = procrustes_map(&o, &o).unwrap();
    assert!((&p.w - DMatrix::identity(4, 4)).amax() < 1e-10);
    let doubled = dense(o.as_matrix() * 2.0);
    let p2 = procrustes_map(&o, &doubled).unwrap();
    assert!((&p2.w - DMatrix::identity(4, 4)).amax() < 1e-10);
}

#[test]
fn procrustes_recovers_rotation() {
    for seed in 0..20u64 {
        let o = dense(seeded_matrix(seed, 10, 5));
        let r = orthogonal(seed + 500, 5);
        let aug = dense(o.as_matrix() * &r);
        let p = procrustes_map(&o, &aug).unwrap();
        assert!((aug.as_matrix() * &p.w - o.as_matrix()).norm() <= 1e-8);
        assert!((p.w.transpose() * &p.w - DMatrix::identity(5, 5)).amax() <= 1e-10);
        for c in [0.5, 2.0, 10.0] {
            let scaled = procrustes_map(&o, &dense(aug.as_matrix() * c)).unwrap();
            assert!((&scaled.w - &p.w).amax() <= 1e-10);
        }
    }
}

#[test]
fn procrustes_maximizes_trace() {
    let (o, a) = random_instance(31, 6, 3);
    let p = procrustes_map(&o, &a).unwrap();
    let m = a.as_matrix().tr_mul(o.as_matrix());
    let best = (p.w.transpose() * &m).trace();
    for s in 0..50 {
        let q = orthogonal(900 + s, 3);
        assert!((q.transpose() * &m).trace() <= best + 1e-10);
    }
    assert!((best - p.singular_values.sum()).abs() < 1e-10);
    let sv = p.singular_values.as_slice();
    assert!(sv.windows(2).all(|w| w[0] >= w[1]));
}

// ---- eigen shrinkage -----------------------------------------------------

#[test]
fn eig_value_all_ones() {
    let v = eig_shrinkage_value(&[1.0; 5], 3, 0.001).unwrap();
    assert!((v - -0.003).abs() < 1e-15);
    assert!(eig_shrinkage_value(&[1.0; 2], 3, 0.001).is_err());
    assert!(eig_shrinkage_value(&[1.0; 5], 3, 0.0).is_err());
}

#[test]
fn eig_value_orthogonal_cross_covariance() {
    // orig = I, aug = R: M = Rᵀ is orthogonal, so every σ is 1
    let r = orthogonal(44, 4);
    let p = procrustes_map(&dense(DMatrix::identity(4, 4)), &dense(r)).unwrap();
    let v = eig_shrinkage_value(p.singular_values.as_slice(), 3, 0.001).unwrap();
    assert!((v - -0.003).abs() < 1e-12);
}

#[test]
fn eig_value_matches_jacobi_oracle() {
    for seed in 0..10u64 {
        let (o, a) = random_instance(seed, 4, 4);
        let p = procrustes_map(&o, &a).unwrap();
        let m = a.as_matrix().tr_mul(o.as_matrix());
        let oracle = jacobi_singular_values(&m);
        for (x, y) in p.singular_values.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-10);
        }
        let want = -0.001 * (oracle[2] * oracle[2] + oracle[3] * oracle[3]);
        let got = eig_shrinkage_value(p.singular_values.as_slice(), 2, 0.001).unwrap();
        assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn eig_gradient_matches_finite_differences() {
    let mut checked = 0;
    for seed in 0..10u64 {
        let (o, a) = random_instance(seed, 4, 4);
        let p = procrustes_map(&o, &a).unwrap();
        let e = eig_shrinkage(&p, &o, 2, 0.001).unwrap();
        if e.degenerate {
            continue;
        }
        let f = |m: &DMatrix<f64>| {
            let q = procrustes_map(&o, &dense(m.clone())).unwrap();
            eig_shrinkage_value(q.singular_values.as_slice(), 2, 0.001).unwrap()
        };
        let fd = central_difference(f, a.as_matrix(), 1e-5);
        assert!(relative_error(&e.grad, &fd) <= 1e-4, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 8);
}

#[test]
fn eig_flags_degenerate_spectrum() {
    let o = dense(DMatrix::identity(4, 4));
    let p = procrustes_map(&o, &o).unwrap();
    assert!(eig_shrinkage(&p, &o, 3, 0.001).unwrap().degenerate);
}

#[test]
fn eig_fixed_factors_agree_at_the_expansion_point() {
    let (o, a) = random_instance(3, 4, 6);
    let p = procrustes_map(&o, &a).unwrap();
    let e = eig_shrinkage(&p, &o, 3, 0.001).unwrap();
    let fixed = eig_shrinkage_fixed_factors(&p, &o, a.as_matrix(), 3, 0.001);
    assert!((e.loss - fixed).abs() < 1e-12);
}

// ---- distance shrinkage --------------------------------------------------

#[test]
fn distance_closed_forms() {
    let o = sm(&[&[1.0, 0.0], &[1.0, 0.0]]);
    assert!(distance_shrinkage_loss(&o, &o).unwrap().0.abs() < 1e-15);
    let orth = sm(&[&[0.0, 1.0], &[0.0, 3.0]]);
    assert!((distance_shrinkage_loss(&o, &orth).unwrap().0 - 1.0).abs() < 1e-15);
    let diag = sm(&[&[2.0, 0.0], &[0.0, 2.0]]);
    let want = 1.0 - 1.0 / 2f64.sqrt();
    assert!((distance_shrinkage_loss(&o, &diag).unwrap().0 - want).abs() < 1e-12);
}

#[test]
fn distance_rejects_zero_pool() {
    let o = sm(&[&[1.0, 0.0], &[-1.0, 0.0]]);
    let a = sm(&[&[1.0, 0.0], &[1.0, 0.0]]);
    assert!(matches!(distance_shrinkage_loss(&o, &a), Err(OtError::ZeroVector(_))));
    assert!(matches!(distance_shrinkage_loss(&a, &o), Err(OtError::ZeroVector(_))));
}

#[test]
fn distance_gradient_matches_finite_differences() {
    for seed in 0..10u64 {
        let (o, a) = random_instance(seed, 5, 3);
        let (_, g) = distance_shrinkage_loss(&o, &a).unwrap();
        let f = |m: &DMatrix<f64>| distance_shrinkage_loss(&o, &dense(m.clone())).unwrap().0;
        let fd = central_difference(f, a.as_matrix(), 1e-5);
        assert!(relative_error(&g, &fd) <= 1e-6, "seed {seed}");
    }
}

// ---- composition ---------------------------------------------------------

#[test]
fn defaults_are_the_reference_settings() {
    let p = OtParams::default();
    assert_eq!(p.epsilon, 0.1);
    assert_eq!(p.p, 1.0);
    assert_eq!(p.k, 300);
    assert_eq!(p.eta, 0.001);
    assert_eq!(p.rho, [0.4, 0.2, 0.4]);
    assert_eq!(p.lambda, [0.5, 0.5]);
}

#[test]
fn identical_inputs_breakdown() {
    let o = dense(seeded_matrix(50, 6, 4));
    let params = OtParams { k: 2, ..OtParams::default() };
    let b = affinity_regularization(&o, &o, &params).unwrap();
    // entropic blur leaves a little off-diagonal mass; bounded by ε·ln n above the LP optimum of 0
    assert!(b.loss_ot >= 0.0 && b.loss_ot <= 0.1 * 6f64.ln());
    let sharp = affinity_regularization(&o, &o, &OtParams { epsilon: 0.001, ..params }).unwrap();
    assert!(sharp.loss_ot.abs() < 1e-12);
    assert!(b.loss_dis.abs() < 1e-15);
    let gram = o.as_matrix().tr_mul(o.as_matrix());
    let sv = jacobi_singular_values(&gram);
    let want = -0.001 * (sv[2] * sv[2] + sv[3] * sv[3]);
    assert!((b.loss_eig - want).abs() < 1e-9 * want.abs().max(1.0));
    assert!((sharp.loss_reg - 0.2 * sharp.loss_eig).abs() < 1e-12);
    assert_eq!(b.loss_total, 0.5 * b.loss_reg);
}

#[test]
fn k_is_clamped_to_dimension() {
    let (o, a) = random_instance(4, 3, 5);
    let b = affinity_regularization(&o, &a, &OtParams::default()).unwrap();
    assert_eq!(b.eig_k, 5);
}

#[test]
fn task_loss_recomposes_total() {
    let (o, a) = random_instance(4, 3, 5);
    let b = affinity_regularization(&o, &a, &OtParams::default()).unwrap().with_task_loss(2.0).unwrap();
    assert_eq!(b.loss_task, 2.0);
    assert!((b.loss_total - (0.5 * 2.0 + 0.5 * b.loss_reg)).abs() < 1e-15);
}

#[test]
fn bad_weights_are_rejected() {
    let (o, a) = random_instance(4, 3, 5);
    let params = OtParams { rho: [0.5, 0.5, 0.5], ..OtParams::default() };
    assert!(matches!(affinity_regularization(&o, &a, &params), Err(OtError::WeightSum(_))));
}

#[test]
fn gradcheck_default_suites_pass() {
    let report = run_gradcheck(&GradcheckConfig::default()).unwrap();
    for c in &report.components {
        assert!(c.checked >= 15, "{:?} checked only {}", c.component, c.checked);
        assert!(c.failures.is_empty(), "{:?} max {}", c.component, c.max_rel_error);
    }
    assert!(report.passed());
}

#[test]
fn gradcheck_detects_corruption() {
    let cfg = GradcheckConfig { corrupt: true, seeds: 3, ..GradcheckConfig::default() };
    assert!(!run_gradcheck(&cfg).unwrap().passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn converged_plans_are_feasible(seed in any::<u64>(), n in 1usize..8, eps in 0.05f64..2.0) {
        let (o, a) = random_instance(seed, n, 3);
        let cost = cost_matrix(&o, &a).unwrap();
        let h = uniform_marginal(n);
        let plan = sinkhorn(&cost, &h, &h, eps, 5000, 1e-10).unwrap();
        prop_assert!(plan.marginal_error == marginal_error(&plan.plan, &h, &h));
        if plan.converged {
            prop_assert!(plan.marginal_error <= 1e-10);
        }
        prop_assert!(plan.plan.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn procrustes_is_orthogonal(seed in any::<u64>(), n in 1usize..7, d in 1usize..6) {
        let (o, a) = random_instance(seed, n, d);
        let p = procrustes_map(&o, &a).unwrap();
        prop_assert!((p.w.transpose() * &p.w - DMatrix::identity(d, d)).amax() <= 1e-10);
    }

    #[test]
    fn losses_have_their_ranges(seed in any::<u64>(), n in 1usize..6, d in 1usize..6) {
        let (o, a) = random_instance(seed, n, d);
        let b = affinity_regularization(&o, &a, &OtParams::default()).unwrap();
        prop_assert!(b.loss_ot >= 0.0);
        prop_assert!(b.loss_eig <= 0.0);
        prop_assert!((0.0..=2.0).contains(&b.loss_dis));
        let composed = 0.4 * b.loss_ot + 0.2 * b.loss_eig + 0.4 * b.loss_dis;
        prop_assert!((b.loss_reg - composed).abs() <= 1e-12 * composed.abs().max(1.0));
    }
}

