//! Finite-difference verification of the analytic regularizer gradients.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::*;
use crate::seed::splitmix64;

/// Central differences of `f` at `x`, one entry at a time.
pub fn central_difference<F>(f: F, x: &DMatrix<f64>, step: f64) -> DMatrix<f64>
where
    F: Fn(&DMatrix<f64>) -> f64,
{
    let mut probe = x.clone();
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let orig = probe[(i, j)];
        probe[(i, j)] = orig + step;
        let up = f(&probe);
        probe[(i, j)] = orig - step;
        let down = f(&probe);
        probe[(i, j)] = orig;
        (up - down) / (2.0 * step)
    })
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, 1e-8)` in the Frobenius norm.
pub fn relative_error(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    (analytic - numeric).norm() / analytic.norm().max(numeric.norm()).max(1e-8)
}

/// Standard-normal `(orig, aug)` pair of shape `tokens × dim`.
pub fn random_instance(seed: u64, tokens: usize, dim: usize) -> (SentenceMatrix, SentenceMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> DMatrix<f64> {
        DMatrix::from_fn(tokens, dim, |_, _| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
    };
    let o = draw();
    let a = draw();
    (SentenceMatrix::new(o).expect("finite"), SentenceMatrix::new(a).expect("finite"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Ot,
    Eig,
    Dis,
    Reg,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::Ot, Component::Eig, Component::Dis, Component::Reg];
}

#[derive(Debug, Clone)]
pub struct GradcheckConfig {
    pub seeds: u64,
    pub base_seed: u64,
    pub tokens: usize,
    pub dim: usize,
    /// Penalized singular values for the eigen suites.
    pub k: usize,
    pub step: f64,
    pub threshold: f64,
    pub params: OtParams,
    /// Scales every analytic gradient by 1.01; negative control for the harness.
    pub corrupt: bool,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            seeds: 20,
            base_seed: 0,
            tokens: 4,
            dim: 6,
            k: 3,
            step: 1e-5,
            threshold: 1e-4,
            params: OtParams::default(),
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub component: Component,
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst_seed: Option<u64>,
    pub failures: Vec<u64>,
    /// `(seed, note)` for instances excluded from the check.
    pub skipped: Vec<(u64, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub threshold: f64,
    pub components: Vec<ComponentReport>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.components.iter().all(|c| c.failures.is_empty())
    }
}

enum Outcome {
    Checked(f64),
    Skipped(String),
}

pub fn run_gradcheck(cfg: &GradcheckConfig) -> Result<GradcheckReport, OtError> {
    let mut components = Vec::new();
    for comp in Component::ALL {
        let mut rep = ComponentReport {
            component: comp,
            checked: 0,
            max_rel_error: 0.0,
            worst_seed: None,
            failures: Vec::new(),
            skipped: Vec::new(),
        };
        for s in 0..cfg.seeds {
            let seed = splitmix64(cfg.base_seed.wrapping_add(s));
            match check_one(comp, seed, cfg)? {
                Outcome::Skipped(note) => rep.skipped.push((seed, note)),
                Outcome::Checked(err) => {
                    rep.checked += 1;
                    if err > rep.max_rel_error || rep.worst_seed.is_none() {
                        rep.max_rel_error = err;
                        rep.worst_seed = Some(seed);
                    }
                    if !(err <= cfg.threshold) {
                        rep.failures.push(seed);
                    }
                }
            }
        }
        components.push(rep);
    }
    Ok(GradcheckReport { threshold: cfg.threshold, components })
}

fn check_one(comp: Component, seed: u64, cfg: &GradcheckConfig) -> Result<Outcome, OtError> {
    let (orig, aug) = random_instance(seed, cfg.tokens, cfg.dim);
    let params = OtParams { k: cfg.k, ..cfg.params };
    let bump = if cfg.corrupt { 1.01 } else { 1.0 };
    let as_sentence = |m: &DMatrix<f64>| SentenceMatrix::new(m.clone()).expect("finite probe");
    let x = aug.as_matrix();

    let fixed_plan_ot = |cost: &CostMatrix, plan: &TransportPlan| {
        let plan = plan.plan.clone();
        let p = cost.p();
        let o = orig.as_matrix().clone();
        move |m: &DMatrix<f64>| -> f64 {
            let mut acc = 0.0;
            for i in 0..o.nrows() {
                for j in 0..m.nrows() {
                    acc += plan[(i, j)] * (o.row(i) - m.row(j)).norm().powf(p);
                }
            }
            acc
        }
    };

    let (analytic, numeric) = match comp {
        Component::Ot => {
            let cost = ground_cost(&orig, &aug, params.p)?;
            let marg = uniform_marginal(cfg.tokens);
            let plan = sinkhorn(&cost, &marg, &marg, params.epsilon, params.sinkhorn_max_iter, params.sinkhorn_tol)?;
            let (_, g) = ot_loss(&plan, &cost, &orig, &aug)?;
            (g, central_difference(fixed_plan_ot(&cost, &plan), x, cfg.step))
        }
        Component::Eig => {
            let proc = procrustes_map(&orig, &aug)?;
            let k = params.k.min(proc.singular_values.len());
            let eig = eig_shrinkage(&proc, &orig, k, params.eta)?;
            if eig.degenerate {
                return Ok(Outcome::Skipped("DegenerateSpectrum".into()));
            }
            let f = |m: &DMatrix<f64>| {
                let p = procrustes_map(&orig, &as_sentence(m)).expect("finite probe");
                eig_shrinkage_value(p.singular_values.as_slice(), k, params.eta).expect("valid k")
            };
            (eig.grad, central_difference(f, x, cfg.step))
        }
        Component::Dis => {
            let (_, g) = distance_shrinkage_loss(&orig, &aug)?;
            let f = |m: &DMatrix<f64>| distance_shrinkage_loss(&orig, &as_sentence(m)).expect("nonzero pool").0;
            (g, central_difference(f, x, cfg.step))
        }
        Component::Reg => {
            let br = affinity_regularization(&orig, &aug, &params)?;
            if br.degenerate_spectrum {
                return Ok(Outcome::Skipped("DegenerateSpectrum".into()));
            }
            let cost = ground_cost(&orig, &aug, params.p)?;
            let marg = uniform_marginal(cfg.tokens);
            let plan = sinkhorn(&cost, &marg, &marg, params.epsilon, params.sinkhorn_max_iter, params.sinkhorn_tol)?;
            let ot = fixed_plan_ot(&cost, &plan);
            let proc = procrustes_map(&orig, &aug)?;
            let [r1, r2, r3] = params.rho;
            let f = |m: &DMatrix<f64>| {
                r1 * ot(m)
                    + r2 * eig_shrinkage_fixed_factors(&proc, &orig, m, br.eig_k, params.eta)
                    + r3 * distance_shrinkage_loss(&orig, &as_sentence(m)).expect("nonzero pool").0
            };
            (br.grad_augmented, central_difference(f, x, cfg.step))
        }
    };
    Ok(Outcome::Checked(relative_error(&(analytic * bump), &numeric)))
}
