//! The verification suites. Each suite checks one identity of the calculus
//! over seeded random inputs and reports its maximum residual; each also has
//! a designated planted bug (sign flip, skipped permutation, dropped
//! nilpotent truncation, …) used as a negative control — a suite that cannot
//! detect its bug is not measuring anything.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use fncalc_core::calculus::{
    alternation_associativity_gap, bracket_floor, fn_bracket, graded_jacobi_check, interior,
    interior_hat, lie, pair_square, twisted_pair_square, Connection,
};
use fncalc_core::forms::{
    alternate, check_alternating, check_base_preservation, check_homogeneity, eval_on_real,
    pullback_related, SemiForm, VectorForm,
};
use fncalc_core::microcube::{
    jacobi_expressions, jacobi_residual, Microcube, Permutation, TangentVector,
};
use fncalc_core::oracle::{
    fn_bracket_classical, lie_bracket_classical, VectorField, VectorValuedForm,
};
use fncalc_core::weil::PolyExpr;
use fncalc_core::{factorial, DEFAULT_TOL};

use crate::gen;
use crate::report::SuiteReport;

/// All suite names in report order, one per verified statement.
pub const SUITES: &[&str] = &[
    "map-strong-diff",
    "general-jacobi",
    "form-contracts",
    "perm-strong-diff",
    "interior",
    "interior-naturality",
    "floor-homogeneity",
    "assoc-alternation",
    "antisymmetry",
    "graded-jacobi",
    "fn-naturality",
    "lie-decomposition",
    "lie-naturality",
    "oracle-lie",
    "oracle-fn",
];

/// Human label of each suite's designated planted bug.
pub fn designated_mutation(suite: &str) -> &'static str {
    match suite {
        "map-strong-diff" => "flipped sign of the pushed tangent",
        "general-jacobi" => "flipped sign of the third expression",
        "form-contracts" => "dropped permutation sign in the alternation check",
        "perm-strong-diff" => "skipped the slot permutation on one route",
        "interior" => "unsigned alternation sum",
        "interior-naturality" => "skipped the cube pushforward",
        "floor-homogeneity" => "homogeneity compared against the square of the scale",
        "assoc-alternation" => "flipped sign of one normalization",
        "antisymmetry" => "mis-signed block-swap parity",
        "graded-jacobi" => "mis-signed cyclic prefactor",
        "fn-naturality" => "skipped the cube pushforward",
        "lie-decomposition" => "mis-signed degree prefactor",
        "lie-naturality" => "skipped the cube pushforward",
        "oracle-lie" => "dropped nilpotent truncation (d² = d)",
        "oracle-fn" => "mis-signed antisymmetry prefactor",
        _ => "none",
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] fncalc_core::Error),
}

/// User-facing configuration; unset fields fall back to per-suite defaults.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub name: String,
    pub dim: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub r: Option<usize>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub bound: f64,
    pub poly_degree: u32,
    pub extended: bool,
}

impl SuiteConfig {
    pub fn new(name: &str, seed: u64) -> SuiteConfig {
        SuiteConfig {
            name: name.to_string(),
            dim: None,
            p: None,
            q: None,
            r: None,
            trials: None,
            seed,
            tol: None,
            bound: 1.0,
            poly_degree: 2,
            extended: false,
        }
    }
}

struct Resolved {
    dim: usize,
    trials: u64,
    tol: f64,
    seed: u64,
    bound: f64,
    poly_degree: u32,
    p: Option<usize>,
    q: Option<usize>,
    r: Option<usize>,
}

fn defaults(name: &str) -> Option<(usize, u64, f64)> {
    // (dim, trials, tolerance)
    Some(match name {
        "map-strong-diff" => (2, 200, 1e-9),
        "general-jacobi" => (3, 400, 1e-9),
        "form-contracts" => (3, 40, 1e-10),
        "perm-strong-diff" => (2, 60, 1e-9),
        "interior" => (2, 25, 1e-9),
        "interior-naturality" => (2, 30, 1e-8),
        "floor-homogeneity" => (2, 30, 1e-9),
        "assoc-alternation" => (2, 8, 1e-7),
        "antisymmetry" => (2, 20, 1e-8),
        "graded-jacobi" => (2, 6, 1e-7),
        "fn-naturality" => (2, 25, 1e-8),
        "lie-decomposition" => (2, 20, 1e-9),
        "lie-naturality" => (2, 25, 1e-8),
        "oracle-lie" => (3, 150, 1e-10),
        "oracle-fn" => (3, 40, 1e-9),
        _ => return None,
    })
}

fn resolve(cfg: &SuiteConfig) -> Result<Resolved, SuiteError> {
    let (dim, trials, tol) =
        defaults(&cfg.name).ok_or_else(|| SuiteError::UnknownSuite(cfg.name.clone()))?;
    let res = Resolved {
        dim: cfg.dim.unwrap_or(dim),
        trials: cfg
            .trials
            .unwrap_or(if cfg.extended { trials * 4 } else { trials }),
        tol: cfg.tol.unwrap_or(tol),
        seed: cfg.seed,
        bound: cfg.bound,
        poly_degree: cfg.poly_degree,
        p: cfg.p,
        q: cfg.q,
        r: cfg.r,
    };
    if res.dim == 0 || res.dim > 4 {
        return Err(SuiteError::InvalidConfig(format!(
            "dim {} outside 1..=4 (desk scale)",
            res.dim
        )));
    }
    if res.trials == 0 {
        return Err(SuiteError::InvalidConfig("trials must be >= 1".into()));
    }
    if res.tol <= 0.0 || res.tol.is_nan() {
        return Err(SuiteError::InvalidConfig("tolerance must be > 0".into()));
    }
    let degree_sum = res.p.unwrap_or(0) + res.q.unwrap_or(0) + res.r.unwrap_or(0);
    if degree_sum > 6 {
        return Err(SuiteError::InvalidConfig(format!(
            "p+q+r = {degree_sum} exceeds 6"
        )));
    }
    Ok(res)
}

/// Run one suite, optionally with its designated planted bug.
pub fn run_suite(cfg: &SuiteConfig, mutate: bool) -> Result<(SuiteReport, Duration), SuiteError> {
    let res = resolve(cfg)?;
    let start = Instant::now();
    let (max_residual, trials, constants) = match cfg.name.as_str() {
        "map-strong-diff" => map_strong_diff(&res, mutate)?,
        "general-jacobi" => general_jacobi(&res, mutate)?,
        "form-contracts" => form_contracts(&res, mutate)?,
        "perm-strong-diff" => perm_strong_diff(&res, mutate)?,
        "interior" => interior_suite(&res, mutate)?,
        "interior-naturality" => interior_naturality(&res, mutate)?,
        "floor-homogeneity" => floor_homogeneity(&res, mutate)?,
        "assoc-alternation" => assoc_alternation(&res, mutate)?,
        "antisymmetry" => antisymmetry(&res, mutate)?,
        "graded-jacobi" => graded_jacobi(&res, mutate)?,
        "fn-naturality" => fn_naturality(&res, mutate)?,
        "lie-decomposition" => lie_decomposition(&res, mutate)?,
        "lie-naturality" => lie_naturality(&res, mutate)?,
        "oracle-lie" => oracle_lie(&res, mutate)?,
        "oracle-fn" => oracle_fn(&res, mutate)?,
        other => return Err(SuiteError::UnknownSuite(other.to_string())),
    };
    let mut report = SuiteReport::new(&cfg.name, trials, max_residual, res.tol, constants);
    if cfg.name == "oracle-fn" {
        // proportionality spread has its own bound on top of the residual
        let spread_ok = report
            .constants
            .iter()
            .filter(|(k, _)| k.starts_with("spread_"))
            .all(|(_, &v)| v <= 1e-6);
        report.pass = report.pass && spread_ok;
    }
    Ok((report, start.elapsed()))
}

/// Run every suite at desk scale, then every suite again under its
/// designated planted bug (which must FAIL). Returns the aggregate report
/// and the human lines (with wall times, which stay out of the JSON).
pub fn run_selftest(
    seed: u64,
    extended: bool,
) -> Result<(crate::report::SelfTestReport, Vec<String>), SuiteError> {
    let mut suites = Vec::new();
    let mut lines = Vec::new();
    for name in SUITES {
        let mut cfg = SuiteConfig::new(name, seed);
        cfg.extended = extended;
        let (rep, wall) = run_suite(&cfg, false)?;
        lines.push(rep.human_line(wall));
        suites.push(rep);
    }
    let mut negative_controls = Vec::new();
    for name in SUITES {
        let mut cfg = SuiteConfig::new(name, seed);
        cfg.trials = Some(negative_trials(name));
        let (rep, wall) = run_suite(&cfg, true)?;
        let control = crate::report::NegativeControl {
            suite: name.to_string(),
            mutation: designated_mutation(name).to_string(),
            failed_as_expected: !rep.pass,
        };
        lines.push(format!(
            "negative-control suite={} [{}] {} ({:.2}s)",
            name,
            control.mutation,
            if control.failed_as_expected {
                "FAIL (expected)"
            } else {
                "UNEXPECTED PASS"
            },
            wall.as_secs_f64(),
        ));
        negative_controls.push(control);
    }
    let pass =
        suites.iter().all(|r| r.pass) && negative_controls.iter().all(|c| c.failed_as_expected);
    let report = crate::report::SelfTestReport {
        seed,
        extended,
        suites,
        negative_controls,
        pass,
    };
    Ok((report, lines))
}

fn negative_trials(name: &str) -> u64 {
    match name {
        "map-strong-diff" | "general-jacobi" | "oracle-lie" => 10,
        _ => 5,
    }
}

fn linf(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn tangent_gap(a: &TangentVector, b: &TangentVector) -> f64 {
    gap(&a.base, &b.base).max(gap(&a.dir, &b.dir))
}

fn arc(form: VectorForm) -> Arc<dyn SemiForm> {
    Arc::new(form)
}

fn grid2(res: &Resolved, default: &[(usize, usize)]) -> Vec<(usize, usize)> {
    match (res.p, res.q) {
        (Some(p), Some(q)) => vec![(p, q)],
        _ => default.to_vec(),
    }
}

fn grid3(res: &Resolved, default: &[(usize, usize, usize)]) -> Vec<(usize, usize, usize)> {
    match (res.p, res.q, res.r) {
        (Some(p), Some(q), Some(r)) => vec![(p, q, r)],
        _ => default.to_vec(),
    }
}

// ---------------------------------------------------------------------------
// individual suites
// ---------------------------------------------------------------------------

type SuiteOutcome = (f64, u64, BTreeMap<String, f64>);

/// Maps commute with strong differences:
/// `f∘γ1 −̇ f∘γ2 = f∘(γ1 −̇ γ2)` for squares agreeing on D(2).
fn map_strong_diff(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let mut worst = 0.0f64;
    for t in 0..res.trials {
        let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t));
        let (g1, g2) = gen::gen_square_pair(rng, res.dim, res.bound);
        let target = rng.gen_range(1..=3usize);
        let f = gen::gen_polymap(rng, res.dim, target, res.poly_degree, res.bound);
        let lhs = f.push_cube(&g1)?.strong_diff(&f.push_cube(&g2)?, res.tol)?;
        let mut rhs = f.push_tangent(&g1.strong_diff(&g2, res.tol)?)?;
        if mutate {
            rhs.dir.iter_mut().for_each(|v| *v = -*v);
        }
        worst = worst.max(tangent_gap(&lhs, &rhs));
    }
    Ok((worst, res.trials, BTreeMap::new()))
}

/// The three alternating combinations of relativized strong differences of an
/// admissible sextuple sum to zero.
fn general_jacobi(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let mut worst = 0.0f64;
    for t in 0..res.trials {
        let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t));
        let six = gen::gen_sextuple(rng, res.dim, res.bound, t % 2 == 0);
        let residual = if mutate {
            let [e1, e2, e3] = jacobi_expressions(&six, res.tol)?;
            let sum: Vec<f64> = e1
                .dir
                .iter()
                .zip(&e2.dir)
                .zip(&e3.dir)
                .map(|((a, b), c)| a + b - c)
                .collect();
            linf(&sum)
        } else {
            linf(&jacobi_residual(&six, res.tol)?)
        };
        worst = worst.max(residual);
    }
    Ok((worst, res.trials, BTreeMap::new()))
}

/// Kernel forms satisfy the three evaluator contracts: base preservation,
/// slot homogeneity, alternation.
fn form_contracts(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let degrees: Vec<usize> = match res.p {
        Some(p) => vec![p],
        None => (0..=2.min(res.dim)).collect(),
    };
    let alphas = [2.0, -0.5, 0.3, 0.0];
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &p in &degrees {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 31 + p as u64));
            let form = gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound);
            let cubes: Vec<Microcube> = (0..3)
                .map(|_| gen::gen_microcube(rng, p, res.dim, res.bound))
                .collect();
            let hom = check_homogeneity(&form, &cubes, &alphas)?;
            let base = check_base_preservation(&form, &cubes)?;
            let alt = if mutate {
                // unsigned comparison: dir(γ^σ) against dir(γ), no ε_σ
                let mut bad = 0.0f64;
                for cube in &cubes {
                    let t0 = eval_on_real(&form, cube)?;
                    for sigma in Permutation::all(p) {
                        let t1 = eval_on_real(&form, &cube.precompose(&sigma)?)?;
                        bad = bad.max(gap(&t1.dir, &t0.dir));
                    }
                }
                bad
            } else {
                check_alternating(&form, &cubes)?
            };
            worst = worst.max(hom).max(base).max(alt);
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// Permuting the argument commutes with the strong difference of the two
/// composition squares: difference-then-evaluate equals the floor evaluator
/// on the permuted cube.
fn perm_strong_diff(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(1, 1)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(p, q) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 17 + (p * 7 + q) as u64));
            let k = gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound);
            let l = gen::gen_form(rng, res.dim, q, res.poly_degree, res.bound);
            let cube = gen::gen_microcube(rng, p + q, res.dim, res.bound);
            let mut sigma = gen::gen_permutation(rng, p + q);
            if mutate && sigma == Permutation::identity(p + q) {
                sigma = Permutation::block_swap(1, p + q - 1);
            }
            let acted = cube.precompose(&sigma)?;
            // route A: public squares and the cube-level strong difference
            let input_a = if mutate { &cube } else { &acted };
            let sq = pair_square(&k, &l, input_a)?;
            let tw = twisted_pair_square(&k, &l, input_a)?;
            let via_squares = sq.strong_diff(&tw, res.tol)?;
            // route B: the floor-bracket evaluator on the permuted cube
            let floor = bracket_floor(arc(k), arc(l))?;
            let via_floor = eval_on_real(&floor, &acted)?;
            worst = worst.max(tangent_gap(&via_squares, &via_floor));
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// The unalternated interior derivation is a semiform (base-preserving,
/// slot-homogeneous), and contracting with the identity 1-form scales an
/// `l`-form by `l`.
fn interior_suite(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(1, 1), (1, 2), (2, 1)]); // (deg K, deg L)
    let alphas = [2.0, -0.5, 0.0];
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(k1, l) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 23 + (k1 * 5 + l) as u64));
            let kf = gen::gen_form(rng, res.dim, k1, res.poly_degree, res.bound);
            let lf = gen::gen_form(rng, res.dim, l, res.poly_degree, res.bound);
            let hat = interior_hat(arc(kf), arc(lf))?;
            let cubes: Vec<Microcube> = (0..2)
                .map(|_| gen::gen_microcube(rng, k1 - 1 + l, res.dim, res.bound))
                .collect();
            worst = worst.max(check_homogeneity(&hat, &cubes, &alphas)?);
            worst = worst.max(check_base_preservation(&hat, &cubes)?);

            // identity contraction: i_Id L = l · L
            let id_form = arc(VectorForm::identity_one_form(res.dim));
            let lf2 = gen::gen_form(rng, res.dim, l, res.poly_degree, res.bound);
            let lf2_arc = arc(lf2);
            let cube = gen::gen_microcube(rng, l, res.dim, res.bound);
            let expected = eval_on_real(&*lf2_arc, &cube)?;
            let got = if mutate {
                // unsigned alternation of the hat evaluator
                let hat_id = interior_hat(id_form, lf2_arc)?;
                let weight = 1.0 / factorial(l - 1);
                let mut dir = vec![0.0; res.dim];
                for sigma in Permutation::all(l) {
                    let term = eval_on_real(&hat_id, &cube.precompose(&sigma)?)?;
                    for c in 0..res.dim {
                        dir[c] += term.dir[c] * weight;
                    }
                }
                TangentVector::new(expected.base.clone(), dir).map_err(SuiteError::Engine)?
            } else {
                eval_on_real(&interior(id_form, lf2_arc)?, &cube)?
            };
            for c in 0..res.dim {
                worst = worst.max((got.dir[c] - l as f64 * expected.dir[c]).abs());
            }
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// Naturality of the interior derivation under related forms.
fn interior_naturality(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(1, 1), (2, 1)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(k1, l) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 41 + (k1 * 3 + l) as u64));
            let (f, f_inv) = gen::gen_diffeo(rng, res.dim, res.bound);
            let pts = gen::sample_points(rng, res.dim, 5, res.bound);
            let k_tgt = gen::gen_form(rng, res.dim, k1, res.poly_degree, res.bound);
            let l_tgt = gen::gen_form(rng, res.dim, l, res.poly_degree, res.bound);
            let k_tgt_arc = arc(k_tgt);
            let l_tgt_arc = arc(l_tgt);
            let k_src: Arc<dyn SemiForm> = Arc::new(pullback_related(
                f.clone(),
                f_inv.clone(),
                k_tgt_arc.clone(),
                &pts,
                DEFAULT_TOL,
            )?);
            let l_src: Arc<dyn SemiForm> = Arc::new(pullback_related(
                f.clone(),
                f_inv.clone(),
                l_tgt_arc.clone(),
                &pts,
                DEFAULT_TOL,
            )?);
            let int_src = interior(k_src, l_src)?;
            let int_tgt = interior(k_tgt_arc, l_tgt_arc)?;
            let cube = gen::gen_microcube(rng, k1 - 1 + l, res.dim, res.bound);
            let lhs = f.push_tangent(&eval_on_real(&int_src, &cube)?)?;
            let rhs_cube = if mutate {
                cube.clone()
            } else {
                f.push_cube(&cube)?
            };
            let rhs = eval_on_real(&int_tgt, &rhs_cube)?;
            worst = worst.max(tangent_gap(&lhs, &rhs));
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// The floor bracket is a semiform: base preservation and slot homogeneity;
/// also reports the axis agreement of the two composition squares.
fn floor_homogeneity(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(1, 1), (0, 1), (1, 2)]);
    let alphas = [2.0, -0.5, 0.3, 0.0];
    let mut worst = 0.0f64;
    let mut axis_gap = 0.0f64;
    let mut trials_done = 0u64;
    for &(p, q) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 13 + (p * 11 + q) as u64));
            let k = gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound);
            let l = gen::gen_form(rng, res.dim, q, res.poly_degree, res.bound);
            let cubes: Vec<Microcube> = (0..2)
                .map(|_| gen::gen_microcube(rng, p + q, res.dim, res.bound))
                .collect();
            for cube in &cubes {
                let sq = pair_square(&k, &l, cube)?;
                let tw = twisted_pair_square(&k, &l, cube)?;
                for mask in [0usize, 1, 2] {
                    axis_gap = axis_gap.max(gap(sq.coeff(mask), tw.coeff(mask)));
                }
            }
            let floor = bracket_floor(arc(k), arc(l))?;
            let hom = if mutate {
                // compare against α² instead of α
                let mut bad = 0.0f64;
                for cube in &cubes {
                    let t0 = eval_on_real(&floor, cube)?;
                    for i in 1..=p + q {
                        for &a in &alphas {
                            let t1 = eval_on_real(&floor, &cube.scale_axis(a, i)?)?;
                            for c in 0..res.dim {
                                bad = bad.max((t1.dir[c] - a * a * t0.dir[c]).abs());
                            }
                        }
                    }
                }
                bad
            } else {
                check_homogeneity(&floor, &cubes, &alphas)?
            };
            worst = worst
                .max(hom)
                .max(check_base_preservation(&floor, &cubes)?)
                .max(axis_gap);
            trials_done += 1;
        }
    }
    let mut constants = BTreeMap::new();
    constants.insert("axis_gap".to_string(), axis_gap);
    Ok((worst, trials_done, constants))
}

/// Alternating an inner-normalized double floor bracket equals the fully
/// normalized double alternation.
fn assoc_alternation(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid3(res, &[(1, 1, 1), (0, 1, 1)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(p, q, r) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(
                res.seed,
                t * 29 + (p * 9 + q * 3 + r) as u64,
            ));
            let k1 = arc(gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound));
            let k2 = arc(gen::gen_form(rng, res.dim, q, res.poly_degree, res.bound));
            let k3 = arc(gen::gen_form(rng, res.dim, r, res.poly_degree, res.bound));
            let cube = gen::gen_microcube(rng, p + q + r, res.dim, res.bound);
            let residual = if mutate {
                let lhs = alternate(
                    Arc::new(bracket_floor(
                        k1.clone(),
                        Arc::new(alternate(
                            Arc::new(bracket_floor(k2.clone(), k3.clone())?),
                            1.0 / (factorial(q) * factorial(r)),
                        )),
                    )?),
                    -1.0 / (factorial(p) * factorial(q + r)),
                );
                let rhs = alternate(
                    Arc::new(bracket_floor(k1, Arc::new(bracket_floor(k2, k3)?))?),
                    1.0 / (factorial(p) * factorial(q) * factorial(r)),
                );
                let a = eval_on_real(&lhs, &cube)?;
                let b = eval_on_real(&rhs, &cube)?;
                gap(&a.dir, &b.dir)
            } else {
                alternation_associativity_gap(k1, k2, k3, std::slice::from_ref(&cube))?
            };
            worst = worst.max(residual);
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// Graded antisymmetry `⌈K,L⌉ = −(−1)^{pq} ⌈L,K⌉`.
fn antisymmetry(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(p, q) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 37 + (p * 13 + q) as u64));
            let k = gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound);
            let l = gen::gen_form(rng, res.dim, q, res.poly_degree, res.bound);
            let cube = gen::gen_microcube(rng, p + q, res.dim, res.bound);
            let kl = fn_bracket(arc(k.clone()), arc(l.clone()))?;
            let lk = fn_bracket(arc(l), arc(k))?;
            let t_kl = eval_on_real(&kl, &cube)?;
            let t_lk = eval_on_real(&lk, &cube)?;
            let mut sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
            if mutate {
                sign = -sign;
            }
            for c in 0..res.dim {
                worst = worst.max((t_kl.dir[c] + sign * t_lk.dir[c]).abs());
            }
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// Graded Jacobi identity, plus the two proof-level identities (triple
/// composition route and alternation associativity) in the same run.
fn graded_jacobi(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let default = [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1), (1, 1, 2)];
    let grid = grid3(res, &default);
    let mut worst = 0.0f64;
    let mut phi_gap = 0.0f64;
    let mut assoc_gap = 0.0f64;
    let mut trials_done = 0u64;
    for &(p, q, r) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(
                res.seed,
                t * 43 + (p * 25 + q * 5 + r) as u64,
            ));
            let k1 = arc(gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound));
            let k2 = arc(gen::gen_form(rng, res.dim, q, res.poly_degree, res.bound));
            let k3 = arc(gen::gen_form(rng, res.dim, r, res.poly_degree, res.bound));
            let cube = gen::gen_microcube(rng, p + q + r, res.dim, res.bound);
            if mutate {
                let j1 = fn_bracket(k1.clone(), Arc::new(fn_bracket(k2.clone(), k3.clone())?))?;
                let j2 = fn_bracket(k2.clone(), Arc::new(fn_bracket(k3.clone(), k1.clone())?))?;
                let j3 = fn_bracket(k3, Arc::new(fn_bracket(k1, k2)?))?;
                let s1 = if (p * (q + r)) % 2 == 0 { -1.0 } else { 1.0 }; // mis-signed
                let s2 = if (r * (p + q)) % 2 == 0 { 1.0 } else { -1.0 };
                let t1 = eval_on_real(&j1, &cube)?;
                let t2 = eval_on_real(&j2, &cube)?;
                let t3 = eval_on_real(&j3, &cube)?;
                for c in 0..res.dim {
                    worst = worst.max((t1.dir[c] + s1 * t2.dir[c] + s2 * t3.dir[c]).abs());
                }
            } else {
                let rep = graded_jacobi_check(k1, k2, k3, std::slice::from_ref(&cube))?;
                worst = worst
                    .max(rep.cyclic_residual)
                    .max(rep.phi_identity_gap)
                    .max(rep.alternation_assoc_gap);
                phi_gap = phi_gap.max(rep.phi_identity_gap);
                assoc_gap = assoc_gap.max(rep.alternation_assoc_gap);
            }
            trials_done += 1;
        }
    }
    let mut constants = BTreeMap::new();
    constants.insert("phi_identity_gap".to_string(), phi_gap);
    constants.insert("alternation_assoc_gap".to_string(), assoc_gap);
    Ok((worst, trials_done, constants))
}

/// Naturality of the bracket under related forms, including the two star
/// exchange identities at the square level.
fn fn_naturality(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(0, 0), (0, 1), (1, 1)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(p, q) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 47 + (p * 15 + q) as u64));
            let (f, f_inv) = gen::gen_diffeo(rng, res.dim, res.bound);
            let pts = gen::sample_points(rng, res.dim, 5, res.bound);
            let k_tgt = gen::gen_form(rng, res.dim, p, res.poly_degree, res.bound);
            let l_tgt = gen::gen_form(rng, res.dim, q, res.poly_degree, res.bound);
            let k_tgt_arc = arc(k_tgt.clone());
            let l_tgt_arc = arc(l_tgt.clone());
            let k_src: Arc<dyn SemiForm> = Arc::new(pullback_related(
                f.clone(),
                f_inv.clone(),
                k_tgt_arc.clone(),
                &pts,
                DEFAULT_TOL,
            )?);
            let l_src: Arc<dyn SemiForm> = Arc::new(pullback_related(
                f.clone(),
                f_inv.clone(),
                l_tgt_arc.clone(),
                &pts,
                DEFAULT_TOL,
            )?);
            let cube = gen::gen_microcube(rng, p + q, res.dim, res.bound);
            let pushed = f.push_cube(&cube)?;

            // star exchange identities at the square level
            let sq_src = pair_square(&*k_src, &*l_src, &cube)?;
            let sq_tgt = pair_square(&k_tgt, &l_tgt, &pushed)?;
            worst = worst.max(f.push_cube(&sq_src)?.max_abs_diff(&sq_tgt));
            let tw_src = twisted_pair_square(&*k_src, &*l_src, &cube)?;
            let tw_tgt = twisted_pair_square(&k_tgt, &l_tgt, &pushed)?;
            worst = worst.max(f.push_cube(&tw_src)?.max_abs_diff(&tw_tgt));

            // bracket naturality
            let b_src = fn_bracket(k_src, l_src)?;
            let b_tgt = fn_bracket(k_tgt_arc, l_tgt_arc)?;
            let lhs = f.push_tangent(&eval_on_real(&b_src, &cube)?)?;
            let rhs_cube = if mutate { cube } else { pushed };
            let rhs = eval_on_real(&b_tgt, &rhs_cube)?;
            worst = worst.max(tangent_gap(&lhs, &rhs));
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// Symmetric-connection decomposition of the bracket into Lie derivations,
/// alternated and floor-level.
fn lie_decomposition(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(0, 0), (0, 1), (1, 1)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(kd, ld) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 53 + (kd * 17 + ld) as u64));
            let conn = Arc::new(if t % 2 == 0 {
                Connection::flat(res.dim)
            } else {
                gen::gen_connection(rng, res.dim, true, res.poly_degree, res.bound)
            });
            let k = arc(gen::gen_form(rng, res.dim, kd, res.poly_degree, res.bound));
            let l = arc(gen::gen_form(rng, res.dim, ld, res.poly_degree, res.bound));
            let cube = gen::gen_microcube(rng, kd + ld, res.dim, res.bound);
            if mutate {
                let bracket = fn_bracket(k.clone(), l.clone())?;
                let lie_kl = lie(k.clone(), l.clone(), conn.clone())?;
                let lie_lk = lie(l, k, conn)?;
                let sign = if (kd * ld) % 2 == 0 { -1.0 } else { 1.0 }; // mis-signed
                let b = eval_on_real(&bracket, &cube)?;
                let a1 = eval_on_real(&lie_kl, &cube)?;
                let a2 = eval_on_real(&lie_lk, &cube)?;
                for c in 0..res.dim {
                    worst = worst.max((b.dir[c] - (a1.dir[c] - sign * a2.dir[c])).abs());
                }
            } else {
                let rep = fncalc_core::calculus::lie_decomposition_check(
                    k,
                    l,
                    conn,
                    std::slice::from_ref(&cube),
                )?;
                worst = worst.max(rep.alternated_gap).max(rep.floor_gap);
            }
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// Naturality of the Lie derivation with a related (pulled-back) connection.
fn lie_naturality(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let grid = grid2(res, &[(0, 0), (0, 1), (1, 1)]);
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    for &(kd, ld) in &grid {
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t * 59 + (kd * 19 + ld) as u64));
            let (f, f_inv) = gen::gen_diffeo(rng, res.dim, res.bound);
            let pts = gen::sample_points(rng, res.dim, 5, res.bound);
            let conn_src = Arc::new(Connection::pullback_flat(&f)?);
            let conn_tgt = Arc::new(Connection::flat(res.dim));
            let k_tgt = gen::gen_form(rng, res.dim, kd, res.poly_degree, res.bound);
            let l_tgt = gen::gen_form(rng, res.dim, ld, res.poly_degree, res.bound);
            let k_tgt_arc = arc(k_tgt);
            let l_tgt_arc = arc(l_tgt);
            let k_src: Arc<dyn SemiForm> = Arc::new(pullback_related(
                f.clone(),
                f_inv.clone(),
                k_tgt_arc.clone(),
                &pts,
                DEFAULT_TOL,
            )?);
            let l_src: Arc<dyn SemiForm> = Arc::new(pullback_related(
                f.clone(),
                f_inv.clone(),
                l_tgt_arc.clone(),
                &pts,
                DEFAULT_TOL,
            )?);
            let lie_src = lie(k_src, l_src, conn_src)?;
            let lie_tgt = lie(k_tgt_arc, l_tgt_arc, conn_tgt)?;
            let cube = gen::gen_microcube(rng, kd + ld, res.dim, res.bound);
            let lhs = f.push_tangent(&eval_on_real(&lie_src, &cube)?)?;
            let rhs_cube = if mutate {
                cube.clone()
            } else {
                f.push_cube(&cube)?
            };
            let rhs = eval_on_real(&lie_tgt, &rhs_cube)?;
            worst = worst.max(tangent_gap(&lhs, &rhs));
            trials_done += 1;
        }
    }
    Ok((worst, trials_done, BTreeMap::new()))
}

/// At degree (0,0) the bracket is the coordinate Lie bracket.
fn oracle_lie(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let mut worst = 0.0f64;
    for t in 0..res.trials {
        let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t));
        let x_comps: Vec<PolyExpr> = (0..res.dim)
            .map(|_| gen::gen_poly(rng, res.dim, res.poly_degree, res.bound))
            .collect();
        let mut y_comps: Vec<PolyExpr> = (0..res.dim)
            .map(|_| gen::gen_poly(rng, res.dim, res.poly_degree, res.bound))
            .collect();
        if mutate {
            // force genuine nonlinearity so the collapsed arithmetic differs
            for (i, c) in y_comps.iter_mut().enumerate() {
                *c = c.add(
                    &PolyExpr::var(res.dim, i)
                        .map_err(SuiteError::Engine)?
                        .pow(2),
                );
            }
        }
        let point = gen::gen_point(rng, res.dim, res.bound);
        let oracle = lie_bracket_classical(
            &VectorField::new(x_comps.clone())?,
            &VectorField::new(y_comps.clone())?,
        )?
        .eval(&point)?;
        let engine = if mutate {
            collapsed_bracket(&x_comps, &y_comps, &point)?
        } else {
            let xf = arc(VectorForm::vector_field(x_comps)?);
            let yf = arc(VectorForm::vector_field(y_comps)?);
            let cube = Microcube::new(0, res.dim, vec![point.clone()])?;
            eval_on_real(&fn_bracket(xf, yf)?, &cube)?.dir
        };
        worst = worst.max(gap(&engine, &oracle));
    }
    Ok((worst, res.trials, BTreeMap::new()))
}

/// The planted "dropped truncation" bug: evaluate the two composition
/// squares with idempotent infinitesimals (`d² = d` instead of `d² = 0`).
/// For a polynomial `f` this turns `f(a + b·d)` into
/// `f(a) + d·(f(a+b) − f(a))`, so the mixed coefficients become finite
/// differences instead of derivatives.
fn collapsed_bracket(
    x_comps: &[PolyExpr],
    y_comps: &[PolyExpr],
    point: &[f64],
) -> Result<Vec<f64>, SuiteError> {
    let m = point.len();
    let eval = |comps: &[PolyExpr], at: &[f64]| -> Result<Vec<f64>, SuiteError> {
        comps
            .iter()
            .map(|c| c.eval_f64(at).map_err(SuiteError::Engine))
            .collect()
    };
    let x_at = eval(x_comps, point)?;
    let y_at = eval(y_comps, point)?;
    let shifted_x: Vec<f64> = (0..m).map(|c| point[c] + x_at[c]).collect();
    let shifted_y: Vec<f64> = (0..m).map(|c| point[c] + y_at[c]).collect();
    let y_shift = eval(y_comps, &shifted_x)?;
    let x_shift = eval(x_comps, &shifted_y)?;
    Ok((0..m)
        .map(|c| (y_shift[c] - y_at[c]) - (x_shift[c] - x_at[c]))
        .collect())
}

/// Oracle self-consistency (graded antisymmetry and Jacobi of the classical
/// formula) and the engine-vs-oracle proportionality constants.
fn oracle_fn(res: &Resolved, mutate: bool) -> Result<SuiteOutcome, SuiteError> {
    let m = res.dim;
    let mut worst = 0.0f64;
    let mut trials_done = 0u64;
    let mut constants = BTreeMap::new();

    // Part A: the oracle against itself.
    let pairs = [(0usize, 0usize), (0, 1), (1, 1), (1, 2)];
    let triples = [(0usize, 0usize, 0usize), (0, 0, 1), (0, 1, 1)];
    for t in 0..res.trials {
        let rng = &mut gen::rng_for(gen::trial_seed(res.seed, t));
        let (p, q) = pairs[t as usize % pairs.len()];
        let dk = gen::gen_decomposable(rng, m, p, res.poly_degree, res.bound);
        let dl = gen::gen_decomposable(rng, m, q, res.poly_degree, res.bound);
        let point = gen::gen_point(rng, m, res.bound);
        let dirs = gen::sample_points(rng, m, p + q, res.bound);
        let kl = fn_bracket_classical(&dk, &dl)?.eval(&point, &dirs)?;
        let lk = fn_bracket_classical(&dl, &dk)?.eval(&point, &dirs)?;
        let mut sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        if mutate {
            sign = -sign;
        }
        for c in 0..m {
            worst = worst.max((kl[c] + sign * lk[c]).abs());
        }

        let (p3, q3, r3) = triples[t as usize % triples.len()];
        let d1 = gen::gen_decomposable(rng, m, p3, res.poly_degree, res.bound);
        let d2 = gen::gen_decomposable(rng, m, q3, res.poly_degree, res.bound);
        let d3 = gen::gen_decomposable(rng, m, r3, res.poly_degree, res.bound);
        let dirs3 = gen::sample_points(rng, m, p3 + q3 + r3, res.bound);
        let j1 =
            fn_bracket_classical(&d1, &fn_bracket_classical(&d2, &d3)?)?.eval(&point, &dirs3)?;
        let j2 =
            fn_bracket_classical(&d2, &fn_bracket_classical(&d3, &d1)?)?.eval(&point, &dirs3)?;
        let j3 =
            fn_bracket_classical(&d3, &fn_bracket_classical(&d1, &d2)?)?.eval(&point, &dirs3)?;
        let s1 = if (p3 * (q3 + r3)) % 2 == 0 { 1.0 } else { -1.0 };
        let s2 = if (r3 * (p3 + q3)) % 2 == 0 { 1.0 } else { -1.0 };
        for c in 0..m {
            worst = worst.max((j1[c] + s1 * j2[c] + s2 * j3[c]).abs());
        }
        trials_done += 1;
    }

    // Part B: proportionality constant of the engine bracket against the
    // classical formula on axis cubes, per degree pair (requires p+q ≤ m so
    // the classical forms are not identically zero).
    let prop_grid: Vec<(usize, usize)> = grid2(res, &[(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)])
        .into_iter()
        .filter(|&(p, q)| p + q <= m)
        .collect();
    for &(p, q) in &prop_grid {
        let mut cs: Vec<f64> = Vec::new();
        let mut collinearity = 0.0f64;
        for t in 0..res.trials {
            let rng = &mut gen::rng_for(gen::trial_seed(
                res.seed,
                0x5eed ^ (t * 61 + (p * 21 + q) as u64),
            ));
            let k = gen::gen_form(rng, m, p, res.poly_degree, res.bound);
            let l = gen::gen_form(rng, m, q, res.poly_degree, res.bound);
            let point = gen::gen_point(rng, m, res.bound);
            let dirs = gen::sample_points(rng, m, p + q, res.bound);
            let cube = Microcube::from_axes(&point, &dirs)?;
            let engine = eval_on_real(&fn_bracket(arc(k.clone()), arc(l.clone()))?, &cube)?.dir;
            let oracle = fn_bracket_classical(
                &VectorValuedForm::from(k.kernel()),
                &VectorValuedForm::from(l.kernel()),
            )?
            .eval(&point, &dirs)?;
            let norm2: f64 = oracle.iter().map(|v| v * v).sum();
            if norm2 > 1e-8 {
                let c = engine.iter().zip(&oracle).map(|(e, o)| e * o).sum::<f64>() / norm2;
                for i in 0..m {
                    collinearity = collinearity.max((engine[i] - c * oracle[i]).abs());
                }
                cs.push(c);
            }
            trials_done += 1;
        }
        worst = worst.max(collinearity);
        if !cs.is_empty() {
            let mean = cs.iter().sum::<f64>() / cs.len() as f64;
            let max = cs.iter().cloned().fold(f64::MIN, f64::max);
            let min = cs.iter().cloned().fold(f64::MAX, f64::min);
            let spread = if mean.abs() > 0.0 {
                (max - min).abs() / mean.abs()
            } else {
                0.0
            };
            constants.insert(format!("c_{p}{q}"), mean);
            constants.insert(format!("spread_{p}{q}"), spread);
        }
    }
    Ok((worst, trials_done, constants))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_resolves_and_names_its_mutation() {
        for name in SUITES {
            let cfg = SuiteConfig::new(name, 1);
            assert!(resolve(&cfg).is_ok(), "suite {name} has no defaults");
            assert_ne!(
                designated_mutation(name),
                "none",
                "suite {name} has no planted bug"
            );
        }
        assert_eq!(SUITES.len(), 15);
    }

    #[test]
    fn config_validation_rejects_out_of_scale_inputs() {
        let mut cfg = SuiteConfig::new("general-jacobi", 1);
        cfg.dim = Some(5);
        assert!(matches!(
            run_suite(&cfg, false),
            Err(SuiteError::InvalidConfig(_))
        ));
        let mut cfg = SuiteConfig::new("graded-jacobi", 1);
        cfg.p = Some(3);
        cfg.q = Some(2);
        cfg.r = Some(2);
        assert!(matches!(
            run_suite(&cfg, false),
            Err(SuiteError::InvalidConfig(_))
        ));
        assert!(matches!(
            run_suite(&SuiteConfig::new("bogus", 1), false),
            Err(SuiteError::UnknownSuite(_))
        ));
    }
}
