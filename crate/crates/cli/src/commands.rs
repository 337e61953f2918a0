use hiertree::hier::{random_element, random_ray, Hierarchomorphism};
use hiertree::hilbert::{
    adapted_contexts, deviation_form, kernel_check, numerical_rank, transport_matrix, GramContext, DEFAULT_RANK_TOL,
};
use hiertree::measure::{
    boundary_deviation_rank, cut_context, estimate_sigma, level_terms, norm_gram, psi_vector, random_charge,
    transform_measure, CylinderMeasure, SIGMA_DEFAULT_DEPTH,
};
use hiertree::tree::{Cut, TreeFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, ExperimentConfig};
use crate::table::{num, Table};

/// The outcome of a command: the table to write and one line per failed
/// check. An empty failure list means exit code 0.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub failures: Vec<String>,
    pub summary: String,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn flag(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.into()
}

/// Largest depth cut whose Gram matrix is still cheap to factor.
const MAX_GRAM_SIZE: usize = 1024;

pub fn gram_check(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let family = cfg.family()?;
    let lambdas = cfg.lambdas()?;
    let depth = cfg.depth_or(3);
    let tol = cfg.tol_or(1e-10);
    let mut table = Table::new(
        "gram_positivity",
        &["lambda", "depth", "vertices", "min_eigenvalue", "factor_residual", "embedding_error", "pass"],
    );
    let mut failures = Vec::new();
    for &lambda in &lambdas {
        for d in 1..=depth {
            let vs = family.vertices_to_depth(d);
            let row = match GramContext::build(&family, lambda, &vs) {
                Ok(ctx) => {
                    let (m, r, e) = (ctx.min_eigenvalue(), ctx.factor_residual(), kernel_check(&ctx)?);
                    let ok = m > 0.0 && r < tol && e < tol;
                    if !ok {
                        failures.push(format!("lambda {lambda} depth {d}: min eigenvalue {m}, residual {r}, embedding {e}"));
                    }
                    vec![num(lambda), d.to_string(), vs.len().to_string(), num(m), num(r), num(e), flag(ok)]
                }
                Err(err) => {
                    failures.push(format!("lambda {lambda} depth {d}: {err}"));
                    vec![num(lambda), d.to_string(), vs.len().to_string(), String::new(), String::new(), String::new(), flag(false)]
                }
            };
            table.push(row);
        }
    }
    let summary = format!("{} Gram matrices checked", table.rows.len());
    Ok(Report { table, failures, summary })
}

pub fn norm_table(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let family = cfg.family()?;
    let m = cfg.measure(&family)?;
    let depth = cfg.depth_or(10);
    let tol = cfg.tol_or(1e-10);
    let mut table = Table::new("series_vs_gram", &["lambda", "depth", "partial_norm", "ratio", "gram_norm", "pass"]);
    let mut failures = Vec::new();
    for lambda in cfg.lambdas()? {
        let terms = level_terms(&family, lambda, &m, depth)?;
        let mut partial = m.total().powi(2);
        for d in 0..=depth {
            if d > 0 {
                partial += terms[d - 1].exp();
            }
            // Ratio of consecutive level sums; blank when either vanishes.
            let ratio = if d >= 2 && terms[d - 1].is_finite() && terms[d - 2].is_finite() {
                num((terms[d - 1] - terms[d - 2]).exp())
            } else {
                String::new()
            };
            let c = Cut::depth_cut(&family, d);
            let (gram, ok) = if d >= m.cut().max_depth() && c.len() <= MAX_GRAM_SIZE {
                let g = norm_gram(&cut_context(&family, lambda, &c)?, &m.push_to_cut(&family, &c)?)?;
                let ok = (g - partial).abs() <= tol * g.abs().max(1.0);
                if !ok {
                    failures.push(format!("lambda {lambda} depth {d}: series {partial} vs gram {g}"));
                }
                (num(g), flag(ok))
            } else {
                (String::new(), String::new())
            };
            table.push(vec![num(lambda), d.to_string(), num(partial), ratio, gram, ok]);
        }
    }
    let summary = format!("{} partial norms", table.rows.len());
    Ok(Report { table, failures, summary })
}

pub fn cocycle_fuzz(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let family = cfg.family()?;
    let budget = cfg.depth_or(4);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new("cocycle_identity", &["trial", "ray", "n_gh", "n_h_plus_n_g", "pass"]);
    let mut failures = Vec::new();
    for trial in 0..cfg.trials {
        let g = random_element(&family, rng.gen(), budget, 2);
        let h = random_element(&family, rng.gen(), budget, 2);
        let w = random_ray(&family, &mut rng, 6, 4);
        let gh = Hierarchomorphism::compose(&family, &g, &h)?;
        let hw = h.apply_boundary(&w);
        let lhs = gh.pseudoderivative(&family, &w);
        let rhs = h.pseudoderivative(&family, &w) + g.pseudoderivative(&family, &hw);
        let ok = lhs == rhs && gh.apply_boundary(&w) == g.apply_boundary(&hw);
        if !ok {
            failures.push(format!("trial {trial}: ray {w}: {lhs} vs {rhs}"));
        }
        table.push(vec![trial.to_string(), w.to_string(), lhs.to_string(), rhs.to_string(), flag(ok)]);
    }
    let summary = format!("{} of {} trials exact", cfg.trials - failures.len(), cfg.trials);
    Ok(Report { table, failures, summary })
}

/// The element from `--element`, or `trials` fuzzed ones.
fn elements(cfg: &ExperimentConfig, family: &TreeFamily) -> Result<Vec<(String, Hierarchomorphism)>, ConfigError> {
    if let Some(g) = cfg.element(family)? {
        return Ok(vec![("file".into(), g)]);
    }
    Ok((0..cfg.trials as u64)
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            (format!("seed{seed}"), random_element(family, seed, 4, 2))
        })
        .collect())
}

pub fn rank_stability(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let family = cfg.family()?;
    let top = cfg.depth_or(7);
    let depths: Vec<usize> = (top.saturating_sub(2).max(1)..=top).collect();
    let tol = cfg.tol_or(DEFAULT_RANK_TOL);
    let elems = elements(cfg, &family)?;
    let mut table = Table::new("finite_rank_deviation", &["element", "lambda", "depth", "pieces", "rank", "pass"]);
    let mut failures = Vec::new();
    for lambda in cfg.lambdas()? {
        let contexts = depths
            .iter()
            .map(|&d| GramContext::build(&family, lambda, &family.vertices_to_depth(d)))
            .collect::<hiertree::Result<Vec<_>>>()?;
        for (name, g) in &elems {
            let k = g.piece_count();
            let ranks = contexts
                .iter()
                .map(|ctx| Ok(numerical_rank(&deviation_form(ctx, g)?, tol)))
                .collect::<hiertree::Result<Vec<usize>>>()?;
            let ok = ranks.iter().all(|&r| r == ranks[0]) && ranks[0] <= k * k;
            if !ok {
                failures.push(format!("{name} lambda {lambda}: ranks {ranks:?} with {k} pieces"));
            }
            for (d, r) in depths.iter().zip(&ranks) {
                table.push(vec![name.clone(), num(lambda), d.to_string(), k.to_string(), r.to_string(), flag(ok)]);
            }
        }
    }
    let summary = format!("{} elements at depths {depths:?}", elems.len());
    Ok(Report { table, failures, summary })
}

/// Allowed distance between the estimate and `--expect`.
pub const SIGMA_EXPECT_TOL: f64 = 0.02;

pub fn sigma(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let family = cfg.family()?;
    let probe = cfg.measure(&family)?;
    let depth = cfg.depth_or(SIGMA_DEFAULT_DEPTH);
    let est = estimate_sigma(&family, &probe, depth, cfg.tol_or(1e-4))?;
    let mut table = Table::new("critical_exponent", &["lambda", "depth", "partial_norm", "ratio", "convergent"]);
    for row in &est.trace {
        table.push(vec![num(row.lambda), row.depth.to_string(), num(row.partial_norm), num(row.ratio), row.convergent.to_string()]);
    }
    let mut failures = Vec::new();
    if let Some(want) = cfg.expect {
        if (est.sigma - want).abs() > SIGMA_EXPECT_TOL {
            failures.push(format!("sigma {} is more than {SIGMA_EXPECT_TOL} from {want}", est.sigma));
        }
    }
    let summary = format!("sigma {} in [{}, {}]", est.sigma, est.lo, est.hi);
    Ok(Report { table, failures, summary })
}

pub fn transform_check(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let family = cfg.family()?;
    let depth = cfg.depth_or(5);
    let tol = cfg.tol_or(1e-9);
    let elems = elements(cfg, &family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(
        "boundary_action",
        &["element", "lambda", "depth", "rank", "next_rank", "tree_isometry", "homomorphism_error", "intertwining_error", "pass"],
    );
    let mut failures = Vec::new();
    for lambda in cfg.lambdas()? {
        for (name, g) in &elems {
            // T(g)T(h) against T(gh) ball by ball.
            let h = random_element(&family, rng.gen(), 3, 2);
            let gh = Hierarchomorphism::compose(&family, g, &h)?;
            let m = random_charge(&family, &mut rng, 3, 6);
            let two = transform_measure(&family, g, lambda, &transform_measure(&family, &h, lambda, &m)?)?;
            let one = transform_measure(&family, &gh, lambda, &m)?;
            let c = Cut::common_refinement(two.cut(), one.cut());
            let hom = c
                .boundary()
                .iter()
                .map(|v| {
                    let (x, y) = (two.ball_value(&family, v), one.ball_value(&family, v));
                    (x - y).abs() / x.abs().max(1.0)
                })
                .fold(0.0, f64::max);

            let inter = intertwining_error(&family, g, lambda, depth, &mut rng)?;
            let r = boundary_deviation_rank(&family, g, lambda, depth, DEFAULT_RANK_TOL)?;
            let r_next = boundary_deviation_rank(&family, g, lambda, depth + 1, DEFAULT_RANK_TOL)?;
            let iso = g.is_tree_isometry(&family);
            let ok = hom < 1e-12 && inter < tol && r == r_next && (r == 0) == iso;
            if !ok {
                failures.push(format!(
                    "{name} lambda {lambda}: ranks {r}/{r_next}, tree isometry {iso}, homomorphism {hom:e}, intertwining {inter:e}"
                ));
            }
            table.push(vec![
                name.clone(),
                num(lambda),
                depth.to_string(),
                r.to_string(),
                r_next.to_string(),
                iso.to_string(),
                num(hom),
                num(inter),
                flag(ok),
            ]);
        }
    }
    let summary = format!("{} elements", elems.len());
    Ok(Report { table, failures, summary })
}

/// `‖Ψ[T(g)μ] − U(g)Ψ[μ]‖` for a random charge living on a vertex set that
/// `g` carries onto another.
fn intertwining_error(
    family: &TreeFamily,
    g: &Hierarchomorphism,
    lambda: f64,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64, ConfigError> {
    let below = depth.saturating_sub(g.domain().max_depth()).max(1);
    let (src, tgt) = adapted_contexts(family, lambda, g, below)?;
    let mut c = g.domain().clone();
    for _ in 0..6 {
        let open: Vec<_> = c
            .boundary()
            .iter()
            .filter(|v| family.children(v).iter().all(|k| src.index_of(k).is_some()))
            .cloned()
            .collect();
        if open.is_empty() {
            break;
        }
        let v = open[rng.gen_range(0..open.len())].clone();
        c = c.refine(family, &v)?;
    }
    let values = (0..c.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m = CylinderMeasure::new(c, values)?;
    let lhs = psi_vector(&tgt, &transform_measure(family, g, lambda, &m)?)?;
    let rhs = transport_matrix(&src, &tgt, g)? * psi_vector(&src, &m)?;
    Ok(tgt.norm_sq(&(lhs - rhs)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::default()
    }

    #[test]
    fn zero_measure_table_is_all_zero() {
        let c = ExperimentConfig { measure: "zero".into(), depth: Some(4), ..cfg() };
        let r = norm_table(&c).unwrap();
        assert!(r.passed());
        assert!(r.table.rows.iter().all(|row| row[2] == "0"));
    }

    #[test]
    fn cocycle_fuzz_passes() {
        let c = ExperimentConfig { trials: 50, ..cfg() };
        let r = cocycle_fuzz(&c).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.table.rows.len(), 50);
    }

    #[test]
    fn impossible_tolerance_reports_failures() {
        let c = ExperimentConfig { depth: Some(2), tol: Some(0.0), ..cfg() };
        let r = gram_check(&c).unwrap();
        assert!(!r.passed());
    }
}
