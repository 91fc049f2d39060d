//! Invariant suites behind the `selftest` subcommand.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::integrators::{Scheme, SchemeConfig, SchemeKind, Trajectory};
use crate::models::{InitialCondition, Model, KDV_ONE_SOLITON_DOMAIN, KDV_ONE_SOLITON_MU2, NLS_DOMAIN, SG_RING_DOMAIN};
use crate::spectral::{inner_product, Grid, State};
use crate::tableau::gauss_tableau;

use super::config::ExperimentConfig;
use super::run::{run_trajectory, write_series};

pub const RANDOM_STATES: usize = 20;
pub const OPERATOR_TOL: f64 = 1e-11;
pub const TABLEAU_TOL: f64 = 1e-14;
pub const SLOPE_TOL: f64 = 0.25;
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn test_models() -> Result<Vec<Arc<Model>>> {
    let (lo, hi) = KDV_ONE_SOLITON_DOMAIN;
    let [x, y] = SG_RING_DOMAIN;
    Ok(vec![
        Arc::new(Model::kdv(1.0, KDV_ONE_SOLITON_MU2.sqrt(), Grid::new_1d(lo, hi, 64)?)?),
        Arc::new(Model::nls(1.0, Grid::new_1d(NLS_DOMAIN.0, NLS_DOMAIN.1, 64)?)?),
        Arc::new(Model::sine_gordon(1.0, Grid::new_2d((x.0, x.1, 16), (y.0, y.1, 16))?)?),
    ])
}

fn random_state(model: &Model, rng: &mut ChaCha8Rng) -> Result<State> {
    let grid = model.grid().clone();
    let comps = (0..model.n_components())
        .map(|_| (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    State::new(grid, comps)
}

fn norm(z: &State) -> f64 {
    inner_product(z, z).sqrt()
}

/// `(Su, v) = −(u, Sv)`, `(Lu, v) = (u, Lv)`, `(Lu, u) ≥ 0` and
/// `SL = S∘L` on random states, relative to the operand norms.
pub fn operator_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for model in test_models()? {
        let (mut skew, mut sym, mut neg, mut comp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..RANDOM_STATES {
            let u = random_state(&model, &mut rng)?;
            let v = random_state(&model, &mut rng)?;
            let (su, sv, lu, lv) = (model.apply_s(&u), model.apply_s(&v), model.apply_l(&u), model.apply_l(&v));
            skew = skew.max((inner_product(&su, &v) + inner_product(&u, &sv)).abs() / (norm(&su) * norm(&v)).max(1e-300));
            sym = sym.max((inner_product(&lu, &v) - inner_product(&u, &lv)).abs() / (norm(&lu) * norm(&v)).max(1e-300));
            neg = neg.max(-inner_product(&lu, &u) / (norm(&lu) * norm(&u)).max(1e-300));
            let sl = model.apply_sl(&u);
            comp = comp.max(sl.max_abs_diff(&model.apply_s(&lu)) / sl.max_abs().max(1e-300));
        }
        let worst = skew.max(sym).max(neg).max(comp);
        out.push(Check::new(
            format!("operators/{}", model.name()),
            worst <= OPERATOR_TOL,
            format!("skew {skew:.1e}, symmetry {sym:.1e}, negativity {neg:.1e}, composition {comp:.1e}"),
        ));
    }
    Ok(out)
}

pub fn tableau_checks() -> Result<Vec<Check>> {
    (1..=3)
        .map(|s| {
            let t = gauss_tableau(s)?;
            let (order, sympl) = (t.order_condition_defect(), t.symplecticity_defect());
            Ok(Check::new(
                format!("tableau/gauss{s}"),
                order < TABLEAU_TOL && sympl < TABLEAU_TOL,
                format!("order conditions {order:.1e}, symplecticity {sympl:.1e}"),
            ))
        })
        .collect()
}

/// Least-squares slope of `log₂ y` against `log₂ x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Max-norm distance between `Λ` prediction sweeps and the converged
/// Gauss stages over `Δt = 0.1·2^-k`, `k = 5..=9`, on the KdV soliton.
pub fn prediction_contact(stages: usize, sweeps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = KDV_ONE_SOLITON_DOMAIN;
    let model = Arc::new(Model::kdv(1.0, KDV_ONE_SOLITON_MU2.sqrt(), Grid::new_1d(lo, hi, 128)?)?);
    let z0 = InitialCondition::KdvOneSoliton.state(&model)?;
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for k in 5..=9 {
        let dt = 0.1 / 2f64.powi(k);
        let scheme = Scheme::new(model.clone(), SchemeConfig::lm_gauss(stages, dt).with_sweeps(sweeps))?;
        let predicted = scheme.predict_stages(&z0)?;
        let exact = scheme.gauss_stages(&z0)?;
        let e = predicted.iter().zip(&exact).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        dts.push(dt);
        errs.push(e);
    }
    Ok((dts, errs))
}

pub fn prediction_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in [2, 3] {
        for sweeps in 1..=3 {
            let (dts, errs) = prediction_contact(s, sweeps)?;
            let slope = loglog_slope(&dts, &errs);
            let want = (sweeps + 1) as f64;
            out.push(Check::new(
                format!("prediction/gauss{s}/sweeps{sweeps}"),
                (slope - want).abs() <= SLOPE_TOL,
                format!("slope {slope:.3}, expected {want}"),
            ));
        }
    }
    Ok(out)
}

/// Relative change of the KdV spatial mean over 50 steps of each scheme.
pub fn mass_checks() -> Result<Vec<Check>> {
    let (lo, hi) = KDV_ONE_SOLITON_DOMAIN;
    let model = Arc::new(Model::kdv(1.0, KDV_ONE_SOLITON_MU2.sqrt(), Grid::new_1d(lo, hi, 128)?)?);
    let z0 = InitialCondition::KdvOneSoliton.state(&model)?;
    let m0 = z0.mean(0);
    let dt = 0.002;
    let schemes = [
        SchemeConfig::lm_cn(dt),
        SchemeConfig::sav_cn(dt),
        SchemeConfig::lm_gauss(2, dt),
        SchemeConfig::lm_gauss(3, dt),
        SchemeConfig::gauss_fp(3, dt),
    ];
    schemes
        .iter()
        .map(|cfg| {
            let scheme = Scheme::new(model.clone(), cfg.clone())?;
            let mut traj = Trajectory::new(&scheme, z0.clone())?;
            let mut worst = 0.0f64;
            for _ in 0..50 {
                traj.step()?;
                worst = worst.max(((traj.state().mean(0) - m0) / m0).abs());
            }
            Ok(Check::new(
                format!("kdv-mass/{}", cfg.label()),
                worst <= MASS_TOL,
                format!("relative mean change {worst:.1e}"),
            ))
        })
        .collect()
}

fn strip_last_column(csv: &[u8]) -> String {
    String::from_utf8_lossy(csv)
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Two identical runs must produce identical CSV apart from wall times.
pub fn determinism_check(seed: u64) -> Result<Check> {
    let mut cfg = ExperimentConfig::testbed(InitialCondition::KdvOneSoliton, 64, 0.002, 0.04);
    cfg.seed = seed;
    let mut texts = Vec::new();
    for _ in 0..2 {
        let mut buf = Vec::new();
        for (id, kind) in [("lm-gauss2", SchemeKind::LmGauss), ("sav-cn", SchemeKind::SavCn)] {
            let scheme = id.parse::<crate::integrators::SchemeId>()?.config(cfg.dt);
            let rep = run_trajectory(&cfg, &scheme)?;
            write_series(&rep.series, kind, &mut buf)?;
        }
        texts.push(strip_last_column(&buf));
    }
    let same = texts[0] == texts[1];
    Ok(Check::new(
        "csv-determinism",
        same,
        if same { "identical bytes" } else { "outputs differ" },
    ))
}

/// Every suite, in a fixed order.
pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let mut checks = operator_checks(seed)?;
    checks.extend(tableau_checks()?);
    checks.extend(prediction_checks()?);
    checks.extend(mass_checks()?);
    checks.push(determinism_check(seed)?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn operator_and_tableau_suites_pass() {
        for c in operator_checks(7).unwrap().into_iter().chain(tableau_checks().unwrap()) {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn last_column_is_dropped() {
        assert_eq!(strip_last_column(b"a,b,c\n1,2,3\n"), "a,b\n1,2");
    }

    #[test]
    fn check_display() {
        let c = Check::new("x", false, "bad");
        assert_eq!(c.to_string(), "FAIL x: bad");
    }
}
