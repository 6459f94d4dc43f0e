//! Runs a configured experiment and collects a [`Report`].

use std::path::Path;
use std::time::Instant;

use crate::certify::{certify, fidelity_lower_bound, simulation_residual, CertifyOptions};
use crate::channels::{apply_channel, apply_channel_to_factors, channel_bound_sampled};
use crate::config::{ExperimentConfig, Mode};
use crate::error::{Error, Result};
use crate::linalg::{projector_rank, DensityMatrix, Ket};
use crate::multipartite::{
    build_family, fidelity_bound_multipartite, measurement_count, verify_family, FamilyOptions, DEFAULT_DIM_CAP,
};
use crate::report::{Report, TestRow};
use crate::stabilizer::{inequality_gap, projectors_valid, verify_stabilizer, BipartiteStabilizer};
use crate::tol;

pub const DIM_CAP_ENV: &str = "SEPSTAB_DIM_CAP";

/// The dimension cap from `SEPSTAB_DIM_CAP`, or the default.
pub fn dim_cap_from_env() -> Result<usize> {
    match std::env::var(DIM_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::Validation(format!("{DIM_CAP_ENV}='{v}' is not a positive integer"))),
        Err(_) => Ok(DEFAULT_DIM_CAP),
    }
}

/// The noisy preparation: the configured channel applied to `|psi><psi|`,
/// on `noise.factor` if given and on the whole space otherwise.
fn prepared_state(cfg: &ExperimentConfig, psi: &Ket, base: &Path) -> Result<DensityMatrix> {
    let pure = DensityMatrix::pure(psi);
    let factor = cfg.noise.as_ref().and_then(|n| n.factor);
    let d = factor.map_or(psi.dim(), |f| psi.dims()[f]);
    match (cfg.channel(d, base)?, factor) {
        (None, _) => Ok(pure),
        (Some(chan), Some(f)) => apply_channel(&chan, &pure, f),
        (Some(chan), None) => apply_channel_to_factors(&chan, &pure, 0, psi.parties()),
    }
}

fn certify_options(cfg: &ExperimentConfig) -> CertifyOptions {
    CertifyOptions {
        epsilon: cfg.epsilon.expect("validated"),
        delta: cfg.delta.expect("validated"),
        seed: cfg.seed.expect("validated"),
        samples: cfg.samples,
    }
}

fn add_estimate(report: &mut Report, est: &crate::certify::EstimateReport) {
    for t in &est.tests {
        report.tests.push(TestRow {
            label: t.label.clone(),
            samples: est.samples_per_test,
            accepted: t.accepted,
            pass_rate: t.pass_rate,
            exact: t.exact,
        });
    }
    report.bound("plug_in_bound", est.fidelity_lower_bound);
    report.bound("confidence_adjusted_bound", est.confidence_adjusted_bound);
    report.bound("exact_bound", est.exact_bound);
    report.bound("fidelity_squared", est.fidelity_squared);
    report.info("epsilon", est.epsilon);
    report.info("delta", est.delta);
    report.info("samples_per_test", est.samples_per_test);
    report.check("exact_bound_sound", est.exact_bound <= est.fidelity_squared + tol::STAB);
}

fn run_bipartite(cfg: &ExperimentConfig, mode: Mode, psi: &Ket, base: &Path, report: &mut Report) -> Result<()> {
    let order = cfg.order(2);
    let chain = psi.permute(&order)?;
    let stab = match cfg.conjugate_basis_for(psi.dims())? {
        Some(b) => BipartiteStabilizer::with_basis(&chain, 1, b)?,
        None => BipartiteStabilizer::new(&chain, 1)?,
    };
    let r = verify_stabilizer(&stab);
    for (name, v) in r.named() {
        report.residual(name, v);
    }
    report.check("stabilizer_identities", r.passed());
    report.check("projectors", projectors_valid(&stab));
    report.info("schmidt_coefficients", stab.schmidt().coefficients());
    report.info("rank_P", projector_rank(stab.p())?);
    report.info("rank_Q", projector_rank(stab.q())?);

    match mode {
        Mode::Construct => {}
        Mode::Verify => {
            let gap = inequality_gap(&stab)?;
            report.residual("inequality_min_eigenvalue", gap);
            report.check("operator_inequality", gap >= -tol::PSD);
            let rho = prepared_state(cfg, psi, base)?.permute(&order)?;
            let bound = fidelity_lower_bound(&rho, &stab)?;
            let fid = rho.fidelity_squared(&chain)?;
            report.bound("exact_bound", bound);
            report.bound("fidelity_squared", fid);
            report.check("exact_bound_sound", bound <= fid + tol::STAB);
            let sim = simulation_residual(&rho, &stab)?;
            report.residual("simulation", sim);
            report.check("simulation_faithful", sim <= tol::STAB);
        }
        Mode::Certify => {
            let rho = prepared_state(cfg, psi, base)?.permute(&order)?;
            let est = certify(&rho, &stab, &certify_options(cfg))?;
            add_estimate(report, &est);
        }
        Mode::ChannelBound => {
            let d = stab.dim_b();
            let chan = cfg.channel(d, base)?.expect("validated");
            let opts = certify_options(cfg);
            let cb = channel_bound_sampled(&chan, &stab, opts.epsilon, opts.delta, opts.seed)?;
            report.residual("identity_P", cb.identity_residual_p);
            report.residual("identity_Q", cb.identity_residual_q);
            report.bound("ent_fidelity_sq", cb.ent_fidelity_sq);
            report.bound("ensemble_term_schmidt", cb.ensemble_term_schmidt);
            report.bound("ensemble_term_conj", cb.ensemble_term_conj);
            report.bound("bound", cb.bound);
            report.check("channel_bound", cb.passed());
            if let Some(s) = &cb.sampled {
                report.bound("mean_schmidt", s.mean_schmidt);
                report.bound("mean_conj", s.mean_conj);
                report.bound("adjusted_bound", s.adjusted_bound);
                report.info("samples_per_term", s.samples_per_term);
                report.info("epsilon", s.epsilon);
                report.info("delta", s.delta);
            }
        }
    }
    Ok(())
}

fn run_family(
    cfg: &ExperimentConfig,
    mode: Mode,
    psi: &Ket,
    base: &Path,
    dim_cap: usize,
    report: &mut Report,
) -> Result<()> {
    let order = cfg.order(psi.parties());
    let opts = FamilyOptions { dim_cap, level_bases: vec![cfg.conjugate_basis_for(psi.dims())?] };
    let fam = build_family(psi, &order, &opts)?;
    let r = verify_family(&fam);
    for (name, v) in r.named() {
        report.residual(name, v);
    }
    report.check("family_identities", r.passed());
    report.info("leaves", fam.leaves().len());
    let d = psi.dims()[0];
    if d >= 2 && psi.dims().iter().all(|&x| x == d) {
        report.info("measurement_count", measurement_count(psi.parties(), d)?);
    }

    match mode {
        Mode::Construct => {}
        Mode::Verify => {
            let rho = prepared_state(cfg, psi, base)?;
            let bound = fidelity_bound_multipartite(&rho, &fam)?;
            let fid = rho.fidelity_squared(psi)?;
            report.bound("exact_bound", bound);
            report.bound("fidelity_squared", fid);
            report.check("exact_bound_sound", bound <= fid + tol::STAB);
            let sim = simulation_residual(&rho, &fam)?;
            report.residual("simulation", sim);
            report.check("simulation_faithful", sim <= tol::STAB);
        }
        Mode::Certify => {
            let rho = prepared_state(cfg, psi, base)?;
            let est = certify(&rho, &fam, &certify_options(cfg))?;
            add_estimate(report, &est);
        }
        Mode::ChannelBound => unreachable!("validated as bipartite"),
    }
    Ok(())
}

/// Runs `cfg` in `mode` (or the config's own mode). Kraus files are resolved
/// relative to `base`.
pub fn run(cfg: &ExperimentConfig, mode: Option<Mode>, base: &Path, dim_cap: usize) -> Result<Report> {
    let start = Instant::now();
    let mode = mode
        .or(cfg.mode)
        .ok_or_else(|| Error::Validation("no mode given on the command line or in the config".into()))?;
    cfg.validate()?;
    cfg.validate_for(mode)?;
    let psi = cfg.target_ket(dim_cap)?;
    let mut report = Report::new(mode, cfg.clone());
    report.info("dims", psi.dims());
    report.info("party_order", cfg.order(psi.parties()));
    if psi.parties() == 2 {
        run_bipartite(cfg, mode, &psi, base, &mut report)?;
    } else {
        run_family(cfg, mode, &psi, base, dim_cap, &mut report)?;
    }
    report.elapsed = Some(start.elapsed());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(text: &str, mode: Mode) -> Report {
        run(&parse_config(text).unwrap(), Some(mode), Path::new("."), DEFAULT_DIM_CAP).unwrap()
    }

    #[test]
    fn construct_bell() {
        let r = run_text("[target]\ngenerator = \"bell\"\n", Mode::Construct);
        assert!(r.passed);
        assert!(r.residual.values().all(|&v| v <= 1e-12), "{:?}", r.residual);
        assert!(r.residual.contains_key("PQ_minus_psi") && r.residual.contains_key("commutator"));
    }

    #[test]
    fn verify_noisy_ghz() {
        let r = run_text("[target]\ngenerator = \"ghz\"\n[noise]\nname = \"depolarizing\"\np = 0.1\n", Mode::Verify);
        assert!(r.passed, "{:?}", r.checks);
        assert!((r.bounds["fidelity_squared"] - (0.9 + 0.1 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn certify_noisy_bell() {
        let text = "epsilon = 0.05\ndelta = 0.01\nseed = 11\n[target]\ngenerator = \"bell\"\n[noise]\nname = \"depolarizing\"\np = 0.2\n";
        let r = run_text(text, Mode::Certify);
        assert!(r.passed);
        assert!((r.bounds["exact_bound"] - 0.8).abs() < 1e-12);
        assert!((r.bounds["confidence_adjusted_bound"] - 0.8).abs() <= 0.15);
        assert_eq!(r.tests[0].samples, 1199);
    }

    #[test]
    fn channel_bound_identity() {
        let text =
            "epsilon = 0.05\ndelta = 0.01\nseed = 1\n[target]\ngenerator = \"bell\"\n[noise]\nname = \"identity\"\n";
        let r = run_text(text, Mode::ChannelBound);
        assert!(r.passed);
        assert!((r.bounds["bound"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_mode_and_fields() {
        let cfg = parse_config("[target]\ngenerator = \"bell\"\n").unwrap();
        assert!(matches!(run(&cfg, None, Path::new("."), 4096), Err(Error::Validation(_))));
        assert!(matches!(run(&cfg, Some(Mode::Certify), Path::new("."), 4096), Err(Error::Validation(_))));
    }
}
