//! Experiment definitions: which settings each accepts, how they resolve to
//! a scenario, and the CSV each one writes.

use std::collections::BTreeSet;

use adglab::analytic_ppp::{closed_form_applies, ppp_success_curve};
use adglab::gain::{
    adg_from_kappa, adg_horizontal_shift, deployment_gain, ergodic_rate_from_adg, ergodic_rate_of,
    ergodic_rate_shifted, mean_sinr_from_adg, mean_sinr_of, outage_slope, ppp_kappa_for,
    reference_scenario, AdgEstimate, Baseline,
};
use adglab::io::{self, num, AdgRow};
use adglab::point_process::{empirical_contact_ccdf, intensity_of, sample_seeded};
use adglab::sinr_mc::{noise_for_snr_db, simulate, theta_grid_db, SinrBatch};
use adglab::{
    FadingModel, PathLossKind, PathLossModel, ProcessModel, Scenario, SuccessCurve, Topology,
    Window,
};

use crate::config::{ConfigError, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SamplePp,
    SuccessCurve,
    Adg,
    Slope,
    Rate,
    MeanSinr,
    ContactCcdf,
    Kappa,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SamplePp => "sample-pp",
            Experiment::SuccessCurve => "success-curve",
            Experiment::Adg => "adg",
            Experiment::Slope => "slope",
            Experiment::Rate => "rate",
            Experiment::MeanSinr => "mean-sinr",
            Experiment::ContactCcdf => "contact-ccdf",
            Experiment::Kappa => "kappa",
        }
    }

    fn extra_keys(self) -> &'static [&'static str] {
        match self {
            Experiment::SamplePp => &[],
            Experiment::SuccessCurve => &["analytic", "theta_min", "theta_max", "theta_step"],
            Experiment::Adg => &[
                "theta_min",
                "theta_max",
                "theta_step",
                "p_lo",
                "p_hi",
                "p_target",
            ],
            Experiment::Slope => &["theta_min", "theta_max", "theta_step", "fit_lo", "fit_hi"],
            Experiment::Rate | Experiment::MeanSinr | Experiment::Kappa => &[],
            Experiment::ContactCcdf => &["x_max", "x_step"],
        }
    }

    fn uses_channel(self) -> bool {
        !matches!(self, Experiment::SamplePp | Experiment::ContactCcdf)
    }
}

const BASE_KEYS: &[&str] = &["seed", "process", "window", "topology", "out", "n"];
const CHANNEL_KEYS: &[&str] = &["path_loss", "alpha", "fading", "snr_db", "noise"];

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Runtime(adglab::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<adglab::Error> for RunError {
    fn from(e: adglab::Error) -> Self {
        RunError::Runtime(e)
    }
}

fn semantic(s: &Settings, key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::new(s.origin_of(key), key, msg)
}

fn process_from(
    s: &Settings,
    keys: &mut BTreeSet<&'static str>,
) -> Result<ProcessModel, ConfigError> {
    let name: String = s.get_or("process", "ppp".to_string())?;
    let p = match name.as_str() {
        "ppp" => {
            keys.insert("lambda");
            ProcessModel::Ppp {
                lambda: s.get_or("lambda", 0.1)?,
            }
        }
        "mcp" => {
            keys.extend(["parent_lambda", "mean_daughters", "cluster_radius"]);
            let ProcessModel::Mcp {
                parent_lambda,
                mean_daughters,
                cluster_radius,
            } = ProcessModel::MCP_REFERENCE
            else {
                unreachable!()
            };
            ProcessModel::Mcp {
                parent_lambda: s.get_or("parent_lambda", parent_lambda)?,
                mean_daughters: s.get_or("mean_daughters", mean_daughters)?,
                cluster_radius: s.get_or("cluster_radius", cluster_radius)?,
            }
        }
        "mhp" => {
            keys.extend(["base_lambda", "hard_core"]);
            let ProcessModel::Mhp2 {
                base_lambda,
                hard_core,
            } = ProcessModel::MHP_REFERENCE
            else {
                unreachable!()
            };
            ProcessModel::Mhp2 {
                base_lambda: s.get_or("base_lambda", base_lambda)?,
                hard_core: s.get_or("hard_core", hard_core)?,
            }
        }
        "lattice" => {
            keys.insert("lambda");
            ProcessModel::TriLattice {
                lambda: s.get_or("lambda", 0.1)?,
            }
        }
        other => {
            return Err(semantic(
                s,
                "process",
                format!("unknown process `{other}` (ppp, mcp, mhp, lattice)"),
            ));
        }
    };
    p.validate()
        .map_err(|e| semantic(s, "process", e.to_string()))?;
    Ok(p)
}

fn fading_from(
    s: &Settings,
    keys: &mut BTreeSet<&'static str>,
) -> Result<FadingModel, ConfigError> {
    let name: String = s.get_or("fading", "rayleigh".to_string())?;
    let f = match name.as_str() {
        "rayleigh" => FadingModel::Rayleigh,
        "nakagami" => {
            keys.insert("m");
            FadingModel::Nakagami { m: s.require("m")? }
        }
        "lognormal" => {
            keys.insert("sigma_db");
            FadingModel::LogNormal {
                sigma_db: s.require("sigma_db")?,
            }
        }
        "composite" => {
            keys.extend(["m", "sigma_db"]);
            FadingModel::Composite {
                m: s.require("m")?,
                sigma_db: s.require("sigma_db")?,
            }
        }
        other => {
            return Err(semantic(
                s,
                "fading",
                format!("unknown fading `{other}` (rayleigh, nakagami, lognormal, composite)"),
            ));
        }
    };
    f.validate()
        .map_err(|e| semantic(s, "fading", e.to_string()))?;
    Ok(f)
}

/// Everything an experiment needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: Experiment,
    pub scenario: Scenario,
    pub n: usize,
    pub settings: Settings,
}

pub fn resolve(experiment: Experiment, s: &Settings) -> Result<Resolved, ConfigError> {
    let mut keys: BTreeSet<&'static str> = BASE_KEYS.iter().copied().collect();
    keys.extend(experiment.extra_keys());
    let analytic = experiment == Experiment::SuccessCurve && s.get_bool("analytic")?;
    let process = process_from(s, &mut keys)?;

    let default_kind = if analytic { "singular" } else { "nonsingular" };
    let mut path_loss = PathLossModel {
        kind: PathLossKind::NonSingular,
        alpha: 4.0,
    };
    let mut fading = FadingModel::Rayleigh;
    let mut noise_w = 0.0;
    if experiment.uses_channel() {
        keys.extend(CHANNEL_KEYS);
        let kind: String = s.get_or("path_loss", default_kind.to_string())?;
        path_loss.kind = match kind.as_str() {
            "nonsingular" | "non-singular" => PathLossKind::NonSingular,
            "singular" => PathLossKind::Singular,
            other => {
                return Err(semantic(
                    s,
                    "path_loss",
                    format!("unknown path loss `{other}` (nonsingular, singular)"),
                ));
            }
        };
        path_loss.alpha = s.get_or("alpha", 4.0)?;
        path_loss
            .validate()
            .map_err(|e| semantic(s, "alpha", e.to_string()))?;
        fading = fading_from(s, &mut keys)?;
        match (s.get::<f64>("snr_db")?, s.get::<f64>("noise")?) {
            (Some(_), Some(_)) => {
                return Err(semantic(s, "noise", "set either snr_db or noise, not both"))
            }
            (Some(snr), None) => noise_w = noise_for_snr_db(snr, path_loss.kind),
            (None, Some(w)) => noise_w = w,
            (None, None) => {}
        }
    }
    s.check_known(&keys)?;

    let side: f64 = s.get_or("window", 100.0)?;
    let topology = match s.get_or("topology", "torus".to_string())?.as_str() {
        "torus" => Topology::Torus,
        "plane" => Topology::PlaneWithGuard,
        other => {
            return Err(semantic(
                s,
                "topology",
                format!("unknown topology `{other}` (torus, plane)"),
            ))
        }
    };
    let window =
        Window::new(side, side, topology).map_err(|e| semantic(s, "window", e.to_string()))?;
    let seed: u64 = if analytic {
        s.get_or("seed", 0)?
    } else {
        s.require("seed")?
    };
    let n: usize = s.get_or("n", 10_000)?;
    if n == 0 {
        return Err(semantic(s, "n", "must be > 0"));
    }
    let scenario = Scenario {
        process,
        path_loss,
        fading,
        noise_w,
        window,
        seed,
        probes_per_pattern: 1,
    };
    scenario
        .validate()
        .map_err(|e| semantic(s, "window", e.to_string()))?;
    if analytic {
        if !matches!(process, ProcessModel::Ppp { .. }) {
            return Err(semantic(
                s,
                "process",
                "the analytic curve exists only for ppp",
            ));
        }
        if !closed_form_applies(&fading, &path_loss, noise_w) {
            return Err(semantic(
                s,
                "analytic",
                "the analytic curve needs rayleigh fading, singular path loss and no noise",
            ));
        }
    }
    Ok(Resolved {
        experiment,
        scenario,
        n,
        settings: s.clone(),
    })
}

fn grid(s: &Settings, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, ConfigError> {
    let lo = s.get_or("theta_min", lo)?;
    let hi = s.get_or("theta_max", hi)?;
    let step = s.get_or("theta_step", step)?;
    if !(step > 0.0) || !(hi > lo) {
        return Err(semantic(
            s,
            "theta_step",
            "need theta_max > theta_min and theta_step > 0",
        ));
    }
    Ok(theta_grid_db(lo, hi, step))
}

fn csv(f: impl FnOnce(&mut Vec<u8>) -> adglab::Result<()>) -> Result<Vec<u8>, RunError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn labels(sc: &Scenario) -> [String; 3] {
    [
        sc.process.label().to_string(),
        sc.fading.label(),
        num(sc.path_loss.alpha),
    ]
}

/// Kappa-ratio ADG from an existing batch, against the matched Poisson network.
fn adg_of(batch: &SinrBatch, n: usize) -> Result<AdgEstimate, RunError> {
    let sc = &batch.scenario;
    let kappa = batch.kappa()?;
    let kappa_ppp = ppp_kappa_for(sc, intensity_of(&sc.process), n)?;
    Ok(adg_from_kappa(&kappa, &kappa_ppp)?)
}

/// Runs the experiment and returns the CSV bytes.
pub fn run(r: &Resolved) -> Result<Vec<u8>, RunError> {
    let s = &r.settings;
    let sc = r.scenario;
    let n = r.n;
    match r.experiment {
        Experiment::SamplePp => {
            let p = sample_seeded(&sc.process, &sc.window, sc.seed)?;
            csv(|b| io::write_pattern(b, &p))
        }
        Experiment::SuccessCurve => {
            let g = grid(s, -40.0, 20.0, 1.0)?;
            let curve = if s.get_bool("analytic")? {
                ppp_success_curve(&g, sc.path_loss.alpha)?
            } else {
                simulate(&sc, n)?.success_curve(&g)
            };
            csv(|b| io::write_success_curve(b, &curve))
        }
        Experiment::Adg => run_adg(r),
        Experiment::Slope => {
            let g = grid(s, -40.0, 20.0, 1.0)?;
            let range = (s.get_or("fit_lo", -30.0)?, s.get_or("fit_hi", -15.0)?);
            let fit = outage_slope(&simulate(&sc, n)?.success_curve(&g), range)?;
            let [p, f, a] = labels(&sc);
            let row = vec![
                p,
                f,
                a,
                num(range.0),
                num(range.1),
                num(fit.db_per_decade),
                num(fit.stderr),
                fit.points.to_string(),
                num(fit.r2),
            ];
            let header = [
                "process",
                "fading",
                "alpha",
                "fit_lo_db",
                "fit_hi_db",
                "slope_db_per_decade",
                "stderr",
                "points",
                "r2",
            ];
            csv(|b| io::write_rows(b, &header, [row]))
        }
        Experiment::Rate => {
            let batch = simulate(&sc, n)?;
            let rate = ergodic_rate_of(&batch);
            let adg = adg_of(&batch, n)?;
            let approx = ergodic_rate_from_adg(adg.g_hat, sc.path_loss.alpha)?;
            let shifted = ergodic_rate_shifted(&simulate(&reference_scenario(&sc), n)?, adg.g_hat)?;
            let [p, f, a] = labels(&sc);
            let row = vec![
                p,
                f,
                a,
                num(rate.value),
                num(rate.stderr),
                num(adg.g_hat),
                num(approx),
                num(shifted.value),
            ];
            let header = [
                "process",
                "fading",
                "alpha",
                "rate_mc",
                "stderr",
                "g_hat",
                "rate_adg",
                "rate_adg_simulated",
            ];
            csv(|b| io::write_rows(b, &header, [row]))
        }
        Experiment::MeanSinr => {
            if sc.path_loss.kind == PathLossKind::Singular {
                return Err(adglab::Error::SingularMeanDiverges.into());
            }
            let batch = simulate(&sc, n)?;
            let mean = mean_sinr_of(&batch)?;
            let mean_ppp = mean_sinr_of(&simulate(&reference_scenario(&sc), n)?)?;
            let adg = adg_of(&batch, n)?;
            let [p, f, a] = labels(&sc);
            let row = vec![
                p,
                f,
                a,
                num(sc.noise_w),
                num(mean.value),
                num(mean.stderr),
                num(adg.g_hat),
                num(mean_ppp.value),
                num(mean_sinr_from_adg(adg.g_hat, mean_ppp.value)),
            ];
            let header = [
                "process",
                "fading",
                "alpha",
                "noise",
                "mean_sinr",
                "stderr",
                "g_hat",
                "mean_sinr_ppp",
                "mean_sinr_adg",
            ];
            csv(|b| io::write_rows(b, &header, [row]))
        }
        Experiment::ContactCcdf => {
            let x_max: f64 = s.get_or("x_max", 12.0)?;
            let x_step: f64 = s.get_or("x_step", 0.25)?;
            if !(x_max > 0.0 && x_step > 0.0) {
                return Err(semantic(s, "x_step", "x_max and x_step must be > 0").into());
            }
            let radii = theta_grid_db(0.0, x_max, x_step);
            let c = empirical_contact_ccdf(&sc.process, &sc.window, &radii, n, sc.seed)?;
            csv(|b| io::write_contact_ccdf(b, &c))
        }
        Experiment::Kappa => {
            let k = simulate(&sc, n)?.kappa()?;
            let [p, f, a] = labels(&sc);
            let row = vec![
                p,
                f,
                a,
                num(k.kappa),
                num(k.stderr),
                k.n.to_string(),
                num(k.m),
            ];
            let header = ["process", "fading", "alpha", "kappa", "stderr", "n", "m"];
            csv(|b| io::write_rows(b, &header, [row]))
        }
    }
}

fn run_adg(r: &Resolved) -> Result<Vec<u8>, RunError> {
    let s = &r.settings;
    let sc = r.scenario;
    let g = grid(s, -60.0, 20.0, 0.1)?;
    let p_window = (s.get_or("p_lo", 0.99)?, s.get_or("p_hi", 0.9999)?);
    if !(0.0 < p_window.0 && p_window.0 < p_window.1 && p_window.1 < 1.0) {
        return Err(semantic(s, "p_lo", "need 0 < p_lo < p_hi < 1").into());
    }
    let batch = simulate(&sc, r.n)?;
    let kappa_row = adg_of(&batch, r.n)?;
    let curve = batch.success_curve(&g);
    let reference: Option<SuccessCurve> =
        if closed_form_applies(&sc.fading, &sc.path_loss, sc.noise_w) {
            None
        } else {
            Some(simulate(&reference_scenario(&sc), r.n)?.success_curve(&g))
        };
    let baseline = match &reference {
        Some(c) => Baseline::Curve(c),
        None => Baseline::PppRayleigh {
            alpha: sc.path_loss.alpha,
        },
    };
    let shift_row = adg_horizontal_shift(&curve, baseline, p_window, kappa_row.m)?;
    let [process, fading, _] = labels(&sc);
    let row = |estimate| AdgRow {
        process: process.clone(),
        fading: fading.clone(),
        alpha: sc.path_loss.alpha,
        estimate,
    };
    let mut records = vec![row(kappa_row).record(), row(shift_row).record()];
    if let Some(p_t) = s.get::<f64>("p_target")? {
        if !(0.0 < p_t && p_t < 1.0) {
            return Err(semantic(s, "p_target", "must lie in (0, 1)").into());
        }
        let d = deployment_gain(&curve, baseline, p_t)?;
        records.push(vec![
            process.clone(),
            fading.clone(),
            num(sc.path_loss.alpha),
            format!("deployment_gain@{p_t}"),
            num(d),
            num(10.0 * d.log10()),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    csv(|b| io::write_rows(b, &io::ADG_HEADER, records))
}
