//! Experiment runners behind the CLI: each produces deterministic CSV data
//! (full double precision, 17 significant digits) plus a JSON sidecar with
//! the fully resolved configuration and library version.

use crate::bounds::{self, BoundForm, ErrorType};
use crate::error::{Error, Result};
use crate::exact::lanczos::{ground_space, hamiltonian_expectation, HamiltonianSpec};
use crate::exact::{self, StateVector};
use crate::lrfd::{build_lrfd, build_perturbed_cluster, build_kron_delta, certified_beta3,
                  eta_surface, kron_ratio_exact, kron_ratio_lower_bound, DecayProfile};
use crate::presets::{self, Preset};
use crate::rbm::{truncate, RbmParams, TranslationInvariantRbm};
use crate::spinspace::PauliString;
use crate::vmc::{train, VmcConfig};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Full-precision float formatting: 17 significant digits.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output directory handle; every CSV gets a `<name>.meta.json` sidecar.
pub struct RunWriter {
    dir: PathBuf,
    command: String,
    seed: u64,
    version: &'static str,
}

impl RunWriter {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn write_sidecar(&self, csv_name: &str, config: serde_json::Value) -> Result<PathBuf> {
        let path = self.dir.join(format!("{csv_name}.meta.json"));
        let doc = json!({
            "command": self.command,
            "seed": self.seed,
            "version": self.version,
            "config": config,
        });
        std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
        Ok(path)
    }
}

fn zz12(l: usize) -> PauliString {
    PauliString::pair(l, 1, 2, 3).expect("valid pair")
}

fn xx12(l: usize) -> PauliString {
    PauliString::pair(l, 1, 2, 1).expect("valid pair")
}

/// Truncation-error sweep against the level-resolved bounds for the
/// perturbed-cluster presets. The `Nh` column counts profile (perturbation)
/// nodes — the quantity the bound machinery is parametrized by; the kept
/// hidden layer additionally always contains the L cluster nodes.
pub fn run_trunc_sweep(
    w: &RunWriter,
    preset: Preset,
    l: usize,
    nh_max: usize,
    proxy_levels: usize,
) -> Result<PathBuf> {
    let profile = match preset {
        Preset::Fig2a => presets::fig2a_profile(),
        Preset::Fig2b => presets::fig2b_profile(),
        other => {
            return Err(Error::Config(format!(
                "trunc-sweep expects fig2a or fig2b, got {}",
                other.name()
            )))
        }
    };
    let n_theta = bounds::n_theta(&profile, l)?;
    let n_min = n_theta + 1;
    let header = "Nh,exact_l2,bound_l2,exact_CZ,exact_CX,bound_exp";
    let config = json!({
        "preset": preset.name(),
        "L": l,
        "Nh_max": nh_max,
        "proxy_levels": proxy_levels,
        "n_theta": n_theta,
        "cluster_nodes_additionally_kept": l,
        "profile": profile,
    });

    if n_min * l > nh_max {
        let path = w.write_csv("trunc_sweep.csv", header, &[])?;
        let mut cfg = config;
        cfg["status"] = json!(format!(
            "Nh_max = {nh_max} is below the minimal admissible Nh = {}; no data",
            n_min * l
        ));
        w.write_sidecar("trunc_sweep.csv", cfg)?;
        return Ok(path);
    }

    let full_params = build_perturbed_cluster(l, &profile, proxy_levels)?;
    let full = exact::build_state(&full_params)?;
    let zz = zz12(l);
    let xx = xx12(l);
    let zz_full = exact::expectation(&full, &zz)?;
    let xx_full = exact::expectation(&full, &xx)?;

    let mut rows = Vec::new();
    for n in n_min..=nh_max / l {
        let tr = truncate(&full_params, (1 + n) * l)?;
        let tr_state = exact::build_state(&tr)?;
        let e_l2 = exact::error_l2(&full, &tr_state)?;
        let e_zz = (zz_full - exact::expectation(&tr_state, &zz)?).abs();
        let e_xx = (xx_full - exact::expectation(&tr_state, &xx)?).abs();
        let (b1, b2) = bounds::truncation_error_bounds(&profile, l, n * l)?;
        rows.push(format!(
            "{},{},{},{},{},{}",
            n * l,
            g17(e_l2),
            g17(b1),
            g17(e_zz),
            g17(e_xx),
            g17(b2)
        ));
    }
    let path = w.write_csv("trunc_sweep.csv", header, &rows)?;
    w.write_sidecar("trunc_sweep.csv", config)?;
    Ok(path)
}

/// Exact-search N_h* against the bound-implied upper bounds, over a range of
/// chain lengths. The exact search bisects the (monotone beyond the first
/// levels) truncation error measured against the finite proxy.
pub fn run_nh_scaling(
    w: &RunWriter,
    preset: Preset,
    eps_list: &[f64],
    l_range: (usize, usize),
    proxy_levels: usize,
) -> Result<PathBuf> {
    let profile = match preset {
        Preset::Fig2a => presets::fig2a_profile(),
        Preset::Fig2b => presets::fig2b_profile(),
        other => {
            return Err(Error::Config(format!(
                "nh-scaling expects fig2a or fig2b, got {}",
                other.name()
            )))
        }
    };
    let header = "L,eps,Nh_star_exact_search,Nh_star_bound_exact_F,Nh_star_bound_leading";
    let mut rows = Vec::new();
    for l in l_range.0..=l_range.1 {
        let full_params = build_perturbed_cluster(l, &profile, proxy_levels)?;
        let full = exact::build_state(&full_params)?;
        let mut cache: BTreeMap<usize, f64> = BTreeMap::new();
        let mut err_at = |n: usize| -> Result<f64> {
            if let Some(&e) = cache.get(&n) {
                return Ok(e);
            }
            let tr = exact::build_state(&truncate(&full_params, (1 + n) * l)?)?;
            let e = exact::error_l2(&full, &tr)?;
            cache.insert(n, e);
            Ok(e)
        };
        for &eps in eps_list {
            // bisect the smallest n with ε(n) ≤ eps on [1, proxy_levels]
            let mut lo = 1usize;
            let mut hi = proxy_levels;
            if err_at(lo)? <= eps {
                hi = lo;
            } else {
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if err_at(mid)? <= eps {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            let exact_nh = hi * l;
            let b_exact =
                bounds::nh_star_bound(&profile, l, eps, ErrorType::StateL2, BoundForm::Exact)?;
            let b_lead = bounds::nh_star_bound(
                &profile,
                l,
                eps,
                ErrorType::StateL2,
                BoundForm::LeadingOrder,
            )?;
            rows.push(format!("{},{},{},{},{}", l, g17(eps), exact_nh, b_exact, b_lead));
        }
    }
    let path = w.write_csv("nh_scaling.csv", header, &rows)?;
    w.write_sidecar(
        "nh_scaling.csv",
        json!({
            "preset": preset.name(),
            "eps": eps_list,
            "L_min": l_range.0,
            "L_max": l_range.1,
            "proxy_levels": proxy_levels,
            "profile": profile,
            "note": "Nh columns count profile nodes; the cluster level is always kept",
        }),
    )?;
    Ok(path)
}

/// Correlation curves (main panel, δ_Q = 0.2) plus the half-chain inset
/// (δ_Q = 0.5) for even chain lengths.
pub fn run_correlations(
    w: &RunWriter,
    alpha_q_list: &[f64],
    l_list: &[usize],
    levels: usize,
) -> Result<PathBuf> {
    let header = "panel,alpha_Q,L,r,corr_exact,corr_leading";
    let mut rows = Vec::new();
    for &alpha_q in alpha_q_list {
        let profile = presets::fig3_profile(alpha_q)?;
        for &l in l_list {
            let t = build_lrfd(&profile, l, levels)?;
            let rs: Vec<usize> = (0..=l / 2).collect();
            let exact_vals = exact::corr_z_stream(&t, &rs)?;
            let p = t.expand();
            for (&r, &ce) in rs.iter().zip(&exact_vals) {
                let lead = exact::corr_z_leading(&p, r)?;
                rows.push(format!(
                    "main,{},{},{},{},{}",
                    g17(alpha_q),
                    l,
                    r,
                    g17(ce),
                    g17(lead)
                ));
            }
        }
    }
    // half-chain inset: stronger orbital, α_Q ∈ {1/2, 2}, r = L/2
    for &alpha_q in &[0.5, 2.0] {
        let profile = presets::fig3_inset_profile(alpha_q)?;
        for &l in l_list {
            if l % 2 != 0 {
                continue;
            }
            let t = build_lrfd(&profile, l, levels)?;
            let r = l / 2;
            let ce = exact::corr_z_stream(&t, &[r])?[0];
            let lead = exact::corr_z_leading(&t.expand(), r)?;
            rows.push(format!(
                "inset,{},{},{},{},{}",
                g17(alpha_q),
                l,
                r,
                g17(ce),
                g17(lead)
            ));
        }
    }
    let path = w.write_csv("correlations.csv", header, &rows)?;
    w.write_sidecar(
        "correlations.csv",
        json!({
            "alpha_Q": alpha_q_list,
            "L": l_list,
            "levels": levels,
            "main_delta_Q": 0.2,
            "inset_delta_Q": 0.5,
            "inset_alpha_Q": [0.5, 2.0],
        }),
    )?;
    Ok(path)
}

pub enum EtaSource {
    Preset { preset: Preset, l: usize, alpha: usize },
    Checkpoint(PathBuf),
}

/// η-surface grid and ridge of a profile preset or a trained checkpoint.
pub fn run_eta(w: &RunWriter, source: EtaSource) -> Result<PathBuf> {
    let (t, desc) = match source {
        EtaSource::Preset { preset, l, alpha } => {
            let profile = match preset {
                Preset::Fig1b => presets::fig1b_profile(),
                other => presets::preset_profile(other),
            };
            (build_lrfd(&profile, l, alpha)?, json!({
                "source": "preset",
                "preset": preset.name(),
                "L": l,
                "alpha": alpha,
            }))
        }
        EtaSource::Checkpoint(path) => {
            let t = TranslationInvariantRbm::load(&path)?;
            let p = json!({"source": "checkpoint", "path": path.display().to_string()});
            (t, p)
        }
    };
    let reordered = t.reorder();
    let eta = eta_surface(&reordered)?;
    let mut grid_rows = Vec::new();
    for kt in 1..=eta.alpha {
        for j in 1..=eta.l {
            grid_rows.push(format!("{},{},{}", j, kt, g17(eta.value(j, kt))));
        }
    }
    let ridge = eta.ridge();
    let ridge_rows: Vec<String> = ridge
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{},{}", i + 1, g17(v)))
        .collect();
    let slope = eta.ridge_slope(0);
    let slope_skip = eta.ridge_slope(1);
    let path = w.write_csv("eta_grid.csv", "j,k_tilde,eta", &grid_rows)?;
    w.write_csv("eta_ridge.csv", "k_tilde,max_eta", &ridge_rows)?;
    let mut cfg = desc;
    cfg["fitted_slope"] = json!(slope);
    cfg["fitted_slope_skip_first"] = json!(slope_skip);
    cfg["fitted_alpha_P"] = json!(slope.map(|s| -s / 2.0));
    cfg["fitted_alpha_P_skip_first"] = json!(slope_skip.map(|s| -s / 2.0));
    w.write_sidecar("eta_grid.csv", cfg.clone())?;
    w.write_sidecar("eta_ridge.csv", cfg)?;
    Ok(path)
}

/// Amplitude spectra of the delta-state family and the certified ratio
/// lower bound as δ_P decreases toward 1.
pub fn run_kron(w: &RunWriter, delta_p_list: &[f64], l: usize, mu0: f64) -> Result<PathBuf> {
    let beta3 = certified_beta3();
    let mut spectrum_rows = Vec::new();
    let mut inset_rows = Vec::new();
    for &dp in delta_p_list {
        if !(dp > 1.0) {
            return Err(Error::Config(format!("δ_P must exceed 1, got {dp}")));
        }
        // enough levels that discarded tails are below double precision
        let alpha = ((40.0 / dp.ln()).ceil() as usize).clamp(40, 1200);
        let lambda = presets::fig5_lambda(dp);
        let t = build_kron_delta(l, mu0, lambda.clone(), alpha)?;
        let sv = exact::build_state_ti(&t)?;
        let z = sv.norm_sq();
        let mut probs: Vec<f64> = sv.amps().iter().map(|a| a.norm_sqr() / z).collect();
        probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (rank, p) in probs.iter().enumerate() {
            spectrum_rows.push(format!("{},{},{}", g17(dp), rank, g17(*p)));
        }

        // k̃₀: first level index beyond which (L−1)μ₀λ(k̃) < 1/2
        let profile = DecayProfile::new(
            lambda.clone(),
            crate::lrfd::MuKind::Constant { mu0 },
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
        )?;
        let mut kt0 = 0usize;
        while (l as f64 - 1.0) * mu0 * profile.lambda_bound(kt0 + 1) >= 0.5 {
            kt0 += 1;
        }
        let ratio = kron_ratio_exact(l, mu0, &lambda)?;
        let bound = kron_ratio_lower_bound(l, mu0, &lambda, kt0, beta3)?;
        inset_rows.push(format!(
            "{},{},{},{},{}",
            g17(dp),
            g17(1.0 / dp),
            g17(ratio * ratio),
            g17(bound),
            kt0
        ));
    }
    let path = w.write_csv("kron_spectrum.csv", "delta_P,rank,prob", &spectrum_rows)?;
    w.write_csv(
        "kron_ratio.csv",
        "delta_P,inv_delta_P,ratio_sq_exact,lower_bound,k_tilde_0",
        &inset_rows,
    )?;
    let cfg = json!({
        "delta_P": delta_p_list,
        "L": l,
        "mu0": mu0,
        "beta3": beta3,
    });
    w.write_sidecar("kron_spectrum.csv", cfg.clone())?;
    w.write_sidecar("kron_ratio.csv", cfg)?;
    Ok(path)
}

fn default_checkpoint_every() -> usize {
    0
}

fn default_alpha() -> usize {
    4
}

/// Training run specification (TOML/JSON file behind `nqs train --config`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainSpec {
    pub hamiltonian: HamiltonianSpec,
    #[serde(default = "default_alpha")]
    pub alpha: usize,
    /// Checkpoint cadence in iterations; 0 = final checkpoint only.
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    pub vmc: VmcConfig,
}

impl TrainSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Full training workflow: energy trace, checkpoints, η artifacts, and
/// truncated-correlation errors against the Lanczos ground state.
pub fn run_train(w: &RunWriter, spec: &TrainSpec) -> Result<crate::vmc::TrainResult> {
    let h = spec.hamiltonian;
    let result = train(&h, spec.alpha, &spec.vmc)?;

    let trace_rows: Vec<String> = result
        .energy_trace
        .iter()
        .zip(&result.acceptance_trace)
        .enumerate()
        .map(|(it, ((mean, stderr), acc))| {
            format!("{},{},{},{}", it, g17(*mean), g17(*stderr), g17(*acc))
        })
        .collect();
    w.write_csv("energy_trace.csv", "iter,mean,stderr,acceptance", &trace_rows)?;

    result
        .final_params
        .save(&w.dir().join("checkpoint_final.json"))?;

    if let Some(eta) = &result.eta {
        let mut grid_rows = Vec::new();
        for kt in 1..=eta.alpha {
            for j in 1..=eta.l {
                grid_rows.push(format!("{},{},{}", j, kt, g17(eta.value(j, kt))));
            }
        }
        w.write_csv("eta_grid.csv", "j,k_tilde,eta", &grid_rows)?;
        let ridge_rows: Vec<String> = eta
            .ridge()
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{},{}", i + 1, g17(v)))
            .collect();
        w.write_csv("eta_ridge.csv", "k_tilde,max_eta", &ridge_rows)?;
    }

    // truncated-correlation errors against exact diagonalization
    let mut corr_rows = Vec::new();
    let mut degenerate = false;
    if h.l <= exact::MAX_STATE_SITES {
        let info = ground_space(&h, spec.vmc.seed)?;
        degenerate = info.degenerate;
        let gs = &info.states[0];
        let xx = xx12(h.l);
        let zz = zz12(h.l);
        let ed_xx = exact::expectation(gs, &xx)?;
        let ed_zz = exact::expectation(gs, &zz)?;
        let trained = result.final_params.expand();
        for keep in 1..=spec.alpha {
            let tr = exact::build_state(&truncate(&trained, keep * h.l)?)?;
            let e_xx = (exact::expectation(&tr, &xx)? - ed_xx).abs();
            let e_zz = (exact::expectation(&tr, &zz)? - ed_zz).abs();
            corr_rows.push(format!("{},{},{}", keep, g17(e_xx), g17(e_zz)));
        }
        w.write_csv("trunc_corr_errors.csv", "levels_kept,err_CX_r1,err_CZ_r1", &corr_rows)?;
    }

    let final_energy = if h.l <= exact::MAX_STATE_SITES {
        let sv = exact::build_state_ti(&result.final_params)?;
        Some(hamiltonian_expectation(&h, &sv)?)
    } else {
        None
    };

    let cfg = json!({
        "train": spec,
        "diverged": result.diverged,
        "fitted_alpha_P": result.fitted_alpha_p,
        "fitted_alpha_P_skip_first": result.fitted_alpha_p_skip_first,
        "final_energy_exact": final_energy,
        "ground_space_degenerate": degenerate,
    });
    w.write_sidecar("energy_trace.csv", cfg)?;
    Ok(result)
}

/// Exact-diagonalization run: ground energy (and optional state export).
pub fn run_ed(
    w: &RunWriter,
    h: &HamiltonianSpec,
    seed: u64,
    export_binary: bool,
    export_json: bool,
) -> Result<f64> {
    let info = ground_space(h, seed)?;
    let state = &info.states[0];
    if export_binary {
        state.write_binary(&w.dir().join("ground_state.bin"))?;
    }
    if export_json {
        std::fs::write(w.dir().join("ground_state.json"), state.to_json()?)?;
    }
    let report = json!({
        "hamiltonian": h,
        "energy": info.energy,
        "degenerate": info.degenerate,
        "seed": seed,
    });
    w.write_json("ed_report.json", &report)?;
    Ok(info.energy)
}

/// One bound-machinery report for (profile, L, Nh), written as JSON and a
/// one-row CSV.
pub fn run_bound_eval(
    w: &RunWriter,
    profile: &DecayProfile,
    l: usize,
    nh: usize,
) -> Result<bounds::TruncationReport> {
    let rep = bounds::report(profile, l, nh)?;
    w.write_json("bound_report.json", &serde_json::to_value(&rep)?)?;
    w.write_csv(
        "bound_report.csv",
        bounds::TruncationReport::csv_header(),
        &[rep.csv_row()],
    )?;
    w.write_sidecar("bound_report.csv", json!({"profile": profile, "L": l, "Nh": nh}))?;
    Ok(rep)
}

/// Helper shared by several experiments: exact second-type error against a
/// reference state.
pub fn expectation_error(
    reference: &StateVector,
    candidate: &RbmParams,
    b: &PauliString,
) -> Result<f64> {
    let sv = exact::build_state(candidate)?;
    Ok((exact::expectation(reference, b)? - exact::expectation(&sv, b)?).abs())
}

/// Text listing of the named presets.
pub fn presets_listing() -> String {
    let mut out = String::new();
    for p in Preset::all() {
        out.push_str(&format!("{:6}  L={:2}  {}\n", p.name(), p.default_l(), p.describe()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn g17_is_full_precision() {
        let x = std::f64::consts::PI;
        let s = g17(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn trunc_sweep_below_minimum_writes_status() {
        let dir = tempdir().unwrap();
        let w = RunWriter::new(dir.path(), "trunc-sweep", 0).unwrap();
        let path = run_trunc_sweep(&w, Preset::Fig2b, 7, 7, 10).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 1, "header only");
        let meta = std::fs::read_to_string(dir.path().join("trunc_sweep.csv.meta.json")).unwrap();
        assert!(meta.contains("minimal admissible"));
    }

    #[test]
    fn bound_eval_writes_report() {
        let dir = tempdir().unwrap();
        let w = RunWriter::new(dir.path(), "bound-eval", 0).unwrap();
        let rep = run_bound_eval(&w, &presets::fig2b_profile(), 11, 44).unwrap();
        assert_eq!(rep.nh, 44);
        assert!(dir.path().join("bound_report.json").exists());
        assert!(dir.path().join("bound_report.csv.meta.json").exists());
    }

    #[test]
    fn presets_listing_contains_all() {
        let text = presets_listing();
        for p in Preset::all() {
            assert!(text.contains(p.name()));
        }
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let run = || {
            let dir = tempdir().unwrap();
            let w = RunWriter::new(dir.path(), "kron", 7).unwrap();
            run_kron(&w, &[2.0, 1.5], 7, 0.1).unwrap();
            (
                std::fs::read(dir.path().join("kron_spectrum.csv")).unwrap(),
                std::fs::read(dir.path().join("kron_ratio.csv")).unwrap(),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
