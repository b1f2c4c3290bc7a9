//! Oracle and diagnostic suites behind `oracle <which>`.

use cavity_thermo::matsubara::{
    delta_f_massive, delta_f_matsubara, delta_s_massive_closed_form, massive_low_t_asymptote,
    massive_low_t_reference, relation_check, scale_factor_mu,
};
use cavity_thermo::oracle::{appendix_suite, weyl_suite};
use cavity_thermo::thermo::ThermoModel;
use cavity_thermo::{CutoffConstants, Error};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::sweep::direct_comparisons;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Appendix,
    Modes,
    Direct,
    Matsubara,
    Massive,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Appendix => "appendix",
            Which::Modes => "modes",
            Which::Direct => "direct",
            Which::Matsubara => "matsubara",
            Which::Massive => "massive",
        }
    }

    /// Hard suites decide the exit code; the others only report.
    pub fn is_hard(self) -> bool {
        matches!(self, Which::Appendix | Which::Modes)
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data")
}

/// Massive-photon low-temperature run at T = m/20.
fn massive(cfg: &RunConfig) -> Result<Value, Error> {
    let g = &cfg.geometry;
    let m = cfg.m_gamma;
    let t = m / 20.0;
    let f = |t: f64| delta_f_massive(t, g, m, 100_000, &cfg.policy);
    let value = f(t)?;
    let h = 1e-3 * t;
    let s_fd = -(f(t + h)? - f(t - h)?) / (2.0 * h);
    let asym = massive_low_t_asymptote(t, m);
    let reference = massive_low_t_reference(t, m);
    let s_asym = -(massive_low_t_asymptote(t + h, m) - massive_low_t_asymptote(t - h, m)) / (2.0 * h);
    let s_closed = delta_s_massive_closed_form(t, m)?;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    Ok(json!({
        "m_gamma": m,
        "t": t,
        "delta_f": value,
        "reference": reference,
        "rel_diff_reference": rel(value, reference),
        "asymptote": asym,
        "rel_diff_asymptote": rel(value, asym),
        "entropy_fd": s_fd,
        "entropy_closed_form": s_closed,
        "rel_diff_entropy_closed_form": rel(s_fd, s_closed),
        "entropy_asymptote": s_asym,
        "rel_diff_entropy_asymptote": rel(s_fd, s_asym),
    }))
}

fn matsubara(cfg: &RunConfig, cutoffs: &CutoffConstants) -> Result<Value, Error> {
    let g = &cfg.geometry;
    let mut out = Vec::new();
    for &xi in &cfg.oracle_xi {
        let t = g.t_from_xi(xi);
        let m = delta_f_matsubara(t, g, cfg.k_max, &cfg.policy)?;
        let r = relation_check(t, g, cutoffs, &cfg.policy, cfg.k_max)?;
        let mu = scale_factor_mu(t, g, cutoffs, cfg.mu_truncation)?;
        out.push(json!({ "xi": xi, "t": t, "delta_f_m": to_json(&m), "relation": to_json(&r), "mu_exponent": to_json(&mu) }));
    }
    Ok(Value::Array(out))
}

/// Runs one suite. Returns the report and, for hard suites, whether it passed.
pub fn run(which: Which, cfg: &RunConfig, cutoffs: CutoffConstants) -> Result<(Value, Option<bool>), Error> {
    let (report, pass) = match which {
        Which::Appendix => {
            let r = appendix_suite(cfg.appendix_grid)?;
            let pass = r.pass;
            (to_json(&r), Some(pass))
        }
        Which::Modes => {
            let r = weyl_suite(&cfg.geometry, 20.0, 40.0)?;
            let pass = r.pass;
            (to_json(&r), Some(pass))
        }
        Which::Direct => {
            let model = ThermoModel::new(cfg.geometry, cutoffs, cfg.policy)?;
            (direct_comparisons(&model, &cfg.oracle_xi)?, None)
        }
        Which::Matsubara => (matsubara(cfg, &cutoffs)?, None),
        Which::Massive => (massive(cfg)?, None),
    };
    let g = cfg.geometry;
    let doc = json!({
        "suite": which.name(),
        "hard": which.is_hard(),
        "pass": pass,
        "geometry": { "a1": g.a(0), "a2": g.a(1), "a3": g.a(2) },
        "cutoffs": { "v_v": cutoffs.v_v, "v_e": cutoffs.v_e },
        "policy": cfg.policy,
        "config": cfg.echo,
        "report": report,
    });
    Ok((doc, pass))
}
