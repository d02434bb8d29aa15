use std::fmt::Write as _;

use spherecover::schedule::ParamSet;

/// 17 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), sci)
}

/// Fields of a parameter set in a fixed order.
pub fn param_fields(p: &ParamSet) -> Vec<(&'static str, String)> {
    vec![
        ("mode", p.mode.to_string()),
        ("n", p.n.to_string()),
        ("r", sci(p.r)),
        ("epsilon", sci(p.epsilon)),
        ("rho", sci(p.rho)),
        ("beta", opt_f(p.beta)),
        ("lambda", sci(p.lambda)),
        ("mu", opt_f(p.mu)),
        ("d", opt_f(p.d)),
        ("q", opt_f(p.q)),
        ("s", opt(p.s)),
        ("b_exponent", opt_f(p.b_exponent)),
        ("trial_half_chord", sci(p.trial_half_chord)),
        ("ln_theta_trial", sci(p.ln_theta_trial)),
        ("trials", opt(p.trials.exact)),
        ("ln_trials", sci(p.trials.ln_count)),
        ("nu", opt_f(p.trials.nu)),
        ("trials_forced", p.trials.forced.to_string()),
    ]
}

pub fn key_values(fields: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in fields {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
