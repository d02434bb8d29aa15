use std::fmt;
use std::fs;
use std::path::Path;

use spherecover::bounds::{
    breakdown, crossover_scan, epsilon_inequality, evaluate_bound_real, moderates,
    BoundFormula,
};
use spherecover::capgeom::{cap_fraction, SphereSpec, SurfacePoint};
use spherecover::construct::{
    embedded_cover, random_base_covering, two_level_cover, Covering, Provenance,
};
use spherecover::io::{load_covering, report_to_string, save_covering, save_report, write_atomic};
use spherecover::net::CubeNet;
use spherecover::schedule::{
    params_asymptotic, params_engineering, params_v1, params_v2, EngineeringOverrides, Mode,
    ParamSet,
};
use spherecover::verify::{
    lemma_bound, lemma_lower_check, lemma_lower_check_at, measured_density, verify_grid,
    verify_monte_carlo, verify_net, VerificationReport,
};
use spherecover::{Error, SeededRng};

use crate::args::{
    Algorithm, BoundsArgs, CoverArgs, Format, LemmaArgs, ModeArg, NetKind, OracleArgs,
    ParamsArgs, ScheduleArgs,
};
use crate::output::{key_values, param_fields, sci};
use crate::Verdict;

/// Failure of a subcommand, with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Construction(_)) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(Error::Io(std::io::Error::other(e)))
    }
}

type CliResult = Result<Verdict, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Rejects flags the chosen mode does not read, then builds the schedule.
fn schedule(a: &ScheduleArgs) -> Result<ParamSet, CliError> {
    let engineering_only = [
        ("--eps", a.eps.is_some()),
        ("--mu", a.mu.is_some()),
        ("--trials", a.trials.is_some()),
    ];
    if a.mode != ModeArg::Engineering {
        if let Some((flag, _)) = engineering_only.iter().find(|(_, set)| *set) {
            return Err(usage(format!("{flag} is only read in engineering mode")));
        }
    }
    if a.b.is_some() && matches!(a.mode, ModeArg::V1 | ModeArg::V2) {
        return Err(usage("--b is only read in asymptotic and engineering modes"));
    }
    let p = match a.mode {
        ModeArg::V1 => params_v1(a.n, a.r)?,
        ModeArg::V2 => params_v2(a.n, a.r)?,
        ModeArg::Asymptotic => {
            let b = a.b.ok_or_else(|| usage("asymptotic mode needs --b"))?;
            params_asymptotic(a.n, a.r, b)?
        }
        ModeArg::Engineering => {
            let eps = a.eps.ok_or_else(|| usage("engineering mode needs --eps"))?;
            let mut o = EngineeringOverrides::new(eps, a.mu);
            if let Some(b) = a.b {
                o.b = b;
            }
            o.trials = a.trials;
            params_engineering(a.n, a.r, o)?
        }
    };
    Ok(p)
}

pub fn params(a: ParamsArgs) -> CliResult {
    let p = schedule(&a.schedule)?;
    let fields = param_fields(&p);
    match a.format {
        Format::Text => out_raw!("{}", key_values(&fields)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(fields.iter().map(|(k, _)| *k))?;
            w.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
            let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
            out_raw!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    Ok(Verdict::Pass)
}

const BOUNDS_HEADER: [&str; 9] = [
    "n",
    "lower(c1)",
    "d-sphe",
    "est0",
    "d-sph",
    "d-ball",
    "psi",
    "phi",
    "omega_relaxed",
];

pub fn bounds(a: BoundsArgs) -> CliResult {
    if a.n_from < 3 {
        return Err(usage("--n-from must be at least 3"));
    }
    if a.n_from > a.n_to {
        return Err(usage("--n-from must not exceed --n-to"));
    }
    if a.step == 0 {
        return Err(usage("--step must be positive"));
    }
    if let Some(hi) = a.crossover_to {
        if hi < a.n_from {
            return Err(usage("--crossover-to must not be below --n-from"));
        }
    }
    let c1 = Some(a.c1);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOUNDS_HEADER)?;
    for n in (a.n_from..=a.n_to).step_by(a.step) {
        let b = breakdown(&params_v2(n, a.r)?, c1)?;
        let row = [
            n.to_string(),
            sci(b.lower.unwrap_or(f64::NAN)),
            sci(b.prior_sphere),
            sci(b.delta_star),
            sci(b.new_sphere),
            sci(b.rogers_ball),
            sci(b.bad.psi),
            sci(b.good.phi),
            sci(b.omega.relaxed.value()),
        ];
        w.write_record(&row)?;
    }
    let table = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    match &a.out {
        Some(path) => write_atomic(path, &table)?,
        None => out_raw!("{}", String::from_utf8_lossy(&table)),
    }
    if let Some(hi) = a.crossover_to {
        let found = crossover_scan(BoundFormula::DSph, BoundFormula::Est0, a.n_from, hi, c1)?;
        match found {
            Some(n) => eprintln!("crossover d-sph < est0 first at n = {n}"),
            None => eprintln!("crossover d-sph < est0 not found in [{}, {hi}]", a.n_from),
        }
    }
    Ok(Verdict::Pass)
}

fn base_covering(
    spec: &SphereSpec,
    half_chord: f64,
    path: Option<&Path>,
    fail_prob: f64,
    seed: u64,
    purpose: &str,
) -> Result<Covering, CliError> {
    match path {
        Some(p) => {
            let cov = load_net(p, spec)?;
            if (cov.half_chord() - half_chord).abs() > 1e-12 * half_chord {
                return Err(usage(format!(
                    "{} has half-chord {}, expected {half_chord}",
                    p.display(),
                    cov.half_chord()
                )));
            }
            Ok(cov)
        }
        None => Ok(random_base_covering(
            spec,
            half_chord,
            fail_prob,
            &mut SeededRng::for_purpose(seed, purpose),
        )?),
    }
}

fn print_report(name: &str, rep: &VerificationReport) {
    out!("[{name}]");
    out_raw!("{}", report_to_string(rep));
}

/// Net certificate and Monte Carlo estimate for `cov`, written to `out_dir`.
fn verify_and_save(
    a: &CoverArgs,
    cov: &Covering,
    eps_net: Option<&Covering>,
    eps: f64,
) -> Result<bool, CliError> {
    let spec = cov.sphere();
    let mut net_rep = match (a.net, eps_net) {
        (NetKind::Eps, Some(net)) => verify_net(cov, net, net.half_angle())?,
        (NetKind::Eps, None) => return Err(usage("--net eps needs the eps base covering; pass --eps-net")),
        (NetKind::Grid, _) => {
            let angle = spec.half_angle(eps)?;
            verify_grid(cov, &CubeNet::with_angle(spec.n(), angle)?, angle)?
        }
    };
    net_rep.density = Some(measured_density(cov)?);
    let mc_rep = verify_monte_carlo(cov, a.mc_samples, &mut SeededRng::for_purpose(a.seed, "mc"))?;
    save_report(&a.out_dir.join("report-net.txt"), &net_rep)?;
    save_report(&a.out_dir.join("report-mc.txt"), &mc_rep)?;
    print_report("net", &net_rep);
    print_report("monte_carlo", &mc_rep);
    Ok(net_rep.passed && mc_rep.passed)
}

pub fn cover(a: CoverArgs) -> CliResult {
    if a.mc_samples == 0 {
        return Err(usage("--mc-samples must be positive"));
    }
    if !(a.fail_prob > 0.0 && a.fail_prob < 1.0) {
        return Err(usage("--fail-prob must lie in (0, 1)"));
    }
    let p = schedule(&a.schedule)?;
    let spec = p.sphere()?;
    fs::create_dir_all(&a.out_dir)?;

    if let Some(path) = &a.verify_only {
        if a.save_net || a.mu_net.is_some() {
            return Err(usage("--verify-only takes no --save-net or --mu-net"));
        }
        let cov = load_net(path, &spec)?;
        let eps_net = match &a.eps_net {
            Some(net) => Some(load_net(net, &spec)?),
            None => None,
        };
        return Ok(verdict(verify_and_save(&a, &cov, eps_net.as_ref(), p.epsilon)?));
    }

    let two_level = match a.algorithm {
        Algorithm::Auto => p.mu.is_some(),
        Algorithm::Embedded => false,
        Algorithm::TwoLevel => true,
    };
    if two_level && p.mu.is_none() {
        return Err(usage(format!("the two-level construction needs mu, absent in {} mode", p.mode)));
    }
    if !two_level && a.mu_net.is_some() {
        return Err(usage("--mu-net is only read by the two-level construction"));
    }
    if !two_level && !matches!(p.mode, Mode::V1 | Mode::Engineering) {
        return Err(usage(format!("the embedded construction takes v1 or engineering mode, got {}", p.mode)));
    }

    let cov_eps = base_covering(&spec, p.epsilon, a.eps_net.as_deref(), a.fail_prob, a.seed, "cov-eps")?;
    let cov = if two_level {
        let mu = p.require_mu("two-level construction")?;
        let cov_mu = base_covering(&spec, mu, a.mu_net.as_deref(), a.fail_prob, a.seed, "cov-mu")?;
        if a.save_net {
            save_covering(&a.out_dir.join("net-mu.txt"), &cov_mu)?;
        }
        let res = two_level_cover(&spec, &cov_mu, &cov_eps, &p, &mut SeededRng::for_purpose(a.seed, "two-level"))?;
        out!("[construction]");
        out!("algorithm = two-level");
        out!("random_caps = {}", res.y_count);
        out!("bad_centers = {}", res.bad.len());
        out!("uncovered_eps_centers = {}", res.uncovered_eps.len());
        out!("patched = {}", res.patched.len());
        out!("n_prime = {}", res.n_prime_empirical);
        out!("n_double_prime = {}", res.n_double_prime_empirical);
        out!("n_bar = {}", res.n_bar_empirical);
        out!("set_algebra_holds = {}", res.set_algebra_holds);
        res.covering
    } else {
        let res = embedded_cover(&spec, &cov_eps, &p, &mut SeededRng::for_purpose(a.seed, "embedded"))?;
        out!("[construction]");
        out!("algorithm = embedded");
        out!("random_caps = {}", res.y_count);
        out!("patched = {}", res.uncovered.len());
        res.covering
    };
    out!("centers = {}", cov.len());
    if a.save_net {
        save_covering(&a.out_dir.join("net-eps.txt"), &cov_eps)?;
    }
    save_covering(&a.out_dir.join("covering.txt"), &cov)?;
    Ok(verdict(verify_and_save(&a, &cov, Some(&cov_eps), p.epsilon)?))
}

fn load_net(path: &Path, spec: &SphereSpec) -> Result<Covering, CliError> {
    let cov = load_covering(path)?;
    if !cov.sphere().same_sphere(spec) {
        return Err(usage(format!("{} lies on a different sphere", path.display())));
    }
    Ok(cov)
}

pub fn lemma(a: LemmaArgs) -> CliResult {
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    if a.moderation_points < 2 {
        return Err(usage("--moderation-points must be at least 2"));
    }
    let p = schedule(&a.schedule)?;
    if !matches!(p.mode, Mode::V2 | Mode::Engineering) {
        return Err(usage(format!("the lemma check takes v2 or engineering mode, got {}", p.mode)));
    }
    let spec = p.sphere()?;
    let mut ok = true;

    out!("[epsilon_inequality]");
    if p.n >= 4 {
        let c = epsilon_inequality(p.n)?;
        out!("lhs = {}\nrhs = {}\nholds = {}", sci(c.lhs), sci(c.rhs), c.holds);
        ok &= c.holds;
    } else {
        out!("skipped = n < 4");
    }

    // est0 is the simplified single-level bound; it must stay above the
    // value the construction attains
    let m = moderates(
        |x| evaluate_bound_real(BoundFormula::Est0, x, None).unwrap_or(f64::NAN),
        |x| evaluate_bound_real(BoundFormula::Eps5Fixpoint, x, None).unwrap_or(f64::NAN),
        a.moderation_from,
        a.moderation_to,
        a.moderation_points,
    )?;
    out!("[moderation]");
    out!("range = [{}, {}]", a.moderation_from, a.moderation_to);
    out!("moderates = {}", m.moderates);
    out!("dominates_at_start = {}", m.dominates_at_start);
    out!("dominates_on_grid = {}", m.dominates_on_grid);
    out!("min_log_slope_gap = {}", sci(m.min_log_slope_gap));
    ok &= m.dominates_on_grid;

    let bound = lemma_bound(&p)?;
    let mut rng = SeededRng::for_purpose(a.seed, "lemma");
    let rep = match a.placement_angle {
        Some(angle) => lemma_lower_check_at(&spec, &p, a.samples, &mut rng, angle)?,
        None => lemma_lower_check(&spec, &p, a.samples, &mut rng)?,
    };
    out!("[lemma_lower]");
    out!("trivial = {}", bound.trivial);
    out!("bound = {}", sci(bound.value));
    out_raw!("{}", report_to_string(&rep));
    if let Some(path) = &a.report {
        save_report(path, &rep)?;
    }
    ok &= rep.passed;
    Ok(verdict(ok))
}

pub fn oracle(a: OracleArgs) -> CliResult {
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    if !(a.sigmas > 0.0) {
        return Err(usage("--sigmas must be positive"));
    }
    let spec = SphereSpec::new(a.n, a.r)?;
    let exact = cap_fraction(&spec, a.rho)?;
    // one cap at the pole: the uncovered fraction is 1 - theta
    let cov = Covering::new(
        spec,
        a.rho,
        vec![SurfacePoint::pole(spec, 0)?],
        Provenance::new("oracle", a.seed),
    )?;
    let rep = verify_monte_carlo(&cov, a.samples, &mut SeededRng::for_purpose(a.seed, "oracle"))?;
    let estimate = 1.0 - rep.uncovered_fraction_estimate;
    let theta = exact.theta;
    let sigma = (theta * (1.0 - theta) / a.samples as f64).sqrt();
    let z = if sigma > 0.0 {
        (estimate - theta) / sigma
    } else if estimate == theta {
        0.0
    } else {
        f64::INFINITY
    };
    out!("n = {}", a.n);
    out!("r = {}", sci(a.r));
    out!("rho = {}", sci(a.rho));
    out!("alpha = {}", sci(exact.alpha));
    out!("theta = {}", sci(theta));
    out!("ln_theta = {}", sci(exact.ln_theta));
    out!("samples = {}", a.samples);
    out!("estimate = {}", sci(estimate));
    out!("ci_lower = {}", sci(1.0 - rep.confidence_interval.1));
    out!("ci_upper = {}", sci(1.0 - rep.confidence_interval.0));
    out!("z = {}", sci(z));
    let ok = z.abs() <= a.sigmas;
    out!("passed = {ok}");
    Ok(verdict(ok))
}
