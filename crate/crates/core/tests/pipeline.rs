use spherecover::capgeom::{cap_fraction, SphereSpec};
use spherecover::construct::{embedded_cover, random_base_covering, two_level_cover};
use spherecover::schedule::{params_engineering, params_v2, EngineeringOverrides};
use spherecover::verify::{lemma_lower_check_at, measured_density, verify_grid, verify_monte_carlo, verify_net};
use spherecover::net::CubeNet;
use spherecover::{Error, SeededRng};

#[test]
fn embedded_run_covers_the_sphere() {
    let s = SphereSpec::new(3, 1.5).unwrap();
    let eps = random_base_covering(&s, 0.1, 1e-3, &mut SeededRng::for_purpose(1, "eps")).unwrap();
    let p = params_engineering(3, 1.5, EngineeringOverrides::new(0.1, None)).unwrap();
    let res = embedded_cover(&s, &eps, &p, &mut SeededRng::for_purpose(1, "embedded")).unwrap();
    assert_eq!(res.covering.len(), res.y_count + res.uncovered.len());
    let net = verify_net(&res.covering, &eps, eps.half_angle()).unwrap();
    assert!(net.passed);
    let mc = verify_monte_carlo(&res.covering, 1_000_000, &mut SeededRng::new(2)).unwrap();
    assert_eq!(mc.uncovered_count, 0);
    // the patched net centres dominate the count at this scale, so the
    // density sits far above 5 n ln n (about 16.5)
    let density = measured_density(&res.covering).unwrap();
    assert!(density > 5.0 * 3.0 * 3f64.ln());
    let theta1 = cap_fraction(&s, 1.0).unwrap().theta;
    assert!((density - res.covering.len() as f64 * theta1).abs() < 1e-9 * density);
}

#[test]
fn base_covering_examples() {
    let s = SphereSpec::new(2, 1.5).unwrap();
    let cov = random_base_covering(&s, 1.4, 1e-3, &mut SeededRng::new(3)).unwrap();
    let grid = CubeNet::with_angle(2, cov.half_angle() / 4.0).unwrap();
    assert!(verify_grid(&cov, &grid, cov.half_angle() / 4.0).unwrap().passed);
    let again = random_base_covering(&s, 1.4, 1e-3, &mut SeededRng::new(3)).unwrap();
    assert_eq!(cov, again);

    // hemispherical caps: one is never enough
    let hemi = random_base_covering(&s, 1.5, 1e-3, &mut SeededRng::new(4)).unwrap();
    assert!(hemi.len() >= 2);
}

#[test]
fn infeasible_check_net_is_reported() {
    // eps = 0.05 on S^4 needs a check-net far beyond the streaming limit
    let s = SphereSpec::new(4, 1.5).unwrap();
    let err = random_base_covering(&s, 0.05, 1e-3, &mut SeededRng::new(5)).unwrap_err();
    assert!(matches!(err, Error::Construction(_)), "{err}");
}

#[test]
fn two_level_invariants_across_seeds() {
    let s = SphereSpec::new(3, 1.5).unwrap();
    let p = params_engineering(3, 1.5, EngineeringOverrides::new(0.15, Some(0.3))).unwrap();
    let eps = random_base_covering(&s, 0.15, 1e-3, &mut SeededRng::for_purpose(6, "eps")).unwrap();
    let mu = random_base_covering(&s, 0.3, 1e-3, &mut SeededRng::for_purpose(6, "mu")).unwrap();
    for seed in 0..5 {
        let r = two_level_cover(&s, &mu, &eps, &p, &mut SeededRng::new(seed)).unwrap();
        assert!(r.set_algebra_holds);
        assert!(r.n_bar_empirical <= r.n_prime_empirical + r.n_double_prime_empirical);
        assert_eq!(&r.final_centers()[..r.y_count], r.y_centers());
        assert!(r.patched.windows(2).all(|w| w[0] < w[1]));
        assert!(verify_net(&r.covering, &eps, eps.half_angle()).unwrap().passed);
    }
}

#[test]
fn two_level_rejects_inflation_breaking_mu() {
    let o = EngineeringOverrides::new(0.3, Some(0.75));
    assert!(params_engineering(3, 1.5, o).is_err());
}

#[test]
fn trivial_branch_small_cap_is_covered_at_every_close_placement() {
    // n <= 41 under the finite schedule: eps > mu, so any d-close big cap
    // swallows the small cap
    for n in [10usize, 30, 41] {
        let p = params_v2(n, 2.0).unwrap();
        let s = p.sphere().unwrap();
        let max = (p.d.unwrap() / 2.0).asin();
        for k in 0..=4 {
            let angle = max * k as f64 / 4.0;
            let rep = lemma_lower_check_at(&s, &p, 20_000, &mut SeededRng::new(k), angle).unwrap();
            assert_eq!(rep.uncovered_count, 0, "n={n} angle={angle}");
        }
    }
}

#[test]
fn sizing_only_density_bound_at_100() {
    // lambda n ln n (1 + 2^{1-n/4}) theta_1 / theta_d against d-sph at n = 100
    let n = 100usize;
    let p = params_v2(n, 2.0).unwrap();
    let s = p.sphere().unwrap();
    let nf = n as f64;
    let ln_theta1 = cap_fraction(&s, 1.0).unwrap().ln_theta;
    let ln_bound = (p.lambda * nf * nf.ln()).ln() + (2f64.powf(1.0 - nf / 4.0)).ln_1p() + ln_theta1 - p.ln_theta_trial;
    let dsph: f64 = 1035.6944;
    assert!(ln_bound < dsph.ln(), "bound {}", ln_bound.exp());
}
