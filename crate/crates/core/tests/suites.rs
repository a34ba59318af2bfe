use hilbert_dynamics::verify::{run_suite, CheckContext, Verdict, VerifyParams, SUITES};

fn small_ctx(seed: u64) -> CheckContext {
    let params = VerifyParams {
        n_condition_c: 5_000,
        n_axiom5: 5_000,
        n_kobayashi: 2_000,
        n_nonexpansive: 2_000,
        n_seeds: 30,
        ..VerifyParams::default()
    };
    CheckContext::new(seed, "test", params)
}

#[test]
fn every_suite_passes() {
    let ctx = small_ctx(11);
    for name in SUITES.iter().filter(|s| **s != "all") {
        let report = run_suite(name, &ctx, None).expect("known suite");
        for c in &report.checks {
            assert_eq!(
                c.verdict,
                Verdict::Pass,
                "{name}/{} [{}]: {} violations of {}, worst {} {:?}",
                c.check_name,
                c.instance,
                c.n_violations,
                c.n_samples,
                c.worst_margin,
                c.details
            );
        }
        assert!(report.checks.iter().any(|c| c.negative_control), "{name} has no negative control");
    }
}

#[test]
fn unknown_suite_is_rejected() {
    assert!(run_suite("no-such-suite", &small_ctx(1), None).is_none());
}
