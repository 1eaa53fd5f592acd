from wreathkit.verify import SUITES, run_suite


def test_reports_sorted_and_deterministic():
    a = run_suite("heisenberg", seed=3)
    b = run_suite("heisenberg", seed=3, jobs=4)
    assert [c.id for c in a.checks] == sorted(c.id for c in a.checks)
    assert [(c.id, c.passed, c.computed) for c in a.checks] == [(c.id, c.passed, c.computed) for c in b.checks]


def test_suite_pass_iff_all_checks_pass():
    rep = run_suite("worked-example")
    assert rep.passed == all(c.passed for c in rep.checks)


def test_every_suite_has_checks():
    for name, make in SUITES.items():
        assert make(1), name
