def pytest_terminal_summary(terminalreporter):
    try:
        from . import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in test_acceptance.RESULTS:
        terminalreporter.write_line(f"{name}: {verdict}")
