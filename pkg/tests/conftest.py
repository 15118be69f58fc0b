"""Shared fixtures for the test suite."""
import pytest

from pwsplane.integrate import IntegratorConfig


@pytest.fixture(scope="session")
def loose_cfg():
    """Faster stepping tolerances for scan-heavy tests.

    Landing accuracy on the catalog families is dominated by the
    first-integral polish, not the step tolerance, so scans keep full
    accuracy at these settings.
    """
    return IntegratorConfig(rel_tol=1e-6, abs_tol=1e-10)
