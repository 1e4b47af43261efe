import pathlib

import pytest

from dvmps.algebra import OpCounters
from dvmps.scheme import extract_key, run_pipeline, setup

FIXTURE_DIR = pathlib.Path(__file__).parent / "fixtures"

CAST = ["alice", "p1", "p2", "p3", "cindy"]


@pytest.fixture(scope="session")
def toy_setup():
    return setup("toy", b"conftest-master-seed")


@pytest.fixture(scope="session")
def demo_setup():
    return setup("demo", b"conftest-master-seed")


@pytest.fixture(scope="session")
def toy_keys(toy_setup):
    params, master = toy_setup
    return {name: extract_key(params, master, name) for name in CAST}


@pytest.fixture(scope="session")
def demo_keys(demo_setup):
    params, master = demo_setup
    return {name: extract_key(params, master, name) for name in CAST}


@pytest.fixture(scope="session")
def toy_run():
    """Honest n=3 toy pipeline, reused by read-only tests."""
    return run_pipeline(
        "toy",
        master_seed=b"conftest-master-seed",
        original_signer="alice",
        proxy_signers=["p1", "p2", "p3"],
        designated_verifier="cindy",
        message=b"shared honest run",
        seed=b"conftest-run-seed",
        session=OpCounters(),
    )


@pytest.fixture(scope="session")
def demo_run():
    return run_pipeline(
        "demo",
        master_seed=b"conftest-master-seed",
        original_signer="alice",
        proxy_signers=["p1", "p2", "p3"],
        designated_verifier="cindy",
        message=b"shared honest run",
        seed=b"conftest-run-seed",
        session=OpCounters(),
    )
