import pathlib

import pytest

import vdvio

CONFIG_DIR = pathlib.Path(__file__).resolve().parents[2] / "configs"


@pytest.fixture(scope="session")
def short_config():
    text = (CONFIG_DIR / "zero_noise.yaml").read_text()
    text = text.replace("legs: 2, leg_length: 50.0", "legs: 2, leg_length: 8.0")
    return vdvio.parse_config(text)


@pytest.fixture(scope="session")
def short_run(short_config):
    log, truth = vdvio.simulate(short_config, 3)
    return log, truth, vdvio.run(log, short_config)
