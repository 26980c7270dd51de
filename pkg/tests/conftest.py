import pytest

from optosnspd import circuit as cir
from optosnspd import config as cfgmod


@pytest.fixture(scope="session")
def cfg():
    return cfgmod.parse_config("", scenario="trace")


@pytest.fixture(scope="session")
def pd(cfg):
    return cfgmod.build_photodiode(cfg)


@pytest.fixture(scope="session")
def nw(cfg):
    return cfgmod.build_nanowire(cfg)


@pytest.fixture(scope="session")
def mod(cfg):
    return cfgmod.build_modulator(cfg)


@pytest.fixture(scope="session")
def drive(cfg):
    return cfgmod.build_drive(cfg)


@pytest.fixture(scope="session")
def readout(cfg, pd, nw, mod, drive):
    auto = cir.auto_threshold_mv(
        pd, nw, mod, cfgmod.build_readout(cfg, threshold_mv=1.0), drive
    )
    return cfgmod.build_readout(cfg, threshold_mv=auto)
