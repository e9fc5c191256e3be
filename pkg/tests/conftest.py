import math

import pytest

from kerrswitch.model import FiberParams, PumpConfig, SwitchScenario, gamma_from_mfd, make_grid

# signal-band walk-off values for SMF-28 with a 1550 nm pump and a 1310 nm signal
BETA_PLUS = 2.1
BETA_MINUS = 9796.8
GAMMA = gamma_from_mfd(10.0, 1550.0)
SIGMA_5PS = 5.0 / (2 * math.sqrt(math.log(2)))

# Raman-dressed XPM coefficients at the 1310/1550 nm detuning, from mpmath quadrature
XI_PAR_1310 = 0.00241107470142358850
XI_PERP_1310 = 0.000702177570589169110


def smf(length=100.0, alpha=0.0, beta2=0.0, **kw):
    return FiberParams(length=length, beta_plus=BETA_PLUS, beta_minus=BETA_MINUS, gamma=GAMMA,
                       alpha=alpha, beta2_pump=beta2, **kw)


def pump(energy=2500.0):
    return PumpConfig(energy=energy, intensity_fwhm=5.0)


def scenario(length=100.0, signal_nm=1310.0, energy=2500.0, grid=None, **kw):
    grid = grid or make_grid(2048, 256.0)
    return SwitchScenario(fiber=smf(length), pump=pump(energy), signal_wavelength=signal_nm, grid=grid, **kw)


@pytest.fixture
def fiber100():
    return smf(100.0)


@pytest.fixture
def scen100():
    return scenario()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
