import numpy as np
import pytest

from pbec import CavityConfig, build_mode_ladder, reference_dye


@pytest.fixture(scope="session")
def std_cavity():
    # 1/kappa = 5 ps, isotropic 1.5 THz trap
    return CavityConfig(q=10, lambda0_nm=570.0, f_x_thz=1.5, f_y_thz=1.5,
                        kappa=2.0e11, n_medium=1.44, roc_um=400.0)


@pytest.fixture(scope="session")
def ref_dye():
    return reference_dye()


@pytest.fixture(scope="session")
def ladder20(std_cavity):
    return build_mode_ladder(std_cavity, 20)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240613)
