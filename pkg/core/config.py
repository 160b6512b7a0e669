from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Parameter validation
    INTEGER_TOLERANCE: float = 1e-9
    DEGENERACY_TOLERANCE: float = 1e-12

    # Radial propagation (radii in units of rho0)
    RHO_START_FACTOR: float = 1e-4
    STEP_FLOOR_FACTOR: float = 1e-14
    INTEGRATION_TOLERANCE: float = 1e-10
    INTEGRATION_METHOD: str = "DOP853"
    ATOL_RELATIVE_FLOOR: float = 1e-30
    ATOL_ABSOLUTE_FLOOR: float = 1e-300
    PROPAGATION_TOLERANCE: float = 1e-6
    RESIDUAL_TOLERANCE: float = 1e-8

    # Verification grid
    GRID_MIN_FACTOR: float = 1e-3
    GRID_MAX_FACTOR: float = 20.0
    GRID_POINTS: int = 100

    # Norm quadrature and divergence detection
    QUADRATURE_TOLERANCE: float = 1e-10
    QUADRATURE_LIMIT: int = 200
    DIVERGENCE_START_FACTOR: float = 1e3
    DIVERGENCE_GROWTH_FACTOR: float = 1.5
    DIVERGENCE_DOUBLINGS: int = 5
    ORIGIN_SAMPLE_FACTORS: Tuple[float, float] = (1e-8, 5e-9)
    TAIL_SAMPLE_FACTORS: Tuple[float, float] = (1e8, 2e8)
    SLOPE_MARGIN: float = 1e-6
    AGREEMENT_TOLERANCE: float = 1e-8

    # Scans
    N_RANGE: Tuple[int, int] = (-5, 5)
    SCAN_CONCURRENCY: int = 4

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: str = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

    model_config = SettingsConfigDict(frozen=True)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # Constructor arguments only: no environment, no .env files
        return (init_settings,)


settings = Settings()
