from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    app_name: str = "mhdkin - MHD kinematics mixed finite element solver"
    version: str = "0.1.0"
    debug: bool = False

    # Discretization settings
    quadrature_degree: int = 6
    error_quadrature_degree: int = 8
    assembly_chunk_size: int = 2048
    max_default_level: int = 3

    # Solver settings
    outer_tol: float = 1e-10
    inner_tol: float = 1e-3
    restart: int = 200
    outer_max_iterations: int = 400
    inner_max_iterations: int = 2000
    inner_restart: int = 60
    q_hat_iterations: int = 5
    reorth_tol: float = 1e-8
    ilu_drop_tol: float = 1e-4
    ilu_fill_factor: float = 10.0
    amg_max_coarse: int = 100
    dense_size_cap: int = 2000
    unit_cluster_tol: float = 1e-4

    # Study settings
    workers: int = 1

    model_config = SettingsConfigDict(env_file=".env", env_prefix="MHDKIN_")


settings = Settings()
