import os
from pathlib import Path

from dynaconf import Dynaconf, Validator

# Default to the development layer unless an environment is chosen explicitly;
# [default] then carries the production numbers for batch runs.
if "CARNOTMOD_APP_ENV" not in os.environ:
    os.environ["CARNOTMOD_APP_ENV"] = "development"

# Directory of the carnotmod package
BASE_DIR = Path(__file__).parent
DEFAULT_SETTINGS_PATH = BASE_DIR / "default_settings.yaml"

settings = Dynaconf(
    envvar_prefix="CARNOTMOD",
    # Library defaults first
    preload=[str(DEFAULT_SETTINGS_PATH)],
    # User settings from the current working directory
    # Order matters: later files override earlier ones
    settings_files=[
        "settings.toml",
        "settings.yaml",
        "settings.local.toml",
        "settings.local.yaml",
    ],
    # Enable environment layering (e.g. [development], [production])
    environments=True,
    # Switch environment using CARNOTMOD_APP_ENV
    env_switcher="CARNOTMOD_APP_ENV",
    load_dotenv=True,
)

# Ensure critical settings exist
settings.validators.register(
    Validator("LOGGING", must_exist=True),
    Validator("SOLVER", must_exist=True),
    Validator("REFINEMENT", must_exist=True),
    Validator("MONTE_CARLO", must_exist=True),
    Validator("FAMILIES", must_exist=True),
    Validator("NORM", must_exist=True),
    Validator("THREADS", must_exist=True, gte=1),
)

settings.validators.validate()
