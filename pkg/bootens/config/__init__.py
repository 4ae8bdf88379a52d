from .config_file import ConfigFile
from .experiment_config import (
    CONFIG_ENV,
    EXPERIMENTS,
    METHODS,
    TEMPLATE,
    VARIANTS,
    Exp2Config,
    Exp3Config,
    Exp4Config,
    ExperimentConfig,
    VariantsConfig,
    config_from_dict,
    load_experiment_config,
    template_document,
    with_overrides,
)

__all__ = [
    "CONFIG_ENV",
    "ConfigFile",
    "EXPERIMENTS",
    "Exp2Config",
    "Exp3Config",
    "Exp4Config",
    "ExperimentConfig",
    "METHODS",
    "TEMPLATE",
    "VARIANTS",
    "VariantsConfig",
    "config_from_dict",
    "load_experiment_config",
    "template_document",
    "with_overrides",
]
