from .params import (
    NormalizedParams,
    SystemParams,
    load_params,
    normalize,
    params_to_text,
    threads_from_env,
    with_overrides,
)

__all__ = [
    "NormalizedParams",
    "SystemParams",
    "load_params",
    "normalize",
    "params_to_text",
    "threads_from_env",
    "with_overrides",
]
