"""Settings of purepat runs: defaults < environment variables < flags."""

import os
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError


# Environment variables that can override defaults, and the setting they set
ENVIRONMENT = {
    'PUREPAT_WORKERS': 'workers',
    'PUREPAT_BACKEND': 'backend',
    'PUREPAT_PAIR_BATCH': 'pair_batch',
    'PUREPAT_COVERAGE_BLOCK': 'coverage_block',
    'PUREPAT_MEMORY_BUDGET': 'memory_budget_bytes',
}

STATS_MODES = ('batch', 'train')


def default_workers():
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Settings:
    """All tunable parameters of a training / prediction / benchmark run.

    Parameters
    ----------
    - `label_column` (str, default 'label'): name of the class column.
    - `attack_values` (frozenset or None): raw labels meaning attack. If None,
      every label that is not a normal value is an attack.
    - `normal_values` (frozenset or None, default {'normal'}): raw labels
      meaning normal. If None, every label that is not an attack is normal.
    - `decimals` (int, default 2): rounding precision of z-scores.
    - `pair_batch` (int, default 8192): peers per broadcast-AND batch.
    - `coverage_block` (int, default 4096): patterns per coverage batch.
    - `memory_budget_bytes` (int, default 512 MiB): soft cap on temporaries.
    - `backend` (str, default 'parallel-cpu'): kernel backend name.
    - `workers` (int, default: number of CPUs): threads of parallel backends.
    - `r` (float, default 0.568): outlier multiplier of the normal evidence.
    - `stats_mode` ('batch' or 'train'): where mu_N / sigma_N are fitted.
    - `shuffle` (bool, default False) and `seed` (int, default 0): optional
      seeded shuffling before ratio splits.
    """

    label_column: str = 'label'
    attack_values: frozenset = None
    normal_values: frozenset = field(default_factory=lambda: frozenset({'normal'}))
    decimals: int = 2
    pair_batch: int = 8192
    coverage_block: int = 4096
    memory_budget_bytes: int = 512 * 2**20
    backend: str = 'parallel-cpu'
    workers: int = field(default_factory=default_workers)
    r: float = 0.568
    stats_mode: str = 'batch'
    shuffle: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ('pair_batch', 'coverage_block', 'workers',
                     'memory_budget_bytes'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be >= 1, got {getattr(self, name)}')
        if self.decimals < 0:
            raise ConfigError(f'decimals must be >= 0, got {self.decimals}')
        if self.r < 0:
            raise ConfigError(f'r must be non-negative, got {self.r}')
        if self.stats_mode not in STATS_MODES:
            raise ConfigError(f'stats_mode must be one of {STATS_MODES}, '
                              f'got {self.stats_mode!r}')
        if self.attack_values is None and self.normal_values is None:
            raise ConfigError('At least one of attack / normal label values '
                              'must be given.')

    def updated(self, **kwargs):
        """New settings with the non-None keyword values replacing current ones."""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f'Unknown settings: {sorted(unknown)}')
        return replace(self, **changes)

    @classmethod
    def from_environment(cls, environ=None, **kwargs):
        """Defaults overridden by environment variables, then by kwargs."""
        environ = os.environ if environ is None else environ
        env_values = {}
        for variable, name in ENVIRONMENT.items():
            value = environ.get(variable)
            if value in (None, ''):
                continue
            if name == 'backend':
                env_values[name] = value
            else:
                try:
                    env_values[name] = int(value)
                except ValueError:
                    raise ConfigError(f'{variable} must be an integer, got {value!r}')
        return cls().updated(**env_values).updated(**kwargs)

    def kernel_config(self):
        from .kernels import KernelConfig
        return KernelConfig(pair_batch=self.pair_batch,
                            coverage_block=self.coverage_block,
                            memory_budget_bytes=self.memory_budget_bytes)

    def make_backend(self):
        from .kernels import get_backend
        return get_backend(self.backend, config=self.kernel_config(),
                           workers=self.workers)
