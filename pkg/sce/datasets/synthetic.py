import logging

import numpy as np
import pandas as pd
from scipy.stats import norm

from sce.core.engine.sampler import PairSampler
from sce.core.models import GeneratorSpec, SampleConfig

logger = logging.getLogger(__name__)

LIFE_EXPECTANCY_SIZE = 225
LIFE_EXPECTANCY_SEED = 2006
LIFE_EXPECTANCY_COLUMNS = ("life_expectancy", "female_male_gap")

# keeps the normal quantile finite; u and v never come closer to 0 or 1 in practice
_QUANTILE_CLIP = 1e-12


def life_expectancy_standin(n: int = LIFE_EXPECTANCY_SIZE, seed: int = LIFE_EXPECTANCY_SEED) -> pd.DataFrame:
    """
    Synthetic stand-in for a per-country table of life expectancy at birth (years)
    and the female minus male life expectancy gap (years).

    The pairs are a sample of the analytic copula with k = 2 pushed through strictly
    increasing marginals, so every rank statistic of the table equals that of the
    copula sample. Same arguments, same table.

    The table is generated rather than stored: `sce dataset` writes it with `%.17g`
    floats, so every run produces the same bytes for a given numpy and scipy
    installation.

    The real table (CIA World Factbook, http://www.odci.gov/cia/publications/factbook/)
    is not redistributed; pass it to `sce workflow --in` when available.
    """
    u, v = PairSampler().sample_pairs(GeneratorSpec.analytic(2.0), SampleConfig(n=n, seed=seed))
    u = np.clip(u, _QUANTILE_CLIP, 1.0 - _QUANTILE_CLIP)
    v = np.clip(v, _QUANTILE_CLIP, 1.0 - _QUANTILE_CLIP)
    frame = pd.DataFrame({
        LIFE_EXPECTANCY_COLUMNS[0]: 67.0 + 8.0 * norm.ppf(u),
        LIFE_EXPECTANCY_COLUMNS[1]: 4.8 + 2.2 * norm.ppf(v),
    })
    logger.debug(f"Generated life expectancy stand-in: n={n}, seed={seed}")
    return frame
