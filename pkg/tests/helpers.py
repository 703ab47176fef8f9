"""Shared test helpers."""
import numpy as np

from floatnorm import sampling
from floatnorm.cascade import layout
from floatnorm.neural import init_network
from floatnorm.sampling import specs_for

TINY = (16, 16)


def untrained_inverse(stage, seed=0, hidden=TINY):
    _, _, inv_in, k = layout(stage)
    return init_network((inv_in, *hidden, k), output_activation="sigmoid",
                        seed=seed,
                        metadata={"stage": stage,
                                  "parameter_order":
                                      [s.name for s in specs_for(stage)]})


def random_constraints(stage, rng, p_fixed=0.15):
    out = []
    for s in specs_for(stage):
        x = rng.uniform(s.global_min, s.global_max)
        out.append(sampling.sample_local_range(s, x, rng, p_fixed=p_fixed))
    return out
