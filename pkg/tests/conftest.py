import math

import numpy as np
import pytest

from cayley_moser import Exponential, Pareto, PolicyCurve, ResidualSpec, Uniform

E = math.e


def worked_setups():
    """Offer law, residual equal to the offer, unit arrival rate."""
    out = []
    for offer in (Uniform(1.0, 3.0), Exponential(2.0), Pareto(1.0, 3.0)):
        res = ResidualSpec.same_as(offer)
        out.append((offer, res, PolicyCurve(offer, offer.mean, 1.0)))
    return out


@pytest.fixture(params=[0, 1, 2], ids=["uniform", "exponential", "pareto"])
def worked(request):
    return worked_setups()[request.param]


def trapezoid(f, lo, hi, n):
    x = np.linspace(lo, hi, n + 1)
    y = f(x)
    return float((hi - lo) / n * (0.5 * y[0] + y[1:-1].sum() + 0.5 * y[-1]))
