"""Reference systems used by ``ddeacs verify`` and the test suite."""

from __future__ import annotations

import numpy as np

from .core import LinearDDE

SYSTEMS = {
    "scalar_class1": LinearDDE.scalar(-0.5, -1.0),
    "scalar_class0": LinearDDE.scalar(-2.0, 1.0),
    "detB0_class1": LinearDDE([[-0.6, 0.2], [0.2, -2.0]], [[1.0, -1.0], [-1.0, 1.0]]),
    "negC_class1": LinearDDE([[1.0, -2.0], [4.0, -3.0]], [[-3.0, 4.0], [-2.0, 1.55]]),
    "posC_class1": LinearDDE([[2.0, 1.0], [3.0, 1.0]], [[2.0, -1.0], [1.0, 1.0]]),
    "general_class2": LinearDDE([[-0.5, 4.5], [-1.5, 0.0]], [[-0.5, -4.5], [0.0, -1.5]]),
    "rotational_class2": LinearDDE([[0.5, 3.5], [-3.5, 0.5]], 2.2 * np.eye(2)),
    "detB0_class3": LinearDDE([[1.0, -2.0], [4.0, -3.0]], [[2.0, -1.0], [-2.0, 1.0]]),
    "sum_class3": LinearDDE([[1.0, -2.0], [4.0, -2.2]], [[-1.0, -0.2], [-4.0, 3.0]]),
    "diff_class3": LinearDDE([[1.0, -2.0], [4.0, -3.0]], [[1.0, -0.5], [4.0, -3.0]]),
    "no_delay_effect": LinearDDE([[0.0, 1.0], [-1.0, 0.0]], np.zeros((2, 2))),
}

EXPECTED_CLASS = {
    "scalar_class1": "I",
    "scalar_class0": "0",
    "detB0_class1": "I",
    "negC_class1": "I",
    "posC_class1": "I",
    "general_class2": "II",
    "rotational_class2": "II",
    "detB0_class3": "III",
    "sum_class3": "III",
    "diff_class3": "III",
    "no_delay_effect": "0",
}
