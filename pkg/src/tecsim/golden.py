"""Access to the checked-in golden amplitude files (written by scripts/make_golden.py)."""

import json
from importlib import resources

import numpy as np

NAMES = ("repetition3", "bell6", "parity4", "bell_parity8", "paper_sequence")


def load_golden(name: str) -> np.ndarray:
    if name not in NAMES:
        raise KeyError(f"no golden state {name!r}; known: {NAMES}")
    doc = json.loads(resources.files("tecsim").joinpath(f"data/golden/{name}.json").read_text())
    return np.array([complex(re, im) for re, im in doc["amplitudes"]])
