"""Write the golden amplitude files from a direct index-arithmetic oracle.

Nothing here uses the simulator: every amplitude is written down from the
closed-form states.  Index bit ``j`` is qubit ``j``.

    python3 scripts/make_golden.py
"""

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "tecsim" / "data" / "golden"
ALPHA, BETA = math.cos(math.pi / 8), math.sin(math.pi / 8)


def bit(i, q):
    return (i >> q) & 1


def repetition(alpha, beta):
    v = np.zeros(8, complex)
    v[0b000], v[0b111] = alpha, beta
    return v


def bell6():
    v = np.zeros(64, complex)
    v[0] = v[63] = 1 / math.sqrt(2)
    return v


def parity_word(logical):
    """Amplitudes of |0>_L or |1>_L on four qubits paired (0,1), (2,3)."""
    v = np.zeros(16, complex)
    for i in range(16):
        if bit(i, 0) == bit(i, 1) and bit(i, 2) == bit(i, 3):
            sign = (-1) ** (bit(i, 0) + bit(i, 2)) if logical else 1
            v[i] = sign / 2
    return v


def parity4(alpha, beta):
    return alpha * parity_word(0) + beta * parity_word(1)


def bell_parity8():
    # first block on qubits 0-3, second on 4-7
    v = np.zeros(256, complex)
    for i in range(256):
        lo, hi = i & 15, i >> 4
        v[i] = (parity_word(0)[lo] * parity_word(0)[hi] + parity_word(1)[lo] * parity_word(1)[hi]) / math.sqrt(2)
    return v


def paper_sequence():
    t = np.diag([1, np.exp(1j * math.pi / 4)])
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    s = np.diag([1, 1j])
    return s @ h @ t @ np.array([1, 0], complex)


FILES = {
    "repetition3": ("alpha|000> + beta|111>, alpha=cos(pi/8)", repetition(ALPHA, BETA)),
    "bell6": ("(|000000> + |111111>)/sqrt(2)", bell6()),
    "parity4": ("alpha|0>_L + beta|1>_L of the 4-qubit parity code, alpha=cos(pi/8)", parity4(ALPHA, BETA)),
    "bell_parity8": ("(|0>_L|0>_L + |1>_L|1>_L)/sqrt(2), blocks on qubits 0-3 and 4-7", bell_parity8()),
    "paper_sequence": ("S H T |0>", paper_sequence()),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (desc, vec) in FILES.items():
        doc = {
            "description": desc,
            "num_qubits": int(round(math.log2(len(vec)))),
            "amplitudes": [[float(a.real), float(a.imag)] for a in vec],
        }
        (OUT / f"{name}.json").write_text(json.dumps(doc) + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
