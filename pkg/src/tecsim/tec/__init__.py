"""The two teleportation-based error-correction pipelines."""

from .analysis import (
    SyndromeRecord,
    decoded_distribution,
    decoded_fidelity,
    decoded_qubit_density,
    bisect_noise,
    decoded_fidelity_under_noise,
    noisy_output,
    output_density,
    sample_decoded,
    syndrome,
)
from .bitflip import build_bitflip_tec_circuit, build_phaseflip_tec_circuit, coherent_correct, syndrome_extract, teleport_conditionals_3
from .codes import (
    BITFLIP_LAYOUT,
    ERASURE_DEVICE_LAYOUT,
    ERASURE_LAYOUT,
    BlockLayout,
    ErasureFlag,
    MessageMode,
    MessageParams,
    encode_parity4,
    encode_repetition3,
    prepare_logical_bell_3,
    prepare_logical_bell_erasure,
    prepare_message,
    select_logical_representatives,
)
from .erasure import build_erasure_tec_circuit, extract_erasure_flag, qnd_detect
from .frame import PauliFrame, apply_pauli_frame, frame_from_rules
