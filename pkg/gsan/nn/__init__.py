from .attention import (
    AttentionalLaplacian,
    assemble_attentional_laplacian,
    attention_coefficients,
    support_from_neighborhoods,
)
from .layers import gsan_joint_layer_forward, gsan_layer_forward, gsccn_layer_forward, layer_nodes
from .multihead import multi_head_combine
from .params import attention_keys, init_head_params, parameter_count
from .readout import candidate_faces, candidate_scores, readout

__all__ = [
    "AttentionalLaplacian",
    "assemble_attentional_laplacian",
    "attention_coefficients",
    "attention_keys",
    "candidate_faces",
    "candidate_scores",
    "gsan_joint_layer_forward",
    "gsan_layer_forward",
    "gsccn_layer_forward",
    "init_head_params",
    "layer_nodes",
    "multi_head_combine",
    "parameter_count",
    "readout",
    "support_from_neighborhoods",
]
