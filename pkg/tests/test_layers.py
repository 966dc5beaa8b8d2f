import numpy as np
import pytest

from gsan.complex import build_complex
from gsan.config import LayerConfig
from gsan.datasets.lifting import random_clique_complex
from gsan.errors import ShapeError
from gsan.filters import CochainBundle
from gsan.nn.layers import gsan_joint_layer_forward, gsan_layer_forward, gsccn_layer_forward
from gsan.nn.multihead import multi_head_combine
from gsan.nn.params import filter_parameter_size, init_head_params
from gsan.operators import complex_operators

from tests import oracles


@pytest.fixture(scope="session")
def strip():
    # three filled triangles in a row plus a dangling edge
    return build_complex([(0, 1, 2), (1, 2, 3), (2, 3, 4), (4, 5)], 2)


@pytest.fixture(scope="session")
def tetra():
    return build_complex([(0, 1, 2, 3)], 3)


def _cfg(**kw) -> LayerConfig:
    base = dict(J=3, F_in=2, F_out=3, heads=1, nonlinearity="identity", harmonic_eps=0.1)
    base.update(kw)
    return LayerConfig(**base)


def _inputs(X, width=2, seed=0) -> CochainBundle:
    rng = np.random.default_rng(seed)
    return CochainBundle.from_stacked(rng.normal(size=(X.total_size, width)), X.sizes)


def _projectors(X, cfg):
    ops = complex_operators(X)
    return [ops.projector(k, cfg.projector_steps, cfg.eps_for(k)).todense() for k in range(X.max_order + 1)]


@pytest.mark.parametrize("J", [1, 2, 3, 4])
def test_gsccn_head_matches_dense_powers(strip, J):
    cfg = _cfg(J=J)
    params = init_head_params(cfg, strip.max_order, "gsccn", np.random.default_rng(J), attention=False)
    Z = _inputs(strip)
    out = gsccn_layer_forward(strip, cfg, params, Z)
    expected = oracles.dense_separate_head(strip, params, list(Z.blocks), J, projectors=_projectors(strip, cfg))
    for k in range(strip.max_order + 1):
        assert np.allclose(out[k], expected[k], atol=1e-10)


def test_gsccn_on_a_three_dimensional_complex(tetra):
    cfg = _cfg(J=2, use_harmonic=False)
    params = init_head_params(cfg, tetra.max_order, "gsccn", np.random.default_rng(0), attention=False)
    Z = _inputs(tetra)
    out = gsccn_layer_forward(tetra, cfg, params, Z)
    expected = oracles.dense_separate_head(tetra, params, list(Z.blocks), 2)
    for k in range(4):
        assert np.allclose(out[k], expected[k], atol=1e-10)


@pytest.mark.parametrize("J", [2, 3])
def test_gsan_head_matches_dense_attention(strip, J):
    cfg = _cfg(J=J)
    ops = complex_operators(strip)
    params = init_head_params(cfg, strip.max_order, "gsan", np.random.default_rng(10 + J))
    Z = _inputs(strip, seed=J)
    blocks = list(Z.blocks)
    B = oracles.dense_boundaries(strip)

    def adjacency(k, side, c):
        stack = "W_d" if (k if side == "d" else k + 1) % 2 == 1 else "W_u"
        if c == 1:
            parts = [blocks[k] @ params[f"{stack}.{2 * p}"] for p in range(1, J // 2 + 1)]
        else:
            cross = B[k - 1].T @ blocks[k - 1] if side == "d" else B[k] @ blocks[k + 1]
            parts = [cross @ params[f"{stack}.{2 * p + 1}"] for p in range((J + 1) // 2)]
        h = np.concatenate(parts, axis=1)
        return oracles.dense_attention(h, params[f"a.{k}.{side}.{c}"], ops.support(k, side).neighbor_lists())

    out = gsan_layer_forward(strip, cfg, params, Z)
    expected = oracles.dense_separate_head(
        strip, params, blocks, J, adjacency=adjacency, projectors=_projectors(strip, cfg)
    )
    for k in range(3):
        assert np.allclose(out[k], expected[k], atol=1e-10)


def test_gsan_is_permutation_equivariant(strip):
    cfg = _cfg(J=3, heads=2, nonlinearity="leaky_relu")
    params = [init_head_params(cfg, 2, "gsan", np.random.default_rng(h)) for h in range(2)]
    ops = complex_operators(strip)
    Z = _inputs(strip, seed=4)
    rng = np.random.default_rng(5)
    perms = [rng.permutation(n) for n in strip.sizes]
    out = gsan_layer_forward(ops, cfg, params, Z)
    moved = gsan_layer_forward(ops.permuted(perms), cfg, params, Z.permuted(perms))
    assert moved.max_abs_diff(out.permuted(perms)) < 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_auto_step_size_keeps_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    X = random_clique_complex(rng, n_vertices=(5, 7), min_top=1)
    cfg = _cfg(J=3, heads=2, nonlinearity="leaky_relu", harmonic_eps="auto")
    params = [init_head_params(cfg, 2, "gsan", rng) for _ in range(2)]
    ops = complex_operators(X)
    Z = _inputs(X, seed=seed)
    perms = [rng.permutation(n) for n in X.sizes]
    out = gsan_layer_forward(ops, cfg, params, Z)
    moved = gsan_layer_forward(ops.permuted(perms), cfg, params, Z.permuted(perms))
    assert moved.max_abs_diff(out.permuted(perms)) < 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_auto_step_size_keeps_orientation_equivariance(seed):
    rng = np.random.default_rng(100 + seed)
    X = random_clique_complex(rng, n_vertices=(5, 7), min_top=1)
    cfg = _cfg(J=3, heads=2, nonlinearity="tanh", signed_masking=True, harmonic_eps="auto")
    params = [init_head_params(cfg, 2, "gsan", rng) for _ in range(2)]
    ops = complex_operators(X)
    Z = _inputs(X, seed=seed)
    signs = [np.ones(n) for n in X.sizes]
    signs[1] = rng.choice([-1.0, 1.0], size=X.n_simplices(1))
    out = gsan_layer_forward(ops, cfg, params, Z)
    flipped = gsan_layer_forward(ops.reoriented(signs), cfg, params, Z.reoriented(signs))
    assert flipped.max_abs_diff(out.reoriented(signs)) < 1e-9


def test_recorded_attention_is_row_stochastic(strip):
    cfg = _cfg(J=2)
    params = init_head_params(cfg, 2, "gsan", np.random.default_rng(0))
    record: dict = {}
    gsan_layer_forward(strip, cfg, params, _inputs(strip), record=record)
    assert (0, 0, 1, "d", 1) in record and (0, 0, 0, "u", 2) in record
    assert (0, 0, 0, "d", 1) not in record
    for att in record.values():
        assert np.allclose(att.row_sums(), 1.0, atol=1e-10)


def test_inactive_orders_come_back_as_zeros(strip):
    cfg = _cfg(J=2, heads=2)
    params = [init_head_params(cfg, 2, "gsan", np.random.default_rng(h), active_orders=[1]) for h in range(2)]
    out = gsan_layer_forward(strip, cfg, params, _inputs(strip), active_orders=[1])
    assert out.width == 6
    assert not out[0].any() and not out[2].any()
    assert out[1].any()


def test_concat_and_average_widths(strip):
    Z = _inputs(strip)
    for combine, width in (("concat", 6), ("average", 3)):
        cfg = _cfg(J=2, heads=2, head_combine=combine)
        params = [init_head_params(cfg, 2, "gsccn", np.random.default_rng(h), attention=False) for h in range(2)]
        assert gsccn_layer_forward(strip, cfg, params, Z).width == width


def test_average_is_the_mean_of_single_heads(strip):
    cfg = _cfg(J=2)
    Z = _inputs(strip)
    params = [init_head_params(cfg, 2, "gsccn", np.random.default_rng(h), attention=False) for h in range(2)]
    singles = [gsccn_layer_forward(strip, cfg, P, Z) for P in params]
    both = gsccn_layer_forward(strip, cfg.model_copy(update={"heads": 2, "head_combine": "average"}), params, Z)
    assert both.max_abs_diff(multi_head_combine(singles, "average")) < 1e-12


def test_missing_parameter_is_a_shape_error(strip):
    cfg = _cfg(J=2)
    params = init_head_params(cfg, 2, "gsccn", np.random.default_rng(0), attention=False)
    del params["W_h"]
    with pytest.raises(ShapeError):
        gsccn_layer_forward(strip, cfg, params, _inputs(strip))


def test_input_width_is_checked(strip):
    cfg = _cfg(J=2)
    params = init_head_params(cfg, 2, "gsccn", np.random.default_rng(0), attention=False)
    with pytest.raises(ShapeError):
        gsccn_layer_forward(strip, cfg, params, _inputs(strip, width=3))


def test_joint_head_uses_half_the_filter_parameters():
    cfg = _cfg(J=4)
    separate = init_head_params(cfg, 2, "gsan", np.random.default_rng(0))
    joint = init_head_params(cfg, 2, "gsan-joint", np.random.default_rng(0))
    assert filter_parameter_size(separate) == 2 * filter_parameter_size(joint) == 2 * 4 * 2 * 3
    assert "W_h" not in joint
    assert "a.1.full.1" in joint and "a.1.d.1" not in joint


def test_joint_without_attention_matches_dense(strip):
    J = 3
    cfg = _cfg(J=J)
    params = init_head_params(cfg, 2, "gsan-joint", np.random.default_rng(1), attention=False)
    Z = _inputs(strip)
    blocks = list(Z.blocks)
    full, down, up = oracles.dense_laplacians(strip)
    B = oracles.dense_boundaries(strip)
    out = gsan_joint_layer_forward(strip, cfg, params, Z)
    for k in range(3):
        y = sum(np.linalg.matrix_power(full[k], p) @ blocks[k] @ params[f"W.{2 * p}"] for p in range(1, J // 2 + 1))
        if k >= 1:
            cross = B[k - 1].T @ blocks[k - 1]
            y = y + sum(np.linalg.matrix_power(down[k], p) @ cross @ params[f"W.{2 * p + 1}"] for p in range(2))
        if k < 2:
            cross = B[k] @ blocks[k + 1]
            y = y + sum(np.linalg.matrix_power(up[k], p) @ cross @ params[f"W.{2 * p + 1}"] for p in range(2))
        assert np.allclose(out[k], y, atol=1e-10)


def test_joint_turns_attention_on_when_vectors_are_present(strip):
    cfg = _cfg(J=2)
    with_att = init_head_params(cfg, 2, "gsan-joint", np.random.default_rng(2))
    record: dict = {}
    gsan_joint_layer_forward(strip, cfg, with_att, _inputs(strip), record=record)
    assert (0, 0, 1, "full", 1) in record
