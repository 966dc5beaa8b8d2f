"""Property suite run by ``gsan propcheck``.

Every check draws its own small complexes from a generator seeded by
(seed, check, trial), so one check can be rerun in isolation and still see
the same inputs. A check returns the measured quantity and whether it passed;
the report keeps the worst value seen per check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .autodiff import Tape, cross_entropy, finite_difference_check
from .complex import SimplicialComplex, build_complex
from .config import LayerConfig, ModelConfig, ReadoutConfig
from .datasets.lifting import random_clique_complex
from .errors import GsanError
from .filters import CochainBundle
from .logger import progress
from .models import SimplicialModel
from .nn.attention import attention_coefficients
from .nn.layers import gsan_layer_forward
from .nn.params import (
    init_head_params,
    materialized_breakdown,
    parameter_breakdown,
    parameter_count,
    store_size,
)
from .operators import (
    KERNEL_THRESHOLD,
    ComplexOperators,
    complex_operators,
    harmonic_projector,
    hodge_decompose,
)
from .sparse import SparseOperator

_log = logging.getLogger(__name__)

FORMAT_VERSION = 1
FAULTS = ("b2_sign",)
PROJECTOR_STEPS = (1, 2, 4, 8, 16, 32, 64, 128, 200)
FAMILIES = ("gsan", "gsccn", "gsan-joint")

Outcome = tuple[float, bool]
CheckFn = Callable[[np.random.Generator, "str | None"], Outcome]


@dataclass(frozen=True)
class Check:
    name: str
    fn: CheckFn
    tolerance: float
    measure: str = "max_abs_error"

    @property
    def higher_is_worse(self) -> bool:
        return self.measure != "min_separation"


CHECKS: dict[str, Check] = {}


def register(name: str, tolerance: float, measure: str = "max_abs_error"):
    def wrap(fn: CheckFn) -> CheckFn:
        CHECKS[name] = Check(name, fn, tolerance, measure)
        return fn
    return wrap


@dataclass
class CheckResult:
    name: str
    measure: str
    tolerance: float
    trials: int = 0
    failures: int = 0
    worst_error: float | None = None
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.failures == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "trials": self.trials,
            "failures": self.failures,
            "measure": self.measure,
            "tolerance": self.tolerance,
            "worst_error": self.worst_error,
            "messages": self.messages,
        }


# -- helpers ----------------------------------------------------------------

def _with_b2_sign_error(B: SparseOperator) -> SparseOperator:
    triplets = B.triplets()
    if not triplets:
        return B
    i, j, v = triplets[0]
    triplets[0] = (i, j, -v)
    return SparseOperator.from_triplets(B.rows, B.cols, triplets, exact=True)


def operators_with_fault(X: SimplicialComplex, fault: str | None = None) -> ComplexOperators:
    """Operators of ``X``; ``fault="b2_sign"`` flips the sign of one entry of B_2."""
    if fault is None:
        return complex_operators(X)
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    boundaries = [X.boundary(k) for k in range(1, X.max_order + 1)]
    if len(boundaries) >= 2:
        boundaries[1] = _with_b2_sign_error(boundaries[1])
    return ComplexOperators.from_boundaries(X.sizes, boundaries)


def _random_bundle(sizes: Iterable[int], width: int, rng: np.random.Generator) -> CochainBundle:
    return CochainBundle(tuple(rng.normal(size=(n, width)) for n in sizes))


def _equivariance_setup(rng: np.random.Generator, fault: str | None, signed: bool):
    X = random_clique_complex(rng, n_vertices=(4, 7), min_top=1)
    ops = operators_with_fault(X, fault)
    cfg = LayerConfig(
        J=int(rng.integers(1, 4)), F_in=3, F_out=2, heads=2,
        nonlinearity="tanh" if signed else "leaky_relu",
        signed_masking=signed,
    )
    params = [init_head_params(cfg, X.max_order, "gsan", rng) for _ in range(cfg.heads)]
    Z = _random_bundle(X.sizes, cfg.F_in, rng)
    return X, ops, cfg, params, Z


# -- checks -----------------------------------------------------------------

@register("dirac_identity", tolerance=0.0)
def check_dirac_identity(rng: np.random.Generator, fault: str | None) -> Outcome:
    X = random_clique_complex(rng, n_vertices=(4, 7), min_top=1)
    ops = operators_with_fault(X, fault)
    D = ops.dirac().D
    squared = (D @ D).matrix
    blocks = sp.block_diag([L.matrix for L in ops.laplacians.full], format="csr")
    diff = abs(squared - blocks)
    err = float(diff.max()) if diff.nnz else 0.0
    return err, err == 0.0


@register("hodge_orthogonality", tolerance=1e-10)
def check_hodge_orthogonality(rng: np.random.Generator, fault: str | None) -> Outcome:
    X = random_clique_complex(rng, n_vertices=(4, 7))
    x = rng.normal(size=X.n_simplices(1))
    grad, curl, harm = hodge_decompose(X, 1, x)
    scale = max(1.0, float(x @ x))
    err = max(
        abs(float(grad @ curl)), abs(float(grad @ harm)), abs(float(curl @ harm)),
        float(np.linalg.norm(grad + curl + harm - x)),
    ) / scale
    return err, err <= 1e-10


@register("projector_convergence", tolerance=1e-3)
def check_projector_convergence(rng: np.random.Generator, fault: str | None) -> Outcome:
    X = random_clique_complex(rng, n_vertices=(4, 7))
    ops = complex_operators(X)
    worst, ok = 0.0, True
    for k in range(X.max_order + 1):
        L = ops.laplacians.full[k].todense()
        if L.shape[0] == 0:
            continue
        lam = float(np.max(scipy.linalg.eigvalsh(L)))
        if lam <= KERNEL_THRESHOLD:
            continue
        kernel = scipy.linalg.null_space(L, rcond=KERNEL_THRESHOLD)
        Q = kernel @ kernel.T
        errors = [
            float(np.linalg.norm(harmonic_projector(ops, k, J, 1.0 / lam).Q_hat.todense() - Q))
            for J in PROJECTOR_STEPS
        ]
        monotone = all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
        ok = ok and monotone and errors[-1] < 1e-3
        worst = max(worst, errors[-1])
    return worst, ok


@register("permutation_equivariance", tolerance=1e-9)
def check_permutation_equivariance(rng: np.random.Generator, fault: str | None) -> Outcome:
    X, ops, cfg, params, Z = _equivariance_setup(rng, fault, signed=False)
    perms = [rng.permutation(n) for n in X.sizes]
    out = gsan_layer_forward(ops, cfg, params, Z)
    moved = gsan_layer_forward(ops.permuted(perms), cfg, params, Z.permuted(perms))
    err = out.permuted(perms).max_abs_diff(moved)
    return err, err <= 1e-9


@register("orientation_equivariance", tolerance=1e-9)
def check_orientation_equivariance(rng: np.random.Generator, fault: str | None) -> Outcome:
    X, ops, cfg, params, Z = _equivariance_setup(rng, fault, signed=True)
    signs = [np.ones(n) for n in X.sizes]
    signs[1] = rng.choice([-1.0, 1.0], size=X.n_simplices(1))
    out = gsan_layer_forward(ops, cfg, params, Z)
    flipped = gsan_layer_forward(ops.reoriented(signs), cfg, params, Z.reoriented(signs))
    err = out.reoriented(signs).max_abs_diff(flipped)
    return err, err <= 1e-9


FILLED_TRIANGLE = ((0, 1, 2),)
HOLLOW_TRIANGLE = ((0, 1), (1, 2), (0, 2))


@register("simplicial_awareness", tolerance=1e-6, measure="min_separation")
def check_simplicial_awareness(rng: np.random.Generator, fault: str | None, draws: int = 10) -> Outcome:
    filled = complex_operators(build_complex(FILLED_TRIANGLE, 2))
    hollow = complex_operators(build_complex(HOLLOW_TRIANGLE, 2))
    cfg = LayerConfig(J=2, F_in=2, F_out=3, heads=1, nonlinearity="tanh")
    best = 0.0
    for _ in range(draws):
        params = init_head_params(cfg, 2, "gsan", rng)
        shared = _random_bundle(filled.sizes[:2], cfg.F_in, rng)
        Z_filled = CochainBundle(shared.blocks + (rng.normal(size=(filled.sizes[2], cfg.F_in)),))
        Z_hollow = CochainBundle(shared.blocks + (np.zeros((0, cfg.F_in)),))
        a = gsan_layer_forward(filled, cfg, params, Z_filled)
        b = gsan_layer_forward(hollow, cfg, params, Z_hollow)
        best = max(best, max(float(np.linalg.norm(a[k] - b[k])) for k in (0, 1)))
        if best > 1e-6:
            break
    return best, best > 1e-6


@register("gradient_check", tolerance=1e-4)
def check_gradients(rng: np.random.Generator, fault: str | None) -> Outcome:
    X = random_clique_complex(rng, n_vertices=(4, 6), min_top=1, max_total=24)
    ops = operators_with_fault(X, fault)
    layer = LayerConfig(J=2, F_out=2, heads=2, nonlinearity="tanh")
    config = ModelConfig(family="gsan", layers=[layer, layer], readout=ReadoutConfig(kind="complex", hidden=4))
    model = SimplicialModel(config, X.max_order, 2).init(rng)
    bundle = _random_bundle(X.sizes, 2, rng)
    label = np.asarray([int(rng.integers(2))])

    def loss_of(params):
        tape = Tape()
        out = replace(model, params=dict(params)).forward(tape, ops, bundle)
        return tape, cross_entropy(tape, out, label)

    report = finite_difference_check(loss_of, model.params, rtol=1e-4)
    worst = max(report.max_rel_error.values(), default=0.0)
    return worst, report.passed


@register("row_stochasticity", tolerance=1e-10)
def check_row_stochasticity(rng: np.random.Generator, fault: str | None) -> Outcome:
    X = random_clique_complex(rng, n_vertices=(4, 7))
    ops = complex_operators(X)
    worst = 0.0
    for k in range(X.max_order + 1):
        if X.n_simplices(k) == 0:
            continue
        for side in ("d", "u", "full"):
            if side != "full" and ops.laplacian(k, side) is None:
                continue
            h = rng.normal(size=(X.n_simplices(k), 3))
            lap = attention_coefficients(h, rng.normal(size=6), ops.support(k, side), k=k, variant=(side, 1))
            worst = max(worst, float(np.max(np.abs(lap.row_sums() - 1.0))))
    return worst, worst <= 1e-10


@register("parameter_accounting", tolerance=0.0)
def check_parameter_accounting(rng: np.random.Generator, fault: str | None) -> Outcome:
    J, F_in, F_out, heads = (int(v) for v in (rng.integers(1, 5), rng.integers(1, 9), rng.integers(1, 9), rng.integers(1, 4)))
    max_order = int(rng.integers(1, 4))
    cfg = LayerConfig(J=J, F_in=F_in, F_out=F_out, heads=heads)
    err = 0
    sizes = {}
    for family in FAMILIES:
        params = init_head_params(cfg, max_order, family, rng)
        expected = parameter_breakdown(cfg, max_order, family)
        found = materialized_breakdown(params)
        err += sum(abs(found[kind] - expected[kind]) for kind in expected)
        err += abs(store_size(params) - sum(expected.values()))
        sizes[family] = found["filters"]
    # the F_in-dependent part of the published count is the separate filter stack
    err += abs(parameter_count(cfg) - heads * (sizes["gsan"] + 14 * J * F_out))
    err += abs(2 * sizes["gsan-joint"] - sizes["gsan"])
    return float(err), err == 0


# -- runner -----------------------------------------------------------------

def _worse(check: Check, a: float | None, b: float) -> float:
    if a is None:
        return b
    return max(a, b) if check.higher_is_worse else min(a, b)


def run_check(check: Check, seed: int, index: int, n_trials: int, fault: str | None = None) -> CheckResult:
    result = CheckResult(check.name, check.measure, check.tolerance)
    for trial in range(n_trials):
        rng = np.random.default_rng([seed, index, trial])
        try:
            value, ok = check.fn(rng, fault)
        except GsanError as exc:
            value, ok = float("inf"), False
            result.messages.append(f"trial {trial}: {exc.code}: {exc.message}")
        result.trials += 1
        result.worst_error = _worse(check, result.worst_error, float(value))
        if not ok:
            result.failures += 1
    log = _log.info if result.passed else _log.warning
    log("check=%s trials=%d failures=%d worst=%s", check.name, result.trials, result.failures, result.worst_error)
    return result


def run_propcheck(
    seed: int = 0,
    n_trials: int = 5,
    fault: str | None = None,
    checks: Iterable[str] | None = None,
) -> dict:
    """Run the registered checks and return the JSON report.

    ``status`` is ``passed`` or ``failed``, or ``vacuous`` when nothing ran
    (``n_trials=0`` or an empty selection).
    """
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    names = list(CHECKS) if checks is None else list(checks)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    results = []
    if n_trials > 0:
        order = list(CHECKS)
        for name in progress(names, desc="propcheck"):
            results.append(run_check(CHECKS[name], seed, order.index(name), n_trials, fault))
    if not results:
        status = "vacuous"
    else:
        status = "passed" if all(r.passed for r in results) else "failed"
    return {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "n_trials": n_trials,
        "fault": fault,
        "status": status,
        "failed": [r.name for r in results if not r.passed],
        "checks": [r.to_dict() for r in results],
    }
