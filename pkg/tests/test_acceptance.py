"""Desk-scale acceptance runs. Deselected by default; run with ``pytest -m slow``."""
import numpy as np
import pytest

from gsan.config import get_paths, load_run_config
from gsan.datasets import generate_for_config
from gsan.evaluation import evaluate
from gsan.models import SimplicialModel
from gsan.propcheck import run_propcheck
from gsan.training import Trainer

pytestmark = pytest.mark.slow

PROPERTY_TRIALS = {
    "dirac_identity": 50,
    "hodge_orthogonality": 100,
    "projector_convergence": 20,
    "permutation_equivariance": 50,
    "orientation_equivariance": 20,
    "simplicial_awareness": 1,
    "gradient_check": 5,
    "row_stochasticity": 20,
    "parameter_accounting": 10,
}


def _train(task, seed, tmp_path):
    config = load_run_config(f"{get_paths().configs_dir}/{task}.json", {"seed": seed, "out": str(tmp_path)})
    dataset = generate_for_config(config)
    model = SimplicialModel(config.model, dataset.complex.max_order, dataset.inputs[0].width)
    model.init(np.random.default_rng(seed))
    Trainer(model, config.training, seed=seed).fit(dataset)
    return evaluate(model, dataset, "test")


@pytest.mark.parametrize("name,trials", sorted(PROPERTY_TRIALS.items()))
def test_property_at_acceptance_scale(name, trials):
    report = run_propcheck(seed=0, n_trials=trials, checks=[name])
    assert report["status"] == "passed", report["checks"][0]


def test_trajectory_classification(tmp_path):
    assert _train("synthetic_flow", 0, tmp_path)["accuracy"] >= 0.95


def test_cyclic_flow_orientation(tmp_path):
    assert _train("cyclic_flow", 0, tmp_path)["accuracy"] >= 0.95


@pytest.mark.parametrize("seed", range(5))
def test_missing_data_imputation(tmp_path, seed):
    metrics = _train("mdi", seed, tmp_path)
    assert metrics["accuracy"] >= 0.8
    assert metrics["accuracy"] >= metrics["baseline_accuracy"] + 0.1


@pytest.mark.parametrize("seed", range(5))
def test_simplex_prediction(tmp_path, seed):
    metrics = _train("simplex_prediction", seed, tmp_path)
    assert metrics["auc"] >= 0.9 or metrics["auc"] >= metrics["baseline_auc"] + 0.05
