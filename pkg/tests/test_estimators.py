import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import FunctionTransformer

from buckleopt import BucklingEigenvalues, Disk, PerimeterConstrainedOptimizer, Rectangle
from buckleopt.errors import InvalidDomainError
from buckleopt.geometry import domain_to_dict


def test_get_set_params_and_clone():
    est = BucklingEigenvalues(n_eigenvalues=2, resolution=32)
    assert est.get_params()["n_eigenvalues"] == 2
    other = clone(est).set_params(extrapolate=True)
    assert other.extrapolate and not est.extrapolate
    opt = PerimeterConstrainedOptimizer(K=3, random_state=7)
    assert clone(opt).get_params() == opt.get_params()


def test_transform_shapes():
    est = BucklingEigenvalues(n_eigenvalues=2, resolution=24).fit()
    X = [Disk((0.0, 0.0), 1.0), domain_to_dict(Rectangle((0, 0), 1, 1))]
    out = est.transform(X)
    assert out.shape == (2, 2)
    assert np.all(np.diff(out, axis=1) >= 0)
    assert list(est.get_feature_names_out()) == ["lambda1", "lambda2"]
    assert est.transform(Disk((0.0, 0.0), 2.0))[0, 0] == pytest.approx(out[0, 0] / 4, rel=1e-3)


def test_transform_requires_fit():
    with pytest.raises(NotFittedError):
        BucklingEigenvalues().transform([Disk((0, 0), 1.0)])


def test_invalid_inputs():
    with pytest.raises(ValueError):
        BucklingEigenvalues(n_eigenvalues=0).fit()
    with pytest.raises(TypeError):
        BucklingEigenvalues(resolution=2.5).fit()
    with pytest.raises(InvalidDomainError):
        BucklingEigenvalues().fit().transform([3.0])
    with pytest.raises(ValueError):
        BucklingEigenvalues().fit().transform([])


def test_in_pipeline():
    pipe = Pipeline([("eig", BucklingEigenvalues(resolution=24)),
                     ("log", FunctionTransformer(np.log))])
    out = pipe.fit_transform([Disk((0, 0), 1.0)])
    assert out.shape == (1, 1) and np.isfinite(out).all()


def test_optimizer_fit_predict():
    opt = PerimeterConstrainedOptimizer(K=1, max_evals=6, extrapolate=False, random_state=0)
    with pytest.raises(NotFittedError):
        opt.predict([[0.0, 0.0]])
    opt.fit()
    assert opt.n_evaluations_ == 6
    assert opt.objective_ == pytest.approx(opt.trace_.final.objective_value)
    pred = opt.predict([[0.0, 0.0], [0.1, 0.0]])
    assert pred.shape == (2,)
    assert pred[0] == pytest.approx(opt.trace_.evaluations[0].objective_value)
    assert opt.score([[0.0, 0.0]]) == pytest.approx(-pred[0])
    with pytest.raises(ValueError):
        opt.predict([[0.0, 0.0, 0.0]])
    assert np.isinf(opt.predict([[5.0, 0.0]])[0])
