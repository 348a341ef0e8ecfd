import numpy as np
import pytest
from scipy.linalg import eigh

from pend3d.dynamics import BodyParams
from pend3d.errors import BalancedBody, NotAnEquilibrium
from pend3d.linearization import (eig_agreement, equilibrium_state, fd_jacobian,
                                  linearize, simultaneous_diagonalize, stiffness)


def oracle_freqs(p):
    # generalized eigenproblem K v = lam J v, independent of the modal code
    lam = eigh(stiffness(p), p.J, eigvals_only=True)
    lam = np.sort(lam)[::-1]
    return np.sqrt(lam[:2])


def test_stiffness_example(body):
    K = stiffness(body)
    np.testing.assert_allclose(K, np.diag([2.943, 2.943, 0.0]), atol=1e-15)


def test_simultaneous_diagonalize(body, elliptic):
    for p in (body, elliptic):
        D = simultaneous_diagonalize(p)
        np.testing.assert_allclose(D.M @ D.M.T, p.J, atol=1e-14)
        np.testing.assert_allclose(D.M @ np.diag(D.Lambda) @ D.M.T, stiffness(p), atol=1e-12)
        assert D.Lambda[0] >= D.Lambda[1] >= D.Lambda[2]
        assert abs(D.Lambda[2]) < 1e-12
    # repeated eigenvalues still give a deterministic answer
    iso = BodyParams(J=[0.2, 0.2, 0.2])
    a, b = simultaneous_diagonalize(iso), simultaneous_diagonalize(iso)
    np.testing.assert_array_equal(a.M, b.M)


def test_hanging_frequencies(body):
    lin = linearize(body, "hanging", "lr")
    ev = lin.eigenvalues
    np.testing.assert_allclose(np.abs(ev.real), 0, atol=1e-12)
    w = np.sort(np.abs(ev.imag))[::-1][::2]
    np.testing.assert_allclose(w, [4.75800, 3.24202], atol=1e-4)
    np.testing.assert_allclose(w, oracle_freqs(body), rtol=1e-12)
    assert lin.verdict == "LyapunovStableCandidate"


def test_inverted_is_unstable(body):
    lin = linearize(body, "inverted", "lr")
    assert lin.verdict == "Unstable"
    np.testing.assert_allclose(np.abs(lin.eigenvalues.imag), 0, atol=1e-12)
    r = np.sort(np.abs(lin.eigenvalues.real))[::-1][::2]
    np.testing.assert_allclose(r, oracle_freqs(body), rtol=1e-12)


def test_model_dimensions(body):
    for model, n in (("full", 6), ("lp", 5), ("lr", 4)):
        assert linearize(body, "hanging", model).A.shape == (n, n)


def test_uncertified_is_inconclusive(body):
    assert linearize(body, "hanging", "lr", certify=False).verdict == "Inconclusive"


@pytest.mark.parametrize("which", ["hanging", "inverted"])
@pytest.mark.parametrize("model", ["full", "lp", "lr"])
def test_fd_agreement(body, elliptic, which, model):
    for p in (body, elliptic):
        lin = linearize(p, which, model)
        A = fd_jacobian(p, model, equilibrium_state(p, which, model))
        assert eig_agreement(lin, A) <= 1e-5


def test_fd_rejects_non_equilibrium(body):
    from pend3d.dynamics import LPState
    with pytest.raises(NotAnEquilibrium):
        fd_jacobian(body, "lp", LPState([1, 0, 0], np.zeros(3)))
    with pytest.raises(ValueError):
        fd_jacobian(body, "lp", equilibrium_state(body, "hanging", "lp"), h=1e-2)


def test_balanced_body():
    with pytest.raises(BalancedBody):
        linearize(BodyParams(J=[0.3, 0.2, 0.1], rho=[0, 0, 0], balanced=True))
